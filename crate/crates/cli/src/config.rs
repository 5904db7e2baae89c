use std::fs;
use std::path::{Path, PathBuf};

use cantor_core::{Budget, CantorScheme, Error, Result};
use serde::{Deserialize, Serialize};

use crate::output::Format;

/// Settings shared by every subcommand, read from TOML. Command-line flags
/// override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scheme: String,
    pub format: Format,
    /// Worker threads; 0 lets rayon decide, 1 forces serial scans.
    pub threads: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stream seed used when no `--x-*` flag is given.
    pub seed: u64,
    pub budget: Budget,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            scheme: "b=3;S=0,2".into(),
            format: Format::Table,
            threads: 0,
            checkpoint: None,
            seed: 1,
            budget: Budget::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.scheme()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn scheme(&self) -> Result<CantorScheme> {
        self.scheme.parse()
    }
}
