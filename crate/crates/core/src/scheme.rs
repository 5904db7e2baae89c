//! Cantor-like sets `C(b, S)`: the points of `[0, 1]` with a base-`b`
//! expansion whose digits all lie in `S`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest base accepted by [`CantorScheme::new`]. Digit lookup tables are
/// sized by the base.
pub const MAX_BASE: u64 = 1 << 16;

/// A validated digit scheme together with its derived invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorScheme {
    base: u32,
    digits: Vec<u32>,
    allowed: Vec<bool>,
    min_base: u32,
    power: u32,
    min_digits: Vec<u32>,
    dimension: f64,
}

impl CantorScheme {
    /// Validates `(b, S)` and derives `a`, `b0`, `r`, `S0` and the dimension.
    pub fn new(base: u64, digits: &[u64]) -> Result<Self> {
        if base <= 2 || base > MAX_BASE {
            return Err(Error::BadBase(base));
        }
        let mut set: Vec<u32> = Vec::with_capacity(digits.len());
        for &d in digits {
            if d >= base {
                return Err(Error::BadDigits(format!(
                    "digit {d} is not below base {base}"
                )));
            }
            set.push(d as u32);
        }
        set.sort_unstable();
        set.dedup();
        if set.len() <= 1 {
            return Err(Error::BadDigits("at least two digits are required".into()));
        }
        if set.len() as u64 == base {
            return Err(Error::BadDigits("digit set must be a proper subset".into()));
        }
        let base = base as u32;
        let (min_base, min_digits, power) = reduce_to_minimal_base(base, &set);
        let mut allowed = vec![false; base as usize];
        for &d in &set {
            allowed[d as usize] = true;
        }
        let dimension = (set.len() as f64).ln() / (base as f64).ln();
        Ok(CantorScheme {
            base,
            digits: set,
            allowed,
            min_base,
            power,
            min_digits,
            dimension,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `a = |S|`.
    pub fn cardinality(&self) -> u32 {
        self.digits.len() as u32
    }

    /// `b0`, the least integer `> 1` under whose shift map the set is invariant.
    pub fn min_base(&self) -> u32 {
        self.min_base
    }

    /// `r` with `b = b0^r`.
    pub fn power(&self) -> u32 {
        self.power
    }

    /// `S0`, the digit set over `b0`.
    pub fn min_digits(&self) -> &[u32] {
        &self.min_digits
    }

    /// Similarity dimension `ln a / ln b`.
    pub fn dimension(&self) -> f64 {
        self.dimension
    }

    #[inline]
    pub fn contains_digit(&self, d: u32) -> bool {
        self.allowed.get(d as usize).copied().unwrap_or(false)
    }

    /// The same set described over `b0` with digit set `S0`.
    pub fn minimal(&self) -> CantorScheme {
        if self.power == 1 {
            return self.clone();
        }
        let digits: Vec<u64> = self.min_digits.iter().map(|&d| d as u64).collect();
        CantorScheme::new(self.min_base as u64, &digits)
            .expect("minimal scheme of a valid scheme is valid")
    }
}

/// Returns `(b0, S0, r)` for a validated scheme.
pub fn minimal_base(scheme: &CantorScheme) -> (u32, Vec<u32>, u32) {
    (scheme.min_base, scheme.min_digits.clone(), scheme.power)
}

fn reduce_to_minimal_base(base: u32, set: &[u32]) -> (u32, Vec<u32>, u32) {
    for root in 2..base {
        let Some(power) = exact_log(base, root) else {
            continue;
        };
        if let Some(sub) = split_digits(set, root, power) {
            return (root, sub, power);
        }
    }
    (base, set.to_vec(), 1)
}

/// `Some(r)` when `base == root^r`.
fn exact_log(base: u32, root: u32) -> Option<u32> {
    let mut acc = root as u64;
    let mut r = 1;
    while acc < base as u64 {
        acc *= root as u64;
        r += 1;
    }
    (acc == base as u64).then_some(r)
}

/// Splits each digit into `power` base-`root` digits and accepts iff the set is
/// the full `power`-fold product of the digits seen.
fn split_digits(set: &[u32], root: u32, power: u32) -> Option<Vec<u32>> {
    let mut seen = vec![false; root as usize];
    for &d in set {
        let mut v = d;
        for _ in 0..power {
            seen[(v % root) as usize] = true;
            v /= root;
        }
    }
    let sub: Vec<u32> = (0..root).filter(|&d| seen[d as usize]).collect();
    if (sub.len() as u64).checked_pow(power)? != set.len() as u64 {
        return None;
    }
    // every concatenation of sub-digits must be present
    let mut words: Vec<u32> = vec![0];
    for _ in 0..power {
        words = words
            .iter()
            .flat_map(|&w| sub.iter().map(move |&s| w * root + s))
            .collect();
    }
    words
        .iter()
        .all(|w| set.binary_search(w).is_ok())
        .then_some(sub)
}

impl fmt::Display for CantorScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b={};S={}", self.base, format_digits(&self.digits))
    }
}

impl FromStr for CantorScheme {
    type Err = Error;

    /// Parses the text form `b=<int>;S=<d1>,<d2>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let mut base = None;
        let mut digits = None;
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::Parse(format!("expected key=value in scheme, got {part:?}"))
            })?;
            match key.trim() {
                "b" => {
                    let b = value
                        .trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("base {value:?}: {e}")))?;
                    base = Some(b);
                }
                "S" => digits = Some(parse_digits(value)?),
                other => return Err(Error::Parse(format!("unknown scheme key {other:?}"))),
            }
        }
        let base = base.ok_or_else(|| Error::Parse("scheme is missing b=".into()))?;
        let digits = digits.ok_or_else(|| Error::Parse("scheme is missing S=".into()))?;
        CantorScheme::new(base, &digits)
    }
}

/// Renders a digit word as comma-separated decimal integers.
pub fn format_digits(digits: &[u32]) -> String {
    let mut out = String::with_capacity(digits.len() * 2);
    for (i, d) in digits.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&d.to_string());
    }
    out
}

/// Parses a comma-separated digit word. The empty string is the empty word.
pub fn parse_digits(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("digit {t:?}: {e}")))
        })
        .collect()
}
