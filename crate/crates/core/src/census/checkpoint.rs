//! Chunked, resumable band census with a JSON-lines checkpoint.
//!
//! Each finished chunk is appended as one [`CensusRecord`] line. On restart
//! the recorded chunks are taken as done and only the uncovered parts of each
//! band are counted, so a run can be killed at any point without double
//! counting. A torn final line (no trailing newline) is discarded.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use super::{band_bounds, check_budget, count_range, CensusOptions, CensusRecord, Convention};
use crate::error::{Error, Result};
use crate::scheme::CantorScheme;

/// Parameters of a banded census run.
#[derive(Debug, Clone)]
pub struct CensusRun<'a> {
    pub scheme: &'a CantorScheme,
    pub n_lo: u32,
    pub n_hi: u32,
    pub chunk_size: u64,
    pub convention: Convention,
    pub checkpoint: Option<PathBuf>,
    pub options: CensusOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Band {
    n: u32,
    s: u64,
    t: u64,
    lo: u64,
    hi: u64,
}

/// Counts bands `n_lo..=n_hi` chunk by chunk and returns one merged record
/// per band.
pub fn run_census(run: &CensusRun<'_>) -> Result<Vec<CensusRecord>> {
    if run.n_hi < run.n_lo {
        return Err(Error::Parse(format!(
            "bad band range {}..={}",
            run.n_lo, run.n_hi
        )));
    }
    if run.chunk_size == 0 {
        return Err(Error::Parse("chunk size must be positive".into()));
    }
    let scheme_text = run.scheme.to_string();
    let mut bands = Vec::new();
    for n in run.n_lo..=run.n_hi {
        let (s, t) = band_bounds(run.scheme, n)?;
        check_budget(t, &run.options.budget)?;
        if let Some((lo, hi)) = run.convention.range(s, t) {
            bands.push(Band { n, s, t, lo, hi });
        }
    }

    let mut done: BTreeMap<(u64, u64), Vec<CensusRecord>> = BTreeMap::new();
    if let Some(path) = &run.checkpoint {
        for rec in load(path, &scheme_text, run.convention)? {
            done.entry((rec.s, rec.t)).or_default().push(rec);
        }
    }

    let mut todo: Vec<(Band, u64, u64)> = Vec::new();
    for band in &bands {
        let recorded = done.entry((band.s, band.t)).or_default();
        normalize(recorded, band, run.checkpoint.as_deref())?;
        let mut cursor = band.lo;
        for rec in recorded.iter() {
            push_chunks(
                &mut todo,
                band,
                cursor,
                rec.chunk[0].saturating_sub(1),
                run.chunk_size,
            );
            cursor = rec.chunk[1] + 1;
        }
        push_chunks(&mut todo, band, cursor, band.hi, run.chunk_size);
    }

    let writer = match &run.checkpoint {
        Some(path) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(path)?,
        )),
        None => None,
    };
    // chunks run in parallel; each one counts serially
    let inner = CensusOptions {
        parallel: false,
        ..run.options
    };
    let count_chunk = |(band, lo, hi): &(Band, u64, u64)| -> Result<CensusRecord> {
        let start = Instant::now();
        let count = count_range(run.scheme, *lo, *hi, &inner);
        let rec = CensusRecord {
            scheme: scheme_text.clone(),
            s: band.s,
            t: band.t,
            count,
            convention: run.convention,
            chunk: [*lo, *hi],
            ms: start.elapsed().as_millis() as u64,
        };
        if let Some(w) = &writer {
            let mut line = serde_json::to_string(&rec).expect("record serializes");
            line.push('\n');
            let mut file = w.lock().expect("checkpoint writer poisoned");
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        Ok(rec)
    };
    let fresh: Vec<CensusRecord> = if run.options.parallel {
        todo.par_iter().map(count_chunk).collect::<Result<_>>()?
    } else {
        todo.iter().map(count_chunk).collect::<Result<_>>()?
    };

    for rec in fresh {
        done.entry((rec.s, rec.t)).or_default().push(rec);
    }
    Ok(bands
        .iter()
        .map(|band| {
            let chunks = &done[&(band.s, band.t)];
            CensusRecord {
                scheme: scheme_text.clone(),
                s: band.s,
                t: band.t,
                count: chunks.iter().map(|c| c.count).sum(),
                convention: run.convention,
                chunk: [band.lo, band.hi],
                ms: chunks.iter().map(|c| c.ms).sum(),
            }
        })
        .collect())
}

fn push_chunks(todo: &mut Vec<(Band, u64, u64)>, band: &Band, lo: u64, hi: u64, size: u64) {
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(size - 1).min(hi);
        todo.push((*band, a, b));
        if b == u64::MAX {
            break;
        }
        a = b + 1;
    }
}

/// Sorts a band's recorded chunks, drops exact duplicates and rejects
/// overlaps or chunks outside the band.
fn normalize(recs: &mut Vec<CensusRecord>, band: &Band, path: Option<&Path>) -> Result<()> {
    let corrupt = |reason: String| Error::CorruptCheckpoint {
        path: path.map(Path::to_path_buf).unwrap_or_default(),
        reason,
    };
    recs.sort_by_key(|r| r.chunk);
    recs.dedup_by(|b, a| a.chunk == b.chunk && a.count == b.count);
    for r in recs.iter() {
        if r.chunk[0] > r.chunk[1] || r.chunk[0] < band.lo || r.chunk[1] > band.hi {
            return Err(corrupt(format!(
                "chunk {:?} lies outside band [{}, {}]",
                r.chunk, band.lo, band.hi
            )));
        }
    }
    for w in recs.windows(2) {
        if w[0].chunk == w[1].chunk {
            return Err(corrupt(format!(
                "chunk {:?} recorded with counts {} and {}",
                w[0].chunk, w[0].count, w[1].count
            )));
        }
        if w[1].chunk[0] <= w[0].chunk[1] {
            return Err(corrupt(format!(
                "chunks {:?} and {:?} overlap",
                w[0].chunk, w[1].chunk
            )));
        }
    }
    Ok(())
}

/// Reads a checkpoint, truncating a torn final line in place.
fn load(path: &Path, scheme: &str, convention: Convention) -> Result<Vec<CensusRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let corrupt = |reason: String| Error::CorruptCheckpoint {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path)?;
    let complete = match bytes.iter().rposition(|&b| b == b'\n') {
        Some(i) => i + 1,
        None => 0,
    };
    if complete < bytes.len() {
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(complete as u64)?;
    }
    let mut out = Vec::new();
    let reader = BufReader::new(File::open(path)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CensusRecord =
            serde_json::from_str(&line).map_err(|e| corrupt(format!("line {}: {e}", i + 1)))?;
        if rec.scheme != scheme {
            return Err(corrupt(format!(
                "line {}: scheme {} does not match {scheme}",
                i + 1,
                rec.scheme
            )));
        }
        if rec.convention != convention {
            return Err(corrupt(format!(
                "line {}: convention {} does not match {convention}",
                i + 1,
                rec.convention
            )));
        }
        out.push(rec);
    }
    Ok(out)
}
