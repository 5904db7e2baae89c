//! Empirical approximation quality for a point of `C`: best intrinsic
//! approximations, exponent envelopes, and continued-fraction convergents.
//!
//! Every strict inequality here is decided by exact comparison against a
//! refining enclosure of `x`; floating point only appears in reported scores.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::census::members_with_denominator;
use crate::error::{Error, Result};
use crate::membership::contains;
use crate::rational::{
    display_fraction, from_biguint, ln_rational, ratio, to_biguint, to_f64, BigRational,
};
use crate::scheme::CantorScheme;
use crate::stream::{Approximand, DigitStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxRecord {
    pub p: u64,
    pub q: u64,
    /// Closed enclosure of `|x - p/q|`.
    #[serde(skip)]
    pub error_lo: BigRational,
    #[serde(skip)]
    pub error_hi: BigRational,
    /// `|x - p/q| * q * (log_b0 q)^(1/d)`, for `q >= b0`.
    pub badness: Option<f64>,
    /// Least badness over this and all earlier records.
    pub running_badness: Option<f64>,
    /// `eps` with `|x - p/q| = q^-(1+eps)`; absent for `q = 1` or zero error.
    pub epsilon: Option<f64>,
}

impl ApproxRecord {
    pub fn value(&self) -> BigRational {
        ratio(self.p, self.q)
    }

    pub fn error_lo_f64(&self) -> f64 {
        to_f64(&self.error_lo)
    }

    pub fn error_hi_f64(&self) -> f64 {
        to_f64(&self.error_hi)
    }
}

/// Successive best intrinsic approximations with `q <= q_max`, ordered by
/// `q`. Each record is strictly closer to `x` than every candidate with a
/// smaller denominator.
#[derive(Debug, Clone)]
pub struct ApproxRecordTable {
    pub q_max: u64,
    pub records: Vec<ApproxRecord>,
    x: Approximand,
}

impl ApproxRecordTable {
    /// Least badness over the scan, a lower envelope for `c(x)` on `[b0, q_max]`.
    pub fn badness_envelope(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.badness)
            .reduce(f64::min)
    }

    /// Greatest exponent over the scan.
    pub fn epsilon_envelope(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.epsilon)
            .reduce(f64::max)
    }

    /// CSV with columns `q,p,error_lo,error_hi,badness,epsilon`.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        let mut out = String::from("q,p,error_lo,error_hi,badness,epsilon\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{:.9e},{:.9e},{},{}\n",
                r.q,
                r.p,
                r.error_lo_f64(),
                r.error_hi_f64(),
                opt(r.badness),
                opt(r.epsilon)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "q": r.q,
                    "p": r.p,
                    "error_lo": r.error_lo_f64(),
                    "error_hi": r.error_hi_f64(),
                    "badness": r.badness,
                    "epsilon": r.epsilon,
                })
            })
            .collect();
        serde_json::json!({
            "x": self.x.stream().spec().to_string(),
            "q_range": [1, self.q_max],
            "badness_envelope": self.badness_envelope(),
            "epsilon_envelope": self.epsilon_envelope(),
            "records": rows,
        })
    }
}

/// Index of the first member `p` with `p/q >= x`, by exact comparison.
fn partition_point(x: &mut Approximand, q: u64, members: &[u64]) -> Result<usize> {
    let (mut lo, mut hi) = (0, members.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if x.cmp_rational(&ratio(members[mid], q))? == Ordering::Greater {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The member with denominator `q` nearest to `x`; ties go to the smaller `p`.
fn nearest_member(x: &mut Approximand, scheme: &CantorScheme, q: u64) -> Result<Option<u64>> {
    let members = members_with_denominator(scheme, q);
    if members.is_empty() {
        return Ok(None);
    }
    let i = partition_point(x, q, &members)?;
    Ok(Some(
        match (
            i.checked_sub(1).map(|j| members[j]),
            members.get(i).copied(),
        ) {
            (Some(a), Some(b)) => {
                if x.closer(&ratio(b, q), &ratio(a, q))? {
                    b
                } else {
                    a
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!(),
        },
    ))
}

const CHUNK: usize = 64;

/// Scans every Cantor rational with denominator at most `q_max` and keeps
/// the successive error minimizers.
pub fn best_intrinsic(
    x: &DigitStream,
    scheme: &CantorScheme,
    q_max: u64,
    budget: &Budget,
) -> Result<ApproxRecordTable> {
    if q_max == 0 {
        return Err(Error::Parse("q_max must be at least 1".into()));
    }
    if q_max > budget.max_denominator {
        return Err(Error::guard("q_max", q_max, budget.max_denominator));
    }
    let base = Approximand::new(x.clone(), budget.max_stream_digits);
    let qs: Vec<u64> = (1..=q_max).collect();
    let nearest: Vec<Vec<(u64, u64)>> = qs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut local = base.clone();
            chunk
                .iter()
                .filter_map(|&q| {
                    nearest_member(&mut local, scheme, q)
                        .map(|p| p.map(|p| (p, q)))
                        .transpose()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut x = base;
    let mut best: Option<BigRational> = None;
    let mut picked = Vec::new();
    for (p, q) in nearest.into_iter().flatten() {
        let cand = ratio(p, q);
        let better = match &best {
            None => true,
            Some(b) => x.closer(&cand, b)?,
        };
        if better {
            best = Some(cand);
            picked.push((p, q));
        }
    }

    let digits = 2 * (64 - q_max.leading_zeros()) as usize + 64;
    let mut records = Vec::with_capacity(picked.len());
    let mut running: Option<f64> = None;
    for (p, q) in picked {
        let (lo, hi) = error_enclosure(&mut x, &ratio(p, q), digits, budget)?;
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        let badness = (q >= scheme.min_base() as u64).then(|| intrinsic_badness(&mid, q, scheme));
        if let Some(b) = badness {
            running = Some(running.map_or(b, |r: f64| r.min(b)));
        }
        let epsilon =
            (q >= 2 && !mid.is_zero()).then(|| -ln_rational(&mid) / (q as f64).ln() - 1.0);
        records.push(ApproxRecord {
            p,
            q,
            error_lo: lo,
            error_hi: hi,
            badness,
            running_badness: running,
            epsilon,
        });
    }
    Ok(ApproxRecordTable { q_max, records, x })
}

/// `err * q * (log_b0 q)^(1/d)`.
pub fn intrinsic_badness(err: &BigRational, q: u64, scheme: &CantorScheme) -> f64 {
    let lq = (q as f64).ln() / (scheme.min_base() as f64).ln();
    to_f64(err) * q as f64 * lq.powf(1.0 / scheme.dimension())
}

/// Enclosure of `|x - c|` tight to about nine significant digits.
fn error_enclosure(
    x: &mut Approximand,
    c: &BigRational,
    start: usize,
    budget: &Budget,
) -> Result<(BigRational, BigRational)> {
    let mut m = start.max(x.precision());
    loop {
        let (lo, hi) = x.distance_enclosure(c, m)?;
        let tight =
            x.exact_value().is_some() || (!lo.is_zero() && to_f64(&((&hi - &lo) / &lo)) < 1e-9);
        let limit = x
            .stream()
            .available()
            .unwrap_or(usize::MAX)
            .min(budget.max_stream_digits);
        if tight || m >= limit {
            return Ok((lo, hi));
        }
        m = (m * 2).min(limit);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VwaFlags {
    pub epsilon: String,
    /// Indices into the table's records.
    pub indices: Vec<usize>,
    pub count: usize,
}

/// Records with `|x - p/q| < q^-(1+eps)`, decided exactly for rational `eps`.
pub fn vwa_flags(
    table: &mut ApproxRecordTable,
    epsilon: &BigRational,
    budget: &Budget,
) -> Result<VwaFlags> {
    if !epsilon.is_positive() {
        return Err(Error::Parse(format!(
            "epsilon must be positive, got {}",
            display_fraction(epsilon)
        )));
    }
    let u = epsilon
        .numer()
        .to_u32()
        .ok_or_else(|| Error::Parse("epsilon numerator too large".into()))?;
    let v = epsilon
        .denom()
        .to_u32()
        .ok_or_else(|| Error::Parse("epsilon denominator too large".into()))?;
    let mut indices = Vec::new();
    for i in 0..table.records.len() {
        if vwa_holds(table, i, u, v, budget)? {
            indices.push(i);
        }
    }
    Ok(VwaFlags {
        epsilon: display_fraction(epsilon),
        count: indices.len(),
        indices,
    })
}

/// `err^v * q^(u+v) < 1`, refining the error enclosure until decided.
fn vwa_holds(
    table: &mut ApproxRecordTable,
    i: usize,
    u: u32,
    v: u32,
    budget: &Budget,
) -> Result<bool> {
    let q = table.records[i].q;
    let scale = BigRational::from_integer(BigInt::from(q).pow(u + v));
    let one = BigRational::one();
    let value = table.records[i].value();
    let mut m = table.x.precision();
    loop {
        let r = &table.records[i];
        if (r.error_hi.pow(v as i32) * &scale) < one {
            return Ok(true);
        }
        if (r.error_lo.pow(v as i32) * &scale) >= one {
            return Ok(false);
        }
        let limit = table
            .x
            .stream()
            .available()
            .unwrap_or(usize::MAX)
            .min(budget.max_stream_digits);
        if table.x.exact_value().is_some() || m >= limit {
            return Err(Error::PrecisionExhausted {
                needed: m + 1,
                available: limit,
            });
        }
        m = (m * 2).min(limit);
        let (lo, hi) = table.x.distance_enclosure(&value, m)?;
        let r = &mut table.records[i];
        r.error_lo = lo;
        r.error_hi = hi;
    }
}

/// Continued-fraction terms shared by every point of `[lo, hi]`.
fn certain_terms(lo: &BigRational, hi: &BigRational, limit: usize) -> Vec<BigInt> {
    let mut terms = Vec::new();
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    while terms.len() < limit {
        let a = lo.floor();
        if hi.floor() != a {
            break;
        }
        let a_int = a.to_integer();
        terms.push(a_int);
        let dl = &lo - &a;
        let dh = &hi - &a;
        if dl.is_zero() {
            break;
        }
        lo = dh.recip();
        hi = dl.recip();
    }
    terms
}

fn exact_terms(x: &BigRational, limit: usize) -> Vec<BigInt> {
    let mut terms = Vec::new();
    let mut y = x.clone();
    while terms.len() < limit {
        let a = y.floor();
        terms.push(a.to_integer());
        let frac = &y - &a;
        if frac.is_zero() {
            break;
        }
        y = frac.recip();
    }
    terms
}

fn convergents_of(terms: &[BigInt]) -> Vec<BigRational> {
    let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
    let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
    terms
        .iter()
        .map(|a| {
            let h = a * &h1 + &h2;
            let k = a * &k1 + &k2;
            h2 = std::mem::replace(&mut h1, h.clone());
            k2 = std::mem::replace(&mut k1, k.clone());
            BigRational::new(h, k)
        })
        .collect()
}

/// The first `count` continued-fraction convergents of `x`. A rational `x`
/// with fewer terms yields its full list, ending at `x` itself.
pub fn convergents(x: &DigitStream, count: usize, budget: &Budget) -> Result<Vec<BigRational>> {
    let mut approximand = Approximand::new(x.clone(), budget.max_stream_digits);
    let terms = if let Some(v) = approximand.exact_value() {
        exact_terms(v, count)
    } else {
        let limit = x
            .available()
            .unwrap_or(usize::MAX)
            .min(budget.max_stream_digits);
        let mut m = (4 * count).max(32).min(limit);
        loop {
            let (lo, hi) = approximand.enclosure(m)?;
            let terms = certain_terms(&lo, &hi, count);
            if terms.len() >= count {
                break terms;
            }
            if m >= limit {
                return Err(Error::PrecisionExhausted {
                    needed: m + 1,
                    available: limit,
                });
            }
            m = (m * 2).min(limit);
        }
    };
    let list = convergents_of(&terms);
    for c in &list {
        let bound = BigRational::new(BigInt::one(), c.denom() * c.denom());
        let exact_hit = approximand.exact_value() == Some(c);
        debug_assert!(
            exact_hit || approximand.within(c, &bound)?,
            "convergent {c} violates 1/q^2"
        );
    }
    Ok(list)
}

/// Checks `|x - c| < 1/q^2` exactly.
pub fn satisfies_dirichlet(x: &DigitStream, c: &BigRational, budget: &Budget) -> Result<bool> {
    let mut approximand = Approximand::new(x.clone(), budget.max_stream_digits);
    let bound = BigRational::new(BigInt::one(), c.denom() * c.denom());
    approximand.within(c, &bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutsideConvergent {
    pub value: String,
    /// `eps'` with `|x - p/q| = eps' / q^2`.
    pub epsilon: f64,
    pub running_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicSplit {
    pub inside: Vec<String>,
    pub outside: Vec<OutsideConvergent>,
}

/// Partitions the first `count` convergents by membership in `C`.
pub fn extrinsic_split(
    x: &DigitStream,
    scheme: &CantorScheme,
    count: usize,
    budget: &Budget,
) -> Result<ExtrinsicSplit> {
    let list = convergents(x, count, budget)?;
    let mut approximand = Approximand::new(x.clone(), budget.max_stream_digits);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    let mut running = f64::INFINITY;
    for c in list {
        // convergents of x in [0, 1] stay in [0, 1]
        if contains(&c, scheme)? {
            inside.push(display_fraction(&c));
            continue;
        }
        let q = to_biguint(c.denom());
        let digits = 2 * (q.bits() as usize) + 64;
        let (lo, hi) = error_enclosure(&mut approximand, &c, digits, budget)?;
        let q2 = BigRational::from_integer(from_biguint(&q * &q));
        let eps = to_f64(&((lo + hi) / BigRational::from_integer(2.into()) * q2));
        running = running.min(eps);
        outside.push(OutsideConvergent {
            value: display_fraction(&c),
            epsilon: eps,
            running_min: running,
        });
    }
    Ok(ExtrinsicSplit { inside, outside })
}
