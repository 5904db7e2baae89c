//! Counting reduced Cantor rationals by denominator.
//!
//! `N(s, t)` counts the reduced `p/q` in `C` with `s <= q <= t`. The census
//! works on machine integers; each denominator is handled independently, so
//! any partition of a range sums to the same count.

mod checkpoint;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::membership::{is_member_with, member_u64, split_u64, MemberOptions};
use crate::rational::ratio;
use crate::scheme::CantorScheme;

pub use checkpoint::{run_census, CensusRun};

/// How the upper end of a band is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `s <= q <= t`.
    #[default]
    Inclusive,
    /// `s <= q < t`.
    HalfOpen,
}

impl Convention {
    /// The inclusive `q`-range `[lo, hi]` for nominal bounds `(s, t)`, or `None`
    /// when it is empty.
    pub fn range(self, s: u64, t: u64) -> Option<(u64, u64)> {
        match self {
            Convention::Inclusive => (s <= t).then_some((s, t)),
            Convention::HalfOpen => (s < t).then(|| (s, t - 1)),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Inclusive => "inclusive",
            Convention::HalfOpen => "half-open",
        })
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inclusive" => Ok(Convention::Inclusive),
            "half-open" => Ok(Convention::HalfOpen),
            _ => Err(Error::Parse(format!(
                "unknown convention {s:?}; expected inclusive or half-open"
            ))),
        }
    }
}

/// How candidates `p/q` are screened for one denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Descends digit prefixes over `S`, visiting only numerators whose
    /// leading digits are already admissible.
    #[default]
    Pruned,
    /// Every coprime `p`, with long division stopped at the first bad digit.
    EarlyAbort,
    /// Every coprime `p`, with the full big-integer membership test and no
    /// early abort.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CensusOptions {
    pub strategy: Strategy,
    pub parallel: bool,
    pub budget: Budget,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            strategy: Strategy::Pruned,
            parallel: true,
            budget: Budget::default(),
        }
    }
}

/// One counted range. `s, t` are the nominal bounds read under
/// `convention`; `chunk` is the inclusive `q`-range actually counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub scheme: String,
    pub s: u64,
    pub t: u64,
    pub count: u64,
    pub convention: Convention,
    pub chunk: [u64; 2],
    /// Wall time in milliseconds; excluded from equality-sensitive output.
    pub ms: u64,
}

/// Numerators `p` with `p/q` reduced and in `C`, ascending.
pub fn members_with_denominator(scheme: &CantorScheme, q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    visit_members(scheme, q, Strategy::Pruned, &mut |p| out.push(p));
    out.sort_unstable();
    out
}

/// Number of reduced members with denominator exactly `q`.
pub fn count_denominator(scheme: &CantorScheme, q: u64, strategy: Strategy) -> u64 {
    let mut n = 0;
    visit_members(scheme, q, strategy, &mut |_| n += 1);
    n
}

fn visit_members(scheme: &CantorScheme, q: u64, strategy: Strategy, visit: &mut dyn FnMut(u64)) {
    if q == 0 {
        return;
    }
    if q == 1 {
        if scheme.contains_digit(0) {
            visit(0);
        }
        if scheme.contains_digit(scheme.base() - 1) {
            visit(1);
        }
        return;
    }
    match strategy {
        Strategy::Pruned => {
            let (q2, _) = split_u64(q, scheme.base() as u64);
            if q2 == 1 {
                // terminating denominators have two expansions; scan them
                scan(scheme, q, visit);
            } else {
                let mut pruner = Pruner {
                    scheme,
                    q: q as u128,
                    visit,
                };
                pruner.descend(0, 1);
            }
        }
        Strategy::EarlyAbort => scan(scheme, q, visit),
        Strategy::Exhaustive => {
            let opts = MemberOptions { early_abort: false };
            for p in 1..q {
                if p.gcd(&q) == 1
                    && is_member_with(&ratio(p, q), scheme, opts)
                        .expect("in range")
                        .is_member()
                {
                    visit(p);
                }
            }
        }
    }
}

fn scan(scheme: &CantorScheme, q: u64, visit: &mut dyn FnMut(u64)) {
    for p in 1..q {
        if p.gcd(&q) == 1 && member_u64(p, q, scheme) {
            visit(p);
        }
    }
}

/// Leaves with at most this many numerators are checked directly.
const LEAF: u128 = 2;

struct Pruner<'a> {
    scheme: &'a CantorScheme,
    q: u128,
    visit: &'a mut dyn FnMut(u64),
}

impl Pruner<'_> {
    /// `value` is the prefix word's value and `scale = b^len`. The numerators
    /// whose canonical expansion starts with the prefix are
    /// `ceil(q*value/scale) <= p < ceil(q*(value+1)/scale)`.
    fn descend(&mut self, value: u128, scale: u128) {
        let b = self.scheme.base() as u128;
        for &d in self.scheme.digits() {
            let v = value * b + d as u128;
            let sc = scale * b;
            let lo = (self.q * v).div_ceil(sc).max(1);
            let hi = (self.q * (v + 1)).div_ceil(sc).min(self.q);
            if lo >= hi {
                continue;
            }
            if hi - lo <= LEAF {
                let q = self.q as u64;
                for p in lo as u64..hi as u64 {
                    if p.gcd(&q) == 1 && member_u64(p, q, self.scheme) {
                        (self.visit)(p);
                    }
                }
            } else {
                self.descend(v, sc);
            }
        }
    }
}

fn check_budget(t: u64, budget: &Budget) -> Result<()> {
    if t > budget.max_denominator {
        return Err(Error::guard("denominator", t, budget.max_denominator));
    }
    Ok(())
}

/// Sum of per-denominator counts over the inclusive range `[lo, hi]`.
pub(crate) fn count_range(scheme: &CantorScheme, lo: u64, hi: u64, opts: &CensusOptions) -> u64 {
    if lo > hi {
        return 0;
    }
    if opts.parallel {
        (lo..=hi)
            .into_par_iter()
            .map(|q| count_denominator(scheme, q, opts.strategy))
            .sum()
    } else {
        (lo..=hi)
            .map(|q| count_denominator(scheme, q, opts.strategy))
            .sum()
    }
}

/// `N(s, t)` with both ends inclusive.
pub fn count_band(
    scheme: &CantorScheme,
    s: u64,
    t: u64,
    opts: &CensusOptions,
) -> Result<CensusRecord> {
    count_band_with(scheme, s, t, Convention::Inclusive, opts)
}

/// `N` over the nominal range `(s, t)` read under `convention`.
pub fn count_band_with(
    scheme: &CantorScheme,
    s: u64,
    t: u64,
    convention: Convention,
    opts: &CensusOptions,
) -> Result<CensusRecord> {
    if s == 0 {
        return Err(Error::Parse(
            "denominator range must start at 1 or more".into(),
        ));
    }
    if t < s {
        return Err(Error::Parse(format!("empty range: s = {s} > t = {t}")));
    }
    check_budget(t, &opts.budget)?;
    let start = Instant::now();
    let (count, chunk) = match convention.range(s, t) {
        Some((lo, hi)) => (count_range(scheme, lo, hi, opts), [lo, hi]),
        None => (0, [s, s.saturating_sub(1)]),
    };
    Ok(CensusRecord {
        scheme: scheme.to_string(),
        s,
        t,
        count,
        convention,
        chunk,
        ms: start.elapsed().as_millis() as u64,
    })
}

/// `(b^n, b^(n+1))`, the nominal bounds of band `n`.
pub fn band_bounds(scheme: &CantorScheme, n: u32) -> Result<(u64, u64)> {
    let b = scheme.base() as u64;
    let s = b.checked_pow(n);
    let t = b.checked_pow(n + 1);
    match (s, t) {
        (Some(s), Some(t)) => Ok((s, t)),
        _ => Err(Error::guard(
            "band upper bound",
            (b as u128).saturating_pow(n + 1),
            u64::MAX,
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiValue {
    pub n: u32,
    /// `N(b^n, b^(n+1)) / (2 N(b^(n-1), b^n))`.
    pub value: f64,
    pub upper: u64,
    pub lower: u64,
    pub convention: Convention,
}

/// The halved ratio of consecutive band counts.
pub fn phi(
    scheme: &CantorScheme,
    n: u32,
    convention: Convention,
    opts: &CensusOptions,
) -> Result<PhiValue> {
    if n == 0 {
        return Err(Error::Parse("phi is defined for n >= 1".into()));
    }
    let (s0, t0) = band_bounds(scheme, n - 1)?;
    let (s1, t1) = band_bounds(scheme, n)?;
    check_budget(t1, &opts.budget)?;
    let lower = count_band_with(scheme, s0, t0, convention, opts)?.count;
    let upper = count_band_with(scheme, s1, t1, convention, opts)?.count;
    phi_from_counts(n, upper, lower, convention, (s0, t0))
}

pub(crate) fn phi_from_counts(
    n: u32,
    upper: u64,
    lower: u64,
    convention: Convention,
    lower_bounds: (u64, u64),
) -> Result<PhiValue> {
    if lower == 0 {
        return Err(Error::DivisionByZeroCount {
            s: lower_bounds.0,
            t: lower_bounds.1,
        });
    }
    Ok(PhiValue {
        n,
        value: upper as f64 / (2.0 * lower as f64),
        upper,
        lower,
        convention,
    })
}

/// `phi(n)` for each `n` in `n_lo..=n_hi`, counting every band once.
pub fn phi_series(
    scheme: &CantorScheme,
    n_lo: u32,
    n_hi: u32,
    convention: Convention,
    opts: &CensusOptions,
) -> Result<Vec<PhiValue>> {
    if n_lo == 0 || n_hi < n_lo {
        return Err(Error::Parse(format!("bad band range {n_lo}..={n_hi}")));
    }
    let (_, top) = band_bounds(scheme, n_hi)?;
    check_budget(top, &opts.budget)?;
    let counts = (n_lo - 1..=n_hi)
        .map(|n| {
            let (s, t) = band_bounds(scheme, n)?;
            Ok((n, count_band_with(scheme, s, t, convention, opts)?.count))
        })
        .collect::<Result<Vec<_>>>()?;
    counts
        .windows(2)
        .map(|w| {
            let bounds = band_bounds(scheme, w[0].0)?;
            phi_from_counts(w[1].0, w[1].1, w[0].1, convention, bounds)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Least-squares slope of `log2 N` against `n`.
    pub slope: f64,
    pub intercept: f64,
    /// `log2 N - (intercept + slope * n)` per input point.
    pub residuals: Vec<f64>,
}

/// Fits `log2 N(b^n, b^(n+1)) ~ intercept + slope * n` over consecutive bands
/// given as `(n, N)`.
pub fn growth_fit(points: &[(u32, u64)]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 bands, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::InsufficientData("bands must be consecutive".into()));
    }
    if let Some((n, _)) = points.iter().find(|(_, c)| *c == 0) {
        return Err(Error::InsufficientData(format!("band {n} is empty")));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| *n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|(_, c)| (*c as f64).log2()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    Ok(GrowthFit {
        slope,
        intercept,
        residuals,
    })
}

/// CSV of `(n, N, phi(n))` rows.
pub fn phi_csv(values: &[PhiValue]) -> String {
    let mut out = String::from("n,N,phi\n");
    for v in values {
        out.push_str(&format!("{},{},{:.6}\n", v.n, v.upper, v.value));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor() -> CantorScheme {
        CantorScheme::new(3, &[0, 2]).unwrap()
    }

    fn serial(strategy: Strategy) -> CensusOptions {
        CensusOptions {
            strategy,
            parallel: false,
            ..CensusOptions::default()
        }
    }

    #[test]
    fn small_bands() {
        let o = CensusOptions::default();
        assert_eq!(count_band(&cantor(), 1, 3, &o).unwrap().count, 4);
        assert_eq!(count_band(&cantor(), 4, 8, &o).unwrap().count, 2);
        assert_eq!(count_band(&cantor(), 2, 2, &o).unwrap().count, 0);
        assert_eq!(members_with_denominator(&cantor(), 4), vec![1, 3]);
        assert_eq!(members_with_denominator(&cantor(), 3), vec![1, 2]);
        assert_eq!(members_with_denominator(&cantor(), 1), vec![0, 1]);
    }

    #[test]
    fn strategies_agree_per_denominator() {
        for s in [
            cantor(),
            CantorScheme::new(5, &[1, 3]).unwrap(),
            CantorScheme::new(9, &[0, 2, 6, 8]).unwrap(),
            CantorScheme::new(10, &[0, 3, 9]).unwrap(),
        ] {
            for q in 1..=400 {
                let fast = count_denominator(&s, q, Strategy::Pruned);
                assert_eq!(
                    fast,
                    count_denominator(&s, q, Strategy::EarlyAbort),
                    "q={q} {s}"
                );
                if q <= 150 {
                    assert_eq!(
                        fast,
                        count_denominator(&s, q, Strategy::Exhaustive),
                        "q={q} {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn pruned_numerators_match_scan() {
        let s = cantor();
        for q in [19683u64, 20000, 6561 * 2 + 1, 59048] {
            let mut slow = Vec::new();
            scan(&s, q, &mut |p| slow.push(p));
            assert_eq!(members_with_denominator(&s, q), slow, "q={q}");
        }
    }

    #[test]
    fn half_open_drops_upper_end() {
        let o = CensusOptions::default();
        let inc = count_band_with(&cantor(), 3, 9, Convention::Inclusive, &o).unwrap();
        let ho = count_band_with(&cantor(), 3, 9, Convention::HalfOpen, &o).unwrap();
        assert_eq!(
            inc.count - ho.count,
            count_denominator(&cantor(), 9, Strategy::Pruned)
        );
        assert_eq!(ho.chunk, [3, 8]);
    }

    #[test]
    fn errors() {
        let o = CensusOptions::default();
        assert!(count_band(&cantor(), 0, 3, &o).is_err());
        assert!(count_band(&cantor(), 5, 3, &o).is_err());
        let tight = CensusOptions {
            budget: Budget {
                max_denominator: 100,
                ..Budget::default()
            },
            ..o
        };
        assert!(matches!(
            count_band(&cantor(), 1, 101, &tight),
            Err(Error::ResourceGuard { .. })
        ));
        let s = CantorScheme::new(4, &[1, 2]).unwrap();
        assert_eq!(count_band(&s, 1, 1, &o).unwrap().count, 0);
        assert!(matches!(
            phi_from_counts(1, 5, 0, Convention::Inclusive, (1, 1)),
            Err(Error::DivisionByZeroCount { s: 1, t: 1 })
        ));
    }

    #[test]
    fn serial_equals_parallel() {
        let s = cantor();
        let a = count_band(&s, 1, 2187, &serial(Strategy::Pruned))
            .unwrap()
            .count;
        let b = count_band(&s, 1, 2187, &CensusOptions::default())
            .unwrap()
            .count;
        assert_eq!(a, b);
    }

    #[test]
    fn phi_small_values() {
        let o = CensusOptions::default();
        let p = phi(&cantor(), 4, Convention::Inclusive, &o).unwrap();
        assert_eq!((p.upper, p.lower), (188, 52));
        let series = phi_series(&cantor(), 3, 4, Convention::Inclusive, &o).unwrap();
        assert_eq!(series[1], p);
    }

    #[test]
    fn fit_exact_geometric() {
        let two: Vec<(u32, u64)> = (1..=6).map(|n| (n, 1u64 << n)).collect();
        let f = growth_fit(&two).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
        let four: Vec<(u32, u64)> = (2..=5).map(|n| (n, 4u64.pow(n))).collect();
        assert!((growth_fit(&four).unwrap().slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            growth_fit(&[(1, 2), (2, 4)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            growth_fit(&[(1, 2), (2, 4), (4, 8)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            growth_fit(&[(1, 2), (2, 0), (3, 8)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn convention_text() {
        assert_eq!(
            "half-open".parse::<Convention>().unwrap(),
            Convention::HalfOpen
        );
        assert_eq!(Convention::Inclusive.to_string(), "inclusive");
        assert!("open".parse::<Convention>().is_err());
    }
}
