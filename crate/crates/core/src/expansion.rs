//! Base-`b` expansions of rationals by long division.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rational::{from_biguint, unit_parts, BigRational};
use crate::scheme::{format_digits, CantorScheme};

/// An eventually periodic digit expansion `0.preperiod (period)*`.
///
/// A terminating expansion has period `[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpansionAnalysis {
    pub base: u32,
    pub preperiod: Vec<u32>,
    pub period: Vec<u32>,
}

impl ExpansionAnalysis {
    /// `k`, the preperiod length.
    pub fn preperiod_len(&self) -> usize {
        self.preperiod.len()
    }

    /// `l`, the period length.
    pub fn period_len(&self) -> usize {
        self.period.len()
    }

    pub fn is_terminating(&self) -> bool {
        self.period == [0]
    }

    /// Digit `i` of the infinite expansion.
    pub fn digit(&self, i: usize) -> u32 {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// Rebuilds the value as `(V(pre.per) - V(pre)) / (b^(k+l) - b^k)`.
    pub fn value(&self) -> BigRational {
        let mut word = self.preperiod.clone();
        word.extend_from_slice(&self.period);
        let b = BigUint::from(self.base);
        let num = word_value(&word, self.base) - word_value(&self.preperiod, self.base);
        let den = b.pow((word.len()) as u32) - b.pow(self.preperiod.len() as u32);
        BigRational::new(from_biguint(num), from_biguint(den))
    }

    /// Text form `pre|period` with comma-separated digits.
    pub fn render(&self) -> String {
        format!(
            "{}|{}",
            format_digits(&self.preperiod),
            format_digits(&self.period)
        )
    }
}

/// Value of a big-endian digit word in `base`.
pub fn word_value(digits: &[u32], base: u32) -> BigUint {
    if base <= 256 {
        let bytes: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        if bytes.is_empty() {
            return BigUint::zero();
        }
        return BigUint::from_radix_be(&bytes, base).expect("digits below base");
    }
    // Horner in 64-bit chunks.
    let per_chunk = (64.0 / (base as f64).log2()).floor().max(1.0) as usize;
    let mut acc = BigUint::zero();
    for chunk in digits.chunks(per_chunk) {
        let mut small: u64 = 0;
        for &d in chunk {
            small = small * base as u64 + d as u64;
        }
        acc = acc * BigUint::from(base).pow(chunk.len() as u32) + small;
    }
    acc
}

/// Splits `q = q1 * q2` where every prime of `q1` divides `base` and
/// `gcd(q2, base) = 1`; returns `(q2, k0)` with `k0` the least `k` such that
/// `q1 | base^k`.
pub(crate) fn split_denominator(q: &BigUint, base: u32) -> (BigUint, usize) {
    let b = BigUint::from(base);
    let mut q2 = q.clone();
    loop {
        let g = q2.gcd(&b);
        if g.is_one() {
            break;
        }
        q2 /= g;
    }
    let q1 = q / &q2;
    let mut k0 = 0;
    let mut m = BigUint::one() % &q1;
    while !m.is_zero() {
        m = (m * &b) % &q1;
        k0 += 1;
    }
    (q2, k0)
}

/// Canonical long-division digits of `p/q` (`p < q`), one digit per step.
#[derive(Debug, Clone)]
pub(crate) struct LongDivision {
    rem: BigUint,
    den: BigUint,
    base: BigUint,
}

impl LongDivision {
    pub(crate) fn new(p: BigUint, q: BigUint, base: u32) -> Self {
        LongDivision {
            rem: p,
            den: q,
            base: BigUint::from(base),
        }
    }

    pub(crate) fn remainder(&self) -> &BigUint {
        &self.rem
    }
}

impl Iterator for LongDivision {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let scaled = &self.rem * &self.base;
        let (d, r) = scaled.div_rem(&self.den);
        self.rem = r;
        Some(d.to_u32().expect("digit below base"))
    }
}

/// Canonical expansion in `base` of `p/q`, reduced, with `0 <= p/q <= 1`.
///
/// The canonical expansion never ends in repeating `base - 1`, except for
/// `1 = 0.(b-1)(b-1)...` which has no other expansion in `[0, 1)`.
pub(crate) fn expand_parts(p: &BigUint, q: &BigUint, base: u32) -> ExpansionAnalysis {
    if p == q {
        return ExpansionAnalysis {
            base,
            preperiod: Vec::new(),
            period: vec![base - 1],
        };
    }
    if p.is_zero() {
        return ExpansionAnalysis {
            base,
            preperiod: Vec::new(),
            period: vec![0],
        };
    }
    let (q2, k0) = split_denominator(q, base);
    let mut div = LongDivision::new(p.clone(), q.clone(), base);
    let preperiod: Vec<u32> = div.by_ref().take(k0).collect();
    let period = if q2.is_one() {
        debug_assert!(div.remainder().is_zero());
        vec![0]
    } else {
        let start = div.remainder().clone();
        let mut period = Vec::new();
        loop {
            period.push(div.next().expect("infinite"));
            if *div.remainder() == start {
                break;
            }
        }
        period
    };
    ExpansionAnalysis {
        base,
        preperiod,
        period,
    }
}

/// Canonical base-`b` expansion of `x` for the scheme's base.
pub fn expand(x: &BigRational, scheme: &CantorScheme) -> Result<ExpansionAnalysis> {
    expand_in_base(x, scheme.base())
}

/// Canonical expansion of `x` in an arbitrary base `>= 2`.
pub fn expand_in_base(x: &BigRational, base: u32) -> Result<ExpansionAnalysis> {
    let (p, q) = unit_parts(x)?;
    Ok(expand_parts(&p, &q, base))
}
