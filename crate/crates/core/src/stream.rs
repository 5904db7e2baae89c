//! Pull-based base-`b0` digit sources for points of `C`, and exact
//! comparisons against such points.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{word_value, ExpansionAnalysis};
use crate::membership::is_member;
use crate::rational::{display_fraction, from_biguint, parse_fraction, BigRational};
use crate::scheme::{format_digits, parse_digits, CantorScheme};

/// How a stream's digits are produced. Explicit digits are given over the
/// scheme's base `b` and must lie in `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamSpec {
    Rational(String),
    Digits(String),
    Seed(u64),
}

impl fmt::Display for StreamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamSpec::Rational(x) => write!(f, "rational:{x}"),
            StreamSpec::Digits(d) => write!(f, "digits:{d}"),
            StreamSpec::Seed(s) => write!(f, "seed:{s}"),
        }
    }
}

impl FromStr for StreamSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            Error::Parse(format!(
                "stream spec {s:?} must be rational:, digits: or seed:"
            ))
        })?;
        match kind {
            "rational" => Ok(StreamSpec::Rational(value.to_string())),
            "digits" => Ok(StreamSpec::Digits(value.to_string())),
            "seed" => value
                .parse()
                .map(StreamSpec::Seed)
                .map_err(|e| Error::Parse(format!("seed {value:?}: {e}"))),
            _ => Err(Error::Parse(format!("unknown stream kind {kind:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    /// The witnessing base-`b0` expansion of a member rational.
    Rational {
        value: BigRational,
        expansion: ExpansionAnalysis,
    },
    Explicit,
    Seeded {
        rng: Box<ChaCha8Rng>,
        digits: Vec<u32>,
        power: u32,
    },
}

/// The base-`b0` digits of a point `x` of `C`.
///
/// Cloning yields an independent cursor over the same digits.
#[derive(Debug, Clone)]
pub struct DigitStream {
    spec: StreamSpec,
    source: Source,
    base: u32,
    buf: Vec<u32>,
}

impl DigitStream {
    pub fn new(spec: StreamSpec, scheme: &CantorScheme) -> Result<Self> {
        match &spec {
            StreamSpec::Rational(text) => {
                let x = parse_fraction(text)?;
                Self::rational_with_spec(x, scheme, spec)
            }
            StreamSpec::Digits(text) => {
                let word = parse_digits(text)?;
                Self::explicit_with_spec(&word, scheme, spec)
            }
            StreamSpec::Seed(seed) => Ok(Self::seeded(*seed, scheme)),
        }
    }

    /// Digits of the rational `x`, which must lie in the set.
    pub fn rational(x: BigRational, scheme: &CantorScheme) -> Result<Self> {
        let spec = StreamSpec::Rational(display_fraction(&x));
        Self::rational_with_spec(x, scheme, spec)
    }

    fn rational_with_spec(x: BigRational, scheme: &CantorScheme, spec: StreamSpec) -> Result<Self> {
        let minimal = scheme.minimal();
        let witness = is_member(&x, &minimal)?;
        if !witness.is_member() {
            return Err(Error::InvalidStream(format!(
                "{} is not in {scheme}",
                display_fraction(&x)
            )));
        }
        let expansion = witness.analysis.expect("members carry their expansion");
        Ok(DigitStream {
            spec,
            source: Source::Rational {
                value: BigRational::new(x.numer().clone(), x.denom().clone()),
                expansion,
            },
            base: minimal.base(),
            buf: Vec::new(),
        })
    }

    /// A finite stream from base-`b` digits over `S`.
    pub fn explicit(word: &[u64], scheme: &CantorScheme) -> Result<Self> {
        let spec = StreamSpec::Digits(format_digits(
            &word.iter().map(|&d| d as u32).collect::<Vec<_>>(),
        ));
        Self::explicit_with_spec(word, scheme, spec)
    }

    fn explicit_with_spec(word: &[u64], scheme: &CantorScheme, spec: StreamSpec) -> Result<Self> {
        let mut buf = Vec::with_capacity(word.len() * scheme.power() as usize);
        for &d in word {
            if d > u32::MAX as u64 || !scheme.contains_digit(d as u32) {
                return Err(Error::InvalidStream(format!(
                    "digit {d} is not in {scheme}"
                )));
            }
            push_split(&mut buf, d as u32, scheme.min_base(), scheme.power());
        }
        Ok(DigitStream {
            spec,
            source: Source::Explicit,
            base: scheme.min_base(),
            buf,
        })
    }

    /// I.i.d. uniform digits of `S`, each emitted as `r` base-`b0` digits.
    pub fn seeded(seed: u64, scheme: &CantorScheme) -> Self {
        DigitStream {
            spec: StreamSpec::Seed(seed),
            source: Source::Seeded {
                rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
                digits: scheme.digits().to_vec(),
                power: scheme.power(),
            },
            base: scheme.min_base(),
            buf: Vec::new(),
        }
    }

    pub fn spec(&self) -> &StreamSpec {
        &self.spec
    }

    /// The digit base `b0`.
    pub fn base(&self) -> u32 {
        self.base
    }

    /// The exact value when the stream is a rational.
    pub fn exact_value(&self) -> Option<&BigRational> {
        match &self.source {
            Source::Rational { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Total digits available, `None` when unbounded.
    pub fn available(&self) -> Option<usize> {
        match self.source {
            Source::Explicit => Some(self.buf.len()),
            _ => None,
        }
    }

    /// The first `m` digits.
    pub fn prefix(&mut self, m: usize) -> Result<&[u32]> {
        self.fill(m)?;
        Ok(&self.buf[..m])
    }

    pub fn digit(&mut self, i: usize) -> Result<u32> {
        self.fill(i + 1)?;
        Ok(self.buf[i])
    }

    fn fill(&mut self, m: usize) -> Result<()> {
        if self.buf.len() >= m {
            return Ok(());
        }
        match &mut self.source {
            Source::Explicit => {
                return Err(Error::PrecisionExhausted {
                    needed: m,
                    available: self.buf.len(),
                })
            }
            Source::Rational { expansion, .. } => {
                let start = self.buf.len();
                self.buf.extend((start..m).map(|i| expansion.digit(i)));
            }
            Source::Seeded { rng, digits, power } => {
                while self.buf.len() < m {
                    let d = digits[rng.gen_range(0..digits.len())];
                    push_split(&mut self.buf, d, self.base, *power);
                }
            }
        }
        Ok(())
    }
}

/// Appends the `power` base-`root` digits of `d`, most significant first.
fn push_split(buf: &mut Vec<u32>, d: u32, root: u32, power: u32) {
    let start = buf.len();
    let mut v = d;
    for _ in 0..power {
        buf.push(v % root);
        v /= root;
    }
    buf[start..].reverse();
}

/// A stream together with exact, refining comparisons against rationals.
///
/// Truncating to `m` digits confines `x` to the closed interval
/// `[V/b0^m, (V+1)/b0^m]`; comparisons pull digits until the interval
/// decides them.
#[derive(Debug, Clone)]
pub struct Approximand {
    stream: DigitStream,
    max_digits: usize,
    precision: usize,
}

impl Approximand {
    pub fn new(stream: DigitStream, max_digits: usize) -> Self {
        Approximand {
            stream,
            max_digits,
            precision: 16,
        }
    }

    pub fn stream(&self) -> &DigitStream {
        &self.stream
    }

    pub fn stream_mut(&mut self) -> &mut DigitStream {
        &mut self.stream
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.stream.exact_value()
    }

    /// Digits pulled so far by comparisons.
    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Closed interval containing `x` after `m` digits.
    pub fn enclosure(&mut self, m: usize) -> Result<(BigRational, BigRational)> {
        if let Some(x) = self.stream.exact_value() {
            return Ok((x.clone(), x.clone()));
        }
        let base = self.stream.base();
        let v = word_value(self.stream.prefix(m)?, base);
        let den = from_biguint(BigUint::from(base).pow(m as u32));
        let lo = BigRational::new(from_biguint(v.clone()), den.clone());
        let hi = BigRational::new(from_biguint(v + BigUint::one()), den);
        Ok((lo, hi))
    }

    fn limit(&self) -> usize {
        match self.stream.available() {
            Some(n) => n.min(self.max_digits),
            None => self.max_digits,
        }
    }

    /// Sign of `x - r`.
    pub fn cmp_rational(&mut self, r: &BigRational) -> Result<Ordering> {
        if let Some(x) = self.stream.exact_value() {
            return Ok(x.cmp(r));
        }
        let digits_for_r =
            (r.denom().bits() as f64 / (self.stream.base() as f64).log2()).ceil() as usize + 8;
        let limit = self.limit();
        let mut m = self.precision.max(digits_for_r).min(limit);
        loop {
            let (lo, hi) = self.enclosure(m)?;
            self.precision = self.precision.max(m);
            if *r < lo {
                return Ok(Ordering::Greater);
            }
            if *r > hi {
                return Ok(Ordering::Less);
            }
            if m >= limit {
                return Err(Error::PrecisionExhausted {
                    needed: m + 1,
                    available: limit,
                });
            }
            m = (m * 2).min(limit);
        }
    }

    /// Decides `|x - c| < bound` exactly.
    pub fn within(&mut self, c: &BigRational, bound: &BigRational) -> Result<bool> {
        if self.cmp_rational(&(c - bound))? != Ordering::Greater {
            return Ok(false);
        }
        Ok(self.cmp_rational(&(c + bound))? == Ordering::Less)
    }

    /// Is `x` strictly closer to `a` than to `c`?
    pub fn closer(&mut self, a: &BigRational, c: &BigRational) -> Result<bool> {
        match a.cmp(c) {
            Ordering::Equal => Ok(false),
            Ordering::Less => {
                let mid = (a + c) / BigRational::from_integer(2.into());
                Ok(self.cmp_rational(&mid)? == Ordering::Less)
            }
            Ordering::Greater => {
                let mid = (a + c) / BigRational::from_integer(2.into());
                Ok(self.cmp_rational(&mid)? == Ordering::Greater)
            }
        }
    }

    /// Closed interval containing `|x - c|` after `m` digits.
    pub fn distance_enclosure(
        &mut self,
        c: &BigRational,
        m: usize,
    ) -> Result<(BigRational, BigRational)> {
        let (lo, hi) = self.enclosure(m.min(self.limit()))?;
        let zero = BigRational::from_integer(0.into());
        let a = &lo - c;
        let b = &hi - c;
        let (dlo, dhi) = if a <= zero && b >= zero {
            (zero, std::cmp::max(-a, b))
        } else if b < zero {
            (-b, -a)
        } else {
            (a, b)
        };
        Ok((dlo, dhi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cantor() -> CantorScheme {
        CantorScheme::new(3, &[0, 2]).unwrap()
    }

    #[test]
    fn rational_stream_uses_witnessing_expansion() {
        let mut s = DigitStream::rational(ratio(1, 3), &cantor()).unwrap();
        assert_eq!(s.prefix(5).unwrap(), &[0, 2, 2, 2, 2]);
        let mut q = DigitStream::rational(ratio(3, 4), &cantor()).unwrap();
        assert_eq!(q.prefix(4).unwrap(), &[2, 0, 2, 0]);
    }

    #[test]
    fn rational_stream_rejects_non_members() {
        assert!(matches!(
            DigitStream::rational(ratio(1, 2), &cantor()),
            Err(Error::InvalidStream(_))
        ));
    }

    #[test]
    fn explicit_stream_exhausts() {
        let mut s = DigitStream::explicit(&[2, 0, 2], &cantor()).unwrap();
        assert_eq!(s.digit(2).unwrap(), 2);
        assert!(matches!(
            s.digit(3),
            Err(Error::PrecisionExhausted {
                needed: 4,
                available: 3
            })
        ));
        assert!(DigitStream::explicit(&[1], &cantor()).is_err());
    }

    #[test]
    fn base_nine_digits_split_into_base_three() {
        let nine = CantorScheme::new(9, &[0, 2, 6, 8]).unwrap();
        let mut s = DigitStream::explicit(&[6, 2], &nine).unwrap();
        assert_eq!(s.base(), 3);
        assert_eq!(s.prefix(4).unwrap(), &[2, 0, 0, 2]);
        let mut r = DigitStream::seeded(3, &nine);
        assert!(r.prefix(200).unwrap().iter().all(|&d| d == 0 || d == 2));
        // rational streams over base 9 are emitted in base 3
        let mut q = DigitStream::rational(ratio(3, 4), &nine).unwrap();
        assert_eq!(q.prefix(4).unwrap(), &[2, 0, 2, 0]);
    }

    #[test]
    fn seeded_streams_are_reproducible_and_clone_independently() {
        let mut a = DigitStream::seeded(1, &cantor());
        let mut b = DigitStream::seeded(1, &cantor());
        let pa = a.prefix(64).unwrap().to_vec();
        let mut c = a.clone();
        assert_eq!(pa, b.prefix(64).unwrap());
        assert_eq!(c.prefix(128).unwrap(), b.prefix(128).unwrap());
        assert!(pa.iter().all(|&d| d == 0 || d == 2));
        let mut other = DigitStream::seeded(2, &cantor());
        assert_ne!(other.prefix(64).unwrap(), &pa[..]);
    }

    #[test]
    fn spec_text_round_trip() {
        for text in ["rational:3/4", "digits:2,0,2", "seed:17"] {
            let spec: StreamSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("bogus:1".parse::<StreamSpec>().is_err());
    }

    #[test]
    fn comparisons_refine() {
        let mut x = Approximand::new(DigitStream::seeded(5, &cantor()), 4096);
        let (lo, hi) = x.enclosure(40).unwrap();
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        assert_ne!(x.cmp_rational(&mid).unwrap(), Ordering::Equal);
        assert_eq!(x.cmp_rational(&ratio(-1, 1)).unwrap(), Ordering::Greater);
        assert_eq!(x.cmp_rational(&ratio(2, 1)).unwrap(), Ordering::Less);
    }

    #[test]
    fn exact_comparison_for_rationals() {
        let mut x = Approximand::new(DigitStream::rational(ratio(1, 4), &cantor()).unwrap(), 64);
        assert_eq!(x.cmp_rational(&ratio(1, 4)).unwrap(), Ordering::Equal);
        assert!(!x.within(&ratio(0, 1), &ratio(1, 4)).unwrap());
        assert!(x.within(&ratio(0, 1), &ratio(1, 3)).unwrap());
        assert!(x.closer(&ratio(1, 3), &ratio(0, 1)).unwrap());
    }

    #[test]
    fn undecidable_comparison_on_finite_stream() {
        // x = 0.20 (base 3, truncated) could be 2/3 exactly
        let mut x = Approximand::new(DigitStream::explicit(&[2, 0], &cantor()).unwrap(), 64);
        assert!(matches!(
            x.cmp_rational(&ratio(2, 3)),
            Err(Error::PrecisionExhausted { .. })
        ));
    }
}
