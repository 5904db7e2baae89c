//! Constructive intrinsic Dirichlet approximation.
//!
//! For `x` in `C` and `Q = b^n`, the windows of `n*r` base-`b0` digits starting
//! at offsets `k = 0, 1, ...` are the leading base-`b` digits of
//! `frac(b0^k x)`. There are at most `a^n` such words, so scanning offsets
//! `0..=a^n` (together with the all-zero word standing for the point `0`)
//! forces two equal windows. Equal windows at `k < k'` give
//! `q = b0^k' - b0^k`, `p = floor(b0^k' x) - floor(b0^k x)` with
//! `|x - p/q| < 1/(qQ)`, `p/q` in `C`, and `q <= b0^(a^n)`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::expansion::word_value;
use crate::membership::contains;
use crate::rational::{from_biguint, ln_biguint, to_f64, BigRational};
use crate::scheme::{format_digits, parse_digits, CantorScheme};
use crate::stream::{Approximand, DigitStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Collision {
    /// Windows at `k < k_prime` agree.
    Pair { k: usize, k_prime: usize },
    /// The window at `k` is all zeros.
    Zero { k: usize },
}

impl Collision {
    /// The larger offset, which bounds the digits consumed.
    pub fn last_offset(&self) -> usize {
        match *self {
            Collision::Pair { k_prime, .. } => k_prime,
            Collision::Zero { k } => k,
        }
    }

    /// `q` as determined by the offsets alone.
    pub fn denominator(&self, b0: u32) -> BigUint {
        let b0 = BigUint::from(b0);
        match *self {
            Collision::Pair { k, k_prime } => b0.pow(k_prime as u32) - b0.pow(k as u32),
            Collision::Zero { k } => b0.pow(k as u32),
        }
    }
}

/// A Dirichlet approximant with enough data to re-check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CertificateWire", into = "CertificateWire")]
pub struct ApproxCertificate {
    pub scheme: String,
    pub n: u32,
    pub collision: Collision,
    pub p: BigUint,
    pub q: BigUint,
    /// The shared window, in base-`b0` digits.
    pub window: Vec<u32>,
}

impl ApproxCertificate {
    pub fn value(&self) -> BigRational {
        BigRational::new(from_biguint(self.p.clone()), from_biguint(self.q.clone()))
    }

    /// `Q = b^n`.
    pub fn big_q(&self, scheme: &CantorScheme) -> BigUint {
        BigUint::from(scheme.base()).pow(self.n)
    }

    /// `1/(qQ)`.
    pub fn error_bound(&self, scheme: &CantorScheme) -> BigRational {
        BigRational::new(1.into(), from_biguint(&self.q * self.big_q(scheme)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateWire {
    scheme: String,
    n: u32,
    kind: String,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    k_prime: Option<usize>,
    p: String,
    q: String,
    window: String,
}

impl From<ApproxCertificate> for CertificateWire {
    fn from(c: ApproxCertificate) -> Self {
        let (kind, k, k_prime) = match c.collision {
            Collision::Pair { k, k_prime } => ("pair", k, Some(k_prime)),
            Collision::Zero { k } => ("zero", k, None),
        };
        CertificateWire {
            scheme: c.scheme,
            n: c.n,
            kind: kind.to_string(),
            k,
            k_prime,
            p: c.p.to_string(),
            q: c.q.to_string(),
            window: format_digits(&c.window),
        }
    }
}

impl TryFrom<CertificateWire> for ApproxCertificate {
    type Error = String;

    fn try_from(w: CertificateWire) -> std::result::Result<Self, String> {
        let collision = match (w.kind.as_str(), w.k_prime) {
            ("pair", Some(k_prime)) if w.k < k_prime => Collision::Pair { k: w.k, k_prime },
            ("pair", _) => return Err("pair collision needs k < k_prime".into()),
            ("zero", None) => Collision::Zero { k: w.k },
            ("zero", Some(_)) => return Err("zero collision has no k_prime".into()),
            (other, _) => return Err(format!("unknown kind {other:?}")),
        };
        let p = w.p.parse::<BigUint>().map_err(|e| format!("p: {e}"))?;
        let q = w.q.parse::<BigUint>().map_err(|e| format!("q: {e}"))?;
        if q.is_zero() {
            return Err("q must be positive".into());
        }
        let window = parse_digits(&w.window)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| u32::try_from(d).map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(ApproxCertificate {
            scheme: w.scheme,
            n: w.n,
            collision,
            p,
            q,
            window,
        })
    }
}

/// `a^n`, checked against the window budget.
fn window_count(scheme: &CantorScheme, n: u32, budget: &Budget) -> Result<usize> {
    let count = (scheme.cardinality() as u128)
        .checked_pow(n)
        .unwrap_or(u128::MAX);
    if count > budget.max_windows as u128 {
        return Err(Error::guard("a^n windows", count, budget.max_windows));
    }
    Ok(count as usize)
}

/// Runs the pigeonhole scan on `x` at level `n`, stopping at the first
/// repeated window.
pub fn dirichlet_approx(
    x: &mut DigitStream,
    n: u32,
    scheme: &CantorScheme,
    budget: &Budget,
) -> Result<ApproxCertificate> {
    if n == 0 {
        return Err(Error::Parse("level n must be at least 1".into()));
    }
    let windows = window_count(scheme, n, budget)?;
    let len = (n * scheme.power()) as usize;
    let mut seen: HashMap<Vec<u32>, Option<usize>> = HashMap::with_capacity(windows + 1);
    seen.insert(vec![0; len], None);
    let mut found = None;
    for k in 0..=windows {
        let w = x.prefix(k + len)?[k..].to_vec();
        if let Some(&prev) = seen.get(&w) {
            found = Some(match prev {
                None => Collision::Zero { k },
                Some(j) => Collision::Pair { k: j, k_prime: k },
            });
            break;
        }
        seen.insert(w, Some(k));
    }
    let collision = found.ok_or_else(|| {
        Error::InsufficientData(format!(
            "no window collision among {} offsets; stream is not in {scheme}",
            windows + 1
        ))
    })?;
    let b0 = x.base();
    let last = collision.last_offset();
    let digits = x.prefix(last + len)?;
    let window = digits[last..last + len].to_vec();
    let p = match collision {
        Collision::Pair { k, k_prime } => {
            word_value(&digits[..k_prime], b0) - word_value(&digits[..k], b0)
        }
        Collision::Zero { k } => word_value(&digits[..k], b0),
    };
    Ok(ApproxCertificate {
        scheme: scheme.to_string(),
        n,
        collision,
        p,
        q: collision.denominator(b0),
        window,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub scheme_matches: bool,
    pub q_matches: bool,
    pub window_matches: bool,
    pub member: bool,
    pub within_bound: bool,
    /// `|x - p/q| < 1/(qQ)`, decided exactly.
    pub inequality: bool,
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        self.scheme_matches
            && self.q_matches
            && self.window_matches
            && self.member
            && self.within_bound
            && self.inequality
    }
}

/// Re-checks every claim of `cert` against `x`.
pub fn verify_certificate(
    x: &DigitStream,
    cert: &ApproxCertificate,
    scheme: &CantorScheme,
    budget: &Budget,
) -> Result<Verification> {
    let mut approximand = Approximand::new(x.clone(), budget.max_stream_digits);
    verify_with(&mut approximand, cert, scheme)
}

fn verify_with(
    x: &mut Approximand,
    cert: &ApproxCertificate,
    scheme: &CantorScheme,
) -> Result<Verification> {
    let scheme_matches = cert
        .scheme
        .parse::<CantorScheme>()
        .map(|s| s.base() == scheme.base() && s.digits() == scheme.digits())
        .unwrap_or(false);
    let b0 = scheme.min_base();
    let q_matches = cert.collision.denominator(b0) == cert.q;

    let len = (cert.n * scheme.power()) as usize;
    let window_matches = cert.window.len() == len && {
        let stream = x.stream_mut();
        match cert.collision {
            Collision::Pair { k, k_prime } => {
                let d = stream.prefix(k_prime + len)?;
                d[k..k + len] == cert.window[..] && d[k_prime..k_prime + len] == cert.window[..]
            }
            Collision::Zero { k } => {
                let d = stream.prefix(k + len)?;
                d[k..k + len] == cert.window[..] && cert.window.iter().all(|&w| w == 0)
            }
        }
    };

    let value = cert.value();
    let member = value <= BigRational::one() && contains(&value, scheme)?;

    let within_bound = within_exponent(&cert.q, scheme, cert.n);

    let inequality = x.within(&value, &cert.error_bound(scheme))?;
    Ok(Verification {
        scheme_matches,
        q_matches,
        window_matches,
        member,
        within_bound,
        inequality,
    })
}

/// Outcome of a floating-point check with exact fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Certified,
    Violated,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub certificate: ApproxCertificate,
    /// Every level whose certificate had this `(p, q)`.
    pub levels: Vec<u32>,
    pub theorem: bool,
    /// `|x - p/q| < 1/(q (log_b0 q)^(1/d))`; `None` when `q < b0`.
    pub corollary: Option<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    /// One certificate per level `n = 1..=n_max`.
    pub levels: Vec<ApproxCertificate>,
    /// Distinct `(p, q)` in order of first appearance.
    pub entries: Vec<LadderEntry>,
}

/// Certificates for every level up to `n_max`, with the logarithmic
/// corollary inequality checked for each distinct approximant.
pub fn solution_ladder(
    x: &DigitStream,
    n_max: u32,
    scheme: &CantorScheme,
    budget: &Budget,
) -> Result<Ladder> {
    if n_max == 0 {
        return Err(Error::Parse("n_max must be at least 1".into()));
    }
    let mut stream = x.clone();
    let mut approximand = Approximand::new(x.clone(), budget.max_stream_digits);
    let mut levels = Vec::with_capacity(n_max as usize);
    let mut entries: Vec<LadderEntry> = Vec::new();
    for n in 1..=n_max {
        let cert = dirichlet_approx(&mut stream, n, scheme, budget)?;
        if let Some(e) = entries
            .iter_mut()
            .find(|e| e.certificate.p == cert.p && e.certificate.q == cert.q)
        {
            e.levels.push(n);
        } else {
            let v = verify_with(&mut approximand, &cert, scheme)?;
            let theorem = v.is_valid();
            let corollary = if cert.q >= BigUint::from(scheme.min_base()) {
                Some(corollary_check(
                    &mut approximand,
                    &cert,
                    scheme,
                    theorem,
                    budget,
                )?)
            } else {
                None
            };
            entries.push(LadderEntry {
                certificate: cert.clone(),
                levels: vec![n],
                theorem,
                corollary,
            });
        }
        levels.push(cert);
    }
    Ok(Ladder { levels, entries })
}

/// `log_b0(q)^(1/d)` in double precision.
pub fn log_power(q: &BigUint, scheme: &CantorScheme) -> f64 {
    let lq = ln_biguint(q) / (scheme.min_base() as f64).ln();
    lq.powf(1.0 / scheme.dimension())
}

const NEAR_EQUALITY: f64 = 1e-12;

/// Decides `|qx - p| * log_b0(q)^(1/d) < 1`. The product is evaluated in
/// double precision from an exact enclosure of `|qx - p|`; results within
/// `1e-12` of 1 fall back to the exact implication from the theorem
/// inequality and `q <= b0^(a^n)`.
fn corollary_check(
    x: &mut Approximand,
    cert: &ApproxCertificate,
    scheme: &CantorScheme,
    theorem: bool,
    budget: &Budget,
) -> Result<Check> {
    let factor = log_power(&cert.q, scheme);
    let b0 = scheme.min_base() as f64;
    let value = cert.value();
    let q = BigRational::from_integer(from_biguint(cert.q.clone()));
    let mut m =
        ((ln_biguint(&cert.q) + ln_biguint(&cert.big_q(scheme))) / b0.ln()).ceil() as usize + 40;
    loop {
        let (lo, hi) = x.distance_enclosure(&value, m)?;
        let lo = to_f64(&(&lo * &q)) * factor;
        let hi = to_f64(&(&hi * &q)) * factor;
        if hi < 1.0 - NEAR_EQUALITY {
            return Ok(Check::Certified);
        }
        if lo >= 1.0 + NEAR_EQUALITY {
            return Ok(Check::Violated);
        }
        let resolved = hi - lo <= NEAR_EQUALITY * 1e-3 || x.exact_value().is_some();
        if resolved || m >= budget.max_stream_digits {
            // log_b0 q <= a^n gives (log_b0 q)^(1/d) <= Q, so the theorem
            // inequality implies this one.
            let implied = theorem && within_exponent(&cert.q, scheme, cert.n);
            return Ok(if implied {
                Check::Certified
            } else {
                Check::Undecided
            });
        }
        m = (m * 2).min(budget.max_stream_digits);
    }
}

/// `q <= b0^(a^n)`, compared by bit length first so the power is only
/// materialized near the boundary.
fn within_exponent(q: &BigUint, scheme: &CantorScheme, n: u32) -> bool {
    let b0 = scheme.min_base();
    let exponent = (scheme.cardinality() as f64).powi(n as i32);
    let bound_bits = exponent * (b0 as f64).log2();
    let bits = q.bits() as f64;
    if bits + 2.0 < bound_bits {
        return true;
    }
    if bits > bound_bits + 2.0 {
        return false;
    }
    *q <= BigUint::from(b0).pow(exponent as u32)
}
