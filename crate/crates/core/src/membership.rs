//! Deciding whether a rational lies in `C(b, S)`.
//!
//! A rational is a member iff one of its base-`b` expansions uses only digits
//! of `S`. Only terminating rationals have a second expansion: the last
//! nonzero digit decremented, followed by repeating `b - 1`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::expansion::{expand_parts, split_denominator, ExpansionAnalysis, LongDivision};
use crate::rational::{unit_parts, BigRational};
use crate::scheme::CantorScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NotMember,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionKind {
    Canonical,
    /// The `... (d-1)(b-1)(b-1)...` form of a terminating rational.
    Alternate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub verdict: Verdict,
    pub expansion_used: ExpansionKind,
    /// The witnessing expansion for members. For non-members this is the
    /// canonical expansion, which the early-abort path does not compute.
    pub analysis: Option<ExpansionAnalysis>,
    /// Index of the first canonical digit outside `S`.
    pub failing_digit_index: Option<usize>,
}

impl MembershipWitness {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemberOptions {
    /// Stop long division at the first digit outside `S`.
    pub early_abort: bool,
}

impl Default for MemberOptions {
    fn default() -> Self {
        MemberOptions { early_abort: true }
    }
}

pub fn is_member(x: &BigRational, scheme: &CantorScheme) -> Result<MembershipWitness> {
    is_member_with(x, scheme, MemberOptions::default())
}

pub fn is_member_with(
    x: &BigRational,
    scheme: &CantorScheme,
    opts: MemberOptions,
) -> Result<MembershipWitness> {
    let (p, q) = unit_parts(x)?;
    Ok(if opts.early_abort {
        member_early_abort(&p, &q, scheme)
    } else {
        member_full(&p, &q, scheme)
    })
}

/// Verdict only.
pub fn contains(x: &BigRational, scheme: &CantorScheme) -> Result<bool> {
    Ok(is_member(x, scheme)?.is_member())
}

fn member_full(p: &BigUint, q: &BigUint, scheme: &CantorScheme) -> MembershipWitness {
    let canonical = expand_parts(p, q, scheme.base());
    let failing = canonical
        .preperiod
        .iter()
        .chain(canonical.period.iter())
        .position(|&d| !scheme.contains_digit(d));
    match failing {
        None => member(ExpansionKind::Canonical, canonical),
        Some(idx) => match alternate_of(&canonical) {
            Some(alt) if all_in(&alt, scheme) => member(ExpansionKind::Alternate, alt),
            _ => MembershipWitness {
                verdict: Verdict::NotMember,
                expansion_used: ExpansionKind::Canonical,
                analysis: Some(canonical),
                failing_digit_index: Some(idx),
            },
        },
    }
}

fn member_early_abort(p: &BigUint, q: &BigUint, scheme: &CantorScheme) -> MembershipWitness {
    let base = scheme.base();
    if p == q {
        let canonical = expand_parts(p, q, base);
        return match canonical
            .period
            .iter()
            .position(|&d| !scheme.contains_digit(d))
        {
            None => member(ExpansionKind::Canonical, canonical),
            Some(i) => not_member(i),
        };
    }
    let (q2, k0) = split_denominator(q, base);
    let mut div = LongDivision::new(p.clone(), q.clone(), base);
    let mut failing = None;
    for i in 0..k0 {
        let d = div.next().expect("infinite");
        if !scheme.contains_digit(d) {
            failing = Some(i);
            break;
        }
    }
    if failing.is_none() && (!q2.is_one() || scheme.contains_digit(0)) {
        if q2.is_one() {
            return member(ExpansionKind::Canonical, expand_parts(p, q, base));
        }
        let start = div.remainder().clone();
        let mut i = k0;
        loop {
            let d = div.next().expect("infinite");
            if !scheme.contains_digit(d) {
                failing = Some(i);
                break;
            }
            i += 1;
            if *div.remainder() == start {
                return member(ExpansionKind::Canonical, expand_parts(p, q, base));
            }
        }
    } else if failing.is_none() {
        // terminating, all preperiod digits fine, but the trailing 0s are not
        failing = Some(k0);
    }
    let idx = failing.expect("set above");
    if q2.is_one() && !p.is_zero() {
        let canonical = expand_parts(p, q, base);
        if let Some(alt) = alternate_of(&canonical) {
            if all_in(&alt, scheme) {
                return member(ExpansionKind::Alternate, alt);
            }
        }
    }
    not_member(idx)
}

/// The second expansion of a terminating nonzero rational.
fn alternate_of(canonical: &ExpansionAnalysis) -> Option<ExpansionAnalysis> {
    if !canonical.is_terminating() || canonical.preperiod.is_empty() {
        return None;
    }
    let mut pre = canonical.preperiod.clone();
    let last = pre.last_mut().expect("nonempty");
    debug_assert!(*last > 0, "minimal preperiod ends in a nonzero digit");
    *last -= 1;
    Some(ExpansionAnalysis {
        base: canonical.base,
        preperiod: pre,
        period: vec![canonical.base - 1],
    })
}

fn all_in(a: &ExpansionAnalysis, scheme: &CantorScheme) -> bool {
    a.preperiod
        .iter()
        .chain(a.period.iter())
        .all(|&d| scheme.contains_digit(d))
}

fn member(kind: ExpansionKind, analysis: ExpansionAnalysis) -> MembershipWitness {
    MembershipWitness {
        verdict: Verdict::Member,
        expansion_used: kind,
        analysis: Some(analysis),
        failing_digit_index: None,
    }
}

fn not_member(idx: usize) -> MembershipWitness {
    MembershipWitness {
        verdict: Verdict::NotMember,
        expansion_used: ExpansionKind::Canonical,
        analysis: None,
        failing_digit_index: Some(idx),
    }
}

/// Membership for machine-sized fractions, used by the census hot loop.
///
/// `p/q` must be reduced with `0 <= p <= q`. Agrees with [`is_member`].
pub fn member_u64(p: u64, q: u64, scheme: &CantorScheme) -> bool {
    let b = scheme.base() as u64;
    if p == q {
        return scheme.contains_digit(scheme.base() - 1);
    }
    if p == 0 {
        return scheme.contains_digit(0);
    }
    let (q2, k0) = split_u64(q, b);
    let q = q as u128;
    let b128 = b as u128;
    let mut r = p as u128;
    let mut ok = true;
    for _ in 0..k0 {
        let s = r * b128;
        if !scheme.contains_digit((s / q) as u32) {
            ok = false;
            break;
        }
        r = s % q;
    }
    if ok {
        if q2 == 1 {
            if scheme.contains_digit(0) {
                return true;
            }
        } else {
            let start = r;
            loop {
                let s = r * b128;
                if !scheme.contains_digit((s / q) as u32) {
                    ok = false;
                    break;
                }
                r = s % q;
                if r == start {
                    break;
                }
            }
            if ok {
                return true;
            }
        }
    }
    if q2 != 1 {
        return false;
    }
    // terminating: try the alternate expansion
    let mut r = p as u128;
    let mut prev_ok = true;
    for i in 0..k0 {
        let s = r * b128;
        let d = (s / q) as u32;
        r = s % q;
        if i + 1 == k0 {
            return prev_ok
                && scheme.contains_digit(d - 1)
                && scheme.contains_digit(scheme.base() - 1);
        }
        prev_ok &= scheme.contains_digit(d);
        if !prev_ok {
            return false;
        }
    }
    false
}

/// `(q2, k0)` as in [`split_denominator`], for machine integers.
pub(crate) fn split_u64(q: u64, b: u64) -> (u64, usize) {
    let mut q2 = q;
    loop {
        let g = num_integer::gcd(q2, b);
        if g == 1 {
            break;
        }
        q2 /= g;
    }
    let q1 = (q / q2) as u128;
    let mut k0 = 0;
    let mut m = 1 % q1;
    while m != 0 {
        m = m * b as u128 % q1;
        k0 += 1;
    }
    (q2, k0)
}
