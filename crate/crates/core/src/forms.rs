//! Generating Cantor rationals from digit words.
//!
//! Every rational of `C` is either a terminating expansion over `S` or
//! `((c_0..c_{k+l-1})_b - (c_0..c_{k-1})_b) / (b^(k+l) - b^k)` for some
//! digits `c_i` in `S`. The closed form is not unique, so generated values are
//! deduplicated by reduced value.

use std::collections::BTreeSet;

use num_bigint::BigUint;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::expansion::word_value;
use crate::rational::{from_biguint, to_biguint, BigRational};
use crate::scheme::CantorScheme;

/// Evaluates the closed form for preperiod length `k`, period length `l` and
/// the word `c` of length `k + l`.
pub fn from_form(k: usize, l: usize, c: &[u32], scheme: &CantorScheme) -> Result<BigRational> {
    if l == 0 {
        return Err(Error::Parse("period length must be at least 1".into()));
    }
    if c.len() != k + l {
        return Err(Error::Parse(format!(
            "word has {} digits, expected k + l = {}",
            c.len(),
            k + l
        )));
    }
    if let Some(&d) = c.iter().find(|&&d| !scheme.contains_digit(d)) {
        return Err(Error::BadDigits(format!("digit {d} is not in {scheme}")));
    }
    Ok(closed_form(k, c, scheme.base()))
}

fn closed_form(k: usize, c: &[u32], base: u32) -> BigRational {
    let b = BigUint::from(base);
    let num = word_value(c, base) - word_value(&c[..k], base);
    let den = b.pow(c.len() as u32) - b.pow(k as u32);
    BigRational::new(from_biguint(num), from_biguint(den))
}

/// Bounds on the word lengths fed to the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormFilter {
    pub max_preperiod: usize,
    pub max_period: usize,
}

/// All distinct values of the closed form with `k + l <= max_len`, plus the
/// terminating rationals `V(w) / b^|w|` for `|w| <= max_len`, in ascending
/// `(q, p)` order.
pub fn enumerate_forms(
    scheme: &CantorScheme,
    max_len: usize,
    budget: &Budget,
) -> Result<Vec<BigRational>> {
    if max_len == 0 {
        return Err(Error::Parse("max_len must be at least 1".into()));
    }
    guard(scheme, max_len, budget)?;
    let mut out = BTreeSet::new();
    for total in 1..=max_len {
        for k in 0..total {
            insert_forms(scheme, k, total - k, &mut out);
        }
    }
    insert_terminating(scheme, max_len, &mut out);
    Ok(collect(out))
}

/// Like [`enumerate_forms`] but ranging over `k <= max_preperiod` and
/// `1 <= l <= max_period` independently. Terminating words count as
/// preperiod `|w|` with period `[0]`.
pub fn enumerate_forms_filtered(
    scheme: &CantorScheme,
    filter: FormFilter,
    budget: &Budget,
) -> Result<Vec<BigRational>> {
    if filter.max_period == 0 {
        return Err(Error::Parse("max_period must be at least 1".into()));
    }
    guard(scheme, filter.max_preperiod + filter.max_period, budget)?;
    let mut out = BTreeSet::new();
    for k in 0..=filter.max_preperiod {
        for l in 1..=filter.max_period {
            insert_forms(scheme, k, l, &mut out);
        }
    }
    insert_terminating(scheme, filter.max_preperiod, &mut out);
    Ok(collect(out))
}

fn guard(scheme: &CantorScheme, len: usize, budget: &Budget) -> Result<()> {
    let words = (scheme.cardinality() as u128)
        .checked_pow(len as u32)
        .unwrap_or(u128::MAX);
    if words > budget.max_forms as u128 {
        return Err(Error::guard("a^max_len", words, budget.max_forms));
    }
    Ok(())
}

/// Keys are `(q, p)` so the set iterates in ascending denominator order.
type FormSet = BTreeSet<(BigUint, BigUint)>;

fn insert_forms(scheme: &CantorScheme, k: usize, l: usize, out: &mut FormSet) {
    for_each_word(scheme.digits(), k + l, |word| {
        let v = closed_form(k, word, scheme.base());
        out.insert(key(&v));
    });
}

fn insert_terminating(scheme: &CantorScheme, max_len: usize, out: &mut FormSet) {
    // V(w)/b^|w| has the expansion w000..., in C only when 0 is a digit.
    if !scheme.contains_digit(0) {
        return;
    }
    let b = BigUint::from(scheme.base());
    for len in 1..=max_len {
        let den = from_biguint(b.pow(len as u32));
        for_each_word(scheme.digits(), len, |word| {
            let v = BigRational::new(from_biguint(word_value(word, scheme.base())), den.clone());
            out.insert(key(&v));
        });
    }
}

fn key(v: &BigRational) -> (BigUint, BigUint) {
    (to_biguint(v.denom()), to_biguint(v.numer()))
}

fn collect(set: FormSet) -> Vec<BigRational> {
    set.into_iter()
        .map(|(q, p)| BigRational::new(from_biguint(p), from_biguint(q)))
        .collect()
}

/// Calls `f` on every word of length `len` over `alphabet`, in lexicographic order.
pub(crate) fn for_each_word(alphabet: &[u32], len: usize, mut f: impl FnMut(&[u32])) {
    let mut idx = vec![0usize; len];
    let mut word: Vec<u32> = vec![alphabet[0]; len];
    loop {
        f(&word);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < alphabet.len() {
                word[pos] = alphabet[idx[pos]];
                break;
            }
            idx[pos] = 0;
            word[pos] = alphabet[0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::contains;
    use crate::rational::ratio;

    fn cantor() -> CantorScheme {
        CantorScheme::new(3, &[0, 2]).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = cantor();
        assert_eq!(from_form(0, 1, &[2], &s).unwrap(), ratio(1, 1));
        assert_eq!(from_form(0, 2, &[0, 2], &s).unwrap(), ratio(1, 4));
        assert_eq!(from_form(1, 1, &[0, 2], &s).unwrap(), ratio(1, 3));
    }

    #[test]
    fn closed_form_rejects_foreign_digits() {
        assert!(matches!(
            from_form(0, 1, &[1], &cantor()),
            Err(Error::BadDigits(_))
        ));
        assert!(from_form(0, 0, &[], &cantor()).is_err());
        assert!(from_form(1, 1, &[0], &cantor()).is_err());
    }

    #[test]
    fn length_one() {
        let v = enumerate_forms(&cantor(), 1, &Budget::default()).unwrap();
        assert_eq!(v, vec![ratio(0, 1), ratio(1, 1), ratio(2, 3)]);
    }

    #[test]
    fn length_two_contains_quarter_and_third() {
        let v = enumerate_forms(&cantor(), 2, &Budget::default()).unwrap();
        assert!(v.contains(&ratio(1, 4)));
        assert!(v.contains(&ratio(1, 3)));
        assert!(v.contains(&ratio(3, 4)));
        // ascending (q, p), no duplicates
        for w in v.windows(2) {
            let a = (w[0].denom().clone(), w[0].numer().clone());
            let b = (w[1].denom().clone(), w[1].numer().clone());
            assert!(a < b);
        }
    }

    #[test]
    fn every_form_is_member() {
        for s in [
            cantor(),
            CantorScheme::new(5, &[1, 3]).unwrap(),
            CantorScheme::new(9, &[0, 2, 6, 8]).unwrap(),
            CantorScheme::new(4, &[0, 3]).unwrap(),
        ] {
            for x in enumerate_forms(&s, 6, &Budget::default()).unwrap() {
                assert!(contains(&x, &s).unwrap(), "{x} in {s}");
            }
        }
    }

    #[test]
    fn budget_guard() {
        let tight = Budget {
            max_forms: 100,
            ..Budget::default()
        };
        assert!(matches!(
            enumerate_forms(&cantor(), 7, &tight),
            Err(Error::ResourceGuard { .. })
        ));
        assert!(enumerate_forms(&cantor(), 6, &tight).is_ok());
    }

    #[test]
    fn word_order() {
        let mut seen = Vec::new();
        for_each_word(&[0, 2], 2, |w| seen.push(w.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2]]);
    }
}
