use cantor_core::census::{
    count_band_with, count_denominator, CensusOptions, Convention, Strategy as Counting,
};
use cantor_core::dirichlet::{dirichlet_approx, verify_certificate, ApproxCertificate};
use cantor_core::expansion::expand;
use cantor_core::forms::from_form;
use cantor_core::membership::{contains, is_member};
use cantor_core::rational::ratio;
use cantor_core::{Budget, CantorScheme, DigitStream};
use num_integer::Integer;
use proptest::prelude::*;

fn schemes() -> impl Strategy<Value = CantorScheme> {
    prop_oneof![
        Just(CantorScheme::new(3, &[0, 2]).unwrap()),
        Just(CantorScheme::new(5, &[0, 3]).unwrap()),
        Just(CantorScheme::new(4, &[1, 2]).unwrap()),
        Just(CantorScheme::new(9, &[0, 2, 6, 8]).unwrap()),
        Just(CantorScheme::new(10, &[0, 1, 9]).unwrap()),
    ]
}

/// A scheme with `0 < k + l` and a word over its digits.
fn scheme_and_form() -> impl Strategy<Value = (CantorScheme, usize, Vec<u32>)> {
    schemes().prop_flat_map(|s| {
        let digits = s.digits().to_vec();
        (0usize..4, 1usize..6).prop_flat_map(move |(k, l)| {
            (
                Just(s.clone()),
                Just(k),
                proptest::collection::vec(proptest::sample::select(digits.clone()), k + l),
            )
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn closed_forms_are_members((s, k, c) in scheme_and_form()) {
        let x = from_form(k, c.len() - k, &c, &s).unwrap();
        prop_assert!(contains(&x, &s).unwrap());
    }

    #[test]
    fn witness_reconstructs_value(s in schemes(), q in 1u64..400, p in 0u64..400) {
        let p = p % (q + 1);
        let x = ratio(p, q);
        let w = is_member(&x, &s).unwrap();
        if let Some(a) = &w.analysis {
            prop_assert_eq!(a.value(), x.clone());
            prop_assert!(a.preperiod.iter().chain(&a.period).all(|&d| s.contains_digit(d)));
        }
        prop_assert_eq!(w.failing_digit_index.is_some(), !w.is_member());
        prop_assert_eq!(expand(&x, &s).unwrap().value(), x);
    }

    #[test]
    fn census_is_additive(s in schemes(), a in 1u64..600, m in 0u64..600, t in 0u64..600) {
        let (lo, mid, hi) = (a, a + m, a + m + 1 + t);
        let o = CensusOptions { parallel: false, ..CensusOptions::default() };
        let whole = count_band_with(&s, lo, hi, Convention::Inclusive, &o).unwrap().count;
        let left = count_band_with(&s, lo, mid, Convention::Inclusive, &o).unwrap().count;
        let right = count_band_with(&s, mid + 1, hi, Convention::Inclusive, &o).unwrap().count;
        prop_assert_eq!(whole, left + right);
        let open = count_band_with(&s, lo, hi, Convention::HalfOpen, &o).unwrap().count;
        prop_assert_eq!(whole, open + count_denominator(&s, hi, Counting::Pruned));
    }

    #[test]
    fn strategies_agree(s in schemes(), q in 1u64..1500) {
        let slow = count_denominator(&s, q, Counting::Exhaustive);
        prop_assert_eq!(count_denominator(&s, q, Counting::EarlyAbort), slow);
        prop_assert_eq!(count_denominator(&s, q, Counting::Pruned), slow);
        let direct = (0..=q)
            .filter(|&p| p.gcd(&q) == 1 && contains(&ratio(p, q), &s).unwrap())
            .count() as u64;
        prop_assert_eq!(direct, slow);
    }

    #[test]
    fn certificates_verify_and_round_trip(s in schemes(), seed in any::<u64>(), n in 1u32..5) {
        let x = DigitStream::seeded(seed, &s);
        let mut cursor = x.clone();
        let cert = dirichlet_approx(&mut cursor, n, &s, &Budget::default()).unwrap();
        prop_assert!(verify_certificate(&x, &cert, &s, &Budget::default()).unwrap().is_valid());
        let back = ApproxCertificate::from_json(&cert.to_json()).unwrap();
        prop_assert_eq!(&back, &cert);
        prop_assert!(cert.q.bits() > 0);
    }

    #[test]
    fn explicit_streams_match_seeded_prefix(seed in any::<u64>()) {
        let s = CantorScheme::new(9, &[0, 2, 6, 8]).unwrap();
        let mut x = DigitStream::seeded(seed, &s);
        let base3 = x.prefix(12).unwrap().to_vec();
        let base9: Vec<u64> = base3.chunks(2).map(|c| (c[0] * 3 + c[1]) as u64).collect();
        let mut y = DigitStream::explicit(&base9, &s).unwrap();
        prop_assert_eq!(y.prefix(12).unwrap(), &base3[..]);
    }
}
