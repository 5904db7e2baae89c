use cantor_core::dirichlet::solution_ladder;
use cantor_core::lab::{best_intrinsic, convergents, extrinsic_split, vwa_flags};
use cantor_core::membership::contains;
use cantor_core::rational::{parse_fraction, ratio, BigRational};
use cantor_core::{Approximand, Budget, CantorScheme, DigitStream, Error};
use num_bigint::BigInt;
use num_traits::{One, Signed};

fn cantor() -> CantorScheme {
    CantorScheme::new(3, &[0, 2]).unwrap()
}

/// 600 leading digits as an exact rational.
fn truncation(x: &DigitStream) -> BigRational {
    let mut c = x.clone();
    let v = c
        .prefix(600)
        .unwrap()
        .iter()
        .fold(BigInt::from(0), |acc, &d| acc * 3 + d);
    BigRational::new(v, BigInt::from(3).pow(600))
}

#[test]
fn seed_one_table_to_729() {
    let s = cantor();
    let x = DigitStream::seeded(1, &s);
    let t = best_intrinsic(&x, &s, 729, &Budget::default()).unwrap();
    for r in &t.records {
        assert!(contains(&r.value(), &s).unwrap());
        if r.q >= 3 {
            assert!(r.badness.unwrap().is_finite());
        }
    }
    for w in t.records.windows(2) {
        assert!(w[1].error_hi < w[0].error_lo);
    }
    let json = t.to_json();
    assert_eq!(json["q_range"], serde_json::json!([1, 729]));
    assert_eq!(t.to_csv().lines().count(), t.records.len() + 1);
}

#[test]
fn vwa_flags_match_direct_check() {
    let s = cantor();
    let eps = parse_fraction("0.1").unwrap();
    for seed in [1u64, 2, 3] {
        let x = DigitStream::seeded(seed, &s);
        let mut t = best_intrinsic(&x, &s, 2187, &Budget::default()).unwrap();
        let flags = vwa_flags(&mut t, &eps, &Budget::default()).unwrap();
        // |x - p/q| < q^(-1.1)  <=>  |x - p/q|^10 q^11 < 1
        let xt = truncation(&x);
        let direct: Vec<usize> = t
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                let err = (&xt - ratio(r.p, r.q)).abs();
                err.pow(10) * BigRational::from_integer(BigInt::from(r.q).pow(11))
                    < BigRational::one()
            })
            .map(|(i, _)| i)
            .collect();
        assert_eq!(flags.indices, direct, "seed {seed}");
        assert_eq!(flags.count, direct.len());
    }
}

#[test]
fn huge_epsilon_flags_nothing_beyond_exact_hits() {
    let s = cantor();
    let x = DigitStream::seeded(9, &s);
    let mut t = best_intrinsic(&x, &s, 243, &Budget::default()).unwrap();
    let flags = vwa_flags(&mut t, &ratio(50, 1), &Budget::default()).unwrap();
    // q = 1 records satisfy any epsilon only when the error is below 1
    assert!(flags.indices.iter().all(|&i| t.records[i].q == 1));
}

#[test]
fn extrinsic_partition_is_consistent() {
    let s = cantor();
    let x = DigitStream::seeded(7, &s);
    let split = extrinsic_split(&x, &s, 20, &Budget::default()).unwrap();
    let all = convergents(&x, 20, &Budget::default()).unwrap();
    assert_eq!(split.inside.len() + split.outside.len(), 20);
    for c in &all {
        let text = format!("{}/{}", c.numer(), c.denom());
        let inside = contains(c, &s).unwrap();
        assert_eq!(split.inside.contains(&text), inside);
        assert_eq!(split.outside.iter().any(|o| o.value == text), !inside);
    }
    let xt = truncation(&x);
    let mut running = f64::INFINITY;
    for o in &split.outside {
        let c = parse_fraction(&o.value).unwrap();
        let q = c.denom().clone();
        let eps = (&xt - &c).abs() * BigRational::from_integer(&q * &q);
        let want: f64 = eps.numer().to_string().parse::<f64>().unwrap()
            / eps.denom().to_string().parse::<f64>().unwrap();
        assert!((o.epsilon - want).abs() <= 1e-9 * want);
        assert!(o.epsilon < 1.0);
        running = running.min(o.epsilon);
        assert_eq!(o.running_min, running);
    }
}

#[test]
fn convergents_straddle_and_grow() {
    let s = CantorScheme::new(5, &[0, 3]).unwrap();
    let x = DigitStream::seeded(3, &s);
    let list = convergents(&x, 12, &Budget::default()).unwrap();
    let mut a = Approximand::new(x, 1 << 14);
    for w in list.windows(2) {
        assert!(w[0].denom() <= w[1].denom());
        assert_ne!(
            a.cmp_rational(&w[0]).unwrap(),
            a.cmp_rational(&w[1]).unwrap()
        );
    }
    for w in list[1..].windows(2) {
        assert!(w[0].denom() < w[1].denom());
    }
}

#[test]
fn invalid_streams_are_rejected() {
    let s = cantor();
    assert!(matches!(
        DigitStream::rational(ratio(1, 2), &s),
        Err(Error::InvalidStream(_))
    ));
    assert!(DigitStream::explicit(&[1, 0], &s).is_err());
}

#[test]
fn ladder_certificates_never_beat_the_table() {
    let s = cantor();
    let q_max = 6561;
    for seed in 0..5u64 {
        let x = DigitStream::seeded(seed, &s);
        let table = best_intrinsic(&x, &s, q_max, &Budget::default()).unwrap();
        let ladder = solution_ladder(&x, 8, &s, &Budget::default()).unwrap();
        let mut a = Approximand::new(x.clone(), 1 << 14);
        for cert in &ladder.levels {
            let v = cert.value();
            let q: u64 = match v.denom().try_into() {
                Ok(q) if q <= q_max => q,
                _ => continue,
            };
            // the last record at or below q is at least as close as the certificate
            let rec = table.records.iter().rev().find(|r| r.q <= q).unwrap();
            let r = rec.value();
            assert!(
                r == v || !a.closer(&v, &r).unwrap(),
                "seed {seed}: {v} beats record {r}"
            );
        }
    }
}
