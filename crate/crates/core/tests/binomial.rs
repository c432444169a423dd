mod common;

use common::{choose, choose_signed, random_table, shape};
use fdcalc::binomial::{
    binom_int, fundamental_coefficients, proper_lift, wilson_hypothesis, wilson_sum, BinomialSeries,
    MultiIndex, SeriesCodomain,
};
use fdcalc::calculus::{fdeg, FunctionTable};
use fdcalc::{Degree, PGroupShape};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pair_strategy() -> impl Strategy<Value = (PGroupShape, PGroupShape)> {
    prop::sample::select(vec![
        (2u64, vec![1u32, 1], vec![1u32]),
        (2, vec![2, 1], vec![2]),
        (2, vec![1, 1, 1], vec![3, 1]),
        (2, vec![3], vec![2]),
        (3, vec![1, 1], vec![1]),
        (3, vec![2], vec![2]),
        (3, vec![1], vec![1, 2]),
        (5, vec![1, 1], vec![1]),
    ])
    .prop_map(|(p, a, b)| (shape(p, &a), shape(p, &b)))
}

fn table_strategy() -> impl Strategy<Value = FunctionTable> {
    (pair_strategy(), any::<u64>())
        .prop_map(|((a, b), seed)| random_table(&mut ChaCha8Rng::seed_from_u64(seed), &a, &b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn binomials_match_falling_factorial(x in -200i64..200, n in 0i64..30) {
        prop_assert_eq!(binom_int(x, n), choose_signed(x, n as u64));
    }

    #[test]
    fn series_reproduces_periodic_extension(f in table_strategy(), pts in prop::collection::vec(-500i64..500, 24)) {
        let s = fundamental_coefficients(&f).unwrap();
        let k = f.domain().arity();
        for x in pts.chunks(k).filter(|c| c.len() == k) {
            let got = s.evaluate(x).unwrap();
            let want = f.periodic_value(x).unwrap();
            for ((g, &w), &m) in got.iter().zip(&want.0).zip(f.codomain().moduli()) {
                prop_assert_eq!(g.mod_floor(&BigInt::from(m)), BigInt::from(w));
            }
        }
    }

    #[test]
    fn support_degree_is_fdeg(f in table_strategy()) {
        let s = fundamental_coefficients(&f).unwrap();
        prop_assert_eq!(s.degree(), fdeg(&f).unwrap());
    }

    #[test]
    fn lift_keeps_degree_and_reduces_back(f in table_strategy()) {
        let s = fundamental_coefficients(&f).unwrap();
        let lift = proper_lift(&s).unwrap();
        prop_assert_eq!(lift.degree(), s.degree());
        prop_assert_eq!(lift.len(), s.len());
        prop_assert_eq!(lift.reduce(f.codomain()).unwrap(), s);
    }

    #[test]
    fn series_json_round_trip(f in table_strategy()) {
        let s = fundamental_coefficients(&f).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: BinomialSeries = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back, s);
    }
}

/// Series with `n_i < p^{α_i}` and values mod `p` are periodic, so the
/// coefficients come back exactly.
#[test]
fn coefficients_are_recovered_from_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (p, alphas) in [(2u64, vec![1u32, 2]), (3, vec![1, 1]), (2, vec![3]), (5, vec![1])] {
        let a = shape(p, &alphas);
        let b = shape(p, &[1]);
        for _ in 0..50 {
            let mut s = BinomialSeries::zero(a.arity(), SeriesCodomain::PGroup(b.clone()));
            for _ in 0..rng.gen_range(1..5) {
                let n: Vec<u64> = a.moduli().iter().map(|&m| rng.gen_range(0..m)).collect();
                s.insert(MultiIndex(n), vec![BigInt::from(rng.gen_range(0..p))]).unwrap();
            }
            let t = s.to_table(&a).unwrap();
            assert_eq!(fundamental_coefficients(&t).unwrap(), s);
        }
    }
}

#[test]
fn wilson_grid_against_hockey_stick() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for (p, n, beta) in [(2u64, 3usize, 1u32), (2, 3, 2), (2, 4, 3), (3, 2, 1), (3, 3, 2), (3, 4, 1)] {
        let max = (p - 1) * (n as u64 - beta as u64 + 1) - 1;
        for _ in 0..30 {
            let mut s = BinomialSeries::zero(n, SeriesCodomain::Integers { width: 1 });
            for _ in 0..4 {
                let mut idx = vec![0u64; n];
                for _ in 0..rng.gen_range(0..=max) {
                    idx[rng.gen_range(0..n)] += 1;
                }
                let c = BigInt::from(rng.gen::<i64>()).pow(3);
                s.insert(MultiIndex(idx), vec![c]).unwrap();
            }
            assert!(wilson_hypothesis(s.degree(), p, n, beta));
            let w = wilson_sum(&s, p).unwrap();
            let oracle: BigInt = s
                .terms()
                .map(|(idx, a)| idx.0.iter().fold(BigInt::from(1), |acc, &k| acc * choose(p, k + 1)) * &a[0])
                .sum();
            assert_eq!(w.sum, oracle);
            assert!(w.valuation >= fdcalc::Valuation::Finite(beta as u64));
        }
    }
}

#[test]
fn hypothesis_boundary() {
    assert!(wilson_hypothesis(Degree::Finite(2), 2, 3, 1));
    assert!(!wilson_hypothesis(Degree::Finite(3), 2, 3, 1));
    assert!(wilson_hypothesis(Degree::NegInfinity, 3, 1, 2));
    // the single term C(x,1) over [0,2)^1 sums to 1, so the hypothesis is sharp
    let mut s = BinomialSeries::zero(1, SeriesCodomain::Integers { width: 1 });
    s.insert(MultiIndex(vec![1]), vec![BigInt::from(1)]).unwrap();
    assert_eq!(wilson_sum(&s, 2).unwrap().sum, BigInt::from(1));
}
