use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use proptest::prelude::*;

use recurlab::lemmacheck::{check_consecutive_free, orbit_instance};
use recurlab::rational::to_f64;
use recurlab::shiftop::{
    apply_power_exact, apply_power_float, norm_exact, recurrence_set, ExactVector, Mode, SpaceSpec, WeightRule,
    WeightSequence,
};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn weights() -> impl Strategy<Value = WeightSequence> {
    prop_oneof![
        (1i64..=7, 1i64..=4).prop_map(|(n, d)| WeightSequence::constant(q(n, d), 400).unwrap()),
        Just(WeightSequence::new(WeightRule::Telescoping, None, 400).unwrap()),
        proptest::collection::vec((1i64..=5, 1i64..=5), 400).prop_map(|v| {
            let table = v.into_iter().map(|(n, d)| q(n, d)).collect();
            WeightSequence::new(WeightRule::Table(table), None, 400).unwrap()
        }),
    ]
}

fn vector() -> impl Strategy<Value = ExactVector> {
    proptest::collection::vec((0usize..200, -9i64..=9, 1i64..=8), 0..10)
        .prop_map(|cs| ExactVector::from_coords(cs.into_iter().map(|(k, n, d)| (k, q(n, d)))))
}

/// `∏_{ν=k+1}^{k+n} w_ν`, multiplied out one weight at a time.
fn product_by_hand(w: &WeightSequence, k: usize, n: usize) -> BigRational {
    (k + 1..=k + n).fold(BigRational::one(), |acc, nu| acc * w.weight(nu).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_compose(w in weights(), x in vector(), a in 0usize..100, b in 0usize..100) {
        let left = apply_power_exact(&w, &apply_power_exact(&w, &x, b).unwrap(), a).unwrap();
        prop_assert_eq!(left, apply_power_exact(&w, &x, a + b).unwrap());
    }

    #[test]
    fn power_matches_coordinate_formula(w in weights(), x in vector(), n in 0usize..100) {
        let y = apply_power_exact(&w, &x, n).unwrap();
        for (i, v) in x.iter().filter(|&(i, _)| i >= n) {
            prop_assert_eq!(y.get(i - n).unwrap(), &(product_by_hand(&w, i - n, n) * v));
        }
        prop_assert_eq!(y.nnz(), x.iter().filter(|&(i, _)| i >= n).count());
    }

    #[test]
    fn float_power_tracks_exact(w in weights(), x in vector(), n in 0usize..100) {
        let exact = apply_power_exact(&w, &x, n).unwrap();
        let float = apply_power_float(&w, &x.to_float(), n).unwrap();
        for (k, v) in exact.iter() {
            let e = to_f64(v);
            let f = *float.get(k).unwrap();
            prop_assert!((f - e).abs() <= 1e-9 * e.abs(), "{} vs {}", f, e);
        }
    }

    #[test]
    fn operator_norm_bound(w in weights(), x in vector(), n in 0usize..60, p in 1u32..=3) {
        let space = SpaceSpec::lp(p);
        let lhs = norm_exact(&apply_power_exact(&w, &x, n).unwrap(), &space).unwrap().power.unwrap().into_inner();
        let rhs = norm_exact(&x, &space).unwrap().power.unwrap().into_inner();
        let sup: BigRational = Pow::pow(w.sup_bound(), n * p as usize);
        prop_assert!(lhs <= sup * rhs);
        let c0 = norm_exact(&apply_power_exact(&w, &x, n).unwrap(), &SpaceSpec::C0).unwrap().exact().unwrap();
        let c0x = norm_exact(&x, &SpaceSpec::C0).unwrap().exact().unwrap();
        prop_assert!(c0 <= Pow::pow(w.sup_bound(), n) * c0x);
    }

    #[test]
    fn exact_scan_matches_direct_distances(w in weights(), x in vector(), zc in -4i64..=4, eps in 1i64..=8) {
        let z = ExactVector::from_coords([(0, q(zc, 2))]);
        let eps = q(eps, 8);
        let space = SpaceSpec::lp(2);
        let r = recurrence_set(&w, &x, &z, &eps, &space, 250, Mode::Exact).unwrap();
        for n in 0..=250 {
            let y = apply_power_exact(&w, &x, n).unwrap().sub(&z);
            let d2 = y.iter().fold(BigRational::zero(), |acc, (_, v)| acc + v * v);
            prop_assert_eq!(r.returns.contains(n), d2 <= &eps * &eps, "n = {}", n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn disjoint_balls_never_return_twice_in_a_row(seed in any::<u64>()) {
        if let Some(inst) = orbit_instance(seed, 1500).unwrap() {
            let r = check_consecutive_free(&inst.weights, &inst.x, &inst.z, &inst.eps, &SpaceSpec::lp(2), 1500).unwrap();
            prop_assert!(r.disjointness_certified);
            prop_assert_eq!(r.first_pair, None);
            if let Some(c) = r.complement_certificate {
                prop_assert!(c.is_certified());
            }
        }
    }
}
