mod common;

use num_rational::BigRational;
use proptest::prelude::*;

use common::Q;
use recurlab::hcvec::{
    check_giotto, construct_y, dense_targets, error_decomposition, scaffold_from_ps, verify_membership,
};
use recurlab::lemmacheck::{
    check_density_gap, check_hindman_inequality, check_two_syndetic_lemma, hindman_sweep, two_syndetic_instance,
    Outcome,
};
use recurlab::setcalc::{materialize, GeneratorSpec, WindowedSet};
use recurlab::shiftop::{apply_power_exact, recurrence_set, Mode, SpaceSpec, WeightSequence};
use recurlab::structure::ps_certificate;
use recurlab::Density;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn dq(d: Density) -> Q {
    Q::new(d.numer(), d.denom())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Round trip: `(B^l y)_r = z_r` at every scaffold element, and small
    /// blocks imply membership.
    #[test]
    fn scaffold_round_trip(m in 1usize..=3, c in prop::sample::select(vec![(2i64, 1i64), (5, 2), (3, 1)]),
                           spacing in 0usize..3, index in 0usize..400, k_max in 3usize..10) {
        let big_w = 1500;
        let e = materialize(&GeneratorSpec::periodic((m + 1) * (spacing + 1) + spacing, [0]), big_w).unwrap();
        let cert = ps_certificate(&e, 16, 8).unwrap();
        prop_assume!(cert.is_certified());
        let Ok(scaffold) = scaffold_from_ps(&e, &cert, m, k_max, 20) else { return Ok(()) };
        prop_assert!(scaffold.validate().is_ok());
        let w = WeightSequence::constant(q(c.0, c.1), big_w + m + 1).unwrap();
        let target = dense_targets(m, index).unwrap();
        let y = construct_y(&w, &scaffold, &target).unwrap();
        for l in scaffold.union() {
            let bl = apply_power_exact(&w, &y, l).unwrap();
            for (r, zr) in target.z.iter() {
                prop_assert_eq!(bl.get(r), Some(zr));
            }
        }
        let space = SpaceSpec::lp(2);
        let giotto = check_giotto(&w, &scaffold, m, &space).unwrap();
        let membership = verify_membership(&w, &y, &scaffold, &target, &space).unwrap();
        if giotto.all_pass {
            prop_assert!(membership.all_within, "giotto passed but {:?} fail", membership.failing);
        }
        for l in scaffold.union().into_iter().step_by(7) {
            let d = error_decomposition(&w, &y, &scaffold, &target, l, &space, Some(&giotto)).unwrap();
            prop_assert!(d.split_exact && d.triangle);
            prop_assert_ne!(d.head_bound, Some(false));
        }
        // Superset of the scaffold keeps its PS certificate.
        let r = recurrence_set(&w, &y, &target.z, target.radius.inner(), &space, big_w, Mode::Exact).unwrap();
        if membership.all_within && !target.z.is_zero() {
            prop_assert!(scaffold.union().iter().all(|&l| r.returns.contains(l)));
            let recert = ps_certificate(&r.returns, scaffold.b.max(1), 8).unwrap();
            prop_assert!(recert.is_certified());
        }
    }
}

fn runless(seed: u64, w: usize) -> WindowedSet {
    materialize(&recurlab::lemmacheck::runless_pattern(seed), w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Hypothesis and conclusion of the two-syndetic check, recomputed by brute force.
    #[test]
    fn two_syndetic_outcome_matches_oracle(seed in any::<u64>(), w in 64usize..=512) {
        let a = runless(seed, w);
        let ind = a.indicator();
        let comp: Vec<bool> = ind.iter().map(|b| !b).collect();
        let delta = q(1, 10);
        let hyp = comp.iter().any(|&b| b)
            && common::least_syndetic(&comp, 2).is_some()
            && common::banach(ind, w / 16) >= Q::new(1, 10);
        let concl = common::least_ps(ind, 8, 16).is_some();
        let got = two_syndetic_instance(&a, &delta, 8, 16).unwrap();
        match got {
            Outcome::Skip(_) => prop_assert!(!hyp),
            Outcome::Pass => prop_assert!(hyp && concl),
            Outcome::Fail(_) => prop_assert!(hyp && !concl),
        }
    }

    #[test]
    fn hindman_quantities_match_oracle(seed in any::<u64>(), w in 64usize..=512) {
        let a = materialize(&recurlab::lemmacheck::ps_candidate(seed), w).unwrap();
        let ind = a.indicator();
        let tol = Q::new(1, 20);
        let r = hindman_sweep(&a, 16, &q(1, 20)).unwrap();
        let alpha = common::lower_upper(ind, w / 16).0;
        let gamma = common::banach(ind, w / 16);
        prop_assert_eq!((dq(r.alpha), dq(r.gamma)), (alpha, gamma));
        if alpha != Q::from(0) {
            let target = alpha / gamma;
            let want = (1..=16).find(|&b| {
                let u = common::shifted_union(ind, b);
                common::lower_upper(&u, (w / 16).min(w - b)).1 + tol >= target
            });
            prop_assert_eq!(r.witness_b, want);
        }
    }

    #[test]
    fn density_gap_matches_oracle(seed in any::<u64>(), w in 64usize..=512) {
        let a = runless(seed, w);
        let g = check_density_gap(&a, w / 16, w / 16, None).unwrap();
        prop_assert_eq!(dq(g.lower), common::lower_upper(a.indicator(), w / 16).0);
        prop_assert_eq!(dq(g.banach), common::banach(a.indicator(), w / 16));
        prop_assert!(!g.asserted && g.holds.is_none());
    }
}

#[test]
fn harness_reports_are_reproducible() {
    let a = check_two_syndetic_lemma(8, 4000, &q(1, 10), 32, 128, 99).unwrap();
    let b = check_two_syndetic_lemma(8, 4000, &q(1, 10), 32, 128, 99).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let h1 = check_hindman_inequality(9, 4000, 64, &q(1, 20), 5).unwrap();
    let h2 = check_hindman_inequality(9, 4000, 64, &q(1, 20), 5).unwrap();
    assert_eq!(serde_json::to_string(&h1).unwrap(), serde_json::to_string(&h2).unwrap());
    assert_ne!(
        serde_json::to_string(&check_hindman_inequality(9, 4000, 64, &q(1, 20), 6).unwrap()).unwrap(),
        serde_json::to_string(&h1).unwrap()
    );
}
