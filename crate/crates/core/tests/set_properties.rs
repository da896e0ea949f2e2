mod common;

use proptest::prelude::*;

use common::Q;
use recurlab::setcalc::{banach_profile_at, density_report, lower_upper, prefix_density, WindowedSet};
use recurlab::structure::{ps_certificate, syndetic_bound, thick_certificate, Witness};
use recurlab::Density;

fn dq(d: Density) -> Q {
    Q::new(d.numer(), d.denom())
}

fn small_set() -> impl Strategy<Value = WindowedSet> {
    (1usize..=512, 0.05f64..0.95).prop_flat_map(|(len, rho)| {
        proptest::collection::vec(proptest::bool::weighted(rho), len + 1).prop_map(WindowedSet::from_indicator)
    })
}

/// Sets with long runs and long gaps, so every certificate kind turns up.
fn blocky_set() -> impl Strategy<Value = WindowedSet> {
    proptest::collection::vec((1usize..40, any::<bool>()), 1..40).prop_map(|runs| {
        let ind: Vec<bool> = runs.iter().flat_map(|&(len, b)| std::iter::repeat_n(b, len)).collect();
        WindowedSet::from_indicator(ind)
    })
}

proptest! {
    #[test]
    fn prefix_counts_are_exact(a in small_set(), n in 0usize..512) {
        let n = n.min(a.window_end());
        let d = prefix_density(&a, n).unwrap();
        let count = a.indicator()[..=n].iter().filter(|&&b| b).count() as u64;
        prop_assert_eq!(dq(d) * Q::from(n as u64 + 1), Q::from(count));
    }

    #[test]
    fn densities_match_quadratic_recount(a in small_set(), n0 in 0usize..512, ell in 0usize..512) {
        let w = a.window_end();
        let (n0, ell) = (n0 % (w + 1), ell % (w + 1));
        let (lo, hi) = lower_upper(&a, n0).unwrap();
        prop_assert!(lo <= hi);
        prop_assert_eq!((dq(lo), dq(hi)), common::lower_upper_quadratic(a.indicator(), n0));
        let r = density_report(&a, n0, &[ell]).unwrap();
        prop_assert_eq!(dq(r.banach_estimate), common::banach(a.indicator(), ell));
        let b = banach_profile_at(&a, ell).unwrap();
        for m in 0..=w - ell {
            let c = a.indicator()[m..=m + ell].iter().filter(|&&x| x).count() as u64;
            prop_assert!(dq(b) >= Q::new(c, ell as u64 + 1));
        }
    }

    #[test]
    fn complement_and_trivial_shift(a in small_set()) {
        let twice = a.complement().complement();
        prop_assert_eq!(twice.indicator(), a.indicator());
        let same = a.union_of_shifts(0, 0).unwrap();
        prop_assert_eq!(same.indicator(), a.indicator());
        prop_assert_eq!(a.len() + a.complement().len(), a.window_end() + 1);
    }

    #[test]
    fn shift_union_matches_pointwise(a in small_set(), t0 in 0usize..6, dt in 0usize..6) {
        let t1 = t0 + dt;
        prop_assume!(t1 <= a.window_end());
        let u = a.union_of_shifts(t0, t1).unwrap();
        let ind = a.indicator();
        let want: Vec<bool> = (0..=a.window_end() - t1).map(|n| (t0..=t1).any(|t| ind[n + t])).collect();
        prop_assert_eq!(u.indicator(), &want[..]);
    }

    #[test]
    fn certificates_agree_with_oracles(a in blocky_set(), length in 1usize..64, b_max in 1usize..12) {
        let w = a.window_end();
        let length = length.min(w);
        let ind = a.indicator();
        let s = syndetic_bound(&a, b_max);
        prop_assert_eq!(s.bound(), common::least_syndetic(ind, b_max));
        prop_assert!(s.revalidate(&a).is_ok());
        let t = thick_certificate(&a, length).unwrap();
        prop_assert_eq!(t.is_certified(), common::thick_start(ind, length).is_some());
        prop_assert!(t.revalidate(&a).is_ok());
        let p = ps_certificate(&a, b_max, length).unwrap();
        prop_assert_eq!(p.bound(), common::least_ps(ind, b_max, length));
        prop_assert!(p.revalidate(&a).is_ok());
    }

    #[test]
    fn piecewise_syndetic_is_monotone(a in blocky_set(), length in 1usize..64, extra_b in 0usize..8, shorter in 0usize..64) {
        let length = length.min(a.window_end());
        let p = ps_certificate(&a, 8, length).unwrap();
        if let Some(b) = p.bound() {
            let l2 = length.saturating_sub(shorter);
            prop_assert!(ps_certificate(&a, b + extra_b, l2).unwrap().is_certified());
        }
    }

    #[test]
    fn implications_between_structures(a in blocky_set(), length in 1usize..64) {
        let w = a.window_end();
        let length = length.min(w);
        // One shift needs room: `C_1` lives on `[0, W − 1]`.
        if length < w && thick_certificate(&a, length).unwrap().is_certified() {
            prop_assert!(ps_certificate(&a, 1, length).unwrap().is_certified());
        }
        if let Some(b) = syndetic_bound(&a, 32).bound() {
            if length + b.max(1) <= w {
                prop_assert!(ps_certificate(&a, b.max(1), length).unwrap().is_certified());
            }
        }
        if let Some(Witness::PiecewiseSyndetic { b, length: l, .. }) = ps_certificate(&a, 8, length).unwrap().witness() {
            let got = dq(banach_profile_at(&a, l + b).unwrap());
            let weak = Q::new(*l as u64 + 1, (*b as u64 + 1) * (*l as u64 + *b as u64 + 1));
            prop_assert!(got >= weak, "{} < {}", got, weak);
        }
    }
}
