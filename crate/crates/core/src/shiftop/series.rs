//! Window-truncated series over a set `A`: tails of
//! `Σ_{n∈A} (1/∏_{ν≤n} w_ν) e_n` and the shifted sums that control the
//! reiterative-hypercyclicity criterion.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::norm::{compare_norm, norm_exact, NormValue};
use super::vector::ExactVector;
use super::weights::WeightSequence;
use super::SpaceSpec;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::setcalc::WindowedSet;

const PROFILE_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailNorm {
    pub norm: NormValue,
    /// Only `n ≤ truncation` entered the sum.
    pub truncation: usize,
    pub terms: usize,
}

/// `‖Σ_{n∈A, n>m} Σ_{j=0}^{p} (1/∏_{ν=1+j}^{n−m+j} w_ν) e_{n−m+j}‖`, with
/// coefficients added where indices collide.
pub fn series_tail_norm(
    w: &WeightSequence,
    a: &WindowedSet,
    p_shift: usize,
    m: usize,
    space: &SpaceSpec,
) -> Result<TailNorm> {
    if !a.contains(m) {
        return Err(Error::param(format!("m = {m} is not in A")));
    }
    let mut v = ExactVector::zero();
    let mut terms = 0;
    for &n in a.elements().iter().filter(|&&n| n > m) {
        for j in 0..=p_shift {
            let c = w.product_exact(j, n - m)?.recip();
            v.add_at(n - m + j, &c);
            terms += 1;
        }
    }
    Ok(TailNorm {
        norm: norm_exact(&v, space)?,
        truncation: a.window_end(),
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub n: usize,
    /// `ln ‖Σ_{k∈A, k≥n} c_k e_k‖`; `-inf` for an empty tail.
    pub ln_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Cauchy up to the window at tolerance `ε`: some tail starting at
    /// `N ≤ max_cutoff` has norm `< ε`.
    pub converges: bool,
    /// Least `N` whose tail is `< ε`, decided exactly.
    pub cutoff: Option<usize>,
    pub max_cutoff: usize,
    pub truncation: usize,
    pub epsilon: Rational,
    pub space: SpaceSpec,
    pub profile: Vec<TailPoint>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Tails `T(N) = ‖Σ_{n∈A, n≥N} (1/∏_{ν=1}^{n} w_ν) e_n‖` on the window.
/// Tails only shrink as `N` grows, so the least `N` with `T(N) < ε` is
/// found by bisection with exact comparisons. Candidates stop at `W/2` so
/// that the last few members cannot fake convergence.
pub fn series_convergence_check(
    w: &WeightSequence,
    a: &WindowedSet,
    space: &SpaceSpec,
    eps: &BigRational,
) -> Result<ConvergenceReport> {
    if !eps.is_positive() {
        return Err(Error::param("ε must be positive"));
    }
    let big_w = a.window_end();
    let elems = a.elements();
    let prefix = w.prefix_log();
    if let Some(&top) = elems.last() {
        if top > w.horizon() {
            return Err(Error::Range {
                what: "weight index",
                value: top,
                lo: 1,
                hi: w.horizon(),
            });
        }
    }

    let tail_below = |n0: usize| -> Result<bool> {
        let start = elems.partition_point(|&n| n < n0);
        let mut v = ExactVector::zero();
        for &n in &elems[start..] {
            v.set(n, w.product_exact(0, n)?.recip());
        }
        match compare_norm(&v, space, eps) {
            Ok(o) => Ok(o == Ordering::Less),
            Err(Error::Undecided(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let max_cutoff = big_w / 2;
    let cutoff = if tail_below(max_cutoff)? {
        let (mut lo, mut hi) = (0usize, max_cutoff);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if tail_below(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    } else {
        None
    };

    // Float profile: suffix log-sum-exp of ln|c_n|^p = −pΛ(n).
    let p = space.p_f64();
    let mut suffix = vec![f64::NEG_INFINITY; elems.len() + 1];
    for (i, &n) in elems.iter().enumerate().rev() {
        let term = -prefix[n];
        suffix[i] = match space {
            SpaceSpec::C0 => suffix[i + 1].max(term),
            SpaceSpec::Lp(_) => log_add(suffix[i + 1], p * term),
        };
    }
    let stride = (big_w / PROFILE_POINTS).max(1);
    let profile = (0..=big_w)
        .step_by(stride)
        .map(|n| {
            let s = suffix[elems.partition_point(|&k| k < n)];
            let ln_tail = match space {
                SpaceSpec::C0 => s,
                SpaceSpec::Lp(_) => s / p,
            };
            TailPoint { n, ln_tail }
        })
        .collect();

    Ok(ConvergenceReport {
        converges: cutoff.is_some(),
        cutoff,
        max_cutoff,
        truncation: big_w,
        epsilon: Rational(eps.clone()),
        space: space.clone(),
        profile,
    })
}
