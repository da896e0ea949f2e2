//! Orbits `Bⁿx`, distances to a target, and recurrence sets.
//!
//! Exact recurrence scans run a float filter first: every coordinate of
//! `Bⁿx − z` is evaluated in log space together with a rigorous bound on its
//! rounding error, and only values of `n` whose distance band touches `ε`
//! are recomputed over the rationals.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::{compare_norm, norm_exact};
use super::vector::{ExactVector, FloatVector};
use super::weights::WeightSequence;
use super::{Mode, SpaceSpec};
use crate::error::{Error, Result};
use crate::rational::{ln_abs, root_enclosure, to_f64, Enclosure, Rational};
use crate::setcalc::WindowedSet;

const ULP: f64 = f64::EPSILON;
/// Below `e^{-700}` a coordinate is treated as an unresolved tiny value.
const LN_TINY: f64 = -700.0;
const LN_HUGE: f64 = 700.0;
const TINY_SLACK: f64 = 1e-300;

fn ensure_horizon(w: &WeightSequence, x: &ExactVector) -> Result<()> {
    if let Some(top) = x.max_index() {
        if top > w.horizon() {
            return Err(Error::Range {
                what: "weight index",
                value: top,
                lo: 1,
                hi: w.horizon(),
            });
        }
    }
    Ok(())
}

/// `Bⁿx`, coordinatewise `(Bⁿx)_k = ∏_{ν=k+1}^{k+n} w_ν · x_{k+n}`.
pub fn apply_power_exact(w: &WeightSequence, x: &ExactVector, n: usize) -> Result<ExactVector> {
    let mut out = ExactVector::zero();
    if let Some(top) = x.max_index().filter(|&t| t > w.horizon() && t >= n) {
        return Err(Error::Range {
            what: "weight index",
            value: top,
            lo: 1,
            hi: w.horizon(),
        });
    }
    let constant = if w.is_constant() && x.max_index() >= Some(n) {
        Some(w.product_exact(0, n)?)
    } else {
        None
    };
    for (i, v) in x.iter().filter(|&(i, _)| i >= n) {
        let k = i - n;
        let p = match &constant {
            Some(c) => c.clone(),
            None => w.product_exact(k, n)?,
        };
        out.set(k, p * v);
    }
    Ok(out)
}

/// Float `Bⁿx` through the log table. Coordinates may underflow to 0 or
/// overflow to ±∞.
pub fn apply_power_float(w: &WeightSequence, x: &FloatVector, n: usize) -> Result<FloatVector> {
    let mut out = FloatVector::zero();
    for (i, &v) in x.iter().filter(|&(i, _)| i >= n) {
        let k = i - n;
        let (lp, _) = w.log_product(k, n)?;
        out.set(k, v.signum() * (v.abs().ln() + lp).exp());
    }
    Ok(out)
}

/// `‖Bⁿx − z‖` in `space`.
pub fn distance_exact(
    w: &WeightSequence,
    x: &ExactVector,
    z: &ExactVector,
    n: usize,
    space: &SpaceSpec,
) -> Result<super::NormValue> {
    norm_exact(&apply_power_exact(w, x, n)?.sub(z), space)
}

/// True only when `‖B z − z‖ > ε (1 + sup w)`; then `B(U) ∩ U = ∅` for the
/// closed ball `U` of radius `ε` at `z`, since `‖B‖ ≤ sup w`. False means
/// inconclusive.
pub fn certify_disjoint(w: &WeightSequence, z: &ExactVector, eps: &BigRational, space: &SpaceSpec) -> Result<bool> {
    if !eps.is_positive() {
        return Err(Error::param("radius must be positive"));
    }
    ensure_horizon(w, z)?;
    let bz = apply_power_exact(w, z, 1)?;
    let threshold = eps * (BigRational::one() + w.sup_bound());
    match compare_norm(&bz.sub(z), space, &threshold) {
        Ok(o) => Ok(o == Ordering::Greater),
        Err(Error::Undecided(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceResult {
    /// `N(x, U) ∩ [0, W]` for the closed ball `U = {‖· − z‖ ≤ ε}`.
    pub returns: WindowedSet,
    pub target: ExactVector,
    pub radius: Rational,
    pub space: SpaceSpec,
    pub mode: Mode,
    pub disjointness_certified: bool,
    /// Float mode: the largest relative error band met while deciding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Exact mode: how many `n` the float filter could not decide.
    #[serde(default)]
    pub exact_checks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    pub distance_lo: f64,
    pub distance_hi: f64,
}

#[derive(Clone, Copy)]
enum Power {
    Sup,
    P(f64),
}

struct LogCoord {
    idx: usize,
    neg: bool,
    ln: f64,
    err: f64,
}

/// Log-space evaluator of `‖Bⁿx − z‖^p` bands.
struct FloatEval<'a> {
    w: &'a WeightSequence,
    xs: Vec<LogCoord>,
    x_member: Vec<bool>,
    zs: Vec<(usize, f64, f64)>,
    power: Power,
}

/// Bounds on `‖Bⁿx − z‖^p` (or the sup for `c₀`); `hi = ∞` on overflow.
#[derive(Clone, Copy, Debug)]
struct Band {
    lo: f64,
    hi: f64,
    mid: f64,
}

impl<'a> FloatEval<'a> {
    fn new(w: &'a WeightSequence, x: &ExactVector, z: &ExactVector, space: &SpaceSpec) -> Self {
        let xs: Vec<LogCoord> = x
            .iter()
            .map(|(idx, v)| {
                let ln = ln_abs(v);
                LogCoord {
                    idx,
                    neg: v.is_negative(),
                    ln,
                    err: 4.0 * ULP * (1.0 + ln.abs()),
                }
            })
            .collect();
        let mut x_member = vec![false; x.max_index().map_or(0, |m| m + 1)];
        for c in &xs {
            x_member[c.idx] = true;
        }
        let zs = z
            .iter()
            .map(|(k, v)| {
                let f = to_f64(v);
                (k, f, f.abs() * 2.0 * ULP)
            })
            .collect();
        let power = match space {
            SpaceSpec::C0 => Power::Sup,
            SpaceSpec::Lp(_) => Power::P(space.p_f64()),
        };
        FloatEval {
            w,
            xs,
            x_member,
            zs,
            power,
        }
    }

    fn z_at(&self, k: usize) -> Option<(f64, f64)> {
        self.zs
            .binary_search_by_key(&k, |&(i, _, _)| i)
            .ok()
            .map(|pos| (self.zs[pos].1, self.zs[pos].2))
    }

    fn band(&self, n: usize) -> Band {
        let (mut lo, mut hi, mut mid) = (0.0f64, 0.0f64, 0.0f64);
        let mut terms = 0usize;
        let mut add = |d: f64, e: f64| {
            let dlo = (d - e).max(0.0);
            let dhi = d + e;
            match self.power {
                Power::Sup => {
                    lo = lo.max(dlo);
                    hi = hi.max(dhi);
                    mid = mid.max(d);
                }
                Power::P(p) => {
                    lo += dlo.powf(p);
                    hi += dhi.powf(p);
                    mid += d.powf(p);
                }
            }
            terms += 1;
        };
        let start = self.xs.partition_point(|c| c.idx < n);
        for c in &self.xs[start..] {
            let k = c.idx - n;
            let (lp, lp_err) = self.w.log_product_unchecked(k, n);
            let ln = c.ln + lp;
            let err = c.err + lp_err + ULP * ln.abs();
            let (zk, zerr) = self.z_at(k).unwrap_or((0.0, 0.0));
            if ln - err > LN_HUGE {
                add(f64::INFINITY, 0.0);
                continue;
            }
            let t = ln.exp();
            let mut et = t * (err.exp_m1() + 2.0 * ULP);
            if ln + err < LN_TINY {
                et += TINY_SLACK;
            }
            let signed = if c.neg { -t } else { t };
            let diff = (signed - zk).abs();
            add(diff, et + zerr + diff * ULP);
        }
        for &(k, zk, zerr) in &self.zs {
            let hit = self.x_member.get(k + n).copied().unwrap_or(false);
            if !hit {
                add(zk.abs(), zerr);
            }
        }
        let slack = (terms as f64 + 8.0) * 4.0 * ULP;
        Band {
            lo: lo * (1.0 - slack),
            hi: hi * (1.0 + slack) + terms as f64 * f64::MIN_POSITIVE,
            mid,
        }
    }

    fn root(&self, v: f64, up: bool) -> f64 {
        let r = match self.power {
            Power::Sup => v,
            Power::P(p) => v.powf(1.0 / p),
        };
        let pad = 16.0 * ULP;
        if up {
            if r == 0.0 {
                0.0
            } else {
                (r * (1.0 + pad)).next_up()
            }
        } else {
            (r * (1.0 - pad)).next_down().max(0.0)
        }
    }
}

/// `[ε^p lo, ε^p hi]` as floats.
fn eps_power_band(eps: &BigRational, power: Power) -> (f64, f64) {
    let e = root_enclosure(eps, 1);
    match power {
        Power::Sup => (e.lo, e.hi),
        Power::P(p) => {
            let pad = 16.0 * ULP;
            (
                (e.lo.powf(p) * (1.0 - pad)).next_down().max(0.0),
                (e.hi.powf(p) * (1.0 + pad)).next_up(),
            )
        }
    }
}

/// `N(x, U) ∩ [0, W]` for the closed `ε`-ball `U` around `z`.
///
/// Exact mode decides every `n` exactly; float mode accepts the float
/// estimate and records the widest relative error band it relied on.
pub fn recurrence_set(
    w: &WeightSequence,
    x: &ExactVector,
    z: &ExactVector,
    eps: &BigRational,
    space: &SpaceSpec,
    window_end: usize,
    mode: Mode,
) -> Result<RecurrenceResult> {
    if !eps.is_positive() {
        return Err(Error::param("radius must be positive"));
    }
    ensure_horizon(w, x)?;
    let eval = FloatEval::new(w, x, z, space);
    let (eps_lo, eps_hi) = eps_power_band(eps, eval.power);
    // For n past the support of x the orbit is 0 and the distance is ‖z‖.
    let active_end = x.max_index().map_or(0, |m| m + 1).min(window_end + 1);

    let decide = |n: usize| -> Result<(bool, bool, f64)> {
        let b = eval.band(n);
        let rel = if b.mid > 0.0 { (b.hi - b.lo) / b.mid } else { 0.0 };
        match mode {
            Mode::Float => Ok((b.mid <= 0.5 * (eps_lo + eps_hi), false, rel)),
            Mode::Exact => {
                if b.hi < eps_lo {
                    Ok((true, false, rel))
                } else if b.lo > eps_hi {
                    Ok((false, false, rel))
                } else {
                    let d = apply_power_exact(w, x, n)?.sub(z);
                    Ok((compare_norm(&d, space, eps)? != Ordering::Greater, true, rel))
                }
            }
        }
    };

    let decided: Vec<(bool, bool, f64)> = (0..active_end).into_par_iter().map(decide).collect::<Result<_>>()?;
    let mut indicator: Vec<bool> = decided.iter().map(|d| d.0).collect();
    let mut exact_checks = decided.iter().filter(|d| d.1).count();
    let mut tolerance = decided.iter().map(|d| d.2).fold(0.0, f64::max);
    if active_end <= window_end {
        let (tail, checked, rel) = match mode {
            Mode::Exact => (compare_norm(z, space, eps)? != Ordering::Greater, true, 0.0),
            Mode::Float => decide(active_end)?,
        };
        exact_checks += checked as usize;
        tolerance = tolerance.max(rel);
        indicator.resize(window_end + 1, tail);
    }

    Ok(RecurrenceResult {
        returns: WindowedSet::from_indicator(indicator),
        target: z.clone(),
        radius: Rational(eps.clone()),
        space: space.clone(),
        mode,
        disjointness_certified: certify_disjoint(w, z, eps, space)?,
        tolerance: (mode == Mode::Float).then_some(tolerance),
        exact_checks: if mode == Mode::Exact { exact_checks } else { 0 },
    })
}

/// `‖Bⁿx − z‖` enclosures for `n ∈ [0, n_max]`: exact norms in exact mode,
/// log-space bands in float mode.
pub fn orbit_trace(
    w: &WeightSequence,
    x: &ExactVector,
    z: &ExactVector,
    space: &SpaceSpec,
    n_max: usize,
    mode: Mode,
) -> Result<Vec<TracePoint>> {
    ensure_horizon(w, x)?;
    let eval = FloatEval::new(w, x, z, space);
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let enc = match mode {
                Mode::Exact => distance_exact(w, x, z, n, space)?.enclosure,
                Mode::Float => {
                    let b = eval.band(n);
                    Enclosure {
                        lo: eval.root(b.lo, false),
                        hi: eval.root(b.hi, true),
                    }
                }
            };
            Ok(TracePoint {
                n,
                distance_lo: enc.lo,
                distance_hi: enc.hi,
            })
        })
        .collect()
}
