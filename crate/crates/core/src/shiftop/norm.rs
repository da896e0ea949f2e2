use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::vector::{ExactVector, FloatVector};
use super::SpaceSpec;
use crate::error::{Error, Result};
use crate::rational::{
    abs_pow, bit_budget, check_budget, root_enclosure, small_ratio, to_f64, Enclosure, Rational, RationalSum,
};

/// Relative padding applied after a float `powf`, which is not correctly
/// rounded; a few ulps cover every libm we know of.
const POWF_PAD: f64 = 16.0 * f64::EPSILON;

/// A norm as an exact `p`-th power (when rational) plus a certified
/// enclosure of the norm itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormValue {
    pub space: SpaceSpec,
    /// `Σ|x_k|^p` for integer `p`, `sup|x_k|` for `c₀`; absent otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<Rational>,
    pub enclosure: Enclosure,
}

impl NormValue {
    /// The norm itself when it is rational (`c₀`, `ℓ¹`, or a perfect power).
    pub fn exact(&self) -> Option<BigRational> {
        let p = self.power.as_ref()?.inner();
        match self.space.integer_power() {
            Some(1) => Some(p.clone()),
            _ if self.enclosure.lo == self.enclosure.hi => BigRational::from_float(self.enclosure.lo),
            _ => None,
        }
    }

    /// Exact comparison with `eps` when the `p`-th power is rational.
    pub fn cmp_exact(&self, eps: &BigRational) -> Option<Ordering> {
        let power = self.power.as_ref()?.inner();
        if eps.is_negative() {
            return Some(Ordering::Greater);
        }
        Some(match self.space {
            SpaceSpec::C0 => power.cmp(eps),
            _ => power.cmp(&abs_pow(eps, self.space.integer_power()?)),
        })
    }
}

fn pad_down(v: f64) -> f64 {
    (v * (1.0 - POWF_PAD)).next_down().max(0.0)
}

fn pad_up(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (v * (1.0 + POWF_PAD)).next_up()
    }
}

/// `Σ|x_k|^p` for integer `p`, or `sup|x_k|` when `space` is `c₀`.
pub(crate) fn exact_power(x: &ExactVector, space: &SpaceSpec, budget: u64) -> Option<Result<BigRational>> {
    match space {
        SpaceSpec::C0 => Some(Ok(x.iter().map(|(_, v)| v.abs()).max().unwrap_or_else(BigRational::zero))),
        SpaceSpec::Lp(_) => {
            let p = space.integer_power()?;
            let mut sum = RationalSum::new();
            for (_, v) in x.iter() {
                sum.add(&abs_pow(v, p));
                if sum.bits() > budget {
                    return Some(Err(Error::BitBudget { bits: sum.bits(), budget }));
                }
            }
            let sum = sum.finish();
            Some(check_budget(&sum, budget).map(|()| sum))
        }
    }
}

pub fn norm_exact(x: &ExactVector, space: &SpaceSpec) -> Result<NormValue> {
    if let Some(power) = exact_power(x, space, bit_budget()) {
        let power = power?;
        let degree = space.integer_power().expect("integer power");
        let degree = if matches!(space, SpaceSpec::C0) { 1 } else { degree };
        return Ok(NormValue {
            space: space.clone(),
            enclosure: root_enclosure(&power, degree),
            power: Some(Rational(power)),
        });
    }
    let SpaceSpec::Lp(p) = space else { unreachable!() };
    let (a, b) = small_ratio(p).ok_or_else(|| Error::param(format!("exponent {space} too large")))?;
    // |x|^{a/b} enclosed per term, then summed with outward rounding.
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for (_, v) in x.iter() {
        let term = root_enclosure(&abs_pow(v, a), b);
        lo = (lo + term.lo).next_down().max(0.0);
        hi = (hi + term.hi).next_up();
    }
    let inv = f64::from(b) / f64::from(a);
    Ok(NormValue {
        space: space.clone(),
        power: None,
        enclosure: Enclosure {
            lo: pad_down(lo.powf(inv)),
            hi: pad_up(hi.powf(inv)),
        },
    })
}

/// Float norm, scaled by the largest coordinate so it neither overflows
/// nor underflows.
pub fn norm_float(x: &FloatVector, space: &SpaceSpec) -> f64 {
    let max = x.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    match space {
        SpaceSpec::C0 => max,
        SpaceSpec::Lp(_) if max == 0.0 => 0.0,
        SpaceSpec::Lp(_) => {
            let p = space.p_f64();
            let s: f64 = x.iter().map(|(_, v)| (v.abs() / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

/// Compares `‖x‖` with `eps` exactly for `c₀` and integer `p` (via
/// `Σ|x_k|^p` against `eps^p`), and through enclosures otherwise.
pub fn compare_norm(x: &ExactVector, space: &SpaceSpec, eps: &BigRational) -> Result<Ordering> {
    compare_norm_budget(x, space, eps, bit_budget())
}

pub(crate) fn compare_norm_budget(
    x: &ExactVector,
    space: &SpaceSpec,
    eps: &BigRational,
    budget: u64,
) -> Result<Ordering> {
    if eps.is_negative() {
        return Ok(Ordering::Greater);
    }
    if let Some(power) = exact_power(x, space, budget) {
        let power = power?;
        let rhs = match space {
            SpaceSpec::C0 => eps.clone(),
            _ => abs_pow(eps, space.integer_power().expect("integer power")),
        };
        return Ok(power.cmp(&rhs));
    }
    let enc = norm_exact(x, space)?.enclosure;
    let e = root_enclosure(eps, 1);
    if enc.hi < e.lo {
        Ok(Ordering::Less)
    } else if enc.lo > e.hi {
        Ok(Ordering::Greater)
    } else {
        Err(Error::Undecided(format!(
            "norm enclosure [{:e}, {:e}] straddles {:e} in {space}",
            enc.lo,
            enc.hi,
            to_f64(eps)
        )))
    }
}
