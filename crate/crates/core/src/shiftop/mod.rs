//! Unilateral weighted backward shifts `B_w e_n = w_n e_{n−1}`, `B_w e_0 = 0`,
//! on `c₀(Z₊)` and `ℓᵖ(Z₊)`.
//!
//! Two arithmetic modes run side by side. Exact mode works over
//! `BigRational` and is authoritative; float mode keeps every coordinate as
//! `(sign, ln|x|)` and the weights as a prefix table `Λ(n) = Σ_{ν ≤ n} ln w_ν`
//! so that products spanning thousands of weights neither overflow nor
//! underflow. Results record which mode produced them.

mod norm;
mod orbit;
mod series;
mod vector;
mod weights;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use norm::{compare_norm, norm_exact, norm_float, NormValue};
pub use orbit::{
    apply_power_exact, apply_power_float, certify_disjoint, distance_exact, orbit_trace,
    recurrence_set, RecurrenceResult, TracePoint,
};
pub use series::{series_convergence_check, series_tail_norm, ConvergenceReport, TailNorm};
pub use vector::{AnyVector, ExactVector, FloatVector, ShiftVector};
pub use weights::{WeightRule, WeightSequence, WeightSpec};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

/// The sequence space. Written `c0`, or `l<p>` with a rational `p ≥ 1`
/// (`l1`, `l2`, `l3/2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SpaceSpec {
    C0,
    Lp(BigRational),
}

impl SpaceSpec {
    pub fn lp(p: u32) -> Self {
        SpaceSpec::Lp(BigRational::from_integer(p.into()))
    }

    pub fn new_lp(p: BigRational) -> Result<Self> {
        if p < BigRational::one() {
            return Err(Error::param(format!("ℓᵖ needs p ≥ 1, got {}", format_rational(&p))));
        }
        Ok(SpaceSpec::Lp(p))
    }

    /// `Some(p)` for an integer exponent, `Some(1)` for `c₀` (whose norm is
    /// compared directly).
    pub fn integer_power(&self) -> Option<u32> {
        match self {
            SpaceSpec::C0 => Some(1),
            SpaceSpec::Lp(p) if p.is_integer() => p.to_integer().to_u32(),
            SpaceSpec::Lp(_) => None,
        }
    }

    pub fn p_f64(&self) -> f64 {
        match self {
            SpaceSpec::C0 => f64::INFINITY,
            SpaceSpec::Lp(p) => p.to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::C0 => f.write_str("c0"),
            SpaceSpec::Lp(p) => write!(f, "l{}", format_rational(p)),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("c0") {
            return Ok(SpaceSpec::C0);
        }
        let p = s
            .strip_prefix("lp:")
            .or_else(|| s.strip_prefix('l'))
            .ok_or_else(|| Error::Parse(format!("unknown space {s:?}; use c0, l1, l2, l3/2 ...")))?;
        SpaceSpec::new_lp(parse_rational(p)?)
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_parsing() {
        assert_eq!("c0".parse::<SpaceSpec>().unwrap(), SpaceSpec::C0);
        assert_eq!("l2".parse::<SpaceSpec>().unwrap(), SpaceSpec::lp(2));
        let s: SpaceSpec = "lp:3/2".parse().unwrap();
        assert_eq!(s.to_string(), "l3/2");
        assert_eq!(s.integer_power(), None);
        assert!("l1/2".parse::<SpaceSpec>().is_err());
        assert!("h1".parse::<SpaceSpec>().is_err());
        assert_eq!(serde_json::to_string(&SpaceSpec::lp(1)).unwrap(), "\"l1\"");
    }
}
