use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Mode;
use crate::rational::{format_rational, parse_rational, to_f64};

/// Scalars a [`ShiftVector`] can carry.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn is_zero_value(&self) -> bool;
}

impl Scalar for BigRational {
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Scalar for f64 {
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
}

/// Finitely supported vector over `Z₊`; zero coordinates are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftVector<S: Scalar> {
    coords: BTreeMap<usize, S>,
}

pub type ExactVector = ShiftVector<BigRational>;
pub type FloatVector = ShiftVector<f64>;

impl<S: Scalar> Default for ShiftVector<S> {
    fn default() -> Self {
        ShiftVector {
            coords: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> ShiftVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_coords(coords: impl IntoIterator<Item = (usize, S)>) -> Self {
        let mut v = Self::zero();
        for (k, x) in coords {
            v.set(k, x);
        }
        v
    }

    pub fn set(&mut self, k: usize, x: S) {
        if x.is_zero_value() {
            self.coords.remove(&k);
        } else {
            self.coords.insert(k, x);
        }
    }

    pub fn get(&self, k: usize) -> Option<&S> {
        self.coords.get(&k)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (usize, &S)> + '_ {
        self.coords.iter().map(|(&k, x)| (k, x))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.keys().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coords.keys().next_back().copied()
    }

    pub fn nnz(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
}

impl ExactVector {
    pub fn basis(k: usize) -> Self {
        Self::from_coords([(k, BigRational::from_integer(1.into()))])
    }

    pub fn to_float(&self) -> FloatVector {
        FloatVector::from_coords(self.iter().map(|(k, x)| (k, to_f64(x))))
    }

    pub fn sub(&self, other: &ExactVector) -> ExactVector {
        let mut out = self.clone();
        for (k, x) in other.iter() {
            let v = out.get(k).cloned().unwrap_or_else(BigRational::zero) - x;
            out.set(k, v);
        }
        out
    }

    pub fn add_at(&mut self, k: usize, x: &BigRational) {
        let v = self.get(k).cloned().unwrap_or_else(BigRational::zero) + x;
        self.set(k, v);
    }
}

impl FloatVector {
    pub fn basis(k: usize) -> Self {
        Self::from_coords([(k, 1.0)])
    }

    pub fn sub(&self, other: &FloatVector) -> FloatVector {
        let mut out = self.clone();
        for (k, &x) in other.iter() {
            let v = out.get(k).copied().unwrap_or(0.0) - x;
            out.set(k, v);
        }
        out
    }
}

/// Mode-tagged vector, the form vectors take in JSON:
/// `{"coords": {"5": "1/32"}, "mode": "exact"}`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyVector {
    Exact(ExactVector),
    Float(FloatVector),
}

impl AnyVector {
    pub fn mode(&self) -> Mode {
        match self {
            AnyVector::Exact(_) => Mode::Exact,
            AnyVector::Float(_) => Mode::Float,
        }
    }

    /// Exact view; float coordinates convert to the rational they denote.
    pub fn to_exact(&self) -> ExactVector {
        match self {
            AnyVector::Exact(v) => v.clone(),
            AnyVector::Float(v) => ExactVector::from_coords(
                v.iter()
                    .filter_map(|(k, &x)| BigRational::from_float(x).map(|q| (k, q))),
            ),
        }
    }

    pub fn to_float(&self) -> FloatVector {
        match self {
            AnyVector::Exact(v) => v.to_float(),
            AnyVector::Float(v) => v.clone(),
        }
    }
}

impl From<ExactVector> for AnyVector {
    fn from(v: ExactVector) -> Self {
        AnyVector::Exact(v)
    }
}

impl From<FloatVector> for AnyVector {
    fn from(v: FloatVector) -> Self {
        AnyVector::Float(v)
    }
}

#[derive(Serialize, Deserialize)]
struct VectorRepr {
    coords: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    mode: Mode,
}

impl Serialize for AnyVector {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        let coords = match self {
            AnyVector::Exact(v) => v
                .iter()
                .map(|(k, x)| (k.to_string(), serde_json::Value::String(format_rational(x))))
                .collect(),
            AnyVector::Float(v) => v
                .iter()
                .map(|(k, &x)| {
                    let val = serde_json::Number::from_f64(x)
                        .map(serde_json::Value::Number)
                        .unwrap_or_else(|| serde_json::Value::String(x.to_string()));
                    (k.to_string(), val)
                })
                .collect(),
        };
        VectorRepr {
            coords,
            mode: self.mode(),
        }
        .serialize(s)
    }
}

impl Serialize for ExactVector {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        AnyVector::Exact(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(AnyVector::deserialize(d)?.to_exact())
    }
}

fn coord_rational(v: &serde_json::Value) -> Result<BigRational, String> {
    match v {
        serde_json::Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else {
                parse_rational(&n.to_string()).map_err(|e| e.to_string())
            }
        }
        other => Err(format!("coordinate must be a string or number, got {other}")),
    }
}

fn coord_float(v: &serde_json::Value) -> Result<f64, String> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().ok_or_else(|| "bad number".to_string()),
        serde_json::Value::String(s) => match s.parse::<f64>() {
            Ok(x) => Ok(x),
            Err(_) => parse_rational(s).map(|q| to_f64(&q)).map_err(|e| e.to_string()),
        },
        other => Err(format!("coordinate must be a string or number, got {other}")),
    }
}

impl<'de> Deserialize<'de> for AnyVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = VectorRepr::deserialize(d)?;
        let index = |k: &str| {
            k.parse::<usize>()
                .map_err(|_| D::Error::custom(format!("coordinate index {k:?} is not a non-negative integer")))
        };
        match repr.mode {
            Mode::Exact => {
                let mut v = ExactVector::zero();
                for (k, x) in &repr.coords {
                    v.set(index(k)?, coord_rational(x).map_err(D::Error::custom)?);
                }
                Ok(AnyVector::Exact(v))
            }
            Mode::Float => {
                let mut v = FloatVector::zero();
                for (k, x) in &repr.coords {
                    v.set(index(k)?, coord_float(x).map_err(D::Error::custom)?);
                }
                Ok(AnyVector::Float(v))
            }
        }
    }
}
