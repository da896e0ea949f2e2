use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::error::{Error, Result};
use crate::rational::{bit_budget, check_budget, ln_abs, Rational};

const ULP: f64 = f64::EPSILON;

/// How `w_n` is given for `n ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    /// `w_n = value` for all `n`.
    Const(BigRational),
    /// `w_n = values[n − 1]`; undefined past the table.
    Table(Vec<BigRational>),
    /// `w_n = (n + 1)/n`, whose products telescope.
    Telescoping,
}

/// JSON form: `{"rule": "const", "value": "2"}`,
/// `{"rule": "rational_table", "values": ["1", "3/2"]}` or
/// `{"rule": "formula:(n+1)/n"}`, each with an optional `"sup_bound"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_bound: Option<Rational>,
}

impl WeightSpec {
    pub fn constant(value: Rational) -> Self {
        WeightSpec {
            rule: "const".into(),
            value: Some(value),
            values: None,
            sup_bound: None,
        }
    }

    pub fn to_rule(&self) -> Result<WeightRule> {
        match self.rule.as_str() {
            "const" => {
                let v = self
                    .value
                    .as_ref()
                    .ok_or_else(|| Error::param("const weight rule needs \"value\""))?;
                Ok(WeightRule::Const(v.inner().clone()))
            }
            "rational_table" => {
                let vs = self
                    .values
                    .as_ref()
                    .ok_or_else(|| Error::param("rational_table weight rule needs \"values\""))?;
                Ok(WeightRule::Table(vs.iter().map(|v| v.inner().clone()).collect()))
            }
            "formula:(n+1)/n" => Ok(WeightRule::Telescoping),
            other => Err(Error::param(format!("unknown weight rule {other:?}"))),
        }
    }
}

/// A positive bounded weight on `[1, horizon]` with its log-prefix table.
///
/// `prefix_log[n] = Λ(n) = Σ_{ν=1}^{n} ln w_ν` and `prefix_err[n]` bounds
/// the absolute rounding error accumulated in `Λ(n)`.
#[derive(Clone, Debug)]
pub struct WeightSequence {
    rule: WeightRule,
    sup_bound: BigRational,
    horizon: usize,
    prefix_log: Vec<f64>,
    prefix_err: Vec<f64>,
    bit_budget: u64,
}

impl WeightSequence {
    /// Weights for indices `1..=horizon` (a table rule caps the horizon at
    /// its length). `sup_bound` defaults to the largest weight in range.
    pub fn new(rule: WeightRule, sup_bound: Option<BigRational>, horizon: usize) -> Result<Self> {
        let horizon = match &rule {
            WeightRule::Table(v) => horizon.min(v.len()),
            _ => horizon,
        };
        let mut prefix_log = Vec::with_capacity(horizon + 1);
        let mut prefix_err = Vec::with_capacity(horizon + 1);
        prefix_log.push(0.0);
        prefix_err.push(0.0);
        let mut max_w = BigRational::zero();
        let (mut lam, mut err) = (0.0f64, 0.0f64);
        for n in 1..=horizon {
            let w = rule_value(&rule, n).expect("index inside horizon");
            if !w.is_positive() {
                return Err(Error::param(format!("weight w_{n} = {w} is not positive")));
            }
            let lw = ln_abs(&w);
            lam += lw;
            // ln is faithful to a couple of ulps; the addition rounds once more.
            err += 2.0 * ULP * lw.abs() + ULP * lam.abs();
            prefix_log.push(lam);
            prefix_err.push(err);
            if w > max_w {
                max_w = w;
            }
        }
        let sup_bound = match sup_bound {
            Some(s) => {
                if max_w > s {
                    return Err(Error::param(format!(
                        "weight {} exceeds sup_bound {}",
                        crate::rational::format_rational(&max_w),
                        crate::rational::format_rational(&s)
                    )));
                }
                s
            }
            None => match &rule {
                WeightRule::Const(c) => c.clone(),
                WeightRule::Telescoping => BigRational::from_integer(2.into()),
                WeightRule::Table(_) => max_w,
            },
        };
        Ok(WeightSequence {
            rule,
            sup_bound,
            horizon,
            prefix_log,
            prefix_err,
            bit_budget: bit_budget(),
        })
    }

    pub fn from_spec(spec: &WeightSpec, horizon: usize) -> Result<Self> {
        let rule = spec.to_rule()?;
        Self::new(rule, spec.sup_bound.as_ref().map(|s| s.inner().clone()), horizon)
    }

    pub fn constant(value: BigRational, horizon: usize) -> Result<Self> {
        Self::new(WeightRule::Const(value), None, horizon)
    }

    pub fn with_bit_budget(mut self, bits: u64) -> Self {
        self.bit_budget = bits;
        self
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn sup_bound(&self) -> &BigRational {
        &self.sup_bound
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn bit_budget(&self) -> u64 {
        self.bit_budget
    }

    /// True when `product(j, n)` depends on `n` only.
    pub fn is_constant(&self) -> bool {
        matches!(self.rule, WeightRule::Const(_))
    }

    fn check_range(&self, top: usize) -> Result<()> {
        if top > self.horizon {
            return Err(Error::Range {
                what: "weight index",
                value: top,
                lo: 1,
                hi: self.horizon,
            });
        }
        Ok(())
    }

    pub fn weight(&self, n: usize) -> Result<BigRational> {
        if n == 0 {
            return Err(Error::Range {
                what: "weight index",
                value: 0,
                lo: 1,
                hi: self.horizon,
            });
        }
        self.check_range(n)?;
        Ok(rule_value(&self.rule, n).expect("in range"))
    }

    /// `∏_{ν=j+1}^{j+n} w_ν` exactly; the empty product is 1.
    pub fn product_exact(&self, j: usize, n: usize) -> Result<BigRational> {
        self.check_range(j + n)?;
        let p = match &self.rule {
            WeightRule::Const(c) => {
                let bits = (c.numer().bits() + c.denom().bits()).saturating_mul(n as u64);
                if bits > self.bit_budget {
                    return Err(Error::BitBudget {
                        bits,
                        budget: self.bit_budget,
                    });
                }
                Pow::pow(c, n)
            }
            WeightRule::Telescoping => BigRational::new(BigInt::from(j + n + 1), BigInt::from(j + 1)),
            WeightRule::Table(v) => {
                let mut acc = BigRational::one();
                for w in &v[j..j + n] {
                    acc *= w;
                }
                acc
            }
        };
        check_budget(&p, self.bit_budget)?;
        Ok(p)
    }

    /// `Λ(j + n) − Λ(j)` and a bound on its absolute error.
    pub fn log_product(&self, j: usize, n: usize) -> Result<(f64, f64)> {
        self.check_range(j + n)?;
        Ok(self.log_product_unchecked(j, n))
    }

    #[inline]
    pub(crate) fn log_product_unchecked(&self, j: usize, n: usize) -> (f64, f64) {
        let v = self.prefix_log[j + n] - self.prefix_log[j];
        let e = self.prefix_err[j + n] + self.prefix_err[j] + ULP * v.abs();
        (v, e)
    }

    pub fn prefix_log(&self) -> &[f64] {
        &self.prefix_log
    }

    /// `n ∈ A_{M,j}`, i.e. `∏_{ν=j+1}^{j+n} w_ν > M`. Float mode decides on
    /// the log table and falls back to exact arithmetic inside the error band.
    pub fn a_mj_membership(&self, big_m: &BigRational, j: usize, n: usize, mode: Mode) -> Result<bool> {
        if !big_m.is_positive() {
            return Err(Error::param("A_{M,j} needs M > 0"));
        }
        if n == 0 {
            return Err(Error::param("A_{M,j} is defined for n ≥ 1"));
        }
        match mode {
            Mode::Exact => Ok(self.product_exact(j, n)? > *big_m),
            Mode::Float => {
                let (lp, err) = self.log_product(j, n)?;
                let lm = ln_abs(big_m);
                let guard = err + 4.0 * ULP * (1.0 + lm.abs());
                if lp - lm > guard {
                    Ok(true)
                } else if lm - lp > guard {
                    Ok(false)
                } else {
                    Ok(self.product_exact(j, n)? > *big_m)
                }
            }
        }
    }
}

fn rule_value(rule: &WeightRule, n: usize) -> Option<BigRational> {
    match rule {
        WeightRule::Const(c) => Some(c.clone()),
        WeightRule::Table(v) => v.get(n.checked_sub(1)?).cloned(),
        WeightRule::Telescoping => Some(BigRational::new(BigInt::from(n + 1), BigInt::from(n))),
    }
}
