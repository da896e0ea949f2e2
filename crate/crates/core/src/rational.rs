//! Exact rationals, their string form, and certified float enclosures.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Environment variable capping the size of exact rationals, in bits.
pub const BIT_BUDGET_ENV: &str = "RECURLAB_BIT_BUDGET";
pub const DEFAULT_BIT_BUDGET: u64 = 1_000_000;

/// Bit budget from `RECURLAB_BIT_BUDGET` (accepts `1e6` style), read once.
pub fn bit_budget() -> u64 {
    static BUDGET: OnceLock<u64> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var(BIT_BUDGET_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v >= 1.0)
            .map(|v| v as u64)
            .unwrap_or(DEFAULT_BIT_BUDGET)
    })
}

/// Combined bit length of numerator and denominator.
pub fn bits(q: &BigRational) -> u64 {
    q.numer().bits() + q.denom().bits()
}

pub fn check_budget(q: &BigRational, budget: u64) -> Result<()> {
    let b = bits(q);
    if b > budget {
        Err(Error::BitBudget { bits: b, budget })
    } else {
        Ok(())
    }
}

/// A density value `count / (n + 1)`, always reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Density(Ratio<u64>);

impl Density {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "density with zero denominator");
        Density(Ratio::new(num, den))
    }

    pub fn zero() -> Self {
        Density::new(0, 1)
    }

    pub fn one() -> Self {
        Density::new(1, 1)
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    /// Exact comparison against an arbitrary rational.
    pub fn cmp_big(&self, other: &BigRational) -> Ordering {
        self.to_big().cmp(other)
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Density {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let q = Rational::deserialize(d)?;
        let (n, den) = (q.0.numer().to_u64(), q.0.denom().to_u64());
        match (n, den) {
            (Some(n), Some(den)) => Ok(Density::new(n, den)),
            _ => Err(serde::de::Error::custom("density must be a non-negative u64 ratio")),
        }
    }
}

/// Serializable exact rational, written as `"p/q"` or `"p"`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(q: BigRational) -> Self {
        Rational(q)
    }

    pub fn from_ints(n: i64, d: i64) -> Self {
        Rational(BigRational::new(n.into(), d.into()))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }
}

impl From<BigRational> for Rational {
    fn from(q: BigRational) -> Self {
        Rational(q)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Rational)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Int(i64),
            Float(f64),
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Int(i) => Ok(Rational::from(i)),
            // JSON numbers with a fraction are taken at their decimal text value
            // as far as f64 can express it; strings are preferred for exactness.
            Repr::Float(f) => BigRational::from_float(f)
                .map(Rational)
                .ok_or_else(|| serde::de::Error::custom("non-finite number")),
        }
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, integers, and decimal literals (`0.125`, `-3.5e-2`) exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(digits, Pow::pow(&ten, (-scale) as u32))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln |q|`, accurate for magnitudes far outside the f64 range.
/// Returns `-inf` for zero.
pub fn ln_abs(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    ln_biguint(n) - ln_biguint(d)
}

/// Nearest-ish f64 to `q`, saturating at 0 / ±inf outside the range.
pub fn to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let Some(v) = q.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let l = ln_abs(q);
    let mag = l.exp();
    if q.is_negative() {
        -mag
    } else {
        mag
    }
}

fn exact(f: f64) -> BigRational {
    BigRational::from_float(f).expect("finite float")
}

/// Certified interval `[lo, hi]` around a non-negative real.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn point(v: f64) -> Self {
        Enclosure { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Enclosure of an exact non-negative rational.
    pub fn of_rational(q: &BigRational) -> Self {
        root_enclosure(q, 1)
    }
}

/// Certified enclosure of the `degree`-th root of a non-negative rational:
/// `lo^degree ≤ value ≤ hi^degree` holds exactly.
pub fn root_enclosure(value: &BigRational, degree: u32) -> Enclosure {
    assert!(degree >= 1);
    assert!(!value.is_negative(), "root of a negative rational");
    if value.is_zero() {
        return Enclosure::point(0.0);
    }
    let approx = (ln_abs(value) / degree as f64).exp();
    let pow = |f: f64| -> BigRational { Pow::pow(&exact(f), degree) };

    let mut lo = if approx.is_finite() { approx } else { f64::MAX };
    let mut step = 0u32;
    while lo > 0.0 && pow(lo) > *value {
        lo = if step < 4 { lo.next_down() } else { lo * (1.0 - 1e-12 * f64::from(1u32 << step.min(30))) };
        if lo < f64::MIN_POSITIVE {
            lo = 0.0;
        }
        step += 1;
    }
    let mut hi = if approx > 0.0 { approx } else { f64::MIN_POSITIVE };
    step = 0;
    while hi.is_finite() && pow(hi) < *value {
        hi = if step < 4 { hi.next_up() } else { hi * (1.0 + 1e-12 * f64::from(1u32 << step.min(30))) };
        step += 1;
    }
    Enclosure { lo: lo.max(0.0), hi }
}

/// `|q|^p` for an integer exponent, exactly.
pub fn abs_pow(q: &BigRational, p: u32) -> BigRational {
    Pow::pow(&q.abs(), p)
}

/// Splits a positive rational exponent into `(numerator, denominator)` when
/// both fit in `u32`.
pub fn small_ratio(p: &BigRational) -> Option<(u32, u32)> {
    Some((p.numer().to_u32()?, p.denom().to_u32()?))
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

pub fn big_from_usize(v: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Sign helper that treats zero as positive.
pub fn sign_of(q: &BigRational) -> Sign {
    if q.is_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

/// Least common multiple of denominators, used when summing many terms.
pub fn lcm_denoms<'a>(qs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    qs.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Sums rationals over a running common denominator and reduces once at the
/// end. Adding reduced `BigRational`s one by one pays a full gcd per term,
/// which dominates long sums of dyadic values.
#[derive(Clone, Debug)]
pub struct RationalSum {
    num: BigInt,
    den: BigInt,
}

fn power_of_two(x: &BigInt) -> Option<u64> {
    let tz = x.trailing_zeros()?;
    (x.bits() == tz + 1).then_some(tz)
}

impl Default for RationalSum {
    fn default() -> Self {
        Self::new()
    }
}

impl RationalSum {
    pub fn new() -> Self {
        Self {
            num: BigInt::zero(),
            den: BigInt::one(),
        }
    }

    pub fn add(&mut self, q: &BigRational) {
        let d = q.denom();
        if *d == self.den {
            self.num += q.numer();
            return;
        }
        match (power_of_two(&self.den), power_of_two(d)) {
            (Some(a), Some(b)) if a >= b => self.num += q.numer() << (a - b),
            (Some(a), Some(b)) => {
                self.num <<= b - a;
                self.num += q.numer();
                self.den = d.clone();
            }
            _ if self.den.is_multiple_of(d) => self.num += q.numer() * (&self.den / d),
            _ if d.is_multiple_of(&self.den) => {
                self.num *= d / &self.den;
                self.num += q.numer();
                self.den = d.clone();
            }
            _ => {
                let g = self.den.gcd(d);
                self.num = &self.num * (d / &g) + q.numer() * (&self.den / &g);
                self.den = &self.den / &g * d;
            }
        }
    }

    /// Size of the unreduced accumulator, for budget checks.
    pub fn bits(&self) -> u64 {
        self.num.bits() + self.den.bits()
    }

    pub fn finish(self) -> BigRational {
        if self.num.is_zero() {
            return BigRational::zero();
        }
        if let Some(k) = power_of_two(&self.den) {
            let shift = k.min(self.num.trailing_zeros().unwrap_or(0));
            return BigRational::new_raw(self.num >> shift, self.den >> shift);
        }
        BigRational::new(self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn rational_sum_matches_naive_addition() {
        let terms = ["1/8", "-3/32", "5/6", "7/1024", "-1/3", "2", "11/12", "1/8"].map(q);
        let mut acc = RationalSum::new();
        let mut naive = BigRational::zero();
        for t in &terms {
            acc.add(t);
            naive += t;
        }
        assert_eq!(acc.finish(), naive);
        let mut acc = RationalSum::new();
        for t in ["1/4", "1/4", "1/2"].map(q) {
            acc.add(&t);
        }
        assert_eq!(acc.finish(), BigRational::one());
        assert_eq!(RationalSum::new().finish(), BigRational::zero());
    }

    #[test]
    fn parses_fraction_integer_and_decimal_forms() {
        assert_eq!(q("3/6"), BigRational::new(1.into(), 2.into()));
        assert_eq!(q("-7"), BigRational::from_integer((-7).into()));
        assert_eq!(q("0.125"), BigRational::new(1.into(), 8.into()));
        assert_eq!(q("1e-3"), BigRational::new(1.into(), 1000.into()));
        assert_eq!(q("-2.5E1"), BigRational::from_integer((-25).into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn density_display_and_serde() {
        let d = Density::new(5, 10);
        assert_eq!(d.to_string(), "1/2");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "\"1/2\"");
        let back: Density = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert_eq!(Density::new(7, 7).to_string(), "1");
    }

    #[test]
    fn sqrt_two_enclosure_is_certified_and_tight() {
        let e = root_enclosure(&q("2"), 2);
        assert!(e.lo <= std::f64::consts::SQRT_2 && std::f64::consts::SQRT_2 <= e.hi);
        assert!(e.width() < 1e-15);
        assert!(exact(e.lo) * exact(e.lo) <= q("2"));
        assert!(exact(e.hi) * exact(e.hi) >= q("2"));
    }

    #[test]
    fn enclosure_of_tiny_rational_does_not_collapse_above() {
        let tiny = BigRational::new(1.into(), Pow::pow(&BigInt::from(2), 5000u32));
        let e = root_enclosure(&tiny, 2);
        assert_eq!(e.lo, 0.0);
        assert!(e.hi > 0.0);
        assert!(exact(e.hi) * exact(e.hi) >= tiny);
    }

    #[test]
    fn ln_abs_survives_huge_values() {
        let big = BigRational::from_integer(Pow::pow(&BigInt::from(2), 4000u32));
        let l = ln_abs(&big);
        assert!((l - 4000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        let inv = big.recip();
        assert!((ln_abs(&inv) + 4000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
