//! Block construction of a vector `y` whose recurrence set to `U_m` contains a
//! prescribed scaffold.
//!
//! A scaffold is a family of blocks `E^(1), E^(2), …` (block `k` has `k`
//! elements) cut from a piecewise syndetic set, all elements more than `m`
//! apart. Given a target `z` supported on `[0, m]`, the vector
//!
//! ```text
//! y_{l + r} = z_r / ∏_{i=1}^{l} w_{i+r},   l in the scaffold, 0 ≤ r ≤ m
//! ```
//!
//! satisfies `(B^l y)_r = z_r`, and the remaining coordinates of `B^l y − z`
//! come from scaffold elements to the right of `l`. Those are small when the
//! per-block sums checked by [`check_giotto`] are small.
//!
//! Selecting blocks inside the thickly syndetic sets that syndetic
//! transitivity would provide is not finitely checkable, so
//! [`scaffold_from_ps`] searches the window directly and the checks below
//! verify the consequences on that window only. Blocks past the window, and
//! everything the asymptotic block choice guarantees beyond it, are not
//! asserted.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lemmacheck::{check_density_gap, DensityGapReport};
use crate::rational::{Enclosure, Rational};
use crate::setcalc::{materialize, GeneratorSpec, WindowedSet};
use crate::shiftop::{
    apply_power_exact, compare_norm, norm_exact, recurrence_set, ExactVector, Mode, RecurrenceResult,
    SpaceSpec, WeightSequence, WeightSpec,
};
use crate::structure::{ps_certificate, StructureCertificate, Witness};

/// One element `z(m)` of the dense sequence with its ball `U_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub m: usize,
    pub index: usize,
    pub z: ExactVector,
    pub radius: Rational,
}

impl TargetSpec {
    pub fn new(m: usize, z: ExactVector) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("targets need m ≥ 1"));
        }
        let bound = BigRational::from_integer(m.into());
        for (k, v) in z.iter() {
            if k > m {
                return Err(Error::param(format!("target coordinate {k} outside [0, {m}]")));
            }
            if num_traits::Signed::abs(v) > bound {
                return Err(Error::param(format!("target coordinate {k} exceeds {m} in size")));
            }
        }
        Ok(TargetSpec {
            m,
            index: usize::MAX,
            z,
            radius: Rational(BigRational::new(1.into(), m.into())),
        })
    }
}

/// Digit `δ` of a level-`d` coordinate encodes the numerator
/// `0, +1, −1, +2, −2, …` over `2^d`.
fn digit_value(delta: u128) -> i128 {
    if delta == 0 {
        0
    } else if delta % 2 == 1 {
        delta.div_ceil(2) as i128
    } else {
        -((delta / 2) as i128)
    }
}

/// Digits already present one level down: their numerator is even.
fn digit_is_old(delta: u128) -> bool {
    delta.div_ceil(2).is_multiple_of(2)
}

fn pow_sat(base: u128, exp: usize) -> u128 {
    let mut acc = 1u128;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// The `index`-th target of a fixed enumeration of dyadic vectors on
/// `[0, m]` with coordinates of size at most `m`.
///
/// Level `d` holds the vectors with coordinates in `2^{−d} Z`; levels are
/// listed in increasing `d`, each skipping the vectors of level `d − 1`.
/// Within a level, coordinate `c` takes digits `0, 1, …` standing for the
/// numerators `0, +1, −1, +2, −2, …`, and vectors are ordered as mixed-radix
/// numbers with coordinate 0 least significant. Index 0 is the zero vector,
/// and every dyadic vector in the box turns up eventually, so the sequence
/// is dense in it.
pub fn dense_targets(m: usize, index: usize) -> Result<TargetSpec> {
    if m == 0 {
        return Err(Error::param("targets need m ≥ 1"));
    }
    let dim = m + 1;
    let mut rest = index as u128;
    let mut d = 0u32;
    let mut prev_total = 0u128;
    let (level, radix, old) = loop {
        let radix = 2 * (m as u128) * (1u128 << d) + 1;
        let total = pow_sat(radix, dim);
        let fresh = total.saturating_sub(prev_total);
        if rest < fresh {
            break (d, radix, if d == 0 { 0 } else { (m as u128) * (1u128 << d) + 1 });
        }
        rest -= fresh;
        prev_total = total;
        d += 1;
        if d > 100 {
            return Err(Error::param("target index too large"));
        }
    };

    let mut digits = vec![0u128; dim];
    let mut has_new = level == 0;
    for c in (0..dim).rev() {
        let all = pow_sat(radix, c);
        let all_old = pow_sat(old, c);
        let mut delta = 0u128;
        loop {
            let completions = if has_new || !digit_is_old(delta) { all } else { all - all_old };
            if rest < completions {
                break;
            }
            rest -= completions;
            delta += 1;
        }
        digits[c] = delta;
        has_new |= !digit_is_old(delta);
    }

    let den = BigInt::from(1u64) << level;
    let z = ExactVector::from_coords(
        digits
            .iter()
            .enumerate()
            .map(|(c, &delta)| (c, BigRational::new(BigInt::from(digit_value(delta)), den.clone()))),
    );
    let mut t = TargetSpec::new(m, z)?;
    t.index = index;
    Ok(t)
}

/// Blocks `E^(1), E^(2), …` with the piecewise syndetic bound of their union.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scaffold {
    pub blocks: Vec<Vec<usize>>,
    pub b: usize,
    pub separation: usize,
}

impl Scaffold {
    /// All elements in increasing order.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn union_set(&self, window_end: usize) -> Result<WindowedSet> {
        WindowedSet::new(window_end, self.union())
    }

    pub fn max_element(&self) -> Option<usize> {
        self.blocks.iter().flatten().copied().max()
    }

    /// Block index and position of `l`.
    pub fn locate(&self, l: usize) -> Option<(usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .find_map(|(k, blk)| blk.binary_search(&l).ok().map(|j| (k, j)))
    }

    /// Block sizes `1, 2, …`, increasing elements, pairwise gaps `> separation`.
    pub fn validate(&self) -> Result<(), String> {
        for (k, blk) in self.blocks.iter().enumerate() {
            if blk.len() != k + 1 {
                return Err(format!("block {} has {} elements", k + 1, blk.len()));
            }
        }
        let all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        for pair in all.windows(2) {
            if pair[1] <= pair[0] + self.separation {
                return Err(format!(
                    "elements {} and {} are not more than {} apart",
                    pair[0], pair[1], self.separation
                ));
            }
        }
        Ok(())
    }
}

/// Cuts a scaffold out of a piecewise syndetic `E`.
///
/// `E` is thinned left to right, keeping an element only when it lies more
/// than `m` past the last kept one. Blocks of sizes `1, …, k_max` are then
/// filled from consecutive kept elements that stay inside one covered run
/// (consecutive gaps at most `(m + 1)(b + 1)`), leaving at least
/// `block_gap` between one block's last element and the next block's
/// first. The union must still be piecewise syndetic at some
/// `b′ ≤ (m + 1)(b + 1)` with the certificate's run length.
pub fn scaffold_from_ps(
    e: &WindowedSet,
    cert: &StructureCertificate,
    m: usize,
    k_max: usize,
    block_gap: usize,
) -> Result<Scaffold> {
    let Some(Witness::PiecewiseSyndetic { b, length, .. }) = cert.witness() else {
        return Err(Error::param("scaffold needs a piecewise syndetic certificate"));
    };
    cert.revalidate(e)
        .map_err(|msg| Error::param(format!("certificate does not hold for E: {msg}")))?;
    if k_max == 0 {
        return Err(Error::param("k_max must be ≥ 1"));
    }
    let (b, length) = (*b, *length);
    let reach = (m + 1) * (b + 1);

    let mut kept: Vec<usize> = Vec::new();
    for &x in e.elements() {
        if kept.last().is_none_or(|&last| x - last > m) {
            kept.push(x);
        }
    }

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut prev_end: Option<usize> = None;
    for &x in &kept {
        if blocks.len() == k_max {
            break;
        }
        if let Some(&last) = current.last() {
            if x - last > reach {
                current.clear();
            }
        }
        if current.is_empty() {
            if let Some(end) = prev_end {
                if x - end < block_gap.max(m + 1) {
                    continue;
                }
            }
        }
        current.push(x);
        if current.len() == blocks.len() + 1 {
            prev_end = Some(x);
            blocks.push(std::mem::take(&mut current));
        }
    }
    if blocks.is_empty() {
        return Err(Error::Construction("no block could be formed from E".into()));
    }

    let union = WindowedSet::new(e.window_end(), blocks.iter().flatten().copied())?;
    let recert = ps_certificate(&union, reach, length)?;
    let b_prime = match recert.witness() {
        Some(Witness::PiecewiseSyndetic { b, .. }) => *b,
        _ => {
            return Err(Error::Construction(format!(
                "thinned union of {} blocks ({} elements) is not piecewise syndetic with b ≤ {reach}, \
                 L = {length}: {}",
                blocks.len(),
                union.len(),
                recert.summary()
            )))
        }
    };
    Ok(Scaffold {
        blocks,
        b: b_prime,
        separation: m,
    })
}

/// `y_{l + r} = z_r / ∏_{i=1}^{l} w_{i+r}` over the scaffold.
pub fn construct_y(w: &WeightSequence, scaffold: &Scaffold, target: &TargetSpec) -> Result<ExactVector> {
    if scaffold.separation < target.m {
        return Err(Error::param(format!(
            "scaffold separation {} is below m = {}",
            scaffold.separation, target.m
        )));
    }
    let mut y = ExactVector::zero();
    for l in scaffold.union() {
        for (r, zr) in target.z.iter() {
            y.set(l + r, zr / w.product_exact(r, l)?);
        }
    }
    Ok(y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipPoint {
    pub l: usize,
    pub distance: Enclosure,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub radius: Rational,
    pub space: SpaceSpec,
    pub points: Vec<MembershipPoint>,
    pub failing: Vec<usize>,
    pub all_within: bool,
}

/// Exact `‖B^l y − z‖ ≤ 1/m` for every scaffold element `l`.
pub fn verify_membership(
    w: &WeightSequence,
    y: &ExactVector,
    scaffold: &Scaffold,
    target: &TargetSpec,
    space: &SpaceSpec,
) -> Result<MembershipReport> {
    let radius = target.radius.inner();
    let points: Vec<MembershipPoint> = scaffold
        .union()
        .into_par_iter()
        .map(|l| {
            let diff = apply_power_exact(w, y, l)?.sub(&target.z);
            let norm = norm_exact(&diff, space)?;
            let order = match norm.cmp_exact(radius) {
                Some(o) => o,
                None => compare_norm(&diff, space, radius)?,
            };
            Ok(MembershipPoint {
                l,
                distance: norm.enclosure,
                within: order != Ordering::Greater,
            })
        })
        .collect::<Result<_>>()?;
    let failing: Vec<usize> = points.iter().filter(|p| !p.within).map(|p| p.l).collect();
    Ok(MembershipReport {
        radius: target.radius.clone(),
        space: space.clone(),
        all_within: failing.is_empty(),
        failing,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiottoBlock {
    pub k: usize,
    /// Element `s` attaining the maximum, with that norm.
    pub argmax: Option<usize>,
    pub max_norm: Enclosure,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiottoReport {
    pub bound: Rational,
    pub space: SpaceSpec,
    pub blocks: Vec<GiottoBlock>,
    pub all_pass: bool,
}

/// `Σ_{t∈E, t>s} Σ_{r=0}^{m} (1/∏_{ν=1+r}^{t−s+r} w_ν) e_{t−s+r}`.
fn forward_sum(w: &WeightSequence, later: &[usize], s: usize, m: usize, coeff: impl Fn(usize) -> BigRational) -> Result<ExactVector> {
    let mut v = ExactVector::zero();
    for &t in later {
        for r in 0..=m {
            let c = coeff(r);
            if c.is_zero() {
                continue;
            }
            v.add_at(t - s + r, &(c / w.product_exact(r, t - s)?));
        }
    }
    Ok(v)
}

/// Per block `E^(k)`: `max_s ‖Σ_{t∈E^(k), t>s} Σ_{r≤m} (1/∏_{ν=1+r}^{t−s+r} w_ν) e_{t−s+r}‖ < 1/(2m²)`.
pub fn check_giotto(w: &WeightSequence, scaffold: &Scaffold, m: usize, space: &SpaceSpec) -> Result<GiottoReport> {
    if m == 0 {
        return Err(Error::param("giotto bound needs m ≥ 1"));
    }
    let bound = BigRational::new(1.into(), (2 * m * m).into());
    let blocks: Vec<GiottoBlock> = scaffold
        .blocks
        .par_iter()
        .enumerate()
        .map(|(k, blk)| {
            let mut best: Option<(usize, ExactVector)> = None;
            for (j, &s) in blk.iter().enumerate() {
                let v = forward_sum(w, &blk[j + 1..], s, m, |_| BigRational::one())?;
                let better = match &best {
                    None => true,
                    Some((_, bv)) => norm_cmp(&v, bv, space)? == Ordering::Greater,
                };
                if better {
                    best = Some((s, v));
                }
            }
            let (argmax, v) = best.map_or((None, ExactVector::zero()), |(s, v)| (Some(s), v));
            Ok(GiottoBlock {
                k: k + 1,
                argmax,
                max_norm: norm_exact(&v, space)?.enclosure,
                passes: compare_norm(&v, space, &bound)? == Ordering::Less,
            })
        })
        .collect::<Result<_>>()?;
    Ok(GiottoReport {
        bound: Rational(bound),
        space: space.clone(),
        all_pass: blocks.iter().all(|b| b.passes),
        blocks,
    })
}

/// Orders two norms, exactly when the space allows it.
fn norm_cmp(a: &ExactVector, b: &ExactVector, space: &SpaceSpec) -> Result<Ordering> {
    match space.integer_power() {
        Some(_) => {
            let pa = norm_exact(a, space)?.power.expect("integer power").into_inner();
            let pb = norm_exact(b, space)?.power.expect("integer power").into_inner();
            Ok(pa.cmp(&pb))
        }
        None => {
            let (ea, eb) = (norm_exact(a, space)?.enclosure, norm_exact(b, space)?.enclosure);
            Ok(ea.mid().partial_cmp(&eb.mid()).unwrap_or(Ordering::Equal))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    pub l: usize,
    /// Later elements of the block holding `l`.
    pub head: Enclosure,
    /// Elements of later blocks.
    pub tail: Enclosure,
    /// `‖B^l y − z‖` from a direct evaluation.
    pub total: Enclosure,
    /// `B^l y − z` equals head plus tail coordinate by coordinate.
    pub split_exact: bool,
    pub triangle: bool,
    /// `‖head‖ ≤ 1/(2m)`, asserted only when the block passed the giotto check.
    pub head_bound: Option<bool>,
}

/// Splits `B^l y − z` into the same-block head and the later-block tail.
pub fn error_decomposition(
    w: &WeightSequence,
    y: &ExactVector,
    scaffold: &Scaffold,
    target: &TargetSpec,
    l: usize,
    space: &SpaceSpec,
    giotto: Option<&GiottoReport>,
) -> Result<ErrorDecomposition> {
    let (k, j) = scaffold
        .locate(l)
        .ok_or_else(|| Error::param(format!("{l} is not a scaffold element")))?;
    let m = target.m;
    let z = |r: usize| target.z.get(r).cloned().unwrap_or_else(BigRational::zero);
    let head = forward_sum(w, &scaffold.blocks[k][j + 1..], l, m, z)?;
    let later: Vec<usize> = scaffold.blocks[k + 1..].iter().flatten().copied().collect();
    let tail = forward_sum(w, &later, l, m, z)?;
    let direct = apply_power_exact(w, y, l)?.sub(&target.z);

    let mut sum = head.clone();
    for (i, v) in tail.iter() {
        sum.add_at(i, v);
    }
    let (hn, tn, dn) = (norm_exact(&head, space)?, norm_exact(&tail, space)?, norm_exact(&direct, space)?);
    let head_bound = match giotto.and_then(|g| g.blocks.get(k)) {
        Some(g) if g.passes => {
            let half = BigRational::new(1.into(), (2 * m).into());
            Some(compare_norm(&head, space, &half)? != Ordering::Greater)
        }
        _ => None,
    };
    Ok(ErrorDecomposition {
        l,
        split_exact: sum == direct,
        triangle: dn.enclosure.lo <= hn.enclosure.hi + tn.enclosure.hi,
        head: hn.enclosure,
        tail: tn.enclosure,
        total: dn.enclosure,
        head_bound,
    })
}

/// Parameters of the full construction: materialize `E`, certify it,
/// cut a scaffold, build `y`, verify, and scan `N(y, U_m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub weights: WeightSpec,
    pub m: usize,
    pub window_end: usize,
    pub space: SpaceSpec,
    /// The piecewise syndetic source; multiples of `2m` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<GeneratorSpec>,
    pub k_max: usize,
    /// Minimum distance between consecutive blocks; `⌈√W⌉ + 1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_gap: Option<usize>,
    pub length: usize,
    pub b_max: usize,
    /// Dense-sequence index; when absent, the first target with
    /// `‖z‖ > 1/m`, so that `0 ∉ U_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_index: Option<usize>,
}

impl PipelineConfig {
    pub fn new(weights: WeightSpec, m: usize, window_end: usize) -> Self {
        PipelineConfig {
            weights,
            m,
            window_end,
            space: SpaceSpec::lp(2),
            source: None,
            k_max: 40,
            block_gap: None,
            length: 64,
            b_max: 64,
            target_index: None,
        }
    }

    pub fn source_generator(&self) -> GeneratorSpec {
        self.source
            .clone()
            .unwrap_or_else(|| GeneratorSpec::periodic(2 * self.m, [0]))
    }

    pub fn block_gap(&self) -> usize {
        self.block_gap
            .unwrap_or_else(|| (self.window_end as f64).sqrt().ceil() as usize + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub source_certificate: StructureCertificate,
    pub scaffold: Scaffold,
    pub target: TargetSpec,
    pub y: ExactVector,
    pub giotto: GiottoReport,
    pub membership: MembershipReport,
    pub recurrence: RecurrenceResult,
    /// `scaffold ⊆ N(y, U_m)`.
    pub contains_scaffold: bool,
    pub recurrence_certificate: StructureCertificate,
    pub density_gap: DensityGapReport,
    pub caveat: String,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.giotto.all_pass
            && self.membership.all_within
            && self.contains_scaffold
            && self.recurrence_certificate.is_certified()
    }
}

const DEFAULT_TARGET_SEARCH: usize = 100_000;

/// First target whose norm exceeds the radius `1/m`.
fn default_target(m: usize, space: &SpaceSpec) -> Result<TargetSpec> {
    let bar = BigRational::new(1.into(), m.into());
    for index in 0..DEFAULT_TARGET_SEARCH {
        let t = dense_targets(m, index)?;
        if compare_norm(&t.z, space, &bar)? == Ordering::Greater {
            return Ok(t);
        }
    }
    Err(Error::Construction(format!(
        "no target among the first {DEFAULT_TARGET_SEARCH} has norm above 1/{m} in {space}; set target_index"
    )))
}

pub fn construct_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    let (m, big_w) = (config.m, config.window_end);
    let e = materialize(&config.source_generator(), big_w)?;
    let source_certificate = ps_certificate(&e, config.b_max, config.length)?;
    if !source_certificate.is_certified() {
        return Err(Error::Construction(format!(
            "source set is not piecewise syndetic: {}",
            source_certificate.summary()
        )));
    }
    let scaffold = scaffold_from_ps(&e, &source_certificate, m, config.k_max, config.block_gap())?;
    let w = WeightSequence::from_spec(&config.weights, big_w + m + 1)?;
    let target = match config.target_index {
        Some(i) => dense_targets(m, i)?,
        None => default_target(m, &config.space)?,
    };
    let y = construct_y(&w, &scaffold, &target)?;
    let giotto = check_giotto(&w, &scaffold, m, &config.space)?;
    let membership = verify_membership(&w, &y, &scaffold, &target, &config.space)?;
    let recurrence = recurrence_set(
        &w,
        &y,
        &target.z,
        target.radius.inner(),
        &config.space,
        big_w,
        Mode::Exact,
    )?;
    let contains_scaffold = scaffold.union().iter().all(|&l| recurrence.returns.contains(l));
    let recurrence_certificate = ps_certificate(&recurrence.returns, scaffold.b.max(1), config.length)?;
    let unit = big_w / 16;
    let density_gap = check_density_gap(&recurrence.returns, unit, unit, Some(&scaffold))?;
    Ok(PipelineReport {
        config: config.clone(),
        source_certificate,
        scaffold,
        target,
        y,
        giotto,
        membership,
        recurrence,
        contains_scaffold,
        recurrence_certificate,
        density_gap,
        caveat: format!(
            "verified on [0, {big_w}] only; blocks beyond the window and the asymptotic block \
             selection are not checked"
        ),
    })
}
