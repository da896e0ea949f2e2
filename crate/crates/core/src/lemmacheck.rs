//! Seeded harnesses that test the combinatorial lemmas on generated sets.
//!
//! Each lemma is a conditional, so every instance first has its hypothesis
//! certified on the window; instances that fail it are skipped and counted,
//! never scored as passes. A master seed drives a ChaCha8 stream from which
//! one seed per instance is drawn in order, so a failure replays from its
//! recorded seed and a whole report replays from the master seed.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hcvec::Scaffold;
use crate::rational::{Density, Rational};
use crate::setcalc::{density_report, lower_upper, materialize, GeneratorSpec, Schedule, WindowedSet};
use crate::shiftop::{
    certify_disjoint, recurrence_set, ExactVector, Mode, SpaceSpec, WeightRule, WeightSequence,
};
use crate::structure::{ps_certificate, syndetic_bound, StructureCertificate};

/// Give up generating after this many attempts per requested instance.
const ATTEMPTS_PER_INSTANCE: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub generator: GeneratorSpec,
    pub seed: u64,
    pub diagnostic: String,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct HarnessParameters {
    pub window_end: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<Rational>,
}

/// `passes + failures.len() == instances`; `skipped` counts generated sets
/// whose hypothesis could not be certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub instances: usize,
    pub passes: usize,
    pub skipped: usize,
    pub failures: Vec<Failure>,
    pub parameters: HarnessParameters,
}

impl HarnessReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passes == self.instances
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

/// Runs `eval` on generated instances, in seed order, until `instances` of
/// them met the hypothesis.
fn run_harness(
    instances: usize,
    parameters: HarnessParameters,
    generate: impl Fn(u64) -> GeneratorSpec + Sync,
    eval: impl Fn(&GeneratorSpec) -> Result<Outcome> + Sync,
) -> Result<HarnessReport> {
    let mut master = ChaCha8Rng::seed_from_u64(parameters.seed);
    let mut evaluated: Vec<(GeneratorSpec, u64, Outcome)> = Vec::new();
    let mut skipped = 0;
    let mut attempts = 0;
    let cap = instances.saturating_mul(ATTEMPTS_PER_INSTANCE).max(1);
    while evaluated.len() < instances && attempts < cap {
        let need = (instances - evaluated.len()).min(cap - attempts);
        let seeds: Vec<u64> = (0..need).map(|_| master.next_u64()).collect();
        attempts += need;
        let batch: Vec<(GeneratorSpec, u64, Outcome)> = seeds
            .into_par_iter()
            .map(|s| {
                let g = generate(s);
                let o = eval(&g)?;
                Ok((g, s, o))
            })
            .collect::<Result<_>>()?;
        for item in batch {
            match item.2 {
                Outcome::Skip(_) => skipped += 1,
                _ if evaluated.len() < instances => evaluated.push(item),
                _ => {}
            }
        }
    }
    let passes = evaluated.iter().filter(|e| e.2 == Outcome::Pass).count();
    let failures = evaluated
        .into_iter()
        .filter_map(|(generator, seed, o)| match o {
            Outcome::Fail(diagnostic) => Some(Failure {
                generator,
                seed,
                diagnostic,
            }),
            _ => None,
        })
        .collect::<Vec<_>>();
    Ok(HarnessReport {
        instances: passes + failures.len(),
        passes,
        skipped,
        failures,
        parameters,
    })
}

/// Hypothesis: `A^c` is 2-syndetic and the Banach estimate is at least `δ`.
/// Conclusion checked: `A` is piecewise syndetic with `b ≤ b_max` at run
/// length `L`.
pub fn two_syndetic_instance(a: &WindowedSet, delta: &BigRational, b_max: usize, length: usize) -> Result<Outcome> {
    let comp = a.complement();
    if comp.is_empty() || !syndetic_bound(&comp, 2).is_certified() {
        return Ok(Outcome::Skip("complement is not 2-syndetic on the window".into()));
    }
    let banach = a.default_report().banach_estimate;
    if banach.cmp_big(delta) == Ordering::Less {
        return Ok(Outcome::Skip(format!("Banach estimate {banach} below δ")));
    }
    let cert = ps_certificate(a, b_max, length)?;
    Ok(if cert.is_certified() {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("Banach estimate {banach}, but {}", cert.summary()))
    })
}

/// Sets without three consecutive members, from a seeded Bernoulli stream
/// with `ρ ∈ [0.15, 0.85)`.
pub fn runless_pattern(seed: u64) -> GeneratorSpec {
    let rho = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).random_range(0.15..0.85);
    GeneratorSpec::MaxRun {
        inner: Box::new(GeneratorSpec::Bernoulli { rho, seed }),
        max_run: 2,
    }
}

pub fn check_two_syndetic_lemma(
    instances: usize,
    window_end: usize,
    delta: &BigRational,
    b_max: usize,
    length: usize,
    seed: u64,
) -> Result<HarnessReport> {
    if !delta.is_positive() {
        return Err(Error::param("δ must be positive"));
    }
    let parameters = HarnessParameters {
        window_end,
        seed,
        b_max: Some(b_max),
        length: Some(length),
        delta: Some(Rational(delta.clone())),
        tol: None,
    };
    run_harness(instances, parameters, runless_pattern, |g| {
        two_syndetic_instance(&materialize(g, window_end)?, delta, b_max, length)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HindmanOutcome {
    pub alpha: Density,
    pub gamma: Density,
    /// Least `b` with `upper(∪_{t=1}^{b} A − t) ≥ α/γ − tol`.
    pub witness_b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_at_witness: Option<Density>,
}

/// Upper estimate of `∪_{t=1}^{b} (A − t)` on its window `[0, W − b]`, over
/// `n ≥ n₀`.
pub fn shifted_union_upper(a: &WindowedSet, b: usize, n0: usize) -> Result<Density> {
    let u = a.union_of_shifts(1, b)?;
    Ok(lower_upper(&u, n0.min(u.window_end()))?.1)
}

/// Sweeps `b ∈ [1, b_max]` for the union inequality with windowed `α`
/// (lower estimate) and `γ` (Banach estimate) from the default schedule.
pub fn hindman_sweep(a: &WindowedSet, b_max: usize, tol: &BigRational) -> Result<HindmanOutcome> {
    let report = a.default_report();
    let (alpha, gamma) = (report.lower_estimate, report.banach_estimate);
    let mut out = HindmanOutcome {
        alpha,
        gamma,
        witness_b: None,
        upper_at_witness: None,
    };
    if alpha == Density::zero() {
        return Ok(out);
    }
    let target = alpha.to_big() / gamma.to_big() - tol;
    let n0 = report.schedule.n0;
    for b in 1..=b_max.min(a.window_end()) {
        let up = shifted_union_upper(a, b, n0)?;
        if up.cmp_big(&target) != Ordering::Less {
            out.witness_b = Some(b);
            out.upper_at_witness = Some(up);
            break;
        }
    }
    Ok(out)
}

/// Hypothesis: piecewise syndetic with `b ≤ b_max` at `L = W/16`, and a
/// positive lower estimate.
pub fn hindman_instance(a: &WindowedSet, b_max: usize, tol: &BigRational) -> Result<Outcome> {
    let length = a.window_end() / 16;
    if !ps_certificate(a, b_max, length)?.is_certified() {
        return Ok(Outcome::Skip("not piecewise syndetic within bounds".into()));
    }
    let r = hindman_sweep(a, b_max, tol)?;
    if r.alpha == Density::zero() {
        return Ok(Outcome::Skip("lower estimate is 0".into()));
    }
    Ok(match r.witness_b {
        Some(_) => Outcome::Pass,
        None => Outcome::Fail(format!(
            "α = {}, γ = {}: no b ≤ {b_max} reaches α/γ − tol",
            r.alpha, r.gamma
        )),
    })
}

/// Block trains, periodic sets and Bernoulli sets in rotation.
pub fn ps_candidate(seed: u64) -> GeneratorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match seed % 3 {
        0 => GeneratorSpec::BlockTrain {
            length: rng.random_range(1..=24),
            gap: rng.random_range(1..=48),
            offset: rng.random_range(0..64),
        },
        1 => {
            let q = rng.random_range(2..=24usize);
            let mut residues: Vec<usize> = (0..q).filter(|_| rng.random_bool(0.4)).collect();
            if residues.is_empty() {
                residues.push(rng.random_range(0..q));
            }
            GeneratorSpec::Periodic { q, residues }
        }
        _ => GeneratorSpec::Bernoulli {
            rho: rng.random_range(0.2..0.9),
            seed: rng.next_u64(),
        },
    }
}

pub fn check_hindman_inequality(
    instances: usize,
    window_end: usize,
    b_max: usize,
    tol: &BigRational,
    seed: u64,
) -> Result<HarnessReport> {
    if tol.is_negative() {
        return Err(Error::param("tol must be ≥ 0"));
    }
    let parameters = HarnessParameters {
        window_end,
        seed,
        b_max: Some(b_max),
        length: Some(window_end / 16),
        delta: None,
        tol: Some(Rational(tol.clone())),
    };
    run_harness(instances, parameters, ps_candidate, |g| {
        hindman_instance(&materialize(g, window_end)?, b_max, tol)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGapReport {
    pub lower: Density,
    pub banach: Density,
    /// `banach − lower`.
    pub gap: Rational,
    pub schedule: Schedule,
    /// Longest run in the scaffold's complement, when a scaffold is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_run: Option<usize>,
    pub required_run: usize,
    /// The strict gap is asserted only when the scaffold's complement keeps a
    /// run of at least `⌈√W⌉`.
    pub asserted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
}

pub fn check_density_gap(a: &WindowedSet, n0: usize, ell: usize, scaffold: Option<&Scaffold>) -> Result<DensityGapReport> {
    let r = density_report(a, n0, &[ell])?;
    let big_w = a.window_end();
    let required_run = (big_w as f64).sqrt().ceil() as usize;
    let complement_run = match scaffold {
        Some(s) => {
            let comp = s.union_set(big_w)?.complement();
            Some(comp.runs().iter().map(|(s, e)| e - s + 1).max().unwrap_or(0))
        }
        None => None,
    };
    let asserted = complement_run.is_some_and(|run| run >= required_run);
    Ok(DensityGapReport {
        gap: Rational(r.banach_estimate.to_big() - r.lower_estimate.to_big()),
        holds: asserted.then_some(r.lower_estimate < r.banach_estimate),
        lower: r.lower_estimate,
        banach: r.banach_estimate,
        schedule: r.schedule,
        complement_run,
        required_run,
        asserted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsecutiveReport {
    pub status: CheckStatus,
    pub disjointness_certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub returns: Option<WindowedSet>,
    /// First `n` with both `n` and `n + 1` returning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_pair: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_certificate: Option<StructureCertificate>,
}

/// When `B(U) ∩ U = ∅` is certified, no two consecutive `n` can both return
/// to `U`; the recurrence set is scanned for such a pair.
pub fn check_consecutive_free(
    w: &WeightSequence,
    x: &ExactVector,
    z: &ExactVector,
    eps: &BigRational,
    space: &SpaceSpec,
    window_end: usize,
) -> Result<ConsecutiveReport> {
    if !certify_disjoint(w, z, eps, space)? {
        return Ok(ConsecutiveReport {
            status: CheckStatus::Inconclusive,
            disjointness_certified: false,
            returns: None,
            first_pair: None,
            complement_certificate: None,
        });
    }
    let r = recurrence_set(w, x, z, eps, space, window_end, Mode::Exact)?;
    let first_pair = r.returns.elements().windows(2).find(|p| p[1] == p[0] + 1).map(|p| p[0]);
    let comp = r.returns.complement();
    let complement_certificate = (!comp.is_empty()).then(|| syndetic_bound(&comp, 2));
    Ok(ConsecutiveReport {
        status: if first_pair.is_none() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        disjointness_certified: true,
        returns: Some(r.returns),
        first_pair,
        complement_certificate,
    })
}

/// A fuzzed orbit instance for the consecutive-return check.
#[derive(Clone, Debug)]
pub struct OrbitInstance {
    pub weights: WeightSequence,
    pub x: ExactVector,
    pub z: ExactVector,
    pub eps: BigRational,
}

/// Weights `c ∈ {5/4, 3/2, 2, 5/2, 3}` or `(n+1)/n`; a target on `[0, 3]`
/// with coordinates `±p/4`; `x` planted so that `B^{n_i} x ≈ z` along random
/// `n_i`, some of them adjacent. The radius is the largest of
/// `1/10, 1/20, …` that certifies disjointness; `None` when none does.
pub fn orbit_instance(seed: u64, window_end: usize) -> Result<Option<OrbitInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = window_end + 8;
    let weights = match rng.random_range(0..6) {
        5 => WeightSequence::new(WeightRule::Telescoping, None, horizon)?,
        i => {
            let c = [(5, 4), (3, 2), (2, 1), (5, 2), (3, 1)][i];
            WeightSequence::constant(BigRational::new(c.0.into(), c.1.into()), horizon)?
        }
    };
    let mut z = ExactVector::zero();
    for k in 0..=3 {
        if rng.random_bool(0.6) {
            let num: i64 = rng.random_range(1..=8) * if rng.random_bool(0.5) { 1 } else { -1 };
            z.set(k, BigRational::new(num.into(), 4.into()));
        }
    }
    if z.is_zero() {
        z.set(0, BigRational::from_integer(1.into()));
    }
    let space = SpaceSpec::lp(2);
    let mut eps = None;
    for den in [10, 20, 50, 100, 200, 500, 1000] {
        let e = BigRational::new(1.into(), den.into());
        if certify_disjoint(&weights, &z, &e, &space)? {
            eps = Some(e);
            break;
        }
    }
    let Some(eps) = eps else { return Ok(None) };

    let mut x = ExactVector::zero();
    let mut n = rng.random_range(0..200usize);
    let top = window_end.saturating_sub(4);
    while n <= top {
        for (r, zr) in z.iter() {
            let c = zr / weights.product_exact(r, n)?;
            x.add_at(n + r, &c);
        }
        n += if rng.random_bool(0.3) { 1 } else { rng.random_range(2..600) };
    }
    Ok(Some(OrbitInstance { weights, x, z, eps }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsecutiveFuzzReport {
    pub instances: usize,
    pub passes: usize,
    pub skipped: usize,
    /// Seeds whose recurrence set held two consecutive integers.
    pub failures: Vec<(u64, usize)>,
    /// Total returns seen over all instances.
    pub returns: usize,
    pub window_end: usize,
    pub seed: u64,
}

pub fn check_consecutive_fuzz(instances: usize, window_end: usize, seed: u64) -> Result<ConsecutiveFuzzReport> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConsecutiveFuzzReport {
        instances: 0,
        passes: 0,
        skipped: 0,
        failures: Vec::new(),
        returns: 0,
        window_end,
        seed,
    };
    let mut attempts = 0;
    while report.instances < instances && attempts < instances * ATTEMPTS_PER_INSTANCE {
        attempts += 1;
        let s = master.next_u64();
        let Some(inst) = orbit_instance(s, window_end)? else {
            report.skipped += 1;
            continue;
        };
        let r = check_consecutive_free(&inst.weights, &inst.x, &inst.z, &inst.eps, &SpaceSpec::lp(2), window_end)?;
        report.instances += 1;
        report.returns += r.returns.as_ref().map_or(0, |s| s.len());
        match (r.status, r.first_pair) {
            (CheckStatus::Pass, _) => report.passes += 1,
            (_, Some(n)) => report.failures.push((s, n)),
            (_, None) => report.failures.push((s, usize::MAX)),
        }
    }
    Ok(report)
}
