//! Syndeticity detectors with re-checkable certificates.
//!
//! The workhorse is the covered set `C_b = {n ∈ [0, W − b] : ∃ t ∈ [0, b],
//! n + t ∈ A}`. Its runs are computed straight from the element list as the
//! merge of the intervals `[a − b, a]`, so one pass over `A` per `b`.
//!
//! A piecewise syndetic witness is a single run of `C_b` of length `L + 1`;
//! every shorter interval required by the definition sits inside it. The
//! half-open intervals `(z, z + i]` of the definition are read as the closed
//! `[z + 1, z + i]`.
//!
//! Refutations only ever say "nothing found within these bounds".

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{Density, Rational};
use crate::setcalc::{density_report, Schedule, WindowedSet};

/// Density family used by the `PS^F` detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lower,
    Upper,
    Banach,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Family::Lower),
            "upper" => Ok(Family::Upper),
            "banach" => Ok(Family::Banach),
            other => Err(Error::Parse(format!("unknown density family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBound {
    pub ell: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Every `n ∈ [0, W − b]` meets `A` within `[n, n + b]`.
    Syndetic { b: usize },
    /// `[start, start + length] ⊆ A`.
    Thick { start: usize, length: usize },
    /// `[start, start + length] ⊆ C_b`.
    PiecewiseSyndetic { b: usize, start: usize, length: usize },
    /// For each `ℓ ≤ max_len`, the run starts `D_ℓ = {x : [x, x + ℓ] ⊆ A}`
    /// are `bound`-syndetic on `[0, W − ℓ]`.
    ThicklySyndetic {
        max_len: usize,
        s_max: usize,
        levels: Vec<LevelBound>,
    },
    /// `Z = {z : [z, z + length] ⊆ C_b}` has windowed `family` estimate
    /// `estimate ≥ delta`.
    Psf {
        family: Family,
        b: usize,
        length: usize,
        delta: Rational,
        estimate: Density,
        starts: WindowedSet,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "evidence", rename_all = "snake_case")]
pub enum Evidence {
    /// The longest run of non-members; `[start, start + length − 1]`.
    LargestGap { start: usize, length: usize },
    LongestRun { start: Option<usize>, length: usize },
    /// Longest run of `C_b` for each searched `b`.
    MaxRunPerB { runs: Vec<(usize, usize)> },
    /// First run-length level whose start set is not `s_max`-syndetic.
    FailingLevel { ell: usize, needed: Option<usize> },
    /// Best `family` estimate of `Z` per searched `b` (`None`: window too short).
    EstimatePerB { estimates: Vec<(usize, Option<Density>)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rational>,
}

impl SearchBounds {
    fn new() -> Self {
        SearchBounds {
            b_max: None,
            length: None,
            s_max: None,
            family: None,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Syndetic,
    Thick,
    PiecewiseSyndetic,
    ThicklySyndetic,
    Psf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refutation {
    pub property: Property,
    pub bounds: SearchBounds,
    #[serde(flatten)]
    pub evidence: Evidence,
}

/// Outcome of a detector on one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StructureCertificate {
    Certified {
        window_end: usize,
        #[serde(flatten)]
        witness: Witness,
    },
    Refuted {
        window_end: usize,
        #[serde(flatten)]
        refutation: Refutation,
    },
}

impl StructureCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, StructureCertificate::Certified { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            StructureCertificate::Certified { witness, .. } => Some(witness),
            StructureCertificate::Refuted { .. } => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            StructureCertificate::Refuted { refutation, .. } => Some(refutation),
            StructureCertificate::Certified { .. } => None,
        }
    }

    /// The `b` carried by a syndetic, piecewise syndetic or `PS^F` witness.
    pub fn bound(&self) -> Option<usize> {
        match self.witness()? {
            Witness::Syndetic { b } | Witness::PiecewiseSyndetic { b, .. } | Witness::Psf { b, .. } => {
                Some(*b)
            }
            _ => None,
        }
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        match self {
            StructureCertificate::Certified { window_end, witness } => match witness {
                Witness::Syndetic { b } => format!("syndetic: {b}-syndetic on [0, {window_end}]"),
                Witness::Thick { start, length } => {
                    format!("thick: [{start}, {}] inside the set", start + length)
                }
                Witness::PiecewiseSyndetic { b, start, length } => format!(
                    "piecewise syndetic: b = {b}, [{start}, {}] covered by {b} shifts",
                    start + length
                ),
                Witness::ThicklySyndetic { max_len, levels, .. } => format!(
                    "thickly syndetic up to run length {max_len}: worst start gap {}",
                    levels.iter().map(|l| l.bound).max().unwrap_or(0)
                ),
                Witness::Psf {
                    family,
                    b,
                    length,
                    estimate,
                    ..
                } => format!("PS^F ({family:?}): b = {b}, L = {length}, estimate {estimate}"),
            },
            StructureCertificate::Refuted { window_end, refutation } => format!(
                "refuted ({:?}) on [0, {window_end}] within {}",
                refutation.property,
                serde_json::to_string(&refutation.bounds).unwrap_or_default()
            ),
        }
    }

    /// Re-checks the witness against `a` by direct scanning, independent of
    /// the run bookkeeping that produced it.
    pub fn revalidate(&self, a: &WindowedSet) -> Result<(), String> {
        let (w, witness) = match self {
            StructureCertificate::Certified { window_end, witness } => (*window_end, witness),
            StructureCertificate::Refuted { .. } => return Ok(()),
        };
        if w != a.window_end() {
            return Err(format!("certificate window {w} ≠ set window {}", a.window_end()));
        }
        let hit = |n: usize, b: usize| (n..=(n + b).min(w)).any(|k| a.contains(k));
        match witness {
            Witness::Syndetic { b } => {
                if *b > w {
                    return Err(format!("bound {b} exceeds window"));
                }
                match (0..=w - b).find(|&n| !hit(n, *b)) {
                    Some(n) => Err(format!("n = {n} has no member in [n, n + {b}]")),
                    None => Ok(()),
                }
            }
            Witness::Thick { start, length } => {
                match (*start..=start + length).find(|&n| !a.contains(n)) {
                    Some(n) => Err(format!("{n} missing from thick interval")),
                    None => Ok(()),
                }
            }
            Witness::PiecewiseSyndetic { b, start, length } => {
                if start + length + b > w {
                    return Err("covered interval leaves the shrunken window".into());
                }
                match (*start..=start + length).find(|&n| !hit(n, *b)) {
                    Some(n) => Err(format!("n = {n} not covered by {b} shifts")),
                    None => Ok(()),
                }
            }
            Witness::ThicklySyndetic { levels, s_max, .. } => {
                for lvl in levels {
                    if lvl.bound > *s_max {
                        return Err(format!("level {} bound {} above s_max", lvl.ell, lvl.bound));
                    }
                    if lvl.ell > w {
                        return Err(format!("level {} exceeds window", lvl.ell));
                    }
                    let top = w - lvl.ell;
                    let starts: Vec<bool> = (0..=top)
                        .map(|x| (x..=x + lvl.ell).all(|k| a.contains(k)))
                        .collect();
                    if lvl.bound > top {
                        return Err(format!("level {} bound exceeds its window", lvl.ell));
                    }
                    for n in 0..=top - lvl.bound {
                        if !(n..=n + lvl.bound).any(|k| starts[k]) {
                            return Err(format!("level {}: start gap at {n}", lvl.ell));
                        }
                    }
                }
                Ok(())
            }
            Witness::Psf {
                family,
                b,
                length,
                delta,
                estimate,
                starts,
            } => {
                if b + length > w {
                    return Err("start set window is empty".into());
                }
                let top = w - b - length;
                if starts.window_end() != top {
                    return Err(format!("start set window {} ≠ {top}", starts.window_end()));
                }
                for z in 0..=top {
                    let expected = (z..=z + length).all(|n| hit(n, *b));
                    if expected != starts.contains(z) {
                        return Err(format!("start {z} misclassified"));
                    }
                }
                let recomputed = family_estimate(starts, *family);
                if recomputed != *estimate {
                    return Err(format!("estimate {estimate} ≠ recomputed {recomputed}"));
                }
                if estimate.cmp_big(delta.inner()) == std::cmp::Ordering::Less {
                    return Err(format!("estimate {estimate} below δ = {delta}"));
                }
                Ok(())
            }
        }
    }
}

/// Maximal runs of `C_b` on `[0, W − b]`, closed intervals.
pub fn covered_runs(a: &WindowedSet, b: usize) -> Vec<(usize, usize)> {
    let w = a.window_end();
    if b > w {
        return Vec::new();
    }
    let top = w - b;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &e in a.elements() {
        let lo = e.saturating_sub(b);
        if lo > top {
            break;
        }
        let hi = e.min(top);
        match runs.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => runs.push((lo, hi)),
        }
    }
    runs
}

/// `C_b` as a windowed set on `[0, W − b]`.
pub fn covered_set(a: &WindowedSet, b: usize) -> Result<WindowedSet> {
    a.union_of_shifts(0, b)
}

fn longest(runs: &[(usize, usize)]) -> Option<(usize, usize)> {
    runs.iter()
        .copied()
        .fold(None, |best: Option<(usize, usize)>, r| match best {
            Some(bst) if bst.1 - bst.0 >= r.1 - r.0 => Some(bst),
            _ => Some(r),
        })
}

/// Least `b ≤ b_max` making `A` `b`-syndetic on the window: every
/// `n ∈ [0, W − b]` sees a member in `[n, n + b]`. That least `b` is the
/// length of the longest gap.
pub fn syndetic_bound(a: &WindowedSet, b_max: usize) -> StructureCertificate {
    let w = a.window_end();
    let mut bounds = SearchBounds::new();
    bounds.b_max = Some(b_max);
    let largest_gap = a
        .gaps()
        .into_iter()
        .fold(None, |best: Option<(usize, usize)>, (s, e)| match best {
            Some((bs, bl)) if bl > e - s => Some((bs, bl)),
            _ => Some((s, e - s + 1)),
        });
    match largest_gap {
        None => StructureCertificate::Certified {
            window_end: w,
            witness: Witness::Syndetic { b: 0 },
        },
        Some((_, len)) if len <= b_max && !a.is_empty() => StructureCertificate::Certified {
            window_end: w,
            witness: Witness::Syndetic { b: len },
        },
        Some((start, length)) => StructureCertificate::Refuted {
            window_end: w,
            refutation: Refutation {
                property: Property::Syndetic,
                bounds,
                evidence: Evidence::LargestGap { start, length },
            },
        },
    }
}

/// First run of `length + 1` consecutive members.
pub fn thick_certificate(a: &WindowedSet, length: usize) -> Result<StructureCertificate> {
    let w = a.window_end();
    if length > w {
        return Err(Error::Range {
            what: "run length",
            value: length,
            lo: 0,
            hi: w,
        });
    }
    let runs = a.runs();
    if let Some(&(start, _)) = runs.iter().find(|(s, e)| e - s >= length) {
        return Ok(StructureCertificate::Certified {
            window_end: w,
            witness: Witness::Thick { start, length },
        });
    }
    let mut bounds = SearchBounds::new();
    bounds.length = Some(length);
    let best = longest(&runs);
    Ok(StructureCertificate::Refuted {
        window_end: w,
        refutation: Refutation {
            property: Property::Thick,
            bounds,
            evidence: Evidence::LongestRun {
                start: best.map(|r| r.0),
                length: best.map_or(0, |r| r.1 - r.0 + 1),
            },
        },
    })
}

/// Least `b ∈ [1, b_max]` whose covered set `C_b` holds a run of `length + 1`.
pub fn ps_certificate(a: &WindowedSet, b_max: usize, length: usize) -> Result<StructureCertificate> {
    let w = a.window_end();
    if b_max < 1 {
        return Err(Error::param("piecewise syndetic search needs b_max ≥ 1"));
    }
    if length > w {
        return Err(Error::Range {
            what: "run length",
            value: length,
            lo: 0,
            hi: w,
        });
    }
    // Each b is independent; the parallel scan keeps the least successful b.
    let per_b: Vec<(usize, Option<usize>, usize)> = (1..=b_max.min(w))
        .into_par_iter()
        .map(|b| {
            let runs = covered_runs(a, b);
            let hit = runs.iter().find(|(s, e)| e - s >= length).map(|r| r.0);
            let max_run = longest(&runs).map_or(0, |r| r.1 - r.0 + 1);
            (b, hit, max_run)
        })
        .collect();
    if let Some(&(b, Some(start), _)) = per_b.iter().find(|(_, hit, _)| hit.is_some()) {
        return Ok(StructureCertificate::Certified {
            window_end: w,
            witness: Witness::PiecewiseSyndetic { b, start, length },
        });
    }
    let mut bounds = SearchBounds::new();
    bounds.b_max = Some(b_max);
    bounds.length = Some(length);
    Ok(StructureCertificate::Refuted {
        window_end: w,
        refutation: Refutation {
            property: Property::PiecewiseSyndetic,
            bounds,
            evidence: Evidence::MaxRunPerB {
                runs: per_b.into_iter().map(|(b, _, r)| (b, r)).collect(),
            },
        },
    })
}

/// Start set `D_ℓ = {x ∈ [0, W − ℓ] : [x, x + ℓ] ⊆ A}`.
pub fn run_starts(a: &WindowedSet, ell: usize) -> Result<WindowedSet> {
    let w = a.window_end();
    if ell > w {
        return Err(Error::Range {
            what: "run length",
            value: ell,
            lo: 0,
            hi: w,
        });
    }
    let mut ind = vec![false; w - ell + 1];
    for (s, e) in a.runs() {
        if e - s >= ell {
            ind[s..=e - ell].iter_mut().for_each(|x| *x = true);
        }
    }
    Ok(WindowedSet::from_indicator(ind))
}

/// For each `ℓ ≤ length`, `D_ℓ` must be `S`-syndetic with `S ≤ s_max`.
pub fn thickly_syndetic_certificate(
    a: &WindowedSet,
    length: usize,
    s_max: usize,
) -> Result<StructureCertificate> {
    let w = a.window_end();
    if length > w {
        return Err(Error::Range {
            what: "run length",
            value: length,
            lo: 0,
            hi: w,
        });
    }
    if s_max < 1 {
        return Err(Error::param("thickly syndetic search needs s_max ≥ 1"));
    }
    let mut levels = Vec::with_capacity(length + 1);
    for ell in 0..=length {
        let starts = run_starts(a, ell)?;
        let cert = syndetic_bound(&starts, s_max);
        match cert.bound() {
            Some(bound) if !starts.is_empty() => levels.push(LevelBound { ell, bound }),
            _ => {
                let needed = match cert.refutation().map(|r| &r.evidence) {
                    Some(Evidence::LargestGap { length, .. }) if !starts.is_empty() => Some(*length),
                    _ => None,
                };
                let mut bounds = SearchBounds::new();
                bounds.length = Some(length);
                bounds.s_max = Some(s_max);
                return Ok(StructureCertificate::Refuted {
                    window_end: w,
                    refutation: Refutation {
                        property: Property::ThicklySyndetic,
                        bounds,
                        evidence: Evidence::FailingLevel { ell, needed },
                    },
                });
            }
        }
    }
    Ok(StructureCertificate::Certified {
        window_end: w,
        witness: Witness::ThicklySyndetic {
            max_len: length,
            s_max,
            levels,
        },
    })
}

fn family_estimate(z: &WindowedSet, family: Family) -> Density {
    let s = Schedule::default_for(z.window_end());
    let r = density_report(z, s.n0, &s.lengths).expect("default schedule is in range");
    match family {
        Family::Lower => r.lower_estimate,
        Family::Upper => r.upper_estimate,
        Family::Banach => r.banach_estimate,
    }
}

/// Start set `Z_b = {z ∈ [0, W − b − L] : [z, z + L] ⊆ C_b}`.
pub fn covered_interval_starts(a: &WindowedSet, b: usize, length: usize) -> Option<WindowedSet> {
    let w = a.window_end();
    if b + length > w {
        return None;
    }
    let top = w - b - length;
    let mut ind = vec![false; top + 1];
    for (s, e) in covered_runs(a, b) {
        if e - s >= length && s <= top {
            let hi = (e - length).min(top);
            ind[s..=hi].iter_mut().for_each(|x| *x = true);
        }
    }
    Some(WindowedSet::from_indicator(ind))
}

/// Least `b ≤ b_max` whose interval-start set `Z_b` has windowed `family`
/// estimate at least `delta` (default schedule on `Z_b`'s window).
pub fn psf_certificate(
    a: &WindowedSet,
    family: Family,
    delta: &Rational,
    b_max: usize,
    length: usize,
) -> Result<StructureCertificate> {
    use num_traits::{One, Zero};
    let w = a.window_end();
    let d = delta.inner();
    if d.is_zero() || *d < num_rational::BigRational::zero() || *d > num_rational::BigRational::one() {
        return Err(Error::param(format!("δ = {delta} not in (0, 1]")));
    }
    if b_max < 1 {
        return Err(Error::param("PS^F search needs b_max ≥ 1"));
    }
    let mut estimates = Vec::new();
    for b in 1..=b_max {
        let Some(starts) = covered_interval_starts(a, b, length) else {
            estimates.push((b, None));
            continue;
        };
        let estimate = family_estimate(&starts, family);
        if estimate.cmp_big(d) != std::cmp::Ordering::Less {
            return Ok(StructureCertificate::Certified {
                window_end: w,
                witness: Witness::Psf {
                    family,
                    b,
                    length,
                    delta: delta.clone(),
                    estimate,
                    starts,
                },
            });
        }
        estimates.push((b, Some(estimate)));
    }
    let mut bounds = SearchBounds::new();
    bounds.b_max = Some(b_max);
    bounds.length = Some(length);
    bounds.family = Some(family);
    bounds.delta = Some(delta.clone());
    Ok(StructureCertificate::Refuted {
        window_end: w,
        refutation: Refutation {
            property: Property::Psf,
            bounds,
            evidence: Evidence::EstimatePerB { estimates },
        },
    })
}
