//! Windowed density estimators.
//!
//! Limits are replaced by finite extrema: lower/upper density become the
//! min/max of `|A ∩ [0, n]| / (n + 1)` over `n ∈ [n₀, W]`, and upper Banach
//! density becomes the sliding-window maximum at the largest scheduled
//! length. Every value is an exact reduced rational.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::WindowedSet;
use crate::error::{Error, Result};
use crate::rational::Density;

/// Number of sampled points kept in a report's prefix profile.
const PROFILE_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub n0: usize,
    pub window_end: usize,
    pub lengths: Vec<usize>,
}

impl Schedule {
    /// `n₀ = W/16` and a single Banach length `ℓ = W/16`.
    pub fn default_for(window_end: usize) -> Self {
        Schedule {
            n0: window_end / 16,
            window_end,
            lengths: vec![window_end / 16],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub density: Density,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    /// Sampled `(n, |A ∩ [0, n]| / (n + 1))` for `n ∈ [n₀, W]`, always
    /// including both endpoints.
    pub prefix_profile: Vec<ProfilePoint>,
    pub lower_estimate: Density,
    pub upper_estimate: Density,
    /// `(ℓ, max_m |A ∩ [m, m + ℓ]| / (ℓ + 1))` per scheduled length.
    pub banach_profile: Vec<ProfilePoint>,
    pub banach_estimate: Density,
    pub schedule: Schedule,
}

impl DensityReport {
    pub fn banach_at(&self, ell: usize) -> Option<Density> {
        self.banach_profile.iter().find(|p| p.n == ell).map(|p| p.density)
    }
}

#[inline]
fn cmp_frac(a_num: u64, a_den: u64, b_num: u64, b_den: u64) -> Ordering {
    (a_num as u128 * b_den as u128).cmp(&(b_num as u128 * a_den as u128))
}

pub fn prefix_density(a: &WindowedSet, n: usize) -> Result<Density> {
    if n > a.window_end() {
        return Err(Error::Range {
            what: "prefix length",
            value: n,
            lo: 0,
            hi: a.window_end(),
        });
    }
    let count = a.elements().partition_point(|&e| e <= n);
    Ok(Density::new(count as u64, n as u64 + 1))
}

/// `(min, max)` of the prefix densities over `n ∈ [n₀, W]`.
pub fn lower_upper(a: &WindowedSet, n0: usize) -> Result<(Density, Density)> {
    let w = a.window_end();
    if n0 > w {
        return Err(Error::Range {
            what: "n0",
            value: n0,
            lo: 0,
            hi: w,
        });
    }
    let ind = a.indicator();
    let mut count = ind[..n0].iter().filter(|&&b| b).count() as u64;
    let (mut lo, mut hi) = ((u64::MAX, 1u64), (0u64, 1u64));
    for (n, &b) in ind.iter().enumerate().skip(n0) {
        count += b as u64;
        let den = n as u64 + 1;
        if lo.0 == u64::MAX || cmp_frac(count, den, lo.0, lo.1) == Ordering::Less {
            lo = (count, den);
        }
        if cmp_frac(count, den, hi.0, hi.1) == Ordering::Greater {
            hi = (count, den);
        }
    }
    Ok((Density::new(lo.0, lo.1), Density::new(hi.0, hi.1)))
}

/// `max_{0 ≤ m ≤ W − ℓ} |A ∩ [m, m + ℓ]| / (ℓ + 1)`.
pub fn banach_profile_at(a: &WindowedSet, ell: usize) -> Result<Density> {
    let w = a.window_end();
    if ell > w {
        return Err(Error::Range {
            what: "Banach window length",
            value: ell,
            lo: 0,
            hi: w,
        });
    }
    let ind = a.indicator();
    let mut count = ind[..=ell].iter().filter(|&&b| b).count();
    let mut best = count;
    for m in 1..=w - ell {
        count += ind[m + ell] as usize;
        count -= ind[m - 1] as usize;
        best = best.max(count);
    }
    Ok(Density::new(best as u64, ell as u64 + 1))
}

pub fn density_report(a: &WindowedSet, n0: usize, lengths: &[usize]) -> Result<DensityReport> {
    if lengths.is_empty() {
        return Err(Error::param("empty Banach length schedule"));
    }
    let w = a.window_end();
    let (lower_estimate, upper_estimate) = lower_upper(a, n0)?;
    let banach_profile = lengths
        .iter()
        .map(|&ell| banach_profile_at(a, ell).map(|density| ProfilePoint { n: ell, density }))
        .collect::<Result<Vec<_>>>()?;
    let largest = *lengths.iter().max().expect("non-empty");
    let banach_estimate = banach_profile
        .iter()
        .find(|p| p.n == largest)
        .expect("largest length is scheduled")
        .density;

    let stride = ((w - n0) / PROFILE_POINTS).max(1);
    let counts = a.prefix_counts();
    let mut prefix_profile: Vec<ProfilePoint> = (n0..=w)
        .step_by(stride)
        .map(|n| ProfilePoint {
            n,
            density: Density::new(counts[n + 1] as u64, n as u64 + 1),
        })
        .collect();
    if prefix_profile.last().map(|p| p.n) != Some(w) {
        prefix_profile.push(ProfilePoint {
            n: w,
            density: Density::new(counts[w + 1] as u64, w as u64 + 1),
        });
    }

    Ok(DensityReport {
        prefix_profile,
        lower_estimate,
        upper_estimate,
        banach_profile,
        banach_estimate,
        schedule: Schedule {
            n0,
            window_end: w,
            lengths: lengths.to_vec(),
        },
    })
}

impl WindowedSet {
    /// Report with the default schedule `n₀ = ℓ = W/16`.
    pub fn default_report(&self) -> DensityReport {
        let s = Schedule::default_for(self.window_end());
        density_report(self, s.n0, &s.lengths).expect("default schedule is in range")
    }
}
