//! Brute-force oracles over plain indicator vectors. Nothing here calls into
//! the run bookkeeping or sliding counters of the library.
#![allow(dead_code)]

use num_rational::Ratio;

pub type Q = Ratio<u64>;

pub fn indicator(elements: &[usize], window_end: usize) -> Vec<bool> {
    let mut ind = vec![false; window_end + 1];
    for &e in elements {
        ind[e] = true;
    }
    ind
}

/// `(min, max)` of `|A ∩ [0, n]| / (n + 1)` over `n ∈ [n0, W]`, one pass.
pub fn lower_upper(ind: &[bool], n0: usize) -> (Q, Q) {
    let mut count = 0u64;
    let mut lo: Option<Q> = None;
    let mut hi: Option<Q> = None;
    for (n, &b) in ind.iter().enumerate() {
        count += b as u64;
        if n >= n0 {
            let d = Q::new(count, n as u64 + 1);
            lo = Some(lo.map_or(d, |x| x.min(d)));
            hi = Some(hi.map_or(d, |x| x.max(d)));
        }
    }
    (lo.unwrap(), hi.unwrap())
}

/// Same as [`lower_upper`] but recounting every prefix from scratch.
pub fn lower_upper_quadratic(ind: &[bool], n0: usize) -> (Q, Q) {
    let ds: Vec<Q> = (n0..ind.len())
        .map(|n| Q::new(ind[..=n].iter().filter(|&&b| b).count() as u64, n as u64 + 1))
        .collect();
    (*ds.iter().min().unwrap(), *ds.iter().max().unwrap())
}

/// `max_m |A ∩ [m, m + ℓ]| / (ℓ + 1)`, every window recounted.
pub fn banach(ind: &[bool], ell: usize) -> Q {
    let w = ind.len() - 1;
    let best = (0..=w - ell)
        .map(|m| ind[m..=m + ell].iter().filter(|&&b| b).count())
        .max()
        .unwrap();
    Q::new(best as u64, ell as u64 + 1)
}

/// Some member of `A` in `[n, n + b]`.
pub fn hit(ind: &[bool], n: usize, b: usize) -> bool {
    ind[n..=(n + b).min(ind.len() - 1)].iter().any(|&x| x)
}

/// Least `b ≤ b_max` such that every `n ∈ [0, W − b]` meets `A` in `[n, n + b]`.
pub fn least_syndetic(ind: &[bool], b_max: usize) -> Option<usize> {
    let w = ind.len() - 1;
    (0..=b_max.min(w)).find(|&b| (0..=w - b).all(|n| hit(ind, n, b)))
}

/// Some `[s, s + L] ⊆ A`.
pub fn thick_start(ind: &[bool], length: usize) -> Option<usize> {
    let w = ind.len() - 1;
    if length > w {
        return None;
    }
    (0..=w - length).find(|&s| ind[s..=s + length].iter().all(|&x| x))
}

/// Least `b ∈ [1, b_max]` with some `[s, s + L]` covered by `∪_{t≤b} (A − t)`,
/// `s + L + b ≤ W`.
pub fn least_ps(ind: &[bool], b_max: usize, length: usize) -> Option<usize> {
    let w = ind.len() - 1;
    (1..=b_max).find(|&b| {
        b + length <= w && (0..=w - b - length).any(|s| (s..=s + length).all(|n| hit(ind, n, b)))
    })
}

/// Indicator of `∪_{t=1}^{b} (A − t)` on `[0, W − b]`.
pub fn shifted_union(ind: &[bool], b: usize) -> Vec<bool> {
    let w = ind.len() - 1;
    (0..=w - b).map(|n| (1..=b).any(|t| ind[n + t])).collect()
}

/// Longest run of `true`.
pub fn longest_run(ind: &[bool]) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &b in ind {
        cur = if b { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

pub fn q_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}
