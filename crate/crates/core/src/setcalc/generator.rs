use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WindowedSet;
use crate::error::{Error, Result};

/// Provenance of a windowed set: a rule that determines `A ∩ [0, W]` for
/// every `W`. JSON uses a `"variant"` tag with the variant's fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum GeneratorSpec {
    Explicit {
        elements: Vec<usize>,
    },
    /// `{n : n mod q ∈ R}`.
    Periodic {
        q: usize,
        #[serde(rename = "R")]
        residues: Vec<usize>,
    },
    /// `∪_{j ≥ n} ∪_{m ≥ 1} [2ʲm, 2ʲm + 2^{j−1}]`.
    IntervalFamily {
        n: u32,
    },
    /// Each `k` is a member independently with probability `rho`; the k-th
    /// draw of a ChaCha8 stream seeded by `seed` decides `k`.
    Bernoulli {
        rho: f64,
        seed: u64,
    },
    Complement {
        inner: Box<GeneratorSpec>,
    },
    /// `∪_{t=0}^{b} (inner − t)`.
    ShiftUnion {
        inner: Box<GeneratorSpec>,
        b: usize,
    },
    /// Runs of `length` members separated by `gap` non-members, first run at `offset`.
    BlockTrain {
        length: usize,
        gap: usize,
        offset: usize,
    },
    /// `inner` with every run cut to at most `max_run` members: scanning left
    /// to right, a member that would extend a run past `max_run` is dropped.
    MaxRun {
        inner: Box<GeneratorSpec>,
        max_run: usize,
    },
}

impl GeneratorSpec {
    pub fn periodic(q: usize, residues: impl Into<Vec<usize>>) -> Self {
        GeneratorSpec::Periodic {
            q,
            residues: residues.into(),
        }
    }

    pub fn complement_of(inner: GeneratorSpec) -> Self {
        GeneratorSpec::Complement {
            inner: Box::new(inner),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::Explicit { .. } => Ok(()),
            GeneratorSpec::Periodic { q, residues } => {
                if *q == 0 {
                    return Err(Error::param("periodic generator needs q ≥ 1"));
                }
                if let Some(r) = residues.iter().find(|&&r| r >= *q) {
                    return Err(Error::param(format!("residue {r} not in [0, {q})")));
                }
                Ok(())
            }
            GeneratorSpec::IntervalFamily { n } => {
                if *n == 0 || *n >= usize::BITS {
                    return Err(Error::param(format!("interval family needs 1 ≤ n < {}", usize::BITS)));
                }
                Ok(())
            }
            GeneratorSpec::Bernoulli { rho, .. } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(Error::param(format!("Bernoulli probability {rho} not in (0, 1)")));
                }
                Ok(())
            }
            GeneratorSpec::Complement { inner } | GeneratorSpec::ShiftUnion { inner, .. } => {
                inner.validate()
            }
            GeneratorSpec::BlockTrain { length, .. } => {
                if *length == 0 {
                    return Err(Error::param("block train needs length ≥ 1"));
                }
                Ok(())
            }
            GeneratorSpec::MaxRun { inner, max_run } => {
                if *max_run == 0 {
                    return Err(Error::param("max_run must be ≥ 1"));
                }
                inner.validate()
            }
        }
    }

    fn indicator(&self, w: usize) -> Vec<bool> {
        let mut ind = vec![false; w + 1];
        match self {
            GeneratorSpec::Explicit { elements } => {
                for &e in elements.iter().filter(|&&e| e <= w) {
                    ind[e] = true;
                }
            }
            GeneratorSpec::Periodic { q, residues } => {
                let mut mask = vec![false; *q];
                for &r in residues {
                    mask[r] = true;
                }
                for (k, slot) in ind.iter_mut().enumerate() {
                    *slot = mask[k % q];
                }
            }
            GeneratorSpec::IntervalFamily { n } => {
                let mut j = *n;
                while j < usize::BITS && (1usize << j) <= w {
                    let step = 1usize << j;
                    let half = step >> 1;
                    let mut start = step;
                    while start <= w {
                        let end = (start + half).min(w);
                        ind[start..=end].iter_mut().for_each(|b| *b = true);
                        start += step;
                    }
                    j += 1;
                }
            }
            GeneratorSpec::Bernoulli { rho, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for slot in ind.iter_mut() {
                    *slot = rng.random::<f64>() < *rho;
                }
            }
            GeneratorSpec::Complement { inner } => {
                for (slot, b) in ind.iter_mut().zip(inner.indicator(w)) {
                    *slot = !b;
                }
            }
            GeneratorSpec::ShiftUnion { inner, b } => {
                let wide = inner.indicator(w + b);
                // sliding "any member in [k, k + b]"
                let mut last_member: Option<usize> = None;
                for k in (0..=w + b).rev() {
                    if wide[k] {
                        last_member = Some(k);
                    }
                    if k <= w {
                        ind[k] = matches!(last_member, Some(m) if m <= k + b);
                    }
                }
            }
            GeneratorSpec::BlockTrain { length, gap, offset } => {
                let period = length + gap;
                for (k, slot) in ind.iter_mut().enumerate().skip(*offset) {
                    *slot = (k - offset) % period < *length;
                }
            }
            GeneratorSpec::MaxRun { inner, max_run } => {
                let mut run = 0usize;
                for (slot, b) in ind.iter_mut().zip(inner.indicator(w)) {
                    if b && run < *max_run {
                        *slot = true;
                        run += 1;
                    } else {
                        run = 0;
                    }
                }
            }
        }
        ind
    }
}

/// `gen ∩ [0, w]`, deterministic in `(gen, w)`.
pub fn materialize(gen: &GeneratorSpec, w: usize) -> Result<WindowedSet> {
    gen.validate()?;
    Ok(WindowedSet::from_indicator(gen.indicator(w)).with_generator(gen.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent enumeration of the dyadic interval family, straight from
    /// its defining union.
    fn interval_family_oracle(n: u32, w: usize) -> Vec<usize> {
        let mut out = std::collections::BTreeSet::new();
        for j in n..40 {
            let p = 1usize << j;
            if p > w {
                break;
            }
            for m in 1..=w / p {
                for k in p * m..=p * m + p / 2 {
                    if k <= w {
                        out.insert(k);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn periodic_evens() {
        let a = materialize(&GeneratorSpec::periodic(2, [0]), 9).unwrap();
        assert_eq!(a.elements(), &[0, 2, 4, 6, 8]);
    }

    #[test]
    fn interval_family_small_window() {
        let a = materialize(&GeneratorSpec::IntervalFamily { n: 3 }, 24).unwrap();
        // j = 3 contributes [8,12], [16,20], {24}; j = 4 contributes [16,24].
        let expected: Vec<usize> = (8..=12).chain(16..=24).collect();
        assert_eq!(a.elements(), expected.as_slice());
        assert_eq!(a.elements(), interval_family_oracle(3, 24).as_slice());
    }

    #[test]
    fn interval_family_matches_oracle_on_larger_windows() {
        for (n, w) in [(1, 300), (3, 4096), (5, 10_000)] {
            let a = materialize(&GeneratorSpec::IntervalFamily { n }, w).unwrap();
            assert_eq!(a.elements(), interval_family_oracle(n, w).as_slice(), "n={n} w={w}");
        }
    }

    #[test]
    fn complement_of_everything_is_empty() {
        let g = GeneratorSpec::complement_of(GeneratorSpec::periodic(1, [0]));
        assert!(materialize(&g, 100).unwrap().is_empty());
    }

    #[test]
    fn complement_of_interval_family() {
        let g = GeneratorSpec::complement_of(GeneratorSpec::IntervalFamily { n: 3 });
        let a = materialize(&g, 24).unwrap();
        assert_eq!(a.elements(), &[0, 1, 2, 3, 4, 5, 6, 7, 13, 14, 15]);
    }

    #[test]
    fn parameter_errors() {
        for g in [
            GeneratorSpec::Bernoulli { rho: 0.0, seed: 1 },
            GeneratorSpec::Bernoulli { rho: 1.0, seed: 1 },
            GeneratorSpec::periodic(0, []),
            GeneratorSpec::periodic(3, [3]),
            GeneratorSpec::IntervalFamily { n: 0 },
            GeneratorSpec::BlockTrain { length: 0, gap: 3, offset: 0 },
        ] {
            assert!(matches!(materialize(&g, 10), Err(Error::Parameter(_))), "{g:?}");
        }
    }

    #[test]
    fn bernoulli_is_seeded_and_prefix_consistent() {
        let g = GeneratorSpec::Bernoulli { rho: 0.3, seed: 42 };
        let a = materialize(&g, 1000).unwrap();
        let b = materialize(&g, 1000).unwrap();
        assert_eq!(a, b);
        let short = materialize(&g, 400).unwrap();
        assert_eq!(a.truncate(400).unwrap(), short);
        let other = materialize(&GeneratorSpec::Bernoulli { rho: 0.3, seed: 43 }, 1000).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn block_train_and_shift_union() {
        let g = GeneratorSpec::BlockTrain { length: 2, gap: 3, offset: 1 };
        let a = materialize(&g, 12).unwrap();
        assert_eq!(a.elements(), &[1, 2, 6, 7, 11, 12]);
        let u = materialize(&GeneratorSpec::ShiftUnion { inner: Box::new(g), b: 1 }, 12).unwrap();
        assert_eq!(u.elements(), &[0, 1, 2, 5, 6, 7, 10, 11, 12]);
    }

    #[test]
    fn max_run_cuts_runs() {
        let g = GeneratorSpec::MaxRun {
            inner: Box::new(GeneratorSpec::periodic(1, [0])),
            max_run: 2,
        };
        let a = materialize(&g, 8).unwrap();
        assert_eq!(a.elements(), &[0, 1, 3, 4, 6, 7]);
    }

    #[test]
    fn json_mirrors_variant_fields() {
        let g: GeneratorSpec = serde_json::from_str(r#"{"variant":"Periodic","q":2,"R":[0]}"#).unwrap();
        assert_eq!(g, GeneratorSpec::periodic(2, [0]));
        let nested = GeneratorSpec::complement_of(GeneratorSpec::IntervalFamily { n: 3 });
        let json = serde_json::to_string(&nested).unwrap();
        assert_eq!(json, r#"{"variant":"Complement","inner":{"variant":"IntervalFamily","n":3}}"#);
    }
}
