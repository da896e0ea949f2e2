//! Finite windows `A ∩ [0, W]` of subsets of `Z₊`.
//!
//! A [`WindowedSet`] keeps both the sorted element list and a dense indicator
//! over the window, so membership is a single index. All derived sets
//! (shifts, unions of shifts, complements) are new immutable values.

mod density;
mod generator;

pub use density::{
    banach_profile_at, density_report, lower_upper, prefix_density, DensityReport, ProfilePoint,
    Schedule,
};
pub use generator::{materialize, GeneratorSpec};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Equality compares the window and the elements; the generator is provenance only.
#[derive(Clone)]
pub struct WindowedSet {
    window_end: usize,
    elements: Vec<usize>,
    indicator: Vec<bool>,
    generator: Option<GeneratorSpec>,
}

impl WindowedSet {
    /// Builds a set from arbitrary elements; they must lie in `[0, window_end]`.
    /// Duplicates and ordering are normalized.
    pub fn new(window_end: usize, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indicator = vec![false; window_end + 1];
        for e in elements {
            if e > window_end {
                return Err(Error::Range {
                    what: "element",
                    value: e,
                    lo: 0,
                    hi: window_end,
                });
            }
            indicator[e] = true;
        }
        Ok(Self::from_indicator(indicator))
    }

    /// The indicator's length fixes the window: `W = indicator.len() - 1`.
    pub fn from_indicator(indicator: Vec<bool>) -> Self {
        assert!(!indicator.is_empty(), "window must contain 0");
        let elements = indicator
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        WindowedSet {
            window_end: indicator.len() - 1,
            elements,
            indicator,
            generator: None,
        }
    }

    pub fn empty(window_end: usize) -> Self {
        Self::from_indicator(vec![false; window_end + 1])
    }

    pub fn full(window_end: usize) -> Self {
        Self::from_indicator(vec![true; window_end + 1])
    }

    pub fn with_generator(mut self, generator: GeneratorSpec) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn window_end(&self) -> usize {
        self.window_end
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    pub fn generator(&self) -> Option<&GeneratorSpec> {
        self.generator.as_ref()
    }

    #[inline]
    pub fn contains(&self, n: usize) -> bool {
        n <= self.window_end && self.indicator[n]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `|A ∩ [0, n]|` for every `n`, as `counts[n + 1]`; `counts[0] = 0`.
    pub fn prefix_counts(&self) -> Vec<u32> {
        let mut counts = Vec::with_capacity(self.window_end + 2);
        counts.push(0u32);
        let mut c = 0u32;
        for &b in &self.indicator {
            c += b as u32;
            counts.push(c);
        }
        counts
    }

    /// Maximal runs of consecutive members as closed `(start, end)` pairs.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut it = self.elements.iter().copied();
        if let Some(first) = it.next() {
            let (mut s, mut e) = (first, first);
            for x in it {
                if x == e + 1 {
                    e = x;
                } else {
                    out.push((s, e));
                    s = x;
                    e = x;
                }
            }
            out.push((s, e));
        }
        out
    }

    /// Maximal runs of non-members, closed `(start, end)`.
    pub fn gaps(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut cursor = 0usize;
        for &(s, e) in &self.runs() {
            if s > cursor {
                out.push((cursor, s - 1));
            }
            cursor = e + 1;
        }
        if cursor <= self.window_end {
            out.push((cursor, self.window_end));
        }
        out
    }

    /// `A − t = {n ≥ 0 : n + t ∈ A}` on the shrunken window `[0, W − t]`.
    pub fn shift(&self, t: usize) -> Result<Self> {
        self.union_of_shifts(t, t)
    }

    /// `∪_{t = t_from}^{t_to} (A − t)` on `[0, W − t_to]`.
    pub fn union_of_shifts(&self, t_from: usize, t_to: usize) -> Result<Self> {
        if t_from > t_to {
            return Err(Error::param(format!("t_from {t_from} > t_to {t_to}")));
        }
        if t_to > self.window_end {
            return Err(Error::Range {
                what: "shift",
                value: t_to,
                lo: 0,
                hi: self.window_end,
            });
        }
        let counts = self.prefix_counts();
        let end = self.window_end - t_to;
        // n is covered iff A meets [n + t_from, n + t_to].
        let indicator = (0..=end)
            .map(|n| counts[n + t_to + 1] > counts[n + t_from])
            .collect();
        let mut out = Self::from_indicator(indicator);
        out.generator = self.generator.clone().and_then(|g| {
            (t_from == 0).then(|| GeneratorSpec::ShiftUnion {
                inner: Box::new(g),
                b: t_to,
            })
        });
        Ok(out)
    }

    /// `[0, W] \ A`.
    pub fn complement(&self) -> Self {
        let indicator = self.indicator.iter().map(|b| !b).collect();
        let mut out = Self::from_indicator(indicator);
        out.generator = self.generator.clone().map(|g| match g {
            GeneratorSpec::Complement { inner } => *inner,
            g => GeneratorSpec::Complement { inner: Box::new(g) },
        });
        out
    }

    /// Restriction to `[0, new_end]`, `new_end ≤ W`.
    pub fn truncate(&self, new_end: usize) -> Result<Self> {
        if new_end > self.window_end {
            return Err(Error::Range {
                what: "window end",
                value: new_end,
                lo: 0,
                hi: self.window_end,
            });
        }
        let mut out = Self::from_indicator(self.indicator[..=new_end].to_vec());
        out.generator = self.generator.clone();
        Ok(out)
    }

    /// Set of the same elements on a wider window.
    pub fn widen(&self, new_end: usize) -> Result<Self> {
        if new_end < self.window_end {
            return self.truncate(new_end);
        }
        let mut indicator = self.indicator.clone();
        indicator.resize(new_end + 1, false);
        Ok(Self::from_indicator(indicator))
    }

    pub fn is_subset_of(&self, other: &WindowedSet) -> bool {
        self.elements.iter().all(|&e| other.contains(e))
    }
}

impl PartialEq for WindowedSet {
    fn eq(&self, other: &Self) -> bool {
        self.window_end == other.window_end && self.elements == other.elements
    }
}

impl Eq for WindowedSet {}

impl std::fmt::Debug for WindowedSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        const SHOW: usize = 16;
        let head: Vec<_> = self.elements.iter().take(SHOW).collect();
        f.debug_struct("WindowedSet")
            .field("window_end", &self.window_end)
            .field("len", &self.elements.len())
            .field("head", &head)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    window_end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorSpec>,
}

impl Serialize for WindowedSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetRepr {
            window_end: self.window_end,
            elements: Some(self.elements.clone()),
            generator: self.generator.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WindowedSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SetRepr::deserialize(d)?;
        match (repr.elements, repr.generator) {
            (Some(elements), generator) => {
                let mut set = WindowedSet::new(repr.window_end, elements).map_err(D::Error::custom)?;
                set.generator = generator;
                Ok(set)
            }
            (None, Some(generator)) => {
                materialize(&generator, repr.window_end).map_err(D::Error::custom)
            }
            (None, None) => Err(D::Error::custom(
                "windowed set needs either \"elements\" or \"generator\"",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evens(w: usize) -> WindowedSet {
        WindowedSet::new(w, (0..=w).step_by(2)).unwrap()
    }

    #[test]
    fn new_rejects_out_of_window_and_normalizes() {
        assert!(WindowedSet::new(5, [6]).is_err());
        let s = WindowedSet::new(5, [3, 1, 3]).unwrap();
        assert_eq!(s.elements(), &[1, 3]);
        assert!(s.contains(3) && !s.contains(2) && !s.contains(99));
    }

    #[test]
    fn shift_of_evens_is_odds() {
        let a = evens(20);
        let s = a.shift(1).unwrap();
        assert_eq!(s.window_end(), 19);
        assert_eq!(s.elements(), (1..=19).step_by(2).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn union_of_shifts_cases() {
        let a = evens(20);
        let u = a.union_of_shifts(0, 1).unwrap();
        assert_eq!(u, WindowedSet::full(19));
        let odd = a.union_of_shifts(1, 1).unwrap();
        assert_eq!(odd.elements(), (1..=19).step_by(2).collect::<Vec<_>>().as_slice());
        assert_eq!(a.union_of_shifts(0, 0).unwrap().elements(), a.elements());
        assert!(a.union_of_shifts(0, 21).is_err());
        assert!(a.union_of_shifts(2, 1).is_err());
    }

    #[test]
    fn complement_cases() {
        let a = evens(10);
        assert_eq!(a.complement().elements(), &[1, 3, 5, 7, 9]);
        assert_eq!(WindowedSet::empty(10).complement(), WindowedSet::full(10));
        assert_eq!(a.complement().complement(), a);
    }

    #[test]
    fn runs_and_gaps_partition_the_window() {
        let a = WindowedSet::new(12, [0, 1, 2, 5, 6, 9]).unwrap();
        assert_eq!(a.runs(), vec![(0, 2), (5, 6), (9, 9)]);
        assert_eq!(a.gaps(), vec![(3, 4), (7, 8), (10, 12)]);
        assert_eq!(WindowedSet::empty(3).gaps(), vec![(0, 3)]);
        assert!(WindowedSet::full(3).gaps().is_empty());
    }

    #[test]
    fn json_forms() {
        let a: WindowedSet = serde_json::from_str(r#"{"window_end": 9, "elements": [0, 2, 4]}"#).unwrap();
        assert_eq!(a.elements(), &[0, 2, 4]);
        let g: WindowedSet = serde_json::from_str(
            r#"{"generator": {"variant": "Periodic", "q": 2, "R": [0]}, "window_end": 9}"#,
        )
        .unwrap();
        assert_eq!(g.elements(), &[0, 2, 4, 6, 8]);
        let back: WindowedSet = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<WindowedSet>(r#"{"window_end": 3, "elements": [4]}"#).is_err());
        assert!(serde_json::from_str::<WindowedSet>(r#"{"window_end": 3}"#).is_err());
    }
}
