//! Computable shadows of recurrence-set combinatorics for weighted backward
//! shifts.
//!
//! The crate is organised bottom-up:
//!
//! * [`setcalc`]: finite windows `A ∩ [0, W]` of subsets of `Z₊`, their
//!   generators, and exact rational density estimators (prefix, lower/upper,
//!   sliding-window Banach).
//! * [`structure`]: syndetic / thick / piecewise syndetic / thickly syndetic
//!   / `PS^F` detectors that return re-checkable certificates or bounded
//!   refutations.
//! * [`shiftop`]: the unilateral weighted backward shift `B_w` on `c₀` and
//!   `ℓᵖ`, in exact rational and log-space float arithmetic.
//! * [`hcvec`]: the block construction of a vector `y` whose recurrence set
//!   contains a prescribed piecewise syndetic scaffold.
//! * [`lemmacheck`]: seeded property harnesses for the combinatorial lemmas.

pub mod error;
pub mod hcvec;
pub mod lemmacheck;
pub mod rational;
pub mod setcalc;
pub mod shiftop;
pub mod structure;

pub use error::{Error, Result};
pub use hcvec::{Scaffold, TargetSpec};
pub use lemmacheck::HarnessReport;
pub use rational::{Density, Enclosure, Rational};
pub use setcalc::{DensityReport, GeneratorSpec, Schedule, WindowedSet};
pub use shiftop::{
    AnyVector, ExactVector, FloatVector, Mode, RecurrenceResult, SpaceSpec, WeightRule,
    WeightSequence,
};
pub use structure::{Family, StructureCertificate};
