use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use recurlab::shiftop::{Mode, SpaceSpec, WeightSpec};
use recurlab::structure::Family;
use recurlab::Rational;

/// Everything needed to repeat a run. JSON inputs are kept verbatim as
/// given (after `@file` expansion) and every default is filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: CommandConfig,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Cap on exact rationals, in bits.
    pub bit_budget: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Density {
        set: Value,
        n0: usize,
        lengths: Vec<usize>,
    },
    Detect {
        set: Value,
        checks: Vec<Detector>,
        b_max: usize,
        length: usize,
        s_max: usize,
        delta: Rational,
    },
    Orbit {
        weights: WeightSpec,
        x: Value,
        z: Value,
        space: SpaceSpec,
    },
    Recurrence {
        weights: WeightSpec,
        x: Value,
        z: Value,
        eps: Rational,
        space: SpaceSpec,
    },
    Construct {
        weights: WeightSpec,
        m: usize,
        space: SpaceSpec,
        k_max: usize,
        length: usize,
        b_max: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<Value>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        block_gap: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_index: Option<usize>,
    },
    Check(CheckConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Syndetic,
    Thick,
    Ps,
    ThicklySyndetic,
    Psf(Family),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckConfig {
    TwoSyndetic {
        instances: usize,
        delta: Rational,
        b_max: usize,
        length: usize,
    },
    Hindman {
        instances: usize,
        b_max: usize,
        tol: Rational,
    },
    /// Report-only on `set`; otherwise asserted on constructed vectors for
    /// `m = 1, …, instances`.
    Gap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<Value>,
        instances: usize,
        weights: WeightSpec,
    },
    Consecutive {
        instances: usize,
    },
}
