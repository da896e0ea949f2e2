//! The `recurlab` command line: argument parsing, the echoed [`RunConfig`],
//! and JSON/CSV output.
//!
//! Every run prints `{"config": …, "passed": …, "result": …}`. Feeding that
//! document (or just its `config`) to `recurlab replay` repeats the run.

pub mod config;
pub mod exec;
pub mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use recurlab::shiftop::{Mode, SpaceSpec, WeightSpec};
use recurlab::structure::Family;
use recurlab::{AnyVector, GeneratorSpec, Rational, WindowedSet};

pub use config::{CheckConfig, CommandConfig, Detector, RunConfig};
pub use exec::{execute, Finished};
pub use input::CliError;

use input::{load_checked, load_json, load_typed};

#[derive(Parser, Debug)]
#[command(name = "recurlab", version, about = "Recurrence sets of weighted backward shifts, computed on finite windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Arithmetic for orbit computations.
    #[arg(long, global = true, default_value = "exact")]
    pub mode: Mode,
    /// Window end `W`. Defaults depend on the command.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Profile data for plotting (density, orbit, recurrence).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prefix, lower/upper and Banach density estimates of a set.
    Density {
        /// Set JSON, or `@path`.
        #[arg(long)]
        set: String,
        /// Start of the lower/upper scan; `W/16` by default.
        #[arg(long)]
        n0: Option<usize>,
        /// Banach window lengths, comma separated; `W/16` by default.
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<usize>,
    },
    /// Structure certificates or bounded refutations. Without a detector
    /// flag, runs syndetic, thick and piecewise syndetic.
    Detect {
        #[arg(long)]
        set: String,
        #[arg(long)]
        syndetic: bool,
        #[arg(long)]
        thick: bool,
        #[arg(long)]
        ps: bool,
        #[arg(long)]
        thickly_syndetic: bool,
        /// `PS^F` for a density family: lower, upper or banach.
        #[arg(long)]
        psf: Vec<Family>,
        #[arg(long = "bmax", default_value_t = 16)]
        b_max: usize,
        #[arg(long = "L", default_value_t = 64)]
        length: usize,
        #[arg(long = "smax", default_value_t = 64)]
        s_max: usize,
        #[arg(long, default_value = "1/10")]
        delta: Rational,
    },
    /// Distance enclosures `‖Bⁿx − z‖` for `n ∈ [0, W]`.
    Orbit {
        #[command(flatten)]
        orbit: OrbitArgs,
    },
    /// The return set `N(x, U)` on `[0, W]` for the closed ball of radius `eps` around `z`.
    Recurrence {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        eps: Rational,
    },
    /// Build `y` from a piecewise syndetic scaffold and verify its returns to `U_m`.
    Construct {
        #[arg(long)]
        weights: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "l2")]
        space: SpaceSpec,
        #[arg(long, default_value_t = 40)]
        k_max: usize,
        #[arg(long = "L", default_value_t = 64)]
        length: usize,
        #[arg(long = "bmax", default_value_t = 64)]
        b_max: usize,
        /// Generator JSON of the source set; multiples of `2m` by default.
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        block_gap: Option<usize>,
        #[arg(long)]
        target_index: Option<usize>,
    },
    /// Seeded lemma harnesses; exit 1 when any instance fails.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Re-run a previous output document or a bare config.
    Replay {
        /// JSON, or `@path`.
        source: String,
    },
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long)]
    pub weights: String,
    /// Vector JSON `{"coords": {"5": "1/32"}}`, or `@path`.
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub z: String,
    #[arg(long, default_value = "l2")]
    pub space: SpaceSpec,
}

#[derive(Subcommand, Debug)]
pub enum CheckKind {
    /// A with a 2-syndetic complement and Banach density `≥ δ` is piecewise syndetic.
    TwoSyndetic {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value = "1/10")]
        delta: Rational,
        #[arg(long = "bmax", default_value_t = 32)]
        b_max: usize,
        #[arg(long = "L", default_value_t = 128)]
        length: usize,
    },
    /// Some `b` lifts the upper density of `∪_{t ≤ b} (A − t)` to `α/γ`.
    Hindman {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long = "bmax", default_value_t = 64)]
        b_max: usize,
        #[arg(long, default_value = "1/20")]
        tol: Rational,
    },
    /// Lower versus Banach density of `N(y, U_m)` for `m = 1, …, instances`;
    /// with `--set`, a report on that set alone.
    Gap {
        #[arg(long, default_value_t = 3)]
        instances: usize,
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value = r#"{"rule":"const","value":"2"}"#)]
        weights: String,
    },
    /// Certified-disjoint balls are never hit at two consecutive times.
    Consecutive {
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
}

impl Cli {
    /// Resolves every default into a [`RunConfig`]. Not for `replay`, whose
    /// config comes from the given document.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let window_default = |w: usize| Some(self.window.unwrap_or(w));
        let (command, window, seed) = match self.command {
            Command::Density { set, n0, lengths } => {
                let (set, a) = load_checked::<WindowedSet>("--set", &set)?;
                let w = exec::rewindow(a, self.window)?.window_end();
                let n0 = n0.unwrap_or(w / 16);
                let lengths = if lengths.is_empty() { vec![w / 16] } else { lengths };
                (CommandConfig::Density { set, n0, lengths }, self.window, None)
            }
            Command::Detect {
                set,
                syndetic,
                thick,
                ps,
                thickly_syndetic,
                psf,
                b_max,
                length,
                s_max,
                delta,
            } => {
                let mut checks = Vec::new();
                for (on, d) in [
                    (syndetic, Detector::Syndetic),
                    (thick, Detector::Thick),
                    (ps, Detector::Ps),
                    (thickly_syndetic, Detector::ThicklySyndetic),
                ] {
                    if on {
                        checks.push(d);
                    }
                }
                checks.extend(psf.into_iter().map(Detector::Psf));
                if checks.is_empty() {
                    checks = vec![Detector::Syndetic, Detector::Thick, Detector::Ps];
                }
                let (set, _) = load_checked::<WindowedSet>("--set", &set)?;
                (
                    CommandConfig::Detect {
                        set,
                        checks,
                        b_max,
                        length,
                        s_max,
                        delta,
                    },
                    self.window,
                    None,
                )
            }
            Command::Orbit { orbit } => {
                let (weights, x, z, space) = orbit.load()?;
                (CommandConfig::Orbit { weights, x, z, space }, window_default(1000), None)
            }
            Command::Recurrence { orbit, eps } => {
                let (weights, x, z, space) = orbit.load()?;
                (
                    CommandConfig::Recurrence {
                        weights,
                        x,
                        z,
                        eps,
                        space,
                    },
                    window_default(1000),
                    None,
                )
            }
            Command::Construct {
                weights,
                m,
                space,
                k_max,
                length,
                b_max,
                source,
                block_gap,
                target_index,
            } => {
                if self.mode == Mode::Float {
                    return Err(CliError::Usage(
                        "construct verifies membership exactly; --mode float is not supported".into(),
                    ));
                }
                let weights = load_typed::<WeightSpec>("--weights", &weights)?;
                let source = source
                    .map(|s| load_checked::<GeneratorSpec>("--source", &s).map(|(v, _)| v))
                    .transpose()?;
                (
                    CommandConfig::Construct {
                        weights,
                        m,
                        space,
                        k_max,
                        length,
                        b_max,
                        source,
                        block_gap,
                        target_index,
                    },
                    window_default(10_000),
                    None,
                )
            }
            Command::Check { kind } => {
                let seed = Some(self.seed.unwrap_or(0));
                let (check, w) = match kind {
                    CheckKind::TwoSyndetic {
                        instances,
                        delta,
                        b_max,
                        length,
                    } => (
                        CheckConfig::TwoSyndetic {
                            instances,
                            delta,
                            b_max,
                            length,
                        },
                        window_default(100_000),
                    ),
                    CheckKind::Hindman { instances, b_max, tol } => {
                        (CheckConfig::Hindman { instances, b_max, tol }, window_default(100_000))
                    }
                    CheckKind::Gap { instances, set, weights } => {
                        let weights = load_typed::<WeightSpec>("--weights", &weights)?;
                        let set = set
                            .map(|s| load_checked::<WindowedSet>("--set", &s).map(|(v, _)| v))
                            .transpose()?;
                        let w = if set.is_some() { self.window } else { window_default(10_000) };
                        (CheckConfig::Gap { set, instances, weights }, w)
                    }
                    CheckKind::Consecutive { instances } => {
                        (CheckConfig::Consecutive { instances }, window_default(10_000))
                    }
                };
                (CommandConfig::Check(check), w, seed)
            }
            Command::Replay { .. } => unreachable!("replay is resolved by run"),
        };
        Ok(RunConfig {
            command,
            mode: self.mode,
            window,
            seed,
            out: self.out,
            csv: self.csv,
            bit_budget: recurlab::rational::bit_budget(),
        })
    }
}

impl OrbitArgs {
    fn load(self) -> Result<(WeightSpec, Value, Value, SpaceSpec), CliError> {
        let weights = load_typed::<WeightSpec>("--weights", &self.weights)?;
        let (x, _) = load_checked::<AnyVector>("--x", &self.x)?;
        let (z, _) = load_checked::<AnyVector>("--z", &self.z)?;
        Ok((weights, x, z, self.space))
    }
}

/// A replay document is either a full output (with a `config` key) or a
/// bare config.
fn replay_config(source: &str) -> Result<RunConfig, CliError> {
    let doc = load_json("replay", source)?;
    let config = match doc.get("config") {
        Some(c) => c.clone(),
        None => doc,
    };
    input::typed::<RunConfig>("replay", &config)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_cli(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: Cli) -> Result<bool, CliError> {
    let config = match &cli.command {
        Command::Replay { source } => {
            let config = replay_config(source)?;
            // The budget is read once, on first use, so it is pinned before
            // any library call.
            std::env::set_var(recurlab::rational::BIT_BUDGET_ENV, config.bit_budget.to_string());
            config
        }
        _ => cli.into_config()?,
    };
    let finished = execute(&config)?;
    finished.write(&config)?;
    Ok(finished.passed)
}
