use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use recurlab::hcvec::{construct_pipeline, PipelineConfig};
use recurlab::lemmacheck::{
    check_consecutive_fuzz, check_density_gap, check_hindman_inequality, check_two_syndetic_lemma,
};
use recurlab::setcalc::{density_report, materialize};
use recurlab::shiftop::{orbit_trace, recurrence_set, TracePoint, WeightSpec};
use recurlab::structure::{
    ps_certificate, psf_certificate, syndetic_bound, thick_certificate, thickly_syndetic_certificate,
};
use recurlab::{AnyVector, ExactVector, WeightSequence, WindowedSet};

use crate::config::{CheckConfig, CommandConfig, Detector, RunConfig};
use crate::input::{typed, CliError};

/// Rows for the optional CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

pub const DENSITY_COLUMNS: &[&str] = &["n", "num", "den"];
pub const TRACE_COLUMNS: &[&str] = &["n", "distance_lo", "distance_hi"];

#[derive(Clone, Debug, PartialEq)]
pub struct Finished {
    pub result: Value,
    /// False when an asserted property failed.
    pub passed: bool,
    pub table: Option<Table>,
}

impl Finished {
    fn report(result: Value) -> Self {
        Finished {
            result,
            passed: true,
            table: None,
        }
    }

    pub fn document(&self, config: &RunConfig) -> Value {
        json!({"config": config, "passed": self.passed, "result": self.result})
    }

    /// JSON to `--out` or stdout, and the table to `--csv`.
    pub fn write(&self, config: &RunConfig) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(&self.document(config)).expect("JSON values serialize");
        text.push('\n');
        match &config.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        if let (Some(path), Some(table)) = (&config.csv, &self.table) {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Ok(())
    }
}

fn value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("result types serialize to JSON")
}

fn note(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

/// Resizes a set to `window`: generated sets are rebuilt, explicit ones
/// truncated or padded with non-members.
pub fn rewindow(a: WindowedSet, window: Option<usize>) -> Result<WindowedSet, CliError> {
    let Some(w) = window else { return Ok(a) };
    if let Some(g) = a.generator() {
        return Ok(materialize(g, w)?);
    }
    Ok(if w <= a.window_end() { a.truncate(w)? } else { a.widen(w)? })
}

fn load_set(v: &Value, window: Option<usize>) -> Result<WindowedSet, CliError> {
    rewindow(typed::<WindowedSet>("--set", v)?, window)
}

fn trace_table(trace: &[TracePoint]) -> Table {
    Table {
        header: TRACE_COLUMNS,
        rows: trace
            .iter()
            .map(|p| vec![p.n.to_string(), p.distance_lo.to_string(), p.distance_hi.to_string()])
            .collect(),
    }
}

struct OrbitInputs {
    w: WeightSequence,
    x: ExactVector,
    z: ExactVector,
}

fn orbit_inputs(config: &RunConfig, weights: &WeightSpec, x: &Value, z: &Value) -> Result<OrbitInputs, CliError> {
    let x = typed::<AnyVector>("--x", x)?.to_exact();
    let z = typed::<AnyVector>("--z", z)?.to_exact();
    // Bⁿx reads weights up to x's top index; B z is needed for disjointness.
    let horizon = x.max_index().unwrap_or(0).max(z.max_index().unwrap_or(0)) + 1;
    let w = WeightSequence::from_spec(weights, horizon)?.with_bit_budget(config.bit_budget);
    Ok(OrbitInputs { w, x, z })
}

pub fn execute(config: &RunConfig) -> Result<Finished, CliError> {
    let tabular = matches!(
        config.command,
        CommandConfig::Density { .. } | CommandConfig::Orbit { .. } | CommandConfig::Recurrence { .. }
    );
    if config.csv.is_some() && !tabular {
        return Err(CliError::Usage(
            "--csv is written only by density, orbit and recurrence".into(),
        ));
    }
    let window = config.window;
    match &config.command {
        CommandConfig::Density { set, n0, lengths } => {
            let a = load_set(set, window)?;
            let r = density_report(&a, *n0, lengths)?;
            note(&format!(
                "lower {} upper {} banach {} on [0, {}]",
                r.lower_estimate,
                r.upper_estimate,
                r.banach_estimate,
                a.window_end()
            ));
            let table = Table {
                header: DENSITY_COLUMNS,
                rows: r
                    .prefix_profile
                    .iter()
                    .map(|p| vec![p.n.to_string(), p.density.numer().to_string(), p.density.denom().to_string()])
                    .collect(),
            };
            Ok(Finished {
                table: Some(table),
                ..Finished::report(value(&r))
            })
        }
        CommandConfig::Detect {
            set,
            checks,
            b_max,
            length,
            s_max,
            delta,
        } => {
            let a = load_set(set, window)?;
            let mut out = Vec::new();
            for d in checks {
                let cert = match d {
                    Detector::Syndetic => syndetic_bound(&a, *b_max),
                    Detector::Thick => thick_certificate(&a, *length)?,
                    Detector::Ps => ps_certificate(&a, *b_max, *length)?,
                    Detector::ThicklySyndetic => thickly_syndetic_certificate(&a, *length, *s_max)?,
                    Detector::Psf(family) => psf_certificate(&a, *family, delta, *b_max, *length)?,
                };
                note(&cert.summary());
                out.push(json!({"detector": d, "certificate": cert}));
            }
            Ok(Finished::report(Value::Array(out)))
        }
        CommandConfig::Orbit { weights, x, z, space } => {
            let o = orbit_inputs(config, weights, x, z)?;
            let n_max = window.unwrap_or(0);
            let trace = orbit_trace(&o.w, &o.x, &o.z, space, n_max, config.mode)?;
            Ok(Finished {
                table: Some(trace_table(&trace)),
                ..Finished::report(value(&trace))
            })
        }
        CommandConfig::Recurrence {
            weights,
            x,
            z,
            eps,
            space,
        } => {
            let o = orbit_inputs(config, weights, x, z)?;
            let w_end = window.unwrap_or(0);
            let r = recurrence_set(&o.w, &o.x, &o.z, eps.inner(), space, w_end, config.mode)?;
            note(&format!(
                "{} returns in [0, {w_end}], disjointness {}",
                r.returns.len(),
                if r.disjointness_certified { "certified" } else { "not certified" }
            ));
            let table = match config.csv {
                Some(_) => Some(trace_table(&orbit_trace(&o.w, &o.x, &o.z, space, w_end, config.mode)?)),
                None => None,
            };
            Ok(Finished {
                table,
                ..Finished::report(value(&r))
            })
        }
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
        } => {
            let source = source.as_ref().map(|v| typed("--source", v)).transpose()?;
            let pc = PipelineConfig {
                weights: weights.clone(),
                m: *m,
                window_end: window.unwrap_or(10_000),
                space: space.clone(),
                source,
                k_max: *k_max,
                block_gap: *block_gap,
                length: *length,
                b_max: *b_max,
                target_index: *target_index,
            };
            let r = construct_pipeline(&pc)?;
            note(&format!(
                "giotto {} membership {} scaffold contained {} returns {}",
                r.giotto.all_pass,
                r.membership.all_within,
                r.contains_scaffold,
                r.recurrence_certificate.summary()
            ));
            Ok(Finished {
                passed: r.passed(),
                ..Finished::report(value(&r))
            })
        }
        CommandConfig::Check(c) => check(config, c),
    }
}

fn check(config: &RunConfig, c: &CheckConfig) -> Result<Finished, CliError> {
    let w = config.window.unwrap_or(0);
    let seed = config.seed.unwrap_or(0);
    let (result, passed) = match c {
        CheckConfig::TwoSyndetic {
            instances,
            delta,
            b_max,
            length,
        } => {
            let r = check_two_syndetic_lemma(*instances, w, delta.inner(), *b_max, *length, seed)?;
            let ok = r.all_passed() && r.instances == *instances;
            note(&format!("two-syndetic: {}/{} pass, {} skipped", r.passes, instances, r.skipped));
            (value(&r), ok)
        }
        CheckConfig::Hindman { instances, b_max, tol } => {
            let r = check_hindman_inequality(*instances, w, *b_max, tol.inner(), seed)?;
            let ok = r.all_passed() && r.instances == *instances;
            note(&format!("hindman: {}/{} pass, {} skipped", r.passes, instances, r.skipped));
            (value(&r), ok)
        }
        CheckConfig::Consecutive { instances } => {
            let r = check_consecutive_fuzz(*instances, w, seed)?;
            let ok = r.failures.is_empty() && r.passes == *instances;
            note(&format!("consecutive: {}/{} pass, {} skipped", r.passes, instances, r.skipped));
            (value(&r), ok)
        }
        CheckConfig::Gap {
            set: Some(set),
            ..
        } => {
            let a = load_set(set, config.window)?;
            let unit = a.window_end() / 16;
            let g = check_density_gap(&a, unit, unit, None)?;
            note(&format!("gap: lower {} banach {} (report only)", g.lower, g.banach));
            (value(&g), true)
        }
        CheckConfig::Gap {
            set: None,
            instances,
            weights,
        } => {
            let mut rows = Vec::new();
            let mut ok = true;
            for m in 1..=*instances {
                let r = construct_pipeline(&PipelineConfig::new(weights.clone(), m, w))?;
                let holds = r.passed() && r.density_gap.asserted && r.density_gap.holds == Some(true);
                ok &= holds;
                note(&format!(
                    "gap m={m}: lower {} banach {} {}",
                    r.density_gap.lower,
                    r.density_gap.banach,
                    if holds { "strict" } else { "not established" }
                ));
                rows.push(json!({"m": m, "pipeline_passed": r.passed(), "density_gap": r.density_gap}));
            }
            (Value::Array(rows), ok)
        }
    };
    Ok(Finished {
        passed,
        ..Finished::report(result)
    })
}
