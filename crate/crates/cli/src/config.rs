//! Flat TOML scenario files.
//!
//! Recognized keys: `omega1`, `omega2`, `delta1`, `delta2` (detuning form)
//! or `omega3`, `omega4` (absolute form), `alpha1`, `alpha2`, `gamma`,
//! `nbar`, `t_end`, `num_points`. Values for the second subsystem default to
//! those of the first; `t_end` and `num_points` default to the preset window.
//! In sweep files every model key may also be an array of values or a
//! `{ start, stop, num }` table.

use std::collections::BTreeMap;

use nmq_core::model::ModelParams;
use nmq_core::presets::{Preset, DEFAULT_NUM_POINTS, DEFAULT_T_END, PRESET_OMEGA};
use nmq_core::propagator::TimeGrid;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::CliError;

pub const MODEL_KEYS: [&str; 10] = [
    "omega1", "omega2", "delta1", "delta2", "omega3", "omega4", "alpha1", "alpha2", "gamma", "nbar",
];
pub const GRID_KEYS: [&str; 2] = ["t_end", "num_points"];

/// Largest number of points a sweep may expand to.
pub const SWEEP_CAP: usize = 100_000;

fn config_error(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// A validated simulation request.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: ModelParams,
    pub grid: TimeGrid,
}

impl Scenario {
    pub fn from_preset(p: &Preset) -> Self {
        Self {
            params: p.params(),
            grid: p.grid(),
        }
    }

    /// SHA-256 of the exact bit patterns of every input.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for w in self.params.omegas() {
            h.update(w.to_bits().to_le_bytes());
        }
        for a in self.params.alphas() {
            h.update(a.to_bits().to_le_bytes());
        }
        h.update(self.params.gamma().to_bits().to_le_bytes());
        h.update(self.params.nbar().to_bits().to_le_bytes());
        h.update(self.grid.t_start().to_bits().to_le_bytes());
        h.update(self.grid.t_end().to_bits().to_le_bytes());
        h.update((self.grid.len() as u64).to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_table(text: &str) -> Result<Table, CliError> {
    text.parse::<Table>()
        .map_err(|e| config_error("<syntax>", e.to_string().trim().to_string()))
}

fn check_keys(table: &Table) -> Result<(), CliError> {
    for key in table.keys() {
        if !MODEL_KEYS.contains(&key.as_str()) && !GRID_KEYS.contains(&key.as_str()) {
            return Err(config_error(key, "unknown key"));
        }
    }
    Ok(())
}

fn number(key: &str, v: &Value) -> Result<f64, CliError> {
    let x = match v {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        other => {
            return Err(config_error(
                key,
                format!("expected a number, got {}", other.type_str()),
            ))
        }
    };
    if !x.is_finite() {
        return Err(config_error(key, "must be finite"));
    }
    Ok(x)
}

fn values(key: &str, v: &Value) -> Result<Vec<f64>, CliError> {
    match v {
        Value::Array(items) => {
            if items.is_empty() {
                return Err(config_error(key, "empty value list"));
            }
            items.iter().map(|x| number(key, x)).collect()
        }
        Value::Table(range) => {
            for k in range.keys() {
                if !["start", "stop", "num"].contains(&k.as_str()) {
                    return Err(config_error(key, format!("unknown range field `{k}`")));
                }
            }
            let get = |f: &str| {
                range
                    .get(f)
                    .ok_or_else(|| config_error(key, format!("range is missing `{f}`")))
            };
            let start = number(key, get("start")?)?;
            let stop = number(key, get("stop")?)?;
            let num = match get("num")? {
                Value::Integer(n) if *n >= 1 => *n as usize,
                _ => return Err(config_error(key, "range `num` must be a positive integer")),
            };
            if num == 1 {
                if start != stop {
                    return Err(config_error(key, "a one-point range needs start == stop"));
                }
                return Ok(vec![start]);
            }
            let step = (stop - start) / (num - 1) as f64;
            Ok((0..num)
                .map(|i| {
                    if i == num - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect())
        }
        other => Ok(vec![number(key, other)?]),
    }
}

fn grid_from(table: &Table) -> Result<TimeGrid, CliError> {
    let t_end = match table.get("t_end") {
        Some(v) => number("t_end", v)?,
        None => DEFAULT_T_END,
    };
    let num_points = match table.get("num_points") {
        Some(Value::Integer(n)) if *n >= 0 => *n as usize,
        Some(_) => return Err(config_error("num_points", "must be a non-negative integer")),
        None => DEFAULT_NUM_POINTS,
    };
    if num_points == 0 {
        return Err(config_error(
            "num_points",
            "grid must have at least one point",
        ));
    }
    if num_points == 1 && t_end != 0.0 {
        return Err(config_error(
            "num_points",
            "a one-point grid needs t_end = 0",
        ));
    }
    if t_end < 0.0 {
        return Err(config_error("t_end", "must be >= 0"));
    }
    TimeGrid::uniform(0.0, t_end, num_points).map_err(|e| config_error("t_end", e.to_string()))
}

/// Model parameters from one point of scalar values, applying the
/// second-subsystem defaults and the detuning/absolute exclusivity rule.
pub fn params_from(point: &BTreeMap<String, f64>) -> Result<ModelParams, CliError> {
    let get = |k: &str| point.get(k).copied();
    let require = |k: &str| get(k).ok_or_else(|| config_error(k, "required key is missing"));

    let omega1 = get("omega1").unwrap_or(PRESET_OMEGA);
    let omega2 = get("omega2").unwrap_or(omega1);
    let detuning_form = get("delta1").is_some() || get("delta2").is_some();
    let absolute_form = get("omega3").is_some() || get("omega4").is_some();
    let (omega3, omega4) = match (detuning_form, absolute_form) {
        (true, true) => {
            let key = if get("omega3").is_some() {
                "omega3"
            } else {
                "omega4"
            };
            return Err(config_error(
                key,
                "detunings (delta1/delta2) and partner frequencies (omega3/omega4) are mutually exclusive",
            ));
        }
        (false, false) => {
            return Err(config_error(
                "delta1",
                "either delta1/delta2 or omega3/omega4 must be given",
            ))
        }
        (true, false) => {
            let d1 = require("delta1")?;
            let d2 = get("delta2").unwrap_or(d1);
            (omega1 - d1, omega2 - d2)
        }
        (false, true) => {
            let w3 = require("omega3")?;
            (w3, get("omega4").unwrap_or(w3))
        }
    };
    let alpha1 = require("alpha1")?;
    let alpha2 = get("alpha2").unwrap_or(alpha1);
    let gamma = require("gamma")?;
    let nbar = require("nbar")?;
    ModelParams::new(
        [omega1, omega2, omega3, omega4],
        [alpha1, alpha2],
        gamma,
        nbar,
    )
    .map_err(|e| match e {
        nmq_core::Error::Domain { name, reason } => config_error(name, reason),
        other => config_error("<parameters>", other.to_string()),
    })
}

/// Parses a single-scenario config.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let table = parse_table(text)?;
    check_keys(&table)?;
    let mut point = BTreeMap::new();
    for key in MODEL_KEYS {
        if let Some(v) = table.get(key) {
            point.insert(key.to_string(), number(key, v)?);
        }
    }
    Ok(Scenario {
        params: params_from(&point)?,
        grid: grid_from(&table)?,
    })
}

/// A sweep: the cross product of every listed model key.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axes: Vec<(String, Vec<f64>)>,
    pub grid: TimeGrid,
}

impl SweepSpec {
    pub fn size(&self) -> usize {
        self.axes
            .iter()
            .fold(1usize, |acc, (_, v)| acc.saturating_mul(v.len()))
    }

    /// All points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        let mut out = vec![BTreeMap::new()];
        for (key, vals) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec, CliError> {
    let table = parse_table(text)?;
    check_keys(&table)?;
    let mut axes = Vec::new();
    for key in MODEL_KEYS {
        if let Some(v) = table.get(key) {
            axes.push((key.to_string(), values(key, v)?));
        }
    }
    let spec = SweepSpec {
        axes,
        grid: grid_from(&table)?,
    };
    let size = spec.size();
    if size > SWEEP_CAP {
        return Err(config_error(
            "<sweep>",
            format!("{size} parameter points exceed the cap of {SWEEP_CAP}"),
        ));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str =
        "omega1 = 10\ndelta1 = 0\ndelta2 = 0\nalpha1 = 2\nalpha2 = 2\ngamma = 0.5\nnbar = 0\n";

    #[test]
    fn detuning_form() {
        let s = parse_scenario(FIG3).unwrap();
        assert_eq!(s.params.omegas(), [10.0, 10.0, 10.0, 10.0]);
        assert_eq!(s.grid.len(), DEFAULT_NUM_POINTS);
        assert_eq!(s.grid.t_end(), DEFAULT_T_END);
    }

    #[test]
    fn absolute_form_and_defaults() {
        let s = parse_scenario("omega1 = 10\nomega2 = 9\nomega3 = 8\nalpha1 = 1\ngamma = 1\nnbar = 0.1\nt_end = 2\nnum_points = 5").unwrap();
        assert_eq!(s.params.omegas(), [10.0, 9.0, 8.0, 8.0]);
        assert_eq!(s.params.alphas(), [1.0, 1.0]);
        assert_eq!(s.grid.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn rejects_mixed_forms_and_unknown_keys() {
        let mixed = format!("{FIG3}omega3 = 9\n");
        assert!(
            matches!(parse_scenario(&mixed), Err(CliError::Config { key, .. }) if key == "omega3")
        );
        let unknown = format!("{FIG3}beta = 1\n");
        assert!(
            matches!(parse_scenario(&unknown), Err(CliError::Config { key, .. }) if key == "beta")
        );
        let empty_grid = format!("{FIG3}num_points = 0\n");
        assert!(
            matches!(parse_scenario(&empty_grid), Err(CliError::Config { key, .. }) if key == "num_points")
        );
        let negative = FIG3.replace("gamma = 0.5", "gamma = -1");
        assert!(
            matches!(parse_scenario(&negative), Err(CliError::Config { key, .. }) if key == "gamma")
        );
    }

    #[test]
    fn sweep_expansion_and_cap() {
        let spec = parse_sweep("delta1 = 0\nalpha1 = [0.5, 2, 5]\ngamma = { start = 0.1, stop = 0.5, num = 5 }\nnbar = 0.2").unwrap();
        assert_eq!(spec.size(), 15);
        let pts = spec.points();
        assert_eq!(pts.len(), 15);
        assert_eq!(pts[0]["alpha1"], 0.5);
        assert_eq!(pts[4]["gamma"], 0.5);
        assert_eq!(pts[5]["alpha1"], 2.0);

        let huge = "delta1 = 0\nalpha1 = { start = 0, stop = 1, num = 1000 }\ngamma = { start = 0, stop = 1, num = 1000 }\nnbar = 0";
        assert!(matches!(parse_sweep(huge), Err(CliError::Config { .. })));
    }

    #[test]
    fn hash_is_deterministic_and_sensitive() {
        let a = parse_scenario(FIG3).unwrap();
        let b = parse_scenario(FIG3).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = parse_scenario(&FIG3.replace("nbar = 0", "nbar = 0.2")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
