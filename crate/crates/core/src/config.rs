//! TOML run configuration.
//!
//! ```toml
//! delta_phi_deg = 4.0
//! theta = 0.5
//! c = 0.4
//! n_blocks = 7          # default 7
//! tau = 1.0             # default 1
//! n_realizations = 100  # default 100
//! seed = 1              # required
//! shots_per_sequence = 200  # optional binomial layer
//!
//! [sweep]
//! thetas = [0.0, 0.5, 1.0]
//! ```
//!
//! The angle may be given in radians as `delta_phi` instead; output headers
//! use that form only when the degree value would not round-trip exactly.

use std::fmt::Write as _;

use toml::{Table, Value};

use crate::analytic::{validity_check, Validity, DEFAULT_VALIDITY_EPSILON};
use crate::error::{Error, Result};
use crate::montecarlo::ExperimentConfig;
use crate::noise::CorrelationParameter;
use crate::polarization::MeasurementStrength;

const TOP_KEYS: &[&str] = &[
    "delta_phi_deg",
    "delta_phi",
    "theta",
    "c",
    "n_blocks",
    "tau",
    "n_realizations",
    "seed",
    "shots_per_sequence",
    "sweep",
];
const SWEEP_KEYS: &[&str] = &["thetas"];

/// Parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub sweep_thetas: Option<Vec<MeasurementStrength>>,
    pub validity: Validity,
}

fn number(table: &Table, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(Error::Config(format!("`{key}` must be a number, found {}", other.type_str()))),
    }
}

fn count(table: &Table, key: &'static str) -> Result<Option<u64>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
        Some(Value::Integer(i)) => Err(Error::domain(key, *i as f64, "must be a non-negative integer")),
        Some(other) => Err(Error::Config(format!("`{key}` must be an integer, found {}", other.type_str()))),
    }
}

/// Seeds above `i64::MAX` do not fit a TOML integer and may be quoted.
fn seed(table: &Table) -> Result<u64> {
    match table.get("seed") {
        None => Err(Error::Config("`seed` is required".into())),
        Some(Value::Integer(i)) if *i >= 0 => Ok(*i as u64),
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| Error::Config(format!("`seed` string `{s}` is not an unsigned integer"))),
        Some(other) => Err(Error::Config(format!("`seed` must be a non-negative integer, found {other}"))),
    }
}

fn unknown_keys(table: &Table, allowed: &[&str], prefix: &str, out: &mut Vec<String>) {
    out.extend(
        table
            .keys()
            .filter(|k| !allowed.contains(&k.as_str()))
            .map(|k| format!("{prefix}{k}")),
    );
}

fn required(table: &Table, key: &str) -> Result<f64> {
    number(table, key)?.ok_or_else(|| Error::Config(format!("`{key}` is required")))
}

/// Builds a run configuration from an already-parsed TOML table.
pub fn run_config_from_table(table: &Table) -> Result<RunConfig> {
    let mut unknown = Vec::new();
    unknown_keys(table, TOP_KEYS, "", &mut unknown);
    let sweep = match table.get("sweep") {
        None => None,
        Some(Value::Table(t)) => {
            unknown_keys(t, SWEEP_KEYS, "sweep.", &mut unknown);
            Some(t)
        }
        Some(_) => return Err(Error::Config("`sweep` must be a table".into())),
    };
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }

    let delta_phi = match (number(table, "delta_phi_deg")?, number(table, "delta_phi")?) {
        (Some(deg), None) => deg.to_radians(),
        (None, Some(rad)) => rad,
        (Some(_), Some(_)) => return Err(Error::Config("give only one of `delta_phi_deg` and `delta_phi`".into())),
        (None, None) => return Err(Error::Config("`delta_phi_deg` is required".into())),
    };
    let theta = MeasurementStrength::new(required(table, "theta")?)?;
    let c = CorrelationParameter::new(required(table, "c")?)?;
    let mut experiment = ExperimentConfig::new(delta_phi, theta, c, seed(table)?);
    if let Some(n) = count(table, "n_blocks")? {
        experiment.n_blocks = n as usize;
    }
    if let Some(tau) = number(table, "tau")? {
        experiment.tau = tau;
    }
    if let Some(m) = count(table, "n_realizations")? {
        experiment.n_realizations = m as usize;
    }
    experiment.shots_per_sequence = count(table, "shots_per_sequence")?;
    experiment.validate()?;

    let sweep_thetas = match sweep.and_then(|t| t.get("thetas")) {
        None => None,
        Some(Value::Array(items)) => Some(
            items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => MeasurementStrength::new(*x),
                    Value::Integer(i) => MeasurementStrength::new(*i as f64),
                    other => Err(Error::Config(format!("sweep.thetas entries must be numbers, found {other}"))),
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(Error::Config("`sweep.thetas` must be an array".into())),
    };

    let validity = validity_check(delta_phi, c, theta, DEFAULT_VALIDITY_EPSILON);
    if !validity.valid {
        log::warn!(
            "small-jump condition fails: delta_phi^2 / ((1 - C)(1 - C theta)) = {:.4e} exceeds {}; closed-form predictions are unreliable",
            validity.ratio,
            validity.epsilon
        );
    }
    Ok(RunConfig {
        experiment,
        sweep_thetas,
        validity,
    })
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    run_config_from_table(&table)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    Ok(parse_run_config(text)?.experiment)
}

/// Shortest decimal form that parses back to the same bits.
pub(crate) fn toml_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn toml_seed(seed: u64) -> String {
    if seed <= i64::MAX as u64 {
        seed.to_string()
    } else {
        format!("\"{seed}\"")
    }
}

/// TOML form of a config; parsing it back gives the same config bit for bit.
pub fn to_toml(config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let deg = config.delta_phi.to_degrees();
    if deg.to_radians().to_bits() == config.delta_phi.to_bits() {
        let _ = writeln!(s, "delta_phi_deg = {}", toml_float(deg));
    } else {
        let _ = writeln!(s, "delta_phi = {}", toml_float(config.delta_phi));
    }
    let _ = writeln!(s, "theta = {}", toml_float(config.theta.value()));
    let _ = writeln!(s, "c = {}", toml_float(config.c.value()));
    let _ = writeln!(s, "n_blocks = {}", config.n_blocks);
    let _ = writeln!(s, "tau = {}", toml_float(config.tau));
    let _ = writeln!(s, "n_realizations = {}", config.n_realizations);
    let _ = writeln!(s, "seed = {}", toml_seed(config.seed));
    if let Some(shots) = config.shots_per_sequence {
        let _ = writeln!(s, "shots_per_sequence = {shots}");
    }
    s
}
