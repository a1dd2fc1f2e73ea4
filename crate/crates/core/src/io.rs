//! Output files: a `# `-prefixed TOML header followed by a CSV data section.
//!
//! Every header carries the format version, the generator identity and the
//! fully resolved configuration, so a file can be regenerated from itself.
//! Numbers are written as `{:.16e}` (17 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::config::{run_config_from_table, to_toml, RunConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{ExperimentConfig, SurvivalCurve};
use crate::noise::GENERATOR_ID;
use crate::spectra::SpectrumGrid;

pub const FORMAT_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Analyze,
    Spectra,
    ReproduceFig3,
    ReproduceFig4,
    ReproduceFigA,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Analyze => "analyze",
            Command::Spectra => "spectra",
            Command::ReproduceFig3 => "reproduce-fig3",
            Command::ReproduceFig4 => "reproduce-fig4",
            Command::ReproduceFigA => "reproduce-figA",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Command::Simulate,
            Command::Analyze,
            Command::Spectra,
            Command::ReproduceFig3,
            Command::ReproduceFig4,
            Command::ReproduceFigA,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
    }
}

/// What produced a file: command, resolved configuration and format version.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    /// TOML tables describing the run, e.g. `[config]` or `[preset]`.
    pub body: String,
    pub output_path: PathBuf,
    pub format_version: &'static str,
}

impl RunManifest {
    pub fn new(command: Command, body: String, output_path: impl Into<PathBuf>) -> Self {
        Self {
            command,
            body,
            output_path: output_path.into(),
            format_version: FORMAT_VERSION,
        }
    }

    /// Manifest whose body is a single `[config]` table.
    pub fn for_config(command: Command, config: &ExperimentConfig, output_path: impl Into<PathBuf>) -> Self {
        Self::new(command, format!("[config]\n{}", to_toml(config)), output_path)
    }

    pub fn header(&self) -> String {
        let mut toml = String::new();
        let _ = writeln!(toml, "format_version = \"{}\"", self.format_version);
        let _ = writeln!(toml, "command = \"{}\"", self.command.as_str());
        let _ = writeln!(toml, "generator = \"{GENERATOR_ID}\"");
        let _ = writeln!(toml, "output = {}", Value::String(self.output_path.display().to_string()));
        toml.push_str(&self.body);
        toml.lines().map(|l| format!("# {l}\n")).collect()
    }
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Data section of a survival curve file.
pub fn survival_csv(curve: &SurvivalCurve) -> String {
    let mut s = String::from("k,t_k,mean,std,n_realizations\n");
    for k in 0..curve.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            k + 1,
            fmt_num(curve.times[k]),
            fmt_num(curve.mean[k]),
            fmt_num(curve.std[k]),
            curve.n_realizations
        );
    }
    s
}

/// Data section of a spectrum grid in long form: parameter, omega, value.
pub fn spectrum_grid_csv(grid: &SpectrumGrid) -> String {
    let mut s = format!("{},omega,{}\n", grid.kind.parameter_name(), grid.kind.identifier());
    for (p, row) in grid.parameters.iter().zip(&grid.rows) {
        for (w, v) in grid.omegas.iter().zip(row) {
            let _ = writeln!(s, "{},{},{}", fmt_num(*p), fmt_num(*w), fmt_num(*v));
        }
    }
    s
}

pub fn write_output(manifest: &RunManifest, data: &str) -> Result<()> {
    let path = &manifest.output_path;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = manifest.header();
    text.push_str(data);
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Splits a file into its header (prefix stripped) and data section.
pub fn split_header(text: &str) -> (String, &str) {
    let mut header = String::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        match line.strip_prefix('#') {
            Some(rest) => {
                header.push_str(rest.strip_prefix(' ').unwrap_or(rest));
                offset += line.len();
            }
            None => break,
        }
    }
    (header, &text[offset..])
}

pub fn parse_header(text: &str) -> Result<Table> {
    let (header, _) = split_header(text);
    header
        .parse()
        .map_err(|e: toml::de::Error| Error::Invalid(format!("file header is not valid TOML: {e}")))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// A survival curve file read back: header and curve.
#[derive(Debug, Clone)]
pub struct SurvivalFile {
    pub header: Table,
    pub config: RunConfig,
    pub curve: SurvivalCurve,
}

pub fn parse_survival_file(text: &str) -> Result<SurvivalFile> {
    let header = parse_header(text)?;
    let config = match header.get("config") {
        Some(Value::Table(t)) => run_config_from_table(t)?,
        _ => return Err(Error::Invalid("file header has no [config] table".into())),
    };
    let (_, data) = split_header(text);
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(data.as_bytes());
    let mut curve = SurvivalCurve {
        times: Vec::new(),
        mean: Vec::new(),
        std: Vec::new(),
        n_realizations: 0,
        covariance: None,
    };
    let bad = |e: &dyn std::fmt::Display| Error::Invalid(format!("survival data: {e}"));
    let headers = reader.headers().map_err(|e| bad(&e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Invalid(format!("survival data has no `{name}` column")))
    };
    let (t, m, s, n) = (col("t_k")?, col("mean")?, col("std")?, col("n_realizations")?);
    for record in reader.records() {
        let record = record.map_err(|e| bad(&e))?;
        let num = |i: usize| -> Result<f64> { record[i].parse().map_err(|e| bad(&e)) };
        curve.times.push(num(t)?);
        curve.mean.push(num(m)?);
        curve.std.push(num(s)?);
        curve.n_realizations = record[n].parse().map_err(|e| bad(&e))?;
    }
    if curve.is_empty() {
        return Err(Error::Invalid("survival data has no rows".into()));
    }
    Ok(SurvivalFile { header, config, curve })
}

pub fn read_survival_file(path: &Path) -> Result<SurvivalFile> {
    parse_survival_file(&read_text(path)?).map_err(|e| match e {
        Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}
