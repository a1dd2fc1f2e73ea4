//! Figure-reproduction presets: survival curves for three noise
//! correlations, the final-block survival against measurement strength, and
//! the two spectra on the discrete-time band.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::analytic::{decay_rate_gamma, predicted_survival, DEFAULT_ABSORPTION_CONVENTION};
use crate::config::toml_float;
use crate::error::{Error, Result};
use crate::io::{fmt_num, spectrum_grid_csv, write_output, Command, RunManifest};
use crate::montecarlo::{chain_average, run_ensemble, sweep_seed, theta_sweep, ExperimentConfig};
use crate::noise::{derive_seed, CorrelationParameter};
use crate::polarization::MeasurementStrength;
use crate::spectra::{bath_grid, control_grid, SpectrumGrid, DEFAULT_GRID_POINTS};

pub const PRESET_DELTA_PHI_DEG: f64 = 4.0;
pub const PRESET_BLOCKS: usize = 7;
pub const PRESET_TAU: f64 = 1.0;
/// Correlations of the three survival panels.
pub const PRESET_CORRELATIONS: [f64; 3] = [0.4, 0.0, -0.6];
/// Realizations per curve with `--precision`.
pub const PRECISION_REALIZATIONS: usize = 100_000;
/// Theory lines extend to this time.
pub const EXTENDED_TIME: usize = 200;
/// Block duration of the spectra grids.
pub const SPECTRA_TAU: f64 = 0.05;
pub const SPECTRA_ROWS: usize = 101;
/// Largest `|C|` and `θ` on the spectra grids; the kernels are delta combs at 1.
pub const SPECTRA_MAX_RADIUS: f64 = 0.99;

pub fn preset_delta_phi() -> f64 {
    PRESET_DELTA_PHI_DEG.to_radians()
}

/// Ensemble seed of panel `c` under `master`; sweep points derive from it.
pub fn panel_seed(master: u64, c: f64) -> u64 {
    derive_seed(master, c.to_bits())
}

fn panel_config(master: u64, m: usize, c: f64, theta: f64) -> Result<ExperimentConfig> {
    let th = MeasurementStrength::new(theta)?;
    Ok(ExperimentConfig::new(preset_delta_phi(), th, CorrelationParameter::new(c)?, 0)
        .with_blocks(PRESET_BLOCKS)
        .with_tau(PRESET_TAU)
        .with_realizations(m)
        .with_seed(sweep_seed(panel_seed(master, c), th)))
}

fn theory(t: f64, c: f64, theta: f64) -> Result<f64> {
    predicted_survival(
        t,
        preset_delta_phi(),
        PRESET_TAU,
        CorrelationParameter::new(c)?,
        MeasurementStrength::new(theta)?,
        DEFAULT_ABSORPTION_CONVENTION,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig3Row {
    pub theta: f64,
    pub t: f64,
    /// Monte Carlo mean and std; absent beyond the simulated blocks.
    pub mc: Option<(f64, f64)>,
    pub theory: f64,
}

/// Survival panel for correlation `c`: `θ = 0` and `θ = 1`, `t = 0..=200`.
pub fn fig3_rows(master: u64, m: usize, c: f64) -> Result<Vec<Fig3Row>> {
    let mut rows = Vec::new();
    for theta in [0.0, 1.0] {
        let curve = run_ensemble(&panel_config(master, m, c, theta)?)?;
        for step in 0..=EXTENDED_TIME {
            let t = step as f64 * PRESET_TAU;
            let mc = match step {
                0 => Some((1.0, 0.0)),
                k if k <= curve.len() => Some((curve.mean[k - 1], curve.std[k - 1])),
                _ => None,
            };
            rows.push(Fig3Row {
                theta,
                t,
                mc,
                theory: theory(t, c, theta)?,
            });
        }
    }
    Ok(rows)
}

pub fn fig3_csv(rows: &[Fig3Row]) -> String {
    let mut s = String::from("theta,t,mc_mean,mc_std,theory\n");
    for r in rows {
        let (mean, std) = r.mc.map_or((String::new(), String::new()), |(a, b)| (fmt_num(a), fmt_num(b)));
        let _ = writeln!(s, "{},{},{mean},{std},{}", fmt_num(r.theta), fmt_num(r.t), fmt_num(r.theory));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig4Row {
    pub c: f64,
    pub theta: f64,
    pub mc_mean: f64,
    pub mc_std: f64,
    /// Averaged rate-equation survival at `t = 7τ`.
    pub theory: f64,
    /// Polarisation decay rate `γ` of the rate equations.
    pub theory_gamma: f64,
    /// Exact chain expectation at `t = 7τ`.
    pub exact: f64,
}

/// `θ` from 0 to 1 in steps of 0.05.
pub fn default_sweep_thetas() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn fig4_rows(master: u64, m: usize, c: f64, thetas: &[f64]) -> Result<Vec<Fig4Row>> {
    let ths = thetas
        .iter()
        .map(|&t| MeasurementStrength::new(t))
        .collect::<Result<Vec<_>>>()?;
    let corr = CorrelationParameter::new(c)?;
    let base = panel_config(master, m, c, 1.0)?.with_seed(panel_seed(master, c));
    let t_final = PRESET_BLOCKS as f64 * PRESET_TAU;
    theta_sweep(&base, &ths)?
        .into_iter()
        .map(|p| {
            let th = MeasurementStrength::new(p.theta)?;
            Ok(Fig4Row {
                c,
                theta: p.theta,
                mc_mean: p.mean,
                mc_std: p.std,
                theory: theory(t_final, c, p.theta)?,
                theory_gamma: decay_rate_gamma(preset_delta_phi(), PRESET_TAU, corr, th)?,
                exact: chain_average(preset_delta_phi(), corr, th, PRESET_BLOCKS)[PRESET_BLOCKS - 1],
            })
        })
        .collect()
}

pub fn fig4_csv(rows: &[Fig4Row]) -> String {
    let mut s = String::from("c,theta,mc_mean,mc_std,theory,theory_gamma,exact\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_num(r.c),
            fmt_num(r.theta),
            fmt_num(r.mc_mean),
            fmt_num(r.mc_std),
            fmt_num(r.theory),
            fmt_num(r.theory_gamma),
            fmt_num(r.exact)
        );
    }
    s
}

/// Bath spectrum rows at `C = 0.99 (i - 50)/50` and control rows at
/// `θ = 0.99 i/100`, `i = 0..=100`; both on 512 midpoints of the band.
pub fn fig_a_grids() -> Result<(SpectrumGrid, SpectrumGrid)> {
    let half = (SPECTRA_ROWS / 2) as f64;
    let cs: Vec<f64> = (0..SPECTRA_ROWS)
        .map(|i| SPECTRA_MAX_RADIUS * (i as f64 - half) / half)
        .collect();
    let thetas: Vec<f64> = (0..SPECTRA_ROWS)
        .map(|i| SPECTRA_MAX_RADIUS * i as f64 / (SPECTRA_ROWS - 1) as f64)
        .collect();
    let dphi = preset_delta_phi();
    Ok((
        bath_grid(dphi, SPECTRA_TAU, &cs, DEFAULT_GRID_POINTS)?,
        control_grid(dphi, SPECTRA_TAU, &thetas, DEFAULT_GRID_POINTS)?,
    ))
}

fn preset_body(name: &str, master: Option<u64>, m: Option<usize>, extra: &str) -> String {
    let mut s = String::from("[preset]\n");
    let _ = writeln!(s, "name = \"{name}\"");
    if let Some(master) = master {
        let _ = writeln!(s, "seed = {}", Value::String(master.to_string()));
    }
    if let Some(m) = m {
        let _ = writeln!(s, "n_realizations = {m}");
    }
    let _ = writeln!(s, "delta_phi_deg = {}", toml_float(PRESET_DELTA_PHI_DEG));
    let _ = writeln!(s, "n_blocks = {PRESET_BLOCKS}");
    s.push_str(extra);
    s
}

fn float_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| toml_float(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Files written by a preset and a human-readable summary.
#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn fig3_file_name(c: f64) -> String {
    format!("fig3_c{c}.csv")
}

pub fn reproduce_fig3(out_dir: &Path, master: u64, m: usize) -> Result<PresetOutput> {
    let mut files = Vec::new();
    let mut summary = String::from("P_H(t_7): C, theta, mc_mean +- mc_std, theory\n");
    for c in PRESET_CORRELATIONS {
        let rows = fig3_rows(master, m, c)?;
        let extra = format!("c = {}\ntau = {}\n", toml_float(c), toml_float(PRESET_TAU));
        let path = out_dir.join(fig3_file_name(c));
        write_output(
            &RunManifest::new(Command::ReproduceFig3, preset_body("fig3", Some(master), Some(m), &extra), &path),
            &fig3_csv(&rows),
        )?;
        for r in rows.iter().filter(|r| r.t == PRESET_BLOCKS as f64 * PRESET_TAU) {
            let (mean, std) = r.mc.expect("simulated block");
            let _ = writeln!(summary, "{c:+.1}, {}, {mean:.6} +- {std:.6}, {:.6}", r.theta, r.theory);
        }
        files.push(path);
    }
    Ok(PresetOutput { files, summary })
}

pub fn reproduce_fig4(out_dir: &Path, master: u64, m: usize, thetas: &[f64]) -> Result<PresetOutput> {
    let mut rows = Vec::new();
    for c in PRESET_CORRELATIONS {
        rows.extend(fig4_rows(master, m, c, thetas)?);
    }
    let extra = format!(
        "correlations = {}\nthetas = {}\ntau = {}\n",
        float_list(&PRESET_CORRELATIONS),
        float_list(thetas),
        toml_float(PRESET_TAU)
    );
    let path = out_dir.join("fig4.csv");
    write_output(
        &RunManifest::new(Command::ReproduceFig4, preset_body("fig4", Some(master), Some(m), &extra), &path),
        &fig4_csv(&rows),
    )?;
    let mut summary = String::from("P_H(t_7) at theta = 0 and 1: C, theta, mc_mean +- mc_std, theory, exact\n");
    for r in rows.iter().filter(|r| r.theta == 0.0 || r.theta == 1.0) {
        let _ = writeln!(
            summary,
            "{:+.1}, {}, {:.6} +- {:.6}, {:.6}, {:.6}",
            r.c, r.theta, r.mc_mean, r.mc_std, r.theory, r.exact
        );
    }
    Ok(PresetOutput {
        files: vec![path],
        summary,
    })
}

pub fn reproduce_fig_a(out_dir: &Path) -> Result<PresetOutput> {
    let (bath, control) = fig_a_grids()?;
    let mut files = Vec::new();
    for (grid, name) in [(&bath, "figA_bath.csv"), (&control, "figA_control.csv")] {
        let extra = format!(
            "tau = {}\nrows = {}\nomega_points = {}\nmax_radius = {}\n",
            toml_float(SPECTRA_TAU),
            SPECTRA_ROWS,
            DEFAULT_GRID_POINTS,
            toml_float(SPECTRA_MAX_RADIUS)
        );
        let path = out_dir.join(name);
        write_output(
            &RunManifest::new(Command::ReproduceFigA, preset_body("figA", None, None, &extra), &path),
            &spectrum_grid_csv(grid),
        )?;
        files.push(path);
    }
    let summary = format!(
        "bath spectrum: {} x {} samples; control spectrum: {} x {} samples; tau = {SPECTRA_TAU}\n",
        bath.rows.len(),
        bath.omegas.len(),
        control.rows.len(),
        control.omegas.len()
    );
    Ok(PresetOutput { files, summary })
}

fn get<'a>(table: &'a Table, key: &str) -> Result<&'a Value> {
    table
        .get(key)
        .ok_or_else(|| Error::Invalid(format!("preset header lacks `{key}`")))
}

fn get_f64(table: &Table, key: &str) -> Result<f64> {
    match get(table, key)? {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        v => Err(Error::Invalid(format!("preset `{key}` is not a number: {v}"))),
    }
}

fn get_seed(table: &Table) -> Result<u64> {
    get(table, "seed")?
        .as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Invalid("preset seed must be a quoted unsigned integer".into()))
}

fn get_count(table: &Table, key: &str) -> Result<usize> {
    get(table, key)?
        .as_integer()
        .and_then(|i| usize::try_from(i).ok())
        .ok_or_else(|| Error::Invalid(format!("preset `{key}` must be a non-negative integer")))
}

/// Recomputes the data section of a file from its own header.
///
/// Covers `simulate` and the three presets.
pub fn regenerate_data(text: &str) -> Result<String> {
    let header = crate::io::parse_header(text)?;
    let command = header
        .get("command")
        .and_then(Value::as_str)
        .and_then(Command::parse)
        .ok_or_else(|| Error::Invalid("file header has no recognised `command`".into()))?;
    let preset = || match header.get("preset") {
        Some(Value::Table(t)) => Ok(t),
        _ => Err(Error::Invalid("file header has no [preset] table".into())),
    };
    match command {
        Command::Simulate => {
            let file = crate::io::parse_survival_file(text)?;
            Ok(crate::io::survival_csv(&run_ensemble(&file.config.experiment)?))
        }
        Command::ReproduceFig3 => {
            let p = preset()?;
            Ok(fig3_csv(&fig3_rows(get_seed(p)?, get_count(p, "n_realizations")?, get_f64(p, "c")?)?))
        }
        Command::ReproduceFig4 => {
            let p = preset()?;
            let list = |key: &str| -> Result<Vec<f64>> {
                get(p, key)?
                    .as_array()
                    .ok_or_else(|| Error::Invalid(format!("preset `{key}` must be an array")))?
                    .iter()
                    .map(|v| v.as_float().or_else(|| v.as_integer().map(|i| i as f64)))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Invalid(format!("preset `{key}` must hold numbers")))
            };
            let (master, m, thetas) = (get_seed(p)?, get_count(p, "n_realizations")?, list("thetas")?);
            let mut rows = Vec::new();
            for c in list("correlations")? {
                rows.extend(fig4_rows(master, m, c, &thetas)?);
            }
            Ok(fig4_csv(&rows))
        }
        Command::ReproduceFigA => {
            let (bath, control) = fig_a_grids()?;
            let (_, data) = crate::io::split_header(text);
            let bath_data = spectrum_grid_csv(&bath);
            Ok(if data.starts_with("C,") { bath_data } else { spectrum_grid_csv(&control) })
        }
        other => Err(Error::Invalid(format!("`{}` output cannot be regenerated", other.as_str()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{read_text, split_header};
    use approx::assert_abs_diff_eq;

    #[test]
    fn fig3_theory_and_projective_columns() {
        let mut projective = Vec::new();
        for c in PRESET_CORRELATIONS {
            let rows = fig3_rows(5, 200, c).unwrap();
            assert_eq!(rows.len(), 2 * (EXTENDED_TIME + 1));
            let at7 = |theta: f64| rows.iter().find(|r| r.theta == theta && r.t == 7.0).unwrap();
            if c == 0.4 {
                assert_abs_diff_eq!(at7(1.0).theory, 0.9264071866752552, epsilon = 1e-12);
            }
            if c == -0.6 {
                assert_abs_diff_eq!(at7(1.0).theory, 0.9915430490903424, epsilon = 1e-12);
            }
            assert!(rows.iter().filter(|r| r.t > 7.0).all(|r| r.mc.is_none()));
            projective.push(rows.iter().filter(|r| r.theta == 0.0).map(|r| r.mc).collect::<Vec<_>>());
        }
        assert_eq!(projective[0], projective[1]);
        assert_eq!(projective[1], projective[2]);
    }

    #[test]
    fn fig4_endpoints() {
        let thetas = [0.0, 0.5, 1.0];
        for c in PRESET_CORRELATIONS {
            let rows = fig4_rows(9, 300, c, &thetas).unwrap();
            assert_abs_diff_eq!(rows[0].mc_mean, 4f64.to_radians().cos().powi(14), epsilon = 1e-12);
            assert_abs_diff_eq!(rows[0].mc_mean, 0.9664314577047063, epsilon = 1e-12);
            let fig3 = fig3_rows(9, 300, c).unwrap();
            let end = fig3.iter().find(|r| r.theta == 1.0 && r.t == 7.0).unwrap();
            assert_eq!(Some((rows[2].mc_mean, rows[2].mc_std)), end.mc);
            assert_eq!(rows[2].theory, end.theory);
        }
        // at C = 0 the rate is flat in theta while the survival still varies
        let flat = fig4_rows(9, 100, 0.0, &thetas).unwrap();
        assert!(flat.windows(2).all(|w| (w[0].theory_gamma - w[1].theory_gamma).abs() < 1e-18));
        assert!((flat[1].theory - flat[2].theory).abs() > 1e-6);
    }

    #[test]
    fn fig_a_constant_rows_and_symmetry() {
        let (bath, control) = fig_a_grids().unwrap();
        assert_eq!(bath.rows.len(), 101);
        assert_eq!(bath.omegas.len(), 512);
        let zero_c = bath.parameters.iter().position(|&c| c == 0.0).unwrap();
        for v in &bath.rows[zero_c] {
            assert_abs_diff_eq!(*v, 1.5514037795505151e-2, epsilon = 1e-15);
        }
        assert_eq!(control.parameters[0], 0.0);
        for v in &control.rows[0] {
            assert_abs_diff_eq!(*v, 7.957747154594767e-3, epsilon = 1e-16);
        }
        for grid in [&bath, &control] {
            for row in &grid.rows {
                for j in 0..256 {
                    assert!((row[j] - row[511 - j]).abs() <= 1e-12 * row[j].abs());
                }
            }
        }
    }

    #[test]
    fn emitted_files_regenerate_byte_identically() {
        let dir = tempfile::tempdir().unwrap();
        let mut files = reproduce_fig3(dir.path(), 21, 150).unwrap().files;
        files.extend(reproduce_fig4(dir.path(), 21, 150, &[0.0, 0.3, 1.0]).unwrap().files);
        files.extend(reproduce_fig_a(dir.path()).unwrap().files);
        assert_eq!(files.len(), 6);
        for path in files {
            let text = read_text(&path).unwrap();
            assert_eq!(regenerate_data(&text).unwrap(), split_header(&text).1, "{}", path.display());
        }
    }
}
