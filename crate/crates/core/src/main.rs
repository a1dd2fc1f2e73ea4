use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zeno_probe::config::parse_run_config;
use zeno_probe::io::{self, fmt_num, read_survival_file, read_text, survival_csv, Command, RunManifest};
use zeno_probe::presets::{self, PRECISION_REALIZATIONS};
use zeno_probe::spectra::{self, DEFAULT_GRID_POINTS};
use zeno_probe::spectroscopy::{diagnose_with, DiagnoseOptions, DiagnosisReport, InferenceOptions, ModelKind};
use zeno_probe::{decay_rate_gamma, run_ensemble, Error, MeasurementStrength, Result};

#[derive(Parser)]
#[command(name = "zeno-probe", version, about = "Zeno/anti-Zeno probes of correlated polarisation noise")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Ensemble {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Realizations per curve.
    #[arg(long)]
    realizations: Option<usize>,
    /// Use 100000 realizations per curve.
    #[arg(long, conflicts_with = "realizations")]
    precision: bool,
}

impl Ensemble {
    fn realizations(&self, default: usize) -> usize {
        if self.precision {
            PRECISION_REALIZATIONS
        } else {
            self.realizations.unwrap_or(default)
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an ensemble and write its survival curve.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        ensemble: Ensemble,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Infer the noise correlation from simulated or measured curves.
    Analyze {
        /// Survival curve files written by `simulate`.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Forward model: exact_chain, full_model or log_linear.
        #[arg(long, default_value = "exact_chain")]
        model: ModelKind,
        /// Interval half-width below which a straddling interval is Markovian.
        #[arg(long, default_value_t = zeno_probe::spectroscopy::DEFAULT_RESOLUTION)]
        resolution: f64,
        /// Write a CSV row instead of the key-value report.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the bath and control spectra and compare the overlap rate with the closed form.
    Spectra {
        #[arg(long)]
        config: PathBuf,
        /// Frequency samples across the band.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Survival curves at theta = 0 and 1 for C = 0.4, 0, -0.6.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3 {
        #[command(flatten)]
        ensemble: Ensemble,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Final-block survival against measurement strength.
    #[command(name = "reproduce-fig4")]
    ReproduceFig4 {
        #[command(flatten)]
        ensemble: Ensemble,
        /// Comma-separated theta values; 0 to 1 in steps of 0.05 by default.
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Bath and control spectrum grids at tau = 0.05.
    #[command(name = "reproduce-figA")]
    ReproduceFigA {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

const DEFAULT_PRESET_SEED: u64 = 1;

fn emit(command: Command, body: String, out: Option<&Path>, data: &str) -> Result<()> {
    match out {
        Some(path) => io::write_output(&RunManifest::new(command, body, path), data),
        None => {
            print!("{}{data}", RunManifest::new(command, body, "-").header());
            Ok(())
        }
    }
}

fn simulate(config: &Path, ensemble: &Ensemble, out: Option<&Path>) -> Result<()> {
    let mut run = parse_run_config(&read_text(config)?)?;
    if let Some(seed) = ensemble.seed {
        run.experiment.seed = seed;
    }
    run.experiment.n_realizations = ensemble.realizations(run.experiment.n_realizations);
    let curve = run_ensemble(&run.experiment)?;
    let manifest = RunManifest::for_config(Command::Simulate, &run.experiment, out.unwrap_or(Path::new("-")));
    emit(Command::Simulate, manifest.body, out, &survival_csv(&curve))
}

fn analyze(files: &[PathBuf], model: ModelKind, resolution: f64, csv: bool, out: Option<&Path>) -> Result<()> {
    let mut curves = Vec::with_capacity(files.len());
    let mut shared: Option<(f64, f64)> = None;
    for path in files {
        let file = read_survival_file(path)?;
        let exp = file.config.experiment;
        match shared {
            None => shared = Some((exp.delta_phi, exp.tau)),
            Some((d, t)) if d != exp.delta_phi || t != exp.tau => {
                return Err(Error::Invalid(format!(
                    "{} has delta_phi = {}, tau = {}; earlier files have {d}, {t}",
                    path.display(),
                    exp.delta_phi,
                    exp.tau
                )))
            }
            Some(_) => {}
        }
        curves.push((exp.theta, file.curve));
    }
    let (delta_phi, tau) = shared.expect("clap requires at least one file");
    let opts = DiagnoseOptions {
        model,
        inference: InferenceOptions {
            resolution,
            ..InferenceOptions::default()
        },
    };
    let report = diagnose_with(&curves, delta_phi, tau, &opts)?;
    let names: Vec<String> = files.iter().map(|p| toml::Value::String(p.display().to_string()).to_string()).collect();
    let body = format!("[inputs]\nfiles = [{}]\nmodel = \"{}\"\n", names.join(", "), model.name());
    let data = if csv {
        format!("{}\n{}\n", DiagnosisReport::CSV_HEADER, report.to_csv_row())
    } else {
        report.to_key_value()
    };
    emit(Command::Analyze, body, out, &data)
}

fn spectra_cmd(config: &Path, points: usize, out: Option<&Path>) -> Result<()> {
    let run = parse_run_config(&read_text(config)?)?;
    let e = run.experiment;
    if points == 0 {
        return Err(Error::Domain {
            name: "points",
            value: 0.0,
            bound: "points >= 1",
        });
    }
    let bath = spectra::SpectralFunction::sample(|w| spectra::bath_spectrum(w, e.delta_phi, e.tau, e.c), e.tau, points);
    let control = spectra::SpectralFunction::sample(|w| spectra::control_spectrum(w, e.tau, e.theta), e.tau, points);
    let closed = decay_rate_gamma(e.delta_phi, e.tau, e.c, e.theta)?;
    let overlap = spectra::kk_decay_rate(e.delta_phi, e.tau, e.c, e.theta, 4096);

    let mut body = format!("[config]\n{}[rates]\n", zeno_probe::config::to_toml(&e));
    let _ = writeln!(body, "closed_form = {}", toml::Value::Float(closed));
    match &overlap {
        Ok(g) => {
            let _ = writeln!(body, "spectral_overlap = {}", toml::Value::Float(*g));
        }
        Err(err) => log::warn!("spectral overlap not available: {err}"),
    }
    let mut data = String::from("omega,bath_spectrum,control_spectrum\n");
    for ((w, g), f) in bath.omegas.iter().zip(&bath.values).zip(&control.values) {
        let _ = writeln!(data, "{},{},{}", fmt_num(*w), fmt_num(*g), fmt_num(*f));
    }
    emit(Command::Spectra, body, out, &data)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Simulate { config, ensemble, out } => simulate(&config, &ensemble, out.as_deref()),
        Cmd::Analyze {
            files,
            model,
            resolution,
            csv,
            out,
        } => analyze(&files, model, resolution, csv, out.as_deref()),
        Cmd::Spectra { config, points, out } => spectra_cmd(&config, points, out.as_deref()),
        Cmd::ReproduceFig3 { ensemble, out } => {
            let m = ensemble.realizations(zeno_probe::ExperimentConfig::DEFAULT_REALIZATIONS);
            let res = presets::reproduce_fig3(&out, ensemble.seed.unwrap_or(DEFAULT_PRESET_SEED), m)?;
            report(&res);
            Ok(())
        }
        Cmd::ReproduceFig4 { ensemble, thetas, out } => {
            let m = ensemble.realizations(zeno_probe::ExperimentConfig::DEFAULT_REALIZATIONS);
            let thetas = thetas.unwrap_or_else(presets::default_sweep_thetas);
            for &t in &thetas {
                MeasurementStrength::new(t)?;
            }
            let res = presets::reproduce_fig4(&out, ensemble.seed.unwrap_or(DEFAULT_PRESET_SEED), m, &thetas)?;
            report(&res);
            Ok(())
        }
        Cmd::ReproduceFigA { out } => {
            report(&presets::reproduce_fig_a(&out)?);
            Ok(())
        }
    }
}

fn report(res: &presets::PresetOutput) {
    for f in &res.files {
        println!("wrote {}", f.display());
    }
    print!("{}", res.summary);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
