//! Simulation and diagnosis of a photon polarisation randomly rotated by
//! correlated telegraph noise and probed by repeated partially-selective
//! measurements.
//!
//! Positively correlated noise is slowed by strong measurements (Zeno
//! regime), anti-correlated noise is sped up (anti-Zeno regime). The crate
//! simulates the ensemble, evaluates the closed-form predictions and spectra,
//! and inverts measured decay curves for the correlation parameter `C`.
//!
//! ```
//! use zeno_probe::{
//!     run_ensemble, CorrelationParameter, ExperimentConfig, MeasurementStrength,
//! };
//!
//! let config = ExperimentConfig::new(
//!     4f64.to_radians(),
//!     MeasurementStrength::PROJECTIVE,
//!     CorrelationParameter::new(0.4)?,
//!     7,
//! );
//! let curve = run_ensemble(&config)?;
//! // projective measurements ignore the jump signs
//! let expect = 4f64.to_radians().cos().powi(14);
//! assert!((curve.mean[6] - expect).abs() < 1e-12);
//! assert_eq!(curve.std[6], 0.0);
//! # Ok::<(), zeno_probe::Error>(())
//! ```

pub mod analytic;
pub mod config;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod noise;
pub mod polarization;
pub mod presets;
pub mod spectra;
pub mod spectroscopy;

pub use analytic::{
    averaged_survival, decay_rate_gamma, nonrandom_survival, predicted_survival, validity_check, AbsorptionConvention,
    RateSet,
};
pub use config::{parse_config, parse_run_config, RunConfig};
pub use error::{Error, Result};
pub use montecarlo::{chain_average, exact_average, run_ensemble, theta_sweep, ExperimentConfig, SurvivalCurve};
pub use noise::{generate_jump_sequence, CorrelationParameter, JumpSequence};
pub use polarization::{MeasurementStrength, PolarisationAmplitudes, RotationJump};
pub use spectra::{bath_spectrum, control_spectrum, kk_decay_rate};
pub use spectroscopy::{diagnose, fit_decay_rate, infer_correlation, DecayFit, DiagnosisReport, FitModel, Regime};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/noise.md")]
    pub mod noise {}
    #[doc = include_str!("../../../book/src/closed-forms.md")]
    pub mod closed_forms {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    pub mod spectra {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub mod monte_carlo {}
    #[doc = include_str!("../../../book/src/diagnosis.md")]
    pub mod diagnosis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
