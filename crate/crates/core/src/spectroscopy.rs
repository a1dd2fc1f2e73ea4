//! Noise diagnostics: fit decay curves, invert the decay rate for the
//! correlation parameter `C`, and classify the Zeno regime.
//!
//! Three forward models are available for the fit:
//!
//! * [`FitModel::LogLinear`]: `ln P̄_H(t_k) = -γ t_k`.
//! * [`FitModel::FullModel`]: the averaged rate-equation solution with `Γ₀`
//!   fixed by `θ` and `τ`.
//! * [`FitModel::ExactChain`]: the exact finite-`N` chain expectation from
//!   [`chain_average`]. It fits `C` directly and reports `γ̂ = γ(Ĉ)`.
//!
//! The first two are long-time asymptotics. For the short curves typical of
//! an experiment (`N = 7`) they bias `Ĉ` toward zero, which is why
//! [`diagnose`] defaults to the exact chain.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::analytic::{
    absorption_rate_gamma0, averaged_survival, check_tau, decay_rate_gamma, validity_check, RateSet,
    DEFAULT_ABSORPTION_CONVENTION, DEFAULT_VALIDITY_EPSILON,
};
use crate::error::{Error, Result};
use crate::montecarlo::{chain_average, SurvivalCurve};
use crate::noise::CorrelationParameter;
use crate::polarization::MeasurementStrength;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959964;

/// Default interval half-width below which an interval straddling 0 is
/// called Markovian.
pub const DEFAULT_RESOLUTION: f64 = 0.1;

const C_BOUND: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitModel {
    LogLinear,
    FullModel,
    /// Exact chain expectation at the given jump modulus (radians).
    ExactChain { delta_phi: f64 },
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::LogLinear => "log_linear",
            FitModel::FullModel => "full_model",
            FitModel::ExactChain { .. } => "exact_chain",
        }
    }
}

/// Model family without parameters, for options and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    LogLinear,
    FullModel,
    #[default]
    ExactChain,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        self.with_delta_phi(0.0).name()
    }

    pub fn with_delta_phi(self, delta_phi: f64) -> FitModel {
        match self {
            ModelKind::LogLinear => FitModel::LogLinear,
            ModelKind::FullModel => FitModel::FullModel,
            ModelKind::ExactChain => FitModel::ExactChain { delta_phi },
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log_linear" => Ok(ModelKind::LogLinear),
            "full_model" => Ok(ModelKind::FullModel),
            "exact_chain" => Ok(ModelKind::ExactChain),
            other => Err(Error::Invalid(format!(
                "unknown fit model `{other}` (expected log_linear, full_model or exact_chain)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub gamma_hat: f64,
    pub gamma_stderr: f64,
    pub model: FitModel,
    /// Weighted residual norm (chi) or plain residual norm when unweighted.
    pub residual_norm: f64,
    /// Every point had zero spread, so the fit fell back to equal weights.
    pub unweighted: bool,
    pub n_points: usize,
}

/// How residuals are scaled before least squares.
enum Whitening {
    /// Lower Cholesky factor of the covariance of the fitted means.
    Full(DMatrix<f64>),
    /// Standard error per point.
    Diagonal(Vec<f64>),
    Unweighted,
}

impl Whitening {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Whitening::Full(l) => {
                let x = l
                    .solve_lower_triangular(&DVector::from_column_slice(v))
                    .expect("Cholesky factor has a positive diagonal");
                x.iter().copied().collect()
            }
            Whitening::Diagonal(se) => v.iter().zip(se).map(|(a, s)| a / s).collect(),
            Whitening::Unweighted => v.to_vec(),
        }
    }
}

/// Points with non-zero spread and the matching whitening.
///
/// With a covariance matrix the fit is generalised least squares; points
/// along one trajectory are strongly correlated and ignoring that
/// understates the uncertainty. `log_scale` whitens `ln(mean)` instead of
/// `mean` (first-order propagation, `se(ln m) = se(m)/m`).
fn weighting(curve: &SurvivalCurve, log_scale: bool) -> (Vec<usize>, Whitening) {
    let idx: Vec<usize> = (0..curve.len()).filter(|&k| curve.std[k] > 0.0).collect();
    if idx.is_empty() || curve.n_realizations == 0 {
        return ((0..curve.len()).collect(), Whitening::Unweighted);
    }
    let m = curve.n_realizations as f64;
    let scale = |k: usize| if log_scale { curve.mean[k] } else { 1.0 };
    if let Some(cov) = &curve.covariance {
        let n = curve.len();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            let (a, b) = (idx[i], idx[j]);
            cov[a * n + b] / (m * scale(a) * scale(b))
        });
        if let Some(chol) = sub.cholesky() {
            return (idx, Whitening::Full(chol.l()));
        }
        log::warn!("sample covariance is not positive definite; using diagonal weights");
    }
    let se = idx.iter().map(|&k| curve.sem(k) / scale(k)).collect();
    (idx, Whitening::Diagonal(se))
}

struct ScalarFit {
    param: f64,
    stderr: f64,
    residual_norm: f64,
}

/// One-parameter Gauss-Newton with step halving and a numerical Jacobian.
fn gauss_newton<F>(y: &[f64], w: &Whitening, model: F, start: f64, bounds: (f64, f64), step: f64) -> Result<ScalarFit>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let resid = |p: f64| -> Result<Vec<f64>> {
        let f = model(p)?;
        Ok(w.apply(&y.iter().zip(&f).map(|(a, b)| a - b).collect::<Vec<_>>()))
    };
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let jac = |p: f64| -> Result<Vec<f64>> {
        let h = step * p.abs().max(1.0);
        let (lo, hi) = ((p - h).max(bounds.0), (p + h).min(bounds.1));
        let (fl, fh) = (model(lo)?, model(hi)?);
        Ok(w.apply(&fh.iter().zip(&fl).map(|(a, b)| (a - b) / (hi - lo)).collect::<Vec<_>>()))
    };

    let mut p = start.clamp(bounds.0, bounds.1);
    let mut r = resid(p)?;
    let mut chi2 = sq(&r);
    for _ in 0..200 {
        let j = jac(p)?;
        let jj = sq(&j);
        if jj == 0.0 {
            break;
        }
        let mut dp = j.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / jj;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = (p + dp).clamp(bounds.0, bounds.1);
            let rt = resid(trial)?;
            let ct = sq(&rt);
            if ct <= chi2 {
                dp = trial - p;
                p = trial;
                r = rt;
                chi2 = ct;
                accepted = true;
                break;
            }
            dp *= 0.5;
        }
        if !accepted || dp.abs() <= 1e-14 * p.abs().max(1e-12) {
            break;
        }
    }
    let j = jac(p)?;
    let jj = sq(&j);
    if jj == 0.0 {
        return Err(Error::NonIdentifiable("the model does not depend on the fitted parameter"));
    }
    let stderr = match w {
        Whitening::Unweighted => {
            let dof = y.len().saturating_sub(1);
            if dof == 0 {
                0.0
            } else {
                (chi2 / dof as f64 / jj).sqrt()
            }
        }
        _ => (1.0 / jj).sqrt(),
    };
    Ok(ScalarFit {
        param: p,
        stderr,
        residual_norm: chi2.sqrt(),
    })
}

fn check_curve(curve: &SurvivalCurve) -> Result<()> {
    let n = curve.len();
    if curve.mean.len() != n || curve.std.len() != n {
        return Err(Error::Invalid("curve columns have different lengths".into()));
    }
    if curve.mean.iter().filter(|&&m| m > 0.0).count() < 2 {
        return Err(Error::Invalid("a decay fit needs at least 2 points with positive mean".into()));
    }
    Ok(())
}

/// Fits the polarisation decay rate `γ` to a survival curve.
pub fn fit_decay_rate(curve: &SurvivalCurve, theta: MeasurementStrength, tau: f64, model: FitModel) -> Result<DecayFit> {
    check_tau(tau)?;
    check_curve(curve)?;
    match model {
        FitModel::LogLinear => fit_log_linear(curve),
        FitModel::FullModel => fit_full_model(curve, theta, tau),
        FitModel::ExactChain { delta_phi } => fit_exact_chain(curve, theta, tau, delta_phi),
    }
}

/// Weighted least squares of `ln(mean_k)` on `t_k` through the origin.
fn fit_log_linear(curve: &SurvivalCurve) -> Result<DecayFit> {
    if let Some(k) = curve.mean.iter().position(|&m| m <= 0.0) {
        return Err(Error::MalformedFit(format!(
            "mean at t = {} is not positive; use the full_model fit instead",
            curve.times[k]
        )));
    }
    let (idx, w) = weighting(curve, true);
    let unweighted = matches!(w, Whitening::Unweighted);
    let y: Vec<f64> = idx.iter().map(|&k| curve.mean[k].ln()).collect();
    let times: Vec<f64> = idx.iter().map(|&k| curve.times[k]).collect();
    if times.iter().all(|&t| t == 0.0) {
        return Err(Error::Invalid("all fitted times are zero".into()));
    }
    let model = |g: f64| Ok(times.iter().map(|&t| -g * t).collect());
    let fit = gauss_newton(&y, &w, model, 0.0, (0.0, f64::MAX), 1e-6)?;
    Ok(DecayFit {
        gamma_hat: fit.param,
        gamma_stderr: fit.stderr,
        model: FitModel::LogLinear,
        residual_norm: fit.residual_norm,
        unweighted,
        n_points: idx.len(),
    })
}

fn fit_full_model(curve: &SurvivalCurve, theta: MeasurementStrength, tau: f64) -> Result<DecayFit> {
    let gamma0 = match absorption_rate_gamma0(theta, tau, DEFAULT_ABSORPTION_CONVENTION) {
        Ok(g) => g,
        Err(Error::InfiniteRate) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let (idx, w) = weighting(curve, false);
    let unweighted = matches!(w, Whitening::Unweighted);
    let y: Vec<f64> = idx.iter().map(|&k| curve.mean[k]).collect();
    let times: Vec<f64> = idx.iter().map(|&k| curve.times[k]).collect();
    let model = |g: f64| -> Result<Vec<f64>> {
        let rates = RateSet::new(g.max(0.0), gamma0, 0.0)?;
        Ok(times.iter().map(|&t| averaged_survival(t, &rates)).collect())
    };
    let (t_last, m_last) = (times[times.len() - 1], y[y.len() - 1]);
    let start = if m_last > 0.0 && t_last > 0.0 {
        (-m_last.ln() / t_last).max(1e-9)
    } else {
        1.0 / tau
    };
    let fit = gauss_newton(&y, &w, model, start, (0.0, f64::MAX), 1e-6)?;
    Ok(DecayFit {
        gamma_hat: fit.param,
        gamma_stderr: fit.stderr,
        model: FitModel::FullModel,
        residual_norm: fit.residual_norm,
        unweighted,
        n_points: idx.len(),
    })
}

fn fit_exact_chain(curve: &SurvivalCurve, theta: MeasurementStrength, tau: f64, delta_phi: f64) -> Result<DecayFit> {
    if !(delta_phi > 0.0 && delta_phi.is_finite()) {
        return Err(Error::domain("delta_phi", delta_phi, "0 < delta_phi < inf"));
    }
    if theta.value() == 0.0 {
        return Err(Error::NonIdentifiable(
            "projective measurements make the curve independent of C",
        ));
    }
    let n = curve.len();
    for (k, &t) in curve.times.iter().enumerate() {
        let expect = (k + 1) as f64 * tau;
        if (t - expect).abs() > 1e-9 * expect.max(1.0) {
            return Err(Error::MalformedFit(format!(
                "exact_chain needs block times k*tau; point {} has t = {t}, expected {expect}",
                k + 1
            )));
        }
    }
    let (idx, w) = weighting(curve, false);
    let unweighted = matches!(w, Whitening::Unweighted);
    let y: Vec<f64> = idx.iter().map(|&k| curve.mean[k]).collect();
    let model = |c: f64| -> Result<Vec<f64>> {
        let full = chain_average(delta_phi, CorrelationParameter::new(c)?, theta, n);
        Ok(idx.iter().map(|&k| full[k]).collect())
    };
    let fit = gauss_newton(&y, &w, model, 0.0, (-C_BOUND, C_BOUND), 1e-6)?;
    let c_hat = CorrelationParameter::new(fit.param)?;
    let gamma = decay_rate_gamma(delta_phi, tau, c_hat, theta)?;
    let ct = fit.param * theta.value();
    let dgamma_dc = delta_phi * delta_phi / tau * 2.0 * theta.value() / ((1.0 - ct) * (1.0 - ct));
    Ok(DecayFit {
        gamma_hat: gamma,
        gamma_stderr: dgamma_dc * fit.stderr,
        model: FitModel::ExactChain { delta_phi },
        residual_norm: fit.residual_norm,
        unweighted,
        n_points: idx.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Interval entirely above 0: measurement slows the decay.
    Qze,
    /// Interval entirely below 0: measurement speeds the decay.
    Aze,
    Markovian,
    Indeterminate,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Qze => "QZE",
            Regime::Aze => "AZE",
            Regime::Markovian => "Markovian",
            Regime::Indeterminate => "indeterminate",
        }
    }

    pub fn classify(low: f64, high: f64, resolution: f64) -> Self {
        if low > 0.0 {
            Regime::Qze
        } else if high < 0.0 {
            Regime::Aze
        } else if 0.5 * (high - low) < resolution {
            Regime::Markovian
        } else {
            Regime::Indeterminate
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceOptions {
    pub resolution: f64,
    /// Normal quantile of the interval; 1.959964 for 95%.
    pub z: f64,
    pub validity_epsilon: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            resolution: DEFAULT_RESOLUTION,
            z: Z_95,
            validity_epsilon: DEFAULT_VALIDITY_EPSILON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosisReport {
    pub c_hat: f64,
    pub c_stderr: f64,
    pub c_interval: (f64, f64),
    pub z: f64,
    pub regime: Regime,
    /// `1 - ratio/ε` from the validity check at `Ĉ`; positive inside the
    /// small-jump regime.
    pub validity_margin: f64,
    /// `Ĉ` fell outside `[-1, 1]` and was clamped.
    pub clamped: bool,
    /// Jump modulus used for the inversion, radians.
    pub delta_phi: f64,
}

impl DiagnosisReport {
    fn from_estimate(c: f64, se: f64, delta_phi: f64, thetas: &[f64], opts: &InferenceOptions) -> Self {
        let (low, high) = (c - opts.z * se, c + opts.z * se);
        let regime = Regime::classify(low, high, opts.resolution);
        let clamped = !(-1.0..=1.0).contains(&c);
        let c_hat = c.clamp(-1.0, 1.0);
        let cc = CorrelationParameter::new(c_hat).expect("clamped");
        let validity_margin = thetas
            .iter()
            .map(|&t| {
                let th = MeasurementStrength::new(t).expect("validated theta");
                1.0 - validity_check(delta_phi, cc, th, opts.validity_epsilon).ratio / opts.validity_epsilon
            })
            .fold(f64::INFINITY, f64::min);
        Self {
            c_hat,
            c_stderr: se,
            c_interval: (low.clamp(-1.0, 1.0), high.clamp(-1.0, 1.0)),
            z: opts.z,
            regime,
            validity_margin,
            clamped,
            delta_phi,
        }
    }

    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "c_hat = {:.16e}", self.c_hat);
        let _ = writeln!(s, "c_stderr = {:.16e}", self.c_stderr);
        let _ = writeln!(s, "c_interval_low = {:.16e}", self.c_interval.0);
        let _ = writeln!(s, "c_interval_high = {:.16e}", self.c_interval.1);
        let _ = writeln!(s, "z = {}", self.z);
        let _ = writeln!(s, "regime = \"{}\"", self.regime);
        let _ = writeln!(s, "validity_margin = {:.16e}", self.validity_margin);
        let _ = writeln!(s, "clamped = {}", self.clamped);
        let _ = writeln!(s, "delta_phi = {:.16e}", self.delta_phi);
        s
    }

    pub const CSV_HEADER: &'static str = "c_hat,c_stderr,c_low,c_high,regime,validity_margin,clamped,delta_phi";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{:.16e}",
            self.c_hat,
            self.c_stderr,
            self.c_interval.0,
            self.c_interval.1,
            self.regime,
            self.validity_margin,
            self.clamped,
            self.delta_phi
        )
    }
}

/// Unclamped `Ĉ` and its delta-method standard error.
fn invert_rate(gamma_hat: f64, gamma_stderr: f64, theta: f64, delta_phi: f64, tau: f64) -> Result<(f64, f64)> {
    let var = delta_phi * delta_phi;
    let r = gamma_hat * tau / var;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::MalformedFit(format!("fitted rate ratio r = {r} must be positive")));
    }
    let c = (r - 1.0) / (theta * (r + 1.0));
    let dc_dgamma = tau / var * 2.0 / (theta * (r + 1.0) * (r + 1.0));
    Ok((c, dc_dgamma * gamma_stderr))
}

fn check_inputs(theta: MeasurementStrength, delta_phi: f64, tau: f64) -> Result<()> {
    check_tau(tau)?;
    if !(delta_phi > 0.0 && delta_phi.is_finite()) {
        return Err(Error::domain("delta_phi", delta_phi, "0 < delta_phi < inf"));
    }
    if theta.value() == 0.0 {
        return Err(Error::NonIdentifiable(
            "at theta = 0 the decay rate does not depend on C",
        ));
    }
    Ok(())
}

/// Inverts `γ = (1 + Cθ)/(1 - Cθ) · Δφ²/τ` for `C`: with `r = γ̂τ/Δφ²`,
/// `Ĉ = (r - 1)/(θ(r + 1))`.
pub fn infer_correlation(fit: &DecayFit, theta: MeasurementStrength, delta_phi: f64, tau: f64) -> Result<DiagnosisReport> {
    infer_correlation_with(fit, theta, delta_phi, tau, &InferenceOptions::default())
}

pub fn infer_correlation_with(
    fit: &DecayFit,
    theta: MeasurementStrength,
    delta_phi: f64,
    tau: f64,
    opts: &InferenceOptions,
) -> Result<DiagnosisReport> {
    check_inputs(theta, delta_phi, tau)?;
    let (c, se) = invert_rate(fit.gamma_hat, fit.gamma_stderr, theta.value(), delta_phi, tau)?;
    Ok(DiagnosisReport::from_estimate(c, se, delta_phi, &[theta.value()], opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnoseOptions {
    pub model: ModelKind,
    pub inference: InferenceOptions,
}

/// Combined diagnosis from curves at several measurement strengths.
///
/// Curves at `θ = 0` calibrate the jump modulus: their decay `cos^{2k} Δφ`
/// gives `Δφ = acos(exp(-γ₀τ/2))`, which replaces `delta_phi`. Each `θ > 0`
/// curve is fitted and inverted, and the estimates are combined with
/// inverse-variance weights.
pub fn diagnose(curves: &[(MeasurementStrength, SurvivalCurve)], delta_phi: f64, tau: f64) -> Result<DiagnosisReport> {
    diagnose_with(curves, delta_phi, tau, &DiagnoseOptions::default())
}

pub fn diagnose_with(
    curves: &[(MeasurementStrength, SurvivalCurve)],
    delta_phi: f64,
    tau: f64,
    opts: &DiagnoseOptions,
) -> Result<DiagnosisReport> {
    check_tau(tau)?;
    let (reference, probes): (Vec<_>, Vec<_>) = curves.iter().partition(|(th, _)| th.value() == 0.0);
    if probes.is_empty() {
        return Err(Error::NonIdentifiable(
            "diagnosis needs at least one curve with theta > 0",
        ));
    }

    let mut dphi = delta_phi;
    if !reference.is_empty() {
        let mut sum = 0.0;
        for (th, curve) in &reference {
            sum += fit_decay_rate(curve, *th, tau, FitModel::LogLinear)?.gamma_hat;
        }
        let gamma0 = sum / reference.len() as f64;
        dphi = (-0.5 * gamma0 * tau).exp().acos();
        log::info!("theta = 0 calibration: delta_phi = {dphi:.6e} rad");
    }
    check_inputs(probes[0].0, dphi, tau)?;

    let model = opts.model.with_delta_phi(dphi);
    let mut estimates = Vec::with_capacity(probes.len());
    for (th, curve) in &probes {
        let fit = fit_decay_rate(curve, *th, tau, model)?;
        estimates.push(invert_rate(fit.gamma_hat, fit.gamma_stderr, th.value(), dphi, tau)?);
    }

    let exact: Vec<f64> = estimates.iter().filter(|(_, se)| *se == 0.0).map(|(c, _)| *c).collect();
    let (c, se) = if !exact.is_empty() {
        (exact.iter().sum::<f64>() / exact.len() as f64, 0.0)
    } else {
        let wsum: f64 = estimates.iter().map(|(_, se)| 1.0 / (se * se)).sum();
        let c = estimates.iter().map(|(c, se)| c / (se * se)).sum::<f64>() / wsum;
        (c, (1.0 / wsum).sqrt())
    };
    let thetas: Vec<f64> = probes.iter().map(|(th, _)| th.value()).collect();
    Ok(DiagnosisReport::from_estimate(c, se, dphi, &thetas, &opts.inference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{run_ensemble, theta_sweep_curves, ExperimentConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FOUR_DEG: f64 = 4.0 * std::f64::consts::PI / 180.0;

    fn th(t: f64) -> MeasurementStrength {
        MeasurementStrength::new(t).unwrap()
    }

    fn corr(c: f64) -> CorrelationParameter {
        CorrelationParameter::new(c).unwrap()
    }

    fn exact_fit(gamma: f64) -> DecayFit {
        DecayFit {
            gamma_hat: gamma,
            gamma_stderr: 0.0,
            model: FitModel::LogLinear,
            residual_norm: 0.0,
            unweighted: true,
            n_points: 7,
        }
    }

    fn synthetic(f: impl Fn(f64) -> f64, n: usize) -> SurvivalCurve {
        let times: Vec<f64> = (1..=n).map(|k| k as f64).collect();
        SurvivalCurve {
            mean: times.iter().map(|&t| f(t)).collect(),
            std: vec![0.0; n],
            times,
            n_realizations: 100,
            covariance: None,
        }
    }

    fn probe_curves(c: f64, m: usize, seed: u64) -> Vec<(MeasurementStrength, SurvivalCurve)> {
        let base = ExperimentConfig::new(FOUR_DEG, th(1.0), corr(c), seed).with_realizations(m);
        theta_sweep_curves(&base, &[th(0.25), th(0.5), th(0.75), th(1.0)]).unwrap()
    }

    #[test]
    fn exact_exponential_unweighted() {
        let fit = fit_decay_rate(&synthetic(|t| (-0.01 * t).exp(), 7), th(1.0), 1.0, FitModel::LogLinear).unwrap();
        assert!(fit.unweighted);
        assert_abs_diff_eq!(fit.gamma_hat, 0.01, epsilon = 1e-15);
        assert!(fit.gamma_stderr < 1e-14);
    }

    #[test]
    fn projective_curve_gives_log_cos_squared() {
        let curve = run_ensemble(&ExperimentConfig::new(FOUR_DEG, th(0.0), corr(0.4), 1)).unwrap();
        let fit = fit_decay_rate(&curve, th(0.0), 1.0, FitModel::LogLinear).unwrap();
        assert!(fit.unweighted);
        assert_abs_diff_eq!(fit.gamma_hat, 4.877842985503351e-3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.gamma_hat, -(FOUR_DEG.cos().powi(2)).ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_linear_rejects_nonpositive_means() {
        let curve = synthetic(|t| 1.0 - 0.2 * t, 7);
        match fit_decay_rate(&curve, th(1.0), 1.0, FitModel::LogLinear) {
            Err(Error::MalformedFit(msg)) => assert!(msg.contains("full_model")),
            other => panic!("{other:?}"),
        }
        let short = synthetic(|_| 0.5, 1);
        assert!(fit_decay_rate(&short, th(1.0), 1.0, FitModel::LogLinear).is_err());
    }

    #[test]
    fn full_model_recovers_its_own_rate() {
        for (t, g) in [(1.0, 0.011), (0.5, 0.007), (0.25, 0.02)] {
            let g0 = absorption_rate_gamma0(th(t), 1.0, DEFAULT_ABSORPTION_CONVENTION).unwrap();
            let rates = RateSet::new(g, g0, 0.0).unwrap();
            let curve = synthetic(|x| averaged_survival(x, &rates), 7);
            let fit = fit_decay_rate(&curve, th(t), 1.0, FitModel::FullModel).unwrap();
            assert_abs_diff_eq!(fit.gamma_hat, g, epsilon = 1e-10);
        }
    }

    #[test]
    fn exact_chain_recovers_rate_on_simulation() {
        let config = ExperimentConfig::new(FOUR_DEG, th(1.0), corr(0.4), 12).with_realizations(100_000);
        let curve = run_ensemble(&config).unwrap();
        let truth = decay_rate_gamma(FOUR_DEG, 1.0, corr(0.4), th(1.0)).unwrap();
        assert_abs_diff_eq!(truth, 1.1372383672037122e-2, epsilon = 1e-15);

        let fit = fit_decay_rate(&curve, th(1.0), 1.0, FitModel::ExactChain { delta_phi: FOUR_DEG }).unwrap();
        assert!((fit.gamma_hat - truth).abs() < 3.0 * fit.gamma_stderr, "{} ± {}", fit.gamma_hat, fit.gamma_stderr);

        // The asymptotic model misses the finite-N transient and lands far low.
        let full = fit_decay_rate(&curve, th(1.0), 1.0, FitModel::FullModel).unwrap();
        assert!(truth - full.gamma_hat > 3.0 * full.gamma_stderr);
    }

    #[test]
    fn exact_chain_needs_block_times_and_theta() {
        let mut curve = synthetic(|t| (-0.01 * t).exp(), 7);
        assert!(matches!(
            fit_decay_rate(&curve, th(0.0), 1.0, FitModel::ExactChain { delta_phi: FOUR_DEG }),
            Err(Error::NonIdentifiable(_))
        ));
        curve.times[3] = 10.0;
        assert!(matches!(
            fit_decay_rate(&curve, th(0.5), 1.0, FitModel::ExactChain { delta_phi: FOUR_DEG }),
            Err(Error::MalformedFit(_))
        ));
    }

    #[test]
    fn inversion_examples() {
        let d2 = FOUR_DEG * FOUR_DEG;
        for t in [0.1, 0.5, 1.0] {
            let r = infer_correlation(&exact_fit(d2), th(t), FOUR_DEG, 1.0).unwrap();
            assert_abs_diff_eq!(r.c_hat, 0.0, epsilon = 1e-15);
        }
        let r = infer_correlation(&exact_fit(1.1372383672037122e-2), th(1.0), FOUR_DEG, 1.0).unwrap();
        assert_abs_diff_eq!(r.c_hat, 0.4, epsilon = 1e-12);
        assert_eq!(r.regime, Regime::Qze);
        let r = infer_correlation(&exact_fit(1.2184696791468343e-3), th(1.0), FOUR_DEG, 1.0).unwrap();
        assert_abs_diff_eq!(r.c_hat, -0.6, epsilon = 1e-12);
        assert_eq!(r.regime, Regime::Aze);
        // rounded rates from a report still land close
        let r = infer_correlation(&exact_fit(1.13724e-2), th(1.0), FOUR_DEG, 1.0).unwrap();
        assert_abs_diff_eq!(r.c_hat, 0.4, epsilon = 1e-5);
    }

    #[test]
    fn inversion_errors_and_clamping() {
        assert!(matches!(
            infer_correlation(&exact_fit(0.01), th(0.0), FOUR_DEG, 1.0),
            Err(Error::NonIdentifiable(_))
        ));
        assert!(matches!(
            infer_correlation(&exact_fit(0.0), th(0.5), FOUR_DEG, 1.0),
            Err(Error::MalformedFit(_))
        ));
        // r = 5 at theta = 0.5 gives C = 4/3
        let r = infer_correlation(&exact_fit(5.0 * FOUR_DEG * FOUR_DEG), th(0.5), FOUR_DEG, 1.0).unwrap();
        assert!(r.clamped);
        assert_eq!(r.c_hat, 1.0);
        assert!(r.c_interval.0 <= r.c_hat && r.c_hat <= r.c_interval.1);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(Regime::classify(0.01, 0.3, 0.1), Regime::Qze);
        assert_eq!(Regime::classify(-0.3, -0.01, 0.1), Regime::Aze);
        assert_eq!(Regime::classify(-0.05, 0.05, 0.1), Regime::Markovian);
        assert_eq!(Regime::classify(-0.2, 0.2, 0.1), Regime::Indeterminate);
    }

    #[test]
    fn diagnose_requires_a_probe() {
        let curve = run_ensemble(&ExperimentConfig::new(FOUR_DEG, th(0.0), corr(0.4), 1)).unwrap();
        assert!(matches!(
            diagnose(&[(th(0.0), curve)], FOUR_DEG, 1.0),
            Err(Error::NonIdentifiable(_))
        ));
    }

    #[test]
    fn diagnose_end_to_end() {
        let calibration = run_ensemble(&ExperimentConfig::new(FOUR_DEG, th(0.0), corr(0.0), 5)).unwrap();
        for (c, lo, hi, regime) in [
            (0.4, 0.3, 0.5, Some(Regime::Qze)),
            (0.0, -0.1, 0.1, Some(Regime::Markovian)),
            (-0.6, -0.7, -0.5, Some(Regime::Aze)),
        ] {
            let mut curves = probe_curves(c, 100_000, 2);
            curves.push((th(0.0), calibration.clone()));
            let report = diagnose(&curves, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(report.delta_phi, FOUR_DEG, epsilon = 1e-12);
            assert!((lo..=hi).contains(&report.c_hat), "C={c}: {}", report.c_hat);
            assert_eq!(Some(report.regime), regime, "C={c}");
        }
    }

    #[test]
    fn interval_coverage_over_repetitions() {
        let covered = (0..50u64)
            .filter(|&rep| {
                let report = diagnose(&probe_curves(0.4, 10_000, 1000 + rep), FOUR_DEG, 1.0).unwrap();
                report.c_interval.0 <= 0.4 && 0.4 <= report.c_interval.1
            })
            .count();
        assert!(covered >= 43, "covered {covered} of 50");
    }

    #[test]
    fn report_serialisation() {
        let r = infer_correlation(&exact_fit(1.1372383672037122e-2), th(1.0), FOUR_DEG, 1.0).unwrap();
        let kv = r.to_key_value();
        assert!(kv.contains("regime = \"QZE\""));
        assert!(kv.starts_with("c_hat = 4.0000000000"));
        let row = r.to_csv_row();
        assert_eq!(row.split(',').count(), DiagnosisReport::CSV_HEADER.split(',').count());
    }

    proptest! {
        #[test]
        fn algebraic_round_trip(c in -0.999f64..0.999, t in 1e-3f64..=1.0) {
            let g = decay_rate_gamma(FOUR_DEG, 1.0, corr(c), th(t)).unwrap();
            let r = infer_correlation(&exact_fit(g), th(t), FOUR_DEG, 1.0).unwrap();
            prop_assert!((r.c_hat - c).abs() <= 1e-12, "{} vs {c}", r.c_hat);
        }

        #[test]
        fn estimate_increases_with_rate(a in 1e-4f64..0.1, b in 1e-4f64..0.1, t in 0.05f64..=1.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let set = |g: f64| invert_rate(g, 0.0, t, FOUR_DEG, 1.0).unwrap().0;
            prop_assert!(set(lo) < set(hi));
        }
    }
}
