//! Bath and measurement-control spectra on the discrete-time frequency band
//! `(-π/τ, π/τ)`, and the decay rate as their spectral overlap.
//!
//! Both spectra are Poisson kernels in `ωτ`: the bath spectrum with radius
//! `C`, the control spectrum with radius `θ`. The overlap integral
//! `γ = 2π ∫ G(ω) F(ω) dω` of two Poisson kernels has the closed form
//! [`decay_rate_gamma`](crate::analytic::decay_rate_gamma); here it is
//! computed by quadrature, which serves as the independent check.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analytic::{check_tau, decay_rate_gamma};
use crate::error::{Error, Result};
use crate::noise::CorrelationParameter;
use crate::polarization::MeasurementStrength;

/// Above this `|C|` or `θ` the kernels are too sharp for the default
/// quadrature and the closed form is used instead.
pub const NEAR_DEGENERATE: f64 = 0.95;

/// Default ω grid size for emitted spectra.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// A spectral density value, flagged when the kernel is a delta comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub value: f64,
    /// The kernel radius is 1, so the true spectrum is a sum of delta
    /// functions; `value` is 0 off the support.
    pub degenerate: bool,
}

/// `r`-Poisson kernel `(1 - r²)/(1 + r² - 2r cos x)`.
fn poisson_kernel(r: f64, x: f64) -> f64 {
    (1.0 - r * r) / (1.0 + r * r - 2.0 * r * x.cos())
}

/// Spectral density of the rotation-angle fluctuations,
/// `G(ω) = Δφ²/(2πτ) · (1 - C²)/(1 + C² - 2C cos ωτ)`.
pub fn bath_spectrum(omega: f64, delta_phi: f64, tau: f64, c: CorrelationParameter) -> Density {
    let c = c.value();
    if c.abs() >= 1.0 {
        return Density {
            value: 0.0,
            degenerate: true,
        };
    }
    Density {
        value: delta_phi * delta_phi / (2.0 * PI * tau) * poisson_kernel(c, omega * tau),
        degenerate: false,
    }
}

/// Measurement control spectrum,
/// `F(ω) = τ/(2π) · (1 - θ²)/(1 + θ² - 2θ cos ωτ)`.
pub fn control_spectrum(omega: f64, tau: f64, theta: MeasurementStrength) -> Density {
    let th = theta.value();
    if th >= 1.0 {
        return Density {
            value: 0.0,
            degenerate: true,
        };
    }
    Density {
        value: tau / (2.0 * PI) * poisson_kernel(th, omega * tau),
        degenerate: false,
    }
}

/// Lorentzian widths of the bath spectrum near `C = ±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathLinewidths {
    /// `Γ_B = (1 - C)/τ`, width of the central peak for correlated noise.
    pub gamma_b: f64,
    /// `Γ_B' = (1 + C)/τ`, width of the band-edge peaks for anti-correlated noise.
    pub gamma_b_prime: f64,
}

impl BathLinewidths {
    pub fn new(c: CorrelationParameter, tau: f64) -> Self {
        Self {
            gamma_b: (1.0 - c.value()) / tau,
            gamma_b_prime: (1.0 + c.value()) / tau,
        }
    }
}

fn lorentzian(delta_phi: f64, tau: f64, width: f64, detuning: f64) -> f64 {
    delta_phi * delta_phi / (PI * tau * tau) * width / (width * width + detuning * detuning)
}

/// Narrow-Lorentzian form of `G(ω)` for `C` close to 1.
pub fn lorentz_correlated_approx(omega: f64, delta_phi: f64, tau: f64, c: CorrelationParameter) -> f64 {
    lorentzian(delta_phi, tau, BathLinewidths::new(c, tau).gamma_b, omega)
}

/// Two band-edge Lorentzians at `ω = ±π/τ`, the form of `G(ω)` for `C`
/// close to -1.
pub fn lorentz_anticorrelated_approx(omega: f64, delta_phi: f64, tau: f64, c: CorrelationParameter) -> f64 {
    let width = BathLinewidths::new(c, tau).gamma_b_prime;
    [-1.0, 1.0]
        .iter()
        .map(|k| lorentzian(delta_phi, tau, width, PI / tau + k * omega))
        .sum()
}

/// Composite trapezoid rule over one period `(-π/τ, π/τ)` with `n` nodes.
///
/// For smooth periodic integrands this converges geometrically; for a
/// Poisson kernel of radius `r` the error falls like `r^n`.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, tau: f64, n: usize) -> f64 {
    let h = 2.0 * PI / (n as f64 * tau);
    let start = -PI / tau;
    (0..n).map(|j| f(start + j as f64 * h)).sum::<f64>() * h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 4096,
            max_nodes: 1 << 22,
            rel_tol: 1e-10,
        }
    }
}

impl QuadratureOptions {
    pub fn with_initial_nodes(n: usize) -> Self {
        Self {
            initial_nodes: n,
            max_nodes: n.saturating_mul(256),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub nodes: usize,
}

/// Periodic trapezoid with node doubling until the relative change drops
/// below `opts.rel_tol`.
pub fn integrate_periodic<F: Fn(f64) -> f64>(f: F, tau: f64, opts: QuadratureOptions) -> Result<Quadrature> {
    check_tau(tau)?;
    if opts.initial_nodes == 0 {
        return Err(Error::Invalid("quadrature needs at least one node".into()));
    }
    let mut n = opts.initial_nodes;
    let mut prev = periodic_trapezoid(&f, tau, n);
    let mut change = f64::INFINITY;
    while n.saturating_mul(2) <= opts.max_nodes {
        n *= 2;
        let next = periodic_trapezoid(&f, tau, n);
        change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        prev = next;
        if change < opts.rel_tol {
            return Ok(Quadrature { value: next, nodes: n });
        }
    }
    Err(Error::Convergence {
        estimate: prev,
        change,
        nodes: n,
    })
}

/// Decay rate as the overlap `2π ∫ G(ω) F(ω) dω` over `(-π/τ, π/τ)`.
///
/// `n_quadrature` is the starting node count; it is doubled (at most 256×)
/// until converged. Kernels sharper than [`NEAR_DEGENERATE`] fall back to the
/// closed form with a warning.
pub fn kk_decay_rate(
    delta_phi: f64,
    tau: f64,
    c: CorrelationParameter,
    theta: MeasurementStrength,
    n_quadrature: usize,
) -> Result<f64> {
    kk_decay_rate_with(delta_phi, tau, c, theta, QuadratureOptions::with_initial_nodes(n_quadrature))
}

pub fn kk_decay_rate_with(
    delta_phi: f64,
    tau: f64,
    c: CorrelationParameter,
    theta: MeasurementStrength,
    opts: QuadratureOptions,
) -> Result<f64> {
    check_tau(tau)?;
    if c.value().abs() >= 1.0 && theta.value() >= 1.0 {
        return Err(Error::DegenerateKernels);
    }
    let ct = c.value() * theta.value();
    if ct >= 1.0 {
        return Err(Error::Singular { product: ct });
    }
    if c.value().abs() > NEAR_DEGENERATE || theta.value() > NEAR_DEGENERATE {
        log::warn!(
            "kernel radius above {NEAR_DEGENERATE} (C = {}, theta = {}); using the closed-form rate",
            c.value(),
            theta.value()
        );
        return decay_rate_gamma(delta_phi, tau, c, theta);
    }
    let integrand = |w: f64| {
        2.0 * PI * bath_spectrum(w, delta_phi, tau, c).value * control_spectrum(w, tau, theta).value
    };
    Ok(integrate_periodic(integrand, tau, opts)?.value)
}

/// Midpoint ω grid of `n` points spanning `(-π/τ, π/τ)`; symmetric about 0.
pub fn omega_grid(tau: f64, n: usize) -> Vec<f64> {
    let h = 2.0 * PI / (n as f64 * tau);
    (0..n).map(|j| -PI / tau + (j as f64 + 0.5) * h).collect()
}

/// A spectrum sampled on the discrete-time band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub degenerate: bool,
}

impl SpectralFunction {
    pub fn sample<F: Fn(f64) -> Density>(f: F, tau: f64, n: usize) -> Self {
        let omegas = omega_grid(tau, n);
        let mut degenerate = false;
        let values = omegas
            .iter()
            .map(|&w| {
                let d = f(w);
                degenerate |= d.degenerate;
                d.value
            })
            .collect();
        Self {
            omegas,
            values,
            degenerate,
        }
    }

    /// Frequency of the largest sample (first one on ties).
    pub fn argmax(&self) -> Option<f64> {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })?;
        Some(self.omegas[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Bath,
    Control,
}

impl SpectrumKind {
    pub fn identifier(self) -> &'static str {
        match self {
            SpectrumKind::Bath => "bath_spectrum",
            SpectrumKind::Control => "control_spectrum",
        }
    }

    pub fn parameter_name(self) -> &'static str {
        match self {
            SpectrumKind::Bath => "C",
            SpectrumKind::Control => "theta",
        }
    }
}

/// A spectrum tabulated over (parameter, ω).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub kind: SpectrumKind,
    pub delta_phi: f64,
    pub tau: f64,
    pub parameters: Vec<f64>,
    pub omegas: Vec<f64>,
    /// `rows[i][j]` is the value at `parameters[i]`, `omegas[j]`.
    pub rows: Vec<Vec<f64>>,
}

/// `G(ω)` over the given `C` values. Rows are evaluated in parallel.
pub fn bath_grid(delta_phi: f64, tau: f64, cs: &[f64], n_omega: usize) -> Result<SpectrumGrid> {
    check_tau(tau)?;
    let params = cs
        .iter()
        .map(|&c| CorrelationParameter::new(c))
        .collect::<Result<Vec<_>>>()?;
    let omegas = omega_grid(tau, n_omega);
    let rows = params
        .par_iter()
        .map(|&c| omegas.iter().map(|&w| bath_spectrum(w, delta_phi, tau, c).value).collect())
        .collect();
    Ok(SpectrumGrid {
        kind: SpectrumKind::Bath,
        delta_phi,
        tau,
        parameters: cs.to_vec(),
        omegas,
        rows,
    })
}

/// `F(ω)` over the given `θ` values. `delta_phi` is carried for the header only.
pub fn control_grid(delta_phi: f64, tau: f64, thetas: &[f64], n_omega: usize) -> Result<SpectrumGrid> {
    check_tau(tau)?;
    let params = thetas
        .iter()
        .map(|&t| MeasurementStrength::new(t))
        .collect::<Result<Vec<_>>>()?;
    let omegas = omega_grid(tau, n_omega);
    let rows = params
        .par_iter()
        .map(|&t| omegas.iter().map(|&w| control_spectrum(w, tau, t).value).collect())
        .collect();
    Ok(SpectrumGrid {
        kind: SpectrumKind::Control,
        delta_phi,
        tau,
        parameters: thetas.to_vec(),
        omegas,
        rows,
    })
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    const FOUR_DEG: f64 = 4.0 * PI / 180.0;

    fn th(t: f64) -> MeasurementStrength {
        MeasurementStrength::new(t).unwrap()
    }

    fn corr(c: f64) -> CorrelationParameter {
        CorrelationParameter::new(c).unwrap()
    }

    #[test]
    fn bath_examples() {
        let flat = FOUR_DEG * FOUR_DEG / (2.0 * PI);
        for w in [-3.0, 0.0, 1.1, 3.14] {
            assert_relative_eq!(bath_spectrum(w, FOUR_DEG, 1.0, corr(0.0)).value, flat, max_relative = 1e-15);
        }
        assert_relative_eq!(bath_spectrum(0.0, FOUR_DEG, 1.0, corr(0.5)).value, 2.327105669325773e-3, max_relative = 1e-13);
        assert_relative_eq!(
            bath_spectrum(PI, FOUR_DEG, 1.0, corr(-0.5)).value,
            bath_spectrum(0.0, FOUR_DEG, 1.0, corr(0.5)).value,
            max_relative = 1e-14
        );
        let d = bath_spectrum(0.3, FOUR_DEG, 1.0, corr(1.0));
        assert!(d.degenerate);
        assert_eq!(d.value, 0.0);
        assert!(bath_spectrum(0.3, FOUR_DEG, 1.0, corr(-1.0)).degenerate);
    }

    #[test]
    fn control_examples() {
        for w in [-3.0, 0.0, 2.0] {
            assert_relative_eq!(control_spectrum(w, 1.0, th(0.0)).value, 1.0 / (2.0 * PI), max_relative = 1e-15);
        }
        assert_relative_eq!(control_spectrum(0.0, 1.0, th(0.5)).value, 0.477464829275686, max_relative = 1e-13);
        assert_relative_eq!(control_spectrum(PI, 1.0, th(0.5)).value, 0.0530516476972984, max_relative = 1e-13);
        assert!(control_spectrum(0.0, 1.0, th(1.0)).degenerate);
    }

    #[test]
    fn kk_examples() {
        let d2 = FOUR_DEG * FOUR_DEG;
        assert_relative_eq!(kk_decay_rate(FOUR_DEG, 1.0, corr(0.0), th(0.0), 4096).unwrap(), d2, max_relative = 1e-12);
        assert_relative_eq!(kk_decay_rate(FOUR_DEG, 1.0, corr(0.4), th(0.5), 4096).unwrap(), 7.310818074881004e-3, max_relative = 1e-10);
        assert_relative_eq!(kk_decay_rate(FOUR_DEG, 1.0, corr(-0.6), th(0.5), 4096).unwrap(), 2.6243962320085658e-3, max_relative = 1e-10);
    }

    #[test]
    fn kk_errors() {
        assert!(matches!(
            kk_decay_rate(FOUR_DEG, 1.0, corr(1.0), th(1.0), 4096),
            Err(Error::DegenerateKernels)
        ));
        let opts = QuadratureOptions {
            initial_nodes: 4,
            max_nodes: 16,
            rel_tol: 1e-10,
        };
        match kk_decay_rate_with(FOUR_DEG, 1.0, corr(0.9), th(0.9), opts) {
            Err(Error::Convergence { estimate, nodes, .. }) => {
                assert!(estimate > 0.0);
                assert_eq!(nodes, 16);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
        // one degenerate kernel: closed form
        let g = kk_decay_rate(FOUR_DEG, 1.0, corr(1.0), th(0.5), 4096).unwrap();
        assert_relative_eq!(g, 3.0 * FOUR_DEG * FOUR_DEG, max_relative = 1e-13);
    }

    #[test]
    fn lorentz_correlated_examples() {
        assert_relative_eq!(lorentz_correlated_approx(0.0, FOUR_DEG, 1.0, corr(0.99)), 0.155140377955051, max_relative = 1e-10);
        let c = corr(0.99);
        let gb = BathLinewidths::new(c, 1.0).gamma_b;
        assert_relative_eq!(
            lorentz_correlated_approx(gb, FOUR_DEG, 1.0, c),
            0.5 * lorentz_correlated_approx(0.0, FOUR_DEG, 1.0, c),
            max_relative = 1e-12
        );
        let exact = bath_spectrum(0.0, FOUR_DEG, 1.0, c).value;
        let approx = lorentz_correlated_approx(0.0, FOUR_DEG, 1.0, c);
        assert!((approx - exact).abs() / exact < 0.02);
    }

    #[test]
    fn lorentz_anticorrelated_examples() {
        let c = corr(-0.99);
        let tau = 1.0;
        let width = BathLinewidths::new(c, tau).gamma_b_prime;
        let peak = lorentz_anticorrelated_approx(PI / tau, FOUR_DEG, tau, c);
        assert_relative_eq!(peak, FOUR_DEG * FOUR_DEG / (PI * tau * tau * width), max_relative = 1e-5);
        for w in [0.0, 0.4, 1.7, 3.0] {
            assert_relative_eq!(
                lorentz_anticorrelated_approx(w, FOUR_DEG, tau, c),
                lorentz_anticorrelated_approx(-w, FOUR_DEG, tau, c),
                max_relative = 1e-14
            );
        }
        let grid = SpectralFunction::sample(|w| bath_spectrum(w, FOUR_DEG, tau, c), tau, 4096);
        let peak_at = grid.argmax().unwrap();
        assert_abs_diff_eq!(peak_at.abs(), PI / tau, epsilon = 2.0 * PI / 4096.0);
    }

    #[test]
    fn normalisations() {
        for t in [0.0, 0.3, 0.7, 0.95] {
            let q = integrate_periodic(|w| control_spectrum(w, 1.0, th(t)).value, 1.0, QuadratureOptions::default()).unwrap();
            assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-10);
        }
        for c in [-0.9, 0.0, 0.9] {
            for tau in [0.05, 1.0] {
                let q = integrate_periodic(|w| bath_spectrum(w, FOUR_DEG, tau, corr(c)).value, tau, QuadratureOptions::default()).unwrap();
                let expect = FOUR_DEG * FOUR_DEG / (tau * tau);
                assert!((q.value - expect).abs() <= 1e-10 * expect.max(1.0), "C={c} tau={tau}");
            }
        }
    }

    #[test]
    fn peak_structure() {
        for c in [0.1, 0.5, 0.9] {
            let f = SpectralFunction::sample(|w| bath_spectrum(w, FOUR_DEG, 1.0, corr(c)), 1.0, 512);
            assert!(f.argmax().unwrap().abs() < 2.0 * PI / 512.0);
        }
        for c in [-0.1, -0.5, -0.9] {
            let f = SpectralFunction::sample(|w| bath_spectrum(w, FOUR_DEG, 1.0, corr(c)), 1.0, 512);
            assert!((f.argmax().unwrap().abs() - PI).abs() < 2.0 * PI / 512.0);
        }
    }

    #[test]
    fn grids_are_symmetric_and_ordered() {
        let g = bath_grid(FOUR_DEG, 0.05, &linspace(-0.9, 0.9, 7), 64).unwrap();
        assert_eq!(g.rows.len(), 7);
        for row in &g.rows {
            for j in 0..32 {
                assert_relative_eq!(row[j], row[63 - j], max_relative = 1e-12);
            }
        }
        let omegas = omega_grid(0.05, 64);
        assert_relative_eq!(omegas[0], -omegas[63], max_relative = 1e-14);
        assert!(omegas[0] > -PI / 0.05);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 1.0, 101);
        assert_eq!(v.len(), 101);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[100], 1.0);
        assert_abs_diff_eq!(v[50], 0.0, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn spectra_symmetric_nonnegative(w in -3.14f64..3.14, c in -0.999f64..0.999, t in 0.0f64..0.999, tau in 0.01f64..5.0) {
            let w = w / tau;
            let g = bath_spectrum(w, FOUR_DEG, tau, corr(c)).value;
            let f = control_spectrum(w, tau, th(t)).value;
            prop_assert!(g >= 0.0 && f >= 0.0);
            prop_assert!((g - bath_spectrum(-w, FOUR_DEG, tau, corr(c)).value).abs() <= 1e-14 * g.max(1e-300));
            prop_assert!((f - control_spectrum(-w, tau, th(t)).value).abs() <= 1e-14 * f.max(1e-300));
        }
    }
}
