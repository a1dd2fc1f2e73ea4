//! Closed-form predictions for the averaged horizontal survival probability.
//!
//! Two families are covered:
//!
//! * Non-random evolution (`C = 1`, every jump identical up to a global sign):
//!   the exact two-eigenvalue solution of the block transfer matrix, with its
//!   Rabi (`θ = 1`) and projective (`θ = 0`) limits and the small-angle Zeno
//!   exponential.
//! * Random evolution (`-1 ≤ C < 1`): the smoothed two-level rate equations
//!   with polarisation decay rate `γ` and absorption rate `Γ₀`, and their
//!   solution `P̄_H(t)`.
//!
//! The rate-equation results are small-angle, long-time asymptotics. For a
//! handful of blocks they carry a transient error of order `Δφ²·C/(1-C)²`;
//! the exact finite-chain expectation lives in [`crate::montecarlo`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::CorrelationParameter;
use crate::polarization::MeasurementStrength;

/// Below this `θ` the random-evolution solution is replaced by its projective
/// limit `exp(-Δφ² t / τ)`.
pub const PROJECTIVE_SWITCH: f64 = 1e-6;

/// Default `ε` in the validity condition `Δφ² ≤ ε (1 - C)(1 - Cθ)`.
pub const DEFAULT_VALIDITY_EPSILON: f64 = 0.1;

const CONFLUENT_GAP: f64 = 1e-9;

/// How the per-block amplitude transmittance `θ` maps onto `Γ₀`.
///
/// The vertical population is multiplied by `θ²` per block, so it is absorbed
/// at rate `-2 ln θ / τ = 2Γ₀` with `Γ₀ = -ln θ / τ`. That is the default;
/// the halved variant is kept for comparison against the brute-force average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbsorptionConvention {
    /// `Γ₀ = -ln θ / τ`.
    #[default]
    PerBlock,
    /// `Γ₀ = -ln θ / (2τ)`.
    HalfPerBlock,
}

pub const DEFAULT_ABSORPTION_CONVENTION: AbsorptionConvention = AbsorptionConvention::PerBlock;

/// Rates entering the averaged rate equations, all in 1/time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub gamma: f64,
    pub gamma0_absorption: f64,
    pub s: f64,
    pub nu: f64,
}

impl RateSet {
    /// `gamma0_absorption` may be `+inf` (projective limit).
    pub fn new(gamma: f64, gamma0_absorption: f64, nu: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::domain("gamma", gamma, "0 <= gamma < inf"));
        }
        if !(gamma0_absorption >= 0.0) {
            return Err(Error::domain("gamma0", gamma0_absorption, "gamma0 >= 0"));
        }
        if !(nu >= 0.0) {
            return Err(Error::domain("nu", nu, "nu >= 0"));
        }
        Ok(Self {
            gamma,
            gamma0_absorption,
            s: gamma.hypot(gamma0_absorption),
            nu,
        })
    }

    pub fn from_parameters(
        delta_phi: f64,
        tau: f64,
        c: CorrelationParameter,
        theta: MeasurementStrength,
        convention: AbsorptionConvention,
    ) -> Result<Self> {
        let gamma = decay_rate_gamma(delta_phi, tau, c, theta)?;
        let gamma0 = match absorption_rate_gamma0(theta, tau, convention) {
            Ok(g) => g,
            Err(Error::InfiniteRate) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Self::new(gamma, gamma0, effective_measurement_rate(theta, tau)?)
    }
}

/// Equidistant block times `t_k = k τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTiming {
    pub tau: f64,
    pub n_blocks: usize,
}

impl BlockTiming {
    pub fn new(tau: f64, n_blocks: usize) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, n_blocks })
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    /// `t_1, …, t_N`.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.n_blocks).map(|k| self.time(k)).collect()
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("tau", tau, "0 < tau < inf"))
    }
}

/// Exact `P_H(t_k)` for identical jumps of size `Δφ` in every block.
///
/// Uses the eigenvalues `λ± = ½[(1+θ)cos Δφ ± √((1+θ)²cos²Δφ - 4θ)]` of the
/// block transfer matrix in complex arithmetic. Where the eigenvalues merge
/// the confluent form `[(cos Δφ - λ) k λ^{k-1} + λ^k]²` is used instead.
pub fn nonrandom_survival(k: usize, delta_phi: f64, theta: MeasurementStrength) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let th = theta.value();
    let c = delta_phi.cos();
    let trace = (1.0 + th) * c;
    let disc = trace * trace - 4.0 * th;
    let root = Complex64::new(disc, 0.0).sqrt();
    let lp = (trace + root) * 0.5;
    let lm = (trace - root) * 0.5;
    let kk = k as i32;

    let value = if (lp - lm).norm() < CONFLUENT_GAP {
        let lambda = 0.5 * trace;
        let amp = (c - lambda) * kk as f64 * lambda.powi(kk - 1) + lambda.powi(kk);
        Complex64::new(amp * amp, 0.0)
    } else {
        let bracket = lp.powi(kk) * (c - lm) + lm.powi(kk) * (lp - c);
        bracket * bracket / disc
    };
    debug_assert!(
        value.im.abs() <= 1e-10 * value.re.abs().max(1.0),
        "imaginary residue {} at k={k}",
        value.im
    );
    value.re
}

/// Effective measurement rate `ν = (1 - θ) / ((1 + θ) τ)`.
pub fn effective_measurement_rate(theta: MeasurementStrength, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let th = theta.value();
    Ok((1.0 - th) / ((1.0 + th) * tau))
}

/// Small-angle Zeno decay `exp(-Δφ² t / (τ² ν))` for non-random evolution.
///
/// Meaningful when `Δφ ≪ 1 - θ`; the caller is expected to check that.
pub fn zeno_exponential(t: f64, delta_phi: f64, tau: f64, theta: MeasurementStrength) -> Result<f64> {
    if theta.value() >= 1.0 {
        return Err(Error::domain(
            "theta",
            theta.value(),
            "theta < 1 (the measurement rate vanishes at theta = 1)",
        ));
    }
    let nu = effective_measurement_rate(theta, tau)?;
    Ok((-delta_phi * delta_phi * t / (tau * tau * nu)).exp())
}

/// Polarisation decay rate `γ = (1 + Cθ)/(1 - Cθ) · Δφ²/τ`.
pub fn decay_rate_gamma(
    delta_phi: f64,
    tau: f64,
    c: CorrelationParameter,
    theta: MeasurementStrength,
) -> Result<f64> {
    check_tau(tau)?;
    let ct = c.value() * theta.value();
    if ct >= 1.0 {
        return Err(Error::Singular { product: ct });
    }
    Ok((1.0 + ct) / (1.0 - ct) * delta_phi * delta_phi / tau)
}

/// Absorption rate `Γ₀`; errors with [`Error::InfiniteRate`] at `θ = 0`.
pub fn absorption_rate_gamma0(
    theta: MeasurementStrength,
    tau: f64,
    convention: AbsorptionConvention,
) -> Result<f64> {
    check_tau(tau)?;
    let th = theta.value();
    if th == 0.0 {
        return Err(Error::InfiniteRate);
    }
    let per_block = -th.ln() / tau;
    Ok(match convention {
        AbsorptionConvention::PerBlock => per_block,
        AbsorptionConvention::HalfPerBlock => 0.5 * per_block,
    }
    .max(0.0))
}

/// `P̄_H(t) = e^{-(γ+Γ₀)t} [cosh(St) + (Γ₀/S) sinh(St)]`.
///
/// Evaluated as `½[(1+Γ₀/S) e^{(S-γ-Γ₀)t} + (1-Γ₀/S) e^{-(S+γ+Γ₀)t}]`, so both
/// exponents are non-positive. An infinite `Γ₀` gives the projective limit
/// `e^{-γt}`; `S = 0` gives 1.
pub fn averaged_survival(t: f64, rates: &RateSet) -> f64 {
    let (g, g0) = (rates.gamma, rates.gamma0_absorption);
    if g0.is_infinite() {
        return (-g * t).exp();
    }
    let s = rates.s;
    if s == 0.0 {
        return 1.0;
    }
    let ratio = g0 / s;
    let slow = (s - g - g0) * t;
    let fast = -(s + g + g0) * t;
    (0.5 * ((1.0 + ratio) * slow.exp() + (1.0 - ratio) * fast.exp())).clamp(0.0, 1.0)
}

/// Companion vertical population `P̄_V(t) = e^{-(γ+Γ₀)t} (γ/S) sinh(St)`.
pub fn averaged_vertical(t: f64, rates: &RateSet) -> f64 {
    let (g, g0) = (rates.gamma, rates.gamma0_absorption);
    let s = rates.s;
    if g0.is_infinite() || s == 0.0 {
        return 0.0;
    }
    let slow = (s - g - g0) * t;
    let fast = -(s + g + g0) * t;
    (0.5 * g / s * (slow.exp() - fast.exp())).max(0.0)
}

/// Weak-measurement limit `e^{-γt}`.
pub fn weak_measurement_survival(t: f64, gamma: f64) -> f64 {
    (-gamma * t).exp()
}

/// Right-hand side of the averaged rate equations.
///
/// Returns `(dP_H/dt, dP_V/dt) = (-γP_H + γP_V, γP_H - (γ + 2Γ₀)P_V)`.
pub fn rate_equation_rhs(p_h: f64, p_v: f64, rates: &RateSet) -> (f64, f64) {
    let g = rates.gamma;
    let g0 = rates.gamma0_absorption;
    (-g * p_h + g * p_v, g * p_h - (g + 2.0 * g0) * p_v)
}

/// Averaged survival at time `t` for a parameter point, covering `θ → 0`.
pub fn predicted_survival(
    t: f64,
    delta_phi: f64,
    tau: f64,
    c: CorrelationParameter,
    theta: MeasurementStrength,
    convention: AbsorptionConvention,
) -> Result<f64> {
    if theta.value() < PROJECTIVE_SWITCH {
        check_tau(tau)?;
        return Ok(weak_measurement_survival(t, delta_phi * delta_phi / tau));
    }
    let rates = RateSet::from_parameters(delta_phi, tau, c, theta, convention)?;
    Ok(averaged_survival(t, &rates))
}

/// Outcome of the small-jump validity condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub valid: bool,
    /// `Δφ² / [(1 - C)(1 - Cθ)]`.
    pub ratio: f64,
    pub epsilon: f64,
}

/// Checks `Δφ² ≤ ε (1 - C)(1 - Cθ)`.
pub fn validity_check(
    delta_phi: f64,
    c: CorrelationParameter,
    theta: MeasurementStrength,
    epsilon: f64,
) -> Validity {
    let var = delta_phi * delta_phi;
    let room = (1.0 - c.value()) * (1.0 - c.value() * theta.value());
    let ratio = if var == 0.0 {
        0.0
    } else if room <= 0.0 {
        f64::INFINITY
    } else {
        var / room
    };
    Validity {
        valid: ratio <= epsilon,
        ratio,
        epsilon,
    }
}
