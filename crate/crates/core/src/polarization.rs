//! Single-photon polarisation dynamics through a chain of rotation and
//! partial-measurement blocks.
//!
//! The state is the unnormalised real amplitude pair `(a_H, a_V)`. Each block
//! rotates the linear polarisation by a signed jump and then applies the
//! partially-selective measurement `Π = |H⟩⟨H| + θ|V⟩⟨V|`, which leaves the
//! horizontal amplitude untouched and scales the vertical one by `θ`. The
//! squared norm of the state is the probability that the photon is still in
//! flight; `a_H²` is the horizontal survival probability.

use crate::error::{Error, Result};

/// Row-major real 2×2 matrix acting on `(a_H, a_V)`.
pub type Matrix2 = [[f64; 2]; 2];

/// Unnormalised real polarisation amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarisationAmplitudes {
    pub h: f64,
    pub v: f64,
}

impl PolarisationAmplitudes {
    /// The horizontally polarised initial state `|H⟩ = (1, 0)`.
    pub const HORIZONTAL: Self = Self { h: 1.0, v: 0.0 };
    pub const VERTICAL: Self = Self { h: 0.0, v: 1.0 };

    pub const fn new(h: f64, v: f64) -> Self {
        Self { h, v }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h * self.h + self.v * self.v
    }

    /// `|⟨H|ψ⟩|²`.
    pub fn horizontal_probability(&self) -> f64 {
        self.h * self.h
    }

    pub fn apply(&self, m: &Matrix2) -> Self {
        Self {
            h: m[0][0] * self.h + m[0][1] * self.v,
            v: m[1][0] * self.h + m[1][1] * self.v,
        }
    }
}

impl Default for PolarisationAmplitudes {
    fn default() -> Self {
        Self::HORIZONTAL
    }
}

/// A signed rotation of the linear polarisation angle, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationJump(pub f64);

impl RotationJump {
    pub fn angle(self) -> f64 {
        self.0
    }

    /// `+1.0` or `-1.0`; zero-angle jumps count as positive.
    pub fn sign(self) -> f64 {
        if self.0 < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl std::ops::Neg for RotationJump {
    type Output = Self;

    fn neg(self) -> Self {
        RotationJump(-self.0)
    }
}

/// Vertical-amplitude transmittance `θ ∈ [0, 1]` of the partial measurement.
///
/// `θ = 0` is the projective measurement onto `|H⟩`, `θ = 1` is no
/// measurement at all.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeasurementStrength(f64);

impl MeasurementStrength {
    pub const PROJECTIVE: Self = Self(0.0);
    pub const NONE: Self = Self(1.0);

    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(Error::domain("theta", theta, "0 <= theta <= 1"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MeasurementStrength {
    type Error = Error;

    fn try_from(theta: f64) -> Result<Self> {
        Self::new(theta)
    }
}

/// Planar rotation of `(a_H, a_V)` by `delta_phi`.
///
/// This is `exp(-i σ_y δ)` restricted to real amplitudes: a rotation by `2δ`
/// on the Bloch sphere, i.e. by `δ` of the linear polarisation direction.
pub fn rotation_matrix(delta_phi: f64) -> Matrix2 {
    let (s, c) = delta_phi.sin_cos();
    [[c, -s], [s, c]]
}

pub fn measurement_matrix(theta: MeasurementStrength) -> Matrix2 {
    [[1.0, 0.0], [0.0, theta.value()]]
}

pub fn matmul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// One block: rotate by `jump`, then measure with strength `theta`.
pub fn apply_block(
    state: PolarisationAmplitudes,
    jump: RotationJump,
    theta: MeasurementStrength,
) -> PolarisationAmplitudes {
    let (s, c) = jump.angle().sin_cos();
    PolarisationAmplitudes {
        h: c * state.h - s * state.v,
        v: theta.value() * (s * state.h + c * state.v),
    }
}

/// Horizontal survival `P_H(t_k)` after each of the blocks, starting from `|H⟩`.
///
/// Element `k - 1` of the result is `a_H²` after `k` blocks. The value before
/// any block (k = 0) is 1 and is not included.
pub fn trajectory_survival(jumps: &[RotationJump], theta: MeasurementStrength) -> Vec<f64> {
    let mut state = PolarisationAmplitudes::HORIZONTAL;
    jumps
        .iter()
        .map(|&jump| {
            state = apply_block(state, jump, theta);
            state.horizontal_probability()
        })
        .collect()
}

/// Fixed-magnitude block propagator for the Monte Carlo inner loop.
///
/// Jumps are `sign · Δφ`, so the trigonometric values are computed once.
#[derive(Debug, Clone, Copy)]
pub struct BlockPropagator {
    cos: f64,
    sin: f64,
    theta: f64,
}

impl BlockPropagator {
    pub fn new(delta_phi: f64, theta: MeasurementStrength) -> Self {
        let (sin, cos) = delta_phi.sin_cos();
        Self {
            cos,
            sin,
            theta: theta.value(),
        }
    }

    /// Applies one block with jump `sign · Δφ` (`positive` selects the sign).
    #[inline]
    pub fn step(&self, state: PolarisationAmplitudes, positive: bool) -> PolarisationAmplitudes {
        let s = if positive { self.sin } else { -self.sin };
        PolarisationAmplitudes {
            h: self.cos * state.h - s * state.v,
            v: self.theta * (s * state.h + self.cos * state.v),
        }
    }

    /// Writes `P_H` after each block into `out` (one entry per sign).
    pub fn survival_into(&self, signs: &[bool], out: &mut [f64]) {
        let mut state = PolarisationAmplitudes::HORIZONTAL;
        for (slot, &positive) in out.iter_mut().zip(signs) {
            state = self.step(state, positive);
            *slot = state.horizontal_probability();
        }
    }
}

/// Laboratory realisation of the partial measurement as a rotation `U(-α)`
/// followed by a polariser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationAngles {
    /// Pre-rotation angle `α = arctan θ`, radians.
    pub alpha: f64,
    /// Common amplitude factor `cos α` by which the physical chain differs
    /// from the ideal `Π`.
    pub transmittance: f64,
}

/// `projector ∘ U(-α)` restricted to the outgoing `|H⟩` mode equals
/// `cos α · Π` up to the output frame, with `tan α = θ`.
///
/// The simulation always uses the ideal `Π`; the counter-rotation that fixes
/// the outgoing frame does not change `P_H` and is not modelled.
pub fn realization_angles(theta: MeasurementStrength) -> RealizationAngles {
    let alpha = theta.value().atan();
    RealizationAngles {
        alpha,
        transmittance: alpha.cos(),
    }
}
