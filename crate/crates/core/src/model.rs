//! The driven two-qubit model: drive envelopes, effective fields in the lab
//! and rotating frames, the Hamiltonian in the triplet basis
//! `(|dd>, |psi+>, |uu>)` (plus the singlet `|psi->` in full mode), the
//! closed-form spectrum and eigenvectors, the diabatic crossing times and
//! the adiabaticity ratio.
//!
//! Units: the exchange constant `xi` sets the energy scale, time is measured
//! in `1/xi` and `hbar = 1`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    basis_state, CubicCoefficients, HermitianMatrix, StateMatrix, StateVector, C64,
};

/// One Gaussian pulse `amplitude * exp(-(t - center)^2 / width^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Pulse {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Self {
        Self { amplitude, center, width }
    }

    #[inline]
    fn value(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        self.amplitude * (-x * x).exp()
    }

    #[inline]
    fn derivative(&self, t: f64) -> f64 {
        -2.0 * (t - self.center) / (self.width * self.width) * self.value(t)
    }
}

/// Transverse-field envelope `Omega(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Envelope {
    Zero,
    Constant { omega0: f64 },
    Gaussian(Pulse),
    TwinGaussian { a: Pulse, b: Pulse },
}

impl Envelope {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Zero => 0.0,
            Envelope::Constant { omega0 } => *omega0,
            Envelope::Gaussian(p) => p.value(t),
            Envelope::TwinGaussian { a, b } => a.value(t) + b.value(t),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Envelope::Zero | Envelope::Constant { .. } => 0.0,
            Envelope::Gaussian(p) => p.derivative(t),
            Envelope::TwinGaussian { a, b } => a.derivative(t) + b.derivative(t),
        }
    }

    /// Largest pulse amplitude.
    pub fn peak(&self) -> f64 {
        match self {
            Envelope::Zero => 0.0,
            Envelope::Constant { omega0 } => *omega0,
            Envelope::Gaussian(p) => p.amplitude,
            Envelope::TwinGaussian { a, b } => a.amplitude.max(b.amplitude),
        }
    }

    pub fn pulses(&self) -> Vec<Pulse> {
        match self {
            Envelope::Gaussian(p) => vec![*p],
            Envelope::TwinGaussian { a, b } => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("envelope: {msg}")));
        if let Envelope::Constant { omega0 } = self {
            if !(omega0.is_finite() && *omega0 >= 0.0) {
                return bad("amplitude must be finite and >= 0");
            }
        }
        for p in self.pulses() {
            if !(p.amplitude.is_finite() && p.amplitude >= 0.0) {
                return bad("amplitudes must be finite and >= 0");
            }
            if !(p.width.is_finite() && p.width > 0.0) {
                return bad("widths must be > 0");
            }
            if !p.center.is_finite() {
                return bad("centers must be finite");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rotating,
}

/// Triplet sector only (3 states) or the full two-spin space (4 states).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimMode {
    Triplet,
    Full,
}

impl DimMode {
    pub fn dim(self) -> usize {
        match self {
            DimMode::Triplet => 3,
            DimMode::Full => 4,
        }
    }
}

/// Physical constants and drive parameters of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Exchange constant.
    pub xi: f64,
    /// Rotation frequency of the transverse field.
    pub omega: f64,
    /// Longitudinal sweep rate `A`, `beta_z = A t`.
    pub sweep_rate: f64,
    pub envelope: Envelope,
    pub dim_mode: DimMode,
}

impl ModelParams {
    pub fn new(xi: f64, omega: f64, sweep_rate: f64, envelope: Envelope) -> Self {
        Self {
            xi,
            omega,
            sweep_rate,
            envelope,
            dim_mode: DimMode::Triplet,
        }
    }

    pub fn with_dim(mut self, dim_mode: DimMode) -> Self {
        self.dim_mode = dim_mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::Config(format!("xi must be > 0, got {}", self.xi)));
        }
        if !(self.sweep_rate.is_finite() && self.sweep_rate > 0.0) {
            return Err(Error::Config(format!(
                "sweep_rate_A must be > 0, got {}",
                self.sweep_rate
            )));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::Config(format!("omega must be >= 0, got {}", self.omega)));
        }
        self.envelope.validate()
    }

    /// Non-fatal remarks about the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.omega >= 2.0 * self.xi {
            out.push(format!(
                "omega = {} >= 2 xi = {}: the two diabatic crossings are not distinct in the usual order",
                self.omega,
                2.0 * self.xi
            ));
        }
        out
    }
}

/// Effective field `beta = mu B` in a given frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub frame: Frame,
}

impl FieldVector {
    pub fn new(x: f64, y: f64, z: f64, frame: Frame) -> Self {
        Self { x, y, z, frame }
    }

    pub fn transverse_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm_sq(&self) -> f64 {
        self.transverse_sq() + self.z * self.z
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Times at which the bare (zero-envelope) energies cross in the rotating
/// frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingTimes {
    /// `|dd>` meets `|psi+>`.
    pub t_a: f64,
    /// `|dd>` meets `|uu>`.
    pub t_b: f64,
}

pub fn envelope_value(envelope: &Envelope, t: f64) -> f64 {
    envelope.value(t)
}

pub fn envelope_derivative(envelope: &Envelope, t: f64) -> f64 {
    envelope.derivative(t)
}

/// Lab frame: `(Omega cos wt, Omega sin wt, A t)`. Rotating frame:
/// `(Omega, 0, A t - w)`.
#[inline]
pub fn field_at(params: &ModelParams, t: f64, frame: Frame) -> FieldVector {
    let omega_t = params.envelope.value(t);
    match frame {
        Frame::Lab => {
            let (s, c) = (params.omega * t).sin_cos();
            FieldVector::new(omega_t * c, omega_t * s, params.sweep_rate * t, frame)
        }
        Frame::Rotating => FieldVector::new(
            omega_t,
            0.0,
            params.sweep_rate * t - params.omega,
            frame,
        ),
    }
}

/// Hamiltonian in the ordered basis `(|dd>, |psi+>, |uu>[, |psi->])`.
///
/// Diagonal `(xi - bz, -xi, xi + bz[, -xi])`, couplings
/// `H[psi+][dd] = H[uu][psi+] = (bx - i by)/sqrt2`. The singlet row and
/// column carry no coupling at all.
#[inline]
pub fn hamiltonian<const N: usize>(params: &ModelParams, field: &FieldVector) -> HermitianMatrix<N> {
    const { assert!(N == 3 || N == 4, "spin model has dimension 3 or 4") };
    let xi = params.xi;
    let coupling = C64::new(field.x, -field.y) * FRAC_1_SQRT_2;
    let mut m = StateMatrix::<N>::zeros();
    m[(0, 0)] = C64::from(xi - field.z);
    m[(1, 1)] = C64::from(-xi);
    m[(2, 2)] = C64::from(xi + field.z);
    m[(1, 0)] = coupling;
    m[(0, 1)] = coupling.conj();
    m[(2, 1)] = coupling;
    m[(1, 2)] = coupling.conj();
    if N == 4 {
        m[(3, 3)] = C64::from(-xi);
    }
    HermitianMatrix::from_lower(&m)
}

/// Diagonal of the Hamiltonian, i.e. the bare (diabatic) energies.
pub fn diabatic_energies(params: &ModelParams, field: &FieldVector) -> [f64; 3] {
    [params.xi - field.z, -params.xi, params.xi + field.z]
}

/// Characteristic polynomial of the triplet block.
pub fn char_poly(params: &ModelParams, field: &FieldVector) -> CubicCoefficients {
    let xi = params.xi;
    let perp = field.transverse_sq();
    let bz2 = field.z * field.z;
    CubicCoefficients {
        c2: -xi,
        c1: -(perp + bz2 + xi * xi),
        c0: -(xi * (bz2 - perp) - xi * xi * xi),
    }
}

/// Below this the transverse field counts as zero and the Hamiltonian is
/// diagonal.
const TRANSVERSE_FLOOR: f64 = 1e-300;
const DENOMINATOR_FLOOR: f64 = 1e-10;
/// Relative residual above which the closed form counts as ill-conditioned.
const FORMULA_RESIDUAL: f64 = 1e-12;
const ANCHORED_RESIDUAL: f64 = 1e-8;

/// Closed-form eigenvector of the triplet block for eigenvalue `energy`.
///
/// With `b+- = bx +- i by` the unnormalized components are
/// `(b+/sqrt2, E - xi + bz, -b-(E - xi + bz) / (sqrt2 (xi + bz - E)))`.
///
/// Fallbacks:
/// * a purely longitudinal field makes the matrix diagonal; the bare state
///   whose diagonal entry is nearest `energy` is returned;
/// * when the transverse field is small next to the level spacing, the
///   middle component above suffers cancellation. The same eigenvector is
///   then rebuilt from the tridiagonal recurrence anchored on the bare state
///   whose energy is nearest `energy`, which divides only by energy
///   differences to the other two bare levels.
///
/// [`Error::DegenerateDenominator`] is returned when neither form is usable.
pub fn analytic_eigenvector(
    params: &ModelParams,
    field: &FieldVector,
    energy: f64,
) -> Result<StateVector<3>> {
    let xi = params.xi;
    let diag = diabatic_energies(params, field);
    if field.transverse_sq().sqrt() <= TRANSVERSE_FLOOR {
        let nearest = (0..3)
            .min_by(|&a, &b| (diag[a] - energy).abs().total_cmp(&(diag[b] - energy).abs()))
            .unwrap_or(0);
        return Ok(basis_state(nearest));
    }
    let h = hamiltonian::<3>(params, field);
    let scale = 1.0 + energy.abs() + h.matrix().norm();
    let residual = |v: &StateVector<3>| (h.matrix() * v - v * C64::from(energy)).norm() / scale;

    let denominator = xi + field.z - energy;
    let b_plus = C64::new(field.x, field.y);
    let direct = if denominator.abs() < DENOMINATOR_FLOOR {
        None
    } else {
        let middle = energy - xi + field.z;
        unit(StateVector::<3>::from([
            b_plus * FRAC_1_SQRT_2,
            C64::from(middle),
            -b_plus.conj() * (middle * FRAC_1_SQRT_2 / denominator),
        ]))
    };
    if let Some(v) = direct.filter(|v| residual(v) <= FORMULA_RESIDUAL) {
        return Ok(v);
    }

    // the rebuilt vector only replaces the formula when it actually is an
    // eigenvector, so an `energy` off the spectrum still reports the
    // singular denominator
    let anchored = anchored_eigenvector(h.matrix(), &diag, energy)
        .filter(|v| residual(v) <= ANCHORED_RESIDUAL);
    let best = match (direct, anchored) {
        (Some(a), Some(b)) => Some(if residual(&b) < residual(&a) { b } else { a }),
        (a, b) => a.or(b),
    };
    best.ok_or(Error::DegenerateDenominator {
        denominator: denominator.abs(),
    })
}

fn unit(v: StateVector<3>) -> Option<StateVector<3>> {
    let norm = v.norm();
    (norm.is_finite() && norm > 0.0).then(|| v / C64::from(norm))
}

/// Eigenvector of the tridiagonal matrix `h` with component `k` fixed to one,
/// `k` being the bare level nearest `energy`.
fn anchored_eigenvector(h: &StateMatrix<3>, diag: &[f64; 3], energy: f64) -> Option<StateVector<3>> {
    let k = (0..3).min_by(|&a, &b| (diag[a] - energy).abs().total_cmp(&(diag[b] - energy).abs()))?;
    // h[(1, 0)] = h[(2, 1)] = c; the superdiagonal holds conj(c)
    let c = h[(1, 0)];
    let c2 = c.norm_sqr();
    let d: [f64; 3] = std::array::from_fn(|i| diag[i] - energy);
    let guard = |x: f64| (x.abs() >= DENOMINATOR_FLOOR).then_some(x);
    let v = match k {
        0 => {
            let d2 = guard(d[2])?;
            let pivot = guard(d[1] - c2 / d2)?;
            let v1 = -c / pivot;
            [C64::from(1.0), v1, -c * v1 / d2]
        }
        1 => [-c.conj() / guard(d[0])?, C64::from(1.0), -c / guard(d[2])?],
        _ => {
            let d0 = guard(d[0])?;
            let pivot = guard(d[1] - c2 / d0)?;
            let v1 = -c.conj() / pivot;
            [-c.conj() * v1 / d0, v1, C64::from(1.0)]
        }
    };
    unit(StateVector::<3>::from(v))
}

pub fn crossing_times(params: &ModelParams) -> CrossingTimes {
    CrossingTimes {
        t_a: (params.omega + 2.0 * params.xi) / params.sweep_rate,
        t_b: params.omega / params.sweep_rate,
    }
}

/// Detuning `2 xi + w - A t` between `|dd>` and `|psi+>` in the rotating
/// frame.
#[inline]
pub fn detuning(params: &ModelParams, t: f64) -> f64 {
    2.0 * params.xi + params.omega - params.sweep_rate * t
}

const RATIO_FLOOR: f64 = 1e-14;

/// `|Omega Delta' - Omega' Delta| / (sqrt2 (2 Omega^2 + Delta^2)^(3/2))`;
/// adiabatic following needs this to stay well below one.
pub fn adiabaticity_ratio(params: &ModelParams, t: f64) -> Result<f64> {
    let omega_t = params.envelope.value(t);
    let d_omega = params.envelope.derivative(t);
    let delta = detuning(params, t);
    let d_delta = -params.sweep_rate;
    if omega_t.abs() < RATIO_FLOOR && delta.abs() < RATIO_FLOOR {
        return Err(Error::ZeroDenominator { t });
    }
    let numerator = (omega_t * d_delta - d_omega * delta).abs() * FRAC_1_SQRT_2;
    Ok(numerator / (2.0 * omega_t * omega_t + delta * delta).powf(1.5))
}
