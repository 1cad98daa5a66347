//! Small fixed-size numerical kernel: complex state vectors and Hermitian
//! matrices of dimension 3 or 4, a closed-form cubic solver, a numeric
//! Hermitian eigensolver and a fixed-step fourth-order Runge-Kutta
//! integrator.

mod cubic;
mod linalg;
mod ode;

pub use cubic::{solve_cubic_three_real, CubicCoefficients};
pub use linalg::{
    basis_state, hermitian_eigensystem, inner, is_normalized, normalized, Eigensystem,
    HermitianMatrix, StateMatrix, StateVector, C64,
};
pub use ode::{integrate_observed, integrate_ode, rk4_step, StepGrid};
