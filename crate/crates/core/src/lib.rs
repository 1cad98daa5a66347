//! Geometric phases of two exchange-coupled spin-1/2 systems driven through
//! level crossings by a swept, pulsed magnetic field.
//!
//! The crate is layered bottom-up:
//!
//! * [`numerics`]: fixed-size complex linear algebra, a closed-form cubic
//!   solver and an RK4 integrator.
//! * [`model`]: the triplet/singlet Hamiltonian, driving field and pulse
//!   envelopes, analytic spectrum and the adiabaticity ratio.
//! * [`transport`]: parallel transport by ODE and by eigenframe tracking.
//! * [`phase`]: overlap phases, diagonal/off-diagonal/cyclic phase factors
//!   and permutation detection.
//! * [`experiments`]: scenario configs, runners and the parallel sweep.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod phase;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    adiabaticity_ratio, analytic_eigenvector, char_poly, crossing_times, detuning,
    diabatic_energies, envelope_derivative, envelope_value, field_at, hamiltonian, CrossingTimes,
    DimMode, Envelope, FieldVector, Frame, ModelParams, Pulse,
};
pub use numerics::{
    basis_state, hermitian_eigensystem, inner, solve_cubic_three_real, CubicCoefficients,
    Eigensystem, HermitianMatrix, StateMatrix, StateVector, C64,
};
pub use phase::{
    detect_permutation, gamma_cycle, gamma_diag, gamma_offdiag, permutation_invariant_check,
    phi_of, sigma_jk, Permutation, PhaseReport, UnitPhase,
};
pub use transport::{
    eigenframe_transport, parallel_transport_ode, schrodinger_evolve, track_populations,
    transport_basis, EigenFrame, EigenTransport, TransportOptions, TransportedState,
};
