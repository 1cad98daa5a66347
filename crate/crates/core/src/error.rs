use thiserror::Error;

/// Everything that can go wrong inside the simulator.
///
/// Numerical failures and configuration failures are kept apart so that the
/// command-line front end can map them onto distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cubic has non-real roots (discriminant {discriminant:e})")]
    NonRealRoots { discriminant: f64 },

    #[error("eigensolver did not reach residual {target:e} (got {residual:e})")]
    ConvergenceFailure { residual: f64, target: f64 },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("eigenvector formula is singular: |xi + beta_z - E| = {denominator:e}")]
    DegenerateDenominator { denominator: f64 },

    #[error("adiabaticity ratio undefined at t = {t}: envelope and detuning both vanish")]
    ZeroDenominator { t: f64 },

    #[error("eigenframe grid too coarse at t = {t}: best overlap {overlap:.4}")]
    GridTooCoarse { t: f64, overlap: f64 },

    #[error("ambiguous eigenvector tracking through a degeneracy at t = {t}")]
    DegeneracyEncountered { t: f64 },

    #[error("overlap <{j}|phi_{k}> = {modulus:e} is below the null threshold")]
    NullOverlap { j: usize, k: usize, modulus: f64 },

    #[error("final overlaps do not form a permutation (min fidelity {min_fidelity:.4})")]
    NotAPermutation { min_fidelity: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by the user's configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidInput(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
