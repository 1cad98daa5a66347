use nalgebra::{linalg::SymmetricEigen, DMatrix, SMatrix, SVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Complex amplitudes over an `N`-dimensional basis.
pub type StateVector<const N: usize> = SVector<C64, N>;

/// A square complex matrix; columns are usually states.
pub type StateMatrix<const N: usize> = SMatrix<C64, N, N>;

const HERMITICITY_TOL: f64 = 1e-12;

/// `<a|b>`, antilinear in the first argument.
#[inline]
pub fn inner<const N: usize>(a: &StateVector<N>, b: &StateVector<N>) -> C64 {
    a.dotc(b)
}

/// The `k`-th standard basis vector (zero-based).
pub fn basis_state<const N: usize>(k: usize) -> StateVector<N> {
    let mut v = StateVector::<N>::zeros();
    v[k] = C64::new(1.0, 0.0);
    v
}

pub fn normalized<const N: usize>(v: &StateVector<N>) -> StateVector<N> {
    v / C64::from(v.norm())
}

pub fn is_normalized<const N: usize>(v: &StateVector<N>) -> bool {
    (v.norm() - 1.0).abs() <= 1e-12
}

/// A complex matrix that has been checked to equal its own conjugate
/// transpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix<const N: usize>(StateMatrix<N>);

impl<const N: usize> HermitianMatrix<N> {
    /// Accepts `m` if `max |m[i][j] - conj(m[j][i])| <= 1e-12`, then
    /// symmetrizes it exactly.
    pub fn new(m: StateMatrix<N>) -> Result<Self> {
        let dev = hermiticity_defect(&m);
        if !dev.is_finite() || dev > HERMITICITY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {dev:e})"
            )));
        }
        Ok(Self::from_lower(&m))
    }

    /// Builds the Hermitian matrix whose lower triangle (including the real
    /// part of the diagonal) is taken from `m`.
    pub fn from_lower(m: &StateMatrix<N>) -> Self {
        let mut out = StateMatrix::<N>::zeros();
        for i in 0..N {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in 0..i {
                out[(i, j)] = m[(i, j)];
                out[(j, i)] = m[(i, j)].conj();
            }
        }
        Self(out)
    }

    pub fn matrix(&self) -> &StateMatrix<N> {
        &self.0
    }

    pub fn into_inner(self) -> StateMatrix<N> {
        self.0
    }

    /// `<v|M|v>`, real by construction.
    pub fn expectation(&self, v: &StateVector<N>) -> f64 {
        inner(v, &(self.0 * v)).re
    }
}

fn hermiticity_defect<const N: usize>(m: &StateMatrix<N>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Ascending eigenvalues with the matching orthonormal eigenvectors stored
/// as columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigensystem<const N: usize> {
    pub values: [f64; N],
    pub vectors: StateMatrix<N>,
}

impl<const N: usize> Eigensystem<N> {
    pub fn vector(&self, k: usize) -> StateVector<N> {
        self.vectors.column(k).into_owned()
    }
}

/// Numeric eigendecomposition of a Hermitian matrix.
///
/// The result is only returned once every residual `||M v - lambda v||` and
/// every orthonormality defect is at most `tol`.
pub fn hermitian_eigensystem<const N: usize>(
    m: &HermitianMatrix<N>,
    tol: f64,
) -> Result<Eigensystem<N>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("eigensolver tolerance must be > 0".into()));
    }
    let (values, vectors) = decompose(m.matrix(), tol)?;

    let mut worst: f64 = 0.0;
    for (k, &value) in values.iter().enumerate() {
        let v = vectors.column(k).into_owned();
        let r = m.matrix() * v - v * C64::from(value);
        worst = worst.max(r.norm());
        for l in 0..N {
            let expected = if k == l { 1.0 } else { 0.0 };
            let g = inner(&v, &vectors.column(l).into_owned());
            worst = worst.max((g - C64::from(expected)).norm());
        }
    }
    if !(worst <= tol) {
        return Err(Error::ConvergenceFailure {
            residual: worst,
            target: tol,
        });
    }
    Ok(Eigensystem { values, vectors })
}

/// Basis states with no off-diagonal coupling are exact eigenvectors; they
/// are split off before the remaining block goes to the iterative solver so
/// that their eigenvalues come back bit-exact.
fn decompose<const N: usize>(m: &StateMatrix<N>, tol: f64) -> Result<([f64; N], StateMatrix<N>)> {
    let isolated: Vec<bool> = (0..N)
        .map(|i| (0..N).all(|j| i == j || (m[(i, j)] == C64::from(0.0) && m[(j, i)] == C64::from(0.0))))
        .collect();
    let coupled: Vec<usize> = (0..N).filter(|&i| !isolated[i]).collect();

    // (eigenvalue, eigenvector) pairs, isolated states first so that ties
    // keep their basis order
    let mut pairs: Vec<(f64, StateVector<N>)> = (0..N)
        .filter(|&i| isolated[i])
        .map(|i| (m[(i, i)].re, basis_state(i)))
        .collect();

    if !coupled.is_empty() {
        // nalgebra's decomposition needs a type-level dimension, so go
        // through a dynamically sized copy of the coupled block
        let n = coupled.len();
        let block = DMatrix::from_fn(n, n, |r, c| m[(coupled[r], coupled[c])]);
        let decomposition = SymmetricEigen::try_new(block, f64::EPSILON, 10_000).ok_or(
            Error::ConvergenceFailure {
                residual: f64::INFINITY,
                target: tol,
            },
        )?;
        for k in 0..n {
            let mut v = StateVector::<N>::zeros();
            for (r, &i) in coupled.iter().enumerate() {
                v[i] = decomposition.eigenvectors[(r, k)];
            }
            pairs.push((decomposition.eigenvalues[k], normalized(&v)));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut values = [0.0; N];
    let mut vectors = StateMatrix::<N>::zeros();
    for (k, (e, v)) in pairs.into_iter().enumerate() {
        values[k] = e;
        vectors.set_column(k, &v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_gives_standard_basis() {
        let m = StateMatrix::<3>::from_diagonal(&SVector::from([c(-1., 0.), c(-1., 0.), c(3., 0.)]));
        let es = hermitian_eigensystem(&HermitianMatrix::new(m).unwrap(), 1e-12).unwrap();
        assert_eq!(es.values, [-1.0, -1.0, 3.0]);
        // the doubly degenerate pair may come back in either order
        let v3 = es.vector(2);
        assert!((v3[2].norm() - 1.0).abs() < 1e-14);
        for k in 0..2 {
            assert!(es.vector(k)[2].norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut m = StateMatrix::<3>::identity();
        m[(0, 1)] = c(0.0, 1.0);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn from_lower_mirrors_conjugates() {
        let mut m = StateMatrix::<3>::zeros();
        m[(1, 0)] = c(1.0, -2.0);
        m[(2, 1)] = c(0.5, 0.25);
        let h = HermitianMatrix::from_lower(&m);
        assert_eq!(h.matrix()[(0, 1)], c(1.0, 2.0));
        assert_eq!(h.matrix()[(1, 2)], c(0.5, -0.25));
    }

    #[test]
    fn complex_hermitian_residuals() {
        let mut m = StateMatrix::<4>::zeros();
        m[(0, 0)] = c(0.3, 0.);
        m[(1, 0)] = c(0.7, -0.2);
        m[(2, 1)] = c(-0.1, 0.9);
        m[(3, 0)] = c(0.05, 0.4);
        m[(3, 3)] = c(-1.2, 0.);
        let h = HermitianMatrix::from_lower(&m);
        let es = hermitian_eigensystem(&h, 1e-12).unwrap();
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
