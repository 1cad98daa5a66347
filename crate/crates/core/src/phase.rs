//! Diagonal, off-diagonal and cyclic geometric phase factors read off the
//! transported states.
//!
//! Labels in the public API (`Permutation` display, serialized reports,
//! error messages) are one-based: 1 = |dd>, 2 = |psi+>, 3 = |uu>. Array
//! indices are zero-based.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{StateMatrix, StateVector, C64};

/// Overlaps smaller than this have no defined phase.
pub const DEFAULT_NULL_TOL: f64 = 1e-6;

/// Minimum `|<P(k)|phi_k>|^2` for the final states to count as a
/// permutation of the initial ones.
pub const DEFAULT_PERMUTATION_THRESHOLD: f64 = 0.99;

/// A complex number of unit modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C64", into = "C64")]
pub struct UnitPhase(C64);

impl UnitPhase {
    pub const ONE: UnitPhase = UnitPhase(C64::new(1.0, 0.0));

    pub fn from_angle(theta: f64) -> Self {
        Self(C64::from_polar(1.0, theta))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(self) -> f64 {
        principal_arg(self.0)
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }
}

impl std::ops::Mul for UnitPhase {
    type Output = UnitPhase;

    fn mul(self, rhs: Self) -> Self {
        // renormalize so products of many factors stay on the unit circle
        let z = self.0 * rhs.0;
        Self(z / z.norm())
    }
}

impl TryFrom<C64> for UnitPhase {
    type Error = String;

    fn try_from(z: C64) -> std::result::Result<Self, String> {
        if ((z.norm() - 1.0).abs()) <= 1e-12 {
            Ok(Self(z))
        } else {
            Err(format!("|{z}| is not 1"))
        }
    }
}

impl From<UnitPhase> for C64 {
    fn from(p: UnitPhase) -> C64 {
        p.0
    }
}

/// `atan2` folded into `(-pi, pi]`.
pub fn principal_arg(z: C64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// `z / |z|`, or `None` when `|z| < null_tol`.
pub fn phi_of(z: C64, null_tol: f64) -> Option<UnitPhase> {
    let m = z.norm();
    if m.is_finite() && m >= null_tol && m > 0.0 {
        Some(UnitPhase(z / m))
    } else {
        None
    }
}

/// `sigma_jk = Phi[<j|phi_k>]` for zero-based `j`, with `k` the transported
/// state's origin label (zero-based, only used in the error).
pub fn sigma_jk<const N: usize>(
    j: usize,
    k: usize,
    transported_k: &StateVector<N>,
    null_tol: f64,
) -> Result<UnitPhase> {
    let z = transported_k[j];
    phi_of(z, null_tol).ok_or(Error::NullOverlap {
        j: j + 1,
        k: k + 1,
        modulus: z.norm(),
    })
}

/// `gamma_jk = sigma_jk sigma_kj` and its principal argument.
pub fn gamma_offdiag(sigma_jk: UnitPhase, sigma_kj: UnitPhase) -> (UnitPhase, f64) {
    let g = sigma_jk * sigma_kj;
    (g, g.arg())
}

/// `gamma_j = Phi[<j|phi_j>]` and its principal argument.
pub fn gamma_diag<const N: usize>(
    j: usize,
    transported_j: &StateVector<N>,
    null_tol: f64,
) -> Result<(UnitPhase, f64)> {
    let s = sigma_jk(j, j, transported_j, null_tol)?;
    Ok((s, s.arg()))
}

/// Ordered product of three overlap phases, e.g. `sigma_32 sigma_21 sigma_13`.
pub fn gamma_cycle(a: UnitPhase, b: UnitPhase, c: UnitPhase) -> (UnitPhase, f64) {
    let g = a * b * c;
    (g, g.arg())
}

/// A bijection of the three labels: transported state `k` ends on reference
/// state `images[k]` (both zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct Permutation {
    images: [usize; 3],
}

impl Permutation {
    pub const IDENTITY: Permutation = Permutation { images: [0, 1, 2] };
    /// Exchange of labels 1 and 2, label 3 fixed.
    pub const SWAP_12: Permutation = Permutation { images: [1, 0, 2] };
    /// `1 -> 3, 3 -> 2, 2 -> 1`.
    pub const CYCLE_132: Permutation = Permutation { images: [2, 0, 1] };

    pub fn new(images: [usize; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &i in &images {
            if i >= 3 || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Self { images })
    }

    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> [usize; 3] {
        self.images
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Length of the cycle through `k`.
    pub fn cycle_len(&self, k: usize) -> usize {
        let mut n = 1;
        let mut i = self.images[k];
        while i != k {
            i = self.images[i];
            n += 1;
        }
        n
    }
}

impl TryFrom<[usize; 3]> for Permutation {
    type Error = String;

    /// One-based images.
    fn try_from(one_based: [usize; 3]) -> std::result::Result<Self, String> {
        let zero_based = one_based.map(|i| i.wrapping_sub(1));
        Permutation::new(zero_based).ok_or_else(|| format!("{one_based:?} is not a permutation of 1..3"))
    }
}

impl From<Permutation> for [usize; 3] {
    fn from(p: Permutation) -> [usize; 3] {
        p.images.map(|i| i + 1)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "identity");
        }
        let mut first = true;
        let mut done = [false; 3];
        for start in 0..3 {
            if done[start] || self.images[start] == start {
                continue;
            }
            let mut k = start;
            loop {
                done[k] = true;
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "{}->{}", k + 1, self.images[k] + 1)?;
                first = false;
                k = self.images[k];
                if k == start {
                    break;
                }
            }
        }
        Ok(())
    }
}

/// Assigns each transported state `k` (column) to the reference state `j`
/// (row) of largest `|<j|phi_k>|^2`.
///
/// `moduli[j][k] = |<j|phi_k>|`. Fails unless the assignment is a bijection
/// with every selected fidelity at least `threshold`.
pub fn detect_permutation(moduli: &[[f64; 3]; 3], threshold: f64) -> Result<(Permutation, f64)> {
    let (images, min_fidelity) = greedy_assignment(moduli);
    match Permutation::new(images) {
        Some(p) if min_fidelity >= threshold => Ok((p, min_fidelity)),
        _ => Err(Error::NotAPermutation { min_fidelity }),
    }
}

fn greedy_assignment(moduli: &[[f64; 3]; 3]) -> ([usize; 3], f64) {
    let mut min_fidelity: f64 = 1.0;
    let images = std::array::from_fn(|k| {
        let j = (0..3)
            .max_by(|&a, &b| moduli[a][k].total_cmp(&moduli[b][k]))
            .unwrap_or(k);
        min_fidelity = min_fidelity.min(moduli[j][k].powi(2));
        j
    });
    (images, min_fidelity.clamp(0.0, 1.0))
}

/// Every phase quantity extracted from one set of transported states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// `sigma[j][k] = Phi[<j|phi_k>]`, absent where the overlap is null.
    pub sigma: [[Option<UnitPhase>; 3]; 3],
    /// `|<j|phi_k>|^2`.
    pub fidelities: [[f64; 3]; 3],
    pub gamma12: Option<UnitPhase>,
    #[serde(rename = "Gamma12")]
    pub big_gamma12: Option<f64>,
    pub gamma3: Option<UnitPhase>,
    #[serde(rename = "Gamma3")]
    pub big_gamma3: Option<f64>,
    /// `arg(gamma12 gamma3)`.
    pub product_arg: Option<f64>,
    /// `sigma_32 sigma_21 sigma_13`.
    pub gamma321: Option<UnitPhase>,
    /// Product of `sigma_{P(k) k}` along the three-cycle actually realized
    /// by the final permutation, when it is a three-cycle.
    pub gamma_cycle: Option<UnitPhase>,
    pub permutation: Option<Permutation>,
    pub min_fidelity: f64,
    /// One-based `(j, k)` pairs whose overlap fell below the null threshold.
    pub null_overlaps: Vec<(usize, usize)>,
}

impl PhaseReport {
    /// Builds the report from transported states stored as matrix columns
    /// (column `k` started as `|k>`).
    pub fn from_states(states: &StateMatrix<3>, null_tol: f64, threshold: f64) -> Self {
        let mut sigma = [[None; 3]; 3];
        let mut fidelities = [[0.0; 3]; 3];
        let mut moduli = [[0.0; 3]; 3];
        let mut null_overlaps = Vec::new();
        for k in 0..3 {
            let norm = states.column(k).norm();
            for j in 0..3 {
                let z = states[(j, k)] / norm;
                moduli[j][k] = z.norm();
                fidelities[j][k] = z.norm_sqr();
                sigma[j][k] = phi_of(z, null_tol);
                if sigma[j][k].is_none() {
                    null_overlaps.push((j + 1, k + 1));
                }
            }
        }

        let gamma12 = match (sigma[0][1], sigma[1][0]) {
            (Some(a), Some(b)) => Some(gamma_offdiag(a, b).0),
            _ => None,
        };
        let gamma3 = sigma[2][2];
        let product_arg = match (gamma12, gamma3) {
            (Some(a), Some(b)) => Some((a * b).arg()),
            _ => None,
        };
        let gamma321 = match (sigma[2][1], sigma[1][0], sigma[0][2]) {
            (Some(a), Some(b), Some(c)) => Some(gamma_cycle(a, b, c).0),
            _ => None,
        };

        let (permutation, min_fidelity) = match detect_permutation(&moduli, threshold) {
            Ok((p, f)) => (Some(p), f),
            Err(_) => (None, greedy_assignment(&moduli).1),
        };
        let gamma_cycle = permutation
            .filter(|p| p.cycle_len(0) == 3)
            .and_then(|p| {
                (0..3).try_fold(UnitPhase::ONE, |acc, k| sigma[p.image(k)][k].map(|s| acc * s))
            });

        Self {
            sigma,
            fidelities,
            gamma12,
            big_gamma12: gamma12.map(UnitPhase::arg),
            gamma3,
            big_gamma3: gamma3.map(UnitPhase::arg),
            product_arg,
            gamma321,
            gamma_cycle,
            permutation,
            min_fidelity,
            null_overlaps,
        }
    }
}

/// `arg(gamma12 gamma3)`; the adiabatic prediction for the (1 2) exchange
/// with a spectator third level is `pi`.
pub fn permutation_invariant_check(report: &PhaseReport) -> Result<f64> {
    report.product_arg.ok_or_else(|| {
        let (j, k) = report
            .null_overlaps
            .iter()
            .copied()
            .find(|&(j, k)| matches!((j, k), (1, 2) | (2, 1) | (3, 3)))
            .unwrap_or((1, 2));
        Error::NullOverlap {
            j,
            k,
            modulus: report.fidelities[j - 1][k - 1].sqrt(),
        }
    })
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    principal_arg(C64::from_polar(1.0, a - b)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::basis_state;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn phi_normalizes() {
        let p = phi_of(c(1.0, 1.0), 1e-6).unwrap();
        assert!((p.value() - c(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);
        assert_eq!(phi_of(c(-3.0, 0.0), 1e-6).unwrap().value(), c(-1.0, 0.0));
        assert!(phi_of(c(1e-9, 0.0), 1e-6).is_none());
    }

    #[test]
    fn principal_arg_range() {
        assert_eq!(principal_arg(c(-1.0, -0.0)), PI);
        assert_eq!(principal_arg(c(-1.0, 0.0)), PI);
        assert_eq!(principal_arg(c(1.0, 0.0)), 0.0);
    }

    #[test]
    fn sigma_at_start() {
        let v = basis_state::<3>(1);
        assert_eq!(sigma_jk(1, 1, &v, 1e-6).unwrap(), UnitPhase::ONE);
        assert_eq!(
            sigma_jk(0, 1, &v, 1e-6).unwrap_err(),
            Error::NullOverlap { j: 1, k: 2, modulus: 0.0 }
        );
    }

    #[test]
    fn offdiag_of_two_i_is_minus_one() {
        let i = UnitPhase::from_angle(PI / 2.0);
        let (g, arg) = gamma_offdiag(i, i);
        assert!((g.value() + 1.0).norm() < 1e-15);
        assert!((arg - PI).abs() < 1e-15);
    }

    #[test]
    fn diag_at_start() {
        let (g, arg) = gamma_diag(2, &basis_state::<3>(2), 1e-6).unwrap();
        assert_eq!(g, UnitPhase::ONE);
        assert_eq!(arg, 0.0);
    }

    #[test]
    fn cycle_of_ones() {
        let (g, arg) = gamma_cycle(UnitPhase::ONE, UnitPhase::ONE, UnitPhase::ONE);
        assert_eq!(g, UnitPhase::ONE);
        assert_eq!(arg, 0.0);
    }

    #[test]
    fn detect_identity_swap_and_cycle() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(detect_permutation(&id, 0.99).unwrap(), (Permutation::IDENTITY, 1.0));

        let swap = [[0.01, 0.999, 0.0], [0.999, 0.01, 0.0], [0.0, 0.0, 1.0]];
        let (p, f) = detect_permutation(&swap, 0.99).unwrap();
        assert_eq!(p, Permutation::SWAP_12);
        assert!(f > 0.99);
        assert_eq!(p.to_string(), "1->2, 2->1");

        // column k holds |<j|phi_k>|; phi_1 -> 3, phi_2 -> 1, phi_3 -> 2
        let cyc = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        let (p, _) = detect_permutation(&cyc, 0.99).unwrap();
        assert_eq!(p, Permutation::CYCLE_132);
        assert_eq!(p.to_string(), "1->3, 3->2, 2->1");
    }

    #[test]
    fn non_bijective_or_weak_assignment_fails() {
        let clash = [[1.0, 0.9, 0.0], [0.0, 0.4, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            detect_permutation(&clash, 0.5),
            Err(Error::NotAPermutation { .. })
        ));
        let weak = [[0.9, 0.3, 0.0], [0.3, 0.9, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            detect_permutation(&weak, 0.99),
            Err(Error::NotAPermutation { min_fidelity }) if (min_fidelity - 0.81).abs() < 1e-12
        ));
    }

    #[test]
    fn permutation_serializes_one_based() {
        let s = serde_json::to_string(&Permutation::CYCLE_132).unwrap();
        assert_eq!(s, "[3,1,2]");
        let back: Permutation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Permutation::CYCLE_132);
        assert!(serde_json::from_str::<Permutation>("[1,1,2]").is_err());
    }

    fn swapped_states(phase: f64) -> StateMatrix<3> {
        let mut m = StateMatrix::<3>::zeros();
        m[(1, 0)] = C64::from_polar(1.0, 0.3);
        m[(0, 1)] = C64::from_polar(1.0, PI - 0.3);
        m[(2, 2)] = C64::from_polar(1.0, phase);
        m
    }

    #[test]
    fn report_for_ideal_swap() {
        let r = PhaseReport::from_states(&swapped_states(0.0), DEFAULT_NULL_TOL, 0.99);
        assert_eq!(r.permutation, Some(Permutation::SWAP_12));
        assert!((r.big_gamma12.unwrap() - PI).abs() < 1e-12);
        assert_eq!(r.big_gamma3, Some(0.0));
        assert!(angle_distance(permutation_invariant_check(&r).unwrap(), PI) < 1e-12);
        assert!(r.null_overlaps.contains(&(1, 1)));
        assert!(r.gamma321.is_none());
        assert!(r.gamma_cycle.is_none());
    }

    #[test]
    fn report_cycle_factor_follows_realized_cycle() {
        let mut m = StateMatrix::<3>::zeros();
        m[(2, 0)] = C64::from_polar(1.0, 0.4);
        m[(0, 1)] = C64::from_polar(1.0, -1.1);
        m[(1, 2)] = C64::from_polar(1.0, 0.7);
        let r = PhaseReport::from_states(&m, DEFAULT_NULL_TOL, 0.99);
        assert_eq!(r.permutation, Some(Permutation::CYCLE_132));
        assert!((r.gamma_cycle.unwrap().arg() - 0.0).abs() < 1e-12);
        assert!(r.gamma12.is_none());
        assert!(permutation_invariant_check(&r).is_err());
    }

    #[test]
    fn rephasing_leaves_gauge_invariants_alone() {
        let base = swapped_states(0.9);
        let alphas = [0.37, -2.1, 1.4];
        // |j> -> e^{i a_j}|j>: initial states pick up e^{i a_k}, reference
        // bras e^{-i a_j}
        let mut m = base;
        for j in 0..3 {
            for k in 0..3 {
                m[(j, k)] *= C64::from_polar(1.0, alphas[k] - alphas[j]);
            }
        }
        let a = PhaseReport::from_states(&base, DEFAULT_NULL_TOL, 0.99);
        let b = PhaseReport::from_states(&m, DEFAULT_NULL_TOL, 0.99);
        assert!((a.gamma12.unwrap().value() - b.gamma12.unwrap().value()).norm() < 1e-12);
        assert!((a.gamma3.unwrap().value() - b.gamma3.unwrap().value()).norm() < 1e-12);
        assert!((a.sigma[0][1].unwrap().value() - b.sigma[0][1].unwrap().value()).norm() > 1e-3);
    }

    #[test]
    fn unit_phase_json_round_trip() {
        let p = UnitPhase::from_angle(1.234);
        let s = serde_json::to_string(&p).unwrap();
        let q: UnitPhase = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<UnitPhase>("[2.0,0.0]").is_err());
    }
}
