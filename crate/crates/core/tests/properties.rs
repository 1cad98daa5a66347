use std::f64::consts::PI;

use proptest::prelude::*;

use geomphase_core::numerics::{integrate_ode, StepGrid};
use geomphase_core::phase::{angle_distance, principal_arg};
use geomphase_core::{
    analytic_eigenvector, char_poly, hamiltonian, hermitian_eigensystem, solve_cubic_three_real,
    Envelope, FieldVector, Frame, HermitianMatrix, ModelParams, PhaseReport, StateMatrix,
    StateVector, C64,
};

fn hermitian<const N: usize>(entries: &[f64]) -> HermitianMatrix<N> {
    let mut m = StateMatrix::<N>::zeros();
    let mut it = entries.iter().copied();
    for i in 0..N {
        for j in 0..=i {
            let re = it.next().unwrap();
            let im = if i == j { 0.0 } else { it.next().unwrap() };
            m[(i, j)] = C64::new(re, im);
        }
    }
    HermitianMatrix::from_lower(&m)
}

fn check_eigensystem<const N: usize>(h: &HermitianMatrix<N>) -> Result<(), TestCaseError> {
    let es = hermitian_eigensystem(h, 1e-10).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for k in 0..N {
        let v = es.vector(k);
        let r = (h.matrix() * v - v * C64::from(es.values[k])).norm();
        prop_assert!(r <= 1e-10, "residual {r:e}");
        if k > 0 {
            prop_assert!(es.values[k - 1] <= es.values[k]);
        }
    }
    let gram = es.vectors.adjoint() * es.vectors;
    prop_assert!((gram - StateMatrix::<N>::identity()).norm() <= 1e-10);
    Ok(())
}

/// Unitary-ish test states: a random permutation of the basis mixed with a
/// small random rotation, columns normalized.
fn states_strategy() -> impl Strategy<Value = StateMatrix<3>> {
    (
        prop::sample::select(vec![[0, 1, 2], [1, 0, 2], [2, 0, 1], [1, 2, 0], [0, 2, 1], [2, 1, 0]]),
        prop::collection::vec(-1.0f64..1.0, 18),
        0.0f64..0.3,
    )
        .prop_map(|(images, noise, eps)| {
            let mut m = StateMatrix::<3>::zeros();
            for k in 0..3 {
                m[(images[k], k)] = C64::from(1.0);
            }
            for (idx, pair) in noise.chunks(2).enumerate() {
                m[(idx / 3, idx % 3)] += C64::new(pair[0], pair[1]) * eps;
            }
            for k in 0..3 {
                let n = m.column(k).norm();
                m.set_column(k, &(m.column(k) / C64::from(n)));
            }
            m
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hermitian_3x3_residuals(entries in prop::collection::vec(-10.0f64..10.0, 9)) {
        check_eigensystem::<3>(&hermitian::<3>(&entries))?;
    }

    #[test]
    fn hermitian_4x4_residuals(entries in prop::collection::vec(-10.0f64..10.0, 16)) {
        check_eigensystem::<4>(&hermitian::<4>(&entries))?;
    }
}

proptest! {
    #[test]
    fn cubic_roots_match_numeric_spectrum(
        xi in 0.05f64..4.0,
        bx in -6.0f64..6.0,
        by in -6.0f64..6.0,
        bz in -6.0f64..6.0,
    ) {
        let p = ModelParams::new(xi, 1.0, 0.1, Envelope::Zero);
        let f = FieldVector::new(bx, by, bz, Frame::Lab);
        let roots = solve_cubic_three_real(&char_poly(&p, &f), 1e-12).unwrap();
        let es = hermitian_eigensystem(&hamiltonian::<3>(&p, &f), 1e-10).unwrap();
        let scale = es.values.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        for (a, b) in roots.iter().zip(es.values.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
        let trace: f64 = roots.iter().sum();
        prop_assert!((trace - xi).abs() <= 1e-10 * scale);
    }

    #[test]
    fn analytic_eigenvectors_are_unit_and_orthogonal(
        xi in 0.05f64..4.0,
        bx in 0.1f64..6.0,
        bz in -6.0f64..6.0,
    ) {
        let p = ModelParams::new(xi, 1.0, 0.1, Envelope::Zero);
        let f = FieldVector::new(bx, 0.0, bz, Frame::Rotating);
        let roots = solve_cubic_three_real(&char_poly(&p, &f), 1e-12).unwrap();
        prop_assume!(roots[1] - roots[0] > 1e-3 && roots[2] - roots[1] > 1e-3);
        let vs: Vec<StateVector<3>> = roots
            .iter()
            .filter_map(|&e| analytic_eigenvector(&p, &f, e).ok())
            .collect();
        for (i, a) in vs.iter().enumerate() {
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
            for b in &vs[i + 1..] {
                prop_assert!(a.dotc(b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn phases_survive_consistent_rephasing(
        states in states_strategy(),
        alphas in prop::array::uniform3(-PI..PI),
    ) {
        let d = StateMatrix::<3>::from_diagonal(&StateVector::<3>::from_iterator(
            alphas.iter().map(|&a| C64::from_polar(1.0, a)),
        ));
        let moved = d.adjoint() * states * d;
        let a = PhaseReport::from_states(&states, 1e-6, 0.9);
        let b = PhaseReport::from_states(&moved, 1e-6, 0.9);
        prop_assert_eq!(a.permutation, b.permutation);
        let same = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => angle_distance(x, y) <= 1e-12,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(same(a.big_gamma12, b.big_gamma12));
        prop_assert!(same(a.big_gamma3, b.big_gamma3));
        prop_assert!(same(a.product_arg, b.product_arg));
        prop_assert!(same(a.gamma321.map(|g| g.arg()), b.gamma321.map(|g| g.arg())));
        prop_assert!(same(a.gamma_cycle.map(|g| g.arg()), b.gamma_cycle.map(|g| g.arg())));
    }

    #[test]
    fn principal_arg_range(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        prop_assume!(re != 0.0 || im != 0.0);
        let a = principal_arg(C64::new(re, im));
        prop_assert!(a > -PI && a <= PI);
    }
}

/// Global error of RK4 on `y' = (i w cos t - t/2) y`, exact solution
/// `exp(i w sin t - t^2/4)`.
fn rk4_error(w: f64, dt: f64) -> f64 {
    let t1 = 3.0;
    let y0 = nalgebra::SMatrix::<C64, 1, 1>::new(C64::from(1.0));
    let path = integrate_ode(
        |t, y: &nalgebra::SMatrix<C64, 1, 1>| y * C64::new(-0.5 * t, w * t.cos()),
        y0,
        0.0,
        t1,
        dt,
    )
    .unwrap();
    let (t, y) = path.last().unwrap();
    (y[(0, 0)] - C64::from_polar((-0.25 * t * t).exp(), w * t.sin())).norm()
}

#[test]
fn rk4_empirical_order_is_four() {
    for w in [0.5, 1.0, 3.0] {
        let coarse = rk4_error(w, 0.04);
        let fine = rk4_error(w, 0.02);
        let order = (coarse / fine).log2();
        assert!((3.8..=4.2).contains(&order), "w = {w}: order {order}");
    }
}

#[test]
fn step_grid_lands_on_end_point() {
    let g = StepGrid::new(0.0, 1.0, 0.3).unwrap();
    assert_eq!(g.time(g.steps()), 1.0);
}
