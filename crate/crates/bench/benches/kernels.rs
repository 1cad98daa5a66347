use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use geomphase_core::numerics::rk4_step;
use geomphase_core::phase::PhaseReport;
use geomphase_core::transport::{transport_basis_final, uniform_grid};
use geomphase_core::{
    char_poly, eigenframe_transport, field_at, hamiltonian, hermitian_eigensystem,
    solve_cubic_three_real, Envelope, FieldVector, Frame, ModelParams, Pulse, StateMatrix,
    TransportOptions, C64,
};

fn swap_model() -> ModelParams {
    ModelParams::new(1.0, 1.0, 0.16, Envelope::Gaussian(Pulse::new(0.8, 18.75, 7.0)))
}

fn spectrum(c: &mut Criterion) {
    let p = swap_model();
    let f = FieldVector::new(0.7, 0.2, -0.4, Frame::Lab);
    let h3 = hamiltonian::<3>(&p, &f);
    let h4 = hamiltonian::<4>(&p, &f);
    c.bench_function("cubic roots", |b| {
        b.iter(|| solve_cubic_three_real(black_box(&char_poly(&p, &f)), 1e-12).unwrap())
    });
    c.bench_function("eigensystem 3x3", |b| b.iter(|| hermitian_eigensystem(black_box(&h3), 1e-10).unwrap()));
    c.bench_function("eigensystem 4x4", |b| b.iter(|| hermitian_eigensystem(black_box(&h4), 1e-10).unwrap()));
}

fn integration(c: &mut Criterion) {
    let p = swap_model();
    let mut rhs = |t: f64, y: &StateMatrix<3>| {
        let h = hamiltonian::<3>(&p, &field_at(&p, t, Frame::Rotating));
        h.matrix() * y * C64::new(0.0, -1.0)
    };
    let y = StateMatrix::<3>::identity();
    c.bench_function("rk4 step, 3 columns", |b| b.iter(|| rk4_step(&mut rhs, black_box(18.0), &y, 1e-3)));

    let mut group = c.benchmark_group("transport");
    group.sample_size(10);
    let opts = TransportOptions::default();
    group.bench_function("ode basis, swap scenario", |b| {
        b.iter(|| {
            let (states, _) = transport_basis_final::<3>(&p, 0.0, 37.5, &opts).unwrap();
            PhaseReport::from_states(&states, 1e-6, 0.99)
        })
    });
    let grid = uniform_grid(0.0, 37.5, 0.01).unwrap();
    group.bench_function("eigenframe, swap scenario", |b| {
        b.iter(|| eigenframe_transport(&p, black_box(&grid), Frame::Rotating).unwrap())
    });
    group.finish();
}

criterion_group!(benches, spectrum, integration);
criterion_main!(benches);
