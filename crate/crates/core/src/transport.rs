//! Parallel transport of states along the driven evolution, done two
//! independent ways:
//!
//! * [`transport_basis`] / [`parallel_transport_ode`] integrate
//!   `i dphi/dt = (H - <phi|H|phi>) phi`, i.e. the Schrodinger equation with
//!   the instantaneous mean energy subtracted, which keeps `<phi|dphi/dt> = 0`.
//! * [`eigenframe_transport`] follows the instantaneous eigenvectors on a
//!   time grid by maximal overlap and re-phases each link so the overlap with
//!   the previous frame is real and positive (a discrete parallel transport).
//!
//! The second method assumes adiabatic following; the first does not.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::model::{field_at, hamiltonian, Frame, ModelParams};
use crate::numerics::{
    basis_state, hermitian_eigensystem, inner, integrate_observed, Eigensystem, HermitianMatrix,
    StateMatrix, StateVector, StepGrid, C64,
};

/// Integration settings shared by the ODE transporters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub dt: f64,
    /// Record every `checkpoint_stride`-th integration node (the last node
    /// is always recorded).
    pub checkpoint_stride: usize,
    pub frame: Frame,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            checkpoint_stride: 10,
            frame: Frame::Rotating,
        }
    }
}

/// A state under the parallel-transport gauge at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportedState<const N: usize> {
    pub amplitudes: StateVector<N>,
    pub t: f64,
    /// Zero-based index of the basis state the trajectory started from.
    pub origin: usize,
    /// `int <H> dt` removed from the amplitudes so far (radians).
    pub dynamical_phase: f64,
    /// `|<phi|dphi/dt>|` estimated from the integration step ending here.
    pub transport_residual: f64,
}

/// All basis states transported together; column `k` of each recorded
/// matrix is the state that started as `|k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTransport<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<StateMatrix<N>>,
    pub dynamical_phases: Vec<[f64; N]>,
    pub stats: EvolveStats,
}

impl<const N: usize> BasisTransport<N> {
    pub fn final_states(&self) -> &StateMatrix<N> {
        self.states.last().expect("a transport run records at least two nodes")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Trajectory of the state that started in `|origin>`.
    pub fn trajectory(&self, origin: usize) -> Vec<(f64, StateVector<N>)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, m)| (t, m.column(origin).into_owned()))
            .collect()
    }
}

/// Diagnostics gathered while integrating.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvolveStats {
    pub steps: usize,
    /// Largest `| ||psi|| - 1 |` seen after a step (before any
    /// renormalization).
    pub max_norm_drift: f64,
    /// Largest parallel-transport residual over all steps; zero for plain
    /// Schrodinger evolution.
    pub max_transport_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gauge {
    Parallel,
    Schrodinger,
}

const MINUS_I: C64 = C64::new(0.0, -1.0);

fn evolve_columns<const N: usize, const C: usize>(
    params: &ModelParams,
    y0: SMatrix<C64, N, C>,
    grid: &StepGrid,
    frame: Frame,
    gauge: Gauge,
    stride: usize,
    mut record: impl FnMut(f64, &SMatrix<C64, N, C>, &[f64; C], &[f64; C]),
) -> Result<EvolveStats> {
    let stride = stride.max(1);
    let rhs = |t: f64, y: &SMatrix<C64, N, C>| {
        let h = hamiltonian::<N>(params, &field_at(params, t, frame)).into_inner();
        let mut hy = h * y;
        if gauge == Gauge::Parallel {
            for c in 0..C {
                let col = y.column(c);
                let mean = col.dotc(&hy.column(c)).re / col.norm_squared();
                hy.column_mut(c).axpy(C64::from(-mean), &col, C64::from(1.0));
            }
        }
        hy * MINUS_I
    };

    let mean_energies = |t: f64, y: &SMatrix<C64, N, C>| -> [f64; C] {
        let h = hamiltonian::<N>(params, &field_at(params, t, frame)).into_inner();
        let hy = h * y;
        std::array::from_fn(|c| y.column(c).dotc(&hy.column(c)).re / y.column(c).norm_squared())
    };

    let mut stats = EvolveStats {
        steps: grid.steps(),
        ..Default::default()
    };
    let initial_norms: [f64; C] = std::array::from_fn(|c| y0.column(c).norm());
    let mut phases = [0.0; C];
    let mut residuals = [0.0; C];
    let mut prev = y0;
    let mut prev_t = grid.t0;
    let mut prev_energy = mean_energies(grid.t0, &y0);
    let last = grid.steps();

    integrate_observed(rhs, y0, grid, |k, t, y| {
        if k > 0 {
            let h = t - prev_t;
            for c in 0..C {
                let norm = y.column(c).norm();
                let drift = (norm - initial_norms[c]).abs();
                stats.max_norm_drift = stats.max_norm_drift.max(drift);
                if gauge == Gauge::Parallel {
                    y.column_mut(c).unscale_mut(norm);
                    let link = prev.column(c).dotc(&y.column(c));
                    residuals[c] = link.im.abs() / h;
                    stats.max_transport_residual = stats.max_transport_residual.max(residuals[c]);
                }
            }
            let energy = mean_energies(t, y);
            for c in 0..C {
                phases[c] += 0.5 * h * (prev_energy[c] + energy[c]);
            }
            prev_energy = energy;
            prev = *y;
            prev_t = t;
        }
        if k % stride == 0 || k == last {
            record(t, y, &phases, &residuals);
        }
    })?;
    Ok(stats)
}

fn check_window(t0: f64, t1: f64) -> Result<()> {
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    Ok(())
}

/// Transports every basis state `|0>, ..., |N-1>` from `t0` to `t1`.
pub fn transport_basis<const N: usize>(
    params: &ModelParams,
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
) -> Result<BasisTransport<N>> {
    check_window(t0, t1)?;
    let grid = StepGrid::new(t0, t1, opts.dt)?;
    let mut out = BasisTransport {
        times: Vec::new(),
        states: Vec::new(),
        dynamical_phases: Vec::new(),
        stats: EvolveStats::default(),
    };
    out.stats = evolve_columns(
        params,
        StateMatrix::<N>::identity(),
        &grid,
        opts.frame,
        Gauge::Parallel,
        opts.checkpoint_stride,
        |t, y, phases, _| {
            out.times.push(t);
            out.states.push(*y);
            out.dynamical_phases.push(*phases);
        },
    )?;
    Ok(out)
}

/// Final transported basis only; skips all checkpoint bookkeeping.
pub fn transport_basis_final<const N: usize>(
    params: &ModelParams,
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
) -> Result<(StateMatrix<N>, EvolveStats)> {
    check_window(t0, t1)?;
    let grid = StepGrid::new(t0, t1, opts.dt)?;
    let mut last = StateMatrix::<N>::identity();
    let stats = evolve_columns(
        params,
        last,
        &grid,
        opts.frame,
        Gauge::Parallel,
        usize::MAX,
        |_, y, _, _| last = *y,
    )?;
    Ok((last, stats))
}

/// Parallel transport of a single normalized state.
pub fn parallel_transport_ode<const N: usize>(
    params: &ModelParams,
    psi0: &StateVector<N>,
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
) -> Result<Vec<TransportedState<N>>> {
    check_window(t0, t1)?;
    if (psi0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("initial state must be normalized".into()));
    }
    let origin = (0..N)
        .max_by(|&a, &b| psi0[a].norm().total_cmp(&psi0[b].norm()))
        .unwrap_or(0);
    let grid = StepGrid::new(t0, t1, opts.dt)?;
    let mut out = Vec::new();
    evolve_columns(
        params,
        *psi0,
        &grid,
        opts.frame,
        Gauge::Parallel,
        opts.checkpoint_stride,
        |t, y, phase, residual| {
            out.push(TransportedState {
                amplitudes: *y,
                t,
                origin,
                dynamical_phase: phase[0],
                transport_residual: residual[0],
            })
        },
    )?;
    Ok(out)
}

/// Plain `i dpsi/dt = H psi`, no renormalization.
pub fn schrodinger_evolve<const N: usize>(
    params: &ModelParams,
    psi0: &StateVector<N>,
    t0: f64,
    t1: f64,
    opts: &TransportOptions,
) -> Result<(Vec<(f64, StateVector<N>)>, EvolveStats)> {
    check_window(t0, t1)?;
    let grid = StepGrid::new(t0, t1, opts.dt)?;
    let mut out = Vec::new();
    let stats = evolve_columns(
        params,
        *psi0,
        &grid,
        opts.frame,
        Gauge::Schrodinger,
        opts.checkpoint_stride,
        |t, y, _, _| out.push((t, *y)),
    )?;
    Ok((out, stats))
}

/// `|<i|psi(t)>|^2` for every basis state `i` along a trajectory.
pub fn track_populations<'a, const N: usize, I>(trajectory: I) -> Vec<(f64, [f64; N])>
where
    I: IntoIterator<Item = &'a (f64, StateVector<N>)>,
{
    trajectory
        .into_iter()
        .map(|(t, v)| (*t, std::array::from_fn(|i| v[i].norm_sqr())))
        .collect()
}

/// Instantaneous eigenvectors on one grid node, columns ordered by the
/// label they carry from the start of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub t: f64,
    /// Eigenvalue of each label (not sorted by energy).
    pub eigenvalues: [f64; 3],
    /// Gauge-fixed eigenvectors, column `k` = label `k`.
    pub eigenvectors: StateMatrix<3>,
    /// `continuity_labels[r]` is the label of the `r`-th lowest eigenvalue.
    pub continuity_labels: [usize; 3],
}

/// Result of [`eigenframe_transport`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTransport {
    pub frames: Vec<EigenFrame>,
    /// Grid nodes skipped because overlap tracking was ambiguous there and a
    /// later node resolved it (unresolved narrow avoided crossings).
    pub bridged_nodes: usize,
    /// Smallest accepted link overlap `|<v_k(t_i)|v_k(t_j)>|`.
    pub min_link_overlap: f64,
}

impl EigenTransport {
    pub fn final_vectors(&self) -> &StateMatrix<3> {
        &self.frames.last().expect("non-empty grid").eigenvectors
    }

    /// Transported eigenstate that started as label `j0`.
    pub fn transported(&self, j0: usize) -> StateVector<3> {
        self.final_vectors().column(j0).into_owned()
    }
}

const EIGEN_TOL: f64 = 1e-10;
const MIN_LINK_OVERLAP: f64 = 0.9;
const AMBIGUITY_MARGIN: f64 = 0.1;
const DEGENERACY_GAP: f64 = 1e-12;
const MAX_BRIDGE: usize = 16;

/// Eigenframe transport along the model's rotating- or lab-frame path.
pub fn eigenframe_transport(
    params: &ModelParams,
    t_grid: &[f64],
    frame: Frame,
) -> Result<EigenTransport> {
    eigenframe_transport_path(|t| hamiltonian::<3>(params, &field_at(params, t, frame)), t_grid)
}

/// Eigenframe transport along an arbitrary path of Hermitian matrices.
///
/// Labels are fixed at the first node by maximal overlap with the standard
/// basis (with `<k|v_k>` real positive). At each later node the eigenvectors
/// are matched to the previous frame by the label assignment maximizing
/// `sum |<v_prev|v_new>|^2` and re-phased so each link overlap is real
/// positive. When the best assignment is ambiguous (a link below 0.9, or a
/// runner-up assignment within 0.1), up to 16 following nodes are tried
/// against the last accepted frame; crossings narrower than the grid
/// spacing are therefore passed diabatically.
pub fn eigenframe_transport_path<F>(path: F, t_grid: &[f64]) -> Result<EigenTransport>
where
    F: Fn(f64) -> HermitianMatrix<3>,
{
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput("eigenframe grid needs at least two nodes".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("eigenframe grid must be increasing".into()));
    }
    let perms = permutations::<3>();

    let first = hermitian_eigensystem(&path(t_grid[0]), EIGEN_TOL)?;
    let identity = StateMatrix::<3>::identity();
    let start = assign(&identity, &first, &perms);
    let mut current = build_frame(t_grid[0], &identity, &first, &start.labels_to_columns);

    let mut frames = vec![current];
    let mut bridged_nodes = 0;
    let mut min_link_overlap: f64 = 1.0;
    let mut i = 1;
    while i < t_grid.len() {
        let mut bridge = 0;
        let mut degenerate_seen = false;
        loop {
            let node = i + bridge;
            if node >= t_grid.len() {
                return Err(stuck(t_grid[i], degenerate_seen, min_link_overlap));
            }
            let es = hermitian_eigensystem(&path(t_grid[node]), EIGEN_TOL)?;
            let a = assign(&current.eigenvectors, &es, &perms);
            if a.min_overlap >= MIN_LINK_OVERLAP && a.margin >= AMBIGUITY_MARGIN {
                current = build_frame(t_grid[node], &current.eigenvectors, &es, &a.labels_to_columns);
                min_link_overlap = min_link_overlap.min(a.min_overlap);
                frames.push(current);
                bridged_nodes += bridge;
                i = node + 1;
                break;
            }
            degenerate_seen |= a.runner_up_degenerate;
            bridge += 1;
            if bridge > MAX_BRIDGE {
                return Err(stuck(t_grid[i], degenerate_seen, a.min_overlap));
            }
        }
    }
    Ok(EigenTransport {
        frames,
        bridged_nodes,
        min_link_overlap,
    })
}

fn stuck(t: f64, degenerate: bool, overlap: f64) -> Error {
    if degenerate {
        Error::DegeneracyEncountered { t }
    } else {
        Error::GridTooCoarse { t, overlap }
    }
}

struct Assignment {
    labels_to_columns: [usize; 3],
    min_overlap: f64,
    margin: f64,
    runner_up_degenerate: bool,
}

fn assign(prev: &StateMatrix<3>, next: &Eigensystem<3>, perms: &[[usize; 3]]) -> Assignment {
    let overlaps: [[f64; 3]; 3] = std::array::from_fn(|k| {
        let p = prev.column(k).into_owned();
        std::array::from_fn(|m| inner(&p, &next.vector(m)).norm())
    });
    let score = |perm: &[usize; 3]| -> f64 { (0..3).map(|k| overlaps[k][perm[k]].powi(2)).sum() };

    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    let mut second_score = f64::NEG_INFINITY;
    let mut second = 0;
    for (idx, perm) in perms.iter().enumerate() {
        let s = score(perm);
        if s > best_score {
            second_score = best_score;
            second = best;
            best_score = s;
            best = idx;
        } else if s > second_score {
            second_score = s;
            second = idx;
        }
    }
    let chosen = perms[best];
    let runner_up = perms[second];
    let runner_up_degenerate = (0..3).any(|k| {
        chosen[k] != runner_up[k]
            && (next.values[chosen[k]] - next.values[runner_up[k]]).abs() < DEGENERACY_GAP
    });
    Assignment {
        labels_to_columns: chosen,
        min_overlap: (0..3).map(|k| overlaps[k][chosen[k]]).fold(f64::INFINITY, f64::min),
        margin: best_score - second_score,
        runner_up_degenerate,
    }
}

fn build_frame(
    t: f64,
    prev: &StateMatrix<3>,
    es: &Eigensystem<3>,
    labels_to_columns: &[usize; 3],
) -> EigenFrame {
    let mut eigenvectors = StateMatrix::<3>::zeros();
    let mut eigenvalues = [0.0; 3];
    let mut continuity_labels = [0; 3];
    for (label, &col) in labels_to_columns.iter().enumerate() {
        let v = es.vector(col);
        let link = inner(&prev.column(label).into_owned(), &v);
        let fix = if link.norm() > 0.0 {
            link.conj() / link.norm()
        } else {
            C64::from(1.0)
        };
        eigenvectors.set_column(label, &(v * fix));
        eigenvalues[label] = es.values[col];
        continuity_labels[col] = label;
    }
    EigenFrame {
        t,
        eigenvalues,
        eigenvectors,
        continuity_labels,
    }
}

fn permutations<const N: usize>() -> Vec<[usize; N]> {
    fn rec<const N: usize>(prefix: &mut Vec<usize>, out: &mut Vec<[usize; N]>) {
        if prefix.len() == N {
            out.push(std::array::from_fn(|i| prefix[i]));
            return;
        }
        for k in 0..N {
            if !prefix.contains(&k) {
                prefix.push(k);
                rec(prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec::<N>(&mut Vec::with_capacity(N), &mut out);
    out
}

/// Uniform grid `t0, t0 + h, ...` ending exactly at `t1`.
pub fn uniform_grid(t0: f64, t1: f64, spacing: f64) -> Result<Vec<f64>> {
    let grid = StepGrid::new(t0, t1, spacing)?;
    Ok((0..=grid.steps()).map(|k| grid.time(k)).collect())
}

/// Starting state `|k>` as a transported-state record, for convenience.
pub fn initial_state<const N: usize>(k: usize, t0: f64) -> TransportedState<N> {
    TransportedState {
        amplitudes: basis_state(k),
        t: t0,
        origin: k,
        dynamical_phase: 0.0,
        transport_residual: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{crossing_times, Envelope, Pulse};

    fn fig2() -> ModelParams {
        ModelParams::new(1.0, 1.0, 0.16, Envelope::Gaussian(Pulse::new(0.8, 18.75, 7.0)))
    }

    #[test]
    fn constant_hamiltonian_eigenstate_is_stationary() {
        let p = ModelParams::new(1.0, 0.0, 1e-13, Envelope::Constant { omega0: 0.6 });
        // beta_z = A t - w is ~0 over the window, so H is constant
        let h = hamiltonian::<3>(&p, &field_at(&p, 0.0, Frame::Rotating));
        let es = hermitian_eigensystem(&h, 1e-12).unwrap();
        let v = es.vector(1);
        let traj = parallel_transport_ode(&p, &v, 0.0, 5.0, &TransportOptions::default()).unwrap();
        let last = traj.last().unwrap();
        assert!((last.amplitudes - v).norm() < 1e-9, "{}", (last.amplitudes - v).norm());
        assert!((last.dynamical_phase - 5.0 * es.values[1]).abs() < 1e-6);
    }

    #[test]
    fn zero_field_gives_bare_phase_only() {
        let p = ModelParams::new(1.0, 0.0, 1.0, Envelope::Zero);
        let opts = TransportOptions { frame: Frame::Lab, ..Default::default() };
        // lab frame, beta = (0,0,t): |dd> energy xi - t
        let (traj, stats) = schrodinger_evolve::<3>(&p, &basis_state(0), 0.0, 2.0, &opts).unwrap();
        let (t, psi) = traj.last().unwrap();
        let phase = -(t - 0.5 * t * t);
        assert!((psi[0] - C64::from_polar(1.0, phase)).norm() < 1e-9);
        assert!(stats.max_norm_drift < 1e-9);
    }

    #[test]
    fn populations_are_gauge_independent() {
        let p = fig2();
        let opts = TransportOptions::default();
        let psi0 = basis_state::<3>(0);
        let (raw, _) = schrodinger_evolve(&p, &psi0, 0.0, 37.5, &opts).unwrap();
        let pt = parallel_transport_ode(&p, &psi0, 0.0, 37.5, &opts).unwrap();
        assert_eq!(raw.len(), pt.len());
        for ((t, psi), phi) in raw.iter().zip(&pt) {
            assert_eq!(*t, phi.t);
            for i in 0..3 {
                assert!((psi[i].norm_sqr() - phi.amplitudes[i].norm_sqr()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn transported_equals_schrodinger_times_dynamical_phase() {
        let p = fig2();
        let opts = TransportOptions::default();
        let psi0 = basis_state::<3>(0);
        let (raw, _) = schrodinger_evolve(&p, &psi0, 0.0, 37.5, &opts).unwrap();
        let pt = parallel_transport_ode(&p, &psi0, 0.0, 37.5, &opts).unwrap();
        let (_, psi) = raw.last().unwrap();
        let phi = pt.last().unwrap();
        let rebuilt = psi * C64::from_polar(1.0, phi.dynamical_phase);
        // the recorded phase uses the trapezoid rule, so only O(dt^2) agreement
        assert!((rebuilt - phi.amplitudes).norm() < 1e-5);
    }

    #[test]
    fn fig2_population_swap() {
        let p = fig2();
        let pt = parallel_transport_ode(&p, &basis_state::<3>(0), 0.0, 37.5, &TransportOptions::default())
            .unwrap();
        let last = pt.last().unwrap();
        assert!(last.amplitudes[1].norm() >= 0.99);
        assert!(pt.iter().all(|s| (s.amplitudes.norm() - 1.0).abs() < 1e-9));
        assert!(pt.iter().all(|s| s.transport_residual < 1e-6));
    }

    #[test]
    fn gauge_covariance_of_initial_phase() {
        let p = fig2();
        let opts = TransportOptions::default();
        let psi0 = basis_state::<3>(0);
        let phase = C64::from_polar(1.0, 0.913);
        let a = parallel_transport_ode(&p, &psi0, 0.0, 20.0, &opts).unwrap();
        let b = parallel_transport_ode(&p, &(psi0 * phase), 0.0, 20.0, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.amplitudes * phase - y.amplitudes).norm() < 1e-12);
        }
    }

    #[test]
    fn singlet_sector_stays_empty() {
        let p = fig2().with_dim(crate::model::DimMode::Full);
        let psi0 = StateVector::<4>::from([
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8),
            C64::default(),
            C64::default(),
        ]);
        let (traj, _) = schrodinger_evolve(&p, &psi0, 0.0, 37.5, &TransportOptions::default()).unwrap();
        assert!(traj.iter().all(|(_, v)| v[3].norm_sqr() <= 1e-12));
    }

    #[test]
    fn populations_sum_to_one() {
        let p = fig2();
        let (traj, _) =
            schrodinger_evolve(&p, &basis_state::<3>(0), 0.0, 37.5, &TransportOptions::default()).unwrap();
        let pops = track_populations(&traj);
        assert_eq!(pops[0].1, [1.0, 0.0, 0.0]);
        assert!(pops.iter().all(|(_, p)| (p.iter().sum::<f64>() - 1.0).abs() < 1e-9));
        let last = pops.last().unwrap().1;
        assert!((last[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn diabatic_eigenframe_is_static() {
        let p = ModelParams::new(1.0, 1.0, 0.16, Envelope::Zero);
        let grid = uniform_grid(0.0, 37.5, 0.01).unwrap();
        let et = eigenframe_transport(&p, &grid, Frame::Rotating).unwrap();
        assert_eq!(*et.final_vectors(), StateMatrix::<3>::identity());
    }

    #[test]
    fn eigenframe_labels_follow_avoided_crossing() {
        let p = fig2();
        let grid = uniform_grid(0.0, 37.5, 0.01).unwrap();
        let et = eigenframe_transport(&p, &grid, Frame::Rotating).unwrap();
        let v0 = et.transported(0);
        assert!(v0[1].norm() > 0.999, "{v0:?}");
        for f in &et.frames {
            let g = f.eigenvectors.adjoint() * f.eigenvectors;
            assert!((g - StateMatrix::<3>::identity()).norm() < 1e-10);
        }
        // successive frames are linked by real positive overlaps
        for w in et.frames.windows(2) {
            for k in 0..3 {
                let link = w[0].eigenvectors.column(k).dotc(&w[1].eigenvectors.column(k));
                assert!(link.re > 0.0 && link.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenframe_rejects_coarse_grid() {
        let p = ModelParams::new(1.0, 1.0, 0.16, Envelope::Constant { omega0: 0.8 });
        let t_a = crossing_times(&p).t_a;
        let err = eigenframe_transport(&p, &[t_a - 6.0, t_a + 6.0], Frame::Rotating).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn permutations_are_complete() {
        let perms = permutations::<3>();
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], [0, 1, 2]);
        assert_eq!(permutations::<4>().len(), 24);
    }
}
