use serde::{Deserialize, Serialize};

use super::config::{xi_list, ConfigMap, ScenarioConfig};
use crate::error::{Error, Result};
use crate::model::{
    adiabaticity_ratio, crossing_times, detuning, diabatic_energies, field_at, hamiltonian,
    CrossingTimes, DimMode, Envelope, Frame,
};
use crate::numerics::{hermitian_eigensystem, StateMatrix};
use crate::phase::{detect_permutation, Permutation, PhaseReport};
use crate::transport::{eigenframe_transport, transport_basis, uniform_grid};

/// One row of `evolution.csv` / `twin.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionRow {
    pub t: f64,
    /// `|<i|phi_s(t)>|^2` for the configured initial state `s`.
    pub populations: [f64; 3],
    pub gamma12: Option<f64>,
    pub gamma3: Option<f64>,
    pub product_arg: Option<f64>,
}

impl EvolutionRow {
    fn new(t: f64, states: &StateMatrix<3>, initial: usize, report: &PhaseReport) -> Self {
        let norm2 = states.column(initial).norm_squared();
        Self {
            t,
            populations: std::array::from_fn(|i| states[(i, initial)].norm_sqr() / norm2),
            gamma12: report.big_gamma12,
            gamma3: report.big_gamma3,
            product_arg: report.product_arg,
        }
    }
}

/// Results of the ODE transporter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSummary {
    pub report: PhaseReport,
    pub steps: usize,
    pub max_norm_drift: f64,
    pub max_transport_residual: f64,
    /// Largest singlet population seen (4-state runs only).
    pub max_singlet_population: Option<f64>,
    /// First time the off-diagonal weight `|<1|phi_2><2|phi_1>|` reaches 1%
    /// of its final value.
    pub offdiag_onset_time: Option<f64>,
    /// Time after which that weight stays within 1% of its final value.
    pub offdiag_saturation_time: Option<f64>,
}

/// Results of the eigenframe transporter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub report: PhaseReport,
    pub grid_spacing: f64,
    pub bridged_nodes: usize,
    pub min_link_overlap: f64,
}

/// Agreement between the two transporters at the end of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// `|<phi_k^ode|phi_k^eig>|^2` per label.
    pub ray_fidelities: [f64; 3],
    /// Distance on the circle between the two `Gamma12` values.
    pub gamma12_difference: Option<f64>,
}

/// Scan of the adiabaticity ratio over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSummary {
    pub max_ratio: Option<f64>,
    pub t_max_ratio: Option<f64>,
    /// Ratio at `t_a`, when `t_a` lies inside the window.
    pub ratio_at_t_a: Option<f64>,
}

/// `summary.json` of an evolution or twin-pulse run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub config: ScenarioConfig,
    pub crossing_times: CrossingTimes,
    pub adiabaticity: AdiabaticSummary,
    pub ode: Option<OdeSummary>,
    pub eigenbasis: Option<EigenSummary>,
    pub cross_check: Option<CrossCheck>,
    /// Why the final overlaps did not form a permutation, if they did not.
    pub permutation_error: Option<String>,
    pub expected_permutation: Option<Permutation>,
    pub expected_permutation_realized: Option<bool>,
    pub warnings: Vec<String>,
}

impl EvolutionSummary {
    /// The report of the primary method (ODE when it ran).
    pub fn report(&self) -> &PhaseReport {
        match (&self.ode, &self.eigenbasis) {
            (Some(o), _) => &o.report,
            (None, Some(e)) => &e.report,
            (None, None) => unreachable!("every run uses at least one method"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOutput {
    pub rows: Vec<EvolutionRow>,
    pub summary: EvolutionSummary,
}

/// Transports all three triplet states and extracts the phases along the
/// way and at the end.
pub fn run_evolution(cfg: &ScenarioConfig) -> Result<EvolutionOutput> {
    run_scenario(cfg, None)
}

/// Twin-pulse run; the adiabatic expectation is the cycle `1->3, 3->2, 2->1`.
pub fn run_twin_pulse(cfg: &ScenarioConfig) -> Result<EvolutionOutput> {
    if !matches!(cfg.model.envelope, Envelope::TwinGaussian { .. }) {
        return Err(Error::Config("twin runs need envelope.variant = twin_gaussian".into()));
    }
    run_scenario(cfg, Some(Permutation::CYCLE_132))
}

fn run_scenario(cfg: &ScenarioConfig, expected: Option<Permutation>) -> Result<EvolutionOutput> {
    cfg.validate()?;
    let mut rows = Vec::new();

    let ode = if cfg.method.uses_ode() {
        let (ode_rows, summary, states) = match cfg.model.dim_mode {
            DimMode::Triplet => ode_part::<3>(cfg)?,
            DimMode::Full => ode_part::<4>(cfg)?,
        };
        rows = ode_rows;
        Some((summary, states))
    } else {
        None
    };

    let eigen = if cfg.method.uses_eigenbasis() {
        let (eigen_rows, summary, states) = eigen_part(cfg)?;
        if rows.is_empty() {
            rows = eigen_rows;
        }
        Some((summary, states))
    } else {
        None
    };

    let cross_check = match (&ode, &eigen) {
        (Some((o, a)), Some((e, b))) => Some(CrossCheck {
            ray_fidelities: std::array::from_fn(|k| a.column(k).dotc(&b.column(k)).norm_sqr()),
            gamma12_difference: match (o.report.big_gamma12, e.report.big_gamma12) {
                (Some(x), Some(y)) => Some(crate::phase::angle_distance(x, y)),
                _ => None,
            },
        }),
        _ => None,
    };

    let primary = ode
        .as_ref()
        .map(|(s, _)| &s.report)
        .or(eigen.as_ref().map(|(s, _)| &s.report))
        .expect("at least one method ran");
    let moduli: [[f64; 3]; 3] =
        std::array::from_fn(|j| std::array::from_fn(|k| primary.fidelities[j][k].sqrt()));
    let permutation_error = detect_permutation(&moduli, cfg.permutation_threshold)
        .err()
        .map(|e| e.to_string());
    let expected_permutation_realized = expected.map(|p| primary.permutation == Some(p));

    let summary = EvolutionSummary {
        config: *cfg,
        crossing_times: crossing_times(&cfg.model),
        adiabaticity: adiabatic_scan(cfg)?.1,
        ode: ode.map(|(s, _)| s),
        eigenbasis: eigen.map(|(s, _)| s),
        cross_check,
        permutation_error,
        expected_permutation: expected,
        expected_permutation_realized,
        warnings: cfg.model.warnings(),
    };
    Ok(EvolutionOutput { rows, summary })
}

fn triplet_block<const N: usize>(m: &StateMatrix<N>) -> StateMatrix<3> {
    m.fixed_view::<3, 3>(0, 0).into_owned()
}

fn ode_part<const N: usize>(
    cfg: &ScenarioConfig,
) -> Result<(Vec<EvolutionRow>, OdeSummary, StateMatrix<3>)> {
    let run = transport_basis::<N>(&cfg.model, cfg.t0, cfg.t1, &cfg.transport_options())?;
    let mut rows = Vec::with_capacity(run.times.len());
    let mut weights = Vec::with_capacity(run.times.len());
    let mut max_singlet: f64 = 0.0;
    for (&t, m) in run.times.iter().zip(&run.states) {
        let block = triplet_block(m);
        let report = PhaseReport::from_states(&block, cfg.null_tol, cfg.permutation_threshold);
        rows.push(EvolutionRow::new(t, &block, cfg.initial_state, &report));
        weights.push((t, block[(0, 1)].norm() * block[(1, 0)].norm()));
        if N == 4 {
            // leakage of the triplet states; the singlet's own column is excluded
            for k in 0..3 {
                max_singlet = max_singlet.max(m[(3, k)].norm_sqr());
            }
        }
    }
    let last = triplet_block(run.final_states());
    let report = PhaseReport::from_states(&last, cfg.null_tol, cfg.permutation_threshold);
    let (onset, saturation) = onset_and_saturation(&weights, cfg.null_tol);
    let summary = OdeSummary {
        report,
        steps: run.stats.steps,
        max_norm_drift: run.stats.max_norm_drift,
        max_transport_residual: run.stats.max_transport_residual,
        max_singlet_population: (N == 4).then_some(max_singlet),
        offdiag_onset_time: onset,
        offdiag_saturation_time: saturation,
    };
    Ok((rows, summary, last))
}

/// Onset: first time the weight reaches 1% of its final value. Saturation:
/// the earliest time after which it stays within 1% of the final value.
pub fn onset_and_saturation(weights: &[(f64, f64)], null_tol: f64) -> (Option<f64>, Option<f64>) {
    let Some(&(_, w_final)) = weights.last() else {
        return (None, None);
    };
    if !(w_final > null_tol * null_tol) {
        return (None, None);
    }
    let onset = weights.iter().find(|(_, w)| *w >= 0.01 * w_final).map(|(t, _)| *t);
    let saturation = weights
        .iter()
        .rposition(|(_, w)| (w - w_final).abs() > 0.01 * w_final)
        .map_or(weights.first().map(|(t, _)| *t), |i| weights.get(i + 1).map(|(t, _)| *t));
    (onset, saturation)
}

fn eigen_part(cfg: &ScenarioConfig) -> Result<(Vec<EvolutionRow>, EigenSummary, StateMatrix<3>)> {
    let spacing = cfg.checkpoint_spacing();
    let grid = uniform_grid(cfg.t0, cfg.t1, spacing)?;
    let et = eigenframe_transport(&cfg.model, &grid, cfg.frame)?;
    let rows = et
        .frames
        .iter()
        .map(|f| {
            let report =
                PhaseReport::from_states(&f.eigenvectors, cfg.null_tol, cfg.permutation_threshold);
            EvolutionRow::new(f.t, &f.eigenvectors, cfg.initial_state, &report)
        })
        .collect();
    let last = *et.final_vectors();
    let summary = EigenSummary {
        report: PhaseReport::from_states(&last, cfg.null_tol, cfg.permutation_threshold),
        grid_spacing: spacing,
        bridged_nodes: et.bridged_nodes,
        min_link_overlap: et.min_link_overlap,
    };
    Ok((rows, summary, last))
}

/// One row of `adiabatic.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticRow {
    pub t: f64,
    pub omega: f64,
    pub delta: f64,
    /// Absent where envelope and detuning vanish together.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticOutput {
    pub rows: Vec<AdiabaticRow>,
    pub summary: AdiabaticSummary,
}

/// Adiabaticity ratio on the checkpoint grid of the run.
pub fn run_adiabatic_report(cfg: &ScenarioConfig) -> Result<AdiabaticOutput> {
    cfg.validate()?;
    let (rows, summary) = adiabatic_scan(cfg)?;
    Ok(AdiabaticOutput { rows, summary })
}

fn adiabatic_scan(cfg: &ScenarioConfig) -> Result<(Vec<AdiabaticRow>, AdiabaticSummary)> {
    let p = &cfg.model;
    let grid = uniform_grid(cfg.t0, cfg.t1, cfg.checkpoint_spacing())?;
    let rows: Vec<AdiabaticRow> = grid
        .iter()
        .map(|&t| AdiabaticRow {
            t,
            omega: p.envelope.value(t),
            delta: detuning(p, t),
            ratio: adiabaticity_ratio(p, t).ok(),
        })
        .collect();
    let best = rows
        .iter()
        .filter_map(|r| r.ratio.map(|x| (r.t, x)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let t_a = crossing_times(p).t_a;
    let ratio_at_t_a = if (cfg.t0..=cfg.t1).contains(&t_a) {
        adiabaticity_ratio(p, t_a).ok()
    } else {
        None
    };
    Ok((
        rows,
        AdiabaticSummary {
            max_ratio: best.map(|b| b.1),
            t_max_ratio: best.map(|b| b.0),
            ratio_at_t_a,
        },
    ))
}

/// One row of `energy.csv`: continuity-ordered instantaneous eigenvalues and
/// the bare diagonal energies, rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub t: f64,
    pub adiabatic: [f64; 3],
    pub diabatic: [f64; 3],
}

/// Gap between the two lowest levels around `t_a` for one value of `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub xi: f64,
    pub t_a: f64,
    pub gap_at_t_a: f64,
    pub min_gap: f64,
    pub t_min_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyOutput {
    pub rows: Vec<EnergyRow>,
    pub gap: GapRow,
}

/// Energy diagram of one scenario, always in the rotating frame.
pub fn run_energy_diagram(cfg: &ScenarioConfig) -> Result<EnergyOutput> {
    cfg.validate()?;
    let p = &cfg.model;
    let grid = uniform_grid(cfg.t0, cfg.t1, cfg.checkpoint_spacing())?;
    let et = eigenframe_transport(p, &grid, Frame::Rotating)?;
    let rows: Vec<EnergyRow> = et
        .frames
        .iter()
        .map(|f| EnergyRow {
            t: f.t,
            adiabatic: f.eigenvalues,
            diabatic: diabatic_energies(p, &field_at(p, f.t, Frame::Rotating)),
        })
        .collect();

    let t_a = crossing_times(p).t_a;
    let lowest_gap = |t: f64| -> Result<f64> {
        let h = hamiltonian::<3>(p, &field_at(p, t, Frame::Rotating));
        let es = hermitian_eigensystem(&h, 1e-10)?;
        Ok(es.values[1] - es.values[0])
    };
    let half_width = match p.envelope.pulses().first() {
        Some(pulse) => pulse.width,
        None => f64::INFINITY,
    };
    let mut min_gap = (f64::INFINITY, t_a);
    for f in &et.frames {
        if (f.t - t_a).abs() <= half_width {
            let mut sorted = f.eigenvalues;
            sorted.sort_by(f64::total_cmp);
            let g = sorted[1] - sorted[0];
            if g < min_gap.0 {
                min_gap = (g, f.t);
            }
        }
    }
    let gap = GapRow {
        xi: p.xi,
        t_a,
        gap_at_t_a: lowest_gap(t_a)?,
        min_gap: min_gap.0,
        t_min_gap: min_gap.1,
    };
    Ok(EnergyOutput { rows, gap })
}

/// Energy diagrams for every `xi` in `eigen.xi_list`, each with its own
/// crossing time, pulse center and window unless the file pins them.
pub fn run_gap_study(map: &ConfigMap) -> Result<Vec<EnergyOutput>> {
    xi_list(map)?
        .into_iter()
        .map(|xi| {
            let mut m = map.clone();
            m.set("xi", xi)?;
            run_energy_diagram(&ScenarioConfig::from_map(&m)?)
        })
        .collect()
}
