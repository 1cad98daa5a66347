use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SweepConfig;
use crate::error::{Error, Result};
use crate::model::{adiabaticity_ratio, DimMode};
use crate::phase::{angle_distance, Permutation, PhaseReport};
use crate::transport::{transport_basis_final, uniform_grid};

/// Outcome class of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Final overlaps are not a permutation at the configured threshold.
    NotAPermutation,
    /// `Gamma12` or `gamma3` is undefined.
    NullOverlap,
    ConfigError,
    NumericalError,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::NotAPermutation => "not_a_permutation",
            PointStatus::NullOverlap => "null_overlap",
            PointStatus::ConfigError => "config_error",
            PointStatus::NumericalError => "numerical_error",
        }
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub omega0: f64,
    pub sweep_rate: f64,
    pub gamma12: Option<f64>,
    pub product_arg: Option<f64>,
    /// Exchange `(1 2)` realized at the fidelity threshold and
    /// `|product_arg - pi|` within the sweep tolerance.
    pub adiabatic: bool,
    pub max_ratio: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub status: PointStatus,
}

/// Evaluates every grid point on a pool of `cfg.workers` threads. Rows come
/// back in row-major order (`Omega0` outer, `A` inner) whatever the
/// scheduling; a failing point is recorded in its row and never aborts the
/// sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let omegas = cfg.omega0.values();
    let rates = cfg.sweep_rate.values();
    let points: Vec<(f64, f64)> = omegas
        .iter()
        .flat_map(|&o| rates.iter().map(move |&a| (o, a)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|&(o, a)| sweep_point(cfg, o, a)).collect()))
}

/// A single grid point, evaluated in isolation.
pub fn sweep_point(cfg: &SweepConfig, omega0: f64, sweep_rate: f64) -> SweepRow {
    let mut row = SweepRow {
        omega0,
        sweep_rate,
        gamma12: None,
        product_arg: None,
        adiabatic: false,
        max_ratio: None,
        min_fidelity: None,
        status: PointStatus::Ok,
    };
    let scenario = match cfg.point(omega0, sweep_rate) {
        Ok(s) => s,
        Err(_) => {
            row.status = PointStatus::ConfigError;
            return row;
        }
    };
    let p = &scenario.model;
    row.max_ratio = uniform_grid(scenario.t0, scenario.t1, scenario.checkpoint_spacing())
        .ok()
        .and_then(|grid| {
            grid.iter()
                .filter_map(|&t| adiabaticity_ratio(p, t).ok())
                .max_by(f64::total_cmp)
        });

    let opts = scenario.transport_options();
    let states = match p.dim_mode {
        DimMode::Triplet => transport_basis_final::<3>(p, scenario.t0, scenario.t1, &opts)
            .map(|(m, _)| m),
        DimMode::Full => transport_basis_final::<4>(p, scenario.t0, scenario.t1, &opts)
            .map(|(m, _)| m.fixed_view::<3, 3>(0, 0).into_owned()),
    };
    let states = match states {
        Ok(s) => s,
        Err(e) => {
            row.status = if e.is_config() {
                PointStatus::ConfigError
            } else {
                PointStatus::NumericalError
            };
            return row;
        }
    };
    let report = PhaseReport::from_states(&states, scenario.null_tol, scenario.permutation_threshold);
    row.gamma12 = report.big_gamma12;
    row.product_arg = report.product_arg;
    row.min_fidelity = Some(report.min_fidelity);
    row.status = if report.permutation.is_none() {
        PointStatus::NotAPermutation
    } else if report.product_arg.is_none() {
        PointStatus::NullOverlap
    } else {
        PointStatus::Ok
    };
    row.adiabatic = report.permutation == Some(Permutation::SWAP_12)
        && report
            .product_arg
            .is_some_and(|arg| angle_distance(arg, PI) <= cfg.arg_tol);
    row
}
