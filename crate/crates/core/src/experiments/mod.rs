//! Scenario files, the figure runners and the parallel `(Omega0, A)` sweep.

pub mod config;
pub mod output;
mod runners;
mod sweep;

pub use config::{default_window, AxisRange, ConfigMap, Method, ScenarioConfig, SweepConfig};
pub use runners::{
    onset_and_saturation, run_adiabatic_report, run_energy_diagram, run_evolution, run_gap_study,
    run_twin_pulse, AdiabaticOutput, AdiabaticRow, AdiabaticSummary, CrossCheck, EigenSummary,
    EnergyOutput, EnergyRow, EvolutionOutput, EvolutionRow, EvolutionSummary, GapRow, OdeSummary,
};
pub use sweep::{run_sweep, sweep_point, PointStatus, SweepRow};
