use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use geomphase_core::experiments::{self, output, ConfigMap, ScenarioConfig, SweepConfig};
use geomphase_core::{crossing_times, CrossingTimes, Error, Result};

/// Geometric phases of two exchange-coupled qubits driven through level
/// crossings.
#[derive(Debug, Parser)]
#[command(name = "geomphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy diagram (energy.csv) and the gap-versus-xi study.
    Eigen(Args),
    /// Single-pulse evolution and phases (evolution.csv).
    Evolve(Args),
    /// Parallel (Omega0, A) sweep (sweep.csv).
    Sweep(Args),
    /// Twin-pulse evolution and cyclic phase (twin.csv).
    Twin(Args),
    /// Adiabaticity ratio along the run (adiabatic.csv).
    Adiabatic(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// key = value scenario file
    #[arg(long)]
    config: PathBuf,
    /// Directory for the CSV and JSON outputs
    #[arg(long)]
    out_dir: PathBuf,
    /// Sweep worker threads
    #[arg(long)]
    workers: Option<usize>,
    /// RK4 step
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    frame: Option<FrameArg>,
    /// 3 = triplet only, 4 = with singlet
    #[arg(long, value_parser = ["3", "4"])]
    dim: Option<String>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrameArg {
    Lab,
    Rotating,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ode,
    Eigenbasis,
    Both,
}

impl Args {
    fn load(&self) -> Result<ConfigMap> {
        let mut map = ConfigMap::from_file(&self.config)?;
        if let Some(w) = self.workers {
            map.set("workers", w)?;
        }
        if let Some(dt) = self.dt {
            map.set("dt", dt)?;
        }
        if let Some(f) = self.frame {
            map.set("frame", f.to_possible_value().expect("no skipped variants").get_name())?;
        }
        if let Some(d) = &self.dim {
            map.set("dim", d)?;
        }
        if let Some(m) = self.method {
            map.set("method", m.to_possible_value().expect("no skipped variants").get_name())?;
        }
        Ok(map)
    }
}

#[derive(Serialize)]
struct EnergySummary {
    crossing_times: CrossingTimes,
    gaps: Vec<experiments::GapRow>,
}

#[derive(Serialize)]
struct SweepSummary {
    omega0: experiments::AxisRange,
    sweep_rate: experiments::AxisRange,
    points: usize,
    adiabatic_points: usize,
    status_counts: Vec<(String, usize)>,
}

#[derive(Serialize)]
struct AdiabaticFile {
    crossing_times: CrossingTimes,
    #[serde(flatten)]
    summary: experiments::AdiabaticSummary,
}

fn eigen(args: &Args) -> Result<()> {
    let map = args.load()?;
    let cfg = ScenarioConfig::from_map(&map)?;
    let base = experiments::run_energy_diagram(&cfg)?;
    let studies = experiments::run_gap_study(&map)?;
    let dir = &args.out_dir;
    output::write_file(dir, "energy.csv", &output::energy_csv(&base.rows))?;
    let mut gaps = vec![base.gap];
    for s in &studies {
        output::write_file(dir, &output::energy_file_name(s.gap.xi), &output::energy_csv(&s.rows))?;
        gaps.push(s.gap);
    }
    output::write_file(dir, "energy_gaps.csv", &output::gap_csv(&gaps))?;
    let summary = EnergySummary {
        crossing_times: crossing_times(&cfg.model),
        gaps,
    };
    output::write_file(dir, "summary.json", &output::to_json(&summary)?)?;
    for g in &summary.gaps {
        println!(
            "xi = {}: gap at t_a = {:.6} ({:.4} xi), min gap = {:.6} at t = {:.3}",
            g.xi,
            g.gap_at_t_a,
            g.gap_at_t_a / g.xi,
            g.min_gap,
            g.t_min_gap
        );
    }
    Ok(())
}

fn evolve(args: &Args, twin: bool) -> Result<()> {
    let cfg = ScenarioConfig::from_map(&args.load()?)?;
    let out = if twin {
        experiments::run_twin_pulse(&cfg)?
    } else {
        experiments::run_evolution(&cfg)?
    };
    let name = if twin { "twin.csv" } else { "evolution.csv" };
    output::write_file(&args.out_dir, name, &output::evolution_csv(&out.rows))?;
    output::write_file(&args.out_dir, "summary.json", &output::to_json(&out.summary)?)?;

    let r = out.summary.report();
    match r.permutation {
        Some(p) => println!("permutation: {p} (min fidelity {:.5})", r.min_fidelity),
        None => println!("no permutation (min fidelity {:.5})", r.min_fidelity),
    }
    let show = |label: &str, v: Option<f64>| match v {
        Some(x) => println!("{label} = {x:.6} rad"),
        None => println!("{label} undefined"),
    };
    show("Gamma12", r.big_gamma12);
    show("Gamma3", r.big_gamma3);
    show("arg(gamma12 gamma3)", r.product_arg);
    show("arg(gamma321)", r.gamma321.map(|g| g.arg()));
    show("arg(cycle factor)", r.gamma_cycle.map(|g| g.arg()));
    if let Some(r) = out.summary.adiabaticity.max_ratio {
        println!("max adiabaticity ratio = {r:.6}");
    }
    for w in &out.summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn sweep(args: &Args) -> Result<()> {
    let cfg = SweepConfig::from_map(&args.load()?)?;
    let rows = experiments::run_sweep(&cfg)?;
    output::write_file(&args.out_dir, "sweep.csv", &output::sweep_csv(&rows))?;
    let mut status_counts: Vec<(String, usize)> = Vec::new();
    for r in &rows {
        let s = r.status.as_str();
        match status_counts.iter_mut().find(|(k, _)| k == s) {
            Some((_, n)) => *n += 1,
            None => status_counts.push((s.to_string(), 1)),
        }
    }
    let summary = SweepSummary {
        omega0: cfg.omega0,
        sweep_rate: cfg.sweep_rate,
        points: rows.len(),
        adiabatic_points: rows.iter().filter(|r| r.adiabatic).count(),
        status_counts,
    };
    output::write_file(&args.out_dir, "summary.json", &output::to_json(&summary)?)?;
    println!(
        "{} points, {} adiabatic",
        summary.points, summary.adiabatic_points
    );
    Ok(())
}

fn adiabatic(args: &Args) -> Result<()> {
    let cfg = ScenarioConfig::from_map(&args.load()?)?;
    let out = experiments::run_adiabatic_report(&cfg)?;
    output::write_file(&args.out_dir, "adiabatic.csv", &output::adiabatic_csv(&out.rows))?;
    let file = AdiabaticFile {
        crossing_times: crossing_times(&cfg.model),
        summary: out.summary,
    };
    output::write_file(&args.out_dir, "summary.json", &output::to_json(&file)?)?;
    if let (Some(r), Some(t)) = (out.summary.max_ratio, out.summary.t_max_ratio) {
        println!("max ratio {r:.6} at t = {t:.3}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Eigen(a) => eigen(a),
        Command::Evolve(a) => evolve(a, false),
        Command::Sweep(a) => sweep(a),
        Command::Twin(a) => evolve(a, true),
        Command::Adiabatic(a) => adiabatic(a),
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_config() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
