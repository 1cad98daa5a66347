//! CSV and JSON writers. Every CSV has a fixed header, `.` decimals, `NaN`
//! for undefined values and a newline after every row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::runners::{AdiabaticRow, EnergyRow, EvolutionRow, GapRow};
use super::sweep::SweepRow;
use crate::error::{Error, Result};

pub const EVOLUTION_HEADER: &str = "t,p1,p2,p3,Gamma12,Gamma3,product_arg";
pub const ENERGY_HEADER: &str = "t,E1,E2,E3,D1,D2,D3";
pub const GAP_HEADER: &str = "xi,t_a,gap_at_t_a,min_gap,t_min_gap,gap_at_t_a_over_xi,min_gap_over_xi";
pub const SWEEP_HEADER: &str =
    "Omega0,A,Gamma12,product_arg,adiabatic_flag,max_adiabaticity_ratio,min_fidelity,status";
pub const ADIABATIC_HEADER: &str = "t,Omega,Delta,ratio";

/// Shortest round-trip decimal form, `NaN` when undefined.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), num)
}

fn table<I>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn evolution_csv(rows: &[EvolutionRow]) -> String {
    table(
        EVOLUTION_HEADER,
        rows.iter().map(|r| {
            vec![
                num(r.t),
                num(r.populations[0]),
                num(r.populations[1]),
                num(r.populations[2]),
                opt(r.gamma12),
                opt(r.gamma3),
                opt(r.product_arg),
            ]
        }),
    )
}

pub fn energy_csv(rows: &[EnergyRow]) -> String {
    table(
        ENERGY_HEADER,
        rows.iter().map(|r| {
            std::iter::once(num(r.t))
                .chain(r.adiabatic.iter().map(|&e| num(e)))
                .chain(r.diabatic.iter().map(|&d| num(d)))
                .collect()
        }),
    )
}

pub fn gap_csv(rows: &[GapRow]) -> String {
    table(
        GAP_HEADER,
        rows.iter().map(|g| {
            vec![
                num(g.xi),
                num(g.t_a),
                num(g.gap_at_t_a),
                num(g.min_gap),
                num(g.t_min_gap),
                num(g.gap_at_t_a / g.xi),
                num(g.min_gap / g.xi),
            ]
        }),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    table(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            vec![
                num(r.omega0),
                num(r.sweep_rate),
                opt(r.gamma12),
                opt(r.product_arg),
                r.adiabatic.to_string(),
                opt(r.max_ratio),
                opt(r.min_fidelity),
                r.status.as_str().to_string(),
            ]
        }),
    )
}

pub fn adiabatic_csv(rows: &[AdiabaticRow]) -> String {
    table(
        ADIABATIC_HEADER,
        rows.iter()
            .map(|r| vec![num(r.t), num(r.omega), num(r.delta), opt(r.ratio)]),
    )
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize summary: {e}")))?;
    let _ = writeln!(s);
    Ok(s)
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .and_then(|()| fs::write(dir.join(name), contents))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", dir.join(name).display())))
}

/// `energy_xi_<xi>.csv`.
pub fn energy_file_name(xi: f64) -> String {
    format!("energy_xi_{}.csv", num(xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::PointStatus;

    #[test]
    fn numbers_and_missing_values() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(37.5), "37.5");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(opt(None), "NaN");
        assert_eq!(energy_file_name(0.5), "energy_xi_0.5.csv");
        assert_eq!(energy_file_name(2.0), "energy_xi_2.csv");
    }

    #[test]
    fn csv_rows_are_newline_terminated() {
        let rows = [SweepRow {
            omega0: 0.2,
            sweep_rate: 0.02,
            gamma12: Some(-3.1),
            product_arg: None,
            adiabatic: false,
            max_ratio: Some(0.5),
            min_fidelity: Some(0.3),
            status: PointStatus::NullOverlap,
        }];
        let csv = sweep_csv(&rows);
        assert_eq!(
            csv,
            format!("{SWEEP_HEADER}\n0.2,0.02,-3.1,NaN,false,0.5,0.3,null_overlap\n")
        );
        assert_eq!(evolution_csv(&[]), format!("{EVOLUTION_HEADER}\n"));
    }
}
