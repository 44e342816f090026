//! CSV and plot-script emitters.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::ComplexityRow;
use super::sweep::{Deployment, SweepRow, UtNmseRow};
use crate::error::Result;
use crate::pilots::Allocation;

pub const SWEEP_HEADER: &str = "p_dbw,estimator,allocation,mu_d,s,k,nmse_avg,nmse_std,trials,seed,wall_ms";
pub const COMPLEXITY_HEADER: &str = "np,mmse_flops,tsce_flops,ratio";
pub const ALLOCATION_HEADER: &str = "ut_index,pilot_index";
pub const SCENARIO_HEADER: &str = "ut_index,xi_x,xi_y,nadir_deg,elevation_deg,slant_km,shadow_db,beta";
pub const ESTIMATE_HEADER: &str = "ut_index,estimator,nmse,analytic_nmse";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.9e},{:.9e},{},{},{:.3}",
            r.p_dbw, r.estimator, r.allocation, r.mu_d, r.s, r.k, r.nmse_avg, r.nmse_std, r.trials, r.seed, r.wall_ms
        )
        .unwrap();
    }
    out
}

/// Gnuplot script drawing NMSE (dB) against P (dBW), one series per
/// estimator/allocation/grid combination found in `rows`.
pub fn plot_script(rows: &[SweepRow], csv_name: &str) -> String {
    let mut series: Vec<(&str, &str, usize, usize, usize)> = rows
        .iter()
        .filter(|r| !r.estimator.contains('!'))
        .map(|r| (r.estimator.as_str(), r.allocation.as_str(), r.mu_d, r.s, r.k))
        .collect();
    series.sort();
    series.dedup();
    let mut out = String::new();
    out.push_str("set datafile separator ','\n");
    out.push_str("set xlabel 'P (dBW)'\nset ylabel 'NMSE (dB)'\nset grid\nset key outside right\n");
    let plots: Vec<String> = series
        .iter()
        .map(|(e, a, mu, s, k)| {
            format!(
                "'{csv_name}' every ::1 using 1:((strcol(2) eq '{e}' && strcol(3) eq '{a}' && $4 == {mu} && $5 == {s} && $6 == {k}) ? 10*log10($7) : NaN) with linespoints title '{e} {a} mu={mu} S={s} K={k}'"
            )
        })
        .collect();
    if !plots.is_empty() {
        out.push_str("plot ");
        out.push_str(&plots.join(", \\\n     "));
        out.push('\n');
    }
    out
}

/// Writes `sweep.csv` and `sweep.gp` into `dir`.
pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("sweep.csv");
    let plot = dir.join("sweep.gp");
    fs::write(&csv, sweep_csv(rows))?;
    fs::write(&plot, plot_script(rows, "sweep.csv"))?;
    Ok((csv, plot))
}

pub fn complexity_csv(rows: &[ComplexityRow]) -> String {
    let mut out = format!("{COMPLEXITY_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{:.6e},{:.6e},{:.6e}", r.np, r.mmse_flops, r.tsce_flops, r.ratio).unwrap();
    }
    out
}

pub fn allocation_csv(alloc: &Allocation) -> String {
    let mut out = format!("{ALLOCATION_HEADER}\n");
    for (k, s) in alloc.pilot_of.iter().enumerate() {
        writeln!(out, "{k},{s}").unwrap();
    }
    out
}

pub fn scenario_csv(dep: &Deployment) -> String {
    let mut out = format!("{SCENARIO_HEADER}\n");
    for (k, g) in dep.geometry.iter().enumerate() {
        writeln!(
            out,
            "{k},{:.12},{:.12},{:.9},{:.9},{:.6},{:.6},{:.9e}",
            g.space_angle.x,
            g.space_angle.y,
            g.nadir.to_degrees(),
            g.elevation.to_degrees(),
            g.slant_distance_km,
            dep.shadow_db[k],
            dep.betas[k]
        )
        .unwrap();
    }
    out
}

pub fn estimate_csv(rows: &[UtNmseRow]) -> String {
    let mut out = format!("{ESTIMATE_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{:.9e},{:.9e}", r.ut_index, r.estimator, r.nmse, r.analytic_nmse).unwrap();
    }
    out
}
