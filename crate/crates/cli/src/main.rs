use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tsce_core::experiments::{
    allocate, allocation_csv, complexity_csv, complexity_table, draw_deployment, estimate_csv, estimate_point,
    run_sweep_with, scenario_csv, write_sweep, ScenarioConfig, SweepOptions,
};
use tsce_core::pilots::{cut_value, weight_graph};
use tsce_core::satgeo::noise_variance;

/// LEO-satellite massive MIMO channel estimation simulator.
#[derive(Parser)]
#[command(name = "tsce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw UT positions and large-scale gains, write scenario.csv.
    Scenario(Common),
    /// Assign pilots, write allocation.csv.
    Allocate(Common),
    /// Run every estimator at one transmit power, write estimate.csv.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Transmit power per UT in dBW (defaults to p_dbw_min).
        #[arg(long)]
        p_dbw: Option<f64>,
    },
    /// Monte-Carlo NMSE sweep over transmit power, write sweep.csv and sweep.gp.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Fill the wall_ms column (makes the CSV non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Flop counts of MMSE and TSCE over N_p, write complexity.csv.
    Complexity {
        #[command(flatten)]
        common: Common,
        /// Pilot subcarrier counts to tabulate.
        #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128, 256, 512, 1024])]
        np: Vec<usize>,
    },
    /// Print the effective configuration.
    Config(Common),
}

#[derive(Args)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the full-size parameter set (12×12 array, 500 UTs).
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated estimators: mmse, tsce, low_snr_ref, high_snr_ref.
    #[arg(long)]
    estimator: Option<String>,
    /// Comma-separated allocations: greedy, random.
    #[arg(long)]
    allocation: Option<String>,
    /// Comma-separated delay refining factors.
    #[arg(long)]
    mu_d: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, self.full_scale) {
            (Some(_), true) => bail!("--config and --full-scale are mutually exclusive"),
            (Some(path), false) => {
                ScenarioConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, true) => ScenarioConfig::full_scale(),
            (None, false) => ScenarioConfig::default(),
        };
        let seed = self.seed.map(|s| s.to_string());
        let trials = self.trials.map(|t| t.to_string());
        let flags = [
            ("seed", seed.as_deref()),
            ("estimator", self.estimator.as_deref()),
            ("allocation", self.allocation.as_deref()),
            ("mu_d", self.mu_d.as_deref()),
            ("trials", trials.as_deref()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.overrides {
            let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got '{kv}'"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scenario(common) => {
            let cfg = common.load()?;
            let k = *cfg.num_uts.iter().max().unwrap();
            let dep = draw_deployment(&cfg, k)?;
            let path = write(&common.out, "scenario.csv", &scenario_csv(&dep))?;
            let (lo, hi) = dep.betas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
            println!("{k} UTs, beta {lo:.3e}..{hi:.3e}, sigma2 {:.3e}", noise_variance(&cfg.link_budget()));
            println!("wrote {}", path.display());
        }
        Command::Allocate(common) => {
            let cfg = common.load()?;
            let (k, s, kind) = (cfg.num_uts[0], cfg.num_pilots[0], cfg.allocation[0]);
            let dep = draw_deployment(&cfg, k)?;
            let alloc = allocate(&cfg, kind, s, k, &dep)?;
            let w = weight_graph(&dep.betas, &dep.steering)?;
            let path = write(&common.out, "allocation.csv", &allocation_csv(&alloc))?;
            println!("{kind}: {k} UTs on {s} pilots, cut {:.6e} of {:.6e}", cut_value(&w, &alloc), w.total());
            println!("wrote {}", path.display());
        }
        Command::Estimate { common, p_dbw } => {
            let cfg = common.load()?;
            let p = p_dbw.unwrap_or(cfg.p_dbw_min);
            let rows = estimate_point(&cfg, p)?;
            for est in &cfg.estimator {
                let mine: Vec<_> = rows.iter().filter(|r| r.estimator == est.as_str()).collect();
                let avg = mine.iter().map(|r| r.nmse).sum::<f64>() / mine.len() as f64;
                println!("{est}: mean per-UT NMSE {:.3} dB at {p} dBW", db(avg));
            }
            let path = write(&common.out, "estimate.csv", &estimate_csv(&rows))?;
            println!("wrote {}", path.display());
        }
        Command::Sweep { common, timing } => {
            let cfg = common.load()?;
            let rows = run_sweep_with(&cfg, SweepOptions { timing })?;
            for r in &rows {
                println!(
                    "{:>6} dBW  {:<12} {:<7} mu_d={} S={} K={}  {:>8.3} dB",
                    r.p_dbw,
                    r.estimator,
                    r.allocation,
                    r.mu_d,
                    r.s,
                    r.k,
                    db(r.nmse_avg)
                );
            }
            let (csv, plot) = write_sweep(&common.out, &rows)?;
            println!("wrote {} and {}", csv.display(), plot.display());
        }
        Command::Complexity { common, np } => {
            let cfg = common.load()?;
            let m = cfg.mx * cfg.my;
            let rows = complexity_table(m, cfg.num_uts[0], cfg.num_pilots[0], cfg.mu_d[0], cfg.ng, cfg.nc, &np);
            for r in &rows {
                println!("N_p={:<5} mmse {:.3e}  tsce {:.3e}  ratio {:.1}", r.np, r.mmse_flops, r.tsce_flops, r.ratio);
            }
            let path = write(&common.out, "complexity.csv", &complexity_csv(&rows))?;
            println!("wrote {}", path.display());
        }
        Command::Config(common) => print!("{}", common.load()?.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
