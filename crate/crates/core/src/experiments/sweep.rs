//! Seeded Monte-Carlo sweeps.
//!
//! Geometry, gains and allocations are drawn once per sweep. Each
//! `(p_index, trial)` pair then draws one set of path realizations and one
//! noise matrix, shared by every allocation, refining factor and estimator, so
//! curves are compared on identical channels.
//!
//! Ground truth is generated on a fine delay grid whose refining factor is a
//! common multiple of every swept `μ_d`, with an exponential PDP whose decay
//! is fixed in seconds. Aggregating that PDP onto any swept grid gives exactly
//! the estimator's PDP on that grid.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{AllocationKind, ScenarioConfig};
use super::metrics::nmse;
use crate::channel::{array_response, delay_grid, exp_pdp, sample_paths, true_dp, DelayGrid, OfdmGrid, Pdp};
use crate::dsp::{derive_seed, from_db, norm_sqr, C64};
use crate::error::{Error, Result};
use crate::estimators::{received_signal, sample_noise, EstimatorKind, EstimatorPlan, Scenario};
use crate::pilots::{
    build_pilot_set, greedy_allocate_with, random_allocate, weight_graph, zadoff_chu, Allocation, PilotSet,
};
use crate::satgeo::{large_scale_beta, noise_variance, sample_space_angle, ut_geometry, UtGeometry};

const STREAM_GEOMETRY: u64 = 1;
const STREAM_ALLOCATION: u64 = 2;
const STREAM_TRIAL: u64 = 3;

/// Seed of trial `trial` at transmit-power index `p_index`.
pub fn trial_seed(seed: u64, trial: usize, p_index: usize) -> u64 {
    derive_seed(derive_seed(seed, STREAM_TRIAL, p_index as u64), STREAM_TRIAL, trial as u64)
}

/// UT positions and large-scale parameters.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub geometry: Vec<UtGeometry>,
    pub shadow_db: Vec<f64>,
    pub betas: Vec<f64>,
    pub steering: Vec<Vec<C64>>,
}

pub fn draw_deployment(cfg: &ScenarioConfig, k: usize) -> Result<Deployment> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_GEOMETRY, 0));
    let orbit = cfg.orbit()?;
    let lb = cfg.link_budget();
    let array = cfg.array()?;
    let mut dep = Deployment { geometry: vec![], shadow_db: vec![], betas: vec![], steering: vec![] };
    for _ in 0..k {
        let xi = sample_space_angle(&mut rng, cfg.theta_max())?;
        let z: f64 = StandardNormal.sample(&mut rng);
        let geom = ut_geometry(xi, &orbit)?;
        let shadow = if cfg.shadow_sigma_db > 0.0 { cfg.shadow_sigma_db * z } else { 0.0 };
        dep.betas.push(large_scale_beta(&geom, &lb, shadow));
        dep.steering.push(array_response(&array, xi));
        dep.shadow_db.push(shadow);
        dep.geometry.push(geom);
    }
    Ok(dep)
}

pub fn allocate(
    cfg: &ScenarioConfig,
    kind: AllocationKind,
    s: usize,
    k: usize,
    dep: &Deployment,
) -> Result<Allocation> {
    if k < s {
        return Err(Error::Parameter(format!("{k} UTs cannot fill {s} pilots")));
    }
    if dep.betas.len() < k {
        return Err(Error::Dimension(format!("deployment has {} UTs, {k} requested", dep.betas.len())));
    }
    match kind {
        AllocationKind::Greedy => {
            let w = weight_graph(&dep.betas[..k], &dep.steering[..k])?;
            greedy_allocate_with(&w, s, cfg.greedy_order, &dep.betas[..k])
        }
        AllocationKind::Random => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_ALLOCATION, ((s as u64) << 32) | k as u64));
            random_allocate(&mut rng, k, s)
        }
    }
}

/// Estimation-grid objects for one refining factor.
#[derive(Debug, Clone)]
pub struct GridSetup {
    pub grid: DelayGrid,
    pub pdp: Pdp,
}

pub fn grid_setup(cfg: &ScenarioConfig, ofdm: &OfdmGrid, mu_d: usize) -> Result<GridSetup> {
    let grid = delay_grid(ofdm, mu_d)?;
    let pdp = exp_pdp(grid.nd, cfg.pdp_decay_taps * mu_d as f64)?;
    Ok(GridSetup { grid, pdp })
}

fn lcm(a: usize, b: usize) -> usize {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

/// Refining factor of the ground-truth grid.
pub fn truth_mu(cfg: &ScenarioConfig) -> usize {
    cfg.mu_d.iter().fold(4, |acc, &m| lcm(acc, m))
}

/// Per-trial channel draw: frequency responses for every deployed UT and one noise matrix.
#[derive(Debug, Clone)]
pub struct Realization {
    pub d_true: Vec<Vec<C64>>,
    pub noise: DMatrix<C64>,
}

pub fn draw_realization(
    cfg: &ScenarioConfig,
    truth: &GridSetup,
    ofdm: &OfdmGrid,
    betas: &[f64],
    m: usize,
    sigma2: f64,
    seed: u64,
) -> Result<Realization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d_true = Vec::with_capacity(betas.len());
    for &beta in betas {
        let paths = sample_paths(&mut rng, &truth.pdp, &truth.grid, beta, cfg.q_per_tap)?;
        d_true.push(true_dp(&paths, ofdm));
    }
    let noise = sample_noise(&mut rng, m, ofdm.np, sigma2);
    Ok(Realization { d_true, noise })
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p_dbw: f64,
    /// Estimator name, suffixed with `!<error>` when the point failed.
    pub estimator: String,
    pub allocation: String,
    pub mu_d: usize,
    pub s: usize,
    pub k: usize,
    pub nmse_avg: f64,
    pub nmse_std: f64,
    pub trials: usize,
    pub seed: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Record wall-clock time per row; off by default so CSVs are reproducible byte for byte.
    pub timing: bool,
}

/// A `(allocation, μ_d, S, K)` combination.
struct Layout {
    allocation: AllocationKind,
    mu_d: usize,
    s: usize,
    k: usize,
    setup: Result<(GridSetup, PilotSet, Allocation)>,
}

fn build_layouts(cfg: &ScenarioConfig, ofdm: &OfdmGrid, dep: &Deployment) -> Result<Vec<Layout>> {
    let base = zadoff_chu(cfg.np, cfg.zc_root)?;
    let mut layouts = Vec::new();
    for &allocation in &cfg.allocation {
        for &mu_d in &cfg.mu_d {
            for &s in &cfg.num_pilots {
                for &k in &cfg.num_uts {
                    let setup = grid_setup(cfg, ofdm, mu_d).and_then(|gs| {
                        let pilots = build_pilot_set(&gs.grid, s, base.clone())?;
                        let alloc = allocate(cfg, allocation, s, k, dep)?;
                        Ok((gs, pilots, alloc))
                    });
                    layouts.push(Layout { allocation, mu_d, s, k, setup });
                }
            }
        }
    }
    Ok(layouts)
}

fn scenario_for(
    ofdm: &OfdmGrid,
    dep: &Deployment,
    k: usize,
    setup: &(GridSetup, PilotSet, Allocation),
    p_tx: f64,
) -> Result<Scenario> {
    let (gs, pilots, alloc) = setup;
    Scenario::new(
        *ofdm,
        gs.grid.clone(),
        pilots.clone(),
        alloc.clone(),
        dep.steering[..k].to_vec(),
        dep.betas[..k].to_vec(),
        gs.pdp.clone(),
        p_tx,
    )
}

#[derive(Clone, Copy)]
struct Outcome {
    value: std::result::Result<f64, &'static str>,
    ms: f64,
}

struct Job<'a> {
    layout: &'a Layout,
    sc: Scenario,
    plans: Vec<(EstimatorKind, std::result::Result<EstimatorPlan, &'static str>, f64)>,
}

fn elapsed_ms(start: Option<Instant>) -> f64 {
    start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
}

fn row(cfg: &ScenarioConfig, p_dbw: f64, est: EstimatorKind, l: &Layout) -> SweepRow {
    SweepRow {
        p_dbw,
        estimator: est.as_str().to_string(),
        allocation: l.allocation.as_str().to_string(),
        mu_d: l.mu_d,
        s: l.s,
        k: l.k,
        nmse_avg: f64::NAN,
        nmse_std: f64::NAN,
        trials: cfg.trials,
        seed: cfg.seed,
        wall_ms: 0.0,
    }
}

fn failed(mut r: SweepRow, tag: &str) -> SweepRow {
    r.estimator = format!("{}!{tag}", r.estimator);
    r
}

pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(cfg, SweepOptions::default())
}

pub fn run_sweep_with(cfg: &ScenarioConfig, opts: SweepOptions) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let ofdm = cfg.ofdm()?;
    let sigma2 = noise_variance(&cfg.link_budget());
    let k_max = *cfg.num_uts.iter().max().expect("validated non-empty");
    let dep = draw_deployment(cfg, k_max)?;
    let truth = grid_setup(cfg, &ofdm, truth_mu(cfg))?;
    let m = cfg.array()?.m();
    let layouts = build_layouts(cfg, &ofdm, &dep)?;
    let clock = || opts.timing.then(Instant::now);

    let mut rows = Vec::new();
    for (pi, &p_dbw) in cfg.p_grid().iter().enumerate() {
        let p_tx = from_db(p_dbw);
        let mut jobs = Vec::new();
        for l in &layouts {
            let sc = l
                .setup
                .as_ref()
                .map_err(|e| e.tag())
                .and_then(|setup| scenario_for(&ofdm, &dep, l.k, setup, p_tx).map_err(|e| e.tag()));
            let sc = match sc {
                Ok(sc) => sc,
                Err(tag) => {
                    rows.extend(cfg.estimator.iter().map(|&est| failed(row(cfg, p_dbw, est, l), tag)));
                    continue;
                }
            };
            let plans = cfg
                .estimator
                .iter()
                .map(|&est| {
                    let t = clock();
                    let plan = EstimatorPlan::new(est, &sc, sigma2).map_err(|e| e.tag());
                    (est, plan, elapsed_ms(t))
                })
                .collect();
            jobs.push(Job { layout: l, sc, plans });
        }

        let per_trial: Vec<Vec<Vec<Outcome>>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let real = draw_realization(cfg, &truth, &ofdm, &dep.betas, m, sigma2, trial_seed(cfg.seed, trial, pi));
                jobs.iter()
                    .map(|job| {
                        let k = job.layout.k;
                        let rx = real.as_ref().map_err(|e| e.tag()).and_then(|real| {
                            received_signal(
                                &job.sc.steering,
                                &real.d_true[..k],
                                &job.sc.pilots,
                                &job.sc.alloc,
                                &ofdm,
                                p_tx,
                                &real.noise,
                            )
                            .map_err(|e| e.tag())
                        });
                        job.plans
                            .iter()
                            .map(|(_, plan, _)| {
                                let t = clock();
                                let value = match (plan, &rx, &real) {
                                    (Ok(plan), Ok(rx), Ok(real)) => plan
                                        .estimate(&job.sc, rx)
                                        .and_then(|rep| nmse(&real.d_true[..k], &rep.d_p_hat))
                                        .map_err(|e| e.tag()),
                                    (Err(tag), _, _) => Err(*tag),
                                    (_, Err(tag), _) => Err(*tag),
                                    (_, _, Err(e)) => Err(e.tag()),
                                };
                                Outcome { value, ms: elapsed_ms(t) }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        for (j, job) in jobs.iter().enumerate() {
            for (e, (est, _, plan_ms)) in job.plans.iter().enumerate() {
                let outcomes: Vec<Outcome> = per_trial.iter().map(|t| t[j][e]).collect();
                let mut r = row(cfg, p_dbw, *est, job.layout);
                if opts.timing {
                    r.wall_ms = plan_ms + outcomes.iter().map(|o| o.ms).sum::<f64>();
                }
                if let Some(tag) = outcomes.iter().find_map(|o| o.value.err()) {
                    rows.push(failed(r, tag));
                    continue;
                }
                let values: Vec<f64> = outcomes.iter().map(|o| o.value.unwrap_or(f64::NAN)).collect();
                let (avg, std) = mean_std(&values);
                r.nmse_avg = avg;
                r.nmse_std = std;
                rows.push(r);
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.p_dbw
            .total_cmp(&b.p_dbw)
            .then_with(|| a.estimator.cmp(&b.estimator))
            .then_with(|| a.allocation.cmp(&b.allocation))
            .then_with(|| a.mu_d.cmp(&b.mu_d))
            .then_with(|| a.s.cmp(&b.s))
            .then_with(|| a.k.cmp(&b.k))
    });
}

/// Per-UT result of a single-point run.
#[derive(Debug, Clone, PartialEq)]
pub struct UtNmseRow {
    pub ut_index: usize,
    pub estimator: String,
    /// Trial-averaged `‖d_k − d̂_k‖²/‖d_k‖²`.
    pub nmse: f64,
    /// Analytic MSE of the ADC normalized by `β_k`, where the estimator has one.
    pub analytic_nmse: f64,
}

/// Runs every configured estimator at one transmit power, using the first
/// allocation, refining factor, pilot count and UT count of the config.
pub fn estimate_point(cfg: &ScenarioConfig, p_dbw: f64) -> Result<Vec<UtNmseRow>> {
    cfg.validate()?;
    let ofdm = cfg.ofdm()?;
    let sigma2 = noise_variance(&cfg.link_budget());
    let (k, s, mu_d) = (cfg.num_uts[0], cfg.num_pilots[0], cfg.mu_d[0]);
    let dep = draw_deployment(cfg, k)?;
    let truth = grid_setup(cfg, &ofdm, truth_mu(cfg))?;
    let gs = grid_setup(cfg, &ofdm, mu_d)?;
    let pilots = build_pilot_set(&gs.grid, s, zadoff_chu(cfg.np, cfg.zc_root)?)?;
    let alloc = allocate(cfg, cfg.allocation[0], s, k, &dep)?;
    let p_tx = from_db(p_dbw);
    let sc = scenario_for(&ofdm, &dep, k, &(gs, pilots, alloc), p_tx)?;
    let m = sc.num_antennas();

    let mut out = Vec::new();
    for &est in &cfg.estimator {
        let plan = EstimatorPlan::new(est, &sc, sigma2)?;
        let analytic: Vec<f64> = match &plan {
            EstimatorPlan::Mmse(p) => p.analytic_j(),
            EstimatorPlan::Tsce(p) => (0..k).map(|u| p.analytic_j(&sc, u).map(|j| j.0)).collect::<Result<_>>()?,
            _ => vec![f64::NAN; k],
        };
        let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let real = draw_realization(cfg, &truth, &ofdm, &dep.betas, m, sigma2, trial_seed(cfg.seed, trial, 0))?;
                let rx = received_signal(&sc.steering, &real.d_true, &sc.pilots, &sc.alloc, &ofdm, p_tx, &real.noise)?;
                let rep = plan.estimate(&sc, &rx)?;
                Ok(real
                    .d_true
                    .iter()
                    .zip(&rep.d_p_hat)
                    .map(|(d, e)| {
                        let err: f64 = d.iter().zip(e).map(|(a, b)| (a - b).norm_sqr()).sum();
                        err / norm_sqr(d)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for u in 0..k {
            let avg = per_trial.iter().map(|t| t[u]).sum::<f64>() / cfg.trials as f64;
            out.push(UtNmseRow {
                ut_index: u,
                estimator: est.as_str().to_string(),
                nmse: avg,
                analytic_nmse: analytic[u] / sc.betas[u],
            });
        }
    }
    Ok(out)
}
