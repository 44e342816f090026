use super::*;
use crate::error::Error;
use crate::estimators::EstimatorKind;
use crate::pilots::GreedyOrder;

fn small() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    for (k, v) in [
        ("mx", "4"),
        ("my", "4"),
        ("num_uts", "8"),
        ("num_pilots", "4"),
        ("trials", "4"),
        ("p_dbw_max", "10"),
        ("p_dbw_step", "10"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg
}

#[test]
fn config_text_round_trip() {
    let mut cfg = small();
    cfg.set("mu_d", "1,2,4").unwrap();
    cfg.set("allocation", "random,greedy").unwrap();
    cfg.set("estimator", "mmse,low_snr_ref").unwrap();
    cfg.set("greedy_order", "beta").unwrap();
    cfg.set("shadow_sigma_db", "4.5").unwrap();
    let back = ScenarioConfig::parse(&cfg.to_text()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.greedy_order, GreedyOrder::DescendingBeta);
    assert_eq!(ScenarioConfig::parse("").unwrap(), ScenarioConfig::default());
}

#[test]
fn config_parse_comments_and_lists() {
    let text = "# desk run\n  mx = 6  # inline\n\nestimator = tsce , mmse\nnum_uts=10,20\nseed = 99\n";
    let cfg = ScenarioConfig::parse(text).unwrap();
    assert_eq!(cfg.mx, 6);
    assert_eq!(cfg.estimator, vec![EstimatorKind::Tsce, EstimatorKind::Mmse]);
    assert_eq!(cfg.num_uts, vec![10, 20]);
    assert_eq!(cfg.seed, 99);
}

#[test]
fn config_rejects_bad_input() {
    for text in [
        "bogus = 1",
        "mx = 4\nmx = 5",
        "mx",
        "mx = four",
        "estimator = kalman",
        "allocation = round_robin",
        "greedy_order = sideways",
        "trials = 0",
        "theta_max_deg = 95",
        "p_dbw_min = 10\np_dbw_max = 0",
        "mu_d = 0",
        "shadow_sigma_db = -1",
    ] {
        assert!(ScenarioConfig::parse(text).is_err(), "accepted {text:?}");
    }
    assert!(matches!(ScenarioConfig::parse("bogus = 1"), Err(Error::Config(_))));
}

#[test]
fn power_grid_is_inclusive() {
    assert_eq!(ScenarioConfig::default().p_grid(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    let mut cfg = ScenarioConfig::default();
    cfg.set("p_dbw_min", "7").unwrap();
    cfg.set("p_dbw_max", "7").unwrap();
    assert_eq!(cfg.p_grid(), vec![7.0]);
    cfg.set("p_dbw_max", "8").unwrap();
    cfg.set("p_dbw_step", "0.25").unwrap();
    assert_eq!(cfg.p_grid().len(), 5);
}

#[test]
fn full_scale_preset() {
    let cfg = ScenarioConfig::full_scale();
    assert_eq!((cfg.mx, cfg.my, cfg.num_uts.clone()), (12, 12, vec![500]));
    assert_eq!((cfg.nc, cfg.np, cfg.ng), (512, 128, 36));
    assert!(cfg.validate().is_ok());
}

#[test]
fn truth_pdp_aggregates_to_estimator_pdp() {
    let mut cfg = ScenarioConfig::default();
    cfg.set("mu_d", "1,2,3").unwrap();
    assert_eq!(truth_mu(&cfg), 12);
    let ofdm = cfg.ofdm().unwrap();
    let truth = grid_setup(&cfg, &ofdm, truth_mu(&cfg)).unwrap();
    for mu in [1, 2, 3] {
        let est = grid_setup(&cfg, &ofdm, mu).unwrap();
        let agg = truth.pdp.aggregate(truth_mu(&cfg) / mu).unwrap();
        for (a, b) in agg.gamma().iter().zip(est.pdp.gamma()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn deployment_is_seeded() {
    let cfg = small();
    let a = draw_deployment(&cfg, 8).unwrap();
    let b = draw_deployment(&cfg, 8).unwrap();
    assert_eq!(a.betas, b.betas);
    let prefix = draw_deployment(&cfg, 3).unwrap();
    assert_eq!(&a.betas[..3], &prefix.betas[..]);
    let mut other = small();
    other.seed = 2;
    assert_ne!(draw_deployment(&other, 8).unwrap().betas, a.betas);
    for g in &a.geometry {
        assert!(g.nadir <= cfg.theta_max() + 1e-12);
    }
}

#[test]
fn sweep_is_reproducible_and_sorted() {
    let mut cfg = small();
    cfg.set("allocation", "greedy,random").unwrap();
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(sweep_csv(&a), sweep_csv(&b));
    assert_eq!(a.len(), 2 * 2 * 2);
    let mut sorted = a.clone();
    sort_rows(&mut sorted);
    assert_eq!(sorted, a);
    for r in &a {
        assert!(r.nmse_avg.is_finite() && r.nmse_avg > 0.0 && r.nmse_avg < 1.5, "{r:?}");
        assert_eq!((r.wall_ms, r.trials, r.seed), (0.0, 4, 1));
    }
    // NMSE falls with transmit power
    let at = |p: f64| a.iter().find(|r| r.p_dbw == p && r.estimator == "mmse" && r.allocation == "greedy").unwrap();
    assert!(at(10.0).nmse_avg < at(0.0).nmse_avg);

    let timed = run_sweep_with(&cfg, SweepOptions { timing: true }).unwrap();
    assert!(timed.iter().all(|r| r.wall_ms > 0.0));
    for (x, y) in timed.iter().zip(&a) {
        assert_eq!(x.nmse_avg, y.nmse_avg);
    }
}

#[test]
fn failing_points_become_error_rows() {
    let mut cfg = small();
    cfg.set("num_uts", "2,8").unwrap();
    cfg.set("num_pilots", "4,40").unwrap();
    let rows = run_sweep(&cfg).unwrap();
    let find = |s: usize, k: usize| rows.iter().filter(move |r| r.s == s && r.k == k);
    assert!(find(4, 8).all(|r| r.nmse_avg.is_finite() && !r.estimator.contains('!')));
    assert!(find(4, 2).all(|r| r.nmse_avg.is_nan() && r.estimator.ends_with("!parameter")));
    assert!(find(40, 8).all(|r| r.nmse_avg.is_nan() && r.estimator.ends_with("!pilot_capacity")));
    let csv = sweep_csv(&rows);
    assert!(csv.lines().any(|l| l.contains("tsce!pilot_capacity") && l.contains("NaN")));
}

#[test]
fn sample_standard_deviation() {
    assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn trial_seeds_are_distinct() {
    let mut seen = std::collections::HashSet::new();
    for p in 0..5 {
        for t in 0..200 {
            assert!(seen.insert(trial_seed(1, t, p)));
        }
    }
    assert_ne!(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
}

#[test]
fn csv_writers() {
    let cfg = small();
    let rows = run_sweep(&cfg).unwrap();
    let csv = sweep_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SWEEP_HEADER));
    for l in lines {
        assert_eq!(l.split(',').count(), 11);
    }
    let gp = plot_script(&rows, "sweep.csv");
    assert!(gp.contains("sweep.csv") && gp.contains("tsce") && gp.contains("mmse"));

    let dir = tempfile::tempdir().unwrap();
    let (csv_path, gp_path) = write_sweep(dir.path(), &rows).unwrap();
    assert_eq!(std::fs::read_to_string(csv_path).unwrap(), csv);
    assert!(gp_path.exists());

    let dep = draw_deployment(&cfg, 8).unwrap();
    let text = scenario_csv(&dep);
    assert!(text.starts_with(SCENARIO_HEADER));
    assert_eq!(text.lines().count(), 9);
    let alloc = allocate(&cfg, AllocationKind::Greedy, 4, 8, &dep).unwrap();
    let text = allocation_csv(&alloc);
    assert!(text.starts_with(ALLOCATION_HEADER));
    assert_eq!(text.lines().count(), 9);
    let rows = complexity_table(64, 48, 14, 2, 36, 512, &[64, 128]);
    assert!(complexity_csv(&rows).starts_with(COMPLEXITY_HEADER));
}

#[test]
fn allocation_kinds() {
    let cfg = small();
    let dep = draw_deployment(&cfg, 8).unwrap();
    for kind in [AllocationKind::Greedy, AllocationKind::Random] {
        let a = allocate(&cfg, kind, 4, 8, &dep).unwrap();
        assert_eq!(a, allocate(&cfg, kind, 4, 8, &dep).unwrap());
        assert!(a.groups.iter().all(|g| !g.is_empty()));
    }
    assert!(matches!(allocate(&cfg, AllocationKind::Greedy, 9, 8, &dep), Err(Error::Parameter(_))));
    assert!(allocate(&cfg, AllocationKind::Random, 4, 9, &dep).is_err());
    assert_eq!("random".parse::<AllocationKind>().unwrap(), AllocationKind::Random);
    assert!("other".parse::<AllocationKind>().is_err());
}

#[test]
fn single_point_estimates() {
    let mut cfg = small();
    cfg.set("trials", "20").unwrap();
    let rows = estimate_point(&cfg, 10.0).unwrap();
    assert_eq!(rows.len(), 2 * 8);
    for r in &rows {
        assert!(r.nmse.is_finite() && r.nmse > 0.0);
        assert!(r.analytic_nmse > 0.0 && r.analytic_nmse <= 1.0);
    }
    let text = estimate_csv(&rows);
    assert!(text.starts_with(ESTIMATE_HEADER));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn mmse_nmse_falls_with_power() {
    let mut cfg = small();
    for (k, v) in [("estimator", "mmse"), ("trials", "500"), ("p_dbw_max", "20"), ("p_dbw_step", "2.5")] {
        cfg.set(k, v).unwrap();
    }
    let rows = run_sweep(&cfg).unwrap();
    let pairs = rows.windows(2).count();
    let falling = rows.windows(2).filter(|w| w[1].nmse_avg <= w[0].nmse_avg).count();
    assert!(falling as f64 >= 0.95 * pairs as f64, "{falling}/{pairs}");
}
