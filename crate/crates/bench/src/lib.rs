//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsce_core::channel::{complex_gaussian, reconstruct_dp};
use tsce_core::estimators::{received_signal, sample_noise};
use tsce_core::pilots::{build_pilot_set, zadoff_chu};
use tsce_core::toeplitz::toeplitz_from_spectrum;
use tsce_core::*;

/// Hermitian positive-definite Toeplitz system of order `n` and a right-hand side.
pub fn toeplitz_system(n: usize, seed: u64) -> (HermitianToeplitz, Vec<C64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda: Vec<f64> = (0..2 * n).map(|_| 0.1 + rng.random::<f64>()).collect();
    let t = toeplitz_from_spectrum(&lambda, n).expect("spectrum bounded below");
    let b = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    (t, b)
}

/// Estimation problem on a `side×side` array with the nominal 512/128/36 OFDM numerology.
pub struct Problem {
    pub scenario: Scenario,
    pub rx: RxPilotSignal,
    pub sigma2: f64,
}

pub fn problem(side: usize, k: usize, s: usize, mu_d: usize, seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ofdm = OfdmGrid::new(512, 128, 0, 36, 60e3).expect("valid grid");
    let grid = delay_grid(&ofdm, mu_d).expect("valid refinement");
    let pilots = build_pilot_set(&grid, s, zadoff_chu(128, 1).expect("coprime root")).expect("pilot capacity");
    let alloc = Allocation::from_labels((0..k).map(|i| i % s).collect(), s).expect("valid labels");
    let geom = ArrayGeometry::new(side, side, 1.0, 1.0).expect("valid array");
    let steering = (0..k)
        .map(|_| array_response(&geom, SpaceAngle::new(rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35))))
        .collect();
    let betas = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
    let pdp = exp_pdp(grid.nd, 2.0 * mu_d as f64).expect("valid decay");
    let sc = Scenario::new(ofdm, grid, pilots, alloc, steering, betas, pdp, 10.0).expect("consistent scenario");

    let sigma2 = 1.0;
    let d_p: Vec<Vec<C64>> = sc
        .omegas
        .iter()
        .map(|om| {
            let d_t: Vec<C64> = om.iter().map(|w| complex_gaussian(&mut rng, *w)).collect();
            reconstruct_dp(&sc.grid, &sc.ofdm, &d_t)
        })
        .collect();
    let noise = sample_noise(&mut rng, sc.num_antennas(), sc.ofdm.np, sigma2);
    let rx = received_signal(&sc.steering, &d_p, &sc.pilots, &sc.alloc, &sc.ofdm, sc.p_tx, &noise)
        .expect("matching dimensions");
    Problem { scenario: sc, rx, sigma2 }
}
