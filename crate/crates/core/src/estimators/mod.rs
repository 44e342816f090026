//! Received-pilot synthesis and the channel estimators.
//!
//! The received pilot matrix is stored with the base pilot removed, so column
//! `n` of [`RxPilotSignal::derotated`] is
//! `Σ_k √(P/N_p)·g_k·Σ_ℓ α_{k,ℓ}·exp(−j2π(r_p+n)(φ_{s_k}+ℓ)/N_pe) + noise`.
//! Every estimator is a linear map of that matrix.

mod mmse;
mod reference;
mod tsce;

pub use mmse::{asymptotic_j, gram_matrix, matched_filter, mmse_estimate, MmsePlan};
pub use reference::{reference_high_snr, reference_low_snr, HighSnrPlan};
pub use tsce::{space_combiner, tsce_analytic_j, tsce_estimate, CombinerSolution, TscePlan, TsceState};

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::channel::{build_rt, complex_gaussian, reconstruct_dp, DelayGrid, OfdmGrid, Pdp, UtChannel};
use crate::dsp::{ifft_in_place, C64};
use crate::error::{Error, Result};
use crate::pilots::{Allocation, PilotSet};

/// `F_N(x) = |sin(πx)/sin(πx/N)|`, equal to `N` at multiples of `N` and 0 at other integers.
pub fn dirichlet_kernel(x: f64, np: usize) -> f64 {
    let n = np as f64;
    let r = x.rem_euclid(n);
    if r.min(n - r) < 1e-12 * n.max(1.0) {
        return n;
    }
    if (x - x.round()).abs() < 1e-12 {
        return 0.0;
    }
    let pi = std::f64::consts::PI;
    ((pi * x).sin() / (pi * x / n).sin()).abs()
}

/// Statistical description shared by all estimators at one operating point.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub ofdm: OfdmGrid,
    pub grid: DelayGrid,
    pub pilots: PilotSet,
    pub alloc: Allocation,
    pub steering: Vec<Vec<C64>>,
    pub betas: Vec<f64>,
    /// Common PDP on the estimation grid.
    pub pdp: Pdp,
    /// Per-UT `R_{t,k}` diagonals; `β_k·γ` unless overridden.
    pub omegas: Vec<Vec<f64>>,
    pub p_tx: f64,
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ofdm: OfdmGrid,
        grid: DelayGrid,
        pilots: PilotSet,
        alloc: Allocation,
        steering: Vec<Vec<C64>>,
        betas: Vec<f64>,
        pdp: Pdp,
        p_tx: f64,
    ) -> Result<Self> {
        let k = steering.len();
        if k == 0 {
            return Err(Error::Dimension("scenario without UTs".into()));
        }
        let m = steering[0].len();
        if m == 0 || steering.iter().any(|g| g.len() != m) {
            return Err(Error::Dimension("steering vectors must share a nonzero length".into()));
        }
        if betas.len() != k || alloc.num_uts() != k {
            return Err(Error::Dimension(format!(
                "{k} steering vectors, {} gains, {} allocated UTs",
                betas.len(),
                alloc.num_uts()
            )));
        }
        if betas.iter().any(|b| !(*b > 0.0)) || !(p_tx > 0.0) {
            return Err(Error::Parameter("large-scale gains and transmit power must be positive".into()));
        }
        if pdp.len() != grid.nd || pilots.npe != grid.npe || pilots.nd != grid.nd || pilots.base.len() != ofdm.np {
            return Err(Error::Dimension("PDP, pilot set and grids disagree".into()));
        }
        if grid.npe != ofdm.np * grid.mu_d {
            return Err(Error::Dimension("delay grid was built for a different OFDM grid".into()));
        }
        if alloc.num_pilots() > pilots.len() {
            return Err(Error::PilotCapacity { requested: alloc.num_pilots(), max: pilots.len() });
        }
        let mut phases: Vec<usize> = pilots.phases[..alloc.num_pilots()].to_vec();
        phases.sort_unstable();
        let overlap = phases.windows(2).any(|w| w[1] - w[0] < grid.nd)
            || phases.last().is_some_and(|&p| p + grid.nd > grid.npe + phases[0]);
        if overlap {
            return Err(Error::Config("pilot tap windows overlap".into()));
        }
        let omegas = betas.iter().map(|b| build_rt(*b, &pdp)).collect();
        Ok(Self { ofdm, grid, pilots, alloc, steering, betas, pdp, omegas, p_tx })
    }

    /// Replaces the per-UT correlation diagonals (e.g. with true per-UT PDPs).
    pub fn with_omegas(mut self, omegas: Vec<Vec<f64>>) -> Result<Self> {
        if omegas.len() != self.num_uts() || omegas.iter().any(|o| o.len() != self.grid.nd) {
            return Err(Error::Dimension("per-UT correlation has the wrong shape".into()));
        }
        if omegas.iter().flatten().any(|w| !(*w >= 0.0)) {
            return Err(Error::Parameter("correlation diagonals must be nonnegative".into()));
        }
        self.omegas = omegas;
        Ok(self)
    }

    pub fn with_power(&self, p_tx: f64) -> Self {
        Self { p_tx, ..self.clone() }
    }

    pub fn num_uts(&self) -> usize {
        self.steering.len()
    }

    pub fn num_antennas(&self) -> usize {
        self.steering[0].len()
    }

    /// First tap of UT `k`'s window on the extended grid, `φ_{s_k}`.
    pub fn tap_offset(&self, k: usize) -> usize {
        self.pilots.phases[self.alloc.pilot_of[k]]
    }

    pub fn total_power(&self) -> f64 {
        self.omegas.iter().flatten().sum()
    }
}

/// Received pilot OFDM symbol, `M × N_p`.
#[derive(Debug, Clone)]
pub struct RxPilotSignal {
    pub y: DMatrix<C64>,
    pub derotated: DMatrix<C64>,
}

impl RxPilotSignal {
    pub fn from_received(y: DMatrix<C64>, base: &[C64]) -> Result<Self> {
        if y.ncols() != base.len() {
            return Err(Error::Dimension(format!("{} subcarriers vs base pilot length {}", y.ncols(), base.len())));
        }
        let mut derotated = y.clone();
        for (n, x) in base.iter().enumerate() {
            let c = x.conj();
            derotated.column_mut(n).iter_mut().for_each(|v| *v *= c);
        }
        Ok(Self { y, derotated })
    }
}

/// i.i.d. `CN(0, σ²)` noise matrix.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R, m: usize, np: usize, sigma2: f64) -> DMatrix<C64> {
    let mut z = DMatrix::zeros(m, np);
    for n in 0..np {
        for a in 0..m {
            z[(a, n)] = complex_gaussian(rng, sigma2);
        }
    }
    z
}

/// Noise-free pilot matrix plus `noise` for arbitrary per-UT frequency responses.
pub fn received_signal(
    steering: &[Vec<C64>],
    d_p: &[Vec<C64>],
    pilots: &PilotSet,
    alloc: &Allocation,
    ofdm: &OfdmGrid,
    p_tx: f64,
    noise: &DMatrix<C64>,
) -> Result<RxPilotSignal> {
    let (m, np) = (noise.nrows(), ofdm.np);
    if noise.ncols() != np || steering.len() != d_p.len() || alloc.num_uts() != steering.len() {
        return Err(Error::Dimension("received-signal inputs disagree".into()));
    }
    if steering.iter().any(|g| g.len() != m) || d_p.iter().any(|d| d.len() != np) || pilots.base.len() != np {
        return Err(Error::Dimension("steering or frequency-response length mismatch".into()));
    }
    let amp = (p_tx / np as f64).sqrt();
    let mut y = noise.clone();
    for n in 0..np {
        let r = ofdm.rp + n;
        for (k, (g, d)) in steering.iter().zip(d_p).enumerate() {
            let c = amp * d[n] * pilots.symbol(alloc.pilot_of[k], r, n);
            for a in 0..m {
                y[(a, n)] += g[a] * c;
            }
        }
    }
    RxPilotSignal::from_received(y, &pilots.base)
}

pub fn synthesize_rx<R: Rng + ?Sized>(
    channels: &[UtChannel],
    pilots: &PilotSet,
    alloc: &Allocation,
    ofdm: &OfdmGrid,
    p_tx: f64,
    sigma2: f64,
    rng: &mut R,
) -> Result<RxPilotSignal> {
    if channels.is_empty() {
        return Err(Error::Dimension("no channels".into()));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Parameter("noise variance must be nonnegative".into()));
    }
    let noise = sample_noise(rng, channels[0].g.len(), ofdm.np, sigma2);
    let steering: Vec<Vec<C64>> = channels.iter().map(|c| c.g.clone()).collect();
    let d_p: Vec<Vec<C64>> = channels.iter().map(|c| c.d_true.clone()).collect();
    received_signal(&steering, &d_p, pilots, alloc, ofdm, p_tx, &noise)
}

/// Per-subcarrier space combining: `y_w[n] = wᴴ·derotated[:, n]`.
pub fn combine(rx: &RxPilotSignal, w: &[C64]) -> Vec<C64> {
    rx.derotated.column_iter().map(|col| col.iter().zip(w).map(|(y, wm)| wm.conj() * y).sum()).collect()
}

/// `F_peᴴ z` over the whole extended grid, via one inverse FFT.
pub fn adjoint_pe(z: &[C64], rp: usize, npe: usize) -> Vec<C64> {
    let mut buf = padded_ifft(z, rp, npe);
    let scale = npe as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// `N_pe`-point inverse FFT (with `1/N_pe`) of `z` placed at positions `r_p..r_p+N_p`.
pub fn padded_ifft(z: &[C64], rp: usize, npe: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); npe];
    for (n, v) in z.iter().enumerate() {
        buf[(rp + n) % npe] += v;
    }
    ifft_in_place(&mut buf);
    buf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Mmse,
    Tsce,
    LowSnrRef,
    HighSnrRef,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [Self::Mmse, Self::Tsce, Self::LowSnrRef, Self::HighSnrRef];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mmse => "mmse",
            Self::Tsce => "tsce",
            Self::LowSnrRef => "low_snr_ref",
            Self::HighSnrRef => "high_snr_ref",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown estimator '{s}'")))
    }
}

/// Estimator outputs for every UT.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimator_tag: String,
    pub d_t_hat: Vec<Vec<C64>>,
    pub d_p_hat: Vec<Vec<C64>>,
    /// Analytic per-UT MSE of `d_t`, when the estimator provides one.
    pub per_ut_mse: Option<Vec<f64>>,
}

impl EstimateReport {
    pub fn from_adc(tag: &str, sc: &Scenario, d_t_hat: Vec<Vec<C64>>) -> Self {
        let d_p_hat = d_t_hat.iter().map(|d| reconstruct_dp(&sc.grid, &sc.ofdm, d)).collect();
        Self { estimator_tag: tag.to_string(), d_t_hat, d_p_hat, per_ut_mse: None }
    }
}

/// Statistics-dependent part of an estimator, built once per operating point.
#[derive(Debug, Clone)]
pub enum EstimatorPlan {
    Mmse(MmsePlan),
    Tsce(TscePlan),
    LowSnr { sigma2: f64 },
    HighSnr(HighSnrPlan),
}

impl EstimatorPlan {
    pub fn new(kind: EstimatorKind, sc: &Scenario, sigma2: f64) -> Result<Self> {
        Ok(match kind {
            EstimatorKind::Mmse => Self::Mmse(MmsePlan::new(sc, sigma2)?),
            EstimatorKind::Tsce => Self::Tsce(TscePlan::new(sc, sigma2)?),
            EstimatorKind::LowSnrRef => {
                if !(sigma2 > 0.0) {
                    return Err(Error::Parameter("noise variance must be positive".into()));
                }
                Self::LowSnr { sigma2 }
            }
            EstimatorKind::HighSnrRef => Self::HighSnr(HighSnrPlan::new(sc)?),
        })
    }

    pub fn estimate(&self, sc: &Scenario, rx: &RxPilotSignal) -> Result<EstimateReport> {
        match self {
            Self::Mmse(p) => p.estimate(sc, rx),
            Self::Tsce(p) => p.estimate(sc, rx),
            Self::LowSnr { sigma2 } => reference_low_snr(rx, sc, *sigma2),
            Self::HighSnr(p) => p.estimate(sc, rx),
        }
    }
}
