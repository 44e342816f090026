//! Ground-truth channel synthesis and the angle-delay representation.
//!
//! A UT's space-frequency channel over the pilot subcarriers is rank one,
//! `g · d_pᵀ`, where `g` is the UPA steering vector and `d_p` the frequency
//! response. On the refined delay grid, `d_p ≈ F_NpNd · d_t` with `d_t` the
//! per-tap gains (the angle-delay channel).

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{cis_neg, fft_in_place, C64};
use crate::error::{Error, Result};
use crate::satgeo::SpaceAngle;

/// Taps whose power is below this fraction of the strongest tap carry no paths.
pub const TAP_ACTIVITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub mx: usize,
    pub my: usize,
    /// Element spacing along x, in wavelengths.
    pub dx_wl: f64,
    pub dy_wl: f64,
}

impl ArrayGeometry {
    pub fn new(mx: usize, my: usize, dx_wl: f64, dy_wl: f64) -> Result<Self> {
        if mx == 0 || my == 0 {
            return Err(Error::Parameter(format!("array needs at least one element per axis ({mx}x{my})")));
        }
        Ok(Self { mx, my, dx_wl, dy_wl })
    }

    pub fn m(&self) -> usize {
        self.mx * self.my
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmGrid {
    pub nc: usize,
    pub np: usize,
    pub rp: usize,
    pub ng: usize,
    /// Subcarrier spacing, Hz.
    pub delta_f: f64,
}

impl OfdmGrid {
    pub fn new(nc: usize, np: usize, rp: usize, ng: usize, delta_f: f64) -> Result<Self> {
        if np == 0 || rp + np > nc || ng == 0 || ng >= nc || !(delta_f > 0.0) {
            return Err(Error::Parameter(format!(
                "invalid OFDM grid: nc={nc} np={np} rp={rp} ng={ng} delta_f={delta_f}"
            )));
        }
        Ok(Self { nc, np, rp, ng, delta_f })
    }

    pub fn ts(&self) -> f64 {
        1.0 / (self.nc as f64 * self.delta_f)
    }

    pub fn tg(&self) -> f64 {
        self.ng as f64 * self.ts()
    }
}

/// Refined delay grid covering the CP window.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGrid {
    pub mu_d: usize,
    pub ld: usize,
    pub nd: usize,
    pub npe: usize,
    pub delta_f: f64,
    pub tg: f64,
    /// Grid delays `τ_ℓ = ℓ/(N_pe·Δf)`, `ℓ = 0..N_d`.
    pub tau: Vec<f64>,
}

impl DelayGrid {
    /// Upper edge of interval `ℓ`; the last interval ends at the CP duration.
    pub fn interval_end(&self, tap: usize) -> f64 {
        if tap + 1 >= self.nd {
            self.tg
        } else {
            self.tau[tap + 1].min(self.tg)
        }
    }

    /// Index of the interval `[τ_ℓ, τ_{ℓ+1})` holding `delay`, if it is inside the CP.
    pub fn tap_of(&self, delay: f64) -> Option<usize> {
        if !(0.0..self.tg).contains(&delay) {
            return None;
        }
        // grid points computed as ℓ/(N_pe Δf) may come back as ℓ − ε
        let x = delay * self.npe as f64 * self.delta_f;
        let tap = (x + 1e-9).floor() as usize;
        Some(tap.min(self.nd - 1))
    }
}

pub fn delay_grid(ofdm: &OfdmGrid, mu_d: usize) -> Result<DelayGrid> {
    if mu_d == 0 {
        return Err(Error::Parameter("refining factor must be >= 1".into()));
    }
    let ld = (ofdm.np * ofdm.ng).div_ceil(ofdm.nc);
    let nd = mu_d * ld;
    let npe = ofdm.np * mu_d;
    let step = 1.0 / (npe as f64 * ofdm.delta_f);
    let tau = (0..nd).map(|l| l as f64 * step).collect();
    Ok(DelayGrid { mu_d, ld, nd, npe, delta_f: ofdm.delta_f, tg: ofdm.tg(), tau })
}

/// Power delay profile: nonnegative tap powers summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Pdp {
    gamma: Vec<f64>,
}

impl Pdp {
    pub fn new(mut gamma: Vec<f64>) -> Result<Self> {
        if gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::Parameter("PDP taps must be finite and nonnegative".into()));
        }
        let total: f64 = gamma.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Parameter("PDP has no power".into()));
        }
        gamma.iter_mut().for_each(|g| *g /= total);
        Ok(Self { gamma })
    }

    /// Equal power on the first `active` taps, zero elsewhere.
    pub fn uniform(nd: usize, active: usize) -> Result<Self> {
        Self::new((0..nd).map(|l| if l < active { 1.0 } else { 0.0 }).collect())
    }

    pub fn single_tap(nd: usize, tap: usize) -> Result<Self> {
        Self::new((0..nd).map(|l| if l == tap { 1.0 } else { 0.0 }).collect())
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Mean of the nonzero taps (γ̄).
    pub fn mean_active(&self) -> f64 {
        let active = self.gamma.iter().filter(|g| **g > 0.0).count();
        1.0 / active as f64
    }

    /// Sums consecutive groups of `factor` taps, mapping a fine grid onto a coarser one.
    pub fn aggregate(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.gamma.len().is_multiple_of(factor) {
            return Err(Error::Parameter(format!("cannot aggregate {} taps by {factor}", self.gamma.len())));
        }
        Self::new(self.gamma.chunks(factor).map(|c| c.iter().sum()).collect())
    }
}

/// `γ_ℓ ∝ exp(−ℓ/decay_taps)` on `nd` taps.
pub fn exp_pdp(nd: usize, decay_taps: f64) -> Result<Pdp> {
    if !(decay_taps > 0.0) || nd == 0 {
        return Err(Error::Parameter(format!("exp_pdp needs nd >= 1 and decay > 0 (got {nd}, {decay_taps})")));
    }
    Pdp::new((0..nd).map(|l| (-(l as f64) / decay_taps).exp()).collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    pub gains: Vec<C64>,
    /// Residual delays in seconds, all inside `[0, T_g)`.
    pub delays: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<C64>, delays: Vec<f64>, tg: f64) -> Result<Self> {
        if gains.len() != delays.len() {
            return Err(Error::Dimension(format!("{} gains vs {} delays", gains.len(), delays.len())));
        }
        if let Some(d) = delays.iter().find(|d| !(0.0..tg).contains(*d)) {
            return Err(Error::Parameter(format!("path delay {d:e} outside the CP window [0, {tg:e})")));
        }
        Ok(Self { gains, delays })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Applies a common complex factor to every path gain.
    pub fn scaled(&self, factor: C64) -> Self {
        Self { gains: self.gains.iter().map(|a| a * factor).collect(), delays: self.delays.clone() }
    }
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

/// Draws `q_per_tap` paths per active tap, delays uniform in the tap interval and
/// gains `CN(0, β·γ_ℓ/q_per_tap)`.
pub fn sample_paths<R: Rng + ?Sized>(
    rng: &mut R,
    pdp: &Pdp,
    grid: &DelayGrid,
    beta: f64,
    q_per_tap: usize,
) -> Result<PathSet> {
    if q_per_tap == 0 {
        return Err(Error::Parameter("q_per_tap must be >= 1".into()));
    }
    if pdp.len() != grid.nd {
        return Err(Error::Dimension(format!("PDP has {} taps, grid {}", pdp.len(), grid.nd)));
    }
    let peak = pdp.gamma().iter().cloned().fold(0.0, f64::max);
    let mut gains = Vec::new();
    let mut delays = Vec::new();
    for (l, &gamma) in pdp.gamma().iter().enumerate() {
        let (lo, hi) = (grid.tau[l], grid.interval_end(l));
        if gamma < TAP_ACTIVITY_THRESHOLD * peak || hi <= lo {
            continue;
        }
        for _ in 0..q_per_tap {
            let u: f64 = rng.random();
            delays.push((lo + u * (hi - lo)).min(hi * (1.0 - 1e-15)));
            gains.push(complex_gaussian(rng, beta * gamma / q_per_tap as f64));
        }
    }
    PathSet::new(gains, delays, grid.tg)
}

/// Frequency response over the pilot subcarriers:
/// `d_p[n] = Σ_q a_q exp(−j2π(r_p+n)Δf τ_q)`.
pub fn true_dp(paths: &PathSet, ofdm: &OfdmGrid) -> Vec<C64> {
    (0..ofdm.np)
        .map(|n| {
            let f = (ofdm.rp + n) as f64 * ofdm.delta_f;
            paths.gains.iter().zip(&paths.delays).map(|(a, tau)| a * cis_neg(f * tau)).sum()
        })
        .collect()
}

/// On-grid tap gains: `α_ℓ` is the sum of the gains of the paths falling in interval `ℓ`.
pub fn adc_project(paths: &PathSet, grid: &DelayGrid) -> Vec<C64> {
    let mut alpha = vec![C64::new(0.0, 0.0); grid.nd];
    for (a, tau) in paths.gains.iter().zip(&paths.delays) {
        if let Some(l) = grid.tap_of(*tau) {
            alpha[l] += a;
        }
    }
    alpha
}

/// Column `col` of the row-selected `N_pe`-point DFT: `exp(−j2π(r_p+n)·col/N_pe)`, `n < N_p`.
pub fn dft_column(ofdm: &OfdmGrid, npe: usize, col: usize) -> Vec<C64> {
    (0..ofdm.np).map(|n| cis_neg((((ofdm.rp + n) * col) % npe) as f64 / npe as f64)).collect()
}

/// `F_NpNd`: rows `r_p..r_p+N_p` and the first `N_d` columns of the unnormalized `N_pe`-point DFT.
pub fn partial_dft(grid: &DelayGrid, ofdm: &OfdmGrid) -> DMatrix<C64> {
    DMatrix::from_fn(ofdm.np, grid.nd, |n, l| cis_neg((((ofdm.rp + n) * l) % grid.npe) as f64 / grid.npe as f64))
}

/// `F_NpNd · d_t`, evaluated with one `N_pe`-point FFT.
pub fn reconstruct_dp(grid: &DelayGrid, ofdm: &OfdmGrid, d_t: &[C64]) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); grid.npe];
    buf[..d_t.len()].copy_from_slice(d_t);
    fft_in_place(&mut buf);
    buf[ofdm.rp % grid.npe..].iter().chain(buf.iter()).take(ofdm.np).cloned().collect()
}

/// Diagonal of the angle-delay correlation: `ω_ℓ = β·γ_ℓ`.
pub fn build_rt(beta: f64, pdp: &Pdp) -> Vec<f64> {
    pdp.gamma().iter().map(|g| beta * g).collect()
}

/// Unit-norm UPA response `a_Mx(ξx) ⊗ a_My(ξy)`.
pub fn array_response(geom: &ArrayGeometry, xi: SpaceAngle) -> Vec<C64> {
    let ula = |n: usize, d_wl: f64, x: f64| -> Vec<C64> {
        let s = 1.0 / (n as f64).sqrt();
        (0..n).map(|m| cis_neg(d_wl * m as f64 * x) * s).collect()
    };
    let ax = ula(geom.mx, geom.dx_wl, xi.x);
    let ay = ula(geom.my, geom.dy_wl, xi.y);
    ax.iter().flat_map(|a| ay.iter().map(move |b| a * b)).collect()
}

/// Per-UT ground truth for one realization.
#[derive(Debug, Clone)]
pub struct UtChannel {
    pub xi: SpaceAngle,
    pub beta: f64,
    pub g: Vec<C64>,
    pub paths: PathSet,
    /// True (off-grid) frequency response over the pilot subcarriers, length `N_p`.
    pub d_true: Vec<C64>,
    /// On-grid tap gains on the estimation grid, length `N_d`.
    pub d_adc: Vec<C64>,
    /// `β·γ_ℓ` on the estimation grid.
    pub omega: Vec<f64>,
}

impl UtChannel {
    pub fn new(
        xi: SpaceAngle,
        beta: f64,
        g: Vec<C64>,
        paths: PathSet,
        ofdm: &OfdmGrid,
        grid: &DelayGrid,
        pdp: &Pdp,
    ) -> Self {
        let d_true = true_dp(&paths, ofdm);
        let d_adc = adc_project(&paths, grid);
        let omega = build_rt(beta, pdp);
        Self { xi, beta, g, paths, d_true, d_adc, omega }
    }
}
