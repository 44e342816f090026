//! Two-stage channel estimation: one space-domain combiner per UT shared by all
//! subcarriers, then a per-UT Toeplitz MMSE filter over frequency.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{combine, padded_ifft, EstimateReport, RxPilotSignal, Scenario};
use crate::channel::dft_column;
use crate::dsp::{dot_h, norm_sqr, C64};
use crate::error::{Error, Result};
use crate::pilots::Allocation;
use crate::toeplitz::{levinson_solve, toeplitz_from_spectrum, HermitianToeplitz};

const NEWTON_MAX_ITER: usize = 50;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone)]
pub struct CombinerSolution {
    pub w: Vec<C64>,
    pub v: f64,
    pub iterations: usize,
    /// Newton did not converge and `v` came from bisection on the bracket.
    pub bisection_fallback: bool,
}

struct CombinerProblem<'a> {
    /// `P·G_sΩ_sG_sᴴ`
    cov: DMatrix<C64>,
    g: &'a [C64],
    gamma: Vec<f64>,
    sigma2: f64,
}

impl CombinerProblem<'_> {
    fn combiner(&self, v: f64) -> Result<Vec<C64>> {
        let mut a = self.cov.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += v;
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Singular(format!("combiner system not positive definite at v = {v:e}")))?;
        Ok(chol.solve(&DVector::from_column_slice(self.g)).as_slice().to_vec())
    }

    /// `G = wᴴ(P·G_sΩ_sG_sᴴ)w` and `W = ‖w‖²`.
    fn gains(&self, w: &[C64]) -> (f64, f64) {
        let wv = DVector::from_column_slice(w);
        let g = (wv.adjoint() * &self.cov * &wv)[(0, 0)].re;
        (g, norm_sqr(w))
    }

    fn residual(&self, v: f64) -> Result<f64> {
        let (g, w) = self.gains(&self.combiner(v)?);
        let (mut num, mut den) = (0.0, 0.0);
        for &gm in self.gamma.iter().filter(|x| **x > 0.0) {
            let a2 = (g * gm + self.sigma2 * w).powi(2);
            num += gm * gm / a2;
            den += gm * gm * gm / a2;
        }
        Ok(self.sigma2 * num / den - v)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let f_lo = self.residual(lo)?;
        let f_hi = self.residual(hi)?;
        if f_lo <= 0.0 || f_hi >= 0.0 {
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if self.residual(mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Combiner `w_k = (P·G_sΩ_sG_sᴴ + v_k I)⁻¹ g_k` with `v_k ∈ [σ², σ²/γ̄]` the
/// root of `σ²·(Σγ²/A²)/(Σγ³/A²) − v`.
pub fn space_combiner(
    k: usize,
    alloc: &Allocation,
    betas: &[f64],
    steering: &[Vec<C64>],
    gamma: &[f64],
    p_tx: f64,
    sigma2: f64,
) -> Result<CombinerSolution> {
    if !(sigma2 > 0.0) {
        return Err(Error::Parameter("combiner needs a positive noise variance".into()));
    }
    if k >= steering.len() || betas.len() != steering.len() || alloc.num_uts() != steering.len() {
        return Err(Error::Dimension("combiner inputs disagree".into()));
    }
    let active = gamma.iter().filter(|x| **x > 0.0).count();
    if active == 0 {
        return Err(Error::Parameter("PDP has no active taps".into()));
    }
    let m = steering[k].len();
    let mut cov = DMatrix::zeros(m, m);
    for &i in &alloc.groups[alloc.pilot_of[k]] {
        let g = DVector::from_column_slice(&steering[i]);
        cov += (&g * g.adjoint()) * C64::new(p_tx * betas[i], 0.0);
    }
    let prob = CombinerProblem { cov, g: &steering[k], gamma: gamma.to_vec(), sigma2 };

    let (lo, hi) = (sigma2, sigma2 * active as f64);
    let done = |v: f64, iterations: usize, bisection_fallback: bool| -> Result<CombinerSolution> {
        let v = v.clamp(lo, hi);
        Ok(CombinerSolution { w: prob.combiner(v)?, v, iterations, bisection_fallback })
    };
    if hi - lo <= 1e-15 * hi {
        return done(lo, 0, false);
    }

    let tol_f = 1e-10 * sigma2;
    let h = 1e-4 * sigma2;
    let mut v = 0.5 * (lo + hi);
    for it in 1..=NEWTON_MAX_ITER {
        let f = prob.residual(v)?;
        if f.abs() < tol_f {
            return done(v, it, false);
        }
        let df = (prob.residual(v + h)? - prob.residual(v - h)?) / (2.0 * h);
        let next = v - f / df;
        if !next.is_finite() {
            break;
        }
        let clamped = next.clamp(lo, hi);
        let step = (clamped - v).abs();
        if clamped == next && step < 1e-10 * v {
            return done(clamped, it, false);
        }
        if clamped != next && step == 0.0 {
            break;
        }
        v = clamped;
    }
    done(prob.bisect(lo, hi)?, NEWTON_MAX_ITER, true)
}

/// Per-UT quantities that depend only on statistics.
#[derive(Debug, Clone)]
pub struct TsceState {
    pub w: Vec<C64>,
    pub v: f64,
    pub bisection_fallback: bool,
    /// `w_kᴴ g_k`
    pub g_inner: C64,
    /// Diagonal of `Λ_{w,k}` over the extended grid.
    pub lambda: Vec<f64>,
    pub toeplitz: HermitianToeplitz,
    /// `C_k = √(P·N_p)·μ_d·g_kᴴw_k`
    pub c_scale: C64,
}

fn tsce_state(sc: &Scenario, k: usize, sigma2: f64) -> Result<TsceState> {
    let gamma = sc.pdp.gamma();
    let sol = space_combiner(k, &sc.alloc, &sc.betas, &sc.steering, gamma, sc.p_tx, sigma2)?;
    let (np, npe) = (sc.ofdm.np as f64, sc.grid.npe);
    let mut lambda = vec![sigma2 * norm_sqr(&sol.w) / npe as f64; npe];
    for (s, group) in sc.alloc.groups.iter().enumerate() {
        let power: f64 =
            group.iter().map(|&i| sc.betas[i] * dot_h(&sol.w, &sc.steering[i]).norm_sqr()).sum::<f64>() * sc.p_tx / np;
        let a = sc.pilots.phases[s];
        for (l, g) in gamma.iter().enumerate() {
            lambda[a + l] += power * g;
        }
    }
    let toeplitz = toeplitz_from_spectrum(&lambda, sc.ofdm.np)?;
    let g_inner = dot_h(&sol.w, &sc.steering[k]);
    let c_scale = g_inner.conj() * ((sc.p_tx * np).sqrt() * sc.grid.mu_d as f64);
    Ok(TsceState { w: sol.w, v: sol.v, bisection_fallback: sol.bisection_fallback, g_inner, lambda, toeplitz, c_scale })
}

#[derive(Debug, Clone)]
pub struct TscePlan {
    pub sigma2: f64,
    pub states: Vec<TsceState>,
}

impl TscePlan {
    pub fn new(sc: &Scenario, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Parameter("TSCE needs a positive noise variance".into()));
        }
        let states = (0..sc.num_uts()).into_par_iter().map(|k| tsce_state(sc, k, sigma2)).collect::<Result<_>>()?;
        Ok(Self { sigma2, states })
    }

    pub fn estimate(&self, sc: &Scenario, rx: &RxPilotSignal) -> Result<EstimateReport> {
        let d = self
            .states
            .iter()
            .enumerate()
            .map(|(k, st)| {
                let x = levinson_solve(&st.toeplitz, &combine(rx, &st.w))?;
                let full = padded_ifft(&x, sc.ofdm.rp, sc.grid.npe);
                let a = sc.tap_offset(k);
                let beta = sc.betas[k];
                Ok(sc.pdp.gamma().iter().enumerate().map(|(l, g)| full[a + l] * st.c_scale * (beta * g)).collect())
            })
            .collect::<Result<Vec<Vec<C64>>>>()?;
        Ok(EstimateReport::from_adc("tsce", sc, d))
    }

    /// `(J_{w,k}, J_{w,k}^asy)` for UT `k`.
    pub fn analytic_j(&self, sc: &Scenario, k: usize) -> Result<(f64, f64)> {
        state_j(sc, k, &self.states[k], self.sigma2)
    }
}

fn state_j(sc: &Scenario, k: usize, st: &TsceState, sigma2: f64) -> Result<(f64, f64)> {
    let beta = sc.betas[k];
    let gamma = sc.pdp.gamma();
    let a = sc.tap_offset(k);
    let mut quad = 0.0;
    for (l, g) in gamma.iter().enumerate().filter(|(_, g)| **g > 0.0) {
        let f = dft_column(&sc.ofdm, sc.grid.npe, a + l);
        let t_inv_f = levinson_solve(&st.toeplitz, &f)?;
        quad += (beta * g).powi(2) * dot_h(&f, &t_inv_f).re;
    }
    let gi2 = st.g_inner.norm_sqr();
    let j = beta - sc.p_tx / sc.ofdm.np as f64 * gi2 * quad;

    let group = &sc.alloc.groups[sc.alloc.pilot_of[k]];
    let big_g: f64 =
        sc.p_tx * group.iter().map(|&i| sc.betas[i] * dot_h(&st.w, &sc.steering[i]).norm_sqr()).sum::<f64>();
    let big_w = norm_sqr(&st.w);
    let sum: f64 = gamma.iter().map(|g| g * g / (big_g * g + sigma2 * big_w)).sum();
    let j_asy = beta - sc.p_tx * beta * beta * gi2 * sum;
    Ok((j, j_asy))
}

pub fn tsce_estimate(rx: &RxPilotSignal, sc: &Scenario, sigma2: f64) -> Result<EstimateReport> {
    let plan = TscePlan::new(sc, sigma2)?;
    let mut report = plan.estimate(sc, rx)?;
    report.per_ut_mse = Some((0..sc.num_uts()).map(|k| plan.analytic_j(sc, k).map(|j| j.0)).collect::<Result<_>>()?);
    Ok(report)
}

pub fn tsce_analytic_j(k: usize, sc: &Scenario, sigma2: f64) -> Result<(f64, f64)> {
    if k >= sc.num_uts() {
        return Err(Error::Dimension(format!("UT {k} out of range")));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Parameter("TSCE needs a positive noise variance".into()));
    }
    state_j(sc, k, &tsce_state(sc, k, sigma2)?, sigma2)
}
