//! Joint space-frequency MMSE estimation.
//!
//! The `K·N_d × K·N_d` system is solved in the symmetric form
//! `d̂ = R^{1/2}(R^{1/2}BR^{1/2} + σ²I)⁻¹R^{1/2}Aᴴy` with `B = AᴴA`, which
//! tolerates zero taps in `R` and factors by Cholesky once per operating point.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{adjoint_pe, combine, EstimateReport, RxPilotSignal, Scenario};
use crate::dsp::{cis_neg, dot_h, C64};
use crate::error::{Error, Result};
use crate::pilots::Allocation;

/// `κ(d) = Σ_n exp(−j2π(r_p+n)d/N_pe)` for `d ∈ (−N_pe, N_pe)`, stored at `d + N_pe`.
fn column_correlation(sc: &Scenario) -> Vec<C64> {
    let (np, npe, rp) = (sc.ofdm.np, sc.grid.npe as i64, sc.ofdm.rp as i64);
    (-npe..npe)
        .map(|d| (0..np as i64).map(|n| cis_neg(((rp + n) * d).rem_euclid(npe) as f64 / npe as f64)).sum())
        .collect()
}

/// `A_pᴴA_p`, indexed `k·N_d + ℓ`.
pub fn gram_matrix(sc: &Scenario) -> DMatrix<C64> {
    let (k, nd) = (sc.num_uts(), sc.grid.nd);
    let kappa = column_correlation(sc);
    let npe = sc.grid.npe as i64;
    let scale = sc.p_tx / sc.ofdm.np as f64;
    let mut b = DMatrix::zeros(k * nd, k * nd);
    for i in 0..k {
        let ai = sc.tap_offset(i) as i64;
        for j in 0..k {
            let aj = sc.tap_offset(j) as i64;
            let gg = dot_h(&sc.steering[i], &sc.steering[j]) * scale;
            for l in 0..nd as i64 {
                for lp in 0..nd as i64 {
                    let d = aj + lp - ai - l;
                    b[(i * nd + l as usize, j * nd + lp as usize)] = gg * kappa[(d + npe) as usize];
                }
            }
        }
    }
    b
}

/// `A_pᴴ y_p`, indexed `k·N_d + ℓ`.
pub fn matched_filter(sc: &Scenario, rx: &RxPilotSignal) -> Vec<C64> {
    let nd = sc.grid.nd;
    let amp = (sc.p_tx / sc.ofdm.np as f64).sqrt();
    let mut out = Vec::with_capacity(sc.num_uts() * nd);
    for (k, g) in sc.steering.iter().enumerate() {
        let full = adjoint_pe(&combine(rx, g), sc.ofdm.rp, sc.grid.npe);
        let a = sc.tap_offset(k);
        out.extend(full[a..a + nd].iter().map(|v| v * amp));
    }
    out
}

#[derive(Debug, Clone)]
pub struct MmsePlan {
    sigma2: f64,
    sqrt_omega: Vec<f64>,
    chol: Cholesky<C64, Dyn>,
    nd: usize,
}

impl MmsePlan {
    pub fn new(sc: &Scenario, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Parameter("MMSE needs a positive noise variance".into()));
        }
        let sqrt_omega: Vec<f64> = sc.omegas.iter().flatten().map(|w| w.sqrt()).collect();
        let mut h = gram_matrix(sc);
        let n = h.nrows();
        for r in 0..n {
            for c in 0..n {
                h[(r, c)] *= sqrt_omega[r] * sqrt_omega[c];
            }
            h[(r, r)] += sigma2;
        }
        let chol = Cholesky::new(h).ok_or_else(|| Error::Singular("MMSE system is not positive definite".into()))?;
        Ok(Self { sigma2, sqrt_omega, chol, nd: sc.grid.nd })
    }

    pub fn estimate(&self, sc: &Scenario, rx: &RxPilotSignal) -> Result<EstimateReport> {
        let a = matched_filter(sc, rx);
        let r = DVector::from_iterator(a.len(), a.iter().zip(&self.sqrt_omega).map(|(v, s)| v * *s));
        let u = self.chol.solve(&r);
        let d: Vec<C64> = u.iter().zip(&self.sqrt_omega).map(|(v, s)| v * *s).collect();
        Ok(EstimateReport::from_adc("mmse", sc, d.chunks(self.nd).map(|c| c.to_vec()).collect()))
    }

    /// Per-UT share of `J = trace((σ⁻²R_tA_pᴴA_p + I)⁻¹R_t)`.
    pub fn analytic_j(&self) -> Vec<f64> {
        let inv = self.chol.inverse();
        let per_entry: Vec<f64> =
            (0..inv.nrows()).map(|i| self.sigma2 * self.sqrt_omega[i].powi(2) * inv[(i, i)].re).collect();
        per_entry.chunks(self.nd).map(|c| c.iter().sum()).collect()
    }
}

/// MMSE estimate with the analytic per-UT MSE attached.
pub fn mmse_estimate(rx: &RxPilotSignal, sc: &Scenario, sigma2: f64) -> Result<EstimateReport> {
    let plan = MmsePlan::new(sc, sigma2)?;
    let mut report = plan.estimate(sc, rx)?;
    report.per_ut_mse = Some(plan.analytic_j());
    Ok(report)
}

/// Large-`N_p` MSE `J_asy` and its lower bound `J_asy_min`.
pub fn asymptotic_j(
    alloc: &Allocation,
    omegas: &[Vec<f64>],
    steering: &[Vec<C64>],
    p_tx: f64,
    sigma2: f64,
) -> Result<(f64, f64)> {
    if !(sigma2 > 0.0) {
        return Err(Error::Parameter("noise variance must be positive".into()));
    }
    if omegas.len() != alloc.num_uts() || steering.len() != alloc.num_uts() {
        return Err(Error::Dimension("allocation, correlations and steering disagree".into()));
    }
    let nd = omegas.first().map_or(0, |o| o.len());
    let snr = p_tx / sigma2;
    let mut j_asy = 0.0;
    for group in &alloc.groups {
        let c = DMatrix::from_fn(group.len(), group.len(), |a, b| dot_h(&steering[group[a]], &steering[group[b]]));
        for l in 0..nd {
            let s: Vec<f64> = group.iter().map(|&k| omegas[k][l].sqrt()).collect();
            let mut h = DMatrix::from_fn(group.len(), group.len(), |a, b| c[(a, b)] * (snr * s[a] * s[b]));
            for a in 0..group.len() {
                h[(a, a)] += C64::new(1.0, 0.0);
            }
            let inv = h
                .cholesky()
                .ok_or_else(|| Error::Singular("asymptotic MSE system is not positive definite".into()))?
                .inverse();
            j_asy += (0..group.len()).map(|a| s[a] * s[a] * inv[(a, a)].re).sum::<f64>();
        }
    }
    let j_min = omegas.iter().flatten().map(|w| sigma2 * w / (p_tx * w + sigma2)).sum();
    Ok((j_asy, j_min))
}
