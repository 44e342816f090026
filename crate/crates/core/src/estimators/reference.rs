//! Closed-form two-stage estimators that the joint MMSE reduces to at very low
//! and very high SNR.

use nalgebra::DMatrix;

use super::{adjoint_pe, combine, EstimateReport, RxPilotSignal, Scenario};
use crate::dsp::{dot_h, C64};
use crate::error::{Error, Result};

/// `d̂_{t,k} = (√(P/N_p)/σ²)·R_{t,k}·F_kᴴ·(derotatedᵀ·conj(g_k))`.
pub fn reference_low_snr(rx: &RxPilotSignal, sc: &Scenario, sigma2: f64) -> Result<EstimateReport> {
    if !(sigma2 > 0.0) {
        return Err(Error::Parameter("noise variance must be positive".into()));
    }
    let scale = (sc.p_tx / sc.ofdm.np as f64).sqrt() / sigma2;
    let d = sc
        .steering
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let full = adjoint_pe(&combine(rx, g), sc.ofdm.rp, sc.grid.npe);
            let a = sc.tap_offset(k);
            sc.omegas[k].iter().enumerate().map(|(l, w)| full[a + l] * (scale * w)).collect()
        })
        .collect();
    Ok(EstimateReport::from_adc("low_snr_ref", sc, d))
}

/// Zero-forcing combiners `q_k` (columns of `G_s C_s⁻¹`) for the high-SNR form.
#[derive(Debug, Clone)]
pub struct HighSnrPlan {
    pub q: Vec<Vec<C64>>,
}

impl HighSnrPlan {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let m = sc.num_antennas();
        let mut q = vec![Vec::new(); sc.num_uts()];
        for group in &sc.alloc.groups {
            let g = DMatrix::from_fn(m, group.len(), |a, i| sc.steering[group[i]][a]);
            let c = DMatrix::from_fn(group.len(), group.len(), |i, j| {
                dot_h(&sc.steering[group[i]], &sc.steering[group[j]])
            });
            let c_inv = c
                .cholesky()
                .ok_or_else(|| Error::Singular("co-pilot steering vectors are linearly dependent".into()))?
                .inverse();
            let zf = g * c_inv;
            for (i, &k) in group.iter().enumerate() {
                q[k] = zf.column(i).iter().cloned().collect();
            }
        }
        Ok(Self { q })
    }

    pub fn estimate(&self, sc: &Scenario, rx: &RxPilotSignal) -> Result<EstimateReport> {
        let scale = 1.0 / (sc.p_tx * sc.ofdm.np as f64).sqrt();
        let d = self
            .q
            .iter()
            .enumerate()
            .map(|(k, qk)| {
                let full = adjoint_pe(&combine(rx, qk), sc.ofdm.rp, sc.grid.npe);
                let a = sc.tap_offset(k);
                sc.omegas[k]
                    .iter()
                    .enumerate()
                    .map(|(l, w)| if *w > 0.0 { full[a + l] * scale } else { C64::new(0.0, 0.0) })
                    .collect()
            })
            .collect();
        Ok(EstimateReport::from_adc("high_snr_ref", sc, d))
    }
}

/// `d̂_{t,k} = (1/√(P·N_p))·supp(Γ)·F_kᴴ·(derotatedᵀ·conj(q_k))`.
pub fn reference_high_snr(rx: &RxPilotSignal, sc: &Scenario) -> Result<EstimateReport> {
    HighSnrPlan::new(sc)?.estimate(sc, rx)
}
