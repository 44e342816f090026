use crate::dsp::{norm_sqr, C64};
use crate::error::{Error, Result};

/// `Σ_k‖d_k − d̂_k‖² / Σ_k‖d_k‖²` for one realization.
pub fn nmse(truth: &[Vec<C64>], est: &[Vec<C64>]) -> Result<f64> {
    if truth.len() != est.len() || truth.iter().zip(est).any(|(a, b)| a.len() != b.len()) {
        return Err(Error::Dimension("truth and estimate shapes differ".into()));
    }
    let power: f64 = truth.iter().map(|d| norm_sqr(d)).sum();
    if !(power > 0.0) {
        return Err(Error::Domain("NMSE of a zero-power channel".into()));
    }
    let err: f64 = truth.iter().zip(est).flat_map(|(a, b)| a.iter().zip(b)).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok(err / power)
}

/// Leading-order operation counts `(MMSE, TSCE)` with unit constants.
pub fn flop_model(m: usize, k: usize, np: usize, npe: usize, nd: usize, s_count: usize) -> (f64, f64) {
    let (m, k, np, npe, nd, s) = (m as f64, k as f64, np as f64, npe as f64, nd as f64, s_count as f64);
    let fft = k * npe * npe.log2();
    let mmse = k * m * np + fft + (k * nd).powi(3);
    let tsce = s * m.powi(3) + k * m * m + k * m * np + k * np * np + fft;
    (mmse, tsce)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRow {
    pub np: usize,
    pub mmse_flops: f64,
    pub tsce_flops: f64,
    pub ratio: f64,
}

/// Flop models over a list of pilot-subcarrier counts, with `N_d` and `N_pe`
/// following the delay-grid definitions for each `N_p`.
pub fn complexity_table(
    m: usize,
    k: usize,
    s_count: usize,
    mu_d: usize,
    ng: usize,
    nc: usize,
    nps: &[usize],
) -> Vec<ComplexityRow> {
    nps.iter()
        .map(|&np| {
            let nd = mu_d * (np * ng).div_ceil(nc);
            let (mmse, tsce) = flop_model(m, k, np, np * mu_d, nd, s_count);
            ComplexityRow { np, mmse_flops: mmse, tsce_flops: tsce, ratio: mmse / tsce }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn nmse_limits() {
        let truth = vec![vec![c(1.0), C64::new(0.0, 2.0)], vec![c(-3.0)]];
        assert_eq!(nmse(&truth, &truth).unwrap(), 0.0);
        let zero = vec![vec![c(0.0); 2], vec![c(0.0)]];
        assert_eq!(nmse(&truth, &zero).unwrap(), 1.0);
        assert!(nmse(&zero, &truth).is_err());
        assert!(nmse(&truth, &truth[..1]).is_err());
    }

    #[test]
    fn full_scale_flops() {
        let (mmse, tsce) = flop_model(144, 500, 128, 256, 18, 14);
        let cubic = (500.0f64 * 18.0).powi(3);
        assert!((cubic - 7.29e11).abs() < 1e9);
        assert!(mmse > cubic && mmse < cubic * 1.001);
        let expect = 14.0 * 144f64.powi(3)
            + 500.0 * 144.0 * 144.0
            + 500.0 * 144.0 * 128.0
            + 500.0 * 128.0 * 128.0
            + 500.0 * 256.0 * 8.0;
        assert!((tsce - expect).abs() < 1e-6 * expect);
        assert!((tsce / 7e7 - 1.0).abs() < 0.05);
        assert!(mmse / tsce > 1e3);
    }

    #[test]
    fn single_user_terms() {
        let (mmse, tsce) = flop_model(4, 1, 8, 16, 2, 1);
        assert_eq!(mmse, 4.0 * 8.0 + 16.0 * 4.0 + 8.0);
        assert_eq!(tsce, 64.0 + 16.0 + 32.0 + 64.0 + 64.0);
    }

    #[test]
    fn tsce_model_monotone_in_each_argument() {
        let base = [16usize, 10, 32, 64, 4, 3];
        let eval = |a: [usize; 6]| flop_model(a[0], a[1], a[2], a[3], a[4], a[5]).1;
        for i in 0..6 {
            let mut bigger = base;
            bigger[i] += 1;
            if i == 4 {
                assert_eq!(eval(bigger), eval(base));
            } else {
                assert!(eval(bigger) > eval(base), "argument {i}");
            }
        }
    }
}
