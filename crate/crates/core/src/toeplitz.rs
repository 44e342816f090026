//! Hermitian Toeplitz systems for the frequency-domain stage.
//!
//! `T = F_pe · diag(λ) · F_peᴴ` with `F_pe` the `N_p` consecutive rows of the
//! `N_pe`-point DFT is Hermitian Toeplitz; its first column is the DFT of `λ`
//! truncated to `N_p` entries. Systems are solved with the Levinson recursion
//! in `4n²` multiplications.

use crate::dsp::{fft_in_place, C64};
use crate::error::{Error, Result};

/// Reflection coefficients at or above this magnitude abort the recursion.
pub const REFLECTION_LIMIT: f64 = 1.0 - 1e-14;

/// Hermitian Toeplitz matrix stored by its first column; `T[m][k] = t[m−k]`
/// below the diagonal and `conj(t[k−m])` above it.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianToeplitz {
    t: Vec<C64>,
}

impl HermitianToeplitz {
    pub fn new(mut t: Vec<C64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::Dimension("empty Toeplitz column".into()));
        }
        if !(t[0].re > 0.0) {
            return Err(Error::Singular(format!("Toeplitz diagonal must be positive, got {}", t[0])));
        }
        t[0].im = 0.0;
        Ok(Self { t })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn first_column(&self) -> &[C64] {
        &self.t
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        if row >= col {
            self.t[row - col]
        } else {
            self.t[col - row].conj()
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n();
        (0..n).map(|r| (0..n).map(|c| self.entry(r, c) * x[c]).sum()).collect()
    }
}

/// Builds `F_pe diag(λ) F_peᴴ` from a nonnegative spectral mask of length `N_pe`.
pub fn toeplitz_from_spectrum(lambda: &[f64], np: usize) -> Result<HermitianToeplitz> {
    if np == 0 || np > lambda.len() {
        return Err(Error::Dimension(format!("need 1 <= np <= N_pe, got np={np}, N_pe={}", lambda.len())));
    }
    if lambda.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Parameter("spectral mask must be nonnegative".into()));
    }
    if !lambda.iter().any(|l| *l > 0.0) {
        return Err(Error::Singular("all-zero spectral mask".into()));
    }
    let mut buf: Vec<C64> = lambda.iter().map(|l| C64::new(*l, 0.0)).collect();
    fft_in_place(&mut buf);
    buf.truncate(np);
    buf[0] = C64::new(lambda.iter().sum(), 0.0);
    HermitianToeplitz::new(buf)
}

pub fn levinson_solve(t: &HermitianToeplitz, b: &[C64]) -> Result<Vec<C64>> {
    levinson_solve_with(t, b, |_, _| {})
}

/// [`levinson_solve`] followed by one step of iterative refinement, for
/// ill-conditioned systems where the plain recursion loses digits.
pub fn levinson_solve_refined(t: &HermitianToeplitz, b: &[C64]) -> Result<Vec<C64>> {
    let mut s = levinson_solve(t, b)?;
    let r: Vec<C64> = b.iter().zip(t.matvec(&s)).map(|(b, ts)| b - ts).collect();
    for (si, d) in s.iter_mut().zip(levinson_solve(t, &r)?) {
        *si += d;
    }
    Ok(s)
}

/// Levinson recursion on the normalized matrix `L = T/T₀`.
///
/// `inspect(m, y_m)` sees every Yule-Walker iterate (`L_m y_m = −r_m`).
pub fn levinson_solve_with(
    t: &HermitianToeplitz,
    b: &[C64],
    mut inspect: impl FnMut(usize, &[C64]),
) -> Result<Vec<C64>> {
    let n = t.n();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} vs Toeplitz order {n}", b.len())));
    }
    let t0 = t.t[0].re;
    if n == 1 {
        return Ok(vec![b[0] / t0]);
    }
    let rho: Vec<C64> = t.t.iter().map(|v| v / t0).collect();

    let mut alpha = -rho[1];
    let mut zeta = 1.0;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    x.push(b[0]);
    y.push(-rho[1]);
    inspect(1, &y);

    for m in 1..n {
        let mag = alpha.norm();
        if mag >= REFLECTION_LIMIT {
            return Err(Error::NotPositiveDefinite { index: m, magnitude: mag });
        }
        zeta *= 1.0 - mag * mag;

        // μ = (b_{m+1} − r_mᵀ x̃_m)/ζ_{m+1}
        let rx: C64 = (0..m).map(|i| rho[i + 1] * x[m - 1 - i]).sum();
        let mu = (b[m] - rx) / zeta;
        for i in 0..m {
            x[i] += mu * y[m - 1 - i].conj();
        }
        x.push(mu);

        if m + 1 < n {
            // α_{m+1} = −(ρ_{m+1} + r_mᵀ ỹ_m)/ζ_{m+1}
            let ry: C64 = (0..m).map(|i| rho[i + 1] * y[m - 1 - i]).sum();
            alpha = -(rho[m + 1] + ry) / zeta;
            let rev: Vec<C64> = y.iter().rev().map(|v| v.conj()).collect();
            for (yi, r) in y.iter_mut().zip(&rev) {
                *yi += alpha * r;
            }
            y.push(alpha);
            inspect(m + 1, &y);
        }
    }
    Ok(x.into_iter().map(|v| v / t0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::cis_neg;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(t: &HermitianToeplitz) -> DMatrix<C64> {
        DMatrix::from_fn(t.n(), t.n(), |r, c| t.entry(r, c))
    }

    fn dense_solve(t: &HermitianToeplitz, b: &[C64]) -> Vec<C64> {
        dense(t).lu().solve(&DVector::from_column_slice(b)).unwrap().as_slice().to_vec()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    #[test]
    fn flat_spectrum_gives_scaled_identity() {
        let t = toeplitz_from_spectrum(&[0.5; 64], 16).unwrap();
        assert!((t.first_column()[0].re - 32.0).abs() < 1e-12);
        assert!(t.first_column()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn single_bin_gives_all_ones() {
        let mut lambda = vec![0.0; 32];
        lambda[0] = 1.0;
        let t = toeplitz_from_spectrum(&lambda, 8).unwrap();
        assert!(t.first_column().iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn zero_spectrum_is_singular() {
        assert!(matches!(toeplitz_from_spectrum(&[0.0; 8], 4), Err(Error::Singular(_))));
        assert!(toeplitz_from_spectrum(&[1.0; 8], 9).is_err());
    }

    #[test]
    fn spectrum_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (npe, np, rp) = (48, 20, 7);
        let lambda: Vec<f64> = (0..npe).map(|_| rng.random::<f64>()).collect();
        let t = toeplitz_from_spectrum(&lambda, np).unwrap();
        let f = DMatrix::from_fn(np, npe, |n, c| cis_neg(((rp + n) * c) as f64 / npe as f64));
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(npe, lambda.iter().map(|l| C64::new(*l, 0.0))));
        let oracle = &f * lam * f.adjoint();
        let d = dense(&t);
        for r in 0..np {
            for c in 0..np {
                assert!((oracle[(r, c)] - d[(r, c)]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_and_two_by_two() {
        let id = HermitianToeplitz::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let b = vec![C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.0, 1.0)];
        assert_eq!(levinson_solve(&id, &b).unwrap(), b);

        let t = HermitianToeplitz::new(vec![C64::new(2.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let s = levinson_solve(&t, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!((s[0] - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((s[1] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let npe = rng.random_range(8..160);
            let np = rng.random_range(1..=npe);
            let lambda: Vec<f64> = (0..npe).map(|_| 0.05 + rng.random::<f64>()).collect();
            let t = toeplitz_from_spectrum(&lambda, np).unwrap();
            let b = random_vec(&mut rng, np);
            let s = levinson_solve(&t, &b).unwrap();
            let oracle = dense_solve(&t, &b);
            let err: f64 = s.iter().zip(&oracle).map(|(a, o)| (a - o).norm_sqr()).sum::<f64>().sqrt();
            let scale: f64 = oracle.iter().map(|o| o.norm_sqr()).sum::<f64>().sqrt();
            assert!(err / scale < 1e-10);
        }
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let e: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        (e / b.iter().map(|y| y.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Spectrum with 20 bins at 1 and the rest in `[floor, 2·floor]`; cond(T) ≈ 1/floor.
    fn stiff_system(seed: u64, floor: f64) -> (HermitianToeplitz, Vec<C64>, Vec<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> =
            (0..256).map(|i| if i < 20 { 1.0 } else { floor * (1.0 + rng.random::<f64>()) }).collect();
        let t = toeplitz_from_spectrum(&lambda, 128).unwrap();
        let b = random_vec(&mut rng, 128);
        let d = dense(&t);
        let bv = DVector::from_column_slice(&b);
        let lu = d.clone().lu();
        let mut x = lu.solve(&bv).unwrap();
        for _ in 0..4 {
            let r = &bv - &d * &x;
            x += lu.solve(&r).unwrap();
        }
        (t, b, x.as_slice().to_vec())
    }

    #[test]
    fn moderately_conditioned_matches_dense() {
        for seed in 0..4 {
            let (t, b, truth) = stiff_system(seed, 1e-6);
            let s = levinson_solve(&t, &b).unwrap();
            assert!(rel_err(&s, &dense_solve(&t, &b)) < 1e-9);
            assert!(rel_err(&s, &truth) < 1e-9);
        }
    }

    #[test]
    fn ill_conditioned_degrades_gracefully() {
        // cond ≈ 1e8: even the dense LU answer is only good to ~5e-9 here
        for seed in 0..4 {
            let (t, b, truth) = stiff_system(seed, 1e-8);
            let plain = rel_err(&levinson_solve(&t, &b).unwrap(), &truth);
            let refined = rel_err(&levinson_solve_refined(&t, &b).unwrap(), &truth);
            let lu = rel_err(&dense_solve(&t, &b), &truth);
            assert!(plain < 1e-6, "plain {plain:e}");
            assert!(refined < 1e-8 && refined <= 2.0 * lu, "refined {refined:e} lu {lu:e}");
        }
    }

    #[test]
    fn yule_walker_iterates_solve_leading_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lambda: Vec<f64> = (0..24).map(|_| 0.1 + rng.random::<f64>()).collect();
        let t = toeplitz_from_spectrum(&lambda, 10).unwrap();
        let t0 = t.first_column()[0].re;
        let rho: Vec<C64> = t.first_column().iter().map(|v| v / t0).collect();
        let mut checked = 0;
        levinson_solve_with(&t, &random_vec(&mut rng, 10), |m, y| {
            // L_m y_m = −r_m
            for r in 0..m {
                let lhs: C64 = (0..m).map(|c| if r >= c { rho[r - c] } else { rho[c - r].conj() } * y[c]).sum();
                assert!((lhs + rho[r + 1]).norm() < 1e-12, "m={m} row={r}");
            }
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, 9);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let t = HermitianToeplitz::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)]).unwrap();
        let b = vec![C64::new(1.0, 0.0); 3];
        match levinson_solve(&t, &b) {
            Err(Error::NotPositiveDefinite { index, magnitude }) => {
                assert_eq!(index, 2);
                assert!(magnitude >= 1.0);
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
        let flat = HermitianToeplitz::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(levinson_solve(&flat, &b[..2]), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }
}
