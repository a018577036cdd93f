//! Discrete Whittle likelihood for extremal spectral densities.
//!
//! `σ²_n(Θ) = σ̄²_n(Θ) · n⁻² Σ_j f̂(λ_j)/f_Θ(λ_j)` with the geometric-mean
//! normalizer `σ̄²_n(Θ) = exp(n⁻² Σ_j log f_Θ(λ_j))`, summed over all
//! `j ∈ {1, …, n}²`.

use crate::error::{Error, Result};
use crate::extremal::{choose_threshold, extremal_periodogram, fourier_frequencies, indicators, Periodogram};
use crate::field::LatticeField;
use crate::model::{Family, SpectralModel};
use crate::optimize::{minimize_bounded, DEFAULT_TOL};

pub const BOUNDARY_FLAG: &str = "boundary solution";

/// `exp(mean log f)`; errors on the first nonpositive entry.
pub fn geometric_normalizer(f: &[f64]) -> Result<f64> {
    let n = (f.len() as f64).sqrt().round() as usize;
    let mut acc = 0.0;
    for (idx, &v) in f.iter().enumerate() {
        if !(v > 0.0) {
            let w = fourier_frequencies(n.max(1)).get(idx).copied().unwrap_or([f64::NAN; 2]);
            return Err(Error::SpectralDensityNotPositive { value: v, w1: w[0], w2: w[1] });
        }
        acc += v.ln();
    }
    Ok((acc / f.len() as f64).exp())
}

/// Whittle score from periodogram and model values in the same layout.
pub fn whittle_score(periodogram: &[f64], f: &[f64]) -> Result<f64> {
    if periodogram.is_empty() || periodogram.len() != f.len() {
        return Err(Error::InvalidParameter("periodogram and model grid differ in size".into()));
    }
    let norm = geometric_normalizer(f)?;
    let ratio: f64 = periodogram.iter().zip(f).map(|(p, v)| p / v).sum::<f64>() / f.len() as f64;
    Ok(norm * ratio)
}

pub fn whittle_objective(periodogram: &Periodogram, family: Family, theta: f64) -> Result<f64> {
    let f = SpectralModel::new(family.with_theta(theta))?.spectral_density_grid(periodogram.n)?;
    whittle_score(&periodogram.values, &f)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WhittleFit {
    pub theta_hat: f64,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub boundary: bool,
    pub bounds: (f64, f64),
    pub m: u32,
    pub threshold: f64,
}

impl WhittleFit {
    pub fn flag(&self) -> Option<&'static str> {
        self.boundary.then_some(BOUNDARY_FLAG)
    }
}

/// Threshold at the empirical `(1 − 1/m)`-quantile, build the periodogram
/// and minimize the score over `bounds` (family default when `None`).
pub fn whittle_estimate(field: &LatticeField, m: u32, family: Family, bounds: Option<(f64, f64)>) -> Result<WhittleFit> {
    let threshold = choose_threshold(field, m)?;
    let grid = indicators(field, &threshold)?;
    let periodogram = extremal_periodogram(&grid, m);
    let mut fit = whittle_fit_periodogram(&periodogram, family, bounds.unwrap_or(family.default_bounds()), DEFAULT_TOL)?;
    fit.threshold = threshold.a_m;
    Ok(fit)
}

/// Minimizes the score for a given periodogram. Both bounds are also scored,
/// so the returned objective never exceeds either endpoint value.
pub fn whittle_fit_periodogram(periodogram: &Periodogram, family: Family, bounds: (f64, f64), tol: f64) -> Result<WhittleFit> {
    let (lo, hi) = bounds;
    family.with_theta(lo).validate()?;
    family.with_theta(hi).validate()?;
    let objective = |theta: f64| whittle_objective(periodogram, family, theta);
    let min = minimize_bounded(objective, lo, hi, tol)?;
    let f_lo = objective(lo)?;
    let f_hi = objective(hi)?;
    let (mut theta_hat, mut value) = (min.x, min.value);
    if f_lo < value {
        (theta_hat, value) = (lo, f_lo);
    }
    if f_hi < value {
        (theta_hat, value) = (hi, f_hi);
    }
    let boundary = theta_hat - lo <= tol || hi - theta_hat <= tol;
    Ok(WhittleFit {
        theta_hat,
        objective: value,
        evaluations: min.evaluations + 2,
        converged: min.converged && !boundary,
        boundary,
        bounds,
        m: periodogram.m,
        threshold: f64::NAN,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointFit {
    pub hurst: f64,
    pub scale: f64,
    pub objective: f64,
    pub rounds: usize,
    pub converged: bool,
}

/// Brown–Resnick `(H, c)` by coordinate descent over the scalar minimizer.
pub fn whittle_estimate_joint(
    field: &LatticeField,
    m: u32,
    hurst_bounds: (f64, f64),
    scale_bounds: (f64, f64),
    start_scale: f64,
) -> Result<JointFit> {
    const MAX_ROUNDS: usize = 30;
    let threshold = choose_threshold(field, m)?;
    let periodogram = extremal_periodogram(&indicators(field, &threshold)?, m);
    let mut scale = start_scale;
    let mut hurst = f64::NAN;
    let mut objective = f64::INFINITY;
    for round in 1..=MAX_ROUNDS {
        let fit_h = whittle_fit_periodogram(&periodogram, Family::brown_resnick(0.5, scale), hurst_bounds, DEFAULT_TOL)?;
        let h = fit_h.theta_hat;
        let by_scale = |c: f64| whittle_objective(&periodogram, Family::brown_resnick(h, c), h);
        let fit_c = minimize_bounded(by_scale, scale_bounds.0, scale_bounds.1, DEFAULT_TOL)?;
        let moved = (h - hurst).abs().max((fit_c.x - scale).abs());
        hurst = h;
        scale = fit_c.x;
        objective = fit_c.value.min(fit_h.objective);
        if moved < DEFAULT_TOL {
            return Ok(JointFit {
                hurst,
                scale,
                objective,
                rounds: round,
                converged: true,
            });
        }
    }
    Ok(JointFit {
        hurst,
        scale,
        objective,
        rounds: MAX_ROUNDS,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{mma_weight_diamond, simulate_mma};
    use crate::stats::RandomStream;

    fn mma_periodogram(phi: f64, n: usize, m: u32, seed: u64) -> Periodogram {
        let k = mma_weight_diamond(phi, 5).unwrap();
        let f = simulate_mma(n, &k, &mut RandomStream::new(seed)).unwrap();
        let t = choose_threshold(&f, m).unwrap();
        extremal_periodogram(&indicators(&f, &t).unwrap(), m)
    }

    #[test]
    fn iid_family_gives_parseval_mean() {
        let p = mma_periodogram(0.5, 20, 5, 1);
        let f = vec![1.0; 400];
        let mean = p.values.iter().sum::<f64>() / 400.0;
        assert!((whittle_score(&p.values, &f).unwrap() - mean).abs() < 1e-15);
        let v = whittle_objective(&p, Family::iid(), 1.0).unwrap();
        assert!((v - mean).abs() < 1e-14);
    }

    #[test]
    fn kolmogorov_identity() {
        let mut s = RandomStream::new(2);
        for _ in 0..10 {
            let h = 0.05 + 0.9 * s.uniform_open();
            let f = SpectralModel::new(Family::brown_resnick(h, 2.0)).unwrap().spectral_density_grid(12).unwrap();
            let norm = geometric_normalizer(&f).unwrap();
            let mean: f64 = f.iter().map(|v| (v / norm).ln()).sum::<f64>() / f.len() as f64;
            assert!(mean.abs() < 1e-12, "H = {h}: {mean}");
        }
    }

    #[test]
    fn scale_consistency() {
        let p = mma_periodogram(1.0, 16, 4, 3);
        let scaled = Periodogram {
            values: p.values.iter().map(|v| 3.7 * v).collect(),
            ..p.clone()
        };
        for theta in [0.3, 0.8, 1.4, 2.2] {
            let a = whittle_objective(&p, Family::mma(1.0, 5), theta).unwrap();
            let b = whittle_objective(&scaled, Family::mma(1.0, 5), theta).unwrap();
            assert!((b / a - 3.7).abs() < 1e-13);
        }
    }

    #[test]
    fn population_score_is_minimized_at_truth() {
        let n = 16;
        for (family, theta0) in [(Family::mma(1.0, 5), 0.8), (Family::brown_resnick(0.5, 2.0), 0.4)] {
            let truth = SpectralModel::new(family.with_theta(theta0)).unwrap().spectral_density_grid(n).unwrap();
            let p = Periodogram { n, m: 1, values: truth };
            let grid: Vec<f64> = (0..=40).map(|k| theta0 - 0.2 + 0.01 * k as f64).collect();
            let scores: Vec<f64> = grid.iter().map(|&t| whittle_objective(&p, family, t).unwrap()).collect();
            let best = scores.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert!((grid[best] - theta0).abs() < 1e-9, "{family:?}: argmin {}", grid[best]);
        }
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let p = Periodogram { n: 2, m: 2, values: vec![1.0; 4] };
        let r = whittle_score(&p.values, &[1.0, 0.0, 1.0, 1.0]);
        assert!(matches!(r, Err(Error::SpectralDensityNotPositive { .. })));
    }

    #[test]
    fn brent_matches_grid_scan() {
        let p = mma_periodogram(0.5, 30, 10, 4);
        let family = Family::mma(0.5, 5);
        let (lo, hi) = (0.05, 3.0);
        let fit = whittle_fit_periodogram(&p, family, (lo, hi), 1e-6).unwrap();
        let steps = 10_000;
        let step = (hi - lo) / steps as f64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=steps {
            let t = lo + step * k as f64;
            let v = whittle_objective(&p, family, t).unwrap();
            if v < best.0 {
                best = (v, t);
            }
        }
        assert!((fit.theta_hat - best.1).abs() <= step, "{} vs {}", fit.theta_hat, best.1);
        assert!(fit.objective <= best.0 + 1e-12);
    }

    #[test]
    fn recovers_mma_phi() {
        let k = mma_weight_diamond(1.5, 5).unwrap();
        let f = simulate_mma(40, &k, &mut RandomStream::new(5)).unwrap();
        let fit = whittle_estimate(&f, 16, Family::mma(2.0, 5), None).unwrap();
        assert_eq!(fit.bounds, (1.05, 3.0));
        assert!((fit.theta_hat - 1.5).abs() < 0.5, "{fit:?}");
        assert!(fit.threshold > 0.0);
        assert!(fit.objective <= whittle_objective_field(&f, 16, Family::mma(2.0, 5), fit.bounds.0));
    }

    fn whittle_objective_field(f: &LatticeField, m: u32, family: Family, theta: f64) -> f64 {
        let t = choose_threshold(f, m).unwrap();
        whittle_objective(&extremal_periodogram(&indicators(f, &t).unwrap(), m), family, theta).unwrap()
    }

    #[test]
    fn iid_data_against_mma_is_flagged() {
        let k = mma_weight_diamond(1.0, 0).unwrap();
        let f = simulate_mma(30, &k, &mut RandomStream::new(6)).unwrap();
        let fit = whittle_estimate(&f, 10, Family::mma(1.0, 5), None).unwrap();
        assert!(fit.boundary, "{fit:?}");
        assert_eq!(fit.flag(), Some(BOUNDARY_FLAG));
        assert!(!fit.converged);
    }
}
