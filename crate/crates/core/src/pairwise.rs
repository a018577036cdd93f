//! Pairwise composite likelihood for Brown–Resnick fields with Hüsler–Reiss
//! bivariate margins.

use crate::error::{Error, Result};
use crate::field::LatticeField;
use crate::gaussian::Site;
use crate::model::Family;
use crate::optimize::{minimize_bounded, DEFAULT_TOL};
use crate::stats::{log_normal_cdf, normal_cdf};

pub const DEFAULT_DMAX: f64 = 2.0;

/// `exp{−Φ(q)/x − Φ(a − q)/y}` with `a = 2√δ`, `q = a/2 + ln(y/x)/a`.
pub fn hr_bivariate_cdf(x: f64, y: f64, delta_h: f64) -> f64 {
    if delta_h <= 0.0 {
        return (-1.0 / x.min(y)).exp();
    }
    let a = 2.0 * delta_h.sqrt();
    let q = 0.5 * a + (y / x).ln() / a;
    (-normal_cdf(q) / x - normal_cdf(a - q) / y).exp()
}

/// Log of `∂²F/∂x∂y = [Φ(q)Φ(r)/(x²y²) + φ(q)/(a x² y)] e^{−V}`, `r = a − q`.
pub fn hr_log_density(x: f64, y: f64, delta_h: f64) -> f64 {
    if delta_h <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let a = 2.0 * delta_h.sqrt();
    let (lx, ly) = (x.ln(), y.ln());
    let q = 0.5 * a + (ly - lx) / a;
    let r = a - q;
    let v = normal_cdf(q) / x + normal_cdf(r) / y;
    let log_a = log_normal_cdf(q) + log_normal_cdf(r) - 2.0 * lx - 2.0 * ly;
    let log_b = -0.5 * q * q - 0.5 * (2.0 * std::f64::consts::PI).ln() - a.ln() - 2.0 * lx - ly;
    let hi = log_a.max(log_b);
    hi + ((log_a - hi).exp() + (log_b - hi).exp()).ln() - v
}

pub fn hr_density(x: f64, y: f64, delta_h: f64) -> f64 {
    hr_log_density(x, y, delta_h).exp()
}

/// Lags `h` with `0 < ‖h‖₂ ≤ d_max`, one of each `±h` pair.
pub fn pair_lags(d_max: f64) -> Vec<Site> {
    let r = d_max.floor() as i64;
    let mut out = Vec::new();
    for a in 0..=r {
        for b in -r..=r {
            if (a == 0 && b <= 0) || ((a * a + b * b) as f64) > d_max * d_max {
                continue;
            }
            out.push([a, b]);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseFit {
    pub theta_hat: f64,
    pub loglik: f64,
    pub d_max: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub boundary: bool,
    pub bounds: (f64, f64),
}

/// Sum of `log f_h(X_s, X_{s+h})` over in-grid pairs at each lag in
/// [`pair_lags`], with `δ(h) = (c/2)‖h‖^{2H}`.
pub fn pairwise_loglik(field: &LatticeField, hurst: f64, scale: f64, d_max: f64) -> f64 {
    let n = field.n() as i64;
    let mut total = 0.0;
    for h in pair_lags(d_max) {
        let r2 = (h[0] * h[0] + h[1] * h[1]) as f64;
        let delta = 0.5 * scale * r2.powf(hurst);
        for i in 0.max(-h[0])..n.min(n - h[0]) {
            for j in 0.max(-h[1])..n.min(n - h[1]) {
                let x = field.get(i as usize, j as usize);
                let y = field.get((i + h[0]) as usize, (j + h[1]) as usize);
                total += hr_log_density(x, y, delta);
            }
        }
    }
    total
}

/// Maximizes [`pairwise_loglik`] over `H` with `c` held at the family's value.
pub fn pairwise_estimate(field: &LatticeField, family: Family, bounds: Option<(f64, f64)>, d_max: f64) -> Result<PairwiseFit> {
    let Family::BrownResnick { scale, .. } = family else {
        return Err(Error::Unsupported("pairwise likelihood is implemented for the Brown–Resnick family".into()));
    };
    if !(d_max >= 1.0) {
        return Err(Error::InvalidParameter(format!("d_max {d_max} must be at least 1")));
    }
    let (lo, hi) = bounds.unwrap_or(family.default_bounds());
    family.with_theta(lo).validate()?;
    family.with_theta(hi).validate()?;
    let min = minimize_bounded(|h| Ok(-pairwise_loglik(field, h, scale, d_max)), lo, hi, DEFAULT_TOL)?;
    let boundary = min.x - lo <= DEFAULT_TOL || hi - min.x <= DEFAULT_TOL;
    Ok(PairwiseFit {
        theta_hat: min.x,
        loglik: -min.value,
        d_max,
        evaluations: min.evaluations,
        converged: min.converged && !boundary,
        boundary,
        bounds: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::VariogramSpec;
    use crate::simulate::{BrSimConfig, BrSimulator};
    use crate::stats::RandomStream;

    #[test]
    fn cdf_examples() {
        let u = 3.0;
        let expected = (-(2.0 / u) * normal_cdf(1.0)).exp();
        assert!((hr_bivariate_cdf(u, u, 1.0) - expected).abs() < 1e-15);
        assert!((hr_bivariate_cdf(1.0, 1.0, 1e8) - (-2.0f64).exp()).abs() < 1e-12);
        assert_eq!(hr_bivariate_cdf(1.0, 2.0, 0.0), (-1.0f64).exp());
        assert!((hr_bivariate_cdf(1.0, 2.0, 1e-12) - (-1.0f64).exp()).abs() < 1e-6);
        // margins
        assert!((hr_bivariate_cdf(1.7, 1e12, 0.8) - (-1.0 / 1.7f64).exp()).abs() < 1e-9);
    }

    fn mixed_difference(x: f64, y: f64, d: f64) -> f64 {
        let (hx, hy) = (1e-4 * x, 1e-4 * y);
        let f = |a, b| hr_bivariate_cdf(a, b, d);
        (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) / (4.0 * hx * hy)
    }

    #[test]
    fn density_matches_mixed_difference() {
        let d = mixed_difference(1.3, 0.8, 1.0);
        assert!((hr_density(1.3, 0.8, 1.0) / d - 1.0).abs() < 1e-4);
        for &delta in &[0.25, 1.0, 4.0] {
            for &x in &[0.4, 0.9, 1.5, 3.0, 7.0] {
                for &y in &[0.5, 1.1, 2.0, 4.0, 9.0] {
                    let d = mixed_difference(x, y, delta);
                    let c = hr_density(x, y, delta);
                    assert!((c / d - 1.0).abs() < 1e-4, "δ={delta} x={x} y={y}: {c} vs {d}");
                }
            }
        }
    }

    #[test]
    fn density_is_symmetric_and_finite_in_the_tails() {
        for &(x, y) in &[(0.3, 5.0), (2.0, 2.0), (1e-3, 1e4)] {
            let a = hr_log_density(x, y, 0.7);
            let b = hr_log_density(y, x, 0.7);
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
            assert!(a.is_finite());
        }
        assert!(hr_log_density(1.0, 1.0, 1e-14).is_finite());
    }

    #[test]
    fn lag_sets() {
        assert_eq!(pair_lags(1.0), vec![[0, 1], [1, 0]]);
        let l = pair_lags(2.0);
        assert_eq!(l.len(), 6);
        assert!(l.contains(&[1, -1]) && l.contains(&[2, 0]) && !l.contains(&[2, 1]));
    }

    #[test]
    fn fits_exact_brown_resnick() {
        let spec = VariogramSpec::isotropic(0.5, 2.0).unwrap();
        let sim = BrSimulator::new(12, BrSimConfig::exact(spec)).unwrap();
        let mut estimates = Vec::new();
        for r in 0..6 {
            let f = sim.simulate(&mut RandomStream::derive(21, r)).unwrap();
            let fit = pairwise_estimate(&f, Family::brown_resnick(0.5, 2.0), None, DEFAULT_DMAX).unwrap();
            assert!(fit.loglik.is_finite());
            estimates.push(fit.theta_hat);
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        assert!((mean - 0.5).abs() < 0.15, "{estimates:?}");
        assert!(pairwise_estimate(&sim.simulate(&mut RandomStream::new(1)).unwrap(), Family::mma(0.5, 5), None, 2.0).is_err());
    }
}
