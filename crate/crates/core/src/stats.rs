//! Seeded randomness, heavy-tail and Gaussian primitives, empirical quantiles.

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

/// A seeded, single-owner stream of random numbers.
///
/// Streams derived from the same seed with different indices are
/// independent ChaCha streams, so replication `r` of an experiment can be
/// run on any thread without changing its draws.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Sub-stream `index` of `seed`. Pure: the same pair always yields the
    /// same sequence.
    pub fn derive(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform draw from the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn standard_exponential(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Unit Fréchet quantile transform: `P(X <= x) = exp(-1/x)`.
#[inline]
pub fn frechet_from_uniform(u: f64) -> f64 {
    -1.0 / u.ln()
}

pub fn unit_frechet_sample(stream: &mut RandomStream) -> f64 {
    frechet_from_uniform(stream.uniform_open())
}

pub fn unit_frechet_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Points `Γ_1 < Γ_2 < …` of a unit-rate Poisson process on the half line.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalSequence {
    gammas: Vec<f64>,
}

impl ArrivalSequence {
    /// Cumulative sums of the given exponential increments.
    pub fn from_increments(increments: &[f64]) -> Result<Self> {
        if increments.is_empty() {
            return Err(Error::NoData);
        }
        if increments.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(
                "arrival increments must be positive and finite".into(),
            ));
        }
        let gammas = increments
            .iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect();
        Ok(Self { gammas })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

pub fn gamma_arrivals(stream: &mut RandomStream, count: usize) -> Result<ArrivalSequence> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let increments: Vec<f64> = (0..count).map(|_| stream.standard_exponential()).collect();
    ArrivalSequence::from_increments(&increments)
}

/// Standard normal CDF via `erfc`, accurate to a few ulps across the line.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Right tail `1 - Φ(x)`, computed directly so it keeps relative accuracy for large `x`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `ln(1 − Φ(x))`, finite for all `x`; an asymptotic series takes over where
/// `erfc` underflows.
pub fn log_normal_tail(x: f64) -> f64 {
    if x < 30.0 {
        return normal_tail(x).ln();
    }
    let z = 1.0 / (x * x);
    let series = 1.0 - z * (1.0 - z * (3.0 - z * (15.0 - 105.0 * z)));
    -0.5 * x * x - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
}

/// `ln Φ(x)`.
pub fn log_normal_cdf(x: f64) -> f64 {
    if x > 0.0 {
        (-normal_tail(x)).ln_1p()
    } else {
        log_normal_tail(-x)
    }
}

/// `k`-th order statistic (1-based) of `values`.
pub fn order_statistic(values: &[f64], k: usize) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::NoData);
    }
    if k == 0 || k > values.len() {
        return Err(Error::InvalidParameter(format!(
            "order statistic {k} out of range 1..={}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[k - 1])
}

/// Type-1 empirical quantile: the `⌈p·N⌉`-th order statistic.
///
/// A relative slack of a few ulps is removed before taking the ceiling, so
/// `p·N` values that are integers in exact arithmetic (`0.95 · 2500`) do
/// not round up to the next order statistic.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::NoData);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {p} not in (0, 1)")));
    }
    let n = values.len() as f64;
    let target = p * n;
    let k = (target - 8.0 * f64::EPSILON * target).ceil().max(1.0) as usize;
    order_statistic(values, k.min(values.len()))
}

/// Sup-distance between the empirical CDF of `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value for statistic `d` from `n` observations,
/// with Stephens' finite-sample correction.
pub fn kolmogorov_pvalue(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if (k as u64) % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Φ(x) = 1/2 + φ(x) Σ x^{2k+1} / (2k+1)!!, independent of erfc.
    fn normal_cdf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for k in 1..200 {
            term *= x * x / (2 * k + 1) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        0.5 + normal_pdf(x) * sum
    }

    #[test]
    fn frechet_inversion() {
        assert!((frechet_from_uniform((-1.0f64).exp()) - 1.0).abs() < 1e-15);
        assert!((frechet_from_uniform((-0.5f64).exp()) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn frechet_ks_against_closed_form() {
        let mut s = RandomStream::new(11);
        let xs: Vec<f64> = (0..100_000).map(|_| unit_frechet_sample(&mut s)).collect();
        let d = ks_statistic(&xs, unit_frechet_cdf);
        assert!(d < 0.01, "KS distance {d}");
    }

    #[test]
    fn arrivals_cumulate() {
        let a = ArrivalSequence::from_increments(&[0.7]).unwrap();
        assert_eq!(a.as_slice(), &[0.7]);
        let a = ArrivalSequence::from_increments(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(a.as_slice(), &[1.0, 2.0, 3.0]);
        assert!(gamma_arrivals(&mut RandomStream::new(0), 0).is_err());
    }

    #[test]
    fn arrival_moments_match_gamma_law() {
        // Γ_k ~ Gamma(k, 1): mean k, variance k.
        let k = 5;
        let reps = 10_000;
        let vals: Vec<f64> = (0..reps)
            .map(|r| {
                let mut s = RandomStream::derive(3, r);
                gamma_arrivals(&mut s, k).unwrap().as_slice()[k - 1]
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let se = (k as f64 / reps as f64).sqrt();
        assert!((mean - k as f64).abs() < 3.0 * se, "mean {mean}");
        let seq = gamma_arrivals(&mut RandomStream::new(4), 50).unwrap();
        assert!(seq.as_slice().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn normal_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert_eq!(normal_cdf(40.0), 1.0);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        for &x in &[-3.0, -1.2, -0.3, 0.4, 1.0, 2.5, 3.7] {
            assert!((normal_cdf(x) - normal_cdf_series(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn tail_and_cdf_sum_to_one() {
        for i in -200..=200 {
            let x = i as f64 * 0.05;
            let s = normal_cdf(x) + normal_tail(x);
            assert!((s - 1.0).abs() <= f64::EPSILON, "x = {x}, sum = {s}");
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[5.0], 0.01).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&[5.0], 0.99).unwrap(), 5.0);
        assert!(matches!(empirical_quantile(&[], 0.5), Err(Error::NoData)));
        // 0.95 * 20 is 19 in exact arithmetic.
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95).unwrap(), 19.0);
    }

    #[test]
    fn frechet_quantile_near_analytic() {
        let mut s = RandomStream::new(5);
        let xs: Vec<f64> = (0..10_000).map(|_| unit_frechet_sample(&mut s)).collect();
        let q = empirical_quantile(&xs, 0.95).unwrap();
        let exact = -1.0 / 0.95f64.ln();
        assert!((q / exact - 1.0).abs() < 0.10, "q = {q}");
        // P(X > a_m) ≈ 1/m
        let m = 20.0;
        let a = empirical_quantile(&xs, 1.0 - 1.0 / m).unwrap();
        let mut t = RandomStream::new(6);
        let fresh = 100_000;
        let exceed = (0..fresh).filter(|_| unit_frechet_sample(&mut t) > a).count() as f64 / fresh as f64;
        let se = ((1.0 / m) * (1.0 - 1.0 / m) / 10_000.0).sqrt();
        assert!((exceed - 1.0 / m).abs() < 4.0 * se, "exceed {exceed}");
    }

    #[test]
    fn streams_reproduce() {
        let a: Vec<u64> = {
            let mut s = RandomStream::derive(9, 4);
            (0..10).map(|_| s.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut s = RandomStream::derive(9, 4);
            (0..10).map(|_| s.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut s = RandomStream::derive(9, 5);
            (0..10).map(|_| s.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn kolmogorov_pvalue_reference() {
        // Q(1.36) ≈ 0.049 is the textbook 5% critical value.
        let p = kolmogorov_pvalue(1_000_000, 1.358 / 1000.0);
        assert!((p - 0.05).abs() < 2e-3, "p = {p}");
    }

    #[test]
    fn log_tails_are_continuous_and_accurate() {
        for &x in &[-3.0, 0.0, 1.0, 5.0, 20.0] {
            assert!((log_normal_tail(x) - normal_tail(x).ln()).abs() < 1e-13);
            assert!((log_normal_cdf(x) - normal_cdf(x).ln()).abs() < 1e-13);
        }
        let below = normal_tail(29.999_999).ln();
        assert!((log_normal_tail(30.0) - below).abs() < 1e-4);
        // Mills ratio bounds at x = 40
        let x = 40.0f64;
        let upper = -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln() - x.ln();
        let lower = upper + (x * x / (1.0 + x * x)).ln();
        let v = log_normal_tail(x);
        assert!(v <= upper && v >= lower);
        assert!(log_normal_tail(1e4).is_finite());
    }
}
