//! Exceedance indicators, the empirical spatial extremogram and the extremal
//! periodogram.
//!
//! Frequency-indexed arrays use the layout of [`fourier_frequencies`]: entry
//! `(j₁ − 1) · n + (j₂ − 1)` holds the value at `λ_j = 2π j / n`,
//! `j ∈ {1, …, n}²`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::fft2_real;
use crate::field::{format_float, LatticeField};
use crate::stats::order_statistic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdRule {
    EmpiricalQuantile,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSpec {
    pub m: u32,
    pub a_m: f64,
    pub rule: ThresholdRule,
}

impl ThresholdSpec {
    pub fn explicit(m: u32, a_m: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::DegenerateThreshold(m));
        }
        if !(a_m > 0.0 && a_m.is_finite()) {
            return Err(Error::InvalidParameter(format!("threshold {a_m} must be positive")));
        }
        Ok(Self {
            m,
            a_m,
            rule: ThresholdRule::Explicit,
        })
    }
}

/// `a_m` as the type-1 empirical `(1 − 1/m)`-quantile of `|X|`. The order
/// statistic index `⌈(m−1)N/m⌉` is computed in integers.
pub fn choose_threshold(field: &LatticeField, m: u32) -> Result<ThresholdSpec> {
    if m < 2 {
        return Err(Error::DegenerateThreshold(m));
    }
    let abs: Vec<f64> = field.values().iter().map(|v| v.abs()).collect();
    let n = abs.len() as u64;
    let m64 = m as u64;
    let k = ((m64 - 1) * n).div_ceil(m64).max(1) as usize;
    Ok(ThresholdSpec {
        m,
        a_m: order_statistic(&abs, k)?,
        rule: ThresholdRule::EmpiricalQuantile,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorGrid {
    pub n: usize,
    pub raw: Vec<bool>,
    /// `1(|X_s| > a_m) − p̂`, summing to zero.
    pub centered: Vec<f64>,
    pub p_hat: f64,
}

impl IndicatorGrid {
    /// Builds a grid from raw exceedance bits.
    pub fn from_raw(n: usize, raw: Vec<bool>) -> Result<Self> {
        if n == 0 || raw.len() != n * n {
            return Err(Error::InvalidParameter("indicator grid must be n × n".into()));
        }
        let count = raw.iter().filter(|b| **b).count();
        let p_hat = count as f64 / raw.len() as f64;
        let centered = raw.iter().map(|&b| if b { 1.0 - p_hat } else { -p_hat }).collect();
        Ok(Self { n, raw, centered, p_hat })
    }

    /// A grid with arbitrary centered values (no raw bits), for transforms only.
    pub fn from_centered(n: usize, centered: Vec<f64>) -> Result<Self> {
        if n == 0 || centered.len() != n * n {
            return Err(Error::InvalidParameter("indicator grid must be n × n".into()));
        }
        Ok(Self {
            n,
            raw: vec![false; n * n],
            centered,
            p_hat: 0.0,
        })
    }

    pub fn exceedances(&self) -> usize {
        self.raw.iter().filter(|b| **b).count()
    }
}

pub fn indicators(field: &LatticeField, threshold: &ThresholdSpec) -> Result<IndicatorGrid> {
    let raw = field.values().iter().map(|v| v.abs() > threshold.a_m).collect();
    IndicatorGrid::from_raw(field.n(), raw)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremogramEstimate {
    pub threshold: ThresholdSpec,
    pub h_max: usize,
    uncentered: Vec<f64>,
    centered: Vec<f64>,
}

impl ExtremogramEstimate {
    fn index(&self, h: [i64; 2]) -> Option<usize> {
        let r = self.h_max as i64;
        if h[0].abs() > r || h[1].abs() > r {
            return None;
        }
        let side = 2 * r + 1;
        Some(((h[0] + r) * side + h[1] + r) as usize)
    }

    /// `γ̃(h) = (m/n²) #{s : s, s+h ∈ Λ_n², both exceed}`.
    pub fn get(&self, h: [i64; 2]) -> Option<f64> {
        self.index(h).map(|i| self.uncentered[i])
    }

    /// `γ̂(h) = (m/n²) Σ Î_s Î_{s+h}`.
    pub fn get_centered(&self, h: [i64; 2]) -> Option<f64> {
        self.index(h).map(|i| self.centered[i])
    }

    /// All lags `h` with `‖h‖_∞ ≤ h_max`, row-major in `h`.
    pub fn lags(&self) -> impl Iterator<Item = [i64; 2]> {
        let r = self.h_max as i64;
        (-r..=r).flat_map(move |a| (-r..=r).map(move |b| [a, b]))
    }

    pub fn to_csv_string(&self, centered: bool) -> String {
        let mut out = String::from("h1,h2,gamma_hat\n");
        for h in self.lags() {
            let v = if centered { self.get_centered(h) } else { self.get(h) };
            let _ = writeln!(out, "{},{},{}", h[0], h[1], format_float(v.unwrap_or(f64::NAN)));
        }
        out
    }
}

pub fn empirical_extremogram(
    field: &LatticeField,
    threshold: &ThresholdSpec,
    h_max: usize,
) -> Result<ExtremogramEstimate> {
    let grid = indicators(field, threshold)?;
    extremogram_from_indicators(&grid, *threshold, h_max)
}

pub fn extremogram_from_indicators(
    grid: &IndicatorGrid,
    threshold: ThresholdSpec,
    h_max: usize,
) -> Result<ExtremogramEstimate> {
    let n = grid.n;
    if h_max >= n {
        return Err(Error::InvalidParameter(format!("lag radius {h_max} must be below n = {n}")));
    }
    let scale = threshold.m as f64 / (n * n) as f64;
    let r = h_max as i64;
    let side = (2 * r + 1) as usize;
    let mut uncentered = vec![0.0; side * side];
    let mut centered = vec![0.0; side * side];
    let ni = n as i64;
    for a in -r..=r {
        for b in -r..=r {
            let mut count = 0usize;
            let mut acc = 0.0;
            // s and s+h both inside {0..n}²
            for i in 0.max(-a)..ni.min(ni - a) {
                for j in 0.max(-b)..ni.min(ni - b) {
                    let s = (i * ni + j) as usize;
                    let t = ((i + a) * ni + j + b) as usize;
                    if grid.raw[s] && grid.raw[t] {
                        count += 1;
                    }
                    acc += grid.centered[s] * grid.centered[t];
                }
            }
            let idx = ((a + r) as usize) * side + (b + r) as usize;
            uncentered[idx] = scale * count as f64;
            centered[idx] = scale * acc;
        }
    }
    Ok(ExtremogramEstimate {
        threshold,
        h_max,
        uncentered,
        centered,
    })
}

/// The `n²` Fourier frequencies `(2πj₁/n, 2πj₂/n)`, `j ∈ {1, …, n}²`.
pub fn fourier_frequencies(n: usize) -> Vec<[f64; 2]> {
    let step = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for j1 in 1..=n {
        for j2 in 1..=n {
            out.push([step * j1 as f64, step * j2 as f64]);
        }
    }
    out
}

/// Position of FFT bin `k ∈ {0, …, n−1}²` in the frequency layout.
#[inline]
pub(crate) fn layout_index_of_bin(k1: usize, k2: usize, n: usize) -> usize {
    let j1 = if k1 == 0 { n } else { k1 };
    let j2 = if k2 == 0 { n } else { k2 };
    (j1 - 1) * n + (j2 - 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Periodogram {
    pub n: usize,
    pub m: u32,
    pub values: Vec<f64>,
}

impl Periodogram {
    pub fn at(&self, j1: usize, j2: usize) -> f64 {
        self.values[(j1 - 1) * self.n + (j2 - 1)]
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("j1,j2,lambda1,lambda2,value\n");
        let freqs = fourier_frequencies(self.n);
        for j1 in 1..=self.n {
            for j2 in 1..=self.n {
                let idx = (j1 - 1) * self.n + (j2 - 1);
                let w = freqs[idx];
                let _ = writeln!(
                    out,
                    "{j1},{j2},{},{},{}",
                    format_float(w[0]),
                    format_float(w[1]),
                    format_float(self.values[idx])
                );
            }
        }
        out
    }
}

/// `f̂(λ_j) = (m/n²) |Σ_t Î_t e^{iλ_j·t}|²` at every Fourier frequency, by FFT.
pub fn extremal_periodogram(grid: &IndicatorGrid, m: u32) -> Periodogram {
    let n = grid.n;
    let spectrum = fft2_real(&grid.centered, n);
    let scale = m as f64 / (n * n) as f64;
    let mut values = vec![0.0; n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            values[layout_index_of_bin(k1, k2, n)] = scale * spectrum[k1 * n + k2].norm_sqr();
        }
    }
    Periodogram { n, m, values }
}

/// Literal double sum for `f̂(ω)` at any frequency; sites are `t ∈ {1, …, n}²`.
pub fn periodogram_direct(grid: &IndicatorGrid, m: u32, omega: [f64; 2]) -> f64 {
    let n = grid.n;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let v = grid.centered[i * n + j];
            if v != 0.0 {
                let phase = omega[0] * (i + 1) as f64 + omega[1] * (j + 1) as f64;
                acc += v * Complex64::from_polar(1.0, phase);
            }
        }
    }
    m as f64 / (n * n) as f64 * acc.norm_sqr()
}
