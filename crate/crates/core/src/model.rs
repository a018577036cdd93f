//! Parametric extremograms `γ_Θ` and extremal spectral densities
//! `f_Θ(ω) = Σ_h γ_Θ(h) cos(ωᵀh)` for the Brown–Resnick and MMA families.
//!
//! Brown–Resnick extremograms with small `H` decay too slowly for any usable
//! truncation radius. Those models are evaluated by splitting
//! `γ = γ(1 − χ) + γχ` with the smooth radial cutoff
//! `χ(r) = Φ((r − R₀)/σ)`: the near part is summed on the lattice and the far
//! part enters through Poisson summation, where only its zero-frequency
//! transform `2π ∫ r γ(r) χ(r) dr` is non-negligible at the frequencies used.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::extremal::layout_index_of_bin;
use crate::fft::fft2_real;
use crate::gaussian::Site;
use crate::simulate::WeightKernel;
use crate::stats::{log_normal_cdf, log_normal_tail, normal_tail};

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Largest radius certified for plain summation.
pub const DIRECT_RADIUS_CAP: usize = 2048;

/// Largest near-part radius for single-frequency split evaluation.
pub const SPLIT_RADIUS_BUDGET: f64 = 4096.0;

const SPLIT_KAPPA: f64 = 9.0;
const SPLIT_CENTRE: f64 = 7.5;
const SPLIT_REACH: f64 = 8.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    BrownResnick { hurst: f64, scale: f64 },
    MmaDiamond { phi: f64, k0: u32 },
}

impl Family {
    pub fn brown_resnick(hurst: f64, scale: f64) -> Self {
        Family::BrownResnick { hurst, scale }
    }

    pub fn mma(phi: f64, k0: u32) -> Self {
        Family::MmaDiamond { phi, k0 }
    }

    /// Point-kernel MMA: an iid field with `γ = 1_{h=0}` and `f ≡ 1`.
    pub fn iid() -> Self {
        Family::MmaDiamond { phi: 1.0, k0: 0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::BrownResnick { .. } => "brown-resnick",
            Family::MmaDiamond { .. } => "mma-diamond",
        }
    }

    /// The fitted coordinate: `H` or `φ`.
    pub fn theta(&self) -> f64 {
        match *self {
            Family::BrownResnick { hurst, .. } => hurst,
            Family::MmaDiamond { phi, .. } => phi,
        }
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        match *self {
            Family::BrownResnick { scale, .. } => Family::BrownResnick { hurst: theta, scale },
            Family::MmaDiamond { k0, .. } => Family::MmaDiamond { phi: theta, k0 },
        }
    }

    /// Default search interval for the fitted coordinate. The flat diamond
    /// `φ = 1` has a spectral density with zeros, so MMA intervals stay on the
    /// side of 1 where the template's `φ` lies.
    pub fn default_bounds(&self) -> (f64, f64) {
        match *self {
            Family::BrownResnick { .. } => (0.01, 0.99),
            Family::MmaDiamond { phi, .. } if phi > 1.0 => (1.05, 3.0),
            Family::MmaDiamond { .. } => (0.05, 0.95),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::BrownResnick { hurst, scale } => {
                if !(hurst > 0.0 && hurst < 1.0) {
                    return Err(Error::InvalidParameter(format!("hurst {hurst} outside (0, 1)")));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
                }
            }
            Family::MmaDiamond { phi, .. } => {
                if !(phi > 0.0 && phi.is_finite()) {
                    return Err(Error::InvalidParameter(format!("phi {phi} must be positive")));
                }
            }
        }
        Ok(())
    }
}

/// `2Φ̄(√((c/2)‖h‖₂^{2H}))`.
pub fn br_extremogram(h: Site, hurst: f64, scale: f64) -> f64 {
    let r2 = (h[0] * h[0] + h[1] * h[1]) as f64;
    br_gamma_sq(r2, hurst, (0.5 * scale).sqrt())
}

#[inline]
fn br_gamma_sq(r2: f64, hurst: f64, a: f64) -> f64 {
    if r2 == 0.0 {
        1.0
    } else {
        2.0 * normal_tail(a * r2.powf(0.5 * hurst))
    }
}

/// `Σ_s min(w(s), w(s+h)) / Σ_s w(s)`.
pub fn mma_extremogram(h: Site, kernel: &WeightKernel) -> f64 {
    let overlap: f64 = kernel
        .support()
        .map(|(s, w)| w.min(kernel.weight([s[0] + h[0], s[1] + h[1]])))
        .sum();
    overlap / kernel.total()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// `γ` vanishes for `‖h‖_∞ > radius`.
    Finite { radius: usize },
    /// `Σ_{‖h‖_∞ > radius} γ(h) ≤ tail_bound`.
    Certified { radius: usize, tail_bound: f64 },
    /// No radius up to [`DIRECT_RADIUS_CAP`] is certified.
    Split,
}

#[derive(Clone, Debug)]
pub struct SpectralModel {
    family: Family,
    tail_tol: f64,
    truncation: Truncation,
    mma_table: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub min: f64,
    pub argmin: [f64; 2],
}

impl SpectralModel {
    pub fn new(family: Family) -> Result<Self> {
        Self::with_tail_tol(family, DEFAULT_TAIL_TOL)
    }

    pub fn with_tail_tol(family: Family, tail_tol: f64) -> Result<Self> {
        family.validate()?;
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tail_tol {tail_tol} must be positive")));
        }
        match family {
            Family::BrownResnick { hurst, scale } => {
                let truncation = match br_certified_radius(hurst, scale, tail_tol) {
                    Some((radius, tail_bound)) => Truncation::Certified { radius, tail_bound },
                    None => Truncation::Split,
                };
                Ok(Self {
                    family,
                    tail_tol,
                    truncation,
                    mma_table: None,
                })
            }
            Family::MmaDiamond { phi, k0 } => {
                let kernel = WeightKernel::diamond(phi, k0)?;
                let r = 2 * kernel.radius();
                let side = (2 * r + 1) as usize;
                let mut table = vec![0.0; side * side];
                for a in -r..=r {
                    for b in -r..=r {
                        table[((a + r) as usize) * side + (b + r) as usize] = mma_extremogram([a, b], &kernel);
                    }
                }
                Ok(Self {
                    family,
                    tail_tol,
                    truncation: Truncation::Finite { radius: r as usize },
                    mma_table: Some(table),
                })
            }
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Summation radius, when one exists.
    pub fn radius(&self) -> Option<usize> {
        match self.truncation {
            Truncation::Finite { radius } | Truncation::Certified { radius, .. } => Some(radius),
            Truncation::Split => None,
        }
    }

    pub fn extremogram(&self, h: Site) -> f64 {
        match self.family {
            Family::BrownResnick { hurst, scale } => br_extremogram(h, hurst, scale),
            Family::MmaDiamond { .. } => {
                let table = self.mma_table.as_ref().expect("mma table");
                let r = self.radius().unwrap_or(0) as i64;
                if h[0].abs() > r || h[1].abs() > r {
                    return 0.0;
                }
                let side = (2 * r + 1) as usize;
                table[((h[0] + r) as usize) * side + (h[1] + r) as usize]
            }
        }
    }

    /// `f_Θ(ω)` at a single frequency, by explicit cosine sums.
    pub fn spectral_density(&self, omega: [f64; 2]) -> Result<f64> {
        if let Some(radius) = self.radius() {
            let mut acc = 0.0;
            for_each_octant(radius as f64, |a, b| {
                let g = self.extremogram([a, b]);
                if g != 0.0 {
                    acc += g * image_cosines(a, b, omega);
                }
            });
            return Ok(acc);
        }
        let (hurst, scale) = self.br_params();
        let wrapped = [wrap_angle(omega[0]), wrap_angle(omega[1])];
        let dist = wrapped[0].hypot(wrapped[1]);
        let zero = dist < 1e-12;
        let sigma = if zero { SPLIT_KAPPA / (2.0 * PI) } else { SPLIT_KAPPA / dist };
        let split = Split::new(sigma);
        if split.reach > SPLIT_RADIUS_BUDGET {
            return Err(Error::TruncationRadiusTooSmall(format!(
                "frequency {omega:?} needs near radius {:.0} beyond budget {SPLIT_RADIUS_BUDGET}",
                split.reach
            )));
        }
        let a = (0.5 * scale).sqrt();
        let mut acc = 0.0;
        for_each_octant(split.reach, |i, j| {
            let g = split.near_weight(i, j, hurst, a);
            if g != 0.0 {
                acc += g * image_cosines(i, j, omega);
            }
        });
        if zero {
            acc += split.far_zero_frequency(hurst, a)?;
        }
        Ok(acc)
    }

    /// `f_Θ(λ_j)` at all `n²` Fourier frequencies, in periodogram layout, by
    /// folding `γ` modulo `n` and one FFT. Brown–Resnick models switch to the
    /// near/far split when it needs fewer lags than the certified radius.
    pub fn spectral_density_grid(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        let split_reach = Split::for_grid(n, SPLIT_KAPPA).reach;
        match (self.family, self.radius()) {
            (Family::MmaDiamond { .. }, Some(r)) => Ok(self.grid_direct(n, r)),
            (_, Some(r)) if r as f64 <= split_reach => Ok(self.grid_direct(n, r)),
            _ => self.grid_split(n, SPLIT_KAPPA),
        }
    }

    fn grid_direct(&self, n: usize, radius: usize) -> Vec<f64> {
        let mut folded = vec![0.0; n * n];
        for_each_octant(radius as f64, |a, b| {
            let g = self.extremogram([a, b]);
            if g != 0.0 {
                fold_images(&mut folded, n, a, b, g);
            }
        });
        unfold_spectrum(&folded, n)
    }

    fn grid_split(&self, n: usize, kappa: f64) -> Result<Vec<f64>> {
        let (hurst, scale) = self.br_params();
        let a = (0.5 * scale).sqrt();
        let split = Split::for_grid(n, kappa);
        let mut folded = vec![0.0; n * n];
        for_each_octant(split.reach, |i, j| {
            let g = split.near_weight(i, j, hurst, a);
            if g != 0.0 {
                fold_images(&mut folded, n, i, j, g);
            }
        });
        let mut out = unfold_spectrum(&folded, n);
        out[n * n - 1] += split.far_zero_frequency(hurst, a)?;
        if let Some(bad) = out.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("spectral density overflowed ({bad})")));
        }
        Ok(out)
    }

    /// Minimum of `f_Θ` over the uniform grid `2πj/r`, `j ∈ {1, …, r}²`.
    pub fn positivity_check(&self, resolution: usize) -> Result<PositivityReport> {
        if resolution < 64 {
            return Err(Error::InvalidParameter(format!("resolution {resolution} below 64")));
        }
        let grid = self.spectral_density_grid(resolution)?;
        let (idx, &min) = grid
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty grid");
        let step = 2.0 * PI / resolution as f64;
        let argmin = [step * (idx / resolution + 1) as f64, step * (idx % resolution + 1) as f64];
        Ok(PositivityReport { min, argmin })
    }

    /// Flat `key=value` record, one pair per line.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family={}", self.family.name());
        match self.family {
            Family::BrownResnick { hurst, scale } => {
                let _ = writeln!(out, "hurst={hurst}");
                let _ = writeln!(out, "scale={scale}");
            }
            Family::MmaDiamond { phi, k0 } => {
                let _ = writeln!(out, "phi={phi}");
                let _ = writeln!(out, "k0={k0}");
            }
        }
        match self.truncation {
            Truncation::Finite { radius } | Truncation::Certified { radius, .. } => {
                let _ = writeln!(out, "radius={radius}");
            }
            Truncation::Split => {
                let _ = writeln!(out, "radius=split");
            }
        }
        let _ = writeln!(out, "tail_tol={}", self.tail_tol);
        out
    }

    pub fn from_record(text: &str) -> Result<Self> {
        let mut kv = std::collections::HashMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad record line `{line}`")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> { kv.get(k).ok_or_else(|| Error::Parse(format!("record lacks `{k}`"))) };
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| Error::Parse(format!("bad number for `{k}`")))
        };
        let family = match get("family")?.as_str() {
            "brown-resnick" => Family::brown_resnick(num("hurst")?, num("scale")?),
            "mma-diamond" => Family::mma(
                num("phi")?,
                get("k0")?.parse().map_err(|_| Error::Parse("bad k0".into()))?,
            ),
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        let tol = if kv.contains_key("tail_tol") { num("tail_tol")? } else { DEFAULT_TAIL_TOL };
        Self::with_tail_tol(family, tol)
    }

    fn br_params(&self) -> (f64, f64) {
        match self.family {
            Family::BrownResnick { hurst, scale } => (hurst, scale),
            Family::MmaDiamond { .. } => unreachable!("mma models always have a finite radius"),
        }
    }
}

impl FromStr for SpectralModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_record(s)
    }
}

/// Near/far split with cutoff centre `R₀ = 7.5σ` and near reach `R₀ + 8.5σ`.
struct Split {
    sigma: f64,
    centre: f64,
    reach: f64,
}

impl Split {
    /// Fourier frequencies of an `n`-grid sit at least `2π/n` from every
    /// nonzero alias, so `σ = κn/(2π)` damps those by `e^{−κ²/2}`.
    fn for_grid(n: usize, kappa: f64) -> Self {
        Self::new(kappa * n as f64 / (2.0 * PI))
    }

    fn new(sigma: f64) -> Self {
        Self {
            sigma,
            centre: SPLIT_CENTRE * sigma,
            reach: (SPLIT_CENTRE + SPLIT_REACH) * sigma,
        }
    }

    /// `γ(h)(1 − χ(‖h‖))`.
    fn near_weight(&self, i: i64, j: i64, hurst: f64, a: f64) -> f64 {
        let r2 = (i * i + j * j) as f64;
        let keep = normal_tail((r2.sqrt() - self.centre) / self.sigma);
        br_gamma_sq(r2, hurst, a) * keep
    }

    /// `2π ∫₀^∞ r γ(r) χ(r) dr`, integrated in `t = ln r`.
    fn far_zero_frequency(&self, hurst: f64, a: f64) -> Result<f64> {
        let psi = |t: f64| {
            let r = t.exp();
            2.0 * t + std::f64::consts::LN_2 + log_normal_tail(a * (hurst * t).exp())
                + log_normal_cdf((r - self.centre) / self.sigma)
        };
        let v = ((2.0 * PI).ln() + log_integral(psi, (1e-3f64).ln())).exp();
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "far-field mass overflows for hurst {hurst}, scale {}",
                2.0 * a * a
            )));
        }
        Ok(v)
    }
}

/// `ln ∫_{t₀}^∞ e^{ψ(t)} dt` for `ψ` that rises to a single peak and then
/// falls to `−∞`; infinite if the peak is not passed within the scan.
fn log_integral<F: Fn(f64) -> f64>(psi: F, t0: f64) -> f64 {
    const STEP: f64 = 0.25;
    const DROP: f64 = 60.0;
    const MAX_STEPS: usize = 400_000;
    let mut peak = psi(t0);
    let mut t = t0;
    let mut steps = 0;
    loop {
        t += STEP;
        steps += 1;
        let v = psi(t);
        if v > peak {
            peak = v;
        } else if v < peak - DROP {
            break;
        }
        if steps >= MAX_STEPS {
            return f64::INFINITY;
        }
    }
    let end = t;
    let chunk = 4.0;
    let mut lo = t0;
    let mut total = 0.0;
    while lo < end {
        let hi = (lo + chunk).min(end);
        total += quadrature::integrate(|x| (psi(x) - peak).exp(), lo, hi, 1e-16).integral;
        lo = hi;
    }
    peak + total.ln()
}

/// Smallest `R ≤ DIRECT_RADIUS_CAP` with `Σ_{k>R} 8k · 2Φ̄(a k^H) ≤ tol`,
/// where `8k` counts lags with `‖h‖_∞ = k` (all have `‖h‖₂ ≥ k`). Beyond the
/// cap the decreasing summand is bounded by its integral.
fn br_certified_radius(hurst: f64, scale: f64, tol: f64) -> Option<(usize, f64)> {
    let a = (0.5 * scale).sqrt();
    let cap = DIRECT_RADIUS_CAP as f64;
    // d/dx ln(x Φ̄(a x^H)) < (1 − a²H x^{2H}) / x
    if a * a * hurst * cap.powf(2.0 * hurst) < 1.0 {
        return None;
    }
    let log_beyond = log_integral(
        |t| (16.0f64).ln() + 2.0 * t + log_normal_tail(a * (hurst * t).exp()),
        cap.ln(),
    );
    if log_beyond > tol.ln() {
        return None;
    }
    let mut tail = log_beyond.exp();
    for k in (1..=DIRECT_RADIUS_CAP).rev() {
        let kf = k as f64;
        let term = 16.0 * kf * normal_tail(a * kf.powf(hurst));
        if tail + term > tol {
            return Some((k, tail));
        }
        tail += term;
    }
    Some((0, tail))
}

/// Visits `(a, b)` with `0 ≤ b ≤ a ≤ radius`.
fn for_each_octant<F: FnMut(i64, i64)>(radius: f64, mut f: F) {
    let r = radius.floor() as i64;
    for a in 0..=r {
        for b in 0..=a {
            f(a, b);
        }
    }
}

/// Real part of the FFT of a folded lag array, in periodogram layout.
fn unfold_spectrum(folded: &[f64], n: usize) -> Vec<f64> {
    let spectrum = fft2_real(folded, n);
    let mut out = vec![0.0; n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            out[layout_index_of_bin(k1, k2, n)] = spectrum[k1 * n + k2].re;
        }
    }
    out
}

/// Distinct lattice images of `(a, b)` under the 8 axis symmetries.
fn images(a: i64, b: i64) -> ([[i64; 2]; 8], usize) {
    let cand = [
        [a, b],
        [-a, b],
        [a, -b],
        [-a, -b],
        [b, a],
        [-b, a],
        [b, -a],
        [-b, -a],
    ];
    let mut out = [[0i64; 2]; 8];
    let mut len = 0;
    for c in cand {
        if !out[..len].contains(&c) {
            out[len] = c;
            len += 1;
        }
    }
    (out, len)
}

fn image_cosines(a: i64, b: i64, omega: [f64; 2]) -> f64 {
    let (imgs, len) = images(a, b);
    imgs[..len]
        .iter()
        .map(|h| (omega[0] * h[0] as f64 + omega[1] * h[1] as f64).cos())
        .sum()
}

fn fold_images(grid: &mut [f64], n: usize, a: i64, b: i64, g: f64) {
    let (imgs, len) = images(a, b);
    let ni = n as i64;
    for h in &imgs[..len] {
        let i = h[0].rem_euclid(ni) as usize;
        let j = h[1].rem_euclid(ni) as usize;
        grid[i * n + j] += g;
    }
}

/// Representative of `x` modulo `2π` in `(−π, π]`.
fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn br(h: f64) -> SpectralModel {
        SpectralModel::new(Family::brown_resnick(h, 2.0)).unwrap()
    }

    fn explicit_sum(model: &SpectralModel, radius: i64, omega: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for a in -radius..=radius {
            for b in -radius..=radius {
                acc += model.extremogram([a, b]) * (omega[0] * a as f64 + omega[1] * b as f64).cos();
            }
        }
        acc
    }

    #[test]
    fn br_extremogram_values() {
        assert_eq!(br_extremogram([0, 0], 0.5, 2.0), 1.0);
        assert!((br_extremogram([1, 0], 0.5, 2.0) - 0.317_310_507_862_914_1).abs() < 1e-12);
        assert!((br_extremogram([0, -1], 0.5, 2.0) - 0.317_310_507_862_914_1).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 1..200 {
            let g = br_extremogram([k, k / 3], 0.4, 1.5);
            assert!(g < prev && g > 0.0);
            prev = g;
        }
        assert!(br_extremogram([10_000, 0], 0.9, 2.0) < 1e-300);
    }

    #[test]
    fn mma_extremogram_values() {
        let k = WeightKernel::diamond(0.5, 5).unwrap();
        assert!((mma_extremogram([0, 0], &k) - 1.0).abs() < 1e-15);
        assert!((mma_extremogram([1, 0], &k) - 5.1875 / 8.125).abs() < 1e-12);
        assert_eq!(mma_extremogram([6, 5], &k), 0.0);
        assert!(mma_extremogram([5, 5], &k) > 0.0);
        let m = SpectralModel::new(Family::mma(0.5, 5)).unwrap();
        assert_eq!(m.radius(), Some(10));
        assert!((m.extremogram([1, 0]) - 0.638_461_538_461_538_4).abs() < 1e-12);
        assert_eq!(m.extremogram([11, 0]), 0.0);
    }

    #[test]
    fn extremograms_symmetric_and_bounded() {
        let models = [br(0.2), br(0.7), SpectralModel::new(Family::mma(1.5, 3)).unwrap()];
        for m in &models {
            assert_eq!(m.extremogram([0, 0]), 1.0);
            for a in -8..=8 {
                for b in -8..=8 {
                    let g = m.extremogram([a, b]);
                    assert!((0.0..=1.0).contains(&g));
                    assert!((g - m.extremogram([-a, -b])).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn iid_model_is_flat() {
        let m = SpectralModel::new(Family::iid()).unwrap();
        assert_eq!(m.spectral_density([0.3, 2.0]).unwrap(), 1.0);
        assert!(m.spectral_density_grid(7).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let p = m.positivity_check(64).unwrap();
        assert!((p.min - 1.0).abs() < 1e-15);
        assert!(m.positivity_check(32).is_err());
    }

    #[test]
    fn origin_value_is_the_lag_sum_and_the_maximum() {
        let m = br(0.5);
        let r = m.radius().unwrap() as i64;
        let total: f64 = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| [a, b]))
            .map(|h| m.extremogram(h))
            .sum();
        let f0 = m.spectral_density([0.0, 0.0]).unwrap();
        assert!((f0 - total).abs() < 1e-9);
        assert!(m.spectral_density_grid(16).unwrap().iter().all(|&v| v <= f0 + 1e-9));
    }

    #[test]
    fn radius_refinement_at_pi_pi() {
        let m = br(0.5);
        let r = match m.truncation() {
            Truncation::Certified { radius, tail_bound } => {
                assert!(tail_bound <= DEFAULT_TAIL_TOL);
                radius as i64
            }
            other => panic!("unexpected truncation {other:?}"),
        };
        let omega = [PI, PI];
        let f = m.spectral_density(omega).unwrap();
        assert!((f - explicit_sum(&m, 2 * r, omega)).abs() < 1e-8);
        for w in [[0.4, 1.9], [3.0, 0.1], [2.0 * PI, 2.0 * PI]] {
            let d = (m.spectral_density(w).unwrap() - explicit_sum(&m, 2 * r, w)).abs();
            assert!(d < m.tail_tol(), "{w:?}: {d}");
        }
    }

    #[test]
    fn grid_path_matches_cosine_path() {
        for m in [br(0.5), SpectralModel::new(Family::mma(0.5, 5)).unwrap()] {
            let n = 8;
            let grid = m.spectral_density_grid(n).unwrap();
            for (idx, w) in crate::extremal::fourier_frequencies(n).into_iter().enumerate() {
                assert!((grid[idx] - m.spectral_density(w).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn folded_transform_is_real() {
        let m = br(0.4);
        let n = 9;
        let mut folded = vec![0.0; n * n];
        for_each_octant(m.radius().unwrap() as f64, |a, b| fold_images(&mut folded, n, a, b, m.extremogram([a, b])));
        assert!(fft2_real(&folded, n).iter().all(|c| c.im.abs() < 1e-12));
    }

    #[test]
    fn split_agrees_with_certified_direct_sum() {
        let m = br(0.3);
        let r = m.radius().expect("certified at H = 0.3");
        let n = 12;
        let direct = m.grid_direct(n, r);
        let split = m.grid_split(n, SPLIT_KAPPA).unwrap();
        for (d, s) in direct.iter().zip(&split) {
            assert!((d - s).abs() < 1e-9 * d.abs().max(1.0), "{d} vs {s}");
        }
    }

    #[test]
    fn split_is_stable_under_kappa_refinement() {
        let m = br(0.1);
        assert_eq!(m.truncation(), Truncation::Split);
        let n = 10;
        let a = m.grid_split(n, SPLIT_KAPPA).unwrap();
        let b = m.grid_split(n, 12.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
        }
        let single = m.spectral_density([2.0 * PI * 3.0 / 10.0, 2.0 * PI * 7.0 / 10.0]).unwrap();
        assert!((single - a[2 * n + 6]).abs() < 1e-9);
        let origin = m.spectral_density([2.0 * PI, 2.0 * PI]).unwrap();
        assert!((origin / a[n * n - 1] - 1.0).abs() < 1e-9);
        assert!(matches!(m.spectral_density([1e-4, 0.0]), Err(Error::TruncationRadiusTooSmall(_))));
    }

    #[test]
    fn positive_on_fourier_grid_across_hurst() {
        for k in 1..=9 {
            let h = k as f64 / 10.0;
            let grid = br(h).spectral_density_grid(20).unwrap();
            let min = grid.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.0, "H = {h}: min {min}");
        }
    }

    #[test]
    fn positivity_golden_values() {
        let p = br(0.5).positivity_check(128).unwrap();
        // golden value from an independent double-precision lattice sum over |h|∞ ≤ 120
        assert!((p.min - 0.530_704_179_604_722_6).abs() < 1e-9, "min {}", p.min);
        assert!((p.argmin[0] - PI).abs() < 1e-12 && (p.argmin[1] - PI).abs() < 1e-12);
        let q = SpectralModel::new(Family::mma(1.5, 5)).unwrap().positivity_check(64).unwrap();
        assert!(q.min > 0.0, "min {}", q.min);
        // flat kernel: f = |Σ_D e^{iωs}|² / |D| vanishes on curves
        let flat = SpectralModel::new(Family::mma(1.0, 5)).unwrap().positivity_check(128).unwrap();
        assert!(flat.min < 1e-6 && flat.min < 1e-3 * q.min, "min {} vs {}", flat.min, q.min);
    }

    #[test]
    fn identifiable_ratios() {
        let n = 16;
        let range = |a: &SpectralModel, b: &SpectralModel| {
            let (fa, fb) = (a.spectral_density_grid(n).unwrap(), b.spectral_density_grid(n).unwrap());
            let r: Vec<f64> = fa.iter().zip(&fb).map(|(x, y)| x / y).collect();
            let max = r.iter().cloned().fold(f64::MIN, f64::max);
            let min = r.iter().cloned().fold(f64::MAX, f64::min);
            (max - min) / max
        };
        assert!(range(&br(0.3), &br(0.5)) > 1e-6);
        assert!(range(&br(0.5), &br(0.7)) > 1e-6);
        let mma = |phi| SpectralModel::new(Family::mma(phi, 5)).unwrap();
        assert!(range(&mma(0.5), &mma(1.0)) > 1e-6);
        assert!(range(&mma(1.0), &mma(1.5)) > 1e-6);
    }

    #[test]
    fn record_round_trip() {
        for m in [br(0.35), SpectralModel::new(Family::mma(0.5, 5)).unwrap(), br(0.05)] {
            let text = m.to_record();
            assert!(text.starts_with("family="));
            let back: SpectralModel = text.parse().unwrap();
            assert_eq!(back.family(), m.family());
            assert_eq!(back.truncation(), m.truncation());
        }
        assert!(SpectralModel::from_record("family=other").is_err());
    }
}
