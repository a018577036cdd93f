//! Mean-zero Gaussian fields with stationary increments on lattice sites.
//!
//! These are the driving fields `W` of the Brown–Resnick construction. The
//! sampler factors the dense covariance once and is then shared read-only
//! across replications.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::stats::RandomStream;

/// A point (or lag) of the integer lattice.
pub type Site = [i64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariogramMode {
    /// Isotropic fractional field, `cov(W_s, W_t) = (c/2)(‖s‖^{2H} + ‖t‖^{2H} − ‖s−t‖^{2H})`.
    IsotropicFbm,
    /// Two-sided standard Brownian sheet, `δ(s) = |s₁ s₂| / 2`. `H` and `c` are ignored.
    BrownianSheet,
}

impl VariogramMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariogramMode::IsotropicFbm => "isotropic",
            VariogramMode::BrownianSheet => "brownian-sheet",
        }
    }
}

impl std::str::FromStr for VariogramMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isotropic" | "isotropic-fbm" => Ok(VariogramMode::IsotropicFbm),
            "brownian-sheet" | "sheet" => Ok(VariogramMode::BrownianSheet),
            other => Err(Error::Parse(format!("unknown variogram mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariogramSpec {
    pub hurst: f64,
    pub scale: f64,
    pub mode: VariogramMode,
}

impl VariogramSpec {
    pub fn isotropic(hurst: f64, scale: f64) -> Result<Self> {
        Self::new(hurst, scale, VariogramMode::IsotropicFbm)
    }

    pub fn brownian_sheet() -> Self {
        Self {
            hurst: 0.5,
            scale: 2.0,
            mode: VariogramMode::BrownianSheet,
        }
    }

    pub fn new(hurst: f64, scale: f64, mode: VariogramMode) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(Error::InvalidParameter(format!("Hurst exponent {hurst} not in (0, 1]")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {scale} must be positive")));
        }
        Ok(Self { hurst, scale, mode })
    }

    pub fn covariance(&self, s: Site, t: Site) -> f64 {
        match self.mode {
            VariogramMode::IsotropicFbm => {
                let p = 2.0 * self.hurst;
                0.5 * self.scale
                    * (norm(s).powf(p) + norm(t).powf(p) - norm([s[0] - t[0], s[1] - t[1]]).powf(p))
            }
            VariogramMode::BrownianSheet => {
                (brownian_cov(s[0], t[0]) * brownian_cov(s[1], t[1])) as f64
            }
        }
    }

    /// `var(W_s − W_t)`.
    pub fn increment_variance(&self, s: Site, t: Site) -> f64 {
        match self.mode {
            VariogramMode::IsotropicFbm => {
                self.scale * norm([s[0] - t[0], s[1] - t[1]]).powf(2.0 * self.hurst)
            }
            VariogramMode::BrownianSheet => {
                self.covariance(s, s) + self.covariance(t, t) - 2.0 * self.covariance(s, t)
            }
        }
    }
}

fn norm(s: Site) -> f64 {
    ((s[0] * s[0] + s[1] * s[1]) as f64).sqrt()
}

/// Covariance of two-sided Brownian motion.
fn brownian_cov(a: i64, b: i64) -> i64 {
    if a.signum() == b.signum() {
        a.abs().min(b.abs())
    } else {
        0
    }
}

/// `δ(s) = var(W_s) / 2`.
pub fn delta(s: Site, spec: &VariogramSpec) -> f64 {
    0.5 * spec.covariance(s, s)
}

/// Dense Cholesky sampler for `W` at a fixed set of sites.
///
/// Sites with zero variance (the origin, and the axes of a Brownian sheet)
/// are pinned to exactly zero and left out of the factorization.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    sites: Vec<Site>,
    spec: VariogramSpec,
    free: Vec<usize>,
    /// Row-major packed lower triangle of `L`, row `i` holds `i + 1` entries.
    factor: Vec<f64>,
    jitter: f64,
}

const JITTER_FLOOR: f64 = 1e-12;
const JITTER_CAP: f64 = 1e-6;

pub fn build_sampler(sites: &[Site], spec: VariogramSpec, jitter: f64) -> Result<GaussianSampler> {
    let mut seen = std::collections::HashSet::with_capacity(sites.len());
    if let Some(dup) = sites.iter().find(|s| !seen.insert(**s)) {
        return Err(Error::InvalidParameter(format!("duplicate site {dup:?}")));
    }
    if !(jitter >= 0.0) {
        return Err(Error::InvalidParameter("jitter must be nonnegative".into()));
    }
    let free: Vec<usize> = (0..sites.len())
        .filter(|&i| spec.covariance(sites[i], sites[i]) > 0.0)
        .collect();
    let d = free.len();
    let cov = DMatrix::from_fn(d, d, |i, j| spec.covariance(sites[free[i]], sites[free[j]]));
    let max_diag = (0..d).map(|i| cov[(i, i)]).fold(0.0, f64::max);

    let mut added = jitter;
    let mut next = (JITTER_FLOOR * max_diag).max(jitter);
    let chol = loop {
        let mut m = cov.clone();
        for i in 0..d {
            m[(i, i)] += added;
        }
        if let Some(c) = m.cholesky() {
            break c;
        }
        if next > JITTER_CAP * max_diag.max(1.0) {
            return Err(Error::CovarianceNotPsd { jitter: added });
        }
        added = next;
        next *= 2.0;
    };

    let l = chol.l();
    let mut factor = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in 0..=i {
            factor.push(l[(i, j)]);
        }
    }
    Ok(GaussianSampler {
        sites: sites.to_vec(),
        spec,
        free,
        factor,
        jitter: added,
    })
}

impl GaussianSampler {
    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn spec(&self) -> &VariogramSpec {
        &self.spec
    }

    /// Diagonal loading actually used for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Number of sites that carry randomness.
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// `L[i][j]` over the free sites (zero above the diagonal).
    pub fn factor_entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.factor[i * (i + 1) / 2 + j]
        }
    }

    pub fn free_sites(&self) -> impl Iterator<Item = Site> + '_ {
        self.free.iter().map(|&i| self.sites[i])
    }

    /// One joint draw, in site order.
    pub fn sample(&self, stream: &mut RandomStream) -> Vec<f64> {
        let mut out = vec![0.0; self.sites.len()];
        let mut z = vec![0.0; self.free.len()];
        self.sample_into(stream, &mut out, &mut z);
        out
    }

    /// Allocation-free variant of [`sample`](Self::sample). `out` has one
    /// slot per site, `scratch` one per free site.
    pub fn sample_into(&self, stream: &mut RandomStream, out: &mut [f64], scratch: &mut [f64]) {
        let d = self.free.len();
        debug_assert_eq!(out.len(), self.sites.len());
        debug_assert_eq!(scratch.len(), d);
        for z in scratch.iter_mut() {
            *z = stream.standard_normal();
        }
        out.fill(0.0);
        let mut offset = 0;
        for (i, &site) in self.free.iter().enumerate() {
            let row = &self.factor[offset..offset + i + 1];
            out[site] = dot(row, &scratch[..i + 1]);
            offset += i + 1;
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// All sites of an `n × n` block with lower-left corner `(origin, origin)`,
/// in row-major order.
pub fn grid_sites(n: usize, origin: i64) -> Vec<Site> {
    let mut sites = Vec::with_capacity(n * n);
    for i in 0..n as i64 {
        for j in 0..n as i64 {
            sites.push([origin + i, origin + j]);
        }
    }
    sites
}
