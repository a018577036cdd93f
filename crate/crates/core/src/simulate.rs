//! Lattice samples of max-moving averages and Brown–Resnick fields.

use crate::error::{Error, Result};
use crate::field::{LatticeField, Provenance};
use crate::gaussian::{build_sampler, grid_sites, GaussianSampler, Site, VariogramMode, VariogramSpec};
use crate::stats::{unit_frechet_sample, RandomStream};

/// Finite nonnegative weight function on the lattice, stored densely on the
/// box `[-radius, radius]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightKernel {
    radius: i64,
    dense: Vec<f64>,
    total: f64,
}

impl WeightKernel {
    pub fn new(points: &[(Site, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("kernel support is empty".into()));
        }
        if let Some((s, w)) = points.iter().find(|(_, w)| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(format!("weight {w} at {s:?} is not a nonnegative real")));
        }
        let radius = points
            .iter()
            .map(|(s, _)| s[0].abs().max(s[1].abs()))
            .max()
            .unwrap_or(0);
        let side = (2 * radius + 1) as usize;
        let mut dense = vec![0.0; side * side];
        for (s, w) in points {
            let idx = ((s[0] + radius) as usize) * side + (s[1] + radius) as usize;
            dense[idx] += w;
        }
        let total: f64 = dense.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter("kernel total weight must be positive".into()));
        }
        Ok(Self { radius, dense, total })
    }

    /// `w(s) = φ^{|s₁|+|s₂|}` on the diamond `|s₁| + |s₂| ≤ k0`.
    pub fn diamond(phi: f64, k0: u32) -> Result<Self> {
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi {phi} must be positive")));
        }
        let k0 = k0 as i64;
        let mut points = Vec::new();
        for a in -k0..=k0 {
            for b in -k0..=k0 {
                let d = a.abs() + b.abs();
                if d <= k0 {
                    points.push(([a, b], phi.powi(d as i32)));
                }
            }
        }
        Self::new(&points)
    }

    /// `w₀ = Σ w(s)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Half-width of the bounding box of the support.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn weight(&self, s: Site) -> f64 {
        let r = self.radius;
        if s[0].abs() > r || s[1].abs() > r {
            return 0.0;
        }
        let side = (2 * r + 1) as usize;
        self.dense[((s[0] + r) as usize) * side + (s[1] + r) as usize]
    }

    /// Points with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        let r = self.radius;
        let side = (2 * r + 1) as usize;
        self.dense.iter().enumerate().filter(|(_, w)| **w > 0.0).map(move |(idx, w)| {
            ([(idx / side) as i64 - r, (idx % side) as i64 - r], *w)
        })
    }
}

pub fn mma_weight_diamond(phi: f64, k0: u32) -> Result<WeightKernel> {
    WeightKernel::diamond(phi, k0)
}

/// `X_t = max_s w(s) Z_{t−s}` with iid unit Fréchet noise drawn on the grid
/// dilated by the kernel's bounding box, so no noise is wrapped.
pub fn simulate_mma(n: usize, kernel: &WeightKernel, stream: &mut RandomStream) -> Result<LatticeField> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let seed = stream.seed();
    let r = kernel.radius() as usize;
    let side = n + 2 * r;
    let noise: Vec<f64> = (0..side * side).map(|_| unit_frechet_sample(stream)).collect();
    let support: Vec<(Site, f64)> = kernel.support().collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut best = 0.0f64;
            for (s, w) in &support {
                // noise index of t − s, shifted by r into the dilated grid
                let a = (i + r) as i64 - s[0];
                let b = (j + r) as i64 - s[1];
                let z = noise[a as usize * side + b as usize];
                best = best.max(w * z);
            }
            values[i * n + j] = best;
        }
    }
    LatticeField::new(n, values, Provenance::new("mma", seed).with("w0", kernel.total()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BrMode {
    /// `sup` over the first `terms` Poisson points only.
    Truncated { terms: usize },
    /// Extremal-functions perfect simulation.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrSimConfig {
    pub spec: VariogramSpec,
    pub mode: BrMode,
}

impl BrSimConfig {
    pub fn truncated(spec: VariogramSpec, terms: usize) -> Self {
        Self {
            spec,
            mode: BrMode::Truncated { terms },
        }
    }

    pub fn exact(spec: VariogramSpec) -> Self {
        Self {
            spec,
            mode: BrMode::Exact,
        }
    }

    fn validate(&self) -> Result<()> {
        if let BrMode::Truncated { terms } = self.mode {
            if terms == 0 {
                return Err(Error::InvalidParameter("truncation needs at least one term".into()));
            }
        }
        Ok(())
    }
}

/// Spectral functions are `exp(√2 W_s − 2δ(s))`, so a pair at lag `h` is
/// Hüsler–Reiss with `a = 2√δ(h)` and extremogram `2Φ̄(√δ(h))`.
const SPECTRAL_GAIN: f64 = std::f64::consts::SQRT_2;

/// Cap on Gaussian draws per exact field.
pub const EXACT_DRAW_BUDGET: usize = 1_000_000;

/// Brown–Resnick simulator with a prebuilt Gaussian factorization, reusable
/// across replications.
///
/// Isotropic grids have their corner at the origin, so the corner value of
/// `W` is pinned at zero. Sheet grids start at `(1, 1)` since the sheet
/// vanishes on the axes.
#[derive(Clone, Debug)]
pub struct BrSimulator {
    n: usize,
    config: BrSimConfig,
    sampler: GaussianSampler,
    half_variance: Vec<f64>,
}

impl BrSimulator {
    pub fn new(n: usize, config: BrSimConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        config.validate()?;
        let origin = match config.spec.mode {
            VariogramMode::IsotropicFbm => 0,
            VariogramMode::BrownianSheet => 1,
        };
        let sites = grid_sites(n, origin);
        let sampler = build_sampler(&sites, config.spec, 0.0)?;
        let half_variance = sites.iter().map(|&s| 0.5 * config.spec.covariance(s, s)).collect();
        Ok(Self {
            n,
            config,
            sampler,
            half_variance,
        })
    }

    pub fn config(&self) -> &BrSimConfig {
        &self.config
    }

    pub fn simulate(&self, stream: &mut RandomStream) -> Result<LatticeField> {
        let seed = stream.seed();
        let (values, model) = match self.config.mode {
            BrMode::Truncated { terms } => (self.truncated(terms, stream), "br-truncated"),
            BrMode::Exact => (self.exact(stream)?, "br-exact"),
        };
        let spec = &self.config.spec;
        let mut prov = Provenance::new(model, seed)
            .with("mode", spec.mode.as_str())
            .with("hurst", spec.hurst)
            .with("scale", spec.scale);
        if let BrMode::Truncated { terms } = self.config.mode {
            prov = prov.with("terms", terms);
        }
        LatticeField::new(self.n, values, prov)
    }

    /// Values of `max_{j ≤ J} Γ_j^{-1} exp(√2 W_s^{(j)} − 2δ(s))`. Draws are
    /// interleaved `(E_j, W^{(j)})`, so runs with a common seed share prefixes.
    fn truncated(&self, terms: usize, stream: &mut RandomStream) -> Vec<f64> {
        let k = self.n * self.n;
        let mut out = vec![0.0f64; k];
        let mut w = vec![0.0; k];
        let mut scratch = vec![0.0; self.sampler.dimension()];
        let mut gamma = 0.0;
        for _ in 0..terms {
            gamma += stream.standard_exponential();
            self.sampler.sample_into(stream, &mut w, &mut scratch);
            let inv = 1.0 / gamma;
            for ((o, &ws), &d) in out.iter_mut().zip(&w).zip(&self.half_variance) {
                let v = inv * (SPECTRAL_GAIN * ws - 2.0 * d).exp();
                if v > *o {
                    *o = v;
                }
            }
        }
        out
    }

    /// Sequential extremal-functions construction: at each site, Poisson
    /// points are scanned until `1/Γ` drops below the running value there;
    /// each spectral function normalised to 1 at that site is kept only if
    /// it does not exceed the running maximum at any earlier site.
    fn exact(&self, stream: &mut RandomStream) -> Result<Vec<f64>> {
        let k = self.n * self.n;
        let sites = self.sampler.sites();
        let spec = self.config.spec;
        let mut z = vec![0.0f64; k];
        let mut w = vec![0.0; k];
        let mut log_y = vec![0.0; k];
        let mut scratch = vec![0.0; self.sampler.dimension()];
        let mut draws = 0usize;

        // increment variances by lag for the isotropic case
        let n = self.n as i64;
        let lag_side = (2 * n - 1) as usize;
        let iso_table: Option<Vec<f64>> = match spec.mode {
            VariogramMode::IsotropicFbm => {
                let mut t = vec![0.0; lag_side * lag_side];
                for a in -(n - 1)..n {
                    for b in -(n - 1)..n {
                        t[((a + n - 1) as usize) * lag_side + (b + n - 1) as usize] =
                            spec.increment_variance([a, b], [0, 0]);
                    }
                }
                Some(t)
            }
            VariogramMode::BrownianSheet => None,
        };
        let inc_var = |s: usize, t: usize| -> f64 {
            match &iso_table {
                Some(table) => {
                    let a = sites[s][0] - sites[t][0] + n - 1;
                    let b = sites[s][1] - sites[t][1] + n - 1;
                    table[a as usize * lag_side + b as usize]
                }
                None => spec.increment_variance(sites[s], sites[t]),
            }
        };

        for site in 0..k {
            let mut gamma = stream.standard_exponential();
            while 1.0 / gamma > z[site] {
                draws += 1;
                if draws > EXACT_DRAW_BUDGET {
                    return Err(Error::ExactBudgetExceeded { draws: draws - 1 });
                }
                self.sampler.sample_into(stream, &mut w, &mut scratch);
                let log_gamma = gamma.ln();
                let anchor = w[site];
                let shift = |s: usize| SPECTRAL_GAIN * (w[s] - anchor) - inc_var(s, site) - log_gamma;
                let accepted = (0..site).all(|i| shift(i).exp() < z[i]);
                if accepted {
                    for s in 0..k {
                        log_y[s] = shift(s);
                    }
                    for (zs, ly) in z.iter_mut().zip(&log_y) {
                        let v = ly.exp();
                        if v > *zs {
                            *zs = v;
                        }
                    }
                }
                gamma += stream.standard_exponential();
            }
        }
        Ok(z)
    }
}

pub fn simulate_br_truncated(n: usize, config: &BrSimConfig, stream: &mut RandomStream) -> Result<LatticeField> {
    if !matches!(config.mode, BrMode::Truncated { .. }) {
        return Err(Error::InvalidParameter("config is not in truncated mode".into()));
    }
    BrSimulator::new(n, *config)?.simulate(stream)
}

pub fn simulate_br_exact(n: usize, config: &BrSimConfig, stream: &mut RandomStream) -> Result<LatticeField> {
    if config.mode != BrMode::Exact {
        return Err(Error::InvalidParameter("config is not in exact mode".into()));
    }
    BrSimulator::new(n, *config)?.simulate(stream)
}
