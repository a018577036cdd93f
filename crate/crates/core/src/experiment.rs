//! Replication driver: simulate, threshold, estimate and summarize, in
//! parallel with one derived random stream per replication.
//!
//! Configuration is a flat TOML table:
//!
//! ```toml
//! model = "br-truncated"     # mma | br-truncated | br-exact
//! n = 20
//! replications = 50
//! m_values = [3, 5]
//! estimators = ["whittle"]   # whittle and/or pairwise
//! family = "br"              # br | mma
//! seed = 2024
//! hurst = 0.5
//! scale = 2.0
//! mode = "isotropic"         # isotropic | brownian-sheet
//! terms = 1000
//! ```
//!
//! Optional keys: `phi`, `k0` (MMA), `lo`, `hi` (fit bounds), `d_max`
//! (pairwise), `workers`, and the output names `raw_file`, `summary_file`,
//! `boxplot_file`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::{format_float, LatticeField};
use crate::gaussian::{VariogramMode, VariogramSpec};
use crate::model::{Family, SpectralModel};
use crate::pairwise::{pairwise_estimate, DEFAULT_DMAX};
use crate::simulate::{simulate_mma, BrSimConfig, BrSimulator, WeightKernel};
use crate::stats::RandomStream;
use crate::whittle::whittle_estimate;

pub const RAW_HEADER: &str = "replication,estimator,m,theta_hat,objective,converged,seconds,error";

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: String,
    pub n: usize,
    pub replications: usize,
    pub m_values: Vec<u32>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<String>,
    pub family: String,
    pub seed: u64,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub k0: Option<u32>,
    #[serde(default)]
    pub hurst: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub terms: Option<usize>,
    #[serde(default)]
    pub lo: Option<f64>,
    #[serde(default)]
    pub hi: Option<f64>,
    #[serde(default)]
    pub d_max: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub raw_file: Option<String>,
    #[serde(default)]
    pub summary_file: Option<String>,
    #[serde(default)]
    pub boxplot_file: Option<String>,
}

fn default_estimators() -> Vec<String> {
    vec!["whittle".to_string()]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidParameter(format!("n = {} is below 4", self.n)));
        }
        if self.m_values.is_empty() && self.estimators.iter().any(|e| e == "whittle") {
            return Err(Error::InvalidParameter("whittle needs at least one m".into()));
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m < 2) {
            return Err(Error::DegenerateThreshold(m));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidParameter("no estimators requested".into()));
        }
        for e in &self.estimators {
            if e != "whittle" && e != "pairwise" {
                return Err(Error::InvalidParameter(format!("unknown estimator `{e}`")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("bounds [{lo}, {hi}] are empty")));
            }
        }
        Ok(())
    }

    fn variogram(&self) -> Result<VariogramSpec> {
        let mode: VariogramMode = self.mode.as_deref().unwrap_or("isotropic").parse()?;
        match mode {
            VariogramMode::BrownianSheet => Ok(VariogramSpec::brownian_sheet()),
            VariogramMode::IsotropicFbm => VariogramSpec::isotropic(self.hurst.unwrap_or(0.5), self.scale.unwrap_or(2.0)),
        }
    }

    /// Family template used for fitting; its `θ` only selects default bounds.
    pub fn fit_family(&self) -> Result<Family> {
        match self.family.as_str() {
            "br" | "brown-resnick" => Ok(Family::brown_resnick(0.5, self.scale.unwrap_or(2.0))),
            "mma" | "mma-diamond" => Ok(Family::mma(self.phi.unwrap_or(0.5), self.k0.unwrap_or(5))),
            other => Err(Error::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }

    pub fn bounds(&self) -> Result<(f64, f64)> {
        let (dlo, dhi) = self.fit_family()?.default_bounds();
        Ok((self.lo.unwrap_or(dlo), self.hi.unwrap_or(dhi)))
    }
}

enum Simulator {
    Mma(WeightKernel),
    Br(BrSimulator),
}

impl Simulator {
    fn build(config: &ExperimentConfig) -> Result<Self> {
        match config.model.as_str() {
            "mma" => Ok(Simulator::Mma(WeightKernel::diamond(
                config.phi.unwrap_or(0.5),
                config.k0.unwrap_or(5),
            )?)),
            "br-truncated" => Ok(Simulator::Br(BrSimulator::new(
                config.n,
                BrSimConfig::truncated(config.variogram()?, config.terms.unwrap_or(1000)),
            )?)),
            "br-exact" => Ok(Simulator::Br(BrSimulator::new(config.n, BrSimConfig::exact(config.variogram()?))?)),
            other => Err(Error::InvalidParameter(format!("unknown model `{other}`"))),
        }
    }

    fn simulate(&self, n: usize, stream: &mut RandomStream) -> Result<LatticeField> {
        match self {
            Simulator::Mma(k) => simulate_mma(n, k, stream),
            Simulator::Br(sim) => sim.simulate(stream),
        }
    }
}

/// One estimator call. `m` is 0 for the pairwise estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct FitRecord {
    pub replication: usize,
    pub estimator: String,
    pub m: u32,
    pub theta_hat: f64,
    pub objective: f64,
    pub converged: bool,
    pub seconds: f64,
    pub error: Option<String>,
}

impl FitRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    /// False for a single value, where `std` is reported as 0.
    pub std_defined: bool,
}

/// Mean, lower median and sample standard deviation.
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::NoData);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(n - 1) / 2];
    let (std, std_defined) = if n > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        ((ss / (n - 1) as f64).sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(Summary {
        count: n,
        mean,
        median,
        std,
        std_defined,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxplotStats {
    pub whisker_low: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (`(n−1)p` positions).
fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey boxplot: whiskers reach the most extreme points within 1.5·IQR of
/// the quartiles; anything beyond is an outlier.
pub fn boxplot(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::NoData);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = interpolated_quantile(&sorted, 0.25);
    let median = interpolated_quantile(&sorted, 0.5);
    let q3 = interpolated_quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence).collect();
    let outliers = sorted.iter().copied().filter(|v| *v < lo_fence || *v > hi_fence).collect();
    Ok(BoxplotStats {
        whisker_low: inside[0],
        q1,
        median,
        q3,
        whisker_high: inside[inside.len() - 1],
        outliers,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub estimator: String,
    pub m: u32,
    pub failures: usize,
    pub summary: Option<Summary>,
    pub mean_seconds: f64,
    pub boxplot: Option<BoxplotStats>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationSummary {
    pub records: Vec<FitRecord>,
    pub groups: Vec<GroupSummary>,
}

impl ReplicationSummary {
    pub fn from_records(records: Vec<FitRecord>) -> Self {
        let mut keys: Vec<(String, u32)> = Vec::new();
        for r in &records {
            let key = (r.estimator.clone(), r.m);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let groups = keys
            .into_iter()
            .map(|(estimator, m)| {
                let rows: Vec<&FitRecord> = records.iter().filter(|r| r.estimator == estimator && r.m == m).collect();
                let ok: Vec<f64> = rows.iter().filter(|r| r.succeeded()).map(|r| r.theta_hat).collect();
                let secs: Vec<f64> = rows.iter().filter(|r| r.succeeded()).map(|r| r.seconds).collect();
                GroupSummary {
                    failures: rows.len() - ok.len(),
                    summary: summarize(&ok).ok(),
                    mean_seconds: if secs.is_empty() { f64::NAN } else { secs.iter().sum::<f64>() / secs.len() as f64 },
                    boxplot: boxplot(&ok).ok(),
                    estimator,
                    m,
                }
            })
            .collect();
        Self { records, groups }
    }

    pub fn group(&self, estimator: &str, m: u32) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.estimator == estimator && g.m == m)
    }

    pub fn estimates(&self, estimator: &str, m: u32) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.estimator == estimator && r.m == m && r.succeeded())
            .map(|r| r.theta_hat)
            .collect()
    }

    pub fn raw_csv(&self) -> String {
        let mut out = format!("{RAW_HEADER}\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.replication,
                r.estimator,
                r.m,
                format_float(r.theta_hat),
                format_float(r.objective),
                r.converged,
                format_float(r.seconds),
                r.error.as_deref().map(sanitize).unwrap_or_default()
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("estimator,m,count,failures,mean,median,std,mean_seconds,flag\n");
        for g in &self.groups {
            let (count, mean, median, std, flag) = match g.summary {
                Some(s) => (
                    s.count,
                    s.mean,
                    s.median,
                    s.std,
                    if s.std_defined { "" } else { "single value" },
                ),
                None => (0, f64::NAN, f64::NAN, f64::NAN, "no successful fits"),
            };
            let _ = writeln!(
                out,
                "{},{},{count},{},{},{},{},{},{flag}",
                g.estimator,
                g.m,
                g.failures,
                format_float(mean),
                format_float(median),
                format_float(std),
                format_float(g.mean_seconds)
            );
        }
        out
    }

    pub fn boxplot_csv(&self) -> String {
        let mut out = String::from("estimator,m,whisker_low,q1,median,q3,whisker_high,outliers\n");
        for g in &self.groups {
            if let Some(b) = &g.boxplot {
                let outliers: Vec<String> = b.outliers.iter().map(|v| format_float(*v)).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    g.estimator,
                    g.m,
                    format_float(b.whisker_low),
                    format_float(b.q1),
                    format_float(b.median),
                    format_float(b.q3),
                    format_float(b.whisker_high),
                    outliers.join(";")
                );
            }
        }
        out
    }

    /// Writes the three CSV files into `dir` under the configured names.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(config.raw_file.as_deref().unwrap_or("raw.csv")), self.raw_csv())?;
        std::fs::write(dir.join(config.summary_file.as_deref().unwrap_or("summary.csv")), self.summary_csv())?;
        std::fs::write(dir.join(config.boxplot_file.as_deref().unwrap_or("boxplot.csv")), self.boxplot_csv())?;
        Ok(())
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], " ")
}

/// Parses rows written by [`ReplicationSummary::raw_csv`].
pub fn parse_raw_csv(text: &str) -> Result<Vec<FitRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == RAW_HEADER => {}
        other => return Err(Error::Parse(format!("unexpected raw header {other:?}"))),
    }
    let bad = |line: &str| Error::Parse(format!("bad raw row `{line}`"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.splitn(8, ',').collect();
            if f.len() != 8 {
                return Err(bad(line));
            }
            Ok(FitRecord {
                replication: f[0].parse().map_err(|_| bad(line))?,
                estimator: f[1].to_string(),
                m: f[2].parse().map_err(|_| bad(line))?,
                theta_hat: f[3].parse().map_err(|_| bad(line))?,
                objective: f[4].parse().map_err(|_| bad(line))?,
                converged: f[5].parse().map_err(|_| bad(line))?,
                seconds: f[6].parse().map_err(|_| bad(line))?,
                error: (!f[7].is_empty()).then(|| f[7].to_string()),
            })
        })
        .collect()
}

/// Runs every replication on a pool of `workers` threads. Replication `r`
/// draws from `RandomStream::derive(seed, r)`, so results do not depend on
/// the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ReplicationSummary> {
    config.validate()?;
    let family = config.fit_family()?;
    let bounds = config.bounds()?;
    for theta in [bounds.0, bounds.1] {
        let report = SpectralModel::new(family.with_theta(theta))?.positivity_check(64)?;
        if !(report.min > 0.0) {
            return Err(Error::SpectralDensityNotPositive {
                value: report.min,
                w1: report.argmin[0],
                w2: report.argmin[1],
            });
        }
    }
    let simulator = Simulator::build(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let per_rep: Vec<Vec<FitRecord>> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, &simulator, family, bounds, r))
            .collect()
    });
    Ok(ReplicationSummary::from_records(per_rep.into_iter().flatten().collect()))
}

fn run_replication(
    config: &ExperimentConfig,
    simulator: &Simulator,
    family: Family,
    bounds: (f64, f64),
    replication: usize,
) -> Vec<FitRecord> {
    let mut stream = RandomStream::derive(config.seed, replication as u64);
    let mut jobs: Vec<(&str, u32)> = Vec::new();
    for e in &config.estimators {
        if e == "whittle" {
            jobs.extend(config.m_values.iter().map(|&m| ("whittle", m)));
        } else {
            jobs.push(("pairwise", 0));
        }
    }
    let failed = |estimator: &str, m: u32, msg: String| FitRecord {
        replication,
        estimator: estimator.to_string(),
        m,
        theta_hat: f64::NAN,
        objective: f64::NAN,
        converged: false,
        seconds: 0.0,
        error: Some(msg),
    };
    let field = match simulator.simulate(config.n, &mut stream) {
        Ok(f) => f,
        Err(e) => return jobs.iter().map(|&(est, m)| failed(est, m, format!("simulation: {e}"))).collect(),
    };
    jobs.iter()
        .map(|&(estimator, m)| {
            let start = Instant::now();
            let result = if estimator == "whittle" {
                whittle_estimate(&field, m, family, Some(bounds)).map(|f| (f.theta_hat, f.objective, f.converged))
            } else {
                pairwise_estimate(&field, family, Some(bounds), config.d_max.unwrap_or(DEFAULT_DMAX))
                    .map(|f| (f.theta_hat, -f.loglik, f.converged))
            };
            let seconds = start.elapsed().as_secs_f64();
            match result {
                Ok((theta_hat, objective, converged)) => FitRecord {
                    replication,
                    estimator: estimator.to_string(),
                    m,
                    theta_hat,
                    objective,
                    converged,
                    seconds,
                    error: None,
                },
                Err(e) => failed(estimator, m, e.to_string()),
            }
        })
        .collect()
}
