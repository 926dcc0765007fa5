//! JSON experiment configurations, one per subcommand.
//!
//! Every field has a default, so `{}` is a valid config; unknown keys are
//! rejected. Range checks run before any sampling.

use std::path::PathBuf;

use onebit_rip::ripcheck::{Metric, PairSampler, PairStrategy};
use onebit_rip::vctool::{SetClass, MAX_POINTS};
use onebit_rip::NoiseModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn bad<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

fn check_sigma(sigma: f64) -> Result<NoiseModel, CliError> {
    NoiseModel::new(sigma).map_err(|e| CliError::Config(e.to_string()))
}

fn check_grid(name: &str, grid: &[usize]) -> Result<(), CliError> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return bad(format!("{name} must be non-empty, positive and strictly ascending"));
    }
    Ok(())
}

fn check_sparsity(n: usize, s: usize) -> Result<(), CliError> {
    if s == 0 || s > n {
        return bad(format!("need 1 <= s <= n, got s={s}, n={n}"));
    }
    Ok(())
}

fn check_positive(name: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        return bad(format!("{name} must be at least 1"));
    }
    Ok(())
}

fn geometric_grid(from: u32, to: u32) -> Vec<usize> {
    (from..=to).map(|k| 1usize << k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricTableConfig {
    pub rho_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for MetricTableConfig {
    fn default() -> Self {
        MetricTableConfig {
            rho_grid: (0..=20).map(|i| -1.0 + 0.1 * f64::from(i)).collect(),
            sigma_grid: vec![0.0, 0.5, 1.0, 2.0],
            seed: 0,
            out: None,
        }
    }
}

impl MetricTableConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.rho_grid.is_empty() || self.sigma_grid.is_empty() {
            return bad("rho_grid and sigma_grid must be non-empty");
        }
        if let Some(r) = self.rho_grid.iter().find(|r| !(r.abs() <= 1.0)) {
            return bad(format!("correlation {r} outside [-1, 1]"));
        }
        for &s in &self.sigma_grid {
            check_sigma(s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedMcConfig {
    /// Ambient dimension; the pair lives in the span of the first two axes.
    pub n: usize,
    pub rho: f64,
    pub m: usize,
    pub sigma: f64,
    pub trials: usize,
    /// Half-width of the binomial band in standard deviations.
    pub z: f64,
    /// Fraction of trials that must land inside the band.
    pub min_pass_fraction: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for EmbedMcConfig {
    fn default() -> Self {
        EmbedMcConfig {
            n: 8,
            rho: 0.0,
            m: 100_000,
            sigma: 0.0,
            trials: 20,
            z: 4.0,
            min_pass_fraction: 0.95,
            seed: 0,
            out: None,
        }
    }
}

impl EmbedMcConfig {
    pub fn validate(&self) -> Result<NoiseModel, CliError> {
        if self.n < 2 {
            return bad("n must be at least 2");
        }
        if !(self.rho.abs() <= 1.0) {
            return bad(format!("rho {} outside [-1, 1]", self.rho));
        }
        check_positive("m", self.m)?;
        check_positive("trials", self.trials)?;
        if !(self.z > 0.0 && self.z.is_finite()) {
            return bad("z must be positive");
        }
        if !(0.0..=1.0).contains(&self.min_pass_fraction) {
            return bad("min_pass_fraction must lie in [0, 1]");
        }
        check_sigma(self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RipSweepConfig {
    pub n: usize,
    pub s: usize,
    pub sigma: f64,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub pairs: usize,
    /// Pair strategies used round-robin; all applicable ones when absent.
    pub strategies: Option<Vec<PairStrategy>>,
    pub metric: Metric,
    pub slope_band: [f64; 2],
    pub min_r_squared: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for RipSweepConfig {
    fn default() -> Self {
        RipSweepConfig {
            n: 128,
            s: 4,
            sigma: 0.0,
            m_grid: geometric_grid(8, 14),
            trials: 20,
            pairs: 500,
            strategies: None,
            metric: Metric::Distorted,
            slope_band: [-0.6, -0.4],
            min_r_squared: 0.95,
            seed: 0,
            out: None,
        }
    }
}

fn sampler(strategies: &Option<Vec<PairStrategy>>, n: usize, s: usize, pairs: usize) -> Result<PairSampler, CliError> {
    check_sparsity(n, s)?;
    check_positive("pairs", pairs)?;
    let sampler = match strategies {
        Some(list) => PairSampler::new(list.clone(), n, s, pairs),
        None => PairSampler::mixed(n, s, pairs),
    };
    sampler.map_err(|e| CliError::Config(e.to_string()))
}

impl RipSweepConfig {
    pub fn validate(&self) -> Result<(NoiseModel, PairSampler), CliError> {
        check_grid("m_grid", &self.m_grid)?;
        if self.m_grid.len() < 2 {
            return bad("m_grid needs at least two values for a slope fit");
        }
        check_positive("trials", self.trials)?;
        let [lo, hi] = self.slope_band;
        if !(lo <= hi) {
            return bad("slope_band must be [low, high] with low <= high");
        }
        if !(0.0..=1.0).contains(&self.min_r_squared) {
            return bad("min_r_squared must lie in [0, 1]");
        }
        let noise = check_sigma(self.sigma)?;
        Ok((noise, sampler(&self.strategies, self.n, self.s, self.pairs)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoisyFloorConfig {
    pub n: usize,
    pub s: usize,
    pub sigma: f64,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub pairs: usize,
    /// Must include `near-antipodal`, which is what exposes the floor.
    pub strategies: Option<Vec<PairStrategy>>,
    /// Tolerance around the antipodal gap.
    pub slack: f64,
    /// Optional ceiling on the mean distorted deviation at the largest `m`.
    pub distorted_max: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for NoisyFloorConfig {
    fn default() -> Self {
        NoisyFloorConfig {
            n: 128,
            s: 4,
            sigma: 1.0,
            m_grid: geometric_grid(10, 14),
            trials: 5,
            pairs: 200,
            strategies: Some(vec![PairStrategy::NearAntipodal]),
            slack: 0.02,
            distorted_max: None,
            seed: 0,
            out: None,
        }
    }
}

impl NoisyFloorConfig {
    pub fn validate(&self) -> Result<(NoiseModel, PairSampler), CliError> {
        check_grid("m_grid", &self.m_grid)?;
        check_positive("trials", self.trials)?;
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return bad("slack must be non-negative");
        }
        let noise = check_sigma(self.sigma)?;
        if noise.is_noiseless() {
            return bad("noisy-floor needs sigma > 0");
        }
        let sampler = sampler(&self.strategies, self.n, self.s, self.pairs)?;
        if !sampler.strategies().contains(&PairStrategy::NearAntipodal) {
            return bad("noisy-floor needs the near-antipodal pair strategy");
        }
        Ok((noise, sampler))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VcConfig {
    pub task: VcTask,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for VcConfig {
    fn default() -> Self {
        VcConfig {
            task: VcTask::ShatterBasis { s_max: 6 },
            seed: 0,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VcTask {
    /// Shatter the standard basis of `R^s` with `s`-sparse hemispheres.
    ShatterBasis { s_max: usize },
    /// Random `(s + 1)`-point sets in `R^s`; none may be shattered.
    RandomSets { s_grid: Vec<usize>, probes: usize },
    /// Lower-bound search over every `(n, s)` with `s <= n <= n_max`, `s <= s_max`.
    Search {
        n_max: usize,
        s_max: usize,
        budget: u64,
        classes: Vec<SetClass>,
    },
    /// Lambert `W_{-1}` grid on `(-1/e + offset, -offset)`.
    Lambert { points: usize, offset: f64 },
    /// Greedy wedge packing counts across separation levels.
    Packing {
        n: usize,
        s: usize,
        sigma: f64,
        t_grid: Vec<f64>,
        candidates: usize,
        empirical_points: usize,
    },
}

impl VcConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.task {
            VcTask::ShatterBasis { s_max } => {
                if *s_max == 0 || *s_max > MAX_POINTS {
                    return bad(format!("s_max must lie in 1..={MAX_POINTS}"));
                }
            }
            VcTask::RandomSets { s_grid, probes } => {
                check_positive("probes", *probes)?;
                if s_grid.is_empty() || s_grid.iter().any(|&s| s == 0 || s + 1 > MAX_POINTS) {
                    return bad(format!("s_grid entries must lie in 1..{MAX_POINTS}"));
                }
            }
            VcTask::Search {
                n_max,
                s_max,
                budget,
                classes,
            } => {
                check_positive("n_max", *n_max)?;
                check_positive("s_max", *s_max)?;
                if *budget == 0 {
                    return bad("budget must be at least 1");
                }
                if classes.is_empty() {
                    return bad("classes must be non-empty");
                }
            }
            VcTask::Lambert { points, offset } => {
                check_positive("points", *points)?;
                if !(*offset > 0.0 && *offset < 0.1) {
                    return bad("offset must lie in (0, 0.1)");
                }
            }
            VcTask::Packing {
                n,
                s,
                sigma,
                t_grid,
                candidates,
                empirical_points,
            } => {
                check_sparsity(*n, *s)?;
                check_sigma(*sigma)?;
                check_positive("candidates", *candidates)?;
                check_positive("empirical_points", *empirical_points)?;
                if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                    return bad("t_grid entries must lie in (0, 1)");
                }
            }
        }
        Ok(())
    }
}
