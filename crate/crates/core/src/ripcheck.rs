//! Monte-Carlo estimates of how far normalized Hamming distance between codes
//! strays from the reference metric on the sparse sphere.
//!
//! The supremum over all pairs of `s`-sparse unit vectors cannot be computed,
//! so every [`DeviationReport`] is a lower bound on it, obtained from pairs
//! produced by a [`PairSampler`]. Sampling strategies cover typical pairs as
//! well as the extreme scales (nearly equal, nearly antipodal) where the
//! embedding is hardest.

use std::f64::consts::PI;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::embedding::{embed, embed_batch, hamming, hamming_count, NoiseVector, SensingMatrix};
use crate::error::{invalid, Result};
use crate::geometry::{
    antipodal_gap, distorted_distance, geodesic_distance, sample_sparse_unit, NoiseModel, UnitVector,
};
use crate::par::{self, Execution};
use crate::stochastics::{fit_loglog_slope, RngStream, SlopeFit};

/// Rotation scale for near-antipodal pairs: `d(x, y) >= 1 - NEAR_ANTIPODAL_SCALE`.
pub const NEAR_ANTIPODAL_SCALE: f64 = 0.01;

/// Epsilon used by [`PairSampler::mixed`] for its epsilon-close share.
pub const MIXED_EPSILON: f64 = 0.1;

const LANE_PAIRS: u64 = 0;
const LANE_MATRIX: u64 = 1;
const LANE_NOISE: u64 = 2;

fn lane(purpose: u64, m: usize) -> u64 {
    (m as u64) << 2 | purpose
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum PairStrategy {
    /// Two independent sparse draws.
    IidUniform,
    /// Same support, independent coefficients.
    SharedSupport,
    /// Non-overlapping supports, so the pair is orthogonal. Needs `2s <= n`.
    DisjointSupport,
    /// `y` is `-x` rotated inside the support of `x` by at most
    /// `pi * NEAR_ANTIPODAL_SCALE`.
    NearAntipodal,
    /// `y` is `x` rotated inside its support by an angle uniform in
    /// `(0, pi * epsilon]`, so `d(x, y) <= epsilon`.
    EpsilonClose { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    strategies: Vec<PairStrategy>,
    n: usize,
    s: usize,
    count: usize,
}

impl PairSampler {
    /// Pair `i` is drawn with `strategies[i % strategies.len()]`.
    pub fn new(strategies: Vec<PairStrategy>, n: usize, s: usize, count: usize) -> Result<Self> {
        if count == 0 {
            return invalid("pair sampler: count must be at least 1");
        }
        if strategies.is_empty() {
            return invalid("pair sampler: at least one strategy is required");
        }
        if s == 0 || s > n {
            return invalid(format!("pair sampler: need 1 <= s <= n, got s={s}, n={n}"));
        }
        for st in &strategies {
            match *st {
                PairStrategy::DisjointSupport if 2 * s > n => {
                    return invalid(format!("disjoint supports need 2s <= n, got s={s}, n={n}"));
                }
                PairStrategy::EpsilonClose { epsilon } if !(epsilon > 0.0 && epsilon < 1.0) => {
                    return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
                }
                _ => {}
            }
        }
        Ok(PairSampler {
            strategies,
            n,
            s,
            count,
        })
    }

    pub fn single(strategy: PairStrategy, n: usize, s: usize, count: usize) -> Result<Self> {
        PairSampler::new(vec![strategy], n, s, count)
    }

    /// Round-robin over every strategy that applies to `(n, s)`.
    pub fn mixed(n: usize, s: usize, count: usize) -> Result<Self> {
        let mut all = vec![PairStrategy::IidUniform, PairStrategy::SharedSupport];
        if 2 * s <= n {
            all.push(PairStrategy::DisjointSupport);
        }
        all.push(PairStrategy::NearAntipodal);
        all.push(PairStrategy::EpsilonClose {
            epsilon: MIXED_EPSILON,
        });
        PairSampler::new(all, n, s, count)
    }

    pub fn strategies(&self) -> &[PairStrategy] {
        &self.strategies
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn sample(&self, stream: &mut RngStream) -> Result<Vec<(UnitVector, UnitVector)>> {
        (0..self.count)
            .map(|i| self.sample_one(self.strategies[i % self.strategies.len()], stream))
            .collect()
    }

    fn sample_one(&self, strategy: PairStrategy, st: &mut RngStream) -> Result<(UnitVector, UnitVector)> {
        let (n, s) = (self.n, self.s);
        match strategy {
            PairStrategy::IidUniform => Ok((sample_sparse_unit(st, n, s)?, sample_sparse_unit(st, n, s)?)),
            PairStrategy::SharedSupport => {
                let x = sample_sparse_unit(st, n, s)?;
                let support = x.support().expect("sampled vectors carry a support").to_vec();
                let y = gaussian_on(st, n, &support)?;
                Ok((x, y))
            }
            PairStrategy::DisjointSupport => {
                let both = index::sample(st, n, 2 * s).into_vec();
                let x = gaussian_on(st, n, &both[..s])?;
                let y = gaussian_on(st, n, &both[s..])?;
                Ok((x, y))
            }
            PairStrategy::NearAntipodal => {
                let x = sample_sparse_unit(st, n, s)?;
                let theta = PI * NEAR_ANTIPODAL_SCALE * st.uniform_open0();
                let y = rotate_within_support(st, &x, theta)?.negated();
                Ok((x, y))
            }
            PairStrategy::EpsilonClose { epsilon } => {
                let x = sample_sparse_unit(st, n, s)?;
                let theta = PI * epsilon * st.uniform_open0();
                let y = rotate_within_support(st, &x, theta)?;
                Ok((x, y))
            }
        }
    }
}

fn gaussian_on(st: &mut RngStream, n: usize, support: &[usize]) -> Result<UnitVector> {
    loop {
        let mut c = vec![0.0; n];
        for &j in support {
            c[j] = st.standard_normal();
        }
        if c.iter().any(|v| *v != 0.0) {
            let mut v = UnitVector::normalized(c)?;
            v = UnitVector::with_support(v.coords().to_vec(), support.to_vec())?;
            return Ok(v);
        }
    }
}

/// `cos(theta) x + sin(theta) u` for a random unit `u` orthogonal to `x` on the
/// same support. With a one-element support there is no such `u` and `x` is
/// returned unchanged.
fn rotate_within_support(st: &mut RngStream, x: &UnitVector, theta: f64) -> Result<UnitVector> {
    let support = x.support().expect("sampled vectors carry a support").to_vec();
    if support.len() < 2 {
        return Ok(x.clone());
    }
    let u = loop {
        let mut u = vec![0.0; x.dim()];
        for &j in &support {
            u[j] = st.standard_normal();
        }
        let proj: f64 = support.iter().map(|&j| u[j] * x.coords()[j]).sum();
        for &j in &support {
            u[j] -= proj * x.coords()[j];
        }
        let norm = support.iter().map(|&j| u[j] * u[j]).sum::<f64>().sqrt();
        if norm > 1e-8 {
            u.iter_mut().for_each(|v| *v /= norm);
            break u;
        }
    };
    let (sin, cos) = theta.sin_cos();
    let y: Vec<f64> = x.coords().iter().zip(&u).map(|(a, b)| cos * a + sin * b).collect();
    let y = UnitVector::normalized(y)?;
    UnitVector::with_support(y.coords().to_vec(), support)
}

/// Which metric on the sphere the Hamming distance is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Geodesic,
    Distorted,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Geodesic => "geodesic",
            Metric::Distorted => "distorted",
        }
    }

    pub fn distance(self, x: &UnitVector, y: &UnitVector, noise: NoiseModel) -> Result<f64> {
        match self {
            Metric::Geodesic => geodesic_distance(x, y),
            Metric::Distorted => distorted_distance(x, y, noise),
        }
    }
}

/// Summary of `|hamming - metric|` over one batch of sampled pairs.
///
/// `sup_dev` is a lower bound on the supremum over the whole sparse sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub sup_dev: f64,
    pub mean_dev: f64,
    pub q95_dev: f64,
    pub pairs: usize,
    pub m: usize,
    pub sigma: f64,
    pub metric: Metric,
    pub seed: u64,
    pub stream_id: u64,
    /// For noiseless maps: whether `hamming(Φ(-x), Φy) + hamming(Φx, Φy) = 1`
    /// held exactly on the first pair. `None` when noisy or when a measurement
    /// of `x` was exactly zero.
    pub antipode_symmetric: Option<bool>,
}

impl DeviationReport {
    pub const IS_LOWER_BOUND: bool = true;
}

/// Normalized Hamming distance for each pair, embedding every signal once.
pub fn pair_hamming(
    a: &SensingMatrix,
    eta: Option<&NoiseVector>,
    pairs: &[(UnitVector, UnitVector)],
    exec: Execution,
) -> Result<Vec<f64>> {
    let signals: Vec<UnitVector> = pairs
        .iter()
        .flat_map(|(x, y)| [x.clone(), y.clone()])
        .collect();
    let codes = embed_batch(a, eta, &signals, exec)?;
    codes
        .chunks(2)
        .map(|c| hamming(&c[0], &c[1]))
        .collect()
}

/// Mean, nearest-rank 95th percentile and max of a non-empty sample.
pub(crate) fn summarize(devs: &[f64]) -> (f64, f64, f64) {
    let mut sorted = devs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    (mean, sorted[rank - 1], sorted[sorted.len() - 1])
}

fn check_noise_pairing(a: &SensingMatrix, eta: Option<&NoiseVector>, noise: NoiseModel) -> Result<()> {
    match eta {
        None if !noise.is_noiseless() => invalid("noise vector required when sigma > 0"),
        Some(_) if noise.is_noiseless() => invalid("noise vector given but sigma = 0"),
        Some(e) if e.noise() != noise => invalid(format!(
            "noise vector sigma {} differs from model sigma {}",
            e.noise().sigma(),
            noise.sigma()
        )),
        Some(e) if e.len() != a.m() => invalid("noise vector length differs from measurement count"),
        _ => Ok(()),
    }
}

/// `hamming(Φ(-x), Φy) + hamming(Φx, Φy) == 1`, checked on raw counts.
///
/// Returns `None` when some measurement of `x` is exactly zero, since then
/// `Φ(-x)` is not the complement of `Φx`.
pub fn antipode_complement_holds(a: &SensingMatrix, x: &UnitVector, y: &UnitVector) -> Result<Option<bool>> {
    if (0..a.m()).any(|k| x.dot_dense(a.row(k)) == 0.0) {
        return Ok(None);
    }
    let cx = embed(a, x)?;
    let cnx = embed(a, &x.negated())?;
    let cy = embed(a, y)?;
    Ok(Some(
        hamming_count(&cnx, &cy)? + hamming_count(&cx, &cy)? == a.m() as u64,
    ))
}

/// Samples pairs from `stream`, embeds them once, and reports the deviation
/// of Hamming distance from `metric`.
pub fn deviation(
    a: &SensingMatrix,
    eta: Option<&NoiseVector>,
    sampler: &PairSampler,
    noise: NoiseModel,
    metric: Metric,
    stream: &mut RngStream,
    exec: Execution,
) -> Result<DeviationReport> {
    if sampler.n() != a.n() {
        return invalid(format!(
            "sampler dimension {} differs from matrix width {}",
            sampler.n(),
            a.n()
        ));
    }
    check_noise_pairing(a, eta, noise)?;
    let (seed, stream_id) = (stream.seed(), stream.stream_id());
    let pairs = sampler.sample(stream)?;
    deviation_on_pairs(a, eta, &pairs, noise, metric, exec, (seed, stream_id))
}

fn deviation_on_pairs(
    a: &SensingMatrix,
    eta: Option<&NoiseVector>,
    pairs: &[(UnitVector, UnitVector)],
    noise: NoiseModel,
    metric: Metric,
    exec: Execution,
    (seed, stream_id): (u64, u64),
) -> Result<DeviationReport> {
    if pairs.is_empty() {
        return invalid("deviation needs at least one pair");
    }
    let ham = pair_hamming(a, eta, pairs, exec)?;
    let devs = pairs
        .iter()
        .zip(&ham)
        .map(|((x, y), h)| Ok((h - metric.distance(x, y, noise)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let (mean_dev, q95_dev, sup_dev) = summarize(&devs);
    let antipode_symmetric = match eta {
        None => antipode_complement_holds(a, &pairs[0].0, &pairs[0].1)?,
        Some(_) => None,
    };
    Ok(DeviationReport {
        sup_dev,
        mean_dev,
        q95_dev,
        pairs: pairs.len(),
        m: a.m(),
        sigma: noise.sigma(),
        metric,
        seed,
        stream_id,
        antipode_symmetric,
    })
}

/// Necessary-condition check of the RIP: the sampled supremum is at most `delta`.
pub fn rip_holds(report: &DeviationReport, delta: f64) -> bool {
    report.sup_dev <= delta
}

/// `ceil(C · delta^-2 · (ln(2/eps) + s ln(n/s)))`.
pub fn required_measurements(delta: f64, eps: f64, s: usize, n: usize, c: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if s == 0 || s >= n {
        return invalid(format!("need 1 <= s < n, got s={s}, n={n}"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("constant C must be positive, got {c}"));
    }
    let bound = c / (delta * delta) * ((2.0 / eps).ln() + s as f64 * (n as f64 / s as f64).ln());
    Ok(bound.ceil() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub noise: NoiseModel,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub sampler: PairSampler,
    pub metric: Metric,
    pub seed: u64,
    #[serde(default)]
    pub exec: Execution,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub m: usize,
    pub mean_sup: f64,
    pub max_sup: f64,
    /// One report per trial, in trial order.
    pub reports: Vec<DeviationReport>,
}

fn check_grid(m_grid: &[usize], trials: usize) -> Result<()> {
    if m_grid.is_empty() {
        return invalid("measurement grid must not be empty");
    }
    if m_grid[0] == 0 || m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("measurement grid must be positive and strictly ascending");
    }
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    Ok(())
}

/// The stream owned by one trial.
pub fn trial_stream(seed: u64, trial: usize) -> RngStream {
    RngStream::new(seed, trial as u64)
}

/// Pairs are drawn once per trial and reused for every `m`; each `(m, trial)`
/// cell gets its own fresh matrix and noise realization.
fn run_cells<R, F>(
    m_grid: &[usize],
    trials: usize,
    sampler: &PairSampler,
    noise: NoiseModel,
    seed: u64,
    exec: Execution,
    cell: F,
) -> Result<Vec<Vec<R>>>
where
    R: Send,
    F: Fn(&SensingMatrix, Option<&NoiseVector>, &[(UnitVector, UnitVector)], (u64, u64)) -> Result<R>
        + Sync
        + Send,
{
    let pairs = par::try_map_range(exec, trials, |t| {
        sampler.sample(&mut trial_stream(seed, t).fork(LANE_PAIRS))
    })?;
    let cells = par::try_map_range(exec, m_grid.len() * trials, |i| {
        let (mi, t) = (i / trials, i % trials);
        let m = m_grid[mi];
        let base = trial_stream(seed, t);
        let a = SensingMatrix::gaussian(&mut base.fork(lane(LANE_MATRIX, m)), m, sampler.n())?;
        let eta = if noise.is_noiseless() {
            None
        } else {
            Some(NoiseVector::sample(&mut base.fork(lane(LANE_NOISE, m)), m, noise)?)
        };
        // Inner loops stay sequential; the cells already saturate the pool.
        let _ = exec;
        cell(&a, eta.as_ref(), &pairs[t], (seed, t as u64))
    })?;
    let mut cells = cells.into_iter();
    Ok(m_grid
        .iter()
        .map(|_| cells.by_ref().take(trials).collect())
        .collect())
}

/// Deviation reports across a grid of measurement counts.
pub fn sweep_m(config: &SweepConfig) -> Result<Vec<SweepPoint>> {
    check_grid(&config.m_grid, config.trials)?;
    let noise = config.noise;
    let metric = config.metric;
    let grid = run_cells(
        &config.m_grid,
        config.trials,
        &config.sampler,
        noise,
        config.seed,
        config.exec,
        |a, eta, pairs, ids| deviation_on_pairs(a, eta, pairs, noise, metric, Execution::Sequential, ids),
    )?;
    Ok(config
        .m_grid
        .iter()
        .zip(grid)
        .map(|(&m, reports)| {
            let sups: Vec<f64> = reports.iter().map(|r| r.sup_dev).collect();
            SweepPoint {
                m,
                mean_sup: sups.iter().sum::<f64>() / sups.len() as f64,
                max_sup: sups.iter().copied().fold(0.0, f64::max),
                reports,
            }
        })
        .collect())
}

/// Log-log fit of mean sup-deviation against `m`.
pub fn scaling_fit(points: &[SweepPoint]) -> Result<SlopeFit> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.m as f64, p.mean_sup)).collect();
    fit_loglog_slope(&xy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorConfig {
    pub noise: NoiseModel,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    pub sampler: PairSampler,
    pub seed: u64,
    /// Tolerance around the antipodal gap.
    pub slack: f64,
    #[serde(default)]
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorCell {
    pub m: usize,
    pub trial: usize,
    pub geodesic_sup: f64,
    pub distorted_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPoint {
    pub m: usize,
    pub mean_geodesic_sup: f64,
    pub mean_distorted_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorReport {
    pub floor: f64,
    pub slack: f64,
    pub cells: Vec<FloorCell>,
    pub points: Vec<FloorPoint>,
    /// Every mean geodesic sup-deviation is at least `floor - slack`.
    pub above_floor: bool,
    /// The mean geodesic sup-deviation at the largest `m` is within `slack` of the floor.
    pub converges_to_floor: bool,
    /// The distorted-metric deviation at the largest `m` is below that at the smallest.
    pub distorted_decays: bool,
}

impl FloorReport {
    pub fn passed(&self) -> bool {
        self.above_floor && self.converges_to_floor && self.distorted_decays
    }
}

/// Measures the deviation of noisy codes from both metrics on the same pairs.
///
/// Against the geodesic metric the deviation cannot vanish: it settles at the
/// antipodal gap of the noise level, while against the distorted metric it
/// keeps shrinking with `m`.
pub fn geodesic_floor_check(config: &FloorConfig) -> Result<FloorReport> {
    let noise = config.noise;
    if noise.is_noiseless() {
        return invalid("geodesic floor check needs sigma > 0; the floor is 0 otherwise");
    }
    if !config
        .sampler
        .strategies()
        .contains(&PairStrategy::NearAntipodal)
    {
        return invalid("geodesic floor check needs near-antipodal pairs in the sampler");
    }
    if !(config.slack >= 0.0) {
        return invalid("slack must be non-negative");
    }
    check_grid(&config.m_grid, config.trials)?;
    let grid = run_cells(
        &config.m_grid,
        config.trials,
        &config.sampler,
        noise,
        config.seed,
        config.exec,
        |a, eta, pairs, _| {
            let ham = pair_hamming(a, eta, pairs, Execution::Sequential)?;
            let mut geo: f64 = 0.0;
            let mut dis: f64 = 0.0;
            for ((x, y), h) in pairs.iter().zip(&ham) {
                geo = geo.max((h - geodesic_distance(x, y)?).abs());
                dis = dis.max((h - distorted_distance(x, y, noise)?).abs());
            }
            Ok((geo, dis))
        },
    )?;
    let floor = antipodal_gap(noise);
    let mut cells = Vec::new();
    let mut points = Vec::new();
    for (&m, row) in config.m_grid.iter().zip(&grid) {
        for (trial, &(g, d)) in row.iter().enumerate() {
            cells.push(FloorCell {
                m,
                trial,
                geodesic_sup: g,
                distorted_sup: d,
            });
        }
        let k = row.len() as f64;
        points.push(FloorPoint {
            m,
            mean_geodesic_sup: row.iter().map(|c| c.0).sum::<f64>() / k,
            mean_distorted_sup: row.iter().map(|c| c.1).sum::<f64>() / k,
        });
    }
    let last = points.last().expect("grid is non-empty");
    let first = &points[0];
    Ok(FloorReport {
        floor,
        slack: config.slack,
        above_floor: points
            .iter()
            .all(|p| p.mean_geodesic_sup >= floor - config.slack),
        converges_to_floor: (last.mean_geodesic_sup - floor).abs() <= config.slack,
        distorted_decays: points.len() < 2 || last.mean_distorted_sup < first.mean_distorted_sup,
        cells,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::binomial_band;

    #[test]
    fn required_measurement_examples() {
        assert_eq!(required_measurements(0.1, 0.05, 5, 1000, 1.0).unwrap(), 3019);
        let a = required_measurements(0.1, 0.05, 5, 1000, 1.0).unwrap() as f64;
        let b = required_measurements(0.2, 0.05, 5, 1000, 1.0).unwrap() as f64;
        assert!((a / 4.0 - b).abs() <= 1.0);
        assert!(required_measurements(0.1, 0.05, 99, 100, 1.0).unwrap() > 0);
        assert!(required_measurements(0.1, 0.05, 1, 100, 1.0).unwrap() > 0);
        assert!(required_measurements(0.0, 0.05, 1, 100, 1.0).is_err());
        assert!(required_measurements(0.1, 1.0, 1, 100, 1.0).is_err());
        assert!(required_measurements(0.1, 0.5, 100, 100, 1.0).is_err());
        assert!(required_measurements(0.1, 0.5, 0, 100, 1.0).is_err());
    }

    fn report(sup: f64) -> DeviationReport {
        DeviationReport {
            sup_dev: sup,
            mean_dev: sup / 2.0,
            q95_dev: sup,
            pairs: 1,
            m: 1,
            sigma: 0.0,
            metric: Metric::Geodesic,
            seed: 0,
            stream_id: 0,
            antipode_symmetric: None,
        }
    }

    #[test]
    fn rip_holds_examples() {
        assert!(rip_holds(&report(0.09), 0.1));
        assert!(!rip_holds(&report(0.11), 0.1));
        assert!(rip_holds(&report(1.0), 1.0));
    }

    #[test]
    fn sampler_validation_and_contracts() {
        assert!(PairSampler::mixed(10, 2, 0).is_err());
        assert!(PairSampler::single(PairStrategy::DisjointSupport, 5, 3, 4).is_err());
        assert!(PairSampler::single(PairStrategy::EpsilonClose { epsilon: 1.0 }, 5, 3, 4).is_err());
        assert!(PairSampler::new(vec![], 5, 3, 4).is_err());

        let sampler = PairSampler::mixed(30, 4, 200).unwrap();
        let pairs = sampler.sample(&mut RngStream::new(1, 0)).unwrap();
        assert_eq!(pairs.len(), 200);
        for (i, (x, y)) in pairs.iter().enumerate() {
            assert!(x.sparsity() <= 4 && y.sparsity() <= 4);
            let d = geodesic_distance(x, y).unwrap();
            match sampler.strategies()[i % sampler.strategies().len()] {
                PairStrategy::DisjointSupport => assert!(x.dot(y).unwrap() == 0.0),
                PairStrategy::NearAntipodal => assert!(d >= 1.0 - NEAR_ANTIPODAL_SCALE - 1e-12),
                PairStrategy::EpsilonClose { epsilon } => assert!(d <= epsilon + 1e-12),
                PairStrategy::SharedSupport => assert_eq!(x.support(), y.support()),
                PairStrategy::IidUniform => {}
            }
        }
    }

    #[test]
    fn orthogonal_pair_in_the_plane() {
        let x = UnitVector::basis(2, 0).unwrap();
        let y = UnitVector::basis(2, 1).unwrap();
        let a = SensingMatrix::gaussian(&mut RngStream::new(2, 0), 100_000, 2).unwrap();
        let h = pair_hamming(&a, None, &[(x, y)], Execution::Parallel).unwrap()[0];
        assert!((h - 0.5).abs() <= 0.007, "hamming {h}");
    }

    #[test]
    fn antipodal_pair_under_noise() {
        let noise = NoiseModel::new(1.0).unwrap();
        let x = UnitVector::basis(3, 0).unwrap();
        let pairs = vec![(x.clone(), x.negated())];
        let m = 100_000;
        let mut st = RngStream::new(3, 0);
        let a = SensingMatrix::gaussian(&mut st, m, 3).unwrap();
        let eta = NoiseVector::sample(&mut st, m, noise).unwrap();
        let ids = (3, 0);
        let dist = deviation_on_pairs(&a, Some(&eta), &pairs, noise, Metric::Distorted, Execution::Parallel, ids)
            .unwrap();
        let (lo, hi) = binomial_band(0.5, m as u64, 4.0).unwrap();
        assert!(dist.sup_dev <= hi - 0.5 && dist.sup_dev <= 0.5 - lo);
        let geo = deviation_on_pairs(&a, Some(&eta), &pairs, noise, Metric::Geodesic, Execution::Parallel, ids)
            .unwrap();
        assert!((geo.sup_dev - antipodal_gap(noise)).abs() <= hi - 0.5);
    }

    #[test]
    fn deviation_validates_inputs() {
        let mut st = RngStream::new(4, 0);
        let a = SensingMatrix::gaussian(&mut st, 64, 8).unwrap();
        let sampler = PairSampler::mixed(8, 2, 10).unwrap();
        let noise = NoiseModel::new(0.5).unwrap();
        let eta = NoiseVector::sample(&mut st, 64, noise).unwrap();
        let run = |eta: Option<&NoiseVector>, noise| {
            deviation(&a, eta, &sampler, noise, Metric::Distorted, &mut RngStream::new(0, 0), Execution::Parallel)
        };
        assert!(run(None, noise).is_err());
        assert!(run(Some(&eta), NoiseModel::noiseless()).is_err());
        assert!(run(Some(&eta), NoiseModel::new(0.6).unwrap()).is_err());
        assert!(run(Some(&eta), noise).is_ok());
        let other = PairSampler::mixed(9, 2, 10).unwrap();
        assert!(deviation(&a, None, &other, NoiseModel::noiseless(), Metric::Geodesic, &mut st, Execution::Parallel)
            .is_err());
        assert!(deviation_on_pairs(&a, None, &[], NoiseModel::noiseless(), Metric::Geodesic, Execution::Parallel, (0, 0))
            .is_err());
    }

    #[test]
    fn report_ordering_and_caching_are_consistent() {
        let mut st = RngStream::new(5, 0);
        let a = SensingMatrix::gaussian(&mut st, 500, 16).unwrap();
        let sampler = PairSampler::mixed(16, 3, 300).unwrap();
        let r = deviation(&a, None, &sampler, NoiseModel::noiseless(), Metric::Geodesic, &mut RngStream::new(9, 1), Execution::Parallel)
            .unwrap();
        assert!(r.mean_dev <= r.q95_dev && r.q95_dev <= r.sup_dev && r.sup_dev <= 1.0);
        assert_eq!(r.antipode_symmetric, Some(true));
        assert_eq!((r.seed, r.stream_id), (9, 1));

        // Recompute every pair directly, embedding each signal afresh.
        let pairs = sampler.sample(&mut RngStream::new(9, 1)).unwrap();
        let devs: Vec<f64> = pairs
            .iter()
            .map(|(x, y)| {
                let h = hamming(&embed(&a, x).unwrap(), &embed(&a, y).unwrap()).unwrap();
                (h - geodesic_distance(x, y).unwrap()).abs()
            })
            .collect();
        let (mean, q95, sup) = summarize(&devs);
        assert_eq!((mean, q95, sup), (r.mean_dev, r.q95_dev, r.sup_dev));
    }

    #[test]
    fn antipode_complement_identity() {
        let mut st = RngStream::new(6, 0);
        let a = SensingMatrix::gaussian(&mut st, 300, 10).unwrap();
        for _ in 0..50 {
            let x = sample_sparse_unit(&mut st, 10, 3).unwrap();
            let y = sample_sparse_unit(&mut st, 10, 3).unwrap();
            assert_eq!(antipode_complement_holds(&a, &x, &y).unwrap(), Some(true));
        }
        let id = SensingMatrix::identity(3).unwrap();
        let e0 = UnitVector::basis(3, 0).unwrap();
        assert_eq!(antipode_complement_holds(&id, &e0, &e0).unwrap(), None);
    }

    #[test]
    fn lifting_makes_noisy_and_noiseless_statistics_match() {
        // Noiseless pair with correlation c versus noisy pair whose lifted
        // correlation is c: mean Hamming distance must agree within a joint band.
        let sigma = 1.0;
        let noise = NoiseModel::new(sigma).unwrap();
        let c: f64 = 0.6;
        let rho = c * (1.0 + sigma * sigma) - sigma * sigma; // lifted correlation = c
        let plane = |r: f64| {
            (
                UnitVector::basis(2, 0).unwrap(),
                UnitVector::new(vec![r, (1.0 - r * r).sqrt()]).unwrap(),
            )
        };
        let m = 2000;
        let trials = 200;
        let (mut clean, mut noisy) = (0.0, 0.0);
        for t in 0..trials {
            let mut st = RngStream::new(77, t);
            let a = SensingMatrix::gaussian(&mut st, m, 2).unwrap();
            clean += pair_hamming(&a, None, &[plane(c)], Execution::Sequential).unwrap()[0];
            let eta = NoiseVector::sample(&mut st, m, noise).unwrap();
            noisy += pair_hamming(&a, Some(&eta), &[plane(rho)], Execution::Sequential).unwrap()[0];
        }
        let total = (m * trials as usize) as f64;
        let p = crate::geometry::disagreement_probability(c).unwrap();
        let joint = 4.0 * (2.0 * p * (1.0 - p) / total).sqrt();
        assert!(((clean - noisy) / trials as f64).abs() <= joint);
    }

    #[test]
    fn sweep_is_deterministic_across_execution_modes() {
        let sampler = PairSampler::mixed(32, 3, 40).unwrap();
        let mut cfg = SweepConfig {
            noise: NoiseModel::new(0.5).unwrap(),
            m_grid: vec![64, 128, 256],
            trials: 3,
            sampler,
            metric: Metric::Distorted,
            seed: 42,
            exec: Execution::Parallel,
        };
        let par = sweep_m(&cfg).unwrap();
        cfg.exec = Execution::Sequential;
        let seq = sweep_m(&cfg).unwrap();
        assert_eq!(par, seq);
        assert_eq!(par.len(), 3);
        assert!(par.iter().all(|p| p.reports.len() == 3 && p.mean_sup <= p.max_sup));
        assert!(par[0].reports.iter().all(|r| r.m == 64 && r.antipode_symmetric.is_none()));
    }

    #[test]
    fn sweep_validation() {
        let sampler = PairSampler::mixed(32, 3, 4).unwrap();
        let mut cfg = SweepConfig {
            noise: NoiseModel::noiseless(),
            m_grid: vec![],
            trials: 1,
            sampler,
            metric: Metric::Geodesic,
            seed: 0,
            exec: Execution::Sequential,
        };
        assert!(sweep_m(&cfg).is_err());
        cfg.m_grid = vec![128, 64];
        assert!(sweep_m(&cfg).is_err());
        cfg.m_grid = vec![64];
        cfg.trials = 0;
        assert!(sweep_m(&cfg).is_err());
    }

    #[test]
    fn floor_check_rejects_noiseless_and_missing_antipodes() {
        let cfg = FloorConfig {
            noise: NoiseModel::noiseless(),
            m_grid: vec![64],
            trials: 1,
            sampler: PairSampler::single(PairStrategy::NearAntipodal, 8, 2, 4).unwrap(),
            seed: 0,
            slack: 0.02,
            exec: Execution::Sequential,
        };
        assert!(geodesic_floor_check(&cfg).is_err());
        let cfg = FloorConfig {
            noise: NoiseModel::new(1.0).unwrap(),
            sampler: PairSampler::single(PairStrategy::IidUniform, 8, 2, 4).unwrap(),
            ..cfg
        };
        assert!(geodesic_floor_check(&cfg).is_err());
    }

    #[test]
    fn floor_for_small_sigma() {
        let g = antipodal_gap(NoiseModel::new(0.1).unwrap());
        assert!((g - 0.0634).abs() < 1e-3);
    }
}
