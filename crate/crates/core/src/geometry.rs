//! Points on the unit sphere and the two metrics compared by the harness.
//!
//! Distances are normalized so antipodal points sit at distance 1:
//! `d(x, y) = arccos(<x, y>) / pi`. With additive Gaussian noise of standard
//! deviation `sigma` the natural target is the distorted distance
//! `d_sigma(x, y) = arccos((<x, y> + sigma^2) / (1 + sigma^2)) / pi`, which is
//! exactly the geodesic distance between the lifted points `lift(x, sigma)`
//! and `lift(y, sigma)` one dimension up.

use std::f64::consts::PI;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stochastics::RngStream;

/// Allowed deviation of `||x||_2` from 1.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Allowed overshoot of a correlation beyond `[-1, 1]` before it is clamped.
pub const CORRELATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
    // Sorted, deduplicated. Coordinates vanish exactly off this set.
    support: Option<Vec<usize>>,
}

impl UnitVector {
    /// Wraps `coords`, rejecting anything not on the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        let norm = l2(&coords);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return invalid(format!("vector norm {norm} is not 1 within {NORM_TOLERANCE}"));
        }
        Ok(UnitVector {
            coords,
            support: None,
        })
    }

    /// Divides `coords` by its Euclidean norm.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        check_finite(&coords)?;
        let norm = l2(&coords);
        if norm == 0.0 {
            return invalid("cannot normalize the zero vector");
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        UnitVector::new(coords)
    }

    /// Unit vector with an explicit support; coordinates off `support` must be 0.
    pub fn with_support(coords: Vec<f64>, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&j) = support.iter().find(|&&j| j >= coords.len()) {
            return invalid(format!("support index {j} out of range for dim {}", coords.len()));
        }
        let mut on = vec![false; coords.len()];
        support.iter().for_each(|&j| on[j] = true);
        if coords.iter().zip(&on).any(|(&c, &inside)| !inside && c != 0.0) {
            return invalid("coordinates must vanish off the declared support");
        }
        let mut v = UnitVector::new(coords)?;
        v.support = Some(support);
        Ok(v)
    }

    /// The `j`-th standard basis vector of `R^n`.
    pub fn basis(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return invalid(format!("basis index {j} out of range for dim {n}"));
        }
        let mut c = vec![0.0; n];
        c[j] = 1.0;
        UnitVector::with_support(c, vec![j])
    }

    pub(crate) fn from_parts_unchecked(coords: Vec<f64>, support: Option<Vec<usize>>) -> Self {
        debug_assert!((l2(&coords) - 1.0).abs() <= NORM_TOLERANCE);
        UnitVector { coords, support }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    /// Number of nonzero coordinates.
    pub fn sparsity(&self) -> usize {
        self.coords.iter().filter(|c| **c != 0.0).count()
    }

    /// Indices worth visiting in a dot product: the support when declared,
    /// otherwise every coordinate.
    pub(crate) fn active(&self) -> ActiveIndices<'_> {
        match &self.support {
            Some(s) => ActiveIndices::Listed(s.iter()),
            None => ActiveIndices::All(0..self.coords.len()),
        }
    }

    /// Dot product with a dense slice of the same length, visiting only the
    /// active coordinates in ascending order.
    pub(crate) fn dot_dense(&self, row: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in self.active() {
            acc += row[j] * self.coords[j];
        }
        acc
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        same_dim(self, other)?;
        Ok(self.dot_dense(&other.coords))
    }

    /// The antipode `-x`.
    pub fn negated(&self) -> UnitVector {
        UnitVector {
            coords: self.coords.iter().map(|c| -c).collect(),
            support: self.support.clone(),
        }
    }
}

pub(crate) enum ActiveIndices<'a> {
    Listed(std::slice::Iter<'a, usize>),
    All(std::ops::Range<usize>),
}

impl Iterator for ActiveIndices<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            ActiveIndices::Listed(it) => it.next().copied(),
            ActiveIndices::All(r) => r.next(),
        }
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return invalid("vector must have at least one coordinate");
    }
    if v.iter().any(|c| !c.is_finite()) {
        return invalid("vector has non-finite coordinates");
    }
    Ok(())
}

fn same_dim(x: &UnitVector, y: &UnitVector) -> Result<()> {
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    Ok(())
}

/// Standard deviation of the additive white noise applied per measurement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseModel {
    sigma: f64,
}

impl NoiseModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return invalid(format!("noise sigma must be finite and >= 0, got {sigma}"));
        }
        Ok(NoiseModel { sigma })
    }

    pub fn noiseless() -> Self {
        NoiseModel { sigma: 0.0 }
    }

    pub fn sigma(self) -> f64 {
        self.sigma
    }

    pub fn is_noiseless(self) -> bool {
        self.sigma == 0.0
    }

    /// The correlation of the lifted points given the original correlation.
    pub fn lifted_correlation(self, rho: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (rho + s2) / (1.0 + s2)
    }
}

impl TryFrom<f64> for NoiseModel {
    type Error = crate::Error;

    fn try_from(sigma: f64) -> Result<Self> {
        NoiseModel::new(sigma)
    }
}

impl From<NoiseModel> for f64 {
    fn from(n: NoiseModel) -> f64 {
        n.sigma
    }
}

/// Draws an `s`-sparse unit vector: uniform support, Gaussian coefficients.
pub fn sample_sparse_unit(stream: &mut RngStream, n: usize, s: usize) -> Result<UnitVector> {
    if s == 0 || s > n {
        return invalid(format!("sparsity must satisfy 1 <= s <= n, got s={s}, n={n}"));
    }
    let mut support = index::sample(stream, n, s).into_vec();
    support.sort_unstable();
    loop {
        let mut coords = vec![0.0; n];
        for &j in &support {
            coords[j] = stream.standard_normal();
        }
        let norm = l2(&coords);
        if norm > 0.0 {
            coords.iter_mut().for_each(|c| *c /= norm);
            return Ok(UnitVector::from_parts_unchecked(coords, Some(support)));
        }
    }
}

fn clamp_correlation(rho: f64) -> Result<f64> {
    if rho.is_nan() || rho.abs() > 1.0 + CORRELATION_SLACK {
        return invalid(format!("correlation {rho} outside [-1, 1]"));
    }
    Ok(rho.clamp(-1.0, 1.0))
}

/// `arccos(rho) / pi`: the probability that the signs of two unit-variance
/// jointly Gaussian variables with correlation `rho` disagree.
pub fn disagreement_probability(rho: f64) -> Result<f64> {
    Ok(clamp_correlation(rho)?.acos() / PI)
}

/// Squared norms `|x - y|^2` and `|x + y|^2`.
fn difference_and_sum(x: &UnitVector, y: &UnitVector) -> Result<(f64, f64)> {
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    Ok(x.coords()
        .iter()
        .zip(y.coords())
        .fold((0.0, 0.0), |(d, s), (a, b)| (d + (a - b) * (a - b), s + (a + b) * (a + b))))
}

/// `d(x, y) = arccos(<x, y>) / pi`.
///
/// Evaluated as `2 atan2(|x - y|, |x + y|) / pi`, which equals the arccos form
/// on the sphere but stays accurate for nearly equal or nearly antipodal
/// vectors, where `arccos` loses half the digits.
pub fn geodesic_distance(x: &UnitVector, y: &UnitVector) -> Result<f64> {
    let (d, s) = difference_and_sum(x, y)?;
    Ok(2.0 * d.sqrt().atan2(s.sqrt()) / PI)
}

/// `d_sigma(x, y) = arccos((<x, y> + sigma^2) / (1 + sigma^2)) / pi`.
///
/// This is the geodesic distance between the lifted vectors, evaluated with
/// the same `atan2` form: the lift of `x - y` is `x - y` scaled, while the
/// lift of `x + y` gains the coordinate `2 sigma`.
pub fn distorted_distance(x: &UnitVector, y: &UnitVector, noise: NoiseModel) -> Result<f64> {
    let (d, s) = difference_and_sum(x, y)?;
    let sigma = noise.sigma();
    Ok(2.0 * d.sqrt().atan2((s + 4.0 * sigma * sigma).sqrt()) / PI)
}

/// Appends the coordinate `sigma` and rescales by `1 / sqrt(1 + sigma^2)`.
pub fn lift(x: &UnitVector, noise: NoiseModel) -> UnitVector {
    let sigma = noise.sigma();
    let scale = 1.0 / (1.0 + sigma * sigma).sqrt();
    let mut coords: Vec<f64> = x.coords().iter().map(|c| c * scale).collect();
    coords.push(sigma * scale);
    let support = x.support().map(|s| {
        let mut s = s.to_vec();
        if sigma > 0.0 {
            s.push(x.dim());
        }
        s
    });
    UnitVector::from_parts_unchecked(coords, support)
}

/// `1 - arccos((sigma^2 - 1) / (sigma^2 + 1)) / pi`, the largest possible
/// value of `d(x, y) - d_sigma(x, y)`, attained at antipodal pairs.
pub fn antipodal_gap(noise: NoiseModel) -> f64 {
    let s2 = noise.sigma() * noise.sigma();
    1.0 - ((s2 - 1.0) / (s2 + 1.0)).clamp(-1.0, 1.0).acos() / PI
}
