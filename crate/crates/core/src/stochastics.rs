//! Deterministic random streams and the statistics used by the harness.
//!
//! [`RngStream`] wraps ChaCha8 (a 64-bit-seeded counter-mode generator with
//! 2^64 independent streams, each of period 2^68 words). A stream is keyed by
//! `(seed, stream_id)`; the stream id selects the ChaCha stream so parallel
//! tasks never share state. Gaussian draws use Box-Muller on 53-bit uniforms.

use std::f64::consts::PI;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent child stream for a named purpose (`lane`).
    ///
    /// The child keeps this stream's id and hashes `(seed, lane)` into a new
    /// seed, so forks are pure functions of `(seed, stream_id, lane)` and do
    /// not consume any of the parent's output.
    pub fn fork(&self, lane: u64) -> RngStream {
        let child_seed = splitmix64(self.seed ^ splitmix64(lane.wrapping_add(0xA5A5_A5A5)));
        RngStream::new(child_seed, self.stream_id)
    }

    /// Uniform draw in the half-open interval `(0, 1]`.
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One standard normal draw (Box-Muller, second variate cached).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// `dim` iid N(0,1) entries.
    pub fn gaussian_vector(&mut self, dim: usize) -> Result<Vec<f64>> {
        if dim == 0 {
            return invalid("gaussian_vector: dim must be at least 1");
        }
        Ok((0..dim).map(|_| self.standard_normal()).collect())
    }

    pub(crate) fn next_u64_raw(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub(crate) fn fill_gaussian(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }
}

impl RngCore for RngStream {
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

/// Normal-approximation band `p ± z·sqrt(p(1-p)/trials)` clamped to `[0, 1]`.
pub fn binomial_band(p: f64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return invalid("binomial band: trials must be at least 1");
    }
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("binomial band: probability {p} outside [0, 1]"));
    }
    if !(z > 0.0) || !z.is_finite() {
        return invalid(format!("binomial band: z must be positive, got {z}"));
    }
    let half = z * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(((p - half).max(0.0), (p + half).min(1.0)))
}

/// Confidence interval for a binomial proportion from an observed count.
pub fn binomial_ci(successes: u64, trials: u64, z: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return invalid("binomial_ci: trials must be at least 1");
    }
    if successes > trials {
        return invalid(format!(
            "binomial_ci: successes {successes} exceed trials {trials}"
        ));
    }
    binomial_band(successes as f64 / trials as f64, trials, z)
}

/// Least-squares line through log-transformed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `ln y = intercept + slope · ln x` by ordinary least squares.
///
/// A perfectly constant response has zero total variance; it is fitted
/// exactly, so `r_squared` is reported as 1.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return invalid("fit_loglog_slope: need at least two points");
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return invalid(format!(
            "fit_loglog_slope: coordinates must be finite and positive, got ({x}, {y})"
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= f64::EPSILON * k {
        return invalid("fit_loglog_slope: need at least two distinct abscissae");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy <= f64::EPSILON * k {
        1.0
    } else {
        let ss_res: f64 = logs
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
    })
}
