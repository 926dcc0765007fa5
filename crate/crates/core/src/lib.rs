//! One-bit (sign-quantized) Gaussian embeddings of sparse unit vectors.
//!
//! The crate is organised bottom-up:
//!
//! - [`stochastics`]: splittable deterministic random streams, Gaussian
//!   sampling and the small statistics toolkit (binomial bands, log-log fits).
//! - [`geometry`]: sparse unit vectors, the normalized geodesic distance, the
//!   noise-distorted distance and the one-dimension lift that turns additive
//!   noise into geometry.
//! - [`embedding`]: Gaussian sensing matrices, the sign maps `x -> sgn(Ax)` and
//!   `x -> sgn(Ax + eta)`, packed bit codes and normalized Hamming distance.
//! - [`ripcheck`]: Monte-Carlo estimation of the deviation between Hamming
//!   distance and the reference metric, measurement-count formulas and sweeps.
//! - [`vctool`]: shattering checks for sparse hemispheres and wedges, VC
//!   bounds, the lower Lambert W branch and empirical packing numbers.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and runs sequentially otherwise.
//! Results never depend on the execution mode.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod geometry;
mod lp;
pub mod par;
pub mod ripcheck;
pub mod stochastics;
pub mod vctool;

pub use embedding::{BitCode, NoiseVector, SensingMatrix};
pub use error::{Error, Result};
pub use geometry::{NoiseModel, UnitVector};
pub use par::Execution;
pub use ripcheck::{DeviationReport, Metric, PairSampler, PairStrategy};
pub use stochastics::{RngStream, SlopeFit};
