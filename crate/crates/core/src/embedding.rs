//! Gaussian sign embeddings into the Hamming cube.
//!
//! A [`SensingMatrix`] is stored row-major, one row per measurement direction,
//! so each output bit is one contiguous dot product. Codes are packed 64 bits
//! per word, bit `k` of the code living in bit `k % 64` of word `k / 64`; a set
//! bit means `+1`, a clear bit `-1`, and padding past the logical length is
//! always zero.

use std::io::{self, Read, Write};

use crate::error::{invalid, Error, Result};
use crate::geometry::{NoiseModel, UnitVector};
use crate::par::{self, Execution};
use crate::stochastics::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl SensingMatrix {
    /// `m x n` matrix with iid N(0, 1) entries, filled row by row.
    pub fn gaussian(stream: &mut RngStream, m: usize, n: usize) -> Result<Self> {
        check_shape(m, n)?;
        let mut data = vec![0.0; m * n];
        stream.fill_gaussian(&mut data);
        Ok(SensingMatrix { m, n, data })
    }

    pub fn from_row_major(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(m, n)?;
        if data.len() != m * n {
            return invalid(format!("expected {} entries for {m}x{n}, got {}", m * n, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("sensing matrix entries must be finite");
        }
        Ok(SensingMatrix { m, n, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return invalid("all rows must have the same length");
        }
        SensingMatrix::from_row_major(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_shape(n, n)?;
        let mut data = vec![0.0; n * n];
        (0..n).for_each(|i| data[i * n + i] = 1.0);
        Ok(SensingMatrix { m: n, n, data })
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        check_shape(m, n)?;
        Ok(SensingMatrix {
            m,
            n,
            data: vec![0.0; m * n],
        })
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return invalid(format!("matrix shape must be at least 1x1, got {m}x{n}"));
    }
    Ok(())
}

/// One realization of the additive noise, shared by every signal embedded
/// through the same noisy map.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    values: Vec<f64>,
    noise: NoiseModel,
}

impl NoiseVector {
    pub fn sample(stream: &mut RngStream, m: usize, noise: NoiseModel) -> Result<Self> {
        if m == 0 {
            return invalid("noise vector length must be at least 1");
        }
        let mut values = vec![0.0; m];
        stream.fill_gaussian(&mut values);
        values.iter_mut().for_each(|v| *v *= noise.sigma());
        Ok(NoiseVector { values, noise })
    }

    pub fn new(values: Vec<f64>, noise: NoiseModel) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return invalid("noise values must be finite and non-empty");
        }
        Ok(NoiseVector { values, noise })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        NoiseVector::new(vec![0.0; m], NoiseModel::noiseless())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }
}

/// An `m`-bit sign pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitCode {
    len: usize,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitCode {
    /// Code from `+1` flags (`true` = `+1`).
    pub fn from_signs<I: IntoIterator<Item = bool>>(signs: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for (k, plus) in signs.into_iter().enumerate() {
            if k % 64 == 0 {
                words.push(0);
            }
            if plus {
                words[k / 64] |= 1 << (k % 64);
            }
            len = k + 1;
        }
        BitCode { len, words }
    }

    /// Reassembles a code from packed words, rejecting dirty padding.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != word_count(len) {
            return invalid(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            ));
        }
        if let Some(last) = words.last() {
            if last & !tail_mask(len) != 0 {
                return invalid("padding bits past the logical length must be zero");
            }
        }
        Ok(BitCode { len, words })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `true` iff bit `k` is `+1`.
    pub fn is_plus(&self, k: usize) -> bool {
        assert!(k < self.len, "bit {k} out of range for length {}", self.len);
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    pub fn complement(&self) -> BitCode {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.len);
        }
        BitCode {
            len: self.len,
            words,
        }
    }

    /// Little-endian `u64` length prefix followed by the little-endian words.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.len as u64).to_le_bytes())?;
        for word in &self.words {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> io::Result<BitCode> {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        let len = usize::try_from(u64::from_le_bytes(buf))
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "code length overflow"))?;
        let mut words = Vec::with_capacity(word_count(len));
        for _ in 0..word_count(len) {
            r.read_exact(&mut buf)?;
            words.push(u64::from_le_bytes(buf));
        }
        BitCode::from_words(len, words)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (1 + self.words.len()));
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }
}

/// `sgn(v)`: `+1` (returned as `true`) iff `v > 0`. Zero of either sign is `-1`.
pub fn sign_quantize(v: f64) -> Result<bool> {
    if !v.is_finite() {
        return invalid(format!("cannot quantize non-finite value {v}"));
    }
    Ok(v > 0.0)
}

fn check_signal(a: &SensingMatrix, x: &UnitVector) -> Result<()> {
    if x.dim() != a.n() {
        return invalid(format!(
            "signal dimension {} does not match matrix width {}",
            x.dim(),
            a.n()
        ));
    }
    Ok(())
}

fn check_noise(a: &SensingMatrix, eta: &NoiseVector) -> Result<()> {
    if eta.len() != a.m() {
        return invalid(format!(
            "noise length {} does not match measurement count {}",
            eta.len(),
            a.m()
        ));
    }
    Ok(())
}

/// Packs bits `[64 w, 64 w + 64)` of one code.
fn code_word(a: &SensingMatrix, eta: Option<&NoiseVector>, x: &UnitVector, w: usize) -> Result<u64> {
    let end = (64 * (w + 1)).min(a.m());
    let mut word = 0u64;
    for k in 64 * w..end {
        let mut v = x.dot_dense(a.row(k));
        if let Some(eta) = eta {
            v += eta.values[k];
        }
        if sign_quantize(v)? {
            word |= 1 << (k - 64 * w);
        }
    }
    Ok(word)
}

fn embed_impl(a: &SensingMatrix, eta: Option<&NoiseVector>, x: &UnitVector) -> Result<BitCode> {
    check_signal(a, x)?;
    if let Some(eta) = eta {
        check_noise(a, eta)?;
    }
    let words = (0..word_count(a.m()))
        .map(|w| code_word(a, eta, x, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitCode { len: a.m(), words })
}

/// `sgn(Ax)`.
pub fn embed(a: &SensingMatrix, x: &UnitVector) -> Result<BitCode> {
    embed_impl(a, None, x)
}

/// `sgn(Ax + eta)`.
pub fn embed_noisy(a: &SensingMatrix, eta: &NoiseVector, x: &UnitVector) -> Result<BitCode> {
    embed_impl(a, Some(eta), x)
}

/// Embeds many signals through one map.
///
/// Work is split into 64-row bands so each band of the matrix stays in cache
/// while every signal is projected onto it. Codes are bitwise identical to
/// calling [`embed`] / [`embed_noisy`] one signal at a time.
pub fn embed_batch(
    a: &SensingMatrix,
    eta: Option<&NoiseVector>,
    xs: &[UnitVector],
    exec: Execution,
) -> Result<Vec<BitCode>> {
    for x in xs {
        check_signal(a, x)?;
    }
    if let Some(eta) = eta {
        check_noise(a, eta)?;
    }
    let bands = par::try_map_range(exec, word_count(a.m()), |w| {
        xs.iter().map(|x| code_word(a, eta, x, w)).collect::<Result<Vec<u64>>>()
    })?;
    Ok((0..xs.len())
        .map(|i| BitCode {
            len: a.m(),
            words: bands.iter().map(|band| band[i]).collect(),
        })
        .collect())
}

/// Appends `eta_k / sigma` to row `k`, producing an `m x (n + 1)` matrix whose
/// plain sign map on lifted signals reproduces the noisy map.
pub fn augment_matrix(a: &SensingMatrix, eta: &NoiseVector, noise: NoiseModel) -> Result<SensingMatrix> {
    if noise.is_noiseless() {
        return invalid("augment_matrix requires sigma > 0; use embed for the noiseless map");
    }
    check_noise(a, eta)?;
    let n1 = a.n() + 1;
    let mut data = Vec::with_capacity(a.m() * n1);
    for k in 0..a.m() {
        data.extend_from_slice(a.row(k));
        data.push(eta.values[k] / noise.sigma());
    }
    SensingMatrix::from_row_major(a.m(), n1, data)
}

/// Normalized number of coordinates where the codes differ.
pub fn hamming(a: &BitCode, b: &BitCode) -> Result<f64> {
    Ok(hamming_count(a, b)? as f64 / a.len() as f64)
}

/// Raw count of differing coordinates.
pub fn hamming_count(a: &BitCode, b: &BitCode) -> Result<u64> {
    if a.len != b.len {
        return Err(Error::InvalidArgument(format!(
            "code length mismatch: {} vs {}",
            a.len, b.len
        )));
    }
    if a.len == 0 {
        return invalid("hamming distance of empty codes is undefined");
    }
    Ok(a
        .words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| u64::from((x ^ y).count_ones()))
        .sum())
}
