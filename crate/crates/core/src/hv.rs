//! Bit-packed dense binary hypervectors.
//!
//! Component `d` lives in bit `d % 64` of word `d / 64`. Storage bits past
//! `dim` are always zero, so popcount-based reductions never need masking.

use std::fmt;

use crate::error::{HdcError, Result};
use crate::rng::RandomSource;

/// Default hypervector dimension.
pub const DEFAULT_DIM: usize = 10_000;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    words: Vec<u64>,
    dim: usize,
}

#[inline]
pub(crate) fn word_count(dim: usize) -> usize {
    dim.div_ceil(64)
}

/// Mask of the valid bits in the last storage word.
#[inline]
pub(crate) fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(HdcError::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

#[inline]
pub(crate) fn check_same(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(HdcError::DimensionMismatch { left: a, right: b })
    }
}

impl Hypervector {
    /// The all-zeros vector.
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            words: vec![0; word_count(dim)],
            dim,
        })
    }

    pub fn ones(dim: usize) -> Result<Self> {
        let mut v = Self::zeros(dim)?;
        v.words.iter_mut().for_each(|w| *w = u64::MAX);
        v.clear_tail();
        Ok(v)
    }

    /// Every component independently 0 or 1 with probability 1/2.
    pub fn random(dim: usize, rng: &mut RandomSource) -> Result<Self> {
        check_dim(dim)?;
        let words = (0..word_count(dim)).map(|_| rng.next_u64()).collect();
        let mut v = Self { words, dim };
        v.clear_tail();
        Ok(v)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (d, &b) in bits.iter().enumerate() {
            if b {
                v.words[d / 64] |= 1 << (d % 64);
            }
        }
        Ok(v)
    }

    /// Build from packed words. Bits past `dim` are cleared.
    pub fn from_words(dim: usize, words: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        if words.len() != word_count(dim) {
            return Err(HdcError::LengthMismatch {
                what: "packed words",
                left: words.len(),
                right: word_count(dim),
            });
        }
        let mut v = Self { words, dim };
        v.clear_tail();
        Ok(v)
    }

    fn clear_tail(&mut self) {
        let mask = tail_mask(self.dim);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, d: usize) -> bool {
        assert!(
            d < self.dim,
            "component {d} out of range for dimension {}",
            self.dim
        );
        (self.words[d / 64] >> (d % 64)) & 1 == 1
    }

    pub fn set(&mut self, d: usize, bit: bool) {
        assert!(
            d < self.dim,
            "component {d} out of range for dimension {}",
            self.dim
        );
        let mask = 1u64 << (d % 64);
        if bit {
            self.words[d / 64] |= mask;
        } else {
            self.words[d / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, d: usize) {
        assert!(
            d < self.dim,
            "component {d} out of range for dimension {}",
            self.dim
        );
        self.words[d / 64] ^= 1 << (d % 64);
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.dim).map(|d| self.get(d)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing components.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        check_same(self.dim, other.dim)?;
        Ok(hamming_words(&self.words, &other.words))
    }

    /// `1 - hamming / dim`.
    pub fn similarity(&self, other: &Self) -> Result<f64> {
        Ok(1.0 - self.hamming(other)? as f64 / self.dim as f64)
    }

    /// Component-wise XOR.
    pub fn bind(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.bind_assign(other)?;
        Ok(out)
    }

    pub fn bind_assign(&mut self, other: &Self) -> Result<()> {
        check_same(self.dim, other.dim)?;
        self.words
            .iter_mut()
            .zip(&other.words)
            .for_each(|(a, b)| *a ^= b);
        Ok(())
    }

    pub fn complement(&self) -> Self {
        let mut out = Self {
            words: self.words.iter().map(|w| !w).collect(),
            dim: self.dim,
        };
        out.clear_tail();
        out
    }

    /// Cyclic rotation by `k` components: component `d` moves to
    /// `(d + k) mod dim` (a left rotation when component 0 is read as the
    /// least significant bit). Negative `k` rotates the other way.
    pub fn permute(&self, k: i64) -> Self {
        let dim = self.dim as i64;
        let shift = k.rem_euclid(dim) as usize;
        if shift == 0 {
            return self.clone();
        }
        let left = shl_words(&self.words, shift);
        let right = shr_words(&self.words, self.dim - shift);
        let mut out = Self {
            words: left.iter().zip(&right).map(|(a, b)| a | b).collect(),
            dim: self.dim,
        };
        out.clear_tail();
        out
    }

    /// Little-endian byte serialization of the packed words.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.words.iter().flat_map(|w| w.to_le_bytes()).collect()
    }

    /// Packed bits, one byte per eight components (LSB first), truncated to
    /// `ceil(dim / 8)` bytes.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let mut bytes = self.to_le_bytes();
        bytes.truncate(self.dim.div_ceil(8));
        bytes
    }
}

impl fmt::Debug for Hypervector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Hypervector(dim={}, ones={}",
            self.dim,
            self.count_ones()
        )?;
        if self.dim <= 64 {
            let s: String = self
                .to_bits()
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            write!(f, ", bits={s}")?;
        }
        write!(f, ")")
    }
}

#[inline]
pub(crate) fn hamming_words(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

/// Shift a word array toward higher bit indices.
fn shl_words(words: &[u64], shift: usize) -> Vec<u64> {
    let n = words.len();
    let (q, r) = (shift / 64, shift % 64);
    let mut out = vec![0u64; n];
    for i in q..n {
        let src = i - q;
        out[i] = words[src] << r;
        if r > 0 && src > 0 {
            out[i] |= words[src - 1] >> (64 - r);
        }
    }
    out
}

/// Shift a word array toward lower bit indices.
fn shr_words(words: &[u64], shift: usize) -> Vec<u64> {
    let n = words.len();
    let (q, r) = (shift / 64, shift % 64);
    let mut out = vec![0u64; n];
    for i in 0..n.saturating_sub(q) {
        let src = i + q;
        out[i] = words[src] >> r;
        if r > 0 && src + 1 < n {
            out[i] |= words[src + 1] << (64 - r);
        }
    }
    out
}

pub fn random_hv(rng: &mut RandomSource, dim: usize) -> Result<Hypervector> {
    Hypervector::random(dim, rng)
}

pub fn hamming(a: &Hypervector, b: &Hypervector) -> Result<usize> {
    a.hamming(b)
}

pub fn similarity(a: &Hypervector, b: &Hypervector) -> Result<f64> {
    a.similarity(b)
}

pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    a.bind(b)
}

pub fn permute(v: &Hypervector, k: i64) -> Hypervector {
    v.permute(k)
}
