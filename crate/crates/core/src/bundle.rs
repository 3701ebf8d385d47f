//! Bundling: integer accumulation of hypervectors and majority binarization.
//!
//! Two implementations share one tie-break rule. [`Bundle`] keeps explicit
//! per-component counts and supports removal (needed by retraining).
//! [`majority_by_word`] evaluates a majority over a fixed set of inputs with
//! a bit-sliced counter, one storage word at a time; the encoders use it on
//! their hot path.
//!
//! Tie rule: when the element count `n` is even, one random hypervector is
//! drawn from the supplied stream and component `d` of a tied position takes
//! bit `d` of that draw. When `n` is odd no ties are possible and the stream
//! is left untouched. Both paths therefore produce bit-identical output for
//! the same inputs and stream, independent of bundling order.

use crate::error::{HdcError, Result};
use crate::hv::{check_same, tail_mask, word_count, Hypervector};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    counts: Vec<u32>,
    n: u32,
    dim: usize,
}

impl Bundle {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(HdcError::InvalidDimension(0));
        }
        Ok(Self {
            counts: vec![0; dim],
            n: 0,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of hypervectors currently bundled.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Rebuild from raw parts, validating `counts[d] <= n`.
    pub fn from_parts(counts: Vec<u32>, n: u32) -> Result<Self> {
        let dim = counts.len();
        if dim == 0 {
            return Err(HdcError::InvalidDimension(0));
        }
        if let Some(component) = counts.iter().position(|&c| c > n) {
            return Err(HdcError::BundleUnderflow { component });
        }
        Ok(Self { counts, n, dim })
    }

    pub fn add(&mut self, v: &Hypervector) -> Result<()> {
        check_same(self.dim, v.dim())?;
        for (chunk, &word) in self.counts.chunks_mut(64).zip(v.words()) {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                chunk[bit] += 1;
                w &= w - 1;
            }
        }
        self.n += 1;
        Ok(())
    }

    /// True when `v` can be removed without any count going negative.
    pub fn can_remove(&self, v: &Hypervector) -> bool {
        v.dim() == self.dim && self.first_underflow(v).is_none() && self.n > 0
    }

    fn first_underflow(&self, v: &Hypervector) -> Option<usize> {
        for (wi, (chunk, &word)) in self.counts.chunks(64).zip(v.words()).enumerate() {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                if chunk[bit] == 0 {
                    return Some(wi * 64 + bit);
                }
                w &= w - 1;
            }
        }
        None
    }

    /// Inverse of [`Bundle::add`]. Fails without modifying the bundle when
    /// `v` cannot have been part of it.
    pub fn remove(&mut self, v: &Hypervector) -> Result<()> {
        check_same(self.dim, v.dim())?;
        if let Some(component) = self.first_underflow(v) {
            return Err(HdcError::BundleUnderflow { component });
        }
        if self.n == 0 {
            return Err(HdcError::BundleUnderflow { component: 0 });
        }
        for (chunk, &word) in self.counts.chunks_mut(64).zip(v.words()) {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                chunk[bit] -= 1;
                w &= w - 1;
            }
        }
        self.n -= 1;
        Ok(())
    }

    /// Majority rule: 1 where `count > n/2`, 0 where `count < n/2`, a random
    /// bit from `rng` where `count == n/2`.
    pub fn binarize(&self, rng: &mut RandomSource) -> Hypervector {
        let ties = tie_mask(self.dim, self.n as u64, rng);
        let n = self.n as u64;
        let words = self
            .counts
            .chunks(64)
            .enumerate()
            .map(|(wi, chunk)| {
                let mut out = 0u64;
                for (bit, &c) in chunk.iter().enumerate() {
                    let twice = 2 * c as u64;
                    let set = match twice.cmp(&n) {
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Less => false,
                        std::cmp::Ordering::Equal => {
                            ties.as_ref().is_some_and(|t| (t[wi] >> bit) & 1 == 1)
                        }
                    };
                    out |= (set as u64) << bit;
                }
                out
            })
            .collect();
        Hypervector::from_words(self.dim, words).expect("dimension checked at construction")
    }
}

fn tie_mask(dim: usize, n: u64, rng: &mut RandomSource) -> Option<Vec<u64>> {
    if n.is_multiple_of(2) {
        Some(
            Hypervector::random(dim, rng)
                .expect("positive dimension")
                .words()
                .to_vec(),
        )
    } else {
        None
    }
}

/// Bit-sliced counter for 64 components at once: plane `p` holds bit `p` of
/// each component's count.
#[derive(Debug, Clone, Default)]
pub struct WordCounter {
    planes: [u64; 32],
    used: usize,
}

impl WordCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn reset(&mut self) {
        self.planes[..self.used].iter_mut().for_each(|p| *p = 0);
        self.used = 0;
    }

    #[inline]
    pub fn add(&mut self, word: u64) {
        let mut carry = word;
        let mut p = 0;
        while carry != 0 {
            let next = self.planes[p] & carry;
            self.planes[p] ^= carry;
            carry = next;
            p += 1;
        }
        if p > self.used {
            self.used = p;
        }
    }

    /// Count of component `bit` (test helper and diagnostics).
    pub fn count(&self, bit: usize) -> u32 {
        (0..self.used)
            .map(|p| (((self.planes[p] >> bit) & 1) as u32) << p)
            .sum()
    }

    /// Majority over `n` inputs, with `tie` supplying bits for components
    /// whose count is exactly `n / 2`.
    #[inline]
    pub fn majority(&self, n: u32, tie: u64) -> u64 {
        let threshold = n / 2;
        let top = self.used.max(32 - threshold.leading_zeros() as usize);
        let mut greater = 0u64;
        let mut equal = u64::MAX;
        for p in (0..top).rev() {
            let c = self.planes[p];
            if (threshold >> p) & 1 == 1 {
                equal &= c;
            } else {
                greater |= equal & c;
                equal &= !c;
            }
        }
        if n.is_multiple_of(2) {
            greater | (equal & tie)
        } else {
            greater
        }
    }
}

/// Majority over `n` hypervectors supplied word by word.
///
/// For every storage word index `w`, `feed(w, counter)` must add word `w` of
/// each of the `n` inputs to `counter`. The result is identical to adding
/// the same inputs to a [`Bundle`] and binarizing with the same stream.
pub fn majority_by_word<F>(dim: usize, n: u32, rng: &mut RandomSource, mut feed: F) -> Hypervector
where
    F: FnMut(usize, &mut WordCounter),
{
    let ties = tie_mask(dim, n as u64, rng);
    let mut counter = WordCounter::new();
    let mut words = Vec::with_capacity(word_count(dim));
    for w in 0..word_count(dim) {
        counter.reset();
        feed(w, &mut counter);
        let tie = ties.as_ref().map_or(0, |t| t[w]);
        words.push(counter.majority(n, tie));
    }
    if let Some(last) = words.last_mut() {
        *last &= tail_mask(dim);
    }
    Hypervector::from_words(dim, words).expect("word count matches dimension")
}

/// Binarized bundle of a slice of hypervectors.
pub fn bundle_all(vectors: &[Hypervector], rng: &mut RandomSource) -> Result<Hypervector> {
    let first = vectors.first().ok_or(HdcError::Empty("bundle input"))?;
    let dim = first.dim();
    for v in vectors {
        check_same(dim, v.dim())?;
    }
    Ok(majority_by_word(dim, vectors.len() as u32, rng, |w, c| {
        for v in vectors {
            c.add(v.words()[w]);
        }
    }))
}

pub fn bundle_init(dim: usize) -> Result<Bundle> {
    Bundle::new(dim)
}

pub fn bundle_add(b: &mut Bundle, v: &Hypervector) -> Result<()> {
    b.add(v)
}

pub fn bundle_remove(b: &mut Bundle, v: &Hypervector) -> Result<()> {
    b.remove(v)
}

pub fn binarize(b: &Bundle, rng: &mut RandomSource) -> Hypervector {
    b.binarize(rng)
}
