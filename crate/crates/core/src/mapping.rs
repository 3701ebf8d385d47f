//! Item memories: lookup tables from discrete levels to atomic hypervectors.
//!
//! * orthogonal: one independent random vector per level.
//! * linear: a random first level, then each level flips a fresh block of
//!   components of its predecessor, so that the first and last level end up
//!   exactly `dim / 2` components apart.
//! * local linear: the level range is cut into splits; each split is a linear
//!   chain starting at the previous split's upper edge. Levels in the same
//!   split are similar, levels further apart are pseudo-orthogonal.
//! * concatenation: evenly spaced random edge vectors; an interior level copies
//!   a leading block of components from its lower edge and the rest from its
//!   upper edge.
//!
//! When a flip budget or split length does not divide evenly, the remainder
//! is spread one unit at a time over the earliest steps/splits.

use crate::error::{HdcError, Result};
use crate::hv::Hypervector;
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingKind {
    Orthogonal,
    Linear,
    LocalLinear,
    Concatenation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemMemory {
    entries: Vec<Hypervector>,
    kind: MappingKind,
    /// Split count for local linear memories, edge intervals for
    /// concatenation memories, 1 otherwise.
    splits: usize,
}

impl ItemMemory {
    /// Wraps existing vectors, e.g. a memory rebuilt from disk.
    pub fn from_entries(
        entries: Vec<Hypervector>,
        kind: MappingKind,
        splits: usize,
    ) -> Result<Self> {
        let first = entries.first().ok_or(HdcError::Empty("item memory"))?;
        for e in &entries[1..] {
            crate::hv::check_same(first.dim(), e.dim())?;
        }
        Ok(Self {
            entries,
            kind,
            splits,
        })
    }

    pub fn kind(&self) -> MappingKind {
        self.kind
    }

    pub fn splits(&self) -> usize {
        self.splits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn entries(&self) -> &[Hypervector] {
        &self.entries
    }

    pub fn get(&self, level: usize) -> Result<&Hypervector> {
        self.entries.get(level).ok_or(HdcError::IndexOutOfRange {
            index: level,
            len: self.entries.len(),
        })
    }

    /// Similarity of every level to `anchor`.
    pub fn similarity_profile(&self, anchor: usize) -> Result<Vec<f64>> {
        let a = self.get(anchor)?;
        self.entries.iter().map(|e| a.similarity(e)).collect()
    }

    /// Full pairwise similarity matrix, row `i` = profile anchored at `i`.
    pub fn similarity_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| self.similarity_profile(i).expect("anchor in range"))
            .collect()
    }
}

/// Split `total` into `parts` near-equal sizes, larger ones first.
pub(crate) fn even_partition(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

pub fn build_orthogonal(rng: &mut RandomSource, levels: usize, dim: usize) -> Result<ItemMemory> {
    if levels == 0 {
        return Err(HdcError::InvalidLevels {
            levels,
            reason: "at least one level is required",
        });
    }
    let entries = (0..levels)
        .map(|_| Hypervector::random(dim, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ItemMemory {
        entries,
        kind: MappingKind::Orthogonal,
        splits: 1,
    })
}

pub fn build_linear(rng: &mut RandomSource, levels: usize, dim: usize) -> Result<ItemMemory> {
    if levels < 2 {
        return Err(HdcError::InvalidLevels {
            levels,
            reason: "linear mapping needs at least two levels",
        });
    }
    let entries = local_linear_entries(rng, levels, 1, dim)?;
    Ok(ItemMemory {
        entries,
        kind: MappingKind::Linear,
        splits: 1,
    })
}

pub fn build_local_linear(
    rng: &mut RandomSource,
    levels: usize,
    splits: usize,
    dim: usize,
) -> Result<ItemMemory> {
    if levels < 2 {
        return Err(HdcError::InvalidLevels {
            levels,
            reason: "local linear mapping needs at least two levels",
        });
    }
    if splits == 0 || splits > levels - 1 {
        return Err(HdcError::InvalidSplits {
            splits,
            levels,
            max: levels - 1,
        });
    }
    let entries = local_linear_entries(rng, levels, splits, dim)?;
    Ok(ItemMemory {
        entries,
        kind: MappingKind::LocalLinear,
        splits,
    })
}

/// Level indices of the split edges, first and last level included.
pub fn split_edges(levels: usize, splits: usize) -> Vec<usize> {
    let mut edges = vec![0];
    for len in even_partition(levels - 1, splits) {
        edges.push(edges.last().unwrap() + len);
    }
    edges
}

fn local_linear_entries(
    rng: &mut RandomSource,
    levels: usize,
    splits: usize,
    dim: usize,
) -> Result<Vec<Hypervector>> {
    let mut current = Hypervector::random(dim, rng)?;
    let mut entries = Vec::with_capacity(levels);
    entries.push(current.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    for steps in even_partition(levels - 1, splits) {
        // Fresh flip positions per split: within a split no component is
        // flipped twice, and the split's upper edge lands exactly dim/2 away.
        rng.shuffle(&mut order);
        let mut cursor = 0;
        for flips in even_partition(dim / 2, steps) {
            for &d in &order[cursor..cursor + flips] {
                current.flip(d);
            }
            cursor += flips;
            entries.push(current.clone());
        }
    }
    Ok(entries)
}

/// Level indices of the concatenation edges.
pub fn concatenation_edges(levels: usize, edges: usize) -> Vec<usize> {
    (0..edges)
        .map(|k| {
            let num = k * (levels - 1);
            let den = edges - 1;
            (2 * num + den) / (2 * den)
        })
        .collect()
}

pub fn build_concatenation(
    rng: &mut RandomSource,
    levels: usize,
    edges: usize,
    dim: usize,
) -> Result<ItemMemory> {
    if edges < 2 || edges > levels {
        return Err(HdcError::InvalidEdges { edges, levels });
    }
    let positions = concatenation_edges(levels, edges);
    let edge_vectors = (0..edges)
        .map(|_| Hypervector::random(dim, rng))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(levels);
    for k in 0..edges - 1 {
        let (lo, hi) = (positions[k], positions[k + 1]);
        let span = hi - lo;
        for level in lo..hi {
            let offset = level - lo;
            // Components [0, keep) come from the lower edge.
            let keep = ((span - offset) * dim + span / 2) / span;
            let mut v = edge_vectors[k + 1].clone();
            for d in 0..keep {
                v.set(d, edge_vectors[k].get(d));
            }
            entries.push(v);
        }
    }
    entries.push(edge_vectors[edges - 1].clone());
    Ok(ItemMemory {
        entries,
        kind: MappingKind::Concatenation,
        splits: edges - 1,
    })
}

pub fn similarity_profile(mem: &ItemMemory, anchor: usize) -> Result<Vec<f64>> {
    mem.similarity_profile(anchor)
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: usize = 10_000;

    fn near_half(s: f64, tol: f64) -> bool {
        (s - 0.5).abs() < tol
    }

    #[test]
    fn orthogonal_pairs() {
        let mut rng = RandomSource::new(1);
        let m = build_orthogonal(&mut rng, 2, D).unwrap();
        assert!(near_half(
            m.entries[0].similarity(&m.entries[1]).unwrap(),
            0.015
        ));
        assert_eq!(
            build_orthogonal(&mut RandomSource::new(1), 1, D)
                .unwrap()
                .len(),
            1
        );
        assert!(build_orthogonal(&mut rng, 0, D).is_err());
        let a = build_orthogonal(&mut RandomSource::new(4), 5, 100).unwrap();
        let b = build_orthogonal(&mut RandomSource::new(4), 5, 100).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_twenty_one_levels() {
        let m = build_linear(&mut RandomSource::new(2), 21, D).unwrap();
        assert_eq!(m.entries[0].similarity(&m.entries[20]).unwrap(), 0.5);
        assert_eq!(m.entries[0].similarity(&m.entries[1]).unwrap(), 0.975);
        for i in 0..21 {
            for j in 0..21 {
                let h = m.entries[i].hamming(&m.entries[j]).unwrap();
                assert_eq!(h, i.abs_diff(j) * 250);
            }
        }
    }

    #[test]
    fn linear_two_levels_and_errors() {
        let m = build_linear(&mut RandomSource::new(3), 2, D).unwrap();
        assert_eq!(m.entries[0].similarity(&m.entries[1]).unwrap(), 0.5);
        assert!(matches!(
            build_linear(&mut RandomSource::new(3), 1, D),
            Err(HdcError::InvalidLevels { .. })
        ));
    }

    #[test]
    fn linear_non_divisible_keeps_half_distance() {
        // 5000 flips over 27 steps: 185 each, 5 steps get one more.
        let m = build_linear(&mut RandomSource::new(5), 28, D).unwrap();
        assert_eq!(m.entries[0].hamming(&m.entries[27]).unwrap(), 5000);
        assert_eq!(m.entries[0].hamming(&m.entries[1]).unwrap(), 186);
        assert_eq!(m.entries[26].hamming(&m.entries[27]).unwrap(), 185);
        let p = m.similarity_profile(0).unwrap();
        assert!(p.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn local_linear_four_splits() {
        let m = build_local_linear(&mut RandomSource::new(6), 21, 4, D).unwrap();
        assert_eq!(m.entries[0].similarity(&m.entries[1]).unwrap(), 0.9);
        assert_eq!(m.entries[0].similarity(&m.entries[5]).unwrap(), 0.5);
        assert!(near_half(
            m.entries[0].similarity(&m.entries[10]).unwrap(),
            0.015
        ));
        let p = m.similarity_profile(0).unwrap();
        for (k, s) in p.iter().enumerate().skip(5) {
            assert!(near_half(*s, 0.02), "level {k}: {s}");
        }
        assert_eq!(split_edges(21, 4), vec![0, 5, 10, 15, 20]);
    }

    #[test]
    fn local_linear_single_split_is_linear() {
        let a = build_local_linear(&mut RandomSource::new(7), 28, 1, D).unwrap();
        let b = build_linear(&mut RandomSource::new(7), 28, D).unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn local_linear_max_splits_is_orthogonal() {
        // 378 pairs at std 0.005 each: a few land past 3 sigma by chance.
        let m = build_local_linear(&mut RandomSource::new(8), 28, 27, D).unwrap();
        let mut outside = 0;
        for i in 0..28 {
            for j in (i + 1)..28 {
                let s = m.entries[i].similarity(&m.entries[j]).unwrap();
                assert!(near_half(s, 0.025), "{i},{j}: {s}");
                outside += usize::from(!near_half(s, 0.015));
            }
        }
        assert!(outside <= 4, "{outside} pairs beyond 0.015");
    }

    #[test]
    fn local_linear_split_bounds() {
        let mut rng = RandomSource::new(0);
        for s in [0, 28, 40] {
            assert!(matches!(
                build_local_linear(&mut rng, 28, s, 64),
                Err(HdcError::InvalidSplits { .. })
            ));
        }
        // 27 steps over 5 splits: 6,6,5,5,5
        assert_eq!(split_edges(28, 5), vec![0, 6, 12, 17, 22, 27]);
    }

    #[test]
    fn concatenation_geometry() {
        let mut rng = RandomSource::new(9);
        let m = build_concatenation(&mut rng, 21, 2, D).unwrap();
        // midpoint between the two edges
        let s0 = m.entries[10].similarity(&m.entries[0]).unwrap();
        let s1 = m.entries[10].similarity(&m.entries[20]).unwrap();
        assert!((s0 - 0.75).abs() < 0.015, "{s0}");
        assert!((s1 - 0.75).abs() < 0.015, "{s1}");

        let m = build_concatenation(&mut rng, 28, 10, D).unwrap();
        let edges = concatenation_edges(28, 10);
        assert_eq!(edges, vec![0, 3, 6, 9, 12, 15, 18, 21, 24, 27]);
        assert!(m.entries[1].similarity(&m.entries[0]).unwrap() > 0.8);
        assert!(m.entries[26].similarity(&m.entries[27]).unwrap() > 0.8);
        assert!(build_concatenation(&mut rng, 28, 1, D).is_err());
    }

    #[test]
    fn profile_anchor() {
        let m = build_linear(&mut RandomSource::new(10), 21, D).unwrap();
        let p = similarity_profile(&m, 7).unwrap();
        assert_eq!(p[7], 1.0);
        assert!(matches!(
            similarity_profile(&m, 21),
            Err(HdcError::IndexOutOfRange { index: 21, len: 21 })
        ));
    }
}
