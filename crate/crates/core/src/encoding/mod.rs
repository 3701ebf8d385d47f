//! Image and record encoders.
//!
//! The POI encoder works in four steps:
//!
//! 1. threshold the gray-scale image into a binary image;
//! 2. take every foreground pixel as a point of interest (POI) and cut a
//!    zero-padded `z x z` patch around it;
//! 3. encode each patch as the majority of `px[i] ⊗ py[j] ⊗ value[P[i, j]]`
//!    over its pixels, with orthogonal in-patch position memories;
//! 4. bind every patch vector with the POI's global position
//!    `gx[x] ⊗ gy[y]` (local linear memories) and take the majority over all
//!    POIs.
//!
//! The pixel-wise and 2D-permutation encoders are the whole-image baselines.

mod image;
mod record;

pub use image::{binarize_image, extract_patch, select_pois, BinaryImage, Image, Patch};
pub use record::encode_record;

use crate::bundle::majority_by_word;
use crate::error::{HdcError, Result};
use crate::hv::{check_same, word_count, Hypervector, DEFAULT_DIM};
use crate::mapping::{build_linear, build_local_linear, build_orthogonal, ItemMemory};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    /// Patches around points of interest, bound to global positions.
    Poi,
    /// Every pixel bound to its position and value.
    Pixelwise,
    /// Pixel value vectors rotated per axis.
    Permutation2d,
}

/// Mapping used for the in-patch position memories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PatchMapping {
    #[default]
    Orthogonal,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    /// Intensities strictly above this become foreground.
    pub threshold: u8,
    /// Patch side length `z` (odd).
    pub patch_size: usize,
    /// Split count for the global position memories. A value equal to or
    /// above an axis length selects orthogonal mapping on that axis.
    pub splits: usize,
    pub patch_mapping: PatchMapping,
    pub dim: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            kind: EncoderKind::Poi,
            threshold: 0,
            patch_size: 7,
            splits: 9,
            patch_mapping: PatchMapping::Orthogonal,
            dim: DEFAULT_DIM,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.dim == 0 {
            return Err(HdcError::InvalidDimension(0));
        }
        if self.patch_size.is_multiple_of(2) {
            return Err(HdcError::InvalidConfig(format!(
                "patch size {} must be odd",
                self.patch_size
            )));
        }
        let max = width.max(height);
        if self.splits == 0 || self.splits > max {
            return Err(HdcError::InvalidSplits {
                splits: self.splits,
                levels: max,
                max,
            });
        }
        Ok(())
    }
}

/// Global position memory for one axis: local linear with `splits` splits,
/// or orthogonal when `splits` reaches the level count.
pub fn position_memory(
    rng: &mut RandomSource,
    levels: usize,
    splits: usize,
    dim: usize,
) -> Result<ItemMemory> {
    if splits >= levels {
        build_orthogonal(rng, levels, dim)
    } else {
        build_local_linear(rng, levels, splits, dim)
    }
}

/// The fixed item memories shared by all samples of a run.
#[derive(Debug, Clone)]
pub struct ImageMemories {
    /// Two entries: pixel value 0 and pixel value 1.
    pub values: ItemMemory,
    pub patch_x: ItemMemory,
    pub patch_y: ItemMemory,
    pub position_x: ItemMemory,
    pub position_y: ItemMemory,
}

impl ImageMemories {
    /// Each memory draws from its own named child stream, so e.g. changing
    /// the patch size leaves the position memories untouched.
    pub fn build(
        cfg: &EncoderConfig,
        width: usize,
        height: usize,
        rng: &RandomSource,
    ) -> Result<Self> {
        cfg.validate(width, height)?;
        let dim = cfg.dim;
        let z = cfg.patch_size;
        let patch = |label: &str| -> Result<ItemMemory> {
            let mut r = rng.named(label);
            match cfg.patch_mapping {
                PatchMapping::Linear if z >= 2 => build_linear(&mut r, z, dim),
                _ => build_orthogonal(&mut r, z, dim),
            }
        };
        Ok(Self {
            values: build_orthogonal(&mut rng.named("values"), 2, dim)?,
            patch_x: patch("patch-x")?,
            patch_y: patch("patch-y")?,
            position_x: position_memory(&mut rng.named("position-x"), width, cfg.splits, dim)?,
            position_y: position_memory(&mut rng.named("position-y"), height, cfg.splits, dim)?,
        })
    }
}

/// Encodes one patch: majority over `patch_x[i] ⊗ patch_y[j] ⊗ values[P[i, j]]`.
pub fn encode_patch(
    patch: &Patch,
    values: &ItemMemory,
    patch_x: &ItemMemory,
    patch_y: &ItemMemory,
    rng: &mut RandomSource,
) -> Result<Hypervector> {
    let z = patch.size();
    if patch_x.len() != z || patch_y.len() != z || values.len() != 2 {
        return Err(HdcError::InvalidConfig(format!(
            "patch of size {z} needs {z}-level position memories and a 2-entry value memory"
        )));
    }
    let dim = values.dim();
    check_same(dim, patch_x.dim())?;
    check_same(dim, patch_y.dim())?;
    let mut terms = Vec::with_capacity(z * z);
    for j in 0..z {
        for i in 0..z {
            let v = &values.entries()[patch.get(i, j) as usize];
            terms.push(patch_x.entries()[i].bind(&patch_y.entries()[j])?.bind(v)?);
        }
    }
    crate::bundle::bundle_all(&terms, rng)
}

/// Contiguous table of hypervector words, `words_per` words per entry.
#[derive(Debug, Clone)]
struct WordTable {
    words: Vec<u64>,
    words_per: usize,
}

impl WordTable {
    fn new(words_per: usize) -> Self {
        Self {
            words: Vec::new(),
            words_per,
        }
    }

    fn push(&mut self, v: &Hypervector) {
        self.words.extend_from_slice(v.words());
    }

    #[inline]
    fn word(&self, entry: usize, w: usize) -> u64 {
        self.words[entry * self.words_per + w]
    }
}

/// An encoder with its memories and precomputed bound terms.
#[derive(Debug, Clone)]
pub struct ImageEncoder {
    cfg: EncoderConfig,
    width: usize,
    height: usize,
    memories: ImageMemories,
    /// POI: patch terms, entry `value * z² + j * z + i`.
    /// Pixel-wise / permutation: pixel terms, entry `value * w * h + y * w + x`.
    terms: WordTable,
    /// POI only: global position terms `gx[x] ⊗ gy[y]`, entry `y * w + x`.
    positions: WordTable,
}

impl ImageEncoder {
    pub fn new(
        cfg: EncoderConfig,
        width: usize,
        height: usize,
        rng: &RandomSource,
    ) -> Result<Self> {
        let memories = ImageMemories::build(&cfg, width, height, rng)?;
        Self::with_memories(cfg, width, height, memories, rng)
    }

    pub fn with_memories(
        cfg: EncoderConfig,
        width: usize,
        height: usize,
        memories: ImageMemories,
        rng: &RandomSource,
    ) -> Result<Self> {
        cfg.validate(width, height)?;
        if memories.position_x.len() != width || memories.position_y.len() != height {
            return Err(HdcError::InvalidConfig(format!(
                "position memories ({}x{}) do not match image size {width}x{height}",
                memories.position_x.len(),
                memories.position_y.len()
            )));
        }
        let nw = word_count(cfg.dim);
        let mut terms = WordTable::new(nw);
        let mut positions = WordTable::new(nw);
        let values = memories.values.entries();
        match cfg.kind {
            EncoderKind::Poi => {
                let z = cfg.patch_size;
                for v in values {
                    for j in 0..z {
                        for i in 0..z {
                            let t = memories.patch_x.entries()[i]
                                .bind(&memories.patch_y.entries()[j])?
                                .bind(v)?;
                            terms.push(&t);
                        }
                    }
                }
                for y in 0..height {
                    for x in 0..width {
                        positions.push(
                            &memories.position_x.entries()[x]
                                .bind(&memories.position_y.entries()[y])?,
                        );
                    }
                }
            }
            EncoderKind::Pixelwise => {
                for v in values {
                    for y in 0..height {
                        for x in 0..width {
                            let t = memories.position_x.entries()[x]
                                .bind(&memories.position_y.entries()[y])?
                                .bind(v)?;
                            terms.push(&t);
                        }
                    }
                }
            }
            EncoderKind::Permutation2d => {
                let perm_y = axis_permutation(cfg.dim, &mut rng.named("permutation-y"));
                for v in values {
                    let mut row_base = v.clone();
                    let mut rows = Vec::with_capacity(height);
                    for _ in 0..height {
                        rows.push(row_base.clone());
                        row_base = apply_permutation(&row_base, &perm_y);
                    }
                    for row in &rows {
                        for x in 0..width {
                            terms.push(&row.permute(x as i64));
                        }
                    }
                }
            }
        }
        Ok(Self {
            cfg,
            width,
            height,
            memories,
            terms,
            positions,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn memories(&self) -> &ImageMemories {
        &self.memories
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    fn check_image(&self, img: &BinaryImage) -> Result<()> {
        if img.width() != self.width || img.height() != self.height {
            return Err(HdcError::InvalidConfig(format!(
                "image is {}x{}, encoder expects {}x{}",
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        Ok(())
    }

    /// Threshold and encode a gray-scale image with the configured encoder.
    pub fn encode_image(&self, img: &Image, rng: &mut RandomSource) -> Result<Hypervector> {
        self.encode(&binarize_image(img, self.cfg.threshold), rng)
    }

    pub fn encode(&self, img: &BinaryImage, rng: &mut RandomSource) -> Result<Hypervector> {
        match self.cfg.kind {
            EncoderKind::Poi => self.encode_poi(img, rng),
            EncoderKind::Pixelwise | EncoderKind::Permutation2d => self.encode_pixels(img, rng),
        }
    }

    /// Patch vector for the POI at `center`.
    pub fn patch_vector(&self, img: &BinaryImage, center: (usize, usize)) -> Result<Hypervector> {
        if self.cfg.kind != EncoderKind::Poi {
            return Err(HdcError::InvalidConfig(
                "patch vectors need the POI encoder".into(),
            ));
        }
        self.check_image(img)?;
        let patch = extract_patch(img, center, self.cfg.patch_size)?;
        Ok(self.patch_vector_of(&patch))
    }

    fn patch_vector_of(&self, patch: &Patch) -> Hypervector {
        let zz = patch.size() * patch.size();
        let pixels = patch.pixels();
        // z² is odd, so the majority never consumes tie bits.
        let mut no_ties = RandomSource::new(0);
        majority_by_word(self.cfg.dim, zz as u32, &mut no_ties, |w, c| {
            for (k, &p) in pixels.iter().enumerate() {
                c.add(self.terms.word(p as usize * zz + k, w));
            }
        })
    }

    fn encode_poi(&self, img: &BinaryImage, rng: &mut RandomSource) -> Result<Hypervector> {
        self.check_image(img)?;
        let pois = select_pois(img);
        if pois.is_empty() {
            log::warn!("image has no points of interest; encoding is a random tie-break vector");
        }
        let patches: Vec<Hypervector> = pois
            .iter()
            .map(|&c| extract_patch(img, c, self.cfg.patch_size).map(|p| self.patch_vector_of(&p)))
            .collect::<Result<_>>()?;
        let width = self.width;
        Ok(majority_by_word(
            self.cfg.dim,
            pois.len() as u32,
            rng,
            |w, c| {
                for (pv, &(x, y)) in patches.iter().zip(&pois) {
                    c.add(pv.words()[w] ^ self.positions.word(y * width + x, w));
                }
            },
        ))
    }

    fn encode_pixels(&self, img: &BinaryImage, rng: &mut RandomSource) -> Result<Hypervector> {
        self.check_image(img)?;
        let area = self.width * self.height;
        let entries: Vec<usize> = (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .map(|(x, y)| img.get(x, y) as usize * area + y * self.width + x)
            .collect();
        Ok(majority_by_word(self.cfg.dim, area as u32, rng, |w, c| {
            for &e in &entries {
                c.add(self.terms.word(e, w));
            }
        }))
    }
}

/// Random permutation of component indices used as the y-axis permutation.
fn axis_permutation(dim: usize, rng: &mut RandomSource) -> Vec<usize> {
    let mut p: Vec<usize> = (0..dim).collect();
    rng.shuffle(&mut p);
    p
}

/// Component `d` of the input moves to position `perm[d]`.
fn apply_permutation(v: &Hypervector, perm: &[usize]) -> Hypervector {
    let mut out = Hypervector::zeros(v.dim()).expect("positive dimension");
    for (d, &target) in perm.iter().enumerate() {
        if v.get(d) {
            out.set(target, true);
        }
    }
    out
}

/// POI-framework encoding of one binary image.
pub fn encode_image_poi(
    img: &BinaryImage,
    encoder: &ImageEncoder,
    rng: &mut RandomSource,
) -> Result<Hypervector> {
    if encoder.cfg.kind != EncoderKind::Poi {
        return Err(HdcError::InvalidConfig(
            "encoder is not configured for POI encoding".into(),
        ));
    }
    encoder.encode_poi(img, rng)
}

/// Pixel-wise encoding of one binary image.
pub fn encode_image_pixelwise(
    img: &BinaryImage,
    encoder: &ImageEncoder,
    rng: &mut RandomSource,
) -> Result<Hypervector> {
    if encoder.cfg.kind != EncoderKind::Pixelwise {
        return Err(HdcError::InvalidConfig(
            "encoder is not configured for pixel-wise encoding".into(),
        ));
    }
    encoder.encode_pixels(img, rng)
}

/// 2D permutation encoding of one binary image.
pub fn encode_image_permutation2d(
    img: &BinaryImage,
    encoder: &ImageEncoder,
    rng: &mut RandomSource,
) -> Result<Hypervector> {
    if encoder.cfg.kind != EncoderKind::Permutation2d {
        return Err(HdcError::InvalidConfig(
            "encoder is not configured for 2D permutation encoding".into(),
        ));
    }
    encoder.encode_pixels(img, rng)
}

#[cfg(test)]
mod tests;
