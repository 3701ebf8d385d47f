//! Binary model container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "HDCMODEL"
//! version    u32      1
//! dim        u32
//! seed       u64
//! classes    u32      C
//! labels     C x u32
//! bundles    C x (n: u32, dim x u32 counts)
//! prototypes C x ceil(dim / 64) x u64
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::bundle::Bundle;
use crate::classifier::ClassifierModel;
use crate::hv::{word_count, Hypervector};

pub const MAGIC: &[u8; 8] = b"HDCMODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("not a model file: bad magic")]
    BadMagic,

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("model file truncated in {section}")]
    Truncated { section: &'static str },

    #[error("invalid model file: {0}")]
    Invalid(String),
}

pub fn model_to_bytes(model: &ClassifierModel) -> Vec<u8> {
    let dim = model.dim();
    let mut out = Vec::with_capacity(32 + model.class_count() * (4 + 4 * dim + dim / 8 + 8));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&model.seed().to_le_bytes());
    out.extend_from_slice(&(model.class_count() as u32).to_le_bytes());
    for l in model.labels() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for b in model.bundles() {
        out.extend_from_slice(&b.n().to_le_bytes());
        for c in b.counts() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for p in model.prototypes() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8], ModelFileError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or(ModelFileError::Truncated { section })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(
            self.take(4, section)?.try_into().unwrap(),
        ))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(
            self.take(8, section)?.try_into().unwrap(),
        ))
    }
}

pub fn model_from_bytes(buf: &[u8]) -> Result<ClassifierModel, ModelFileError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "header")? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = r.u32("header")?;
    if version != FORMAT_VERSION {
        return Err(ModelFileError::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let dim = r.u32("header")? as usize;
    let seed = r.u64("header")?;
    let classes = r.u32("header")? as usize;
    if dim == 0 || classes == 0 {
        return Err(ModelFileError::Invalid(format!(
            "dim {dim}, {classes} classes"
        )));
    }

    let labels = (0..classes)
        .map(|_| r.u32("label table"))
        .collect::<Result<Vec<_>, _>>()?;

    let mut bundles = Vec::with_capacity(classes);
    for _ in 0..classes {
        let n = r.u32("bundle counts")?;
        let raw = r.take(4 * dim, "bundle counts")?;
        let counts = raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        bundles.push(
            Bundle::from_parts(counts, n).map_err(|e| ModelFileError::Invalid(e.to_string()))?,
        );
    }

    let nw = word_count(dim);
    let mut prototypes = Vec::with_capacity(classes);
    for _ in 0..classes {
        let raw = r.take(8 * nw, "prototypes")?;
        let words = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        prototypes.push(
            Hypervector::from_words(dim, words)
                .map_err(|e| ModelFileError::Invalid(e.to_string()))?,
        );
    }
    if r.pos != buf.len() {
        return Err(ModelFileError::Invalid(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    ClassifierModel::from_parts(labels, bundles, prototypes, seed)
        .map_err(|e| ModelFileError::Invalid(e.to_string()))
}

pub fn save_model(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ClassifierModel, ModelFileError> {
    model_from_bytes(&fs::read(path)?)
}
