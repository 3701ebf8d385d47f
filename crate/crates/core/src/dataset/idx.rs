//! IDX files: big-endian header, magic `0x00000803` for `(count, rows, cols)`
//! unsigned-byte images and `0x00000801` for unsigned-byte labels.
//! Gzip-compressed files are detected by their magic bytes.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{io_err, DatasetError, DatasetResult, LabeledDataset};
use crate::encoding::Image;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Reads a file, inflating it if it starts with the gzip magic.
pub fn read_maybe_gzip(path: &Path) -> DatasetResult<Vec<u8>> {
    let raw = fs::read(path).map_err(io_err(path))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(io_err(path))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(buf: &[u8], at: usize, what: &'static str) -> DatasetResult<u32> {
    buf.get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(DatasetError::Truncated {
            what,
            expected: at + 4,
            found: buf.len(),
        })
}

fn payload<'a>(
    buf: &'a [u8],
    start: usize,
    len: usize,
    what: &'static str,
) -> DatasetResult<&'a [u8]> {
    let end = start + len;
    if buf.len() < end {
        return Err(DatasetError::Truncated {
            what,
            expected: end,
            found: buf.len(),
        });
    }
    if buf.len() > end {
        return Err(DatasetError::TrailingBytes {
            what,
            found: buf.len() - end,
        });
    }
    Ok(&buf[start..end])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` intensities, row-major per image.
    pub pixels: Vec<u8>,
}

pub fn parse_idx_images(buf: &[u8]) -> DatasetResult<IdxImages> {
    const WHAT: &str = "idx image file";
    let magic = be_u32(buf, 0, WHAT)?;
    if magic != IMAGE_MAGIC {
        return Err(DatasetError::BadMagic {
            what: WHAT,
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(buf, 4, WHAT)? as usize;
    let rows = be_u32(buf, 8, WHAT)? as usize;
    let cols = be_u32(buf, 12, WHAT)? as usize;
    if rows == 0 || cols == 0 {
        return Err(DatasetError::Invalid(format!(
            "{WHAT}: image shape {rows}x{cols}"
        )));
    }
    let pixels = payload(buf, 16, count * rows * cols, WHAT)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(buf: &[u8]) -> DatasetResult<Vec<u8>> {
    const WHAT: &str = "idx label file";
    let magic = be_u32(buf, 0, WHAT)?;
    if magic != LABEL_MAGIC {
        return Err(DatasetError::BadMagic {
            what: WHAT,
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(buf, 4, WHAT)? as usize;
    Ok(payload(buf, 8, count, WHAT)?.to_vec())
}

pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> DatasetResult<LabeledDataset> {
    let images_path = images_path.as_ref();
    let imgs = parse_idx_images(&read_maybe_gzip(images_path)?)?;
    let labels = parse_idx_labels(&read_maybe_gzip(labels_path.as_ref())?)?;
    if imgs.count != labels.len() {
        return Err(DatasetError::CountMismatch {
            images: imgs.count,
            labels: labels.len(),
        });
    }
    let area = imgs.rows * imgs.cols;
    let images = imgs
        .pixels
        .chunks_exact(area)
        .map(|px| Image::new(imgs.cols, imgs.rows, px.to_vec()).expect("shape checked"))
        .collect();
    let name = images_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    LabeledDataset::new(name, images, labels.into_iter().map(u32::from).collect())
}

/// Locates `<prefix>-images-idx3-ubyte` / `<prefix>-labels-idx1-ubyte` in
/// `dir`, with or without a `.gz` suffix. `prefix` is `train` or `t10k`.
pub fn find_idx_pair(dir: &Path, prefix: &str) -> DatasetResult<(PathBuf, PathBuf)> {
    let find = |stem: String| -> DatasetResult<PathBuf> {
        for name in [format!("{stem}.gz"), stem.clone()] {
            let p = dir.join(name);
            if p.is_file() {
                return Ok(p);
            }
        }
        Err(DatasetError::Io {
            path: dir.join(&stem),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "file not found (also tried .gz)",
            ),
        })
    };
    Ok((
        find(format!("{prefix}-images-idx3-ubyte"))?,
        find(format!("{prefix}-labels-idx1-ubyte"))?,
    ))
}

pub fn idx_images_bytes(ds: &LabeledDataset) -> Vec<u8> {
    let (w, h) = ds.image_size().unwrap_or((1, 1));
    let mut out = Vec::with_capacity(16 + ds.len() * w * h);
    for v in [IMAGE_MAGIC, ds.len() as u32, h as u32, w as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in &ds.images {
        out.extend_from_slice(img.pixels());
    }
    out
}

pub fn idx_labels_bytes(labels: &[u32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend(labels.iter().map(|&l| l as u8));
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> DatasetResult<()> {
    let gz = path.extension().is_some_and(|e| e == "gz");
    if gz {
        let file = fs::File::create(path).map_err(io_err(path))?;
        let mut enc = GzEncoder::new(file, Compression::default());
        enc.write_all(bytes).map_err(io_err(path))?;
        enc.finish().map_err(io_err(path))?;
        Ok(())
    } else {
        fs::write(path, bytes).map_err(io_err(path))
    }
}

/// Writes the images as an IDX file, gzip-compressed if `path` ends in `.gz`.
pub fn write_idx_images(path: impl AsRef<Path>, ds: &LabeledDataset) -> DatasetResult<()> {
    write_bytes(path.as_ref(), &idx_images_bytes(ds))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u32]) -> DatasetResult<()> {
    write_bytes(path.as_ref(), &idx_labels_bytes(labels))
}

pub fn write_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    ds: &LabeledDataset,
) -> DatasetResult<()> {
    write_idx_images(images_path, ds)?;
    write_idx_labels(labels_path, &ds.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two 2x3 images by hand.
    const GOLDEN_IMAGES: &[u8] = &[
        0, 0, 8, 3, // magic
        0, 0, 0, 2, // count
        0, 0, 0, 2, // rows
        0, 0, 0, 3, // cols
        0, 1, 2, 3, 4, 5, //
        255, 254, 253, 0, 0, 7,
    ];
    const GOLDEN_LABELS: &[u8] = &[0, 0, 8, 1, 0, 0, 0, 2, 7, 3];

    #[test]
    fn golden_files_parse() {
        let imgs = parse_idx_images(GOLDEN_IMAGES).unwrap();
        assert_eq!((imgs.count, imgs.rows, imgs.cols), (2, 2, 3));
        assert_eq!(imgs.pixels[6..], [255, 254, 253, 0, 0, 7]);
        assert_eq!(parse_idx_labels(GOLDEN_LABELS).unwrap(), vec![7, 3]);
    }

    #[test]
    fn magic_is_checked() {
        assert!(matches!(
            parse_idx_labels(GOLDEN_IMAGES),
            Err(DatasetError::BadMagic {
                expected: LABEL_MAGIC,
                found: IMAGE_MAGIC,
                ..
            })
        ));
        assert!(matches!(
            parse_idx_images(GOLDEN_LABELS),
            Err(DatasetError::BadMagic {
                expected: IMAGE_MAGIC,
                found: LABEL_MAGIC,
                ..
            })
        ));
    }

    #[test]
    fn truncation_and_trailing_bytes() {
        assert!(matches!(
            parse_idx_images(&GOLDEN_IMAGES[..GOLDEN_IMAGES.len() - 1]),
            Err(DatasetError::Truncated {
                expected: 28,
                found: 27,
                ..
            })
        ));
        assert!(matches!(
            parse_idx_images(&GOLDEN_IMAGES[..10]),
            Err(DatasetError::Truncated { .. })
        ));
        let mut extra = GOLDEN_LABELS.to_vec();
        extra.push(1);
        assert!(matches!(
            parse_idx_labels(&extra),
            Err(DatasetError::TrailingBytes { found: 1, .. })
        ));
    }

    #[test]
    fn count_mismatch_between_files() {
        let dir = tempfile::tempdir().unwrap();
        let (i, l) = (dir.path().join("i"), dir.path().join("l"));
        fs::write(&i, GOLDEN_IMAGES).unwrap();
        fs::write(&l, [0, 0, 8, 1, 0, 0, 0, 1, 4]).unwrap();
        assert!(matches!(
            load_idx(&i, &l),
            Err(DatasetError::CountMismatch {
                images: 2,
                labels: 1
            })
        ));
    }

    #[test]
    fn gzip_is_transparent() {
        let dir = tempfile::tempdir().unwrap();
        let ds = {
            let (i, l) = (dir.path().join("i"), dir.path().join("l"));
            fs::write(&i, GOLDEN_IMAGES).unwrap();
            fs::write(&l, GOLDEN_LABELS).unwrap();
            load_idx(&i, &l).unwrap()
        };
        assert_eq!(ds.images[1].get(2, 0), 253);
        assert_eq!(ds.images[1].width(), 3);
        let (gi, gl) = (dir.path().join("i.gz"), dir.path().join("l.gz"));
        write_idx(&gi, &gl, &ds).unwrap();
        assert_eq!(fs::read(&gi).unwrap()[..2], [0x1f, 0x8b]);
        let back = load_idx(&gi, &gl).unwrap();
        assert_eq!(back.images, ds.images);
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn finds_standard_names() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t10k-images-idx3-ubyte.gz"), b"").unwrap();
        fs::write(dir.path().join("t10k-labels-idx1-ubyte"), b"").unwrap();
        let (i, l) = find_idx_pair(dir.path(), "t10k").unwrap();
        assert!(i.ends_with("t10k-images-idx3-ubyte.gz"));
        assert!(l.ends_with("t10k-labels-idx1-ubyte"));
        assert!(find_idx_pair(dir.path(), "train").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip(w in 1usize..6, h in 1usize..6, data in prop::collection::vec((any::<u8>(), 0u32..10), 1..20)) {
            let images = data
                .iter()
                .map(|&(p, _)| Image::new(w, h, (0..w * h).map(|k| p.wrapping_add(k as u8)).collect()).unwrap())
                .collect();
            let labels = data.iter().map(|&(_, l)| l).collect();
            let ds = LabeledDataset::new("p", images, labels).unwrap();
            let imgs = parse_idx_images(&idx_images_bytes(&ds)).unwrap();
            prop_assert_eq!(imgs.count, ds.len());
            prop_assert_eq!((imgs.rows, imgs.cols), (h, w));
            let flat: Vec<u8> = ds.images.iter().flat_map(|i| i.pixels().to_vec()).collect();
            prop_assert_eq!(imgs.pixels, flat);
            let labels: Vec<u32> = parse_idx_labels(&idx_labels_bytes(&ds.labels)).unwrap().into_iter().map(u32::from).collect();
            prop_assert_eq!(labels, ds.labels);
        }
    }
}
