//! NPY arrays (format versions 1.0 and 2.0).
//!
//! The header is a Python dict literal such as
//! `{'descr': '|u1', 'fortran_order': False, 'shape': (10000, 28, 28, 1), }`.
//! Only C-order integer arrays are read.

use std::fs;
use std::path::Path;

use super::{io_err, DatasetError, DatasetResult, LabeledDataset, CLASS_COUNT};
use crate::encoding::Image;

const MAGIC: &[u8; 6] = b"\x93NUMPY";

fn header_err(field: &'static str, message: impl Into<String>) -> DatasetError {
    DatasetError::NpyHeader {
        field,
        message: message.into(),
    }
}

/// Little-endian (or byte-sized) integer element type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NpyDtype {
    pub signed: bool,
    pub bytes: usize,
}

impl NpyDtype {
    pub const U8: NpyDtype = NpyDtype {
        signed: false,
        bytes: 1,
    };

    fn parse(descr: &str) -> DatasetResult<Self> {
        let bad = || header_err("descr", format!("unsupported dtype '{descr}'"));
        let mut chars = descr.chars();
        let order = chars.next().ok_or_else(bad)?;
        let kind = chars.next().ok_or_else(bad)?;
        let bytes: usize = chars.as_str().parse().map_err(|_| bad())?;
        let signed = match kind {
            'u' => false,
            'i' => true,
            _ => return Err(bad()),
        };
        if !matches!(bytes, 1 | 2 | 4 | 8) {
            return Err(bad());
        }
        let little = match order {
            '<' => true,
            '|' | '=' => bytes == 1 || cfg!(target_endian = "little"),
            '>' => bytes == 1,
            _ => false,
        };
        if !little {
            return Err(header_err(
                "descr",
                format!("byte order of '{descr}' is not little-endian"),
            ));
        }
        Ok(Self { signed, bytes })
    }

    fn descr(&self) -> String {
        let kind = if self.signed { 'i' } else { 'u' };
        let order = if self.bytes == 1 { '|' } else { '<' };
        format!("{order}{kind}{}", self.bytes)
    }

    fn read(&self, raw: &[u8]) -> i128 {
        let mut buf = [0u8; 8];
        buf[..self.bytes].copy_from_slice(raw);
        let u = u64::from_le_bytes(buf);
        if self.signed {
            let shift = 64 - 8 * self.bytes as u32;
            (((u << shift) as i64) >> shift) as i128
        } else {
            u as i128
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NpyHeader {
    pub version: (u8, u8),
    pub dtype: NpyDtype,
    pub fortran_order: bool,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NpyArray {
    pub header: NpyHeader,
    pub data: Vec<u8>,
}

impl NpyArray {
    /// Elements widened to `i128`.
    pub fn values(&self) -> impl Iterator<Item = i128> + '_ {
        let dt = self.header.dtype;
        self.data.chunks_exact(dt.bytes).map(move |c| dt.read(c))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Literal {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

/// Minimal parser for the header dict literal.
struct DictParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl DictParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> DatasetResult<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(header_err(
                "header",
                format!("expected '{}' at offset {}", c as char, self.pos),
            ))
        }
    }

    fn string(&mut self) -> DatasetResult<String> {
        let q = self.peek().filter(|&c| c == b'\'' || c == b'"');
        let q = q.ok_or_else(|| {
            header_err("header", format!("expected string at offset {}", self.pos))
        })?;
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != q {
            self.pos += 1;
        }
        if self.pos == self.s.len() {
            return Err(header_err("header", "unterminated string"));
        }
        let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(out)
    }

    fn value(&mut self) -> DatasetResult<Literal> {
        match self.peek() {
            Some(b'\'') | Some(b'"') => Ok(Literal::Str(self.string()?)),
            Some(b'(') => {
                self.pos += 1;
                let mut dims = Vec::new();
                loop {
                    match self.peek() {
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Literal::Tuple(dims));
                        }
                        Some(c) if c.is_ascii_digit() => {
                            let start = self.pos;
                            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                                self.pos += 1;
                            }
                            let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                            // numpy may print dimensions as e.g. `10000L` on Python 2
                            if self.s.get(self.pos) == Some(&b'L') {
                                self.pos += 1;
                            }
                            dims.push(text.parse().map_err(|_| {
                                header_err("shape", format!("bad dimension {text}"))
                            })?);
                            if self.peek() == Some(b',') {
                                self.pos += 1;
                            }
                        }
                        _ => {
                            return Err(header_err(
                                "shape",
                                "expected a tuple of non-negative integers",
                            ))
                        }
                    }
                }
            }
            _ => {
                for (word, v) in [("True", true), ("False", false)] {
                    if self.s[self.pos..].starts_with(word.as_bytes()) {
                        self.pos += word.len();
                        return Ok(Literal::Bool(v));
                    }
                }
                Err(header_err(
                    "header",
                    format!("unexpected value at offset {}", self.pos),
                ))
            }
        }
    }

    fn dict(&mut self) -> DatasetResult<Vec<(String, Literal)>> {
        self.expect(b'{')?;
        let mut items = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                return Ok(items);
            }
            let key = self.string()?;
            self.expect(b':')?;
            items.push((key, self.value()?));
            if self.peek() == Some(b',') {
                self.pos += 1;
            }
        }
    }
}

fn parse_header_dict(text: &[u8], version: (u8, u8)) -> DatasetResult<NpyHeader> {
    let items = DictParser { s: text, pos: 0 }.dict()?;
    let get = |key: &'static str| {
        items
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| header_err(key, "missing"))
    };
    let dtype = match get("descr")? {
        Literal::Str(s) => NpyDtype::parse(&s)?,
        other => {
            return Err(header_err(
                "descr",
                format!("expected a dtype string, found {other:?}"),
            ))
        }
    };
    let fortran_order = match get("fortran_order")? {
        Literal::Bool(b) => b,
        other => {
            return Err(header_err(
                "fortran_order",
                format!("expected a boolean, found {other:?}"),
            ))
        }
    };
    if fortran_order {
        return Err(header_err(
            "fortran_order",
            "Fortran-ordered arrays are not supported",
        ));
    }
    let shape = match get("shape")? {
        Literal::Tuple(t) => t,
        other => {
            return Err(header_err(
                "shape",
                format!("expected a tuple, found {other:?}"),
            ))
        }
    };
    Ok(NpyHeader {
        version,
        dtype,
        fortran_order,
        shape,
    })
}

pub fn parse_npy(buf: &[u8]) -> DatasetResult<NpyArray> {
    const WHAT: &str = "npy file";
    if buf.len() < 10 {
        return Err(DatasetError::Truncated {
            what: WHAT,
            expected: 10,
            found: buf.len(),
        });
    }
    if &buf[..6] != MAGIC {
        return Err(header_err("magic", "missing \\x93NUMPY prefix"));
    }
    let version = (buf[6], buf[7]);
    let (len, start) = match version.0 {
        1 => (u16::from_le_bytes([buf[8], buf[9]]) as usize, 10),
        2 => {
            if buf.len() < 12 {
                return Err(DatasetError::Truncated {
                    what: WHAT,
                    expected: 12,
                    found: buf.len(),
                });
            }
            (
                u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize,
                12,
            )
        }
        v => {
            return Err(header_err(
                "version",
                format!("format version {v}.{} is not supported", version.1),
            ))
        }
    };
    let text = buf.get(start..start + len).ok_or(DatasetError::Truncated {
        what: WHAT,
        expected: start + len,
        found: buf.len(),
    })?;
    let header = parse_header_dict(text, version)?;
    let count: usize = header.shape.iter().product();
    let data = &buf[start + len..];
    let expected = count * header.dtype.bytes;
    if data.len() < expected {
        return Err(DatasetError::Truncated {
            what: WHAT,
            expected: start + len + expected,
            found: buf.len(),
        });
    }
    if data.len() > expected {
        return Err(DatasetError::TrailingBytes {
            what: WHAT,
            found: data.len() - expected,
        });
    }
    Ok(NpyArray {
        header,
        data: data.to_vec(),
    })
}

fn read_npy(path: &Path) -> DatasetResult<NpyArray> {
    parse_npy(&fs::read(path).map_err(io_err(path))?)
}

/// Image stack `(N, H, W)` or `(N, H, W, 1)` of unsigned bytes plus integer
/// labels of shape `(N,)`.
pub fn load_npy_u8(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> DatasetResult<LabeledDataset> {
    let images_path = images_path.as_ref();
    let imgs = read_npy(images_path)?;
    if imgs.header.dtype != NpyDtype::U8 {
        return Err(header_err(
            "descr",
            format!(
                "images must be unsigned bytes, found '{}'",
                imgs.header.dtype.descr()
            ),
        ));
    }
    let (n, h, w) = match imgs.header.shape[..] {
        [n, h, w] | [n, h, w, 1] if h > 0 && w > 0 => (n, h, w),
        _ => {
            return Err(header_err(
                "shape",
                format!(
                    "expected (N, H, W) or (N, H, W, 1), found {:?}",
                    imgs.header.shape
                ),
            ))
        }
    };
    let labels = read_npy(labels_path.as_ref())?;
    if labels.header.shape.len() != 1 {
        return Err(header_err(
            "shape",
            format!(
                "labels must be one-dimensional, found {:?}",
                labels.header.shape
            ),
        ));
    }
    if labels.header.shape[0] != n {
        return Err(DatasetError::CountMismatch {
            images: n,
            labels: labels.header.shape[0],
        });
    }
    let labels = labels
        .values()
        .enumerate()
        .map(|(index, v)| {
            u32::try_from(v).ok().filter(|&l| l < CLASS_COUNT).ok_or(
                DatasetError::LabelOutOfRange {
                    index,
                    label: v as i64,
                    classes: CLASS_COUNT,
                },
            )
        })
        .collect::<DatasetResult<Vec<_>>>()?;
    let images = imgs
        .data
        .chunks_exact(h * w)
        .map(|px| Image::new(w, h, px.to_vec()).expect("shape checked"))
        .collect();
    let name = images_path
        .parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    LabeledDataset::new(name, images, labels)
}

/// Serializes a C-order array as NPY 1.0, header padded to 64 bytes.
pub fn npy_bytes(dtype: NpyDtype, shape: &[usize], data: &[u8]) -> Vec<u8> {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    let tuple = if dims.len() == 1 {
        format!("({},)", dims[0])
    } else {
        format!("({})", dims.join(", "))
    };
    let mut dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {tuple}, }}",
        dtype.descr()
    );
    let unpadded = 10 + dict.len() + 1;
    dict.push_str(&" ".repeat(unpadded.next_multiple_of(64) - unpadded));
    dict.push('\n');
    let mut out = Vec::with_capacity(10 + dict.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend_from_slice(data);
    out
}

pub fn write_npy(
    path: impl AsRef<Path>,
    dtype: NpyDtype,
    shape: &[usize],
    data: &[u8],
) -> DatasetResult<()> {
    let path = path.as_ref();
    fs::write(path, npy_bytes(dtype, shape, data)).map_err(io_err(path))
}

pub fn write_npy_u8(path: impl AsRef<Path>, shape: &[usize], data: &[u8]) -> DatasetResult<()> {
    write_npy(path, NpyDtype::U8, shape, data)
}
