use std::path::Path;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// A stack of greyscale images, stored row-major, one byte per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageSet {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl ImageSet {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        let size = rows * cols;
        if size == 0 || pixels.len() % size != 0 {
            return Err(Error::Idx { offset: 0, message: format!("{} bytes is not a multiple of {rows}x{cols}", pixels.len()) });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn len(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn image(&self, index: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[index * size..(index + 1) * size]
    }

    pub fn row(&self, index: usize, row: usize) -> &[u8] {
        let img = self.image(index);
        &img[row * self.cols..(row + 1) * self.cols]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdxData {
    Images(ImageSet),
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx { offset, message: format!("truncated header, file has {} bytes", bytes.len()) })
}

/// Parses an IDX container holding either a 3-d unsigned-byte image
/// tensor or a 1-d unsigned-byte label vector.
pub fn parse_idx(bytes: &[u8]) -> Result<IdxData> {
    let magic = read_u32(bytes, 0)?;
    match magic {
        IMAGES_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            let rows = read_u32(bytes, 8)? as usize;
            let cols = read_u32(bytes, 12)? as usize;
            let payload = payload(bytes, 16, count * rows * cols)?;
            if rows == 0 || cols == 0 {
                return Err(Error::Idx { offset: 8, message: format!("image dimensions {rows}x{cols}") });
            }
            Ok(IdxData::Images(ImageSet { rows, cols, pixels: payload.to_vec() }))
        }
        LABELS_MAGIC => {
            let count = read_u32(bytes, 4)? as usize;
            let payload = payload(bytes, 8, count)?;
            if let Some(pos) = payload.iter().position(|&l| l > 9) {
                return Err(Error::Idx { offset: 8 + pos, message: format!("label {} outside 0..=9", payload[pos]) });
            }
            Ok(IdxData::Labels(payload.to_vec()))
        }
        other => Err(Error::Idx { offset: 0, message: format!("unsupported magic 0x{other:08x}") }),
    }
}

fn payload(bytes: &[u8], start: usize, len: usize) -> Result<&[u8]> {
    let end = start + len;
    if bytes.len() < end {
        return Err(Error::Idx {
            offset: bytes.len(),
            message: format!("truncated payload: expected {len} bytes from offset {start}"),
        });
    }
    if bytes.len() > end {
        return Err(Error::Idx { offset: end, message: format!("{} trailing bytes", bytes.len() - end) });
    }
    Ok(&bytes[start..end])
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxData> {
    parse_idx(&std::fs::read(path)?)
}

pub fn load_images(path: impl AsRef<Path>) -> Result<ImageSet> {
    match load_idx(path)? {
        IdxData::Images(images) => Ok(images),
        IdxData::Labels(_) => Err(Error::Idx {
            offset: 0,
            message: format!("magic mismatch: expected 0x{IMAGES_MAGIC:08x}, found 0x{LABELS_MAGIC:08x}"),
        }),
    }
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    match load_idx(path)? {
        IdxData::Labels(labels) => Ok(labels),
        IdxData::Images(_) => Err(Error::Idx {
            offset: 0,
            message: format!("magic mismatch: expected 0x{LABELS_MAGIC:08x}, found 0x{IMAGES_MAGIC:08x}"),
        }),
    }
}
