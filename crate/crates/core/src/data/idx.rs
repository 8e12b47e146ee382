//! IDX files as distributed for MNIST and Fashion-MNIST: a big-endian magic
//! (`0x00000803` for u8 images, `0x00000801` for u8 labels), big-endian
//! `u32` dimensions, then raw bytes.

use std::fs;
use std::path::Path;

use super::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Class count assumed for IDX label files (digits / clothing categories).
pub const IDX_CLASS_COUNT: usize = 10;

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            offset: self.offset as u64,
            message: message.into(),
        }
    }

    fn u32_be(&mut self) -> Result<u32> {
        let chunk = self
            .bytes
            .get(self.offset..self.offset + 4)
            .ok_or_else(|| self.err("truncated header"))?;
        self.offset += 4;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.offset + n;
        if end > self.bytes.len() {
            return Err(Error::Parse {
                path: self.path.to_path_buf(),
                offset: self.bytes.len() as u64,
                message: format!(
                    "truncated payload: need {n} bytes from offset {}",
                    self.offset
                ),
            });
        }
        let out = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(out)
    }
}

/// Reads up to `limit` images; returns `(rows, cols, pixels)`.
pub fn read_idx_images(path: &Path, limit: Option<usize>) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path)?;
    let mut cur = Cursor {
        path,
        bytes: &bytes,
        offset: 0,
    };
    let magic = cur.u32_be()?;
    if magic != IMAGES_MAGIC {
        cur.offset = 0;
        return Err(cur.err(format!("bad image magic {magic:#010x}")));
    }
    let count = cur.u32_be()? as usize;
    let rows = cur.u32_be()? as usize;
    let cols = cur.u32_be()? as usize;
    let n = limit.map_or(count, |l| l.min(count));
    let pixels = cur.take(n * rows * cols)?.to_vec();
    // The header promises `count` images; make sure they are all present.
    if limit.is_some() {
        cur.take((count - n) * rows * cols)?;
    }
    Ok((rows, cols, pixels))
}

pub fn read_idx_labels(path: &Path, limit: Option<usize>) -> Result<Vec<u8>> {
    let bytes = fs::read(path)?;
    let mut cur = Cursor {
        path,
        bytes: &bytes,
        offset: 0,
    };
    let magic = cur.u32_be()?;
    if magic != LABELS_MAGIC {
        cur.offset = 0;
        return Err(cur.err(format!("bad label magic {magic:#010x}")));
    }
    let count = cur.u32_be()? as usize;
    let all = cur.take(count)?;
    let n = limit.map_or(count, |l| l.min(count));
    Ok(all[..n].to_vec())
}

/// Loads images scaled to [0, 1] (pixel / 255) with their labels.
pub fn load_idx(
    images_path: &Path,
    labels_path: &Path,
    limit: Option<usize>,
    split: Split,
) -> Result<LabeledDataset> {
    let (rows, cols, pixels) = read_idx_images(images_path, None)?;
    let labels = read_idx_labels(labels_path, None)?;
    let per_image = rows * cols;
    let image_count = pixels.len().checked_div(per_image).unwrap_or(0);
    if image_count != labels.len() {
        return Err(Error::Dimension {
            context: "IDX image count vs label count",
            expected: image_count,
            actual: labels.len(),
        });
    }
    let n = limit.map_or(image_count, |l| l.min(image_count));
    let data = pixels[..n * per_image]
        .iter()
        .map(|&p| p as f64 / 255.0)
        .collect();
    let labels = labels[..n].iter().map(|&l| l as usize).collect();
    LabeledDataset::new(
        Matrix::new(n, per_image, data)?,
        labels,
        IDX_CLASS_COUNT,
        split,
    )
}

/// Loads images only, for OOD sets whose labels are never consulted. Every
/// label is 0 and the class count is 1.
pub fn load_idx_unlabeled(
    images_path: &Path,
    limit: Option<usize>,
    split: Split,
) -> Result<LabeledDataset> {
    let (rows, cols, pixels) = read_idx_images(images_path, limit)?;
    let per_image = rows * cols;
    let n = pixels.len().checked_div(per_image).unwrap_or(0);
    let data = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    LabeledDataset::new(Matrix::new(n, per_image, data)?, vec![0; n], 1, split)
}

pub fn write_idx_images(path: &Path, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let per_image = rows * cols;
    if per_image == 0 || !pixels.len().is_multiple_of(per_image) {
        return Err(Error::Contract(format!(
            "{} pixels do not divide into {rows}x{cols} images",
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&((pixels.len() / per_image) as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out)?;
    Ok(())
}
