//! Converts the `mnist` and `fashion-mnist` npm packages into IDX files.
//!
//! ```text
//! cargo run --release -p btcp-core --example npm_to_idx -- <mnist-pkg> <fashion-mnist-pkg> <out-dir>
//! ```
//!
//! The packages store each class as one flat JSON array. MNIST holds 10 000
//! digits as `pixel / 255` rounded to three decimals; Fashion-MNIST holds
//! 7 000 raw bytes-valued images per class. Samples are interleaved by class
//! (one of each class in turn) so that any prefix is roughly balanced.
//! Records that are not exactly 28×28 (the Fashion-MNIST package contains two
//! empty ones) are dropped.
//!
//! Output layout:
//! `<out>/mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte` with 200 test
//! images per class and the rest for training, and the same names under
//! `<out>/fashion-mnist/` with 1 000 test images per class.

use std::path::{Path, PathBuf};

use btcp::data::{write_idx_images, write_idx_labels};
use serde::Deserialize;

const SIDE: usize = 28;
const PIXELS: usize = SIDE * SIDE;

#[derive(Deserialize)]
struct Flat {
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct Nested {
    data: Vec<Vec<u8>>,
}

fn to_byte(v: f64, scaled: bool) -> u8 {
    let v = if scaled { v * 255.0 } else { v };
    v.round().clamp(0.0, 255.0) as u8
}

fn load_class(dir: &Path, class: usize) -> Result<Vec<Vec<u8>>, Box<dyn std::error::Error>> {
    let path = dir.join(format!("{class}.json"));
    let text = std::fs::read_to_string(&path)?;
    if let Ok(nested) = serde_json::from_str::<Nested>(&text) {
        return Ok(nested
            .data
            .into_iter()
            .filter(|img| img.len() == PIXELS)
            .collect());
    }
    let flat: Flat = serde_json::from_str(&text)?;
    let scaled = flat.data.iter().all(|&v| v <= 1.0);
    Ok(flat
        .data
        .chunks_exact(PIXELS)
        .map(|img| img.iter().map(|&v| to_byte(v, scaled)).collect())
        .collect())
}

/// Round-robin over classes, taking `range` of each class's images.
fn interleave(
    classes: &[Vec<Vec<u8>>],
    pick: impl Fn(usize) -> std::ops::Range<usize>,
) -> (Vec<u8>, Vec<u8>) {
    let ranges: Vec<_> = classes.iter().map(|c| pick(c.len())).collect();
    let longest = ranges.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for i in 0..longest {
        for (label, (class, range)) in classes.iter().zip(&ranges).enumerate() {
            if i < range.len() {
                pixels.extend_from_slice(&class[range.start + i]);
                labels.push(label as u8);
            }
        }
    }
    (pixels, labels)
}

fn convert(
    src: &Path,
    out: &Path,
    test_per_class: usize,
) -> Result<(), Box<dyn std::error::Error>> {
    let classes = (0..10)
        .map(|c| load_class(src, c))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::create_dir_all(out)?;
    let (test_px, test_lb) = interleave(&classes, |n| n.saturating_sub(test_per_class)..n);
    let (train_px, train_lb) = interleave(&classes, |n| 0..n.saturating_sub(test_per_class));
    write_idx_images(&out.join("t10k-images-idx3-ubyte"), SIDE, SIDE, &test_px)?;
    write_idx_labels(&out.join("t10k-labels-idx1-ubyte"), &test_lb)?;
    write_idx_images(&out.join("train-images-idx3-ubyte"), SIDE, SIDE, &train_px)?;
    write_idx_labels(&out.join("train-labels-idx1-ubyte"), &train_lb)?;
    println!(
        "{}: {} train, {} test",
        out.display(),
        train_lb.len(),
        test_lb.len()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let [mnist, fashion, out] = args.as_slice() else {
        eprintln!("usage: npm_to_idx <mnist-pkg> <fashion-mnist-pkg> <out-dir>");
        std::process::exit(2);
    };
    convert(&mnist.join("src/digits"), &out.join("mnist"), 200)?;
    convert(
        &fashion.join("src/clothes"),
        &out.join("fashion-mnist"),
        1000,
    )?;
    Ok(())
}
