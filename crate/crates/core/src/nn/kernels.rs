//! Row-blocked matrix kernels.
//!
//! Every kernel is written as a per-output-row function. The sequential path
//! walks rows in order; with the `parallel` feature large products hand rows
//! to rayon. Each output element is accumulated in the same order on both
//! paths, so the results are bit-identical.

/// Products with fewer multiply-adds than this stay on the calling thread.
pub const PARALLEL_THRESHOLD: usize = 1 << 15;

#[inline]
fn row_abt(out: &mut [f64], a_row: &[f64], b: &[f64], k: usize) {
    for (j, o) in out.iter_mut().enumerate() {
        let b_row = &b[j * k..(j + 1) * k];
        let mut acc = 0.0;
        for (x, y) in a_row.iter().zip(b_row) {
            acc += x * y;
        }
        *o = acc;
    }
}

#[inline]
fn row_atb(out: &mut [f64], j: usize, a: &[f64], n: usize, m: usize, b: &[f64], k: usize) {
    for i in 0..n {
        let s = a[i * m + j];
        if s == 0.0 {
            continue;
        }
        for (o, y) in out.iter_mut().zip(&b[i * k..(i + 1) * k]) {
            *o += s * y;
        }
    }
}

#[inline]
fn row_ab(out: &mut [f64], a_row: &[f64], b: &[f64], k: usize) {
    for (j, &s) in a_row.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        for (o, y) in out.iter_mut().zip(&b[j * k..(j + 1) * k]) {
            *o += s * y;
        }
    }
}

/// Single-threaded kernels.
pub mod seq {
    use super::*;

    /// `A (n×k) · Bᵀ` with `B` stored as (m×k); returns (n×m).
    pub fn matmul_abt(a: &[f64], n: usize, k: usize, b: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * m];
        if m == 0 {
            return out;
        }
        for (i, row) in out.chunks_mut(m).enumerate() {
            row_abt(row, &a[i * k..(i + 1) * k], b, k);
        }
        out
    }

    /// `Aᵀ · B` with `A` (n×m) and `B` (n×k); returns (m×k).
    pub fn matmul_atb(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * k];
        if k == 0 {
            return out;
        }
        for (j, row) in out.chunks_mut(k).enumerate() {
            row_atb(row, j, a, n, m, b, k);
        }
        out
    }

    /// `A (n×m) · B (m×k)`; returns (n×k).
    pub fn matmul_ab(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * k];
        if k == 0 {
            return out;
        }
        for (i, row) in out.chunks_mut(k).enumerate() {
            row_ab(row, &a[i * m..(i + 1) * m], b, k);
        }
        out
    }
}

/// Rayon kernels. Always parallel regardless of size.
#[cfg(feature = "parallel")]
pub mod par {
    use super::*;
    use rayon::prelude::*;

    pub fn matmul_abt(a: &[f64], n: usize, k: usize, b: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * m];
        if m == 0 {
            return out;
        }
        out.par_chunks_mut(m)
            .enumerate()
            .for_each(|(i, row)| row_abt(row, &a[i * k..(i + 1) * k], b, k));
        out
    }

    pub fn matmul_atb(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * k];
        if k == 0 {
            return out;
        }
        out.par_chunks_mut(k)
            .enumerate()
            .for_each(|(j, row)| row_atb(row, j, a, n, m, b, k));
        out
    }

    pub fn matmul_ab(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * k];
        if k == 0 {
            return out;
        }
        out.par_chunks_mut(k)
            .enumerate()
            .for_each(|(i, row)| row_ab(row, &a[i * m..(i + 1) * m], b, k));
        out
    }
}

macro_rules! dispatch {
    ($name:ident, $work:expr) => {
        #[cfg(feature = "parallel")]
        {
            if $work >= PARALLEL_THRESHOLD {
                return par::$name;
            }
        }
        #[cfg(not(feature = "parallel"))]
        let _ = $work;
        return seq::$name;
    };
}

type Kernel = fn(&[f64], usize, usize, &[f64], usize) -> Vec<f64>;

fn pick_abt(work: usize) -> Kernel {
    dispatch!(matmul_abt, work);
}

fn pick_atb(work: usize) -> Kernel {
    dispatch!(matmul_atb, work);
}

fn pick_ab(work: usize) -> Kernel {
    dispatch!(matmul_ab, work);
}

pub fn matmul_abt(a: &[f64], n: usize, k: usize, b: &[f64], m: usize) -> Vec<f64> {
    pick_abt(n * k * m)(a, n, k, b, m)
}

pub fn matmul_atb(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
    pick_atb(n * m * k)(a, n, m, b, k)
}

pub fn matmul_ab(a: &[f64], n: usize, m: usize, b: &[f64], k: usize) -> Vec<f64> {
    pick_ab(n * m * k)(a, n, m, b, k)
}
