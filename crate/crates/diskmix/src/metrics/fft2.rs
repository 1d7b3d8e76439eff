//! Two-dimensional FFT on square complex grids, built on rustfft.
//!
//! Row-column decomposition with a blocked in-place transpose; row batches
//! run in parallel. Transforms are unnormalized (forward then inverse scales
//! by the point count), callers divide once.

use crate::par;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub type C64 = Complex<f64>;

pub struct Fft2 {
    pub size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(size: usize) -> Self {
        assert!(size >= 4);
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    /// Unnormalized inverse; divide by size² afterwards.
    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    fn transform(&self, data: &mut [C64], fwd: bool) {
        let n = self.size;
        assert_eq!(data.len(), n * n);
        self.rows(data, fwd);
        transpose_square(data, n);
        self.rows(data, fwd);
        transpose_square(data, n);
    }

    fn rows(&self, data: &mut [C64], fwd: bool) {
        let n = self.size;
        let fft = if fwd { &self.forward } else { &self.inverse };
        let rows_per_chunk = 8;
        par::for_each_chunk(data, n * rows_per_chunk, |_, chunk| {
            let mut scratch = vec![C64::default(); fft.get_inplace_scratch_len()];
            for row in chunk.chunks_mut(n) {
                fft.process_with_scratch(row, &mut scratch);
            }
        });
    }
}

const BLOCK: usize = 64;

/// In-place transpose of a square row-major matrix, cache-blocked.
pub fn transpose_square(data: &mut [C64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    let blocks = n.div_ceil(BLOCK);
    for bi in 0..blocks {
        for bj in bi..blocks {
            let (i0, i1) = (bi * BLOCK, ((bi + 1) * BLOCK).min(n));
            let (j0, j1) = (bj * BLOCK, ((bj + 1) * BLOCK).min(n));
            if bi == bj {
                for i in i0..i1 {
                    for j in (i + 1)..j1 {
                        data.swap(i * n + j, j * n + i);
                    }
                }
            } else {
                for i in i0..i1 {
                    for j in j0..j1 {
                        data.swap(i * n + j, j * n + i);
                    }
                }
            }
        }
    }
}
