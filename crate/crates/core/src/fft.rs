//! Cubic 3D complex FFTs on row-major `m^3` buffers.
//!
//! Each transform is three passes of "1D FFT along the contiguous axis, then
//! rotate the axes `(i, j, k) -> (k, i, j)`", so after three passes the
//! layout is back to the original. Plans are built once per size and shared.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for an `m^3` cube. The inverse is unnormalised.
pub struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

impl Fft3 {
    /// Shared plan for side length `m`.
    pub fn shared(m: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let mut cache = CACHE
            .get_or_init(|| Mutex::new(HashMap::new()))
            .lock()
            .expect("fft plan cache poisoned");
        cache
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    m,
                    forward: planner.plan_fft_forward(m),
                    inverse: planner.plan_fft_inverse(m),
                })
            })
            .clone()
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    /// Unnormalised inverse; divide by `m^3` to undo [`Fft3::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
    }

    /// Integer frequency of index `i` in FFT order (`-m/2` at the Nyquist slot).
    pub fn frequency(&self, i: usize) -> i64 {
        let m = self.m as i64;
        let i = i as i64;
        if i < (m + 1) / 2 {
            i
        } else {
            i - m
        }
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(data.len(), self.len(), "buffer is not {m}^3");
        let mut other = vec![Complex64::new(0.0, 0.0); data.len()];
        let scratch_len = plan.get_inplace_scratch_len();
        let rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(m * m).for_each_init(
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, chunk| plan.process_with_scratch(chunk, scratch),
            );
        };
        rows(data);
        rotate(data, &mut other, m);
        rows(&mut other);
        rotate(&other, data, m);
        rows(data);
        rotate(data, &mut other, m);
        data.copy_from_slice(&other);
    }
}

/// `dst[(k m + i) m + j] = src[(i m + j) m + k]`, in blocks of `k` so that
/// reads from `src` are contiguous runs.
fn rotate(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    const BLOCK: usize = 16;
    dst.par_chunks_mut(BLOCK * m * m)
        .enumerate()
        .for_each(|(blk, planes)| {
            let k0 = blk * BLOCK;
            let width = planes.len() / (m * m);
            for ij in 0..m * m {
                let run = &src[ij * m + k0..ij * m + k0 + width];
                for (b, &z) in run.iter().enumerate() {
                    planes[b * m * m + ij] = z;
                }
            }
        });
}
