//! Square 2D FFTs on the "wrapped" layout used internally.
//!
//! Public fields store modes and grid points in natural order
//! (`-N/2 ..= N/2-1` along each axis). The FFT kernels want index `k mod N`
//! instead, so every conversion between the two goes through
//! [`natural_to_wrapped`] and [`wrapped_to_natural`].

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized forward/inverse transforms for `n × n` row-major buffers.
///
/// Forward uses `e^{-2πi jk/n}`, inverse `e^{+2πi jk/n}`; neither scales.
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub(crate) fn forward(&mut self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.forward);
        self.apply(&*plan, buf);
    }

    pub(crate) fn inverse(&mut self, buf: &mut [Complex64]) {
        let plan = Arc::clone(&self.inverse);
        self.apply(&*plan, buf);
    }

    fn apply(&mut self, plan: &dyn Fft<f64>, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        // rustfft treats the buffer as consecutive rows of length n.
        plan.process_with_scratch(buf, &mut self.scratch);
        transpose_square(buf, self.n);
        plan.process_with_scratch(buf, &mut self.scratch);
        transpose_square(buf, self.n);
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            buf.swap(r * n + c, c * n + r);
        }
    }
}

/// Axis position of natural index `i` (mode `i - n/2`) in the wrapped layout.
#[inline]
fn wrap(i: usize, n: usize) -> usize {
    (i + n / 2) % n
}

pub(crate) fn natural_to_wrapped(src: &[Complex64], n: usize, dst: &mut [Complex64]) {
    for r in 0..n {
        let wr = wrap(r, n);
        for c in 0..n {
            dst[wr * n + wrap(c, n)] = src[r * n + c];
        }
    }
}

pub(crate) fn wrapped_to_natural(src: &[Complex64], n: usize, dst: &mut [Complex64]) {
    for r in 0..n {
        let wr = wrap(r, n);
        for c in 0..n {
            dst[r * n + c] = src[wr * n + wrap(c, n)];
        }
    }
}

/// Signed mode (or grid index) stored at wrapped position `w`.
#[inline]
pub(crate) fn wrapped_mode(w: usize, n: usize) -> i64 {
    if w < n / 2 {
        w as i64
    } else {
        w as i64 - n as i64
    }
}
