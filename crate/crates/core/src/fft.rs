//! Two-dimensional complex FFT over square real grids.
//!
//! Forward transforms are unnormalized; the inverse carries the `1/N^2`
//! factor. The second pass works on the transposed layout, so spectral
//! data handed to [`Fft2d::forward_transposed`] callers is indexed
//! `[ky][kx]`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Scalar;

pub(crate) struct Fft2d<T: Scalar> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Clone for Fft2d<T> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
        }
    }
}

impl<T: Scalar> std::fmt::Debug for Fft2d<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2d").field("n", &self.n).finish()
    }
}

impl<T: Scalar> Fft2d<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Row pass, transpose, row pass. Output is in transposed layout.
    pub(crate) fn forward_transposed(&self, real: &[T]) -> Vec<Complex<T>> {
        let n = self.n;
        debug_assert_eq!(real.len(), n * n);
        let mut buf: Vec<Complex<T>> = real.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward.process(&mut buf);
        let mut t = transpose(&buf, n);
        self.forward.process(&mut t);
        t
    }

    /// Inverse of [`Self::forward_transposed`], returning the real part in
    /// standard layout.
    pub(crate) fn inverse_from_transposed(&self, mut spec: Vec<Complex<T>>) -> Vec<T> {
        let n = self.n;
        self.inverse.process(&mut spec);
        let mut buf = transpose(&spec, n);
        self.inverse.process(&mut buf);
        let scale = T::one() / T::from_count(n * n);
        buf.into_iter().map(|c| c.re * scale).collect()
    }
}

fn transpose<T: Copy + Default>(src: &[Complex<T>], n: usize) -> Vec<Complex<T>> {
    const BLOCK: usize = 16;
    let mut dst = vec![Complex::<T>::default(); n * n];
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
    dst
}
