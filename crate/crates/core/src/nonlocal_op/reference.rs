//! Brute-force assembly of the nonlocal operator on the closed node set
//! `0..=N` per axis, with trapezoidal weights (1/2 on edges, 1/4 on
//! corners), followed by identification of the duplicated periodic nodes.
//!
//! Nothing here touches the FFT path; it exists to cross-check it.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridField};
use crate::kernel::gaussian_density;
use crate::scalar::Scalar;

use super::dense::DenseMatrix;
use super::DENSE_LIMIT;

/// Periodic kernel evaluated at a physical offset `(dx, dy)`.
pub trait PeriodicKernel<T> {
    fn eval(&self, dx: T, dy: T) -> T;
}

impl<T, F: Fn(T, T) -> T> PeriodicKernel<T> for F {
    fn eval(&self, dx: T, dy: T) -> T {
        self(dx, dy)
    }
}

/// Maps an offset to its minimum periodic image in `[-L, L]`.
pub fn minimum_image<T: Scalar>(d: T, half_width: T) -> T {
    let period = half_width + half_width;
    let mut d = d;
    while d > half_width {
        d = d - period;
    }
    while d < -half_width {
        d = d + period;
    }
    d
}

/// The Gaussian, periodized by minimum image, as a closure.
pub fn periodic_gaussian<T: Scalar>(delta: T, half_width: T) -> impl Fn(T, T) -> T {
    move |dx, dy| {
        let x = minimum_image(dx, half_width);
        let y = minimum_image(dy, half_width);
        gaussian_density(x * x + y * y, delta)
    }
}

fn trapezoid_weight<T: Scalar>(m: usize, n: usize) -> T {
    if m == 0 || m == n {
        T::lit(0.5)
    } else {
        T::one()
    }
}

/// Applies the quadrature formulas for `(J*1) u - J*u` on the closed grid.
///
/// `u` is extended periodically to the `(N+1)^2` nodes; the result is
/// restricted back to the unique nodes.
pub fn trapezoid_apply<T: Scalar, K: PeriodicKernel<T>>(
    kernel: &K,
    grid: &Grid2D<T>,
    u: &GridField<T>,
) -> Result<GridField<T>> {
    grid.check(u)?;
    let n = grid.n();
    let h2 = grid.cell_area();
    let x = |m: usize| grid.half_width() * -T::one() + T::from_count(m) * grid.h();
    let ext = |a: usize, b: usize| u.get(a % n, b % n);

    let mut out = grid.zeros();
    for i in 0..n {
        for j in 0..n {
            let mut mass = T::zero();
            let mut conv = T::zero();
            for m1 in 0..=n {
                let w1: T = trapezoid_weight(m1, n);
                for m2 in 0..=n {
                    let w = w1 * trapezoid_weight::<T>(m2, n);
                    let jv = kernel.eval(x(m1) - x(i), x(m2) - x(j));
                    mass = mass + w * jv;
                    conv = conv + w * jv * ext(m1, m2);
                }
            }
            out.set(i, j, h2 * mass * u.get(i, j) - h2 * conv);
        }
    }
    Ok(out)
}

/// Dense `(N+1)^2` trapezoidal assembly with duplicated nodes folded onto
/// their unique representatives; returns the `N^2 x N^2` result.
pub fn trapezoid_matrix<T: Scalar, K: PeriodicKernel<T>>(
    kernel: &K,
    grid: &Grid2D<T>,
) -> Result<DenseMatrix<T>> {
    let n = grid.n();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let h2 = grid.cell_area();
    let x = |m: usize| grid.half_width() * -T::one() + T::from_count(m) * grid.h();
    let unique = |a: usize, b: usize| (a % n) * n + (b % n);

    let mut mat = DenseMatrix::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for m1 in 0..=n {
                let w1: T = trapezoid_weight(m1, n);
                for m2 in 0..=n {
                    let w = h2 * w1 * trapezoid_weight::<T>(m2, n);
                    let jv = w * kernel.eval(x(m1) - x(i), x(m2) - x(j));
                    mat.add(row, row, jv);
                    mat.add(row, unique(m1, m2), -jv);
                }
            }
        }
    }
    Ok(mat)
}
