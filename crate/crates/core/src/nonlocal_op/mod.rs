//! The discrete nonlocal diffusion operator `L_h u = (J*1) u - J*u`.
//!
//! On the unique-node periodic grid `L_h` is circulant, so the 2D DFT
//! diagonalizes it: `L_h = F^{-1} diag(lambda) F` with
//! `lambda_k = (J*1) - symbol_k`. Application and shifted inversion are
//! both a forward transform, a pointwise multiply and an inverse transform.

mod dense;
pub mod reference;

use ndarray::Array2;
use num_complex::Complex;
use num_traits::Float;

pub use dense::DenseMatrix;

use crate::error::{Error, Result};
use crate::fft::Fft2d;
use crate::grid::{inner, norm_l2, Grid2D, GridField};
use crate::kernel::KernelTable;
use crate::scalar::Scalar;

/// Largest `N` for which [`NonlocalOperator::dense_matrix`] will assemble.
pub const DENSE_LIMIT: usize = 32;

#[derive(Debug, Clone)]
pub struct NonlocalOperator<T: Scalar> {
    kernel: KernelTable<T>,
    eigenvalues: Array2<T>,
    // Same values in the transposed spectral layout produced by `Fft2d`.
    eig_t: Vec<T>,
    fft: Fft2d<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct CgStats<T> {
    pub iterations: usize,
    pub relative_residual: T,
}

impl<T: Scalar> NonlocalOperator<T> {
    pub fn new(kernel: KernelTable<T>) -> Self {
        let n = kernel.grid().n();
        let mass = kernel.mass();
        let mut eigenvalues = kernel.symbol().mapv(|s| mass - s);
        // Constants are annihilated exactly.
        eigenvalues[[0, 0]] = T::zero();
        let mut eig_t = vec![T::zero(); n * n];
        for kx in 0..n {
            for ky in 0..n {
                eig_t[ky * n + kx] = eigenvalues[[kx, ky]];
            }
        }
        Self {
            kernel,
            eigenvalues,
            eig_t,
            fft: Fft2d::new(n),
        }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.kernel.grid()
    }

    pub fn kernel(&self) -> &KernelTable<T> {
        &self.kernel
    }

    /// Spectrum of `L_h`, indexed `[kx][ky]`.
    pub fn eigenvalues(&self) -> &Array2<T> {
        &self.eigenvalues
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eig_t.iter().fold(T::zero(), |m, &v| Float::max(m, v))
    }

    /// Diagonal entry of `L_h`, `(J*1) - h^2 J(0)`, shared by every row.
    pub fn diagonal(&self) -> T {
        self.kernel.mass() - self.grid().cell_area() * self.kernel.samples().get(0, 0)
    }

    fn spectral(&self, u: &GridField<T>, multiplier: impl Fn(T) -> T) -> GridField<T> {
        let n = self.grid().n();
        let mut spec = self.fft.forward_transposed(u.as_slice());
        for (c, &lam) in spec.iter_mut().zip(&self.eig_t) {
            *c = *c * multiplier(lam);
        }
        let values = self.fft.inverse_from_transposed(spec);
        GridField::from_array_unchecked(
            Array2::from_shape_vec((n, n), values).expect("n*n values"),
        )
    }

    /// `L_h u`.
    pub fn apply(&self, u: &GridField<T>) -> Result<GridField<T>> {
        self.grid().check(u)?;
        Ok(self.spectral(u, |lam| lam))
    }

    /// `<L_h u, u>` by Parseval, using a single forward transform.
    pub fn quadratic_form(&self, u: &GridField<T>) -> Result<T> {
        let grid = self.grid();
        grid.check(u)?;
        let spec = self.fft.forward_transposed(u.as_slice());
        let sum: T = spec
            .iter()
            .zip(&self.eig_t)
            .map(|(c, &lam)| lam * c.norm_sqr())
            .sum();
        Ok(grid.cell_area() * sum / T::from_count(grid.len()))
    }

    /// Solves `(a I + eps2 L_h) w = rhs` by spectral division.
    pub fn solve_shifted(&self, a: T, eps2: T, rhs: &GridField<T>) -> Result<GridField<T>> {
        check_shift(a, eps2)?;
        self.grid().check(rhs)?;
        Ok(self.spectral(rhs, |lam| T::one() / (a + eps2 * lam)))
    }

    /// `(a I + eps2 L_h)^{-1} (b I + c L_h) u` in one transform pair.
    pub(crate) fn solve_shifted_of(
        &self,
        a: T,
        eps2: T,
        b: T,
        c: T,
        u: &GridField<T>,
        extra: &GridField<T>,
    ) -> Result<GridField<T>> {
        check_shift(a, eps2)?;
        let grid = self.grid();
        grid.check(u)?;
        grid.check(extra)?;
        let n = grid.n();
        let su = self.fft.forward_transposed(u.as_slice());
        let se = self.fft.forward_transposed(extra.as_slice());
        let spec: Vec<Complex<T>> = su
            .iter()
            .zip(&se)
            .zip(&self.eig_t)
            .map(|((&x, &e), &lam)| (x * (b + c * lam) + e) * (T::one() / (a + eps2 * lam)))
            .collect();
        let values = self.fft.inverse_from_transposed(spec);
        Ok(GridField::from_array_unchecked(
            Array2::from_shape_vec((n, n), values).expect("n*n values"),
        ))
    }

    /// Conjugate-gradient solve of the same shifted system, using
    /// [`Self::apply`] as the matvec. Kept as an independent check on the
    /// spectral division.
    pub fn solve_shifted_cg(
        &self,
        a: T,
        eps2: T,
        rhs: &GridField<T>,
        tol: T,
        max_iter: usize,
    ) -> Result<(GridField<T>, CgStats<T>)> {
        check_shift(a, eps2)?;
        let grid = *self.grid();
        grid.check(rhs)?;
        let op = |v: &GridField<T>| -> Result<GridField<T>> {
            Ok(v.lin_comb(a, &self.apply(v)?, eps2))
        };

        let rhs_norm = norm_l2(rhs, &grid)?;
        let mut x = grid.zeros();
        if rhs_norm == T::zero() {
            return Ok((
                x,
                CgStats {
                    iterations: 0,
                    relative_residual: T::zero(),
                },
            ));
        }
        let mut r = rhs.clone();
        let mut p = r.clone();
        let mut rr = inner(&r, &r, &grid)?;
        for it in 1..=max_iter {
            let ap = op(&p)?;
            let alpha = rr / inner(&p, &ap, &grid)?;
            x = x.lin_comb(T::one(), &p, alpha);
            r = r.lin_comb(T::one(), &ap, -alpha);
            let rr_next = inner(&r, &r, &grid)?;
            let rel = rr_next.sqrt() / rhs_norm;
            if rel <= tol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        relative_residual: rel,
                    },
                ));
            }
            p = r.lin_comb(T::one(), &p, rr_next / rr);
            rr = rr_next;
        }
        Err(Error::NotConverged {
            iterations: max_iter,
            residual: (rr.sqrt() / rhs_norm).to_f64_lossy(),
        })
    }

    /// Explicit `N^2 x N^2` matrix of `L_h`, assembled from the kernel
    /// samples without any transform.
    pub fn dense_matrix(&self) -> Result<DenseMatrix<T>> {
        let n = self.grid().n();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n,
                limit: DENSE_LIMIT,
            });
        }
        let h2 = self.grid().cell_area();
        let samples = self.kernel.samples();
        let mut mat = DenseMatrix::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                let row = i * n + j;
                let mut diag = T::zero();
                for m1 in 0..n {
                    for m2 in 0..n {
                        let col = m1 * n + m2;
                        let di = (m1 + n - i) % n;
                        let dj = (m2 + n - j) % n;
                        let w = h2 * samples.get(di, dj);
                        diag = diag + w;
                        mat.add(row, col, -w);
                    }
                }
                mat.add(row, row, diag);
            }
        }
        Ok(mat)
    }
}

fn check_shift<T: Scalar>(a: T, eps2: T) -> Result<()> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shift must be positive and finite, got {a}"
        )));
    }
    if !(eps2 >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "diffusion coefficient must be non-negative, got {eps2}"
        )));
    }
    Ok(())
}
