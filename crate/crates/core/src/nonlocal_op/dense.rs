use crate::scalar::Scalar;

/// Row-major square matrix used by the dense reference checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.dim + col] = v;
    }

    pub fn add(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.dim + col] = self.data[row * self.dim + col] + v;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim, "matvec dimension");
        (0..self.dim)
            .map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.dim).map(|r| self.row(r).iter().copied().sum()).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, v| num_traits::Float::max(m, v.abs()))
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                worst = num_traits::Float::max(worst, (self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }
}
