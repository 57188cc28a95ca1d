//! Uniform periodic grid on `[-L, L)^2` and grid-function storage.
//!
//! Only the `N` unique nodes per axis are stored: the node at `+L` is the
//! periodic image of the node at `-L`, so the trapezoidal rule over the
//! closed square collapses to a rectangle rule with weight `h^2`.

use ndarray::{Array2, Zip};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest admissible number of nodes per axis.
pub const MIN_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D<T> {
    half_width: T,
    nodes: usize,
    spacing: T,
}

impl<T: Scalar> Grid2D<T> {
    pub fn new(half_width: T, nodes: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "domain half-width must be positive, got {half_width}"
            )));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_NODES} nodes per axis, got {nodes}"
            )));
        }
        let spacing = (half_width + half_width) / T::from_count(nodes);
        Ok(Self {
            half_width,
            nodes,
            spacing,
        })
    }

    /// Half-width `L` of the square domain.
    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// Unique nodes per axis.
    pub fn n(&self) -> usize {
        self.nodes
    }

    /// Total number of unique nodes, `N^2`.
    pub fn len(&self) -> usize {
        self.nodes * self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> T {
        self.spacing
    }

    /// Quadrature weight of a single node.
    pub fn cell_area(&self) -> T {
        self.spacing * self.spacing
    }

    /// Area of the periodic cell, `4 L^2`.
    pub fn area(&self) -> T {
        let side = self.half_width + self.half_width;
        side * side
    }

    /// Coordinate `x_i = -L + i h`.
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::from_count(i) * self.spacing
    }

    pub fn coords(&self) -> Vec<T> {
        (0..self.nodes).map(|i| self.coord(i)).collect()
    }

    /// Samples `f(x, y)` at every node; the first index runs along `x`.
    pub fn sample(&self, mut f: impl FnMut(T, T) -> T) -> GridField<T> {
        let xs = self.coords();
        let values = Array2::from_shape_fn((self.nodes, self.nodes), |(i, j)| f(xs[i], xs[j]));
        GridField { values }
    }

    pub fn zeros(&self) -> GridField<T> {
        self.constant(T::zero())
    }

    pub fn constant(&self, c: T) -> GridField<T> {
        GridField {
            values: Array2::from_elem((self.nodes, self.nodes), c),
        }
    }

    pub fn field_from_vec(&self, values: Vec<T>) -> Result<GridField<T>> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        let values = Array2::from_shape_vec((self.nodes, self.nodes), values)
            .expect("length checked above");
        Ok(GridField { values })
    }

    pub fn field_from_array(&self, values: Array2<T>) -> Result<GridField<T>> {
        let field = GridField { values };
        self.check(&field)?;
        Ok(field)
    }

    /// Verifies that `u` lives on this grid.
    pub fn check(&self, u: &GridField<T>) -> Result<()> {
        let (rows, cols) = u.values.dim();
        if rows != self.nodes || cols != self.nodes {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                found: rows * cols,
            });
        }
        Ok(())
    }
}

/// Real scalar field over the unique nodes of a [`Grid2D`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    values: Array2<T>,
}

impl<T: Scalar> GridField<T> {
    pub(crate) fn from_array_unchecked(values: Array2<T>) -> Self {
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<T> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub fn as_slice(&self) -> &[T] {
        self.values
            .as_slice()
            .expect("grid fields are stored in standard layout")
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[[i, j]]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.values[[i, j]] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.mapv(f),
        }
    }

    /// Fallible pointwise map; stops at the first error.
    pub fn try_map<E>(&self, f: impl Fn(T) -> Result<T, E>) -> Result<Self, E> {
        let mut out = Vec::with_capacity(self.len());
        for &v in self.values.iter() {
            out.push(f(v)?);
        }
        let values = Array2::from_shape_vec(self.values.raw_dim(), out).expect("same shape");
        Ok(Self { values })
    }

    /// `a * self + b * other`, pointwise.
    pub fn lin_comb(&self, a: T, other: &Self, b: T) -> Self {
        let values = Zip::from(&self.values)
            .and(&other.values)
            .map_collect(|&x, &y| a * x + b * y);
        Self { values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin_comb(T::one(), other, -T::one())
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|x| a * x)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::from_count(self.len())
    }
}

/// Discrete inner product `h^2 sum u_ij v_ij`.
pub fn inner<T: Scalar>(u: &GridField<T>, v: &GridField<T>, grid: &Grid2D<T>) -> Result<T> {
    grid.check(u)?;
    grid.check(v)?;
    let sum = Zip::from(&u.values)
        .and(&v.values)
        .fold(T::zero(), |acc, &a, &b| acc + a * b);
    Ok(grid.cell_area() * sum)
}

pub fn norm_l2<T: Scalar>(u: &GridField<T>, grid: &Grid2D<T>) -> Result<T> {
    inner(u, u, grid).map(Float::sqrt)
}

pub fn norm_inf<T: Scalar>(u: &GridField<T>) -> T {
    u.values
        .iter()
        .fold(T::zero(), |acc, &v| Float::max(acc, v.abs()))
}

pub fn min_max<T: Scalar>(u: &GridField<T>) -> (T, T) {
    u.values.iter().fold(
        (T::infinity(), T::neg_infinity()),
        |(lo, hi), &v| (Float::min(lo, v), Float::max(hi, v)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid2D<f64>, rng: &mut ChaCha8Rng) -> GridField<f64> {
        grid.sample(|_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn spacing_at_128_nodes() {
        let g = Grid2D::new(1.0, 128).unwrap();
        assert_eq!(g.h(), 0.015625);
        assert_eq!(Grid2D::new(1.0, 4).unwrap().h(), 0.5);
        assert_eq!(g.coord(0), -1.0);
        assert_eq!(g.coord(64), 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(Grid2D::new(1.0, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid2D::new(0.0, 8), Err(Error::InvalidArgument(_))));
        assert!(matches!(Grid2D::new(-1.0, 8), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn constant_inner_is_area() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let one = g.constant(1.0);
        assert_relative_eq!(inner(&one, &one, &g).unwrap(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn cosine_orthogonal_to_constant() {
        let g = Grid2D::new(1.0, 128).unwrap();
        let pi = std::f64::consts::PI;
        let c = g.sample(|x, y| (pi * x).cos() * (pi * y).cos());
        assert!(inner(&g.constant(1.0), &c, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn inner_matches_double_loop() {
        let g = Grid2D::new(1.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_field(&g, &mut rng);
        let v = random_field(&g, &mut rng);
        let mut brute = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                brute += u.get(i, j) * v.get(i, j);
            }
        }
        brute *= 0.25 * 0.25;
        assert_relative_eq!(inner(&u, &v, &g).unwrap(), brute, max_relative = 1e-14);

        let mut sq = 0.0;
        let mut sup: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                sq += u.get(i, j) * u.get(i, j);
                sup = sup.max(u.get(i, j).abs());
            }
        }
        assert_relative_eq!(norm_l2(&u, &g).unwrap(), (0.0625 * sq).sqrt(), max_relative = 1e-14);
        assert_eq!(norm_inf(&u), sup);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let u = g.constant(-1.0);
        assert_relative_eq!(norm_l2(&u, &g).unwrap(), 2.0, max_relative = 1e-15);
        assert_eq!(norm_inf(&u), 1.0);
        assert_eq!(min_max(&u), (-1.0, -1.0));

        let g4 = Grid2D::new(1.0, 4).unwrap();
        let mut spike = g4.zeros();
        spike.set(2, 1, 3.0);
        assert_eq!(norm_l2(&spike, &g4).unwrap(), 1.5);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g8 = Grid2D::new(1.0, 8).unwrap();
        let g4 = Grid2D::new(1.0, 4).unwrap();
        let err = inner(&g8.zeros(), &g4.zeros(), &g8).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { expected: 64, found: 16 }));
        assert!(g8.field_from_vec(vec![0.0; 10]).is_err());
    }
}
