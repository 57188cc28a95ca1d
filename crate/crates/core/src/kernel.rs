//! Interaction kernels sampled on the periodic offset lattice.
//!
//! A translation-invariant kernel `J(x - y)` is stored by its values at the
//! offsets `(i h, j h)`, wrapped to the minimum periodic image. Its discrete
//! mass is the quadrature of `J * 1`, and its symbol is the (real) spectrum
//! of the periodic convolution `u -> h^2 sum J(x - y) u(y)`.

use ndarray::Array2;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::Fft2d;
use crate::grid::{Grid2D, GridField};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct KernelTable<T> {
    grid: Grid2D<T>,
    samples: GridField<T>,
    mass: T,
    symbol: Array2<T>,
    symbol_imag: T,
    delta: Option<T>,
}

/// Wrapped lattice offset `min(k, N - k)`; exact for even kernels.
pub(crate) fn wrapped_index(k: usize, n: usize) -> usize {
    k.min(n - k)
}

impl<T: Scalar> KernelTable<T> {
    /// Builds a table from raw offset samples. No kernel condition is
    /// enforced here; see [`validate_kernel`].
    pub fn from_samples(grid: Grid2D<T>, samples: GridField<T>, delta: Option<T>) -> Result<Self> {
        grid.check(&samples)?;
        let n = grid.n();
        let w = grid.cell_area();
        let mass = w * samples.values().iter().copied().sum::<T>();

        let spectrum = Fft2d::new(n).forward_transposed(samples.as_slice());
        let mut symbol = Array2::zeros((n, n));
        let mut symbol_imag = T::zero();
        for ky in 0..n {
            for kx in 0..n {
                let c = spectrum[ky * n + kx];
                symbol[[kx, ky]] = w * c.re;
                symbol_imag = Float::max(symbol_imag, (w * c.im).abs());
            }
        }
        Ok(Self {
            grid,
            samples,
            mass,
            symbol,
            symbol_imag,
            delta,
        })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// `J` at offset `(i h, j h)` (periodic).
    pub fn samples(&self) -> &GridField<T> {
        &self.samples
    }

    /// Discrete `J * 1 = h^2 sum J`.
    pub fn mass(&self) -> T {
        self.mass
    }

    /// Real part of the scaled DFT of the samples, indexed `[kx][ky]`.
    pub fn symbol(&self) -> &Array2<T> {
        &self.symbol
    }

    /// Largest discarded imaginary part of the symbol.
    pub fn symbol_imag_max(&self) -> T {
        self.symbol_imag
    }

    pub fn delta(&self) -> Option<T> {
        self.delta
    }

    /// Sample at an arbitrary (possibly negative) lattice offset.
    pub fn at_offset(&self, di: isize, dj: isize) -> T {
        let n = self.grid.n() as isize;
        let i = di.rem_euclid(n) as usize;
        let j = dj.rem_euclid(n) as usize;
        self.samples.get(i, j)
    }
}

/// Closed-form Gaussian `4 / (pi delta^4) exp(-r^2 / delta^2)` in two dimensions.
pub fn gaussian_density<T: Scalar>(r2: T, delta: T) -> T {
    let d2 = delta * delta;
    T::lit(4.0) / (T::PI() * d2 * d2) * (-r2 / d2).exp()
}

/// Samples the two-dimensional Gaussian kernel at wrapped offsets.
pub fn gaussian_kernel<T: Scalar>(delta: T, grid: &Grid2D<T>) -> Result<KernelTable<T>> {
    let limit = grid.half_width() / T::lit(4.0);
    if !(delta > T::zero()) || delta > limit {
        return Err(Error::InvalidArgument(format!(
            "kernel width must lie in (0, {limit}], got {delta}"
        )));
    }
    let n = grid.n();
    let h = grid.h();
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        let dx = T::from_count(wrapped_index(i, n)) * h;
        let dy = T::from_count(wrapped_index(j, n)) * h;
        gaussian_density(dx * dx + dy * dy, delta)
    });
    KernelTable::from_samples(*grid, GridField::from_array_unchecked(values), Some(delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelCondition {
    Nonnegative,
    Even,
    Periodic,
    PositiveMass,
    RealSpectrum,
    BoundedSpectrum,
}

impl KernelCondition {
    pub fn label(self) -> &'static str {
        match self {
            Self::Nonnegative => "J >= 0",
            Self::Even => "J(x) = J(-x)",
            Self::Periodic => "J periodic",
            Self::PositiveMass => "J*1 > 0",
            Self::RealSpectrum => "symbol real",
            Self::BoundedSpectrum => "|symbol| <= J*1",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub condition: KernelCondition,
    pub passed: bool,
    /// Largest observed violation (0 when the condition holds exactly).
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    pub checks: Vec<ConditionCheck>,
}

impl KernelReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, condition: KernelCondition) -> &ConditionCheck {
        self.checks
            .iter()
            .find(|c| c.condition == condition)
            .expect("every condition is checked")
    }
}

/// Checks the kernel conditions plus the spectral facts the operator relies on.
pub fn validate_kernel<T: Scalar>(table: &KernelTable<T>) -> KernelReport {
    let n = table.grid.n();
    let values = table.samples.values();
    let peak = values.iter().fold(T::zero(), |m, v| Float::max(m, v.abs()));
    let scale = Float::max(table.mass.abs(), T::one());

    let negative = values.iter().fold(T::zero(), |m, &v| Float::max(m, -v));

    let mut asymmetry = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mirrored = values[[(n - i) % n, (n - j) % n]];
            asymmetry = Float::max(asymmetry, (values[[i, j]] - mirrored).abs());
        }
    }

    let mut excess = T::zero();
    for &s in table.symbol.iter() {
        excess = Float::max(excess, s.abs() - table.mass);
    }

    let tol = T::lit(1e-12);
    let check = |condition, violation: T, passed: bool| ConditionCheck {
        condition,
        passed,
        violation: violation.to_f64_lossy(),
    };
    KernelReport {
        checks: vec![
            check(KernelCondition::Nonnegative, negative, negative <= T::zero()),
            check(KernelCondition::Even, asymmetry, asymmetry <= tol * peak),
            // The table lives on the periodic offset lattice.
            check(KernelCondition::Periodic, T::zero(), true),
            check(
                KernelCondition::PositiveMass,
                Float::max(-table.mass, T::zero()),
                table.mass > T::zero(),
            ),
            check(
                KernelCondition::RealSpectrum,
                table.symbol_imag,
                table.symbol_imag <= tol * scale,
            ),
            check(
                KernelCondition::BoundedSpectrum,
                Float::max(excess, T::zero()),
                excess <= tol * scale,
            ),
        ],
    }
}
