//! Initial fields for the three experiment families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridField};

/// `0.5 cos(pi x) cos(pi y)`.
pub fn init_cosine(grid: &Grid2D<f64>) -> GridField<f64> {
    let pi = std::f64::consts::PI;
    grid.sample(|x, y| 0.5 * (pi * x).cos() * (pi * y).cos())
}

/// Annulus of `+1` between radii `r2 < r1` around `(a, b)`, `-1` elsewhere,
/// with `tanh` interfaces of width `sqrt(2) eps`.
pub fn init_rings(
    grid: &Grid2D<f64>,
    eps: f64,
    r1: f64,
    r2: f64,
    a: f64,
    b: f64,
) -> Result<GridField<f64>> {
    if !(r2 > 0.0 && r1 > r2) {
        return Err(Error::InvalidArgument(format!(
            "rings need R1 > R2 > 0, got R1 = {r1}, R2 = {r2}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let w = std::f64::consts::SQRT_2 * eps;
    Ok(grid.sample(|x, y| {
        let r = (x - a).hypot(y - b);
        ((r1 - r) / w).tanh() - ((r2 - r) / w).tanh() - 1.0
    }))
}

/// `amplitude * U(-0.5, 0.5)` per node; deterministic for a given seed.
pub fn init_random(grid: &Grid2D<f64>, amplitude: f64, seed: u64) -> Result<GridField<f64>> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(grid.sample(|_, _| amplitude * rng.random_range(-0.5..=0.5)))
}
