//! Bulk free-energy densities `F`, forces `f = -F'`, and the stabilization
//! data `(beta, kappa)` the schemes need.
//!
//! `beta` is the maximum bound: `f(beta) <= 0 <= f(-beta)`. `kappa` must
//! dominate `max |f'|` on `[-beta, beta]` so that `xi -> f(xi) + kappa xi`
//! maps `[-beta, beta]` into `[-kappa beta, kappa beta]`.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Samples used to estimate `max |f'|` on `[-beta, beta]`.
const LIPSCHITZ_SAMPLES: usize = 200_001;

pub trait Potential<T: Scalar> {
    fn name(&self) -> &'static str;

    /// `F(x)`.
    fn density(&self, x: T) -> Result<T>;

    /// `f(x) = -F'(x)`.
    fn force(&self, x: T) -> Result<T>;

    /// `f'(x)`.
    fn force_derivative(&self, x: T) -> Result<T>;

    /// Maximum bound `beta`.
    fn beta(&self) -> T;

    /// Stabilization constant `kappa`.
    fn kappa(&self) -> T;
}

impl<T: Scalar, P: Potential<T> + ?Sized> Potential<T> for &P {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn density(&self, x: T) -> Result<T> {
        (**self).density(x)
    }
    fn force(&self, x: T) -> Result<T> {
        (**self).force(x)
    }
    fn force_derivative(&self, x: T) -> Result<T> {
        (**self).force_derivative(x)
    }
    fn beta(&self) -> T {
        (**self).beta()
    }
    fn kappa(&self) -> T {
        (**self).kappa()
    }
}

fn finite<T: Scalar>(name: &'static str, x: T) -> Result<T> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain {
            potential: name,
            value: x.to_f64_lossy(),
        })
    }
}

/// `F = (x^2 - 1)^2 / 4`, `f = x - x^3`, `beta = 1`, `max |f'| = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell<T> {
    kappa: T,
}

impl<T: Scalar> DoubleWell<T> {
    pub fn new() -> Self {
        Self { kappa: T::lit(2.0) }
    }

    pub fn with_kappa(kappa: T) -> Self {
        Self { kappa }
    }

    pub fn lipschitz(&self) -> T {
        T::lit(2.0)
    }
}

impl<T: Scalar> Default for DoubleWell<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Potential<T> for DoubleWell<T> {
    fn name(&self) -> &'static str {
        "double-well"
    }

    fn density(&self, x: T) -> Result<T> {
        let x = finite("double-well", x)?;
        let w = x * x - T::one();
        Ok(T::lit(0.25) * w * w)
    }

    fn force(&self, x: T) -> Result<T> {
        let x = finite("double-well", x)?;
        Ok(x - x * x * x)
    }

    fn force_derivative(&self, x: T) -> Result<T> {
        let x = finite("double-well", x)?;
        Ok(T::one() - T::lit(3.0) * x * x)
    }

    fn beta(&self) -> T {
        T::one()
    }

    fn kappa(&self) -> T {
        self.kappa
    }
}

/// Logarithmic Flory-Huggins potential
/// `F = theta/2 [(1+x) ln(1+x) + (1-x) ln(1-x)] - theta_c/2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloryHuggins<T> {
    theta: T,
    theta_c: T,
    beta: T,
    lipschitz: T,
    kappa: T,
}

impl<T: Scalar> FloryHuggins<T> {
    /// Computes `beta` as the positive root of `f` and `kappa = max |f'|`
    /// on `[-beta, beta]`.
    pub fn new(theta: T, theta_c: T) -> Result<Self> {
        if !(theta > T::zero()) || !(theta_c > theta) {
            return Err(Error::InvalidArgument(format!(
                "Flory-Huggins needs 0 < theta < theta_c, got theta={theta}, theta_c={theta_c}"
            )));
        }
        let f = |x: T| flory_huggins_force(theta, theta_c, x);

        // f > 0 just right of zero (slope theta_c - theta) and f -> -inf at 1.
        let mut lo = T::lit(1e-6);
        let mut hi = T::one() - T::epsilon();
        if !(f(lo) > T::zero()) || !(f(hi) < T::zero()) {
            return Err(Error::InvalidArgument(
                "Flory-Huggins force has no bracketed positive root".into(),
            ));
        }
        loop {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // f(hi) <= 0, so the bound condition holds exactly at beta = hi.
        let beta = hi;

        let mut lipschitz = T::zero();
        let steps = LIPSCHITZ_SAMPLES - 1;
        for k in 0..=steps {
            let x = -beta + (beta + beta) * T::from_count(k) / T::from_count(steps);
            let df = theta_c - theta / (T::one() - x * x);
            lipschitz = Float::max(lipschitz, df.abs());
        }

        Ok(Self {
            theta,
            theta_c,
            beta,
            lipschitz,
            kappa: lipschitz,
        })
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn theta_c(&self) -> T {
        self.theta_c
    }

    /// Sampled `max |f'|` on `[-beta, beta]`.
    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    fn admissible(&self, x: T) -> Result<T> {
        if x.abs() < T::one() {
            Ok(x)
        } else {
            Err(Error::Domain {
                potential: "flory-huggins",
                value: x.to_f64_lossy(),
            })
        }
    }
}

fn flory_huggins_force<T: Scalar>(theta: T, theta_c: T, x: T) -> T {
    theta * T::lit(0.5) * ((T::one() - x) / (T::one() + x)).ln() + theta_c * x
}

impl<T: Scalar> Potential<T> for FloryHuggins<T> {
    fn name(&self) -> &'static str {
        "flory-huggins"
    }

    fn density(&self, x: T) -> Result<T> {
        let x = self.admissible(x)?;
        let (p, m) = (T::one() + x, T::one() - x);
        let half = T::lit(0.5);
        Ok(self.theta * half * (p * p.ln() + m * m.ln()) - self.theta_c * half * x * x)
    }

    fn force(&self, x: T) -> Result<T> {
        let x = self.admissible(x)?;
        Ok(flory_huggins_force(self.theta, self.theta_c, x))
    }

    fn force_derivative(&self, x: T) -> Result<T> {
        let x = self.admissible(x)?;
        Ok(self.theta_c - self.theta / (T::one() - x * x))
    }

    fn beta(&self) -> T {
        self.beta
    }

    fn kappa(&self) -> T {
        self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    DoubleWell,
    FloryHuggins,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::DoubleWell => "double-well",
            Self::FloryHuggins => "flory-huggins",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "double-well" | "doublewell" | "dw" => Ok(Self::DoubleWell),
            "flory-huggins" | "floryhuggins" | "fh" => Ok(Self::FloryHuggins),
            other => Err(Error::Config(format!("unknown potential kind `{other}`"))),
        }
    }
}

/// Runtime-selected potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialModel<T> {
    DoubleWell(DoubleWell<T>),
    FloryHuggins(FloryHuggins<T>),
}

impl<T: Scalar> PotentialModel<T> {
    pub fn kind(&self) -> PotentialKind {
        match self {
            Self::DoubleWell(_) => PotentialKind::DoubleWell,
            Self::FloryHuggins(_) => PotentialKind::FloryHuggins,
        }
    }

    pub fn lipschitz(&self) -> T {
        match self {
            Self::DoubleWell(p) => p.lipschitz(),
            Self::FloryHuggins(p) => p.lipschitz(),
        }
    }

    pub fn with_kappa(self, kappa: T) -> Self {
        match self {
            Self::DoubleWell(_) => Self::DoubleWell(DoubleWell::with_kappa(kappa)),
            Self::FloryHuggins(p) => Self::FloryHuggins(p.with_kappa(kappa)),
        }
    }

    fn inner(&self) -> &dyn Potential<T> {
        match self {
            Self::DoubleWell(p) => p,
            Self::FloryHuggins(p) => p,
        }
    }
}

impl<T: Scalar> Potential<T> for PotentialModel<T> {
    fn name(&self) -> &'static str {
        self.inner().name()
    }
    fn density(&self, x: T) -> Result<T> {
        self.inner().density(x)
    }
    fn force(&self, x: T) -> Result<T> {
        self.inner().force(x)
    }
    fn force_derivative(&self, x: T) -> Result<T> {
        self.inner().force_derivative(x)
    }
    fn beta(&self) -> T {
        self.inner().beta()
    }
    fn kappa(&self) -> T {
        self.inner().kappa()
    }
}

/// Default temperatures of the Flory-Huggins potential.
pub const DEFAULT_THETA: f64 = 0.8;
pub const DEFAULT_THETA_C: f64 = 1.6;

pub fn default_params<T: Scalar>(kind: PotentialKind) -> PotentialModel<T> {
    match kind {
        PotentialKind::DoubleWell => PotentialModel::DoubleWell(DoubleWell::new()),
        PotentialKind::FloryHuggins => PotentialModel::FloryHuggins(
            FloryHuggins::new(T::lit(DEFAULT_THETA), T::lit(DEFAULT_THETA_C))
                .expect("default temperatures are admissible"),
        ),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StabilizedForceReport {
    pub passed: bool,
    /// `max |f(xi) + kappa xi|` over the samples.
    pub max_value: f64,
    /// `kappa beta`.
    pub bound: f64,
    /// `bound - max_value`; negative on failure.
    pub slack: f64,
    /// Whether `f(xi) + kappa xi` was nondecreasing along the samples.
    pub monotone: bool,
}

/// Samples `|f(xi) + kappa xi| <= kappa beta` uniformly on `[-beta, beta]`.
pub fn check_stabilized_force<T: Scalar, P: Potential<T> + ?Sized>(
    potential: &P,
    samples: usize,
) -> Result<StabilizedForceReport> {
    let samples = samples.max(1000);
    let beta = potential.beta();
    let kappa = potential.kappa();
    let bound = kappa * beta;
    let mut max_value = T::zero();
    let mut monotone = true;
    let mut prev = T::neg_infinity();
    for k in 0..samples {
        let xi = -beta + (beta + beta) * T::from_count(k) / T::from_count(samples - 1);
        let v = potential.force(xi)? + kappa * xi;
        max_value = Float::max(max_value, v.abs());
        if v < prev {
            monotone = false;
        }
        prev = v;
    }
    Ok(StabilizedForceReport {
        passed: max_value <= bound + T::lit(1e-12),
        max_value: max_value.to_f64_lossy(),
        bound: bound.to_f64_lossy(),
        slack: (bound - max_value).to_f64_lossy(),
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn double_well_values() {
        let p = DoubleWell::<f64>::new();
        assert_eq!(p.force(0.0).unwrap(), 0.0);
        assert_eq!(p.force(1.0).unwrap(), 0.0);
        assert_eq!(p.force(-1.0).unwrap(), 0.0);
        assert_eq!(p.density(1.0).unwrap(), 0.0);
        assert_eq!(p.density(0.0).unwrap(), 0.25);
        assert!(p.force(f64::NAN).is_err());
    }

    #[test]
    fn flory_huggins_values() {
        let p = FloryHuggins::<f64>::new(0.8, 1.6).unwrap();
        assert_eq!(p.force(0.0).unwrap(), 0.0);
        assert!(p.force(0.9575).unwrap().abs() < 2e-4);
        assert_relative_eq!(p.beta(), 0.9575, epsilon = 1e-4);
        assert!(p.force(p.beta()).unwrap() <= 0.0);
        assert!(p.force(-p.beta()).unwrap() >= 0.0);
        assert!((p.kappa() - 8.02).abs() < 0.05, "kappa = {}", p.kappa());
    }

    #[test]
    fn flory_huggins_rejects_pure_phases() {
        let p = FloryHuggins::<f64>::new(0.8, 1.6).unwrap();
        for x in [1.0, -1.0, 1.5] {
            assert!(matches!(p.force(x), Err(Error::Domain { .. })));
            assert!(matches!(p.density(x), Err(Error::Domain { .. })));
        }
        assert!(FloryHuggins::<f64>::new(1.6, 0.8).is_err());
    }

    #[test]
    fn bisection_root_matches_independent_solve() {
        // Independent Newton iteration on f(x) = 0.4 ln((1-x)/(1+x)) + 1.6 x.
        let mut x = 0.95f64;
        for _ in 0..50 {
            let fx = 0.4 * ((1.0 - x) / (1.0 + x)).ln() + 1.6 * x;
            let dfx = 1.6 - 0.8 / (1.0 - x * x);
            x -= fx / dfx;
        }
        let p = FloryHuggins::<f64>::new(0.8, 1.6).unwrap();
        assert!((p.beta() - x).abs() < 1e-12);
    }

    #[test]
    fn defaults() {
        let dw = default_params::<f64>(PotentialKind::DoubleWell);
        assert_eq!((dw.beta(), dw.kappa()), (1.0, 2.0));
        let fh = default_params::<f64>(PotentialKind::FloryHuggins);
        assert!((fh.kappa() - 8.02).abs() < 0.05);
        assert!(fh.kappa() >= fh.lipschitz());
    }

    #[test]
    fn force_is_negative_derivative_of_density() {
        let h = 1e-6;
        for p in [
            default_params::<f64>(PotentialKind::DoubleWell),
            default_params::<f64>(PotentialKind::FloryHuggins),
        ] {
            let b = p.beta();
            for k in 0..1000 {
                let x = -b + 2.0 * b * (k as f64 + 0.5) / 1000.0;
                let fd = (p.density(x + h).unwrap() - p.density(x - h).unwrap()) / (2.0 * h);
                assert!((fd + p.force(x).unwrap()).abs() < 1e-8, "{} at {x}", p.name());
                let dfd = (p.force(x + h).unwrap() - p.force(x - h).unwrap()) / (2.0 * h);
                assert!((dfd - p.force_derivative(x).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn stabilized_force_bound_for_defaults() {
        let dw = default_params::<f64>(PotentialKind::DoubleWell);
        let r = check_stabilized_force(&dw, 2001).unwrap();
        assert!(r.passed && r.monotone);
        assert_relative_eq!(r.max_value, 2.0, max_relative = 1e-15);

        let fh = default_params::<f64>(PotentialKind::FloryHuggins);
        let r = check_stabilized_force(&fh, 10_000).unwrap();
        assert!(r.passed && r.monotone, "{r:?}");
    }

    #[test]
    fn stabilized_force_bound_fails_for_weak_stabilization() {
        let weak = DoubleWell::<f64>::with_kappa(0.5);
        let r = check_stabilized_force(&weak, 1000).unwrap();
        assert!(!r.passed);
        assert!(!r.monotone);
        assert!(r.slack < 0.0);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("double-well".parse::<PotentialKind>().unwrap(), PotentialKind::DoubleWell);
        assert_eq!("flory_huggins".parse::<PotentialKind>().unwrap(), PotentialKind::FloryHuggins);
        assert!("quartic".parse::<PotentialKind>().is_err());
    }
}
