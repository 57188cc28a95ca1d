//! Operator, resolvent and potential checks behind `nac verify`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{norm_inf, Grid2D, GridField};
use crate::kernel::{gaussian_kernel, validate_kernel, KernelTable};
use crate::nonlocal_op::reference::{periodic_gaussian, trapezoid_apply};
use crate::nonlocal_op::{NonlocalOperator, DENSE_LIMIT};
use crate::potential::check_stabilized_force;

use super::config::RunConfig;

/// Relative tolerance for operator agreement checks.
pub const OPERATOR_TOL: f64 = 1e-12;
/// Absolute slack on the resolvent bound `1/a`.
pub const RESOLVENT_TOL: f64 = 1e-10;
pub const RESOLVENT_SHIFTS: [f64; 3] = [0.1, 1.0, 10.0];
pub const RESOLVENT_SAMPLES: usize = 100;
pub const STABILIZED_FORCE_SAMPLES: usize = 100_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(VerifyCheck {
            name: name.into(),
            status: if passed {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: detail.into(),
        });
    }

    fn skip(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.checks.push(VerifyCheck {
            name: name.into(),
            status: CheckStatus::Skipped,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&VerifyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn random_field(grid: &Grid2D<f64>, rng: &mut ChaCha8Rng) -> GridField<f64> {
    grid.sample(|_, _| rng.random_range(-1.0..1.0))
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Runs every check on the configured Gaussian kernel.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let grid = Grid2D::new(cfg.grid.half_width, cfg.grid.nodes)?;
    let kernel = gaussian_kernel(cfg.kernel.delta, &grid)?;
    verify_with_kernel(cfg, kernel)
}

/// Same as [`verify`] with a caller-supplied kernel table.
pub fn verify_with_kernel(cfg: &RunConfig, kernel: KernelTable<f64>) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let grid = *kernel.grid();
    let eps2 = cfg.scheme.eps * cfg.scheme.eps;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.init.seed);

    let kr = validate_kernel(&kernel);
    for c in &kr.checks {
        report.push(
            format!("kernel: {}", c.condition.label()),
            c.passed,
            format!("violation {:.3e}", c.violation),
        );
    }

    let op = NonlocalOperator::new(kernel.clone());
    let lambda_min = op.eigenvalues().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    report.push(
        "operator: positive semidefinite",
        lambda_min >= -OPERATOR_TOL * kernel.mass().max(1.0),
        format!("min eigenvalue {lambda_min:.3e}"),
    );

    if grid.n() > DENSE_LIMIT {
        let why = format!("N = {} > {DENSE_LIMIT}", grid.n());
        report.skip("operator: spectral vs dense", why.clone());
        report.skip("operator: spectral vs trapezoid quadrature", why);
    } else {
        let dense = op.dense_matrix()?;
        let h = grid.h();
        let lookup = |dx: f64, dy: f64| {
            kernel.at_offset((dx / h).round() as isize, (dy / h).round() as isize)
        };
        let gaussian = kernel.delta().map(|d| periodic_gaussian(d, grid.half_width()));
        let (mut worst_dense, mut worst_trap) = (0.0f64, 0.0f64);
        for _ in 0..10 {
            let u = random_field(&grid, &mut rng);
            let lu = op.apply(&u)?;
            worst_dense = worst_dense.max(rel_diff(lu.as_slice(), &dense.matvec(u.as_slice())));
            let trap = match &gaussian {
                Some(k) => trapezoid_apply(k, &grid, &u)?,
                None => trapezoid_apply(&lookup, &grid, &u)?,
            };
            worst_trap = worst_trap.max(rel_diff(lu.as_slice(), trap.as_slice()));
        }
        report.push(
            "operator: spectral vs dense",
            worst_dense <= OPERATOR_TOL,
            format!("max relative difference {worst_dense:.3e}"),
        );
        report.push(
            "operator: spectral vs trapezoid quadrature",
            worst_trap <= OPERATOR_TOL,
            format!("max relative difference {worst_trap:.3e}"),
        );
    }

    for a in RESOLVENT_SHIFTS {
        let mut worst = 0.0f64;
        for _ in 0..RESOLVENT_SAMPLES {
            let r = random_field(&grid, &mut rng);
            let x = op.solve_shifted(a, eps2, &r)?;
            worst = worst.max(norm_inf(&x) / norm_inf(&r));
        }
        report.push(
            format!("resolvent bound a = {a}"),
            worst <= 1.0 / a + RESOLVENT_TOL,
            format!("max ratio {worst:.12} vs 1/a = {}", 1.0 / a),
        );
    }

    let r = random_field(&grid, &mut rng);
    let spectral = op.solve_shifted(1.0, eps2, &r)?;
    match op.solve_shifted_cg(1.0, eps2, &r, 1e-13, 500) {
        Ok((cg, stats)) => {
            let d = rel_diff(cg.as_slice(), spectral.as_slice());
            report.push(
                "solver: conjugate gradient vs spectral",
                d <= 1e-10,
                format!("relative difference {d:.3e} after {} iterations", stats.iterations),
            );
        }
        Err(e) => report.push("solver: conjugate gradient vs spectral", false, e.to_string()),
    }

    let potential = cfg.build_potential()?;
    let sf = check_stabilized_force(&potential, STABILIZED_FORCE_SAMPLES)?;
    report.push(
        "potential: |f(x) + kappa x| <= kappa beta",
        sf.passed,
        format!("max {:.6e}, bound {:.6e}, monotone {}", sf.max_value, sf.bound, sf.monotone),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelTable;

    fn cfg(n: usize) -> RunConfig {
        RunConfig::from_toml_str(&format!("grid.N = {n}\nkernel.delta = 0.25")).unwrap()
    }

    #[test]
    fn defaults_pass() {
        let report = verify(&cfg(8)).unwrap();
        assert!(report.all_passed(), "{report}");
        assert!(report.checks.iter().all(|c| c.status == CheckStatus::Pass));
    }

    #[test]
    fn large_grid_skips_dense() {
        let report = verify(&cfg(64)).unwrap();
        assert!(report.all_passed(), "{report}");
        assert_eq!(
            report.get("operator: spectral vs dense").unwrap().status,
            CheckStatus::Skipped
        );
    }

    #[test]
    fn asymmetric_kernel_fails() {
        let c = cfg(8);
        let grid = Grid2D::new(1.0, 8).unwrap();
        let mut samples = gaussian_kernel(0.25, &grid).unwrap().samples().clone();
        samples.set(1, 0, samples.get(1, 0) * 2.0);
        let table = KernelTable::from_samples(grid, samples, None).unwrap();
        let report = verify_with_kernel(&c, table).unwrap();
        assert!(!report.all_passed());
        assert_eq!(report.get("kernel: J(x) = J(-x)").unwrap().status, CheckStatus::Fail);
    }
}
