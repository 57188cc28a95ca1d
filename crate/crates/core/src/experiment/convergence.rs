//! Temporal self-convergence against a fine second-order reference.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{norm_l2, GridField};
use crate::scheme::{init_state, step, Order, Predictor, SchemeConfig};

use super::config::{RunConfig, Setup};

/// Header of the convergence CSV.
pub const CONVERGENCE_HEADER: &str = "k,tau,sesav1_error,sesav1_rate,sesav2_error,sesav2_rate";

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub k: u32,
    pub tau: f64,
    /// Indexed by scheme order minus one.
    pub errors: [f64; 2],
    pub rates: [Option<f64>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub t_final: f64,
    pub reference_k: u32,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CONVERGENCE_HEADER}");
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.6e},{:.4e},{},{:.4e},{}",
                r.k,
                r.tau,
                r.errors[0],
                rate(r.rates[0]),
                r.errors[1],
                rate(r.rates[1])
            );
        }
        s
    }

    pub fn row(&self, k: u32) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// `ln(e_{i-1}/e_i) / ln(tau_{i-1}/tau_i)`; `None` for the first entry and
/// `0` when two consecutive step sizes coincide.
pub fn convergence_rates(taus: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(taus.len(), errors.len(), "one error per step size");
    let mut rates = vec![None; taus.len()];
    for i in 1..taus.len() {
        let ratio = taus[i - 1] / taus[i];
        rates[i] = Some(if ratio == 1.0 {
            0.0
        } else {
            (errors[i - 1] / errors[i]).ln() / ratio.ln()
        });
    }
    rates
}

/// Advances `setup.phi0` by `steps` steps of size `t_final / steps`.
pub fn integrate(
    setup: &Setup,
    order: Order,
    predictor: Predictor,
    t_final: f64,
    steps: usize,
) -> Result<GridField<f64>> {
    let tau = t_final / steps as f64;
    let cfg = SchemeConfig::new(tau, setup.scheme.eps, order)?.with_predictor(predictor);
    let mut st = init_state(setup.phi0.clone(), &setup.potential, &setup.grid)?;
    for _ in 0..steps {
        st = step(&st, &cfg, &setup.op, &setup.potential)?;
    }
    Ok(st.phi)
}

/// Second-order, semi-implicit predictor, `tau = T / 2^reference_k`.
pub fn reference_solution(setup: &Setup, t_final: f64, reference_k: u32) -> Result<GridField<f64>> {
    integrate(setup, Order::Second, Predictor::SemiImplicit, t_final, 1usize << reference_k)
}

/// Errors of both schemes at `tau = T/2^k` for each `k` in `k_list`,
/// measured in the discrete `L^2` norm (weight `h^2` on the unique nodes).
pub fn run_convergence(cfg: &RunConfig, k_list: &[u32]) -> Result<ConvergenceTable> {
    let reference_k = cfg.convergence.reference_k;
    if k_list.is_empty() {
        return Err(Error::Config("empty k list".into()));
    }
    if let Some(&k) = k_list.iter().find(|&&k| k > reference_k || k > 30) {
        return Err(Error::Config(format!(
            "k = {k} must not exceed the reference level {reference_k} (max 30)"
        )));
    }
    let t_final = cfg.run.t_final;
    if !(t_final > 0.0) {
        return Err(Error::Config("convergence needs run.T_final > 0".into()));
    }
    let setup = cfg.build()?;
    let reference = reference_solution(&setup, t_final, reference_k)?;

    let taus: Vec<f64> = k_list.iter().map(|&k| t_final / (1u64 << k) as f64).collect();
    let mut errors = [Vec::new(), Vec::new()];
    for (slot, order) in [Order::First, Order::Second].into_iter().enumerate() {
        for &k in k_list {
            let phi = integrate(&setup, order, setup.scheme.predictor, t_final, 1usize << k)?;
            errors[slot].push(norm_l2(&phi.sub(&reference), &setup.grid)?);
        }
    }
    let rates = [convergence_rates(&taus, &errors[0]), convergence_rates(&taus, &errors[1])];
    let rows = k_list
        .iter()
        .enumerate()
        .map(|(i, &k)| ConvergenceRow {
            k,
            tau: taus[i],
            errors: [errors[0][i], errors[1][i]],
            rates: [rates[0][i], rates[1][i]],
        })
        .collect();
    Ok(ConvergenceTable {
        t_final,
        reference_k,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_of_exact_power_laws() {
        let taus = [0.1, 0.05, 0.025];
        let r = convergence_rates(&taus, &[1e-2, 2.5e-3, 6.25e-4]);
        assert_eq!(r[0], None);
        assert!((r[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((r[2].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_tau_gives_zero_rate() {
        assert_eq!(convergence_rates(&[0.1, 0.1], &[1e-3, 2e-3])[1], Some(0.0));
    }

    #[test]
    fn small_study_has_expected_orders() {
        let cfg = RunConfig::from_toml_str(
            "grid.N = 16\nkernel.delta = 0.1\nscheme.eps = 0.1\nrun.T_final = 0.5\nconvergence.reference_k = 12",
        )
        .unwrap();
        let table = run_convergence(&cfg, &[5, 6, 7]).unwrap();
        let last = table.row(7).unwrap();
        assert!((last.rates[0].unwrap() - 1.0).abs() < 0.1, "{:?}", table);
        assert!((last.rates[1].unwrap() - 2.0).abs() < 0.1, "{:?}", table);
        let csv = table.to_csv();
        assert_eq!(csv.lines().next().unwrap(), CONVERGENCE_HEADER);
        assert_eq!(csv.lines().count(), 4);
        assert!(run_convergence(&cfg, &[13]).is_err());
    }
}
