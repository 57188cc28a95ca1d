//! Energies, maximum-bound monitoring and per-step records.

use std::io::Write;

use crate::error::Result;
use crate::grid::{min_max, GridField};
use crate::nonlocal_op::NonlocalOperator;
use crate::potential::Potential;
use crate::scalar::Scalar;
use crate::scheme::{e1h, SesavState};

/// Default threshold on `|dEbar|` between consecutive steps.
pub const STEADY_STATE_TOL: f64 = 1e-8;

/// Header of the diagnostics CSV.
pub const CSV_HEADER: &str = "step,t,E_h,Ebar_h,sup_norm,min,max,g,s";

/// `E_h(phi) = eps^2/2 <L_h phi, phi> + E_1h(phi)`.
pub fn energy_original<T: Scalar, P: Potential<T> + ?Sized>(
    phi: &GridField<T>,
    eps: T,
    potential: &P,
    op: &NonlocalOperator<T>,
) -> Result<T> {
    let quad = op.quadratic_form(phi)?;
    Ok(T::lit(0.5) * eps * eps * quad + e1h(phi, potential, op.grid())?)
}

/// `Ebar_h(phi, s) = eps^2/2 <L_h phi, phi> + s`.
pub fn energy_modified<T: Scalar>(
    phi: &GridField<T>,
    s: T,
    eps: T,
    op: &NonlocalOperator<T>,
) -> Result<T> {
    Ok(T::lit(0.5) * eps * eps * op.quadratic_form(phi)? + s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord<T> {
    pub step: usize,
    pub t: T,
    pub e_original: T,
    pub e_modified: T,
    pub sup: T,
    pub min: T,
    pub max: T,
    pub g: T,
    pub s: T,
}

impl<T: Scalar> StepRecord<T> {
    /// Evaluates both energies and the extrema of `state.phi`.
    pub fn from_state<P: Potential<T> + ?Sized>(
        state: &SesavState<T>,
        t: T,
        eps: T,
        potential: &P,
        op: &NonlocalOperator<T>,
    ) -> Result<Self> {
        // One forward transform serves both energies.
        let quad = op.quadratic_form(&state.phi)?;
        let elastic = T::lit(0.5) * eps * eps * quad;
        let (min, max) = min_max(&state.phi);
        Ok(Self {
            step: state.step_index,
            t,
            e_original: elastic + e1h(&state.phi, potential, op.grid())?,
            e_modified: elastic + state.s,
            sup: num_traits::Float::max(min.abs(), max.abs()),
            min,
            max,
            g: state.g_last,
            s: state.s,
        })
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.e_original, self.e_modified, self.sup, self.min, self.max, self.g, self.s]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.12e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step,
            self.t,
            self.e_original,
            self.e_modified,
            self.sup,
            self.min,
            self.max,
            self.g,
            self.s
        )
    }
}

/// `|Ebar(now) - Ebar(prev)| < tol`.
pub fn steady_state_reached<T: Scalar>(now: &StepRecord<T>, prev: &StepRecord<T>, tol: T) -> bool {
    (now.e_modified - prev.e_modified).abs() < tol
}

/// Append-only time series of [`StepRecord`]s.
#[derive(Debug, Clone, Default)]
pub struct Recorder<T> {
    records: Vec<StepRecord<T>>,
}

impl<T: Scalar> Recorder<T> {
    pub fn new() -> Self {
        Self {
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: StepRecord<T>) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[StepRecord<T>] {
        &self.records
    }

    pub fn last(&self) -> Option<&StepRecord<T>> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest increase of the modified energy between consecutive records,
    /// relative to `1 + |Ebar|`. Non-positive for a dissipative run.
    pub fn max_modified_energy_increase(&self) -> T {
        self.records
            .windows(2)
            .map(|w| (w[1].e_modified - w[0].e_modified) / (T::one() + w[0].e_modified.abs()))
            .fold(T::neg_infinity(), num_traits::Float::max)
    }

    pub fn max_sup(&self) -> T {
        self.records
            .iter()
            .map(|r| r.sup)
            .fold(T::zero(), num_traits::Float::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner, Grid2D};
    use crate::kernel::gaussian_kernel;
    use crate::potential::DoubleWell;
    use crate::scheme::{init_state, step_sesav1, Order, SchemeConfig};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (Grid2D<f64>, NonlocalOperator<f64>) {
        let g = Grid2D::new(1.0, n).unwrap();
        let op = NonlocalOperator::new(gaussian_kernel(0.1, &g).unwrap());
        (g, op)
    }

    fn record(e: f64) -> StepRecord<f64> {
        StepRecord {
            step: 0,
            t: 0.0,
            e_original: e,
            e_modified: e,
            sup: 0.0,
            min: 0.0,
            max: 0.0,
            g: 1.0,
            s: 0.0,
        }
    }

    #[test]
    fn energies_of_constant_fields() {
        let (g, op) = setup(16);
        let dw = DoubleWell::new();
        assert!(energy_original(&g.constant(1.0), 0.05, &dw, &op).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            energy_original(&g.zeros(), 0.05, &dw, &op).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert!(energy_modified(&g.constant(0.3), 0.0, 0.05, &op).unwrap().abs() < 1e-15);
    }

    #[test]
    fn original_energy_matches_dense_form() {
        let (g, op) = setup(8);
        let dense = op.dense_matrix().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = g.sample(|_, _| rng.random_range(-0.9..0.9));
        let lphi = dense.matvec(phi.as_slice());
        let quad: f64 = 0.0625 * lphi.iter().zip(phi.as_slice()).map(|(a, b)| a * b).sum::<f64>();
        let bulk: f64 = 0.0625 * phi.as_slice().iter().map(|v| 0.25 * (v * v - 1.0).powi(2)).sum::<f64>();
        let eps = 0.05;
        let expected = 0.5 * eps * eps * quad + bulk;
        let dw = DoubleWell::new();
        assert_relative_eq!(energy_original(&phi, eps, &dw, &op).unwrap(), expected, max_relative = 1e-12);
        // Parseval form agrees with the explicit inner product.
        let direct = inner(&op.apply(&phi).unwrap(), &phi, &g).unwrap();
        assert_relative_eq!(op.quadratic_form(&phi).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn energies_coincide_at_start_and_modified_decreases() {
        let (g, op) = setup(32);
        let dw = DoubleWell::new();
        let pi = std::f64::consts::PI;
        let phi0 = g.sample(|x, y| 0.5 * (pi * x).cos() * (pi * y).cos());
        let eps = 0.05;
        let mut st = init_state(phi0, &dw, &g).unwrap();
        let r0 = StepRecord::from_state(&st, 0.0, eps, &dw, &op).unwrap();
        assert_eq!(r0.e_original, r0.e_modified);
        assert_eq!(
            energy_modified(&st.phi, st.s, eps, &op).unwrap(),
            energy_original(&st.phi, eps, &dw, &op).unwrap()
        );

        let cfg = SchemeConfig::new(0.05, eps, Order::First).unwrap();
        let mut rec = Recorder::new();
        rec.push(r0);
        for n in 1..=40 {
            st = step_sesav1(&st, &cfg, &op, &dw).unwrap();
            rec.push(StepRecord::from_state(&st, n as f64 * 0.05, eps, &dw, &op).unwrap());
        }
        assert!(rec.max_modified_energy_increase() <= 1e-12);
        assert!(rec.records().iter().all(|r| r.is_finite()));
    }

    #[test]
    fn steady_state_rule() {
        assert!(steady_state_reached(&record(1.0), &record(1.0), STEADY_STATE_TOL));
        assert!(!steady_state_reached(&record(1.0 + 1e-7), &record(1.0), STEADY_STATE_TOL));
        assert!(steady_state_reached(&record(1.0 + 1e-9), &record(1.0), STEADY_STATE_TOL));
    }

    #[test]
    fn csv_layout() {
        let mut rec = Recorder::new();
        rec.push(record(0.5));
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "step,t,E_h,Ebar_h,sup_norm,min,max,g,s");
        assert_eq!(lines.next().unwrap().split(',').count(), 9);
        assert!(lines.next().is_none());
    }
}
