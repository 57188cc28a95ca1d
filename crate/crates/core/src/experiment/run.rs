//! Time-stepping driver with diagnostics, snapshots and a summary.

use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::path::Path;

use crate::diagnostics::{steady_state_reached, Recorder, StepRecord};
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::potential::Potential;
use crate::scheme::{init_state, step, SesavState};

use super::config::{RunConfig, Setup};
use super::snapshot::save_snapshot;

/// Tolerance on `sup |phi| - beta` for the summary's violation flag.
pub const MBP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub steps: usize,
    pub final_time: f64,
    pub final_sup: f64,
    pub beta: f64,
    pub max_sup: f64,
    pub mbp_violated: bool,
    /// Steps after which the scheme flagged `sup > beta + 1e-10`.
    pub mbp_warnings: usize,
    pub min_energy: f64,
    pub max_energy: f64,
    pub min_modified_energy: f64,
    pub max_modified_energy: f64,
    /// Largest relative increase of the modified energy over one step.
    pub max_modified_energy_increase: f64,
    /// First time at which `|dEbar| < steady_tol`.
    pub steady_state_time: Option<f64>,
}

impl Summary {
    fn from_records(records: &Recorder<f64>, beta: f64, mbp_warnings: usize, steady: Option<f64>) -> Self {
        let rs = records.records();
        let last = rs.last().expect("at least the initial record");
        let fold = |f: fn(&StepRecord<f64>) -> f64| {
            rs.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
        };
        let (min_energy, max_energy) = fold(|r| r.e_original);
        let (min_modified_energy, max_modified_energy) = fold(|r| r.e_modified);
        let max_sup = records.max_sup();
        let increase = records.max_modified_energy_increase();
        Self {
            steps: last.step,
            final_time: last.t,
            final_sup: last.sup,
            beta,
            max_sup,
            mbp_violated: max_sup > beta + MBP_TOL,
            mbp_warnings,
            min_energy,
            max_energy,
            min_modified_energy,
            max_modified_energy,
            max_modified_energy_increase: if increase.is_finite() { increase } else { 0.0 },
            steady_state_time: steady,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "final_time = {}", self.final_time);
        let _ = writeln!(s, "final_sup_norm = {:.16e}", self.final_sup);
        let _ = writeln!(s, "max_sup_norm = {:.16e}", self.max_sup);
        let _ = writeln!(s, "beta = {:.16e}", self.beta);
        let _ = writeln!(s, "mbp_violated = {}", self.mbp_violated);
        let _ = writeln!(s, "mbp_warnings = {}", self.mbp_warnings);
        let _ = writeln!(s, "min_energy = {:.16e}", self.min_energy);
        let _ = writeln!(s, "max_energy = {:.16e}", self.max_energy);
        let _ = writeln!(s, "min_modified_energy = {:.16e}", self.min_modified_energy);
        let _ = writeln!(s, "max_modified_energy = {:.16e}", self.max_modified_energy);
        let _ = writeln!(
            s,
            "max_modified_energy_increase = {:.3e}",
            self.max_modified_energy_increase
        );
        match self.steady_state_time {
            Some(t) => {
                let _ = writeln!(s, "steady_state_time = {t}");
            }
            None => {
                let _ = writeln!(s, "steady_state_time = none");
            }
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub setup: Setup,
    pub state: SesavState<f64>,
    pub recorder: Recorder<f64>,
    /// `(requested time, field)` pairs.
    pub snapshots: Vec<(f64, GridField<f64>)>,
    pub summary: Summary,
}

/// Requested snapshot times, sorted and deduplicated.
pub fn snapshot_schedule(cfg: &RunConfig) -> Vec<f64> {
    let t_final = cfg.run.t_final;
    let mut times = cfg.run.snapshot_times.clone();
    if let Some(dt) = cfg.run.snapshot_every {
        let count = (t_final / dt + 1e-9).floor() as usize;
        times.extend((0..=count).map(|k| k as f64 * dt));
    }
    times.retain(|t| (0.0..=t_final).contains(t));
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    times
}

/// Number of fixed steps of size `tau` covering `[0, t_final]`.
pub fn step_count(t_final: f64, tau: f64) -> usize {
    if t_final <= 0.0 {
        0
    } else {
        (t_final / tau - 1e-9).ceil() as usize
    }
}

/// Runs the configured experiment in memory. `observer` sees every record
/// (including the initial one) and may stop the run early.
pub fn simulate_with(
    cfg: &RunConfig,
    mut observer: impl FnMut(&SesavState<f64>, &StepRecord<f64>) -> ControlFlow<()>,
) -> Result<Simulation> {
    let setup = cfg.build()?;
    let Setup {
        op,
        potential,
        scheme,
        phi0,
        ..
    } = &setup;
    let beta = potential.beta();
    let tau = scheme.tau;
    let eps = scheme.eps;

    let mut state = init_state(phi0.clone(), potential, op.grid())?;
    let mut recorder = Recorder::new();
    let mut snapshots = Vec::new();
    let schedule = snapshot_schedule(cfg);
    let mut next_snap = 0;
    let mut mbp_warnings = 0;
    let mut steady = None;

    let mut record = StepRecord::from_state(&state, 0.0, eps, potential, op)?;
    let mut stop = observer(&state, &record).is_break();
    recorder.push(record);
    let n_steps = step_count(cfg.run.t_final, tau);
    for n in 0..=n_steps {
        let t = n as f64 * tau;
        while next_snap < schedule.len() && schedule[next_snap] <= t + 0.5 * tau {
            snapshots.push((schedule[next_snap], state.phi.clone()));
            next_snap += 1;
        }
        if stop || n == n_steps {
            break;
        }
        state = step(&state, scheme, op, potential)?;
        if state.mbp_warning {
            mbp_warnings += 1;
        }
        let prev = record;
        record = StepRecord::from_state(&state, (n + 1) as f64 * tau, eps, potential, op)?;
        if !record.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite diagnostics at step {}",
                n + 1
            )));
        }
        recorder.push(record);
        if steady_state_reached(&record, &prev, cfg.run.steady_tol) {
            steady.get_or_insert(record.t);
            stop |= cfg.run.steady_stop;
        }
        stop |= observer(&state, &record).is_break();
    }

    let summary = Summary::from_records(&recorder, beta, mbp_warnings, steady);
    Ok(Simulation {
        setup,
        state,
        recorder,
        snapshots,
        summary,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    simulate_with(cfg, |_, _| ControlFlow::Continue(()))
}

/// Writes `diagnostics.csv`, `summary.txt` and the snapshots of a finished
/// simulation into `dir`.
pub fn write_outputs(sim: &Simulation, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let csv = std::io::BufWriter::new(std::fs::File::create(dir.join("diagnostics.csv"))?);
    sim.recorder.write_csv(csv)?;
    std::fs::write(dir.join("summary.txt"), sim.summary.to_text())?;
    for (t, phi) in &sim.snapshots {
        save_snapshot(dir, *t, phi, sim.summary.beta)?;
    }
    Ok(())
}

/// Runs the configured experiment and writes its outputs to
/// `cfg.run.output_dir`.
pub fn run_simulation(cfg: &RunConfig) -> Result<Summary> {
    let sim = simulate(cfg)?;
    write_outputs(&sim, &cfg.run.output_dir)?;
    Ok(sim.summary)
}
