//! Configuration-driven experiments: initial data, the simulation runner,
//! the temporal convergence harness and the operator checks behind
//! `nac verify`.

pub mod config;
pub mod convergence;
pub mod init;
pub mod run;
pub mod snapshot;
pub mod verify;

pub use config::{InitKind, RunConfig, Setup};
pub use convergence::{convergence_rates, run_convergence, ConvergenceRow, ConvergenceTable};
pub use init::{init_cosine, init_random, init_rings};
pub use run::{run_simulation, simulate, simulate_with, write_outputs, Simulation, Summary};
pub use verify::{verify, verify_with_kernel, CheckStatus, VerifyCheck, VerifyReport};
