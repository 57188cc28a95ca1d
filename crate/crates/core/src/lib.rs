//! Stabilized exponential scalar-auxiliary-variable (sESAV) solvers for the
//! two-dimensional periodic nonlocal Allen-Cahn equation
//!
//! ```text
//! d phi / dt = -eps^2 L phi + f(phi),   L phi = (J*1) phi - J*phi
//! ```
//!
//! The nonlocal operator is applied and inverted spectrally (it is
//! circulant on the periodic grid). The first- and second-order schemes
//! dissipate a modified energy for every time step and keep
//! `|phi| <= beta` (the second-order one under a time-step restriction).
//!
//! Numerical code is generic over [`Scalar`] (`f32`, `f64`); the aliases at
//! the crate root fix `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
mod fft;
pub mod grid;
pub mod kernel;
pub mod nonlocal_op;
pub mod potential;
pub mod scalar;
pub mod scheme;

pub use diagnostics::{energy_modified, energy_original, steady_state_reached, Recorder, StepRecord};
pub use error::{Error, Result};
pub use grid::{inner, min_max, norm_inf, norm_l2, Grid2D, GridField};
pub use kernel::{gaussian_kernel, validate_kernel, KernelReport, KernelTable};
pub use nonlocal_op::{DenseMatrix, NonlocalOperator};
pub use potential::{
    check_stabilized_force, default_params, DoubleWell, FloryHuggins, Potential, PotentialKind,
    PotentialModel,
};
pub use scalar::Scalar;
pub use scheme::{
    e1h, g_eval, init_state, mbp_max_tau, predict_half, step, step_sesav1, step_sesav2, Order,
    Predictor, SchemeConfig, SesavState,
};

pub type Grid = Grid2D<f64>;
pub type Field = GridField<f64>;
pub type Kernel = KernelTable<f64>;
pub type Operator = NonlocalOperator<f64>;
pub type State = SesavState<f64>;
pub type Config = SchemeConfig<f64>;
pub type Record = StepRecord<f64>;
pub type Model = PotentialModel<f64>;

pub type Grid32 = Grid2D<f32>;
pub type Field32 = GridField<f32>;
pub type Operator32 = NonlocalOperator<f32>;
pub type State32 = SesavState<f32>;
