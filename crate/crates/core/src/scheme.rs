//! Stabilized exponential scalar-auxiliary-variable time steppers.
//!
//! The nonlinear energy `E_1h(phi) = <F(phi), 1>` is carried by a scalar
//! `s`; the force is scaled by `g = exp(s - E_1h(phi))`, which equals one
//! along the exact flow. Each step is one shifted solve
//! `(a I + eps^2 L_h) phi = rhs` followed by an explicit update of `s`.
//!
//! * first order: `a = 1/tau + kappa g_n`, stable and bound-preserving for
//!   every `tau > 0`;
//! * second order (Crank-Nicolson): `a = 2/tau + kappa g_bar`, with
//!   `(phi_bar, s_bar)` an explicit `O(tau^2)` predictor of the midpoint.
//!   Bound preservation needs `tau <= (kappa/2 + eps^2/h^2)^{-1}`.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::grid::{inner, norm_inf, Grid2D, GridField};
use crate::nonlocal_op::NonlocalOperator;
use crate::potential::Potential;
use crate::scalar::Scalar;

/// Largest exponent `s - E_1h` accepted before `g` is declared divergent.
pub const MAX_G_EXPONENT: f64 = 700.0;

/// Slack on the maximum bound before a second-order step is flagged.
pub const MBP_WARN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_int(order: u32) -> Result<Self> {
        match order {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            o => Err(Error::InvalidArgument(format!("scheme order must be 1 or 2, got {o}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::First => 1,
            Self::Second => 2,
        }
    }
}

/// Midpoint predictor for the second-order scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Predictor {
    /// `1.5 x^n - 0.5 x^{n-1}`; needs one step of history.
    Extrapolation,
    /// A first-order half step of size `tau/2`.
    #[default]
    SemiImplicit,
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Extrapolation => "extrapolation",
            Self::SemiImplicit => "semi-implicit",
        })
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "extrapolation" | "extrapolate" => Ok(Self::Extrapolation),
            "semi-implicit" | "semiimplicit" => Ok(Self::SemiImplicit),
            other => Err(Error::Config(format!("unknown predictor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig<T> {
    pub tau: T,
    pub eps: T,
    pub order: Order,
    pub predictor: Predictor,
    /// Reject second-order steps that exceed [`mbp_max_tau`] instead of
    /// only flagging them.
    pub strict_mbp_tau: bool,
}

impl<T: Scalar> SchemeConfig<T> {
    pub fn new(tau: T, eps: T, order: Order) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {tau}")));
        }
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interface width must be positive, got {eps}"
            )));
        }
        Ok(Self {
            tau,
            eps,
            order,
            predictor: Predictor::default(),
            strict_mbp_tau: false,
        })
    }

    pub fn with_predictor(mut self, predictor: Predictor) -> Self {
        self.predictor = predictor;
        self
    }

    pub fn with_strict_mbp_tau(mut self, strict: bool) -> Self {
        self.strict_mbp_tau = strict;
        self
    }

    pub fn eps2(&self) -> T {
        self.eps * self.eps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SesavState<T> {
    pub phi: GridField<T>,
    pub s: T,
    pub phi_prev: Option<GridField<T>>,
    pub s_prev: Option<T>,
    pub step_index: usize,
    /// The `g` factor used by the step that produced this state.
    pub g_last: T,
    /// Set when the step left `|phi| <= beta` by more than [`MBP_WARN_TOL`].
    pub mbp_warning: bool,
}

impl<T: Scalar> SesavState<T> {
    fn advance(&self, phi: GridField<T>, s: T, g: T) -> Self {
        Self {
            phi,
            s,
            phi_prev: Some(self.phi.clone()),
            s_prev: Some(self.s),
            step_index: self.step_index + 1,
            g_last: g,
            mbp_warning: false,
        }
    }
}

/// `E_1h(phi) = h^2 sum F(phi_ij)`.
pub fn e1h<T: Scalar, P: Potential<T> + ?Sized>(
    phi: &GridField<T>,
    potential: &P,
    grid: &Grid2D<T>,
) -> Result<T> {
    grid.check(phi)?;
    let mut sum = T::zero();
    for &v in phi.values().iter() {
        sum = sum + potential.density(v)?;
    }
    Ok(grid.cell_area() * sum)
}

/// `exp(s - E_1h(phi))`, evaluated from the exponent difference.
pub fn g_eval<T: Scalar, P: Potential<T> + ?Sized>(
    phi: &GridField<T>,
    s: T,
    potential: &P,
    grid: &Grid2D<T>,
) -> Result<T> {
    g_from_exponent(s - e1h(phi, potential, grid)?)
}

fn g_from_exponent<T: Scalar>(exponent: T) -> Result<T> {
    let limit = Float::min(T::lit(MAX_G_EXPONENT), T::max_value().ln());
    if !(exponent <= limit) {
        return Err(Error::Overflow {
            exponent: exponent.to_f64_lossy(),
        });
    }
    Ok(exponent.exp())
}

/// Starts a trajectory with `s^0 = E_1h(phi^0)`.
pub fn init_state<T: Scalar, P: Potential<T> + ?Sized>(
    phi0: GridField<T>,
    potential: &P,
    grid: &Grid2D<T>,
) -> Result<SesavState<T>> {
    grid.check(&phi0)?;
    let sup = norm_inf(&phi0);
    if !(sup <= potential.beta()) {
        return Err(Error::MbpViolation {
            sup: sup.to_f64_lossy(),
            beta: potential.beta().to_f64_lossy(),
        });
    }
    let s = e1h(&phi0, potential, grid)?;
    Ok(SesavState {
        phi: phi0,
        s,
        phi_prev: None,
        s_prev: None,
        step_index: 0,
        g_last: T::one(),
        mbp_warning: false,
    })
}

/// One stabilized first-order step of size `step`; shared by sESAV1 and
/// the semi-implicit midpoint predictor.
fn first_order_update<T: Scalar, P: Potential<T> + ?Sized>(
    phi: &GridField<T>,
    s: T,
    step: T,
    eps2: T,
    op: &NonlocalOperator<T>,
    potential: &P,
) -> Result<(GridField<T>, T, T)> {
    let grid = op.grid();
    let g = g_eval(phi, s, potential, grid)?;
    let a = T::one() / step + potential.kappa() * g;
    let force = phi.try_map(|x| potential.force(x))?;
    let rhs = phi.lin_comb(a, &force, g);
    let next = op.solve_shifted(a, eps2, &rhs)?;
    let s_next = s - g * inner(&force, &next.sub(phi), grid)?;
    Ok((next, s_next, g))
}

/// First-order step.
pub fn step_sesav1<T: Scalar, P: Potential<T> + ?Sized>(
    state: &SesavState<T>,
    cfg: &SchemeConfig<T>,
    op: &NonlocalOperator<T>,
    potential: &P,
) -> Result<SesavState<T>> {
    if cfg.order != Order::First {
        return Err(Error::InvalidArgument("step_sesav1 needs a first-order config".into()));
    }
    let (phi, s, g) = first_order_update(&state.phi, state.s, cfg.tau, cfg.eps2(), op, potential)?;
    Ok(state.advance(phi, s, g))
}

/// Midpoint predictor `(phi_bar, s_bar)` for the second-order step.
pub fn predict_half<T: Scalar, P: Potential<T> + ?Sized>(
    state: &SesavState<T>,
    cfg: &SchemeConfig<T>,
    op: &NonlocalOperator<T>,
    potential: &P,
) -> Result<(GridField<T>, T)> {
    match cfg.predictor {
        Predictor::Extrapolation => {
            let (Some(prev), Some(s_prev)) = (&state.phi_prev, state.s_prev) else {
                return Err(Error::MissingHistory);
            };
            // phi + (phi - prev)/2, exact when the history is constant.
            let half = T::lit(0.5);
            let phi_bar = state.phi.lin_comb(T::one(), &state.phi.sub(prev), half);
            Ok((phi_bar, state.s + half * (state.s - s_prev)))
        }
        Predictor::SemiImplicit => {
            let half = cfg.tau * T::lit(0.5);
            let (phi, s, _) =
                first_order_update(&state.phi, state.s, half, cfg.eps2(), op, potential)?;
            Ok((phi, s))
        }
    }
}

/// Second-order (Crank-Nicolson) step.
pub fn step_sesav2<T: Scalar, P: Potential<T> + ?Sized>(
    state: &SesavState<T>,
    cfg: &SchemeConfig<T>,
    op: &NonlocalOperator<T>,
    potential: &P,
) -> Result<SesavState<T>> {
    if cfg.order != Order::Second {
        return Err(Error::InvalidArgument("step_sesav2 needs a second-order config".into()));
    }
    let grid = op.grid();
    let kappa = potential.kappa();
    if cfg.strict_mbp_tau {
        let max_tau = mbp_max_tau(kappa, cfg.eps, grid).practical;
        if cfg.tau > max_tau {
            return Err(Error::TimeStepTooLarge {
                tau: cfg.tau.to_f64_lossy(),
                max_tau: max_tau.to_f64_lossy(),
            });
        }
    }

    // Extrapolation has no history at the first step.
    let predictor_cfg = if state.phi_prev.is_none() {
        cfg.with_predictor(Predictor::SemiImplicit)
    } else {
        *cfg
    };
    let (phi_bar, s_bar) = predict_half(state, &predictor_cfg, op, potential)?;

    let g = g_eval(&phi_bar, s_bar, potential, grid)?;
    let force_bar = phi_bar.try_map(|x| potential.force(x))?;
    let two_over_tau = T::lit(2.0) / cfg.tau;
    let eps2 = cfg.eps2();
    let stabilized = force_bar.lin_comb(g + g, &phi_bar, (g + g) * kappa);
    let phi = op.solve_shifted_of(
        two_over_tau + kappa * g,
        eps2,
        two_over_tau - kappa * g,
        -eps2,
        &state.phi,
        &stabilized,
    )?;

    let half = T::lit(0.5);
    let mid = state.phi.lin_comb(half, &phi, half);
    let correction = force_bar.lin_comb(T::one(), &mid.sub(&phi_bar), -kappa);
    let s = state.s - g * inner(&correction, &phi.sub(&state.phi), grid)?;

    let mut next = state.advance(phi, s, g);
    next.mbp_warning = norm_inf(&next.phi) > potential.beta() + T::lit(MBP_WARN_TOL);
    Ok(next)
}

/// Dispatches on `cfg.order`.
pub fn step<T: Scalar, P: Potential<T> + ?Sized>(
    state: &SesavState<T>,
    cfg: &SchemeConfig<T>,
    op: &NonlocalOperator<T>,
    potential: &P,
) -> Result<SesavState<T>> {
    match cfg.order {
        Order::First => step_sesav1(state, cfg, op, potential),
        Order::Second => step_sesav2(state, cfg, op, potential),
    }
}

/// Time-step restrictions for bound preservation of the second-order scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbpTauBound<T> {
    kappa: T,
    eps2_over_h2: T,
    /// `(kappa/2 + eps^2/h^2)^{-1}`, assuming `g` stays close to one.
    pub practical: T,
}

impl<T: Scalar> MbpTauBound<T> {
    /// `(kappa G/2 + eps^2/h^2)^{-1}` for a caller-supplied bound `G >= g`.
    pub fn conservative(&self, g_bound: T) -> T {
        T::one() / (self.kappa * g_bound * T::lit(0.5) + self.eps2_over_h2)
    }
}

pub fn mbp_max_tau<T: Scalar>(kappa: T, eps: T, grid: &Grid2D<T>) -> MbpTauBound<T> {
    let h = grid.h();
    let eps2_over_h2 = eps * eps / (h * h);
    MbpTauBound {
        kappa,
        eps2_over_h2,
        practical: T::one() / (kappa * T::lit(0.5) + eps2_over_h2),
    }
}

/// Sharp restriction for the actual operator: the second-order update is a
/// convex combination whenever `2/tau - kappa G >= eps^2 d`, where `d` is
/// the diagonal of `L_h`.
pub fn mbp_max_tau_sharp<T: Scalar>(
    kappa: T,
    eps: T,
    g_bound: T,
    op: &NonlocalOperator<T>,
) -> T {
    T::lit(2.0) / (kappa * g_bound + eps * eps * op.diagonal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::norm_l2;
    use crate::kernel::gaussian_kernel;
    use crate::potential::{default_params, DoubleWell, PotentialKind};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `F = 0`, used to isolate the linear part.
    struct Zero;

    impl Potential<f64> for Zero {
        fn name(&self) -> &'static str {
            "zero"
        }
        fn density(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn force(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn force_derivative(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn beta(&self) -> f64 {
            f64::INFINITY
        }
        fn kappa(&self) -> f64 {
            0.0
        }
    }

    fn setup(n: usize, delta: f64) -> (Grid2D<f64>, NonlocalOperator<f64>) {
        let g = Grid2D::new(1.0, n).unwrap();
        let op = NonlocalOperator::new(gaussian_kernel(delta, &g).unwrap());
        (g, op)
    }

    fn cosine(g: &Grid2D<f64>) -> GridField<f64> {
        let pi = std::f64::consts::PI;
        g.sample(|x, y| 0.5 * (pi * x).cos() * (pi * y).cos())
    }

    #[test]
    fn e1h_of_constant_fields() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let dw = DoubleWell::new();
        assert_eq!(e1h(&g.constant(1.0), &dw, &g).unwrap(), 0.0);
        assert_relative_eq!(e1h(&g.zeros(), &dw, &g).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn e1h_matches_loop() {
        let g = Grid2D::new(1.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = g.sample(|_, _| rng.random_range(-0.5..0.5));
        let mut brute = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let v: f64 = phi.get(i, j);
                brute += 0.25 * (v * v - 1.0).powi(2);
            }
        }
        brute *= 0.0625;
        assert_relative_eq!(e1h(&phi, &DoubleWell::new(), &g).unwrap(), brute, max_relative = 1e-13);
    }

    #[test]
    fn g_identities() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let dw = DoubleWell::new();
        let phi = cosine(&g);
        let e = e1h(&phi, &dw, &g).unwrap();
        assert_eq!(g_eval(&phi, e, &dw, &g).unwrap(), 1.0);
        assert_relative_eq!(
            g_eval(&phi, e + std::f64::consts::LN_2, &dw, &g).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert!(matches!(
            g_eval(&phi, e + 800.0, &dw, &g),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn init_checks_bound() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let dw = DoubleWell::new();
        let st = init_state(cosine(&g), &dw, &g).unwrap();
        assert_eq!(st.step_index, 0);
        assert!(st.phi_prev.is_none());
        assert_eq!(g_eval(&st.phi, st.s, &dw, &g).unwrap(), 1.0);
        assert!(matches!(
            init_state(g.constant(1.5), &dw, &g),
            Err(Error::MbpViolation { .. })
        ));
    }

    #[test]
    fn first_order_with_zero_force_is_linear_decay() {
        let (g, op) = setup(32, 0.1);
        let cfg = SchemeConfig::new(0.1, 0.05, Order::First).unwrap();
        let st = init_state(cosine(&g), &Zero, &g).unwrap();
        let next = step_sesav1(&st, &cfg, &op, &Zero).unwrap();
        let expected = op.solve_shifted(10.0, 0.0025, &st.phi.scale(10.0)).unwrap();
        assert!(norm_inf(&next.phi.sub(&expected)) < 1e-14);
        assert_eq!(next.s, st.s);
    }

    #[test]
    fn pure_phase_is_a_fixed_point() {
        let (g, op) = setup(16, 0.1);
        let dw = DoubleWell::new();
        for order in [Order::First, Order::Second] {
            let cfg = SchemeConfig::new(0.05, 0.05, order).unwrap();
            let st = init_state(g.constant(1.0), &dw, &g).unwrap();
            let next = step(&st, &cfg, &op, &dw).unwrap();
            assert!(norm_inf(&next.phi.map(|v| v - 1.0)) < 1e-14);
            assert_eq!(next.s, st.s);
        }
    }

    #[test]
    fn extrapolation_needs_history() {
        let (g, op) = setup(16, 0.1);
        let dw = DoubleWell::new();
        let cfg = SchemeConfig::new(0.01, 0.05, Order::Second)
            .unwrap()
            .with_predictor(Predictor::Extrapolation);
        let st = init_state(cosine(&g), &dw, &g).unwrap();
        assert!(matches!(predict_half(&st, &cfg, &op, &dw), Err(Error::MissingHistory)));
        // The step itself falls back to the semi-implicit predictor.
        let st1 = step_sesav2(&st, &cfg, &op, &dw).unwrap();
        let mut frozen = st1.clone();
        frozen.phi_prev = Some(frozen.phi.clone());
        frozen.s_prev = Some(frozen.s);
        let (phi_bar, s_bar) = predict_half(&frozen, &cfg, &op, &dw).unwrap();
        assert_eq!(phi_bar, frozen.phi);
        assert_eq!(s_bar, frozen.s);
    }

    #[test]
    fn semi_implicit_predictor_with_zero_force() {
        let (g, op) = setup(16, 0.1);
        let tau = 0.2;
        let cfg = SchemeConfig::new(tau, 0.05, Order::Second).unwrap();
        let st = init_state(cosine(&g), &Zero, &g).unwrap();
        let (phi_bar, s_bar) = predict_half(&st, &cfg, &op, &Zero).unwrap();
        let expected = op
            .solve_shifted(2.0 / tau, 0.0025, &st.phi.scale(2.0 / tau))
            .unwrap();
        assert!(norm_inf(&phi_bar.sub(&expected)) < 1e-14);
        assert_eq!(s_bar, st.s);
    }

    #[test]
    fn second_order_with_zero_force_is_crank_nicolson() {
        let (g, op) = setup(16, 0.1);
        let (tau, eps) = (0.3, 0.1);
        let cfg = SchemeConfig::new(tau, eps, Order::Second).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phi0 = g.sample(|_, _| rng.random_range(-0.9..0.9));
        let st = init_state(phi0.clone(), &Zero, &g).unwrap();
        let next = step_sesav2(&st, &cfg, &op, &Zero).unwrap();

        // Per-mode amplification against a brute-force DFT.
        let n = g.n();
        let two_pi = 2.0 * std::f64::consts::PI;
        let dft = |u: &GridField<f64>, kx: usize, ky: usize| {
            let mut acc = num_complex::Complex::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let ph = -two_pi * ((kx * i + ky * j) as f64) / n as f64;
                    acc += num_complex::Complex::from_polar(u.get(i, j), ph);
                }
            }
            acc
        };
        for (kx, ky) in [(0, 0), (1, 0), (3, 5), (8, 8), (15, 2)] {
            let lam = op.eigenvalues()[[kx, ky]];
            let amp = (2.0 / tau - eps * eps * lam) / (2.0 / tau + eps * eps * lam);
            let before = dft(&phi0, kx, ky);
            let after = dft(&next.phi, kx, ky);
            assert!((after - before * amp).norm() < 1e-12 * (1.0 + before.norm()));
        }
    }

    #[test]
    fn predictors_agree_to_second_order() {
        let (g, op) = setup(32, 0.1);
        let dw = DoubleWell::new();
        let phi0 = cosine(&g);
        let mut diffs = Vec::new();
        for tau in [0.02, 0.01, 0.005] {
            let cfg1 = SchemeConfig::new(tau, 0.1, Order::First).unwrap();
            let st0 = init_state(phi0.clone(), &dw, &g).unwrap();
            // One history step so extrapolation is defined.
            let st1 = step_sesav1(&st0, &cfg1, &op, &dw).unwrap();
            let cfg = SchemeConfig::new(tau, 0.1, Order::Second).unwrap();
            let (semi, _) = predict_half(&st1, &cfg, &op, &dw).unwrap();
            let (extra, _) =
                predict_half(&st1, &cfg.with_predictor(Predictor::Extrapolation), &op, &dw)
                    .unwrap();
            diffs.push(norm_l2(&semi.sub(&extra), &g).unwrap());
        }
        for w in diffs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}, diffs {diffs:?}");
        }
    }

    #[test]
    fn tau_bounds() {
        let g = Grid2D::new(1.0, 128).unwrap();
        let b = mbp_max_tau(2.0, 0.05, &g);
        assert_relative_eq!(b.practical, 1.0 / 11.24, max_relative = 1e-14);
        assert!((b.practical - 0.0890).abs() < 1e-4);
        assert_relative_eq!(b.conservative(1.0), b.practical, max_relative = 1e-15);
        assert!(b.conservative(2.0) < b.practical);

        let b = mbp_max_tau(8.02, 0.02, &g);
        assert_relative_eq!(b.practical, 1.0 / (4.01 + 1.6384), max_relative = 1e-14);
        assert!((b.practical - 0.1770).abs() < 1e-4);

        let b = mbp_max_tau(2.0, 1e-9, &g);
        assert_relative_eq!(b.practical, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn strict_tau_policy_rejects_large_steps() {
        let (g, op) = setup(16, 0.1);
        let dw = default_params::<f64>(PotentialKind::DoubleWell);
        let st = init_state(cosine(&g), &dw, &g).unwrap();
        let cfg = SchemeConfig::new(5.0, 0.05, Order::Second).unwrap();
        assert!(step_sesav2(&st, &cfg, &op, &dw).is_ok());
        assert!(matches!(
            step_sesav2(&st, &cfg.with_strict_mbp_tau(true), &op, &dw),
            Err(Error::TimeStepTooLarge { .. })
        ));
    }

    #[test]
    fn wrong_order_is_rejected() {
        let (g, op) = setup(8, 0.1);
        let dw = DoubleWell::new();
        let st = init_state(g.zeros(), &dw, &g).unwrap();
        let c1 = SchemeConfig::new(0.1, 0.1, Order::First).unwrap();
        let c2 = SchemeConfig::new(0.1, 0.1, Order::Second).unwrap();
        assert!(step_sesav2(&st, &c1, &op, &dw).is_err());
        assert!(step_sesav1(&st, &c2, &op, &dw).is_err());
        assert!(SchemeConfig::new(0.0, 0.1, Order::First).is_err());
        assert!(SchemeConfig::new(0.1, -1.0, Order::First).is_err());
    }
}
