//! Fixed-step time integration of the canonical equations.
//!
//! The workhorse is the implicit midpoint rule: symplectic, symmetric,
//! second order, and an exact conserver of quadratic first integrals (up to
//! the corrector tolerance), which is what makes near-conserved energies a
//! meaningful diagnostic on long runs. The implicit stage equation is solved
//! by fixed-point iteration with a Newton fallback for the rare steps where
//! the contraction degrades. A classical fourth-order Runge–Kutta stepper is
//! kept alongside purely as a cross-check of convergence orders.
//!
//! Escaping a prescribed ball and corrector breakdown are *terminations*
//! recorded on the trajectory, not errors: both carry meaning for the
//! instability experiments.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{norm, PhaseState};
use crate::systems::HamiltonianSystem;

/// Component-relative tolerance of the implicit stage corrector.
pub const CORRECTOR_TOL: f64 = 1e-13;
/// Iteration cap of the fixed-point corrector (Newton gets its own, smaller).
pub const CORRECTOR_MAX_ITERS: usize = 50;

/// Time stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMethod {
    ImplicitMidpoint,
    #[serde(rename = "explicit_rk4")]
    Rk4,
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Reached the end of the requested time span.
    TimeEnd,
    /// The state left the prescribed ball.
    Escape,
    /// The implicit stage equation could not be solved (typically finite-time
    /// blow-up driving the state out of floating-point range).
    CorrectorFailure,
}

/// Integration request: span, step, scheme, and optional escape ball.
#[derive(Clone, Debug, Serialize)]
pub struct IntegrationConfig {
    pub t0: f64,
    pub t1: f64,
    /// Step size, always positive; the direction comes from `t1 - t0`.
    pub step: f64,
    pub method: StepMethod,
    /// Stop as soon as the state norm reaches this radius.
    pub escape_radius: Option<f64>,
    /// Store every k-th state (first and last are always kept). Bounds the
    /// memory of long probe runs without changing the dynamics.
    pub store_every: usize,
}

impl IntegrationConfig {
    pub fn new(t0: f64, t1: f64, step: f64) -> Self {
        Self {
            t0,
            t1,
            step,
            method: StepMethod::ImplicitMidpoint,
            escape_radius: None,
            store_every: 1,
        }
    }

    pub fn with_method(mut self, method: StepMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_escape_radius(mut self, radius: f64) -> Self {
        self.escape_radius = Some(radius);
        self
    }

    pub fn with_store_every(mut self, k: usize) -> Self {
        self.store_every = k.max(1);
        self
    }
}

/// A computed orbit segment with its termination record.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// `H(states[k])`, same length as `states`.
    pub energies: Vec<f64>,
    #[serde(rename = "terminated_by")]
    pub termination: Termination,
    /// Crossing time of the escape radius, linearly interpolated in the
    /// state norm between the last two steps.
    pub escape_time: Option<f64>,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &PhaseState {
        self.states.last().expect("a trajectory stores at least its initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("a trajectory stores at least its initial time")
    }
}

/// Max deviation of the stored energies from the initial one.
pub fn energy_drift(tr: &Trajectory) -> f64 {
    let h0 = tr.energies[0];
    tr.energies
        .iter()
        .fold(0.0_f64, |m, h| m.max((h - h0).abs()))
}

/// Max deviation of a scalar function of the state from its initial value,
/// over the stored states.
pub fn first_integral_drift(tr: &Trajectory, f: impl Fn(&[f64]) -> f64) -> f64 {
    let f0 = f(&tr.states[0].coords);
    tr.states
        .iter()
        .fold(0.0_f64, |m, s| m.max((f(&s.coords) - f0).abs()))
}

/// Integrates the canonical field of `sys` from `x0` over the configured
/// span. `cfg.t1 < cfg.t0` integrates backward.
pub fn integrate(sys: &HamiltonianSystem, x0: &PhaseState, cfg: &IntegrationConfig) -> Result<Trajectory> {
    if x0.dim() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: x0.dim(),
        });
    }
    if !(cfg.step > 0.0) || !cfg.step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive and finite, got {}",
            cfg.step
        )));
    }
    if !cfg.t0.is_finite() || !cfg.t1.is_finite() {
        return Err(Error::InvalidParameter("time span must be finite".into()));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidParameter("initial state must be finite".into()));
    }
    if let Some(r) = cfg.escape_radius {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "escape radius must be positive, got {r}"
            )));
        }
    }

    let span = cfg.t1 - cfg.t0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let n_exact = span.abs() / cfg.step;
    let n_steps = if (n_exact - n_exact.round()).abs() <= 1e-9 * n_exact.max(1.0) {
        (n_exact.round() as usize).max(if span == 0.0 { 0 } else { 1 })
    } else {
        n_exact.ceil() as usize
    };

    let store_every = cfg.store_every.max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut energies = Vec::new();
    let mut x = x0.coords.clone();
    let mut t = cfg.t0;
    times.push(t);
    states.push(PhaseState { coords: x.clone() });
    energies.push(sys.hamiltonian(&x));

    let mut prev_norm = norm(&x);

    if let Some(r) = cfg.escape_radius {
        if prev_norm >= r {
            return Ok(Trajectory {
                times,
                states,
                energies,
                termination: Termination::Escape,
                escape_time: Some(t),
                steps_taken: 0,
            });
        }
    }

    let mut termination = Termination::TimeEnd;
    let mut escape_time = None;
    let mut steps_taken = 0;

    for k in 0..n_steps {
        let t_next = if k + 1 == n_steps {
            cfg.t1
        } else {
            cfg.t0 + dir * (k as f64 + 1.0) * cfg.step
        };
        let h = t_next - t;
        let next = match cfg.method {
            StepMethod::ImplicitMidpoint => midpoint_step(sys, &x, h),
            StepMethod::Rk4 => rk4_step(sys, &x, h),
        };
        let next = match next {
            Some(v) if v.iter().all(|c| c.is_finite()) => v,
            _ => {
                termination = Termination::CorrectorFailure;
                break;
            }
        };
        steps_taken += 1;

        let next_norm = norm(&next);
        let escaped = cfg.escape_radius.is_some_and(|r| next_norm >= r);
        let keep = (k + 1) % store_every == 0 || k + 1 == n_steps || escaped;
        x = next;
        t = t_next;
        if keep {
            times.push(t);
            states.push(PhaseState { coords: x.clone() });
            energies.push(sys.hamiltonian(&x));
        }
        if escaped {
            let r = cfg.escape_radius.unwrap();
            let denom = next_norm - prev_norm;
            let frac = if denom.abs() > 0.0 {
                ((r - prev_norm) / denom).clamp(0.0, 1.0)
            } else {
                1.0
            };
            escape_time = Some(t - h + frac * h);
            termination = Termination::Escape;
            break;
        }
        prev_norm = next_norm;
    }

    // a failed run still reports the last good point it reached
    if termination == Termination::CorrectorFailure && *times.last().unwrap() != t {
        times.push(t);
        states.push(PhaseState { coords: x.clone() });
        energies.push(sys.hamiltonian(&x));
    }

    Ok(Trajectory {
        times,
        states,
        energies,
        termination,
        escape_time,
        steps_taken,
    })
}

/// One implicit midpoint step; `None` when the stage equation cannot be
/// solved (corrector breakdown).
pub fn midpoint_step(sys: &HamiltonianSystem, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let y = solve_stage(sys, x, h)?;
    // x_next = 2 y - x
    let next: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| 2.0 * yi - xi).collect();
    Some(next)
}

/// Solves the stage equation `y = x + (h/2) f(y)` for the midpoint state.
///
/// Fixed-point iteration with a component-relative stopping rule (an
/// absolute rule can never trigger once coordinates dwarf the tolerance),
/// plus one polishing sweep after the rule fires. If the measured
/// contraction is poor, a damped-free Newton iteration on the stage residual
/// takes over, using the analytic Jacobian.
fn solve_stage(sys: &HamiltonianSystem, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let d = x.len();
    let hh = 0.5 * h;
    let mut f = vec![0.0; d];
    sys.field_into(x, &mut f);
    let mut y: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi + hh * fi).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return None;
    }

    let mut prev_delta = f64::INFINITY;
    for iter in 0..CORRECTOR_MAX_ITERS {
        sys.field_into(&y, &mut f);
        let mut max_rel = 0.0_f64;
        let mut finite = true;
        for i in 0..d {
            let yi = x[i] + hh * f[i];
            if !yi.is_finite() {
                finite = false;
                break;
            }
            let rel = (yi - y[i]).abs() / (1.0 + y[i].abs());
            max_rel = max_rel.max(rel);
            y[i] = yi;
        }
        if !finite {
            return None;
        }
        if max_rel <= CORRECTOR_TOL {
            // one polishing sweep, then accept
            sys.field_into(&y, &mut f);
            for i in 0..d {
                y[i] = x[i] + hh * f[i];
            }
            if y.iter().any(|v| !v.is_finite()) {
                return None;
            }
            return Some(y);
        }
        if iter >= 3 && max_rel > 0.5 * prev_delta {
            return solve_stage_newton(sys, x, hh, y);
        }
        prev_delta = max_rel;
    }
    solve_stage_newton(sys, x, hh, y)
}

/// Newton iteration on `r(y) = x + (h/2) f(y) - y` with the analytic
/// Jacobian; fallback for steps where the fixed-point map stops contracting.
fn solve_stage_newton(
    sys: &HamiltonianSystem,
    x: &[f64],
    hh: f64,
    mut y: Vec<f64>,
) -> Option<Vec<f64>> {
    let d = x.len();
    let mut f = vec![0.0; d];
    for _ in 0..25 {
        if y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        sys.field_into(&y, &mut f);
        let residual: Vec<f64> = (0..d).map(|i| x[i] + hh * f[i] - y[i]).collect();
        // I - (h/2) J(y)
        let j = sys.jacobian(&y);
        let mut m = crate::linalg::SquareMatrix::zeros(d);
        for i in 0..d {
            for jj in 0..d {
                let v = (if i == jj { 1.0 } else { 0.0 }) - hh * j.get(i, jj);
                m.set(i, jj, v);
            }
        }
        let delta = m.solve(&residual)?;
        let mut max_rel = 0.0_f64;
        for i in 0..d {
            y[i] += delta[i];
            max_rel = max_rel.max(delta[i].abs() / (1.0 + y[i].abs()));
        }
        if !max_rel.is_finite() {
            return None;
        }
        if max_rel <= CORRECTOR_TOL {
            return if y.iter().all(|v| v.is_finite()) {
                Some(y)
            } else {
                None
            };
        }
    }
    None
}

/// One classical Runge–Kutta step of order four.
pub fn rk4_step(sys: &HamiltonianSystem, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let d = x.len();
    let mut k1 = vec![0.0; d];
    let mut k2 = vec![0.0; d];
    let mut k3 = vec![0.0; d];
    let mut k4 = vec![0.0; d];
    let mut tmp = vec![0.0; d];
    sys.field_into(x, &mut k1);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    sys.field_into(&tmp, &mut k2);
    for i in 0..d {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    sys.field_into(&tmp, &mut k3);
    for i in 0..d {
        tmp[i] = x[i] + h * k3[i];
    }
    sys.field_into(&tmp, &mut k4);
    let next: Vec<f64> = (0..d)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if next.iter().all(|v| v.is_finite()) {
        Some(next)
    } else {
        None
    }
}
