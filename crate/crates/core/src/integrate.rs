//! Explicit Runge-Kutta integration with dense output and event detection.
//!
//! Two drivers share one contract: [`integrate_fixed`] (classical RK4) and
//! [`integrate_adaptive`] (Dormand-Prince 5(4) with standard step control).
//! Every accepted step is stored together with the state derivative, which
//! makes cubic Hermite interpolation available through
//! [`Trajectory::sample_at`].
//!
//! Events are down-crossings of a scalar guard `g(t, y)`: the integration
//! stops at the first step where `g` goes from positive to non-positive, the
//! crossing is refined by bisection, and the trajectory is truncated there.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub const DEFAULT_FIXED_STEP: f64 = 1e-4;
pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

/// Steps shorter than this fraction of the integration span abort the run.
const UNDERFLOW_FRACTION: f64 = 1e-14;
/// Interior points of each step at which the interpolated guard is probed.
const GUARD_PROBES: [f64; 3] = [0.25, 0.5, 0.75];

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Write `f(t, state)` into `out` (same length as `state`).
    fn rhs(&self, t: f64, state: &[f64], out: &mut [f64]);
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn rhs(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (**self).rhs(t, state, out)
    }
}

/// Adapter turning a closure into an [`OdeSystem`].
#[derive(Clone, Copy)]
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, state: &[f64], out: &mut [f64]) {
        (self.f)(t, state, out)
    }
}

/// Scalar function of the state, `(t, y) -> value`.
pub type StateFn<'a> = &'a dyn Fn(f64, &[f64]) -> f64;

/// Down-crossing event: fires when `guard` passes from `> 0` to `<= 0`.
#[derive(Clone, Copy)]
pub struct EventSpec<'a> {
    pub guard: StateFn<'a>,
    pub refine_tol: f64,
    /// Upper bound on the next step from `(t, y)`, for guards whose zero sits
    /// next to a singularity that a full-size step could jump over.
    pub step_limit: Option<StateFn<'a>>,
}

impl<'a> EventSpec<'a> {
    pub fn new(guard: StateFn<'a>) -> Self {
        Self { guard, refine_tol: DEFAULT_REFINE_TOL, step_limit: None }
    }

    pub fn with_step_limit(mut self, limit: StateFn<'a>) -> Self {
        self.step_limit = Some(limit);
        self
    }

    fn limit(&self, t: f64, y: &[f64]) -> f64 {
        self.step_limit.map_or(f64::INFINITY, |f| f(t, y))
    }

    pub fn with_refine_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }
}

impl core::fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("EventSpec").field("refine_tol", &self.refine_tol).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub t: f64,
    pub state: Vec<f64>,
    /// Guard value at the reported point; `<= 0` and `>= -refine_tol`.
    pub guard: f64,
}

/// Which driver to use and with what accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    Fixed { h: f64 },
    Adaptive { rel_tol: f64, abs_tol: f64 },
}

impl Stepper {
    pub fn fixed(h: f64) -> Self {
        Stepper::Fixed { h }
    }

    pub fn adaptive(rel_tol: f64) -> Self {
        Stepper::Adaptive { rel_tol, abs_tol: DEFAULT_ABS_TOL }
    }
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper::Adaptive { rel_tol: DEFAULT_REL_TOL, abs_tol: DEFAULT_ABS_TOL }
    }
}

/// Accepted integration nodes with their derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
}

/// One stored node of a [`Trajectory`].
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub t: f64,
    pub state: &'a [f64],
    pub deriv: &'a [f64],
}

impl Trajectory {
    pub fn new(dim: usize) -> Self {
        Self { dim, times: Vec::new(), states: Vec::new(), derivs: Vec::new() }
    }

    /// Append a node. `t` must exceed the last stored time.
    pub fn push(&mut self, t: f64, state: &[f64], deriv: &[f64]) {
        debug_assert_eq!(state.len(), self.dim);
        debug_assert_eq!(deriv.len(), self.dim);
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.states.extend_from_slice(state);
        self.derivs.extend_from_slice(deriv);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    #[inline]
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn deriv(&self, i: usize) -> &[f64] {
        &self.derivs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, i: usize) -> Option<Sample<'_>> {
        (i < self.len()).then(|| Sample { t: self.times[i], state: self.state(i), deriv: self.deriv(i) })
    }

    pub fn last(&self) -> Option<Sample<'_>> {
        self.len().checked_sub(1).and_then(|i| self.get(i))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Sample<'_>> + '_ {
        (0..self.len()).map(move |i| Sample { t: self.times[i], state: self.state(i), deriv: self.deriv(i) })
    }

    /// `(first time, last time)`.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    /// Cubic Hermite interpolation from the stored states and derivatives.
    /// Stored nodes are returned exactly.
    pub fn sample_at(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(t, &mut out)?;
        Ok(out)
    }

    pub fn sample_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let (start, end) = self.span().ok_or(Error::Empty)?;
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        // First node with time >= t.
        let j = self.times.partition_point(|&x| x < t);
        if self.times[j] == t {
            out.copy_from_slice(self.state(j));
            return Ok(());
        }
        let i = j - 1;
        hermite(
            self.times[i],
            self.state(i),
            self.deriv(i),
            self.times[j],
            self.state(j),
            self.deriv(j),
            t,
            out,
        );
        Ok(())
    }

}

#[allow(clippy::too_many_arguments)]
fn hermite(t0: f64, y0: &[f64], d0: &[f64], t1: f64, y1: &[f64], d1: &[f64], t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for k in 0..out.len() {
        out[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
    }
}

/// Result of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub trajectory: Trajectory,
    /// Set when the event guard crossed zero; the trajectory then ends at the
    /// event.
    pub event: Option<EventHit>,
}

fn eval_rhs<S: OdeSystem + ?Sized>(sys: &S, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
    sys.rhs(t, y, out);
    if out.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t, state: y.to_vec() })
    }
}

/// One classical RK4 step of size `h` from `(t, state)`.
pub fn rk4_step<S: OdeSystem + ?Sized>(sys: &S, t: f64, state: &[f64], h: f64) -> Result<Vec<f64>> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::InvalidArgument("step size must be finite and nonzero"));
    }
    let mut work = Rk4Work::new(state.len());
    eval_rhs(sys, t, state, &mut work.k1)?;
    let mut out = vec![0.0; state.len()];
    work.step(sys, t, state, h, &mut out)?;
    Ok(out)
}

struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(dim: usize) -> Self {
        Self { k1: vec![0.0; dim], k2: vec![0.0; dim], k3: vec![0.0; dim], k4: vec![0.0; dim], tmp: vec![0.0; dim] }
    }

    /// Step using the already-evaluated `k1`.
    fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        let half = 0.5 * h;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        eval_rhs(sys, t + half, &self.tmp, &mut self.k2)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        eval_rhs(sys, t + half, &self.tmp, &mut self.k3)?;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        eval_rhs(sys, t + h, &self.tmp, &mut self.k4)?;
        for i in 0..y.len() {
            out[i] = y[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { t: t + h, state: out.to_vec() })
        }
    }
}

fn check_interval(state0: &[f64], dim: usize, t0: f64, t1: f64) -> Result<()> {
    if state0.len() != dim {
        return Err(Error::InvalidArgument("initial state length does not match system dimension"));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidArgument("integration interval must satisfy t0 <= t1"));
    }
    if !state0.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { t: t0, state: state0.to_vec() });
    }
    Ok(())
}

/// Fixed-step RK4 from `t0` to `t1`; the last step is shortened to land on
/// `t1` exactly.
pub fn integrate_fixed<S: OdeSystem + ?Sized>(
    sys: &S,
    state0: &[f64],
    t0: f64,
    t1: f64,
    h: f64,
    event: Option<&EventSpec<'_>>,
) -> Result<Integration> {
    let dim = sys.dim();
    check_interval(state0, dim, t0, t1)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("step size must be positive"));
    }
    check_event(event)?;

    let mut traj = Trajectory::new(dim);
    let mut work = Rk4Work::new(dim);
    let mut y = state0.to_vec();
    let mut y_next = vec![0.0; dim];
    eval_rhs(sys, t0, &y, &mut work.k1)?;
    traj.push(t0, &y, &work.k1);

    let mut g_prev = event.map(|e| (e.guard)(t0, &y));
    let mut i: u64 = 1;
    let mut t = t0;
    while t < t1 {
        let mut t_next = t0 + i as f64 * h;
        // Absorb slivers shorter than a millionth of a step into the last step.
        if t_next >= t1 || t1 - t_next < 1e-6 * h {
            t_next = t1;
        }
        let limit = event.map_or(f64::INFINITY, |e| e.limit(t, &y));
        if t + limit < t_next {
            // Off-grid step; the grid resumes once the limiter relaxes.
            t_next = t + limit;
            if !(t_next > t) {
                return Err(Error::StepUnderflow { t, h: limit });
            }
        } else {
            i += 1;
        }
        let step = t_next - t;
        work.step(sys, t, &y, step, &mut y_next)?;
        let mut d_next = vec![0.0; dim];
        eval_rhs(sys, t_next, &y_next, &mut d_next)?;

        if let (Some(ev), Some(gp)) = (event, g_prev) {
            let g_next = (ev.guard)(t_next, &y_next);
            let hit = if gp > 0.0 && g_next <= 0.0 {
                // Re-step from the start of the interval with shorter steps.
                let k1 = work.k1.clone();
                let mut probe = Rk4Work::new(dim);
                let restep = |tau: f64| -> Result<Vec<f64>> {
                    probe.k1.copy_from_slice(&k1);
                    let mut out = vec![0.0; dim];
                    probe.step(sys, t, &y, tau, &mut out)?;
                    Ok(out)
                };
                Some(refine(ev, t, step, y_next.clone(), g_next, restep)?)
            } else if gp > 0.0 {
                interior_dip(ev, t, &y, &work.k1, t_next, &y_next, &d_next)?
            } else {
                None
            };
            if let Some(hit) = hit {
                return finish_with_event(sys, traj, hit);
            }
            g_prev = Some(g_next);
        }

        traj.push(t_next, &y_next, &d_next);
        core::mem::swap(&mut y, &mut y_next);
        work.k1.copy_from_slice(&d_next);
        t = t_next;
    }
    Ok(Integration { trajectory: traj, event: None })
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (same as the last row of `DP_A`, FSAL).
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
/// Fifth-order minus fourth-order weights.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct DpWork {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl DpWork {
    fn new(dim: usize) -> Self {
        Self { k: core::array::from_fn(|_| vec![0.0; dim]), tmp: vec![0.0; dim] }
    }

    /// Trial step from `(t, y)` with `k[0]` already set. Writes the
    /// fifth-order solution into `out`, leaves `f(t + h, out)` in `k[6]`
    /// and returns the scaled error norm.
    #[allow(clippy::too_many_arguments)]
    fn step<S: OdeSystem + ?Sized>(
        &mut self,
        sys: &S,
        t: f64,
        y: &[f64],
        h: f64,
        rel_tol: f64,
        abs_tol: f64,
        out: &mut [f64],
    ) -> Result<f64> {
        let n = y.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += DP_A[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            eval_rhs(sys, t + DP_C[s] * h, &self.tmp, &mut rest[0])?;
        }
        // Stage 7 was evaluated at the fifth-order solution.
        out.copy_from_slice(&self.tmp);
        let mut sum = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for j in 0..7 {
                e += DP_E[j] * self.k[j][i];
            }
            let scale = abs_tol + rel_tol * y[i].abs().max(out[i].abs());
            let r = h * e / scale;
            sum += r * r;
        }
        Ok((sum / n as f64).sqrt())
    }

    /// Fifth-order solution only, for event refinement.
    fn solution<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64, out: &mut [f64]) -> Result<()> {
        let n = y.len();
        for s in 1..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += DP_A[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            eval_rhs(sys, t + DP_C[s] * h, &self.tmp, &mut rest[0])?;
        }
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += DP_B[j] * self.k[j][i];
            }
            out[i] = y[i] + h * acc;
        }
        Ok(())
    }
}

fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    span: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    let n = y0.len() as f64;
    let norm = |v: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(y0)
            .map(|(x, y)| {
                let r = x / (abs_tol + rel_tol * y.abs());
                r * r
            })
            .sum();
        (s / n).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    sys.rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    if !d2.is_finite() {
        return h0;
    }
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 5.0) };
    (100.0 * h0).min(h1).min(span)
}

/// Adaptive Dormand-Prince 5(4) from `t0` to `t1`.
pub fn integrate_adaptive<S: OdeSystem + ?Sized>(
    sys: &S,
    state0: &[f64],
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
    event: Option<&EventSpec<'_>>,
) -> Result<Integration> {
    let dim = sys.dim();
    check_interval(state0, dim, t0, t1)?;
    if !(rel_tol > 0.0 && abs_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive"));
    }
    check_event(event)?;

    let mut traj = Trajectory::new(dim);
    let mut work = DpWork::new(dim);
    let mut y = state0.to_vec();
    let mut y_next = vec![0.0; dim];
    eval_rhs(sys, t0, &y, &mut work.k[0])?;
    traj.push(t0, &y, &work.k[0]);
    if t1 == t0 {
        return Ok(Integration { trajectory: traj, event: None });
    }

    let span = t1 - t0;
    let min_step = UNDERFLOW_FRACTION * span;
    let mut h = initial_step(sys, t0, &y, &work.k[0], span, rel_tol, abs_tol);
    let mut g_prev = event.map(|e| (e.guard)(t0, &y));
    let mut t = t0;
    let mut rejected = false;

    while t < t1 {
        let mut last = false;
        if t + h >= t1 || t1 - (t + h) < min_step {
            h = t1 - t;
            last = true;
        }
        if let Some(limit) = event.map(|e| e.limit(t, &y)).filter(|&l| l < h) {
            h = limit;
            last = false;
        }
        if h < min_step && !last {
            return Err(Error::StepUnderflow { t, h });
        }
        let err = match work.step(sys, t, &y, h, rel_tol, abs_tol, &mut y_next) {
            Ok(err) => err,
            // A stage left the domain of the vector field: shrink and retry.
            Err(Error::NonFinite { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if !(err <= 1.0) {
            h *= if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
            rejected = true;
            if h < min_step {
                return Err(Error::StepUnderflow { t, h });
            }
            continue;
        }
        let t_next = if last { t1 } else { t + h };
        let d_next = work.k[6].clone();

        if let (Some(ev), Some(gp)) = (event, g_prev) {
            let g_next = (ev.guard)(t_next, &y_next);
            let hit = if gp > 0.0 && g_next <= 0.0 {
                let k0 = work.k[0].clone();
                let mut probe = DpWork::new(dim);
                let restep = |tau: f64| -> Result<Vec<f64>> {
                    probe.k[0].copy_from_slice(&k0);
                    let mut out = vec![0.0; dim];
                    probe.solution(sys, t, &y, tau, &mut out)?;
                    Ok(out)
                };
                Some(refine(ev, t, t_next - t, y_next.clone(), g_next, restep)?)
            } else if gp > 0.0 {
                interior_dip(ev, t, &y, &work.k[0], t_next, &y_next, &d_next)?
            } else {
                None
            };
            if let Some(hit) = hit {
                return finish_with_event(sys, traj, hit);
            }
            g_prev = Some(g_next);
        }

        traj.push(t_next, &y_next, &d_next);
        core::mem::swap(&mut y, &mut y_next);
        work.k[0].copy_from_slice(&d_next);
        t = t_next;

        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if rejected { grow.min(1.0) } else { grow };
        rejected = false;
    }
    Ok(Integration { trajectory: traj, event: None })
}

/// Dispatch on [`Stepper`].
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    state0: &[f64],
    t0: f64,
    t1: f64,
    stepper: Stepper,
    event: Option<&EventSpec<'_>>,
) -> Result<Integration> {
    match stepper {
        Stepper::Fixed { h } => integrate_fixed(sys, state0, t0, t1, h, event),
        Stepper::Adaptive { rel_tol, abs_tol } => integrate_adaptive(sys, state0, t0, t1, rel_tol, abs_tol, event),
    }
}

fn check_event(event: Option<&EventSpec<'_>>) -> Result<()> {
    match event {
        Some(e) if !(e.refine_tol > 0.0) => Err(Error::InvalidArgument("event refine_tol must be positive")),
        _ => Ok(()),
    }
}

/// Bisection on `tau` in `(0, tau_hi]`, where `state_at(tau)` advances from
/// the step start. The guard is positive at 0 and non-positive at `tau_hi`.
fn refine(
    ev: &EventSpec<'_>,
    t_start: f64,
    tau_hi: f64,
    y_hi: Vec<f64>,
    g_hi: f64,
    mut state_at: impl FnMut(f64) -> Result<Vec<f64>>,
) -> Result<EventHit> {
    let tol = ev.refine_tol;
    let (mut lo, mut hi) = (0.0_f64, tau_hi);
    let (mut best_y, mut best_g) = (y_hi, g_hi);
    for _ in 0..200 {
        if hi - lo <= tol && best_g.abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let ym = state_at(mid)?;
        let gm = (ev.guard)(t_start + mid, &ym);
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            best_y = ym;
            best_g = gm;
        }
    }
    Ok(EventHit { t: t_start + hi, state: best_y, guard: best_g })
}

/// Guard positive at both ends of a step can still hide a crossing when the
/// step jumps over a narrow dip (a pursuer stepping past the evader). Probe
/// the interpolant and, if it dips, refine on the interpolant.
fn interior_dip(
    ev: &EventSpec<'_>,
    t0: f64,
    y0: &[f64],
    d0: &[f64],
    t1: f64,
    y1: &[f64],
    d1: &[f64],
) -> Result<Option<EventHit>> {
    let mut buf = vec![0.0; y0.len()];
    let h = t1 - t0;
    for &frac in &GUARD_PROBES {
        let tp = t0 + frac * h;
        hermite(t0, y0, d0, t1, y1, d1, tp, &mut buf);
        let g = (ev.guard)(tp, &buf);
        if g <= 0.0 {
            let hit = refine(ev, t0, frac * h, buf.clone(), g, |tau| {
                let mut out = vec![0.0; y0.len()];
                hermite(t0, y0, d0, t1, y1, d1, t0 + tau, &mut out);
                Ok(out)
            })?;
            return Ok(Some(hit));
        }
    }
    Ok(None)
}

fn finish_with_event<S: OdeSystem + ?Sized>(sys: &S, mut traj: Trajectory, hit: EventHit) -> Result<Integration> {
    let mut d = vec![0.0; traj.dim()];
    sys.rhs(hit.t, &hit.state, &mut d);
    if !d.iter().all(|v| v.is_finite()) {
        // Derivative undefined exactly at the event; fall back to the
        // secant from the previous node so the interpolant stays usable.
        let last = traj.len() - 1;
        let dt = hit.t - traj.time(last);
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = (hit.state[k] - traj.state(last)[k]) / dt;
        }
    }
    traj.push(hit.t, &hit.state, &d);
    Ok(Integration { trajectory: traj, event: Some(hit) })
}
