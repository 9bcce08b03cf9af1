//! Pure pursuit in Cartesian coordinates.
//!
//! The pursuer moves with speed `n·|Ė|` straight at the evader. Time is
//! whatever parameter the evader curve uses: for the unit-speed ellipse the
//! curve velocity is d(pos)/dφ, so the same right-hand side integrates the
//! pursuer per unit φ without resampling.

use alloc::vec::Vec;

use crate::curves::{Curve, EvaderState};
use crate::integrate::{self, EventSpec, OdeSystem, Stepper, Trajectory};
use crate::{Error, Result, Vec2};

pub const DEFAULT_CAPTURE_EPS: f64 = 1e-6;

const STEP_GAP_FRACTION: f64 = 0.25;

/// Pursuer velocity: magnitude `n·|ev.vel|`, pointing from `p` to the evader.
pub fn pursuit_rhs(ev: &EvaderState, p: Vec2, n: f64) -> Result<Vec2> {
    let offset = ev.pos - p;
    let rho = offset.norm();
    if rho == 0.0 {
        return Err(Error::Capture);
    }
    Ok(offset * (n * ev.vel.norm() / rho))
}

/// Scalar `λ >= 0` with `E - P = λ·Ṗ`, i.e. `ρ / (n·|Ė|)`.
pub fn lambda_of(ev: &EvaderState, p: Vec2, n: f64) -> Result<f64> {
    let speed = ev.vel.norm();
    if speed == 0.0 {
        return Err(Error::ZeroEvaderSpeed);
    }
    Ok(ev.pos.distance(p) / (n * speed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitConfig {
    /// Pursuer-to-evader speed ratio.
    pub n: f64,
    pub p0: Vec2,
    pub param0: f64,
    pub param1: f64,
    pub capture_eps: f64,
}

impl PursuitConfig {
    pub fn new(n: f64, p0: Vec2, param0: f64, param1: f64) -> Result<Self> {
        let config = Self { n, p0, param0, param1, capture_eps: DEFAULT_CAPTURE_EPS };
        config.validate()?;
        Ok(config)
    }

    pub fn with_capture_eps(mut self, eps: f64) -> Self {
        self.capture_eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidArgument("speed ratio n must be positive"));
        }
        if !self.p0.is_finite() {
            return Err(Error::InvalidArgument("initial pursuer position must be finite"));
        }
        if !(self.param1 > self.param0) || !self.param0.is_finite() || !self.param1.is_finite() {
            return Err(Error::InvalidArgument("parameter interval must satisfy param0 < param1"));
        }
        if !(self.capture_eps > 0.0) {
            return Err(Error::InvalidArgument("capture_eps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitSample {
    pub param: f64,
    pub evader: Vec2,
    pub pursuer: Vec2,
    pub lambda: f64,
    /// `|evader - pursuer|`.
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureEvent {
    pub param: f64,
    /// Pursuer position at capture.
    pub position: Vec2,
}

/// The pursuer ODE for a fixed evader curve; state is `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct PursuitSystem<C> {
    curve: C,
    n: f64,
}

impl<C: Curve> PursuitSystem<C> {
    pub fn new(curve: C, n: f64) -> Self {
        Self { curve, n }
    }
}

impl<C: Curve> OdeSystem for PursuitSystem<C> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, state: &[f64], out: &mut [f64]) {
        let ev = self.curve.evader(t);
        let v = pursuit_rhs(&ev, Vec2::new(state[0], state[1]), self.n).unwrap_or(Vec2::new(f64::NAN, f64::NAN));
        out[0] = v.x;
        out[1] = v.y;
    }
}

/// A finished pursuit simulation.
#[derive(Debug, Clone)]
pub struct PursuitRun {
    pub n: f64,
    /// Pursuer `(x, y)` against the curve parameter, with dense output.
    pub trajectory: Trajectory,
    pub samples: Vec<PursuitSample>,
    pub capture: Option<CaptureEvent>,
}

impl PursuitRun {
    /// Interpolated pursuer position.
    pub fn pursuer_at(&self, param: f64) -> Result<Vec2> {
        let mut xy = [0.0; 2];
        self.trajectory.sample_into(param, &mut xy)?;
        Ok(Vec2::new(xy[0], xy[1]))
    }

    /// Parameter span actually covered (shorter than requested on capture).
    pub fn span(&self) -> (f64, f64) {
        self.trajectory.span().expect("a run always holds its initial sample")
    }

    pub fn pursuers(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.samples.iter().map(|s| s.pursuer)
    }
}

/// Integrate the pursuer against `curve` over `[param0, param1]`, stopping
/// early when the separation drops through `capture_eps`.
pub fn simulate_pursuit<C: Curve>(curve: C, config: &PursuitConfig, stepper: Stepper) -> Result<PursuitRun> {
    config.validate()?;
    let start = curve.evader(config.param0);
    if start.pos.distance(config.p0) <= config.capture_eps {
        return Err(Error::ImmediateCapture);
    }

    let system = PursuitSystem::new(&curve, config.n);
    let eps = config.capture_eps;
    let guard = |t: f64, y: &[f64]| curve.evader(t).pos.distance(Vec2::new(y[0], y[1])) - eps;
    // A step may cover at most a quarter of the time the pair needs to close
    // the current gap, so the separation shrinks geometrically and the guard
    // crosses zero at a step end rather than being jumped over.
    let n = config.n;
    let limit = |t: f64, y: &[f64]| {
        let ev = curve.evader(t);
        let closing = (n + 1.0) * ev.vel.norm();
        STEP_GAP_FRACTION * ev.pos.distance(Vec2::new(y[0], y[1])) / closing
    };
    let event = EventSpec::new(&guard).with_step_limit(&limit);
    let run = integrate::integrate(
        &system,
        &[config.p0.x, config.p0.y],
        config.param0,
        config.param1,
        stepper,
        Some(&event),
    )?;

    let samples = run
        .trajectory
        .iter()
        .map(|s| {
            let ev = curve.evader(s.t);
            let pursuer = Vec2::new(s.state[0], s.state[1]);
            let rho = ev.pos.distance(pursuer);
            PursuitSample {
                param: s.t,
                evader: ev.pos,
                pursuer,
                lambda: rho / (n * ev.vel.norm()),
                rho,
            }
        })
        .collect();
    let capture = run.event.map(|hit| CaptureEvent { param: hit.t, position: Vec2::new(hit.state[0], hit.state[1]) });
    Ok(PursuitRun { n, trajectory: run.trajectory, samples, capture })
}
