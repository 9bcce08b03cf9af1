//! Evader paths: an ellipse under three parameterizations and a unit-speed
//! circle.
//!
//! Every evaluator returns the position together with the derivative of the
//! position with respect to the curve parameter. Parameters are never
//! wrapped; a parameter of `t + 2π` is a second lap, not the first.

use core::f64::consts::{FRAC_PI_2, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, Vec2};

/// Semi-axes of an origin-centred, axis-aligned ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseShape {
    a: f64,
    b: f64,
}

impl EllipseShape {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive and finite"));
        }
        Ok(Self { a, b })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(radius, radius)
    }

    /// Semi-axis along x.
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Semi-axis along y.
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn is_circle(&self) -> bool {
        self.a == self.b
    }

    /// `x²/a² + y²/b²`; equals one on the curve.
    #[inline]
    pub fn implicit(&self, p: Vec2) -> f64 {
        (p.x / self.a).powi(2) + (p.y / self.b).powi(2)
    }

    /// `√(a² sin²φ + b² cos²φ)`, the recurring denominator.
    #[inline]
    fn stretch(&self, angle: f64) -> f64 {
        let (s, c) = angle.sin_cos();
        (self.a * self.a * s * s + self.b * self.b * c * c).sqrt()
    }

    /// Eccentric anomaly of a point on (or near) the ellipse, in (−π, π].
    #[inline]
    pub fn eccentric_anomaly(&self, p: Vec2) -> f64 {
        (p.y / self.b).atan2(p.x / self.a)
    }
}

/// Position and parameter-derivative of the evader at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaderState {
    pub param: f64,
    pub pos: Vec2,
    /// d(pos)/d(param).
    pub vel: Vec2,
}

/// `(a cos t, b sin t)`, counterclockwise from `(a, 0)`.
pub fn ellipse_standard(t: f64, shape: EllipseShape) -> EvaderState {
    let (s, c) = t.sin_cos();
    EvaderState {
        param: t,
        pos: Vec2::new(shape.a * c, shape.b * s),
        vel: Vec2::new(-shape.a * s, shape.b * c),
    }
}

/// Ellipse traced with unit angular velocity about the origin: the polar
/// angle of the position equals `t`.
pub fn ellipse_const_angvel(t: f64, shape: EllipseShape) -> EvaderState {
    let (a, b) = (shape.a, shape.b);
    let (s, c) = t.sin_cos();
    let d = shape.stretch(t);
    let r = a * b / d;
    // dr/dt = -ab (a² - b²) sin t cos t / d³
    let dr = -a * b * (a * a - b * b) * s * c / (d * d * d);
    EvaderState {
        param: t,
        pos: Vec2::new(r * c, r * s),
        vel: Vec2::new(dr * c - r * s, dr * s + r * c),
    }
}

/// Ellipse traced at unit speed, parameterized by the direction `phi` of the
/// velocity. The returned `vel` is d(pos)/dφ, i.e. the time velocity
/// `(cos φ, sin φ)` divided by [`phi_dot`].
pub fn ellipse_const_speed(phi: f64, shape: EllipseShape) -> EvaderState {
    let (a, b) = (shape.a, shape.b);
    let (s, c) = phi.sin_cos();
    let d = shape.stretch(phi);
    let per_phi = a * a * b * b / (d * d * d);
    EvaderState {
        param: phi,
        pos: Vec2::new(a * a * s / d, -b * b * c / d),
        vel: Vec2::new(c * per_phi, s * per_phi),
    }
}

/// Time velocity of the unit-speed ellipse at velocity direction `phi`.
#[inline]
pub fn const_speed_time_velocity(phi: f64) -> Vec2 {
    Vec2::from_angle(phi)
}

/// Rate of change of the velocity direction for the unit-speed ellipse,
/// `(a² sin²φ + b² cos²φ)^{3/2} / (a² b²)`.
pub fn phi_dot(phi: f64, shape: EllipseShape) -> f64 {
    let d = shape.stretch(phi);
    d * d * d / (shape.a * shape.a * shape.b * shape.b)
}

/// Circle of radius `a` traced at unit speed.
pub fn circle_unit_speed(t: f64, a: f64) -> EvaderState {
    let (s, c) = (t / a).sin_cos();
    EvaderState {
        param: t,
        pos: Vec2::new(a * c, a * s),
        vel: Vec2::new(-s, c),
    }
}

/// Anything that can place the evader at a parameter value.
pub trait Curve {
    fn evader(&self, param: f64) -> EvaderState;
}

impl<C: Curve + ?Sized> Curve for &C {
    fn evader(&self, param: f64) -> EvaderState {
        (**self).evader(param)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameterization {
    /// `(a cos t, b sin t)`.
    Standard,
    /// Constant unit angular velocity.
    AngularVelocity,
    /// Constant unit speed, parameter is the velocity direction φ.
    ArcLength,
    /// Unit-speed circle of radius `a`; requires `a == b`.
    Circle,
}

impl Parameterization {
    pub const ELLIPSE: [Parameterization; 3] = [
        Parameterization::Standard,
        Parameterization::AngularVelocity,
        Parameterization::ArcLength,
    ];
}

/// An ellipse together with the parameterization used to trace it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaderPath {
    pub shape: EllipseShape,
    pub param: Parameterization,
}

impl EvaderPath {
    pub fn new(shape: EllipseShape, param: Parameterization) -> Result<Self> {
        if param == Parameterization::Circle && !shape.is_circle() {
            return Err(Error::InvalidArgument("circle parameterization requires a == b"));
        }
        Ok(Self { shape, param })
    }

    /// Parameter value at which the evader sits at `(a, 0)` heading
    /// counterclockwise.
    pub fn start_param(&self) -> f64 {
        match self.param {
            Parameterization::ArcLength => FRAC_PI_2,
            _ => 0.0,
        }
    }

    /// Parameter span of one full orbit.
    pub fn orbit_span(&self) -> f64 {
        match self.param {
            Parameterization::Circle => TAU * self.shape.a,
            _ => TAU,
        }
    }

    /// Parameter value at which the evader sits at eccentric anomaly `e`
    /// (the standard parameter). The result is unwrapped so that it tracks
    /// `e` continuously across laps.
    pub fn param_at_anomaly(&self, e: f64) -> f64 {
        let (a, b) = (self.shape.a, self.shape.b);
        let (s, c) = e.sin_cos();
        match self.param {
            Parameterization::Standard => e,
            Parameterization::Circle => a * e,
            // Polar angle of (a cos e, b sin e); same quadrant as e.
            Parameterization::AngularVelocity => unwrap_near((b * s).atan2(a * c), e),
            // Direction of the tangent (-a sin e, b cos e); same quadrant as e + π/2.
            Parameterization::ArcLength => unwrap_near((b * c).atan2(-a * s), e + FRAC_PI_2),
        }
    }
}

impl Curve for EvaderPath {
    fn evader(&self, param: f64) -> EvaderState {
        match self.param {
            Parameterization::Standard => ellipse_standard(param, self.shape),
            Parameterization::AngularVelocity => ellipse_const_angvel(param, self.shape),
            Parameterization::ArcLength => ellipse_const_speed(param, self.shape),
            Parameterization::Circle => circle_unit_speed(param, self.shape.a),
        }
    }
}

/// A curve re-timed by a monotone map `s ↦ (t(s), dt/ds)`.
#[derive(Debug, Clone, Copy)]
pub struct Reparameterized<C, F> {
    inner: C,
    map: F,
}

impl<C, F> Reparameterized<C, F>
where
    C: Curve,
    F: Fn(f64) -> (f64, f64),
{
    pub fn new(inner: C, map: F) -> Self {
        Self { inner, map }
    }
}

impl<C, F> Curve for Reparameterized<C, F>
where
    C: Curve,
    F: Fn(f64) -> (f64, f64),
{
    fn evader(&self, param: f64) -> EvaderState {
        let (t, dt) = (self.map)(param);
        let inner = self.inner.evader(t);
        EvaderState {
            param,
            pos: inner.pos,
            vel: inner.vel * dt,
        }
    }
}

/// Shift `angle` by a multiple of 2π so it lies within π of `reference`.
#[inline]
pub fn unwrap_near(angle: f64, reference: f64) -> f64 {
    angle + TAU * ((reference - angle) / TAU).round()
}

/// Wrap an angle into (−π, π].
#[inline]
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle - TAU * (angle / TAU).round();
    if w <= -core::f64::consts::PI {
        w + TAU
    } else {
        w
    }
}
