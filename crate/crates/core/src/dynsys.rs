//! Reduced pursuit dynamics in distance/angle coordinates.
//!
//! With the evader at unit speed and heading `Θ`, and the pursuer heading
//! `θ`, the separation `ρ = |E - P|` and the heading difference `ζ = Θ - θ`
//! obey
//!
//! ```text
//! ρ' = cos ζ - n
//! ζ' = -sin ζ / ρ + Θ'
//! ```
//!
//! For a circle of radius `a`, `Θ' = 1/a` and the system is autonomous with
//! a stable equilibrium for `0 < n < 1`. For the unit-speed ellipse `Θ = φ`
//! and `φ'` comes from [`phi_dot`], which makes the system non-autonomous;
//! it is integrated here as the autonomous triple `(ρ, ζ, φ)`.
//!
//! `ζ` is kept unwrapped throughout; wrap it only for display.

use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::{phi_dot, EllipseShape};
use crate::integrate::{self, EventSpec, OdeSystem, Stepper, Trajectory};
use crate::pursuit::DEFAULT_CAPTURE_EPS;
use crate::{Error, Result, Vec2};

/// `|sin ζ|` below which the second-order ζ(Θ) equation is refused.
pub const SINGULAR_FLOOR: f64 = 1e-8;

/// Width of the band around `n = 2/√5` classified as a double root.
pub const DOUBLE_ROOT_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynState {
    pub rho: f64,
    /// Unwrapped heading difference `Θ - θ`.
    pub zeta: f64,
    /// Evader phase; only present for the elliptical system.
    pub phi: Option<f64>,
}

impl DynState {
    pub fn new(rho: f64, zeta: f64) -> Self {
        Self { rho, zeta, phi: None }
    }

    pub fn with_phi(rho: f64, zeta: f64, phi: f64) -> Self {
        Self { rho, zeta, phi: Some(phi) }
    }
}

/// `(ρ', ζ')` for an evader turning at rate `theta_dot`.
pub fn dds_rhs(state: &DynState, theta_dot: f64, n: f64) -> Result<(f64, f64)> {
    if !(state.rho > 0.0) {
        return Err(Error::NonPositiveDistance(state.rho));
    }
    let (s, c) = state.zeta.sin_cos();
    Ok((c - n, -s / state.rho + theta_dot))
}

/// Circle of radius `a` at unit speed: `Θ' = 1/a`.
pub fn dds_rhs_circle(state: &DynState, n: f64, a: f64) -> Result<(f64, f64)> {
    dds_rhs(state, 1.0 / a, n)
}

/// Unit-speed ellipse: returns `(ρ', ζ', φ')`.
pub fn dds_rhs_ellipse(state: &DynState, n: f64, shape: EllipseShape) -> Result<(f64, f64, f64)> {
    let phi = state.phi.ok_or(Error::InvalidArgument("elliptical state needs a phase phi"))?;
    let turn = phi_dot(phi, shape);
    let (rho_dot, zeta_dot) = dds_rhs(state, turn, n)?;
    Ok((rho_dot, zeta_dot, turn))
}

fn check_ratio(n: f64) -> Result<()> {
    if !(n > 0.0 && n < 1.0) {
        return Err(Error::NoEquilibrium(n));
    }
    Ok(())
}

fn check_radius(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument("radius must be positive"));
    }
    Ok(())
}

/// `(a√(1-n²), arccos n)`.
pub fn equilibrium_circle(n: f64, a: f64) -> Result<(f64, f64)> {
    check_ratio(n)?;
    check_radius(a)?;
    Ok((a * (1.0 - n * n).sqrt(), n.acos()))
}

/// Linearization of the circular system at its equilibrium.
pub fn jacobian_circle(n: f64, a: f64) -> Result<[[f64; 2]; 2]> {
    check_ratio(n)?;
    check_radius(a)?;
    let q = (1.0 - n * n).sqrt();
    Ok([[0.0, -q], [1.0 / (a * a * q), -n / (a * q)]])
}

/// Closed-form eigenvalues `λ± = (-n ± √(5n² - 4)) / (2a√(1-n²))`, in the
/// order `[λ+, λ-]`.
pub fn eigenvalues_circle(n: f64, a: f64) -> Result<[Complex64; 2]> {
    check_ratio(n)?;
    check_radius(a)?;
    let denom = 2.0 * a * (1.0 - n * n).sqrt();
    let re = -n / denom;
    let disc = 5.0 * n * n - 4.0;
    let root = disc.abs().sqrt() / denom;
    Ok(if disc >= 0.0 {
        [Complex64::new(re + root, 0.0), Complex64::new(re - root, 0.0)]
    } else {
        [Complex64::new(re, root), Complex64::new(re, -root)]
    })
}

/// Eigenvalues of a real 2×2 matrix from its characteristic polynomial
/// `λ² - tr·λ + det`, ordered `[larger real part / positive imaginary, other]`.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    let root = disc.abs().sqrt();
    if disc >= 0.0 {
        [Complex64::new(half + root, 0.0), Complex64::new(half - root, 0.0)]
    } else {
        [Complex64::new(half, root), Complex64::new(half, -root)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityClass {
    /// Complex pair with negative real part.
    StableSpiral,
    /// Two distinct negative reals.
    StableNode,
    /// Repeated negative real eigenvalue, `n = 2/√5`.
    DegenerateDoubleRoot,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::StableSpiral => "stable-spiral",
            StabilityClass::StableNode => "stable-node",
            StabilityClass::DegenerateDoubleRoot => "degenerate-double-root",
        }
    }
}

impl core::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spiral below `n = 2/√5`, node above.
pub fn classify_equilibrium(n: f64) -> Result<StabilityClass> {
    check_ratio(n)?;
    let boundary = 2.0 / 5.0f64.sqrt();
    Ok(if (n - boundary).abs() <= DOUBLE_ROOT_BAND {
        StabilityClass::DegenerateDoubleRoot
    } else if n < boundary {
        StabilityClass::StableSpiral
    } else {
        StabilityClass::StableNode
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumReport {
    pub n: f64,
    pub a: f64,
    pub rho_star: f64,
    pub zeta_star: f64,
    pub jacobian: [[f64; 2]; 2],
    /// `[λ+, λ-]`.
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
}

pub fn analyze_equilibrium(n: f64, a: f64) -> Result<EquilibriumReport> {
    let (rho_star, zeta_star) = equilibrium_circle(n, a)?;
    Ok(EquilibriumReport {
        n,
        a,
        rho_star,
        zeta_star,
        jacobian: jacobian_circle(n, a)?,
        eigenvalues: eigenvalues_circle(n, a)?,
        class: classify_equilibrium(n)?,
    })
}

/// Pursuer position from the evader position, the evader heading `theta`
/// and the reduced state: `P = E - ρ (cos(Θ-ζ), sin(Θ-ζ))`.
pub fn reconstruct_pursuer(evader_pos: Vec2, theta: f64, state: &DynState) -> Vec2 {
    evader_pos - Vec2::from_angle(theta - state.zeta) * state.rho
}

/// `ζ''(Θ)` of the single second-order equation obtained by eliminating ρ,
/// where `f = 1/Θ'` and `f_p = df/dΘ`.
pub fn zeta_second_order_rhs(zeta: f64, zeta_p: f64, theta: f64, f: f64, f_p: f64, n: f64) -> Result<f64> {
    let (s, c) = zeta.sin_cos();
    if s.abs() <= SINGULAR_FLOOR {
        return Err(Error::Singular { theta });
    }
    let lag = 1.0 - zeta_p;
    Ok((lag * lag * (c - n) * f - (f_p * s + f * zeta_p * c) * lag) / (f * s))
}

/// `f = 1/φ'` for the unit-speed ellipse and its logarithmic derivative
/// `f'/f = -3(a² - b²) sin φ cos φ / (a² sin²φ + b² cos²φ)`.
pub fn f_and_logderiv_ellipse(phi: f64, shape: EllipseShape) -> (f64, f64) {
    let (a2, b2) = (shape.a() * shape.a(), shape.b() * shape.b());
    let (s, c) = phi.sin_cos();
    let f = 1.0 / phi_dot(phi, shape);
    (f, -3.0 * (a2 - b2) * s * c / (a2 * s * s + b2 * c * c))
}

/// `ζ'(Θ₀) = 1 - f(Θ₀) sin ζ₀ / ρ₀`, from `ρ ζ' = -f sin ζ + ρ`.
pub fn zeta_prime_initial(f: f64, zeta0: f64, rho0: f64) -> f64 {
    1.0 - f * zeta0.sin() / rho0
}

/// Initial data and span for the reduced systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedConfig {
    pub n: f64,
    pub rho0: f64,
    pub zeta0: f64,
    /// Initial evader phase (elliptical system only).
    pub phi0: f64,
    pub t0: f64,
    pub t1: f64,
    pub capture_eps: f64,
}

impl Default for ReducedConfig {
    fn default() -> Self {
        Self {
            n: 0.5,
            rho0: 1.0,
            zeta0: FRAC_PI_2,
            phi0: FRAC_PI_2,
            t0: 0.0,
            t1: 10.0 * PI,
            capture_eps: DEFAULT_CAPTURE_EPS,
        }
    }
}

impl ReducedConfig {
    fn validate(&self) -> Result<()> {
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidArgument("speed ratio n must be positive"));
        }
        if !(self.rho0 > self.capture_eps) {
            return Err(Error::NonPositiveDistance(self.rho0));
        }
        if !(self.zeta0.is_finite() && self.phi0.is_finite()) {
            return Err(Error::InvalidArgument("initial angles must be finite"));
        }
        if !(self.capture_eps > 0.0) {
            return Err(Error::InvalidArgument("capture_eps must be positive"));
        }
        Ok(())
    }
}

/// State layout `(ρ, ζ)`.
#[derive(Debug, Clone, Copy)]
pub struct CircleSystem {
    pub n: f64,
    pub a: f64,
}

impl OdeSystem for CircleSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let (r, z) = dds_rhs_circle(&DynState::new(y[0], y[1]), self.n, self.a).unwrap_or((f64::NAN, f64::NAN));
        out[0] = r;
        out[1] = z;
    }
}

/// State layout `(ρ, ζ, φ)`.
#[derive(Debug, Clone, Copy)]
pub struct EllipseSystem {
    pub n: f64,
    pub shape: EllipseShape,
}

impl OdeSystem for EllipseSystem {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _t: f64, y: &[f64], out: &mut [f64]) {
        let rates = dds_rhs_ellipse(&DynState::with_phi(y[0], y[1], y[2]), self.n, self.shape);
        let (r, z, p) = rates.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        out[0] = r;
        out[1] = z;
        out[2] = p;
    }
}

/// Integrated reduced system.
#[derive(Debug, Clone)]
pub struct DynRun {
    /// Rows are `(ρ, ζ)` or `(ρ, ζ, φ)` against time.
    pub trajectory: Trajectory,
    /// Time at which `ρ` dropped through the capture threshold.
    pub capture: Option<f64>,
}

impl DynRun {
    pub fn states(&self) -> impl Iterator<Item = (f64, DynState)> + '_ {
        self.trajectory.iter().map(|s| {
            let phi = s.state.get(2).copied();
            (s.t, DynState { rho: s.state[0], zeta: s.state[1], phi })
        })
    }

    pub fn final_state(&self) -> DynState {
        let last = self.trajectory.last().expect("a run always holds its initial sample");
        DynState { rho: last.state[0], zeta: last.state[1], phi: last.state.get(2).copied() }
    }
}

fn run_reduced<S: OdeSystem>(system: &S, y0: &[f64], config: &ReducedConfig, stepper: Stepper) -> Result<DynRun> {
    let eps = config.capture_eps;
    let guard = |_t: f64, y: &[f64]| y[0] - eps;
    // Unit evader speed: the gap closes at most at rate 1 + n.
    let limit = |_t: f64, y: &[f64]| 0.25 * y[0] / (1.0 + config.n);
    let event = EventSpec::new(&guard).with_step_limit(&limit);
    let run = integrate::integrate(system, y0, config.t0, config.t1, stepper, Some(&event))?;
    Ok(DynRun { capture: run.event.map(|e| e.t), trajectory: run.trajectory })
}

pub fn integrate_circle(a: f64, config: &ReducedConfig, stepper: Stepper) -> Result<DynRun> {
    config.validate()?;
    check_radius(a)?;
    run_reduced(&CircleSystem { n: config.n, a }, &[config.rho0, config.zeta0], config, stepper)
}

pub fn integrate_ellipse(shape: EllipseShape, config: &ReducedConfig, stepper: Stepper) -> Result<DynRun> {
    config.validate()?;
    run_reduced(
        &EllipseSystem { n: config.n, shape },
        &[config.rho0, config.zeta0, config.phi0],
        config,
        stepper,
    )
}

/// `(ζ, ζ')` against `Θ = φ` for the unit-speed ellipse.
#[derive(Debug, Clone, Copy)]
pub struct ZetaThetaSystem {
    pub n: f64,
    pub shape: EllipseShape,
}

impl OdeSystem for ZetaThetaSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, theta: f64, y: &[f64], out: &mut [f64]) {
        let (f, logd) = f_and_logderiv_ellipse(theta, self.shape);
        out[0] = y[1];
        out[1] = zeta_second_order_rhs(y[0], y[1], theta, f, logd * f, self.n).unwrap_or(f64::NAN);
    }
}

/// Integrate the second-order ζ(Θ) equation over `[theta0, theta1]`.
/// Fails with [`Error::Singular`] if `|sin ζ|` reaches [`SINGULAR_FLOOR`].
pub fn integrate_zeta_theta(
    n: f64,
    shape: EllipseShape,
    zeta0: f64,
    zeta_p0: f64,
    theta0: f64,
    theta1: f64,
    stepper: Stepper,
) -> Result<Trajectory> {
    if zeta0.sin().abs() <= SINGULAR_FLOOR {
        return Err(Error::Singular { theta: theta0 });
    }
    let guard = |_t: f64, y: &[f64]| y[0].sin().abs() - SINGULAR_FLOOR;
    let event = EventSpec::new(&guard);
    let system = ZetaThetaSystem { n, shape };
    let run = match integrate::integrate(&system, &[zeta0, zeta_p0], theta0, theta1, stepper, Some(&event)) {
        Err(Error::NonFinite { t, .. }) | Err(Error::StepUnderflow { t, .. }) => {
            return Err(Error::Singular { theta: t })
        }
        other => other?,
    };
    if let Some(hit) = run.event {
        return Err(Error::Singular { theta: hit.t });
    }
    Ok(run.trajectory)
}
