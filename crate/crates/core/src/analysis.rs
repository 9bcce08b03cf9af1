//! Experiment-level procedures built on the simulators.
//!
//! - [`invariance_check`]: the pursuer's path does not depend on how the
//!   evader's ellipse is parameterized. Three simulations (standard,
//!   constant angular velocity, constant speed) are compared at anchor
//!   points where the three evaders sit at the same place.
//! - [`poincare_crossings`] / [`limit_cycle_detect`]: section the
//!   elliptical `(ρ, ζ, φ)` flow at a fixed evader phase and test whether
//!   successive returns settle.
//! - [`radial_convergence`] / [`scaled_ellipse_deviation`]: how far the tail
//!   of a pursuit stays from a reference curve.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::curves::{wrap_angle, Curve, EllipseShape, EvaderPath, Parameterization};
use crate::integrate::{Stepper, Trajectory};
use crate::pursuit::{simulate_pursuit, CaptureEvent, PursuitConfig, PursuitRun, PursuitSample};
use crate::{Error, Result, Vec2};

/// Evader positions at one anchor must agree to this before pursuers are
/// compared.
pub const ANCHOR_AGREEMENT: f64 = 1e-9;
/// Poincaré crossings are refined until `|φ - section| <= SECTION_TOL`.
pub const SECTION_TOL: f64 = 1e-10;

/// One anchor of an invariance comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub k: usize,
    /// Curve parameter for standard, angular-velocity and constant-speed runs.
    pub params: [f64; 3],
    pub evader: Vec2,
    pub pursuers: [Vec2; 3],
    /// Largest pairwise distance between the three pursuers.
    pub max_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub anchors: Vec<Anchor>,
    pub max_pursuer_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// First capture among the three runs, if the orbit was cut short.
    pub capture: Option<(Parameterization, CaptureEvent)>,
}

fn ellipse_paths(shape: EllipseShape) -> [EvaderPath; 3] {
    Parameterization::ELLIPSE.map(|p| EvaderPath { shape, param: p })
}

/// One orbit from the evader's start for the given path.
pub fn orbit_config(path: &EvaderPath, n: f64, p0: Vec2) -> Result<PursuitConfig> {
    let start = path.start_param();
    PursuitConfig::new(n, p0, start, start + path.orbit_span())
}

/// One-orbit pursuit simulations for the three ellipse parameterizations,
/// in the order of [`Parameterization::ELLIPSE`].
pub fn invariance_runs(shape: EllipseShape, n: f64, p0: Vec2, stepper: Stepper) -> Result<[PursuitRun; 3]> {
    let [a, b, c] = ellipse_paths(shape);
    Ok([
        simulate_pursuit(a, &orbit_config(&a, n, p0)?, stepper)?,
        simulate_pursuit(b, &orbit_config(&b, n, p0)?, stepper)?,
        simulate_pursuit(c, &orbit_config(&c, n, p0)?, stepper)?,
    ])
}

/// Parameters of the three ellipse parameterizations at the `k`-th anchor.
///
/// When `anchor_step` is a multiple of π/2 the anchors are axis points and
/// the rule `t = φ - π/2` is exact; otherwise each parameter is found by
/// matching the eccentric anomaly of the standard anchor.
pub fn anchor_params(shape: EllipseShape, k: usize, anchor_step: f64) -> [f64; 3] {
    let t = k as f64 * anchor_step;
    let quarters = anchor_step / FRAC_PI_2;
    if (quarters - quarters.round()).abs() < 1e-12 {
        [t, t, t + FRAC_PI_2]
    } else {
        ellipse_paths(shape).map(|p| p.param_at_anomaly(t))
    }
}

/// Compare three finished runs at anchors `k·anchor_step`, `k = 0..`, over
/// one orbit.
pub fn invariance_report(
    shape: EllipseShape,
    runs: &[PursuitRun; 3],
    anchor_step: f64,
    tol: f64,
) -> Result<InvarianceReport> {
    if !(anchor_step > 0.0) {
        return Err(Error::InvalidArgument("anchor_step must be positive"));
    }
    let paths = ellipse_paths(shape);
    let capture = runs
        .iter()
        .zip(paths.iter())
        .filter_map(|(run, path)| run.capture.map(|c| (path, c)))
        .min_by(|(pa, a), (pb, b)| {
            (a.param - pa.start_param()).total_cmp(&(b.param - pb.start_param()))
        })
        .map(|(path, c)| (path.param, c));

    let count = (TAU / anchor_step + 1e-9).floor() as usize;
    let mut anchors = Vec::with_capacity(count + 1);
    'anchors: for k in 0..=count {
        let params = anchor_params(shape, k, anchor_step);
        let mut evaders = [Vec2::ZERO; 3];
        let mut pursuers = [Vec2::ZERO; 3];
        for i in 0..3 {
            let (_, end) = runs[i].span();
            if params[i] > end {
                // Captured before this anchor.
                break 'anchors;
            }
            evaders[i] = paths[i].evader(params[i]).pos;
            pursuers[i] = runs[i].pursuer_at(params[i])?;
        }
        let spread = max_pairwise(&evaders);
        if spread > ANCHOR_AGREEMENT {
            return Err(Error::AnchorMismatch { k, spread });
        }
        anchors.push(Anchor { k, params, evader: evaders[0], pursuers, max_dev: max_pairwise(&pursuers) });
    }
    let max_pursuer_deviation = anchors.iter().map(|a| a.max_dev).fold(0.0, f64::max);
    Ok(InvarianceReport {
        anchors,
        max_pursuer_deviation,
        tolerance: tol,
        pass: max_pursuer_deviation <= tol,
        capture,
    })
}

/// Simulate the three parameterizations from `p0` over one orbit and
/// compare the pursuers at the anchors.
pub fn invariance_check(
    shape: EllipseShape,
    n: f64,
    p0: Vec2,
    anchor_step: f64,
    tol: f64,
    stepper: Stepper,
) -> Result<InvarianceReport> {
    let runs = invariance_runs(shape, n, p0, stepper)?;
    invariance_report(shape, &runs, anchor_step, tol)
}

fn max_pairwise(points: &[Vec2; 3]) -> f64 {
    points[0]
        .distance(points[1])
        .max(points[0].distance(points[2]))
        .max(points[1].distance(points[2]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionCrossing {
    /// Crossing index, starting at 1 for the first return.
    pub k: usize,
    pub t: f64,
    pub rho: f64,
    /// Unwrapped ζ at the crossing.
    pub zeta: f64,
    /// ζ wrapped into (−π, π].
    pub zeta_wrapped: f64,
}

/// Up-crossings of `φ ≡ section_phi (mod 2π)` on a `(ρ, ζ, φ)` trajectory.
/// The initial point does not count as a crossing even if it lies on the
/// section.
pub fn poincare_crossings(traj: &Trajectory, section_phi: f64) -> Result<Vec<SectionCrossing>> {
    if traj.dim() != 3 {
        return Err(Error::InvalidArgument("section analysis needs a (rho, zeta, phi) trajectory"));
    }
    let lap = |phi: f64| ((phi - section_phi) / TAU).floor();
    let mut out = Vec::new();
    let mut buf = [0.0; 3];
    for i in 1..traj.len() {
        let (phi_a, phi_b) = (traj.state(i - 1)[2], traj.state(i)[2]);
        let (lap_a, lap_b) = (lap(phi_a), lap(phi_b));
        let mut next = lap_a + 1.0;
        while next <= lap_b {
            let target = section_phi + TAU * next;
            let (mut lo, mut hi) = (traj.time(i - 1), traj.time(i));
            // φ(t) is increasing; bisect the interpolant.
            let t = loop {
                let mid = 0.5 * (lo + hi);
                traj.sample_into(mid, &mut buf)?;
                let gap = buf[2] - target;
                if gap.abs() <= SECTION_TOL || mid <= lo || mid >= hi {
                    break mid;
                }
                if gap < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            };
            out.push(SectionCrossing {
                k: out.len() + 1,
                t,
                rho: buf[0],
                zeta: buf[1],
                zeta_wrapped: wrap_angle(buf[1]),
            });
            next += 1.0;
        }
    }
    if out.len() < 2 {
        return Err(Error::TooFewCrossings { needed: 2, found: out.len() });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCycleVerdict {
    pub converged: bool,
    pub last_gap: f64,
    /// `(ρ, ζ_wrapped)` of the final crossing.
    pub cycle_point: (f64, f64),
    /// `gaps[i]` is the distance between crossings `i` and `i + 1`.
    pub gaps: Vec<f64>,
    /// Whether the gaps never grow over the last half of the crossings.
    pub gaps_non_increasing: bool,
}

/// Slack allowed when checking that return gaps shrink, to absorb
/// round-off once the gaps reach integration noise.
const GAP_SLACK: f64 = 1e-12;

fn section_gap(a: &SectionCrossing, b: &SectionCrossing) -> f64 {
    let dr = b.rho - a.rho;
    let dz = wrap_angle(b.zeta_wrapped - a.zeta_wrapped);
    dr.hypot(dz)
}

/// Converged when the last two crossings are within `tol` in
/// `(ρ, ζ_wrapped)`.
pub fn limit_cycle_detect(crossings: &[SectionCrossing], tol: f64) -> Result<LimitCycleVerdict> {
    if crossings.len() < 3 {
        return Err(Error::TooFewCrossings { needed: 3, found: crossings.len() });
    }
    let gaps: Vec<f64> = crossings.windows(2).map(|w| section_gap(&w[0], &w[1])).collect();
    let last_gap = *gaps.last().expect("at least two gaps");
    let last = crossings.last().expect("non-empty");
    // Gaps whose both endpoints lie in the last half of the crossings.
    let first_gap = crossings.len() / 2;
    let gaps_non_increasing = gaps[first_gap..].windows(2).all(|w| w[1] <= w[0] + GAP_SLACK);
    Ok(LimitCycleVerdict {
        converged: last_gap <= tol,
        last_gap,
        cycle_point: (last.rho, last.zeta_wrapped),
        gaps,
        gaps_non_increasing,
    })
}

fn tail(samples: &[PursuitSample], tail_fraction: f64) -> Result<&[PursuitSample]> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidArgument("tail_fraction must lie in (0, 1)"));
    }
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) => (f.param, l.param),
        _ => return Err(Error::Empty),
    };
    let cut = last - tail_fraction * (last - first);
    let start = samples.partition_point(|s| s.param < cut);
    let tail = &samples[start..];
    if tail.is_empty() {
        return Err(Error::Empty);
    }
    Ok(tail)
}

/// Largest `| |pursuer - center| - expected_r |` over the samples in the
/// last `tail_fraction` of the parameter span.
pub fn radial_convergence(samples: &[PursuitSample], center: Vec2, expected_r: f64, tail_fraction: f64) -> Result<f64> {
    Ok(tail(samples, tail_fraction)?
        .iter()
        .map(|s| (s.pursuer.distance(center) - expected_r).abs())
        .fold(0.0, f64::max))
}

/// Largest radial distance from the tail of the pursuer path to the ellipse
/// scaled by `n` (semi-axes `n·a`, `n·b`), measured along the ray from the
/// origin.
pub fn scaled_ellipse_deviation(
    samples: &[PursuitSample],
    shape: EllipseShape,
    n: f64,
    tail_fraction: f64,
) -> Result<f64> {
    let (sa, sb) = (n * shape.a(), n * shape.b());
    Ok(tail(samples, tail_fraction)?
        .iter()
        .map(|s| {
            let (sin, cos) = s.pursuer.angle().sin_cos();
            let r = sa * sb / (sa * sa * sin * sin + sb * sb * cos * cos).sqrt();
            (s.pursuer.norm() - r).abs()
        })
        .fold(0.0, f64::max))
}
