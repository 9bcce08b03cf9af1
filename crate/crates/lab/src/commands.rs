//! One function per subcommand, each turning a [`RunConfig`] into a table,
//! an optional plot and any notes for standard error.

use std::f64::consts::TAU;

use pursuit_core::analysis::{invariance_report, limit_cycle_detect, orbit_config, poincare_crossings};
use pursuit_core::curves::{wrap_angle, Curve, EvaderPath, Parameterization};
use pursuit_core::dynsys::{
    analyze_equilibrium, equilibrium_circle, f_and_logderiv_ellipse, integrate_circle, integrate_ellipse,
    integrate_zeta_theta, zeta_prime_initial, DynRun, ReducedConfig,
};
use pursuit_core::pursuit::{simulate_pursuit, PursuitRun};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{LabError, Result};
use crate::output::{Cell, Table};
use crate::parallel::{map_limited, thread_cap};
use crate::svg::{Plot, Series};

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub plot: Option<Plot>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(table: Table, plot: Option<Plot>) -> Self {
        Self { table, plot, notes: Vec::new() }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Report> {
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::CompareParams => compare_params(cfg),
        Command::Dynsys => dynsys(cfg),
        Command::Equilibrium => equilibrium(cfg),
        Command::ZetaOde => zeta_ode(cfg),
        Command::LimitCycle => limit_cycle(cfg),
    }
}

/// The evader's path over `[t0, t1]`, for plotting.
fn evader_polyline(path: &EvaderPath, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    const POINTS: usize = 400;
    (0..=POINTS)
        .map(|i| {
            let p = path.evader(t0 + (t1 - t0) * i as f64 / POINTS as f64).pos;
            (p.x, p.y)
        })
        .collect()
}

fn capture_json(run: &PursuitRun) -> Value {
    run.capture.map_or(Value::Null, |c| json!({ "param": c.param, "x": c.position.x, "y": c.position.y }))
}

fn simulate(cfg: &RunConfig) -> Result<Report> {
    let path = cfg.path()?;
    let start = cfg.t0.unwrap_or_else(|| path.start_param());
    let end = cfg.t1.unwrap_or(start + path.orbit_span());
    let config = pursuit_core::pursuit::PursuitConfig::new(cfg.n, cfg.pursuer_start(), start, end)?
        .with_capture_eps(cfg.capture_eps);
    let run = simulate_pursuit(path, &config, cfg.stepper())?;

    let mut table = Table::new(&["param", "evader_x", "evader_y", "pursuer_x", "pursuer_y", "rho", "lambda"]);
    for s in &run.samples {
        table.push(vec![
            s.param.into(),
            s.evader.x.into(),
            s.evader.y.into(),
            s.pursuer.x.into(),
            s.pursuer.y.into(),
            s.rho.into(),
            s.lambda.into(),
        ]);
    }
    table.note("samples", run.samples.len());
    table.note("capture", capture_json(&run));

    let (_, last) = run.span();
    let plot = Plot {
        title: format!("Pursuit, n = {}", cfg.n),
        x_label: "x".into(),
        y_label: "y".into(),
        series: vec![
            Series::line("evader", evader_polyline(&path, start, last)),
            Series::line("pursuer", run.pursuers().map(|p| (p.x, p.y)).collect()),
        ],
        equal_aspect: true,
    };
    let mut report = Report::new(table, Some(plot));
    if let Some(c) = run.capture {
        report.notes.push(format!("capture at param {:.10} ({:.10}, {:.10})", c.param, c.position.x, c.position.y));
    }
    Ok(report)
}

fn compare_params(cfg: &RunConfig) -> Result<Report> {
    let shape = cfg.shape()?;
    let (n, p0, eps, stepper) = (cfg.n, cfg.pursuer_start(), cfg.capture_eps, cfg.stepper());
    let paths = Parameterization::ELLIPSE.map(|p| EvaderPath { shape, param: p });
    let results = map_limited(paths.to_vec(), thread_cap(), |path| {
        let config = orbit_config(&path, n, p0)?.with_capture_eps(eps);
        simulate_pursuit(path, &config, stepper)
    });
    let runs: Vec<PursuitRun> = results.into_iter().collect::<std::result::Result<_, _>>()?;
    let runs: [PursuitRun; 3] = runs.try_into().expect("one run per parameterization");
    let report = invariance_report(shape, &runs, cfg.anchor_step, cfg.match_tol)?;

    let mut table = Table::new(&[
        "anchor_k", "evader_x", "evader_y", "p1_x", "p1_y", "p2_x", "p2_y", "p3_x", "p3_y", "max_dev",
    ]);
    for a in &report.anchors {
        let mut row: Vec<Cell> = vec![a.k.into(), a.evader.x.into(), a.evader.y.into()];
        for p in a.pursuers {
            row.extend([p.x.into(), p.y.into()]);
        }
        row.push(a.max_dev.into());
        table.push(row);
    }
    table.note("max_pursuer_deviation", report.max_pursuer_deviation);
    table.note("tolerance", report.tolerance);
    table.note("pass", report.pass);
    table.note(
        "capture",
        report.capture.map_or(Value::Null, |(p, c)| json!({ "parameterization": format!("{p:?}"), "param": c.param })),
    );

    let mut series = vec![Series::line("evader", evader_polyline(&paths[0], 0.0, TAU))];
    for (run, name) in runs.iter().zip(["standard", "angvel", "arclen"]) {
        series.push(Series::line(format!("pursuer ({name})"), run.pursuers().map(|p| (p.x, p.y)).collect()));
    }
    series.push(Series::dots(
        "anchors",
        report.anchors.iter().flat_map(|a| a.pursuers.map(|p| (p.x, p.y))).collect(),
    ));
    let plot = Plot {
        title: format!("Parameterization comparison, n = {}", cfg.n),
        x_label: "x".into(),
        y_label: "y".into(),
        series,
        equal_aspect: true,
    };
    let mut out = Report::new(table, Some(plot));
    out.notes.push(format!(
        "max pursuer deviation {:.3e} ({} tolerance {:e})",
        report.max_pursuer_deviation,
        if report.pass { "within" } else { "exceeds" },
        report.tolerance
    ));
    if let Some((p, c)) = report.capture {
        out.notes.push(format!("{p:?} run captured at param {:.10}; later anchors skipped", c.param));
    }
    Ok(out)
}

fn reduced_config(cfg: &RunConfig) -> ReducedConfig {
    let (t0, t1) = cfg.time_span();
    ReducedConfig {
        n: cfg.n,
        rho0: cfg.rho0,
        zeta0: cfg.zeta0,
        phi0: cfg.phi0,
        t0,
        t1,
        capture_eps: cfg.capture_eps,
    }
}

fn capture_note(run: &DynRun) -> Option<String> {
    run.capture.map(|t| format!("capture at t = {t:.10}"))
}

fn dynsys(cfg: &RunConfig) -> Result<Report> {
    let reduced = reduced_config(cfg);
    let circle = cfg.a == cfg.b;
    let run = if circle {
        integrate_circle(cfg.a, &reduced, cfg.stepper())?
    } else {
        integrate_ellipse(cfg.shape()?, &reduced, cfg.stepper())?
    };

    let mut table = Table::new(&["t", "rho", "zeta", "phi"]);
    for (t, s) in run.states() {
        table.push(vec![t.into(), s.rho.into(), s.zeta.into(), s.phi.into()]);
    }
    let end = run.final_state();
    table.note(
        "final",
        json!({ "rho": end.rho, "zeta": end.zeta, "zeta_wrapped": wrap_angle(end.zeta), "phi": end.phi }),
    );
    table.note("capture_t", run.capture);

    let mut series = vec![Series::line("trajectory", run.states().map(|(_, s)| (s.rho, s.zeta)).collect())];
    if circle && cfg.n < 1.0 {
        let (rho, zeta) = equilibrium_circle(cfg.n, cfg.a)?;
        table.note("equilibrium", json!({ "rho_star": rho, "zeta_star": zeta }));
        series.push(Series::dots("equilibrium", vec![(rho, zeta)]));
    }
    let plot = Plot {
        title: format!("Reduced system, n = {}, a = {}, b = {}", cfg.n, cfg.a, cfg.b),
        x_label: "rho".into(),
        y_label: "zeta".into(),
        series,
        equal_aspect: false,
    };
    let mut report = Report::new(table, Some(plot));
    report.notes.extend(capture_note(&run));
    Ok(report)
}

fn equilibrium(cfg: &RunConfig) -> Result<Report> {
    let eq = analyze_equilibrium(cfg.n, cfg.a)?;
    let [l1, l2] = eq.eigenvalues;
    let j = eq.jacobian;
    let mut table = Table::new(&[
        "n", "a", "rho_star", "zeta_star", "class", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "j11",
        "j12", "j21", "j22",
    ]);
    table.push(vec![
        eq.n.into(),
        eq.a.into(),
        eq.rho_star.into(),
        eq.zeta_star.into(),
        Cell::Text(eq.class.as_str().into()),
        l1.re.into(),
        l1.im.into(),
        l2.re.into(),
        l2.im.into(),
        j[0][0].into(),
        j[0][1].into(),
        j[1][0].into(),
        j[1][1].into(),
    ]);
    table.rows_in_json = false;
    table.note("rho_star", eq.rho_star);
    table.note("zeta_star", eq.zeta_star);
    table.note("class", eq.class.as_str());
    table.note("eigenvalues", json!([{ "re": l1.re, "im": l1.im }, { "re": l2.re, "im": l2.im }]));
    table.note("jacobian", json!(j));
    Ok(Report::new(table, None))
}

fn zeta_ode(cfg: &RunConfig) -> Result<Report> {
    let shape = cfg.shape()?;
    let theta0 = cfg.t0.unwrap_or(cfg.phi0);
    let theta1 = cfg.t1.unwrap_or(theta0 + TAU);
    if !(theta1 > theta0) {
        return Err(LabError::Config("--t1 must exceed the start angle".into()));
    }
    if !(cfg.rho0 > 0.0) {
        return Err(pursuit_core::Error::NonPositiveDistance(cfg.rho0).into());
    }
    let (f0, _) = f_and_logderiv_ellipse(theta0, shape);
    let slope = zeta_prime_initial(f0, cfg.zeta0, cfg.rho0);
    let traj = integrate_zeta_theta(cfg.n, shape, cfg.zeta0, slope, theta0, theta1, cfg.stepper())?;

    let mut table = Table::new(&["theta", "zeta", "zeta_prime"]);
    for s in traj.iter() {
        table.push(vec![s.t.into(), s.state[0].into(), s.state[1].into()]);
    }
    table.note("zeta_prime0", slope);
    let plot = Plot {
        title: format!("zeta(Theta), n = {}, a = {}, b = {}", cfg.n, cfg.a, cfg.b),
        x_label: "Theta".into(),
        y_label: "zeta".into(),
        series: vec![Series::line("zeta", traj.iter().map(|s| (s.t, s.state[0])).collect())],
        equal_aspect: false,
    };
    Ok(Report::new(table, Some(plot)))
}

fn limit_cycle(cfg: &RunConfig) -> Result<Report> {
    let run = integrate_ellipse(cfg.shape()?, &reduced_config(cfg), cfg.stepper())?;
    let crossings = poincare_crossings(&run.trajectory, cfg.section)?;
    let verdict = limit_cycle_detect(&crossings, cfg.match_tol)?;

    let mut table = Table::new(&["k", "rho", "zeta_wrapped", "gap"]);
    for (i, c) in crossings.iter().enumerate() {
        let gap = i.checked_sub(1).map(|g| verdict.gaps[g]);
        table.push(vec![c.k.into(), c.rho.into(), c.zeta_wrapped.into(), gap.into()]);
    }
    table.note("converged", verdict.converged);
    table.note("last_gap", verdict.last_gap);
    table.note("tolerance", cfg.match_tol);
    table.note("gaps_non_increasing", verdict.gaps_non_increasing);
    table.note("cycle_point", json!({ "rho": verdict.cycle_point.0, "zeta_wrapped": verdict.cycle_point.1 }));

    let plot = Plot {
        title: format!("Section at phi = {:.4}, n = {}", cfg.section, cfg.n),
        x_label: "rho".into(),
        y_label: "zeta (wrapped)".into(),
        series: vec![
            Series::line("trajectory", run.states().map(|(_, s)| (s.rho, wrap_angle(s.zeta))).collect()),
            Series::dots("crossings", crossings.iter().map(|c| (c.rho, c.zeta_wrapped)).collect()),
        ],
        equal_aspect: false,
    };
    let mut report = Report::new(table, Some(plot));
    report.notes.push(format!(
        "{} crossings, last gap {:.3e}: {}",
        crossings.len(),
        verdict.last_gap,
        if verdict.converged { "converged" } else { "not converged" }
    ));
    report.notes.extend(capture_note(&run));
    Ok(report)
}
