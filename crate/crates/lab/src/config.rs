//! Run configuration: built-in defaults, then an optional JSON file, then
//! command-line flags, each layer overriding the one before.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pursuit_core::curves::{EllipseShape, EvaderPath, Parameterization};
use pursuit_core::integrate::Stepper;
use pursuit_core::pursuit::DEFAULT_CAPTURE_EPS;
use pursuit_core::Vec2;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Parser)]
#[command(name = "pursuit-lab", version, about = "Pure-pursuit experiments on circles and ellipses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Integrate the pursuer against one evader parameterization.
    Simulate(Options),
    /// Run all three ellipse parameterizations and compare pursuers at anchors.
    CompareParams(Options),
    /// Integrate the reduced (rho, zeta) system; (rho, zeta, phi) when a != b.
    Dynsys(Options),
    /// Equilibrium, Jacobian, eigenvalues and class for the circular case.
    Equilibrium(Options),
    /// Integrate the second-order zeta(Theta) equation on the ellipse.
    ZetaOde(Options),
    /// Poincare section of the elliptical reduced system.
    LimitCycle(Options),
}

impl CommandArgs {
    pub fn split(self) -> (Command, Options) {
        match self {
            CommandArgs::Simulate(o) => (Command::Simulate, o),
            CommandArgs::CompareParams(o) => (Command::CompareParams, o),
            CommandArgs::Dynsys(o) => (Command::Dynsys, o),
            CommandArgs::Equilibrium(o) => (Command::Equilibrium, o),
            CommandArgs::ZetaOde(o) => (Command::ZetaOde, o),
            CommandArgs::LimitCycle(o) => (Command::LimitCycle, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    CompareParams,
    Dynsys,
    Equilibrium,
    ZetaOde,
    LimitCycle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::CompareParams => "compare-params",
            Command::Dynsys => "dynsys",
            Command::Equilibrium => "equilibrium",
            Command::ZetaOde => "zeta-ode",
            Command::LimitCycle => "limit-cycle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Standard,
    Angvel,
    Arclen,
    Circle,
}

impl From<ParamKind> for Parameterization {
    fn from(kind: ParamKind) -> Self {
        match kind {
            ParamKind::Standard => Parameterization::Standard,
            ParamKind::Angvel => Parameterization::AngularVelocity,
            ParamKind::Arclen => Parameterization::ArcLength,
            ParamKind::Circle => Parameterization::Circle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn parse_point(s: &str) -> std::result::Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([parse(x)?, parse(y)?])
}

/// Flags shared by every subcommand. Unset flags fall through to the config
/// file and then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON file with any of the options below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pursuer-to-evader speed ratio.
    #[arg(long)]
    pub n: Option<f64>,
    /// Semi-axis along x.
    #[arg(long)]
    pub a: Option<f64>,
    /// Semi-axis along y.
    #[arg(long)]
    pub b: Option<f64>,
    /// Evader parameterization (simulate).
    #[arg(long, value_enum)]
    pub param: Option<ParamKind>,
    /// Start of the integration interval.
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// End of the integration interval.
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Fixed RK4 step; selects the fixed-step integrator.
    #[arg(long)]
    pub step: Option<f64>,
    /// Relative tolerance of the adaptive integrator.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Initial pursuer position as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub p0: Option<[f64; 2]>,
    /// Initial pursuer-evader distance for the reduced system
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Initial heading difference, evader heading minus pursuer heading
    #[arg(long, allow_hyphen_values = true)]
    pub zeta0: Option<f64>,
    /// Initial evader phase for the elliptical reduced system.
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    /// Section phase for limit-cycle (mod 2π).
    #[arg(long, allow_hyphen_values = true)]
    pub section: Option<f64>,
    /// Anchor spacing for compare-params.
    #[arg(long)]
    pub anchor_step: Option<f64>,
    /// Pass threshold for compare-params and limit-cycle.
    #[arg(long)]
    pub match_tol: Option<f64>,
    /// Separation at which a pursuit counts as a capture.
    #[arg(long)]
    pub capture_eps: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output encoding; inferred from a `.json` output path when absent
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub n: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub param: Option<ParamKind>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub p0: Option<[f64; 2]>,
    pub rho0: Option<f64>,
    pub zeta0: Option<f64>,
    pub phi0: Option<f64>,
    pub section: Option<f64>,
    pub anchor_step: Option<f64>,
    pub match_tol: Option<f64>,
    pub capture_eps: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub svg: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::ReadConfig { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| LabError::ParseConfig { path: path.into(), source })
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: f64,
    pub a: f64,
    pub b: f64,
    pub param: ParamKind,
    /// `None` means "the natural start/end for this command".
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub p0: [f64; 2],
    pub rho0: f64,
    pub zeta0: f64,
    pub phi0: f64,
    pub section: f64,
    pub anchor_step: f64,
    pub match_tol: f64,
    pub capture_eps: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub svg: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults reproduce the reference experiment: n = 0.5 on the ellipse
    /// a = 1, b = 0.5, pursuer from the origin, ρ₀ = 1, ζ₀ = φ₀ = π/2.
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            n: 0.5,
            a: 1.0,
            b: 0.5,
            param: ParamKind::Standard,
            t0: None,
            t1: None,
            step: None,
            tol: None,
            p0: [0.0, 0.0],
            rho0: 1.0,
            zeta0: FRAC_PI_2,
            phi0: FRAC_PI_2,
            section: FRAC_PI_2,
            anchor_step: FRAC_PI_2,
            match_tol: 1e-3,
            capture_eps: DEFAULT_CAPTURE_EPS,
            output: None,
            format: Format::Csv,
            svg: None,
        }
    }

    pub fn resolve(command: Command, opts: Options) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        if let Some(c) = file.command.filter(|&c| c != command) {
            return Err(LabError::Config(format!(
                "config file is for `{}` but `{}` was requested",
                c.name(),
                command.name()
            )));
        }
        let d = Self::defaults(command);
        let output = opts.output.or(file.output);
        // An explicit format wins; otherwise a `.json` output implies JSON.
        let format = opts.format.or(file.format).unwrap_or_else(|| {
            match output.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
                Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
                _ => d.format,
            }
        });
        let config = Self {
            command,
            n: opts.n.or(file.n).unwrap_or(d.n),
            a: opts.a.or(file.a).unwrap_or(d.a),
            b: opts.b.or(file.b).unwrap_or(d.b),
            param: opts.param.or(file.param).unwrap_or(d.param),
            t0: opts.t0.or(file.t0),
            t1: opts.t1.or(file.t1),
            step: opts.step.or(file.step),
            tol: opts.tol.or(file.tol),
            p0: opts.p0.or(file.p0).unwrap_or(d.p0),
            rho0: opts.rho0.or(file.rho0).unwrap_or(d.rho0),
            zeta0: opts.zeta0.or(file.zeta0).unwrap_or(d.zeta0),
            phi0: opts.phi0.or(file.phi0).unwrap_or(d.phi0),
            section: opts.section.or(file.section).unwrap_or(d.section),
            anchor_step: opts.anchor_step.or(file.anchor_step).unwrap_or(d.anchor_step),
            match_tol: opts.match_tol.or(file.match_tol).unwrap_or(d.match_tol),
            capture_eps: opts.capture_eps.or(file.capture_eps).unwrap_or(d.capture_eps),
            output,
            format,
            svg: opts.svg.or(file.svg),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(LabError::Config(msg.to_owned()));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let finite = [self.rho0, self.zeta0, self.phi0, self.section, self.p0[0], self.p0[1]];
        if !finite.iter().all(|v| v.is_finite()) {
            return bad("initial values must be finite");
        }
        if !positive(self.n) {
            return bad("--n must be positive");
        }
        if !positive(self.a) || !positive(self.b) {
            return bad("semi-axes --a and --b must be positive");
        }
        if self.param == ParamKind::Circle && self.a != self.b {
            return bad("--param circle needs --a equal to --b");
        }
        if self.step.is_some() && self.tol.is_some() {
            return bad("--step (fixed RK4) and --tol (adaptive) are mutually exclusive");
        }
        if self.step.is_some_and(|h| !positive(h)) || self.tol.is_some_and(|t| !positive(t)) {
            return bad("--step and --tol must be positive");
        }
        if let (Some(t0), Some(t1)) = (self.t0, self.t1) {
            if !(t1 > t0) {
                return bad("--t1 must exceed --t0");
            }
        }
        if !positive(self.anchor_step) || !positive(self.match_tol) || !positive(self.capture_eps) {
            return bad("--anchor-step, --match-tol and --capture-eps must be positive");
        }
        if self.command == Command::Equilibrium && self.svg.is_some() {
            return bad("equilibrium has nothing to plot; drop --svg");
        }
        Ok(())
    }

    pub fn stepper(&self) -> Stepper {
        match (self.step, self.tol) {
            (Some(h), _) => Stepper::fixed(h),
            (None, Some(tol)) => Stepper::adaptive(tol),
            (None, None) => Stepper::default(),
        }
    }

    pub fn shape(&self) -> Result<EllipseShape> {
        Ok(EllipseShape::new(self.a, self.b)?)
    }

    pub fn path(&self) -> Result<EvaderPath> {
        Ok(EvaderPath::new(self.shape()?, self.param.into())?)
    }

    pub fn pursuer_start(&self) -> Vec2 {
        Vec2::new(self.p0[0], self.p0[1])
    }

    /// Span of the reduced-system runs: `[0, 10π]` unless overridden.
    pub fn time_span(&self) -> (f64, f64) {
        (self.t0.unwrap_or(0.0), self.t1.unwrap_or(10.0 * PI))
    }
}
