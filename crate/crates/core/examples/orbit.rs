//! Chase an evader once around an ellipse, then look at the circular
//! equilibrium.

use pursuit_core::curves::{EllipseShape, EvaderPath, Parameterization};
use pursuit_core::dynsys::analyze_equilibrium;
use pursuit_core::integrate::Stepper;
use pursuit_core::pursuit::{simulate_pursuit, PursuitConfig};
use pursuit_core::Vec2;

fn main() -> pursuit_core::Result<()> {
    let path = EvaderPath::new(EllipseShape::new(1.0, 0.5)?, Parameterization::Standard)?;
    let config = PursuitConfig::new(0.5, Vec2::ZERO, 0.0, std::f64::consts::TAU)?;
    let run = simulate_pursuit(path, &config, Stepper::adaptive(1e-10))?;
    let end = run.samples.last().expect("non-empty run");
    println!("after one orbit: pursuer ({:.6}, {:.6}), distance {:.6}", end.pursuer.x, end.pursuer.y, end.rho);

    let eq = analyze_equilibrium(0.5, 1.0)?;
    println!("circle: rho* = {:.7}, zeta* = {:.7}, {}", eq.rho_star, eq.zeta_star, eq.class.as_str());
    for z in eq.eigenvalues {
        println!("  eigenvalue {:.7} {:+.7}i", z.re, z.im);
    }
    Ok(())
}
