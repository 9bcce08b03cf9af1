//! Pure pursuit on parametric evader curves.
//!
//! The crate covers the full numerical chain: evader curves under several
//! parameterizations ([`curves`]), an explicit Runge-Kutta integrator with
//! dense output and down-crossing events ([`integrate`]), the pursuer's
//! Cartesian equations of motion ([`pursuit`]), the reduced distance/angle
//! system with its equilibrium analysis ([`dynsys`]), and experiment-level
//! procedures such as reparameterization invariance and Poincaré sections
//! ([`analysis`]).
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line front end live in the `pursuit-lab` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Runge-Kutta stages read more clearly as indexed sums.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod curves;
pub mod dynsys;
mod error;
pub mod integrate;
pub mod pursuit;
mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
