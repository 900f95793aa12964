//! Numerical laboratory for zeros of random polynomials built on weighted
//! orthonormal bases.
//!
//! The crate computes the deterministic limit objects (the weighted extremal
//! function, equilibrium masses, Bergman kernel asymptotics) and runs seeded
//! Monte Carlo experiments that compare zero counts and log-moduli of random
//! polynomials against them at finite degree.

pub mod ensembles;
pub mod experiments;
pub mod error;
pub mod extremal;
pub mod lowdisc;
pub mod onb;
pub mod quadrature;
pub mod stahltotik;
pub mod weights;
pub mod zeros;

pub use error::{Error, Result};
