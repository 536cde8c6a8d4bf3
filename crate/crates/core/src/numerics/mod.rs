//! Quadrature, finite differences and random streams.

pub mod diff;
pub mod quadrature;
pub mod rng;

pub use diff::{derivative, DiffOrder};
pub use quadrature::{
    integrate, integrate_semi_infinite, integrate_with_breaks, Estimate, QuadratureConfig,
};
pub use rng::RandomStream;
