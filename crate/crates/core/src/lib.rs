//! Generalized hyperbolic distributions and their Stein characterisation.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are the usual entry points.

pub mod bessel;
pub mod distributions;
pub mod error;
pub mod gamma;
pub mod limits;
pub mod moments;
pub mod numerics;
pub mod scalar;
pub mod stein;

pub use distributions::{GhParams, GigParams, SampleSet, SampleSource};
pub use error::{Error, Result};
pub use limits::LimitCase;
pub use moments::MomentTable;
pub use numerics::{QuadratureConfig, RandomStream};
pub use scalar::{CompensatedSum, Real};
pub use stein::{DiscrepancyReport, OperatorCoefficients, SteinSolution, TestFunctionSpec};

pub type GhParams64 = GhParams<f64>;
pub type GhParams32 = GhParams<f32>;
pub type GigParams64 = GigParams<f64>;
pub type GigParams32 = GigParams<f32>;
pub type SampleSet64 = SampleSet<f64>;
pub type MomentTable64 = MomentTable<f64>;
pub type SteinSolution64 = SteinSolution<f64>;
pub type OperatorCoefficients64 = OperatorCoefficients<f64>;
pub type DiscrepancyReport64 = DiscrepancyReport<f64>;
pub type LimitCase64 = LimitCase<f64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
