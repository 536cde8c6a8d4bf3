//! Stein operators, the Stein-equation solution and the empirical discrepancy.

pub mod discrepancy;
pub mod operator;
pub mod solution;

pub use discrepancy::{
    default_family, stein_discrepancy, DiscrepancyEntry, DiscrepancyFunction, DiscrepancyReport,
    Representation,
};
pub use operator::{
    apply_operator, density_ode_residual, gh_operator, gh_operator_alt, Coefficient,
    OperatorCoefficients, OperatorOrder,
};
pub use solution::{SolutionForm, SolutionPoint, SteinSolution, TestFunctionSpec};
