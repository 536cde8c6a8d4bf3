//! Empirical Stein discrepancy: sample means of `𝒜f(Wᵢ)` over a test family.
//!
//! Under `W ~ GH(λ, α, β, δ, 0)` every admissible `f` has `E[𝒜f(W)] = 0`, so
//! large standardized means are evidence against the model.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{GhParams, SampleSet};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};
use crate::stein::operator::{gh_operator, gh_operator_alt, OperatorCoefficients};

type Fun<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

const CHUNK: usize = 16_384;

/// How a family member enters the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// The functions are `f, f', f''` and the singular GH operator is applied.
    Direct,
    /// The functions are `q, q', q''` with `f = x² q`; the nonsingular
    /// rewritten operator is applied to `q`.
    XSquared,
}

/// A test function with analytic first and second derivatives.
#[derive(Clone)]
pub struct DiscrepancyFunction<F> {
    name: String,
    repr: Representation,
    f: Fun<F>,
    f1: Fun<F>,
    f2: Fun<F>,
}

impl<F: Real> fmt::Debug for DiscrepancyFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscrepancyFunction")
            .field("name", &self.name)
            .field("repr", &self.repr)
            .finish()
    }
}

impl<F: Real> DiscrepancyFunction<F> {
    /// A function `f` used directly; it must vanish to second order at 0 so
    /// that the `1/x` and `1/x²` coefficients are neutralized.
    pub fn direct(
        name: impl Into<String>,
        f: impl Fn(F) -> F + Send + Sync + 'static,
        f1: impl Fn(F) -> F + Send + Sync + 'static,
        f2: impl Fn(F) -> F + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        let tol = F::epsilon().sqrt();
        let (v0, v1) = (f(F::zero()), f1(F::zero()));
        if !(v0.abs() <= tol) || !(v1.abs() <= tol) {
            return Err(Error::InadmissibleTestFunction {
                name,
                reason: format!(
                    "f(0) = {v0} and f'(0) = {v1}, but both must vanish so that the operator's 1/x and 1/x^2 terms stay finite at 0"
                ),
            });
        }
        Ok(Self {
            name,
            repr: Representation::Direct,
            f: Arc::new(f),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
        })
    }

    /// `f(x) = x² q(x)` given `q, q', q''`.
    pub fn x_squared(
        name: impl Into<String>,
        q: impl Fn(F) -> F + Send + Sync + 'static,
        q1: impl Fn(F) -> F + Send + Sync + 'static,
        q2: impl Fn(F) -> F + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            repr: Representation::XSquared,
            f: Arc::new(q),
            f1: Arc::new(q1),
            f2: Arc::new(q2),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Values of `(f, f', f'')` of the represented function at `x`.
    pub fn derivatives(&self, x: F) -> (F, F, F) {
        match self.repr {
            Representation::Direct => ((self.f)(x), (self.f1)(x), (self.f2)(x)),
            Representation::XSquared => {
                let (q, q1, q2) = ((self.f)(x), (self.f1)(x), (self.f2)(x));
                let two = F::lit(2.0);
                (
                    x * x * q,
                    two * x * q + x * x * q1,
                    two * q + F::lit(4.0) * x * q1 + x * x * q2,
                )
            }
        }
    }
}

/// `{x²e^{-x²/2}, x²/(1+x²), x³e^{-x²/2}, sin(x)·x²/(1+x²)}` in `x² q` form.
pub fn default_family<F: Real>() -> Vec<DiscrepancyFunction<F>> {
    let one = F::one();
    let two = F::lit(2.0);
    let half = F::lit(0.5);
    let gauss = move |x: F| (-half * x * x).exp();
    vec![
        DiscrepancyFunction::x_squared(
            "x^2*exp(-x^2/2)",
            gauss,
            move |x| -x * gauss(x),
            move |x| (x * x - one) * gauss(x),
        ),
        DiscrepancyFunction::x_squared(
            "x^2/(1+x^2)",
            move |x| one / (one + x * x),
            move |x| -two * x / (one + x * x).powi(2),
            move |x| (F::lit(6.0) * x * x - two) / (one + x * x).powi(3),
        ),
        DiscrepancyFunction::x_squared(
            "x^3*exp(-x^2/2)",
            move |x| x * gauss(x),
            move |x| (one - x * x) * gauss(x),
            move |x| (x * x * x - F::lit(3.0) * x) * gauss(x),
        ),
        DiscrepancyFunction::x_squared(
            "sin(x)*x^2/(1+x^2)",
            move |x: F| x.sin() / (one + x * x),
            move |x| {
                let d = one + x * x;
                x.cos() / d - two * x * x.sin() / (d * d)
            },
            move |x| {
                let d = one + x * x;
                -x.sin() / d - F::lit(4.0) * x * x.cos() / (d * d)
                    + x.sin() * (F::lit(6.0) * x * x - two) / (d * d * d)
            },
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyEntry<F: Real> {
    pub f_name: String,
    pub mean: F,
    pub se: F,
    pub z: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport<F: Real> {
    pub n: usize,
    pub results: Vec<DiscrepancyEntry<F>>,
    pub max_abs_z: F,
}

impl<F: Real> DiscrepancyReport<F> {
    pub fn passes(&self, threshold: F) -> bool {
        self.max_abs_z <= threshold
    }
}

struct Evaluator<F: Real> {
    op: OperatorCoefficients<F>,
    alt: OperatorCoefficients<F>,
}

impl<F: Real> Evaluator<F> {
    fn apply(&self, fun: &DiscrepancyFunction<F>, x: F) -> F {
        match fun.repr {
            Representation::XSquared => {
                let (q, q1, q2) = ((fun.f)(x), (fun.f1)(x), (fun.f2)(x));
                self.alt.act(x, q, q1, q2).unwrap_or(F::nan())
            }
            Representation::Direct => {
                if x == F::zero() {
                    // continuous extension: symmetric average around the removable singularity
                    let h = F::epsilon().cbrt();
                    let at = |y: F| {
                        self.op
                            .act(y, (fun.f)(y), (fun.f1)(y), (fun.f2)(y))
                            .unwrap_or(F::nan())
                    };
                    return F::lit(0.5) * (at(h) + at(-h));
                }
                self.op
                    .act(x, (fun.f)(x), (fun.f1)(x), (fun.f2)(x))
                    .unwrap_or(F::nan())
            }
        }
    }

    fn sums<M: Fn(F) -> F + Sync>(&self, values: &[F], map: M) -> CompensatedSum<F> {
        let parts: Vec<CompensatedSum<F>> = values
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&x| map(x)).collect())
            .collect();
        let mut total = CompensatedSum::new();
        for p in &parts {
            total.merge(p);
        }
        total
    }
}

/// Per-function mean, standard error and z-score of `𝒜f` over the sample.
///
/// The sample must already be centred (`μ = 0`). Chunked parallel sums are
/// combined in a fixed order, so results do not depend on the thread count.
pub fn stein_discrepancy<F: Real>(
    sample: &SampleSet<F>,
    params: &GhParams<F>,
    family: &[DiscrepancyFunction<F>],
) -> Result<DiscrepancyReport<F>> {
    let ev = Evaluator {
        op: gh_operator(params)?,
        alt: gh_operator_alt(params)?,
    };
    let values = sample.values();
    let n = values.len();
    if n < 2 {
        return Err(Error::Data(format!(
            "discrepancy needs at least 2 observations, got {n}"
        )));
    }
    let nf = F::of_usize(n);
    let mut results = Vec::with_capacity(family.len());
    let mut max_abs_z = F::zero();
    for fun in family {
        let mean = ev.sums(values, |x| ev.apply(fun, x)).value() / nf;
        let ss = ev.sums(values, |x| {
            let d = ev.apply(fun, x) - mean;
            d * d
        });
        let var = ss.value() / F::of_usize(n - 1);
        let se = (var / nf).sqrt();
        if !mean.is_finite() || !se.is_finite() {
            return Err(Error::Data(format!(
                "operator values for {} are not finite on this sample",
                fun.name
            )));
        }
        let z = if se > F::zero() {
            mean / se
        } else if mean == F::zero() {
            F::zero()
        } else {
            F::infinity().copysign(mean)
        };
        max_abs_z = max_abs_z.max(z.abs());
        results.push(DiscrepancyEntry {
            f_name: fun.name.clone(),
            mean,
            se,
            z,
        });
    }
    Ok(DiscrepancyReport {
        n,
        results,
        max_abs_z,
    })
}
