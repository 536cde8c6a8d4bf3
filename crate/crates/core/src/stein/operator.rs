//! Second- and first-order Stein operators `A f'' + B f' + C f`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::distributions::GhParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Coefficient<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorOrder {
    First,
    Second,
}

/// Coefficient functions of a Stein operator together with the points where
/// any of them is undefined.
///
/// First-order operators carry `A ≡ 0` and act as `B f' + C f`.
#[derive(Clone)]
pub struct OperatorCoefficients<F> {
    name: String,
    unknown: String,
    order: OperatorOrder,
    a: Coefficient<F>,
    b: Coefficient<F>,
    c: Coefficient<F>,
    singular_points: Vec<F>,
}

impl<F: Real> fmt::Debug for OperatorCoefficients<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorCoefficients")
            .field("name", &self.name)
            .field("unknown", &self.unknown)
            .field("order", &self.order)
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

impl<F: Real> OperatorCoefficients<F> {
    pub fn second_order(
        name: impl Into<String>,
        unknown: impl Into<String>,
        a: impl Fn(F) -> F + Send + Sync + 'static,
        b: impl Fn(F) -> F + Send + Sync + 'static,
        c: impl Fn(F) -> F + Send + Sync + 'static,
        singular_points: Vec<F>,
    ) -> Self {
        Self {
            name: name.into(),
            unknown: unknown.into(),
            order: OperatorOrder::Second,
            a: Arc::new(a),
            b: Arc::new(b),
            c: Arc::new(c),
            singular_points,
        }
    }

    pub fn first_order(
        name: impl Into<String>,
        unknown: impl Into<String>,
        b: impl Fn(F) -> F + Send + Sync + 'static,
        c: impl Fn(F) -> F + Send + Sync + 'static,
        singular_points: Vec<F>,
    ) -> Self {
        Self {
            name: name.into(),
            unknown: unknown.into(),
            order: OperatorOrder::First,
            a: Arc::new(|_| F::zero()),
            b: Arc::new(b),
            c: Arc::new(c),
            singular_points,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Description of the function the operator acts on, e.g. `f` or `g = f/x^2`.
    pub fn unknown(&self) -> &str {
        &self.unknown
    }

    pub fn order(&self) -> OperatorOrder {
        self.order
    }

    pub fn singular_points(&self) -> &[F] {
        &self.singular_points
    }

    pub fn is_singular(&self, x: F) -> bool {
        self.singular_points.contains(&x)
    }

    pub fn a(&self, x: F) -> F {
        (self.a)(x)
    }

    pub fn b(&self, x: F) -> F {
        (self.b)(x)
    }

    pub fn c(&self, x: F) -> F {
        (self.c)(x)
    }

    /// `(A(x), B(x), C(x))`, rejecting singular points.
    pub fn coefficients(&self, x: F) -> Result<(F, F, F)> {
        if self.is_singular(x) {
            return Err(Error::SingularPoint(x.as_f64()));
        }
        Ok((self.a(x), self.b(x), self.c(x)))
    }

    /// Action on a function given its value and derivatives at `x`.
    pub fn act(&self, x: F, f: F, f1: F, f2: F) -> Result<F> {
        let (a, b, c) = self.coefficients(x)?;
        Ok(match self.order {
            OperatorOrder::Second => a * f2 + b * f1 + c * f,
            OperatorOrder::First => b * f1 + c * f,
        })
    }

    /// The same operator multiplied by a constant.
    pub fn scaled(&self, s: F) -> Self {
        let (a, b, c) = (self.a.clone(), self.b.clone(), self.c.clone());
        Self {
            a: Arc::new(move |x| s * a(x)),
            b: Arc::new(move |x| s * b(x)),
            c: Arc::new(move |x| s * c(x)),
            ..self.clone()
        }
    }
}

/// `A(x) f2(x) + B(x) f1(x) + C(x) f(x)`.
pub fn apply_operator<F, G0, G1, G2>(
    op: &OperatorCoefficients<F>,
    f: G0,
    f1: G1,
    f2: G2,
    x: F,
) -> Result<F>
where
    F: Real,
    G0: Fn(F) -> F,
    G1: Fn(F) -> F,
    G2: Fn(F) -> F,
{
    let second = match op.order() {
        OperatorOrder::Second => f2(x),
        OperatorOrder::First => F::zero(),
    };
    op.act(x, f(x), f1(x), second)
}

fn require_centered<F: Real>(p: &GhParams<F>) -> Result<()> {
    if p.mu() != F::zero() {
        return Err(Error::InvalidParameter(format!(
            "operator is defined for mu = 0 (got mu = {}); shift the data by -mu",
            p.mu()
        )));
    }
    Ok(())
}

/// The GH Stein operator for `μ = 0`:
///
/// * `A(x) = (x² + δ²)/x`
/// * `B(x) = 2λ + 2βx + 2βδ²/x - δ²/x²`
/// * `C(x) = 2λβ - γ²x + β²δ²/x - βδ²/x²`
pub fn gh_operator<F: Real>(p: &GhParams<F>) -> Result<OperatorCoefficients<F>> {
    require_centered(p)?;
    let (l, b, d2, g2) = (
        p.lambda(),
        p.beta(),
        p.delta() * p.delta(),
        p.gamma() * p.gamma(),
    );
    let two = F::lit(2.0);
    Ok(OperatorCoefficients::second_order(
        "gh",
        "f",
        move |x: F| (x * x + d2) / x,
        move |x: F| two * l + two * b * x + two * b * d2 / x - d2 / (x * x),
        move |x: F| two * l * b - g2 * x + b * b * d2 / x - b * d2 / (x * x),
        vec![F::zero()],
    ))
}

/// The GH operator rewritten for `g` with `f(x) = x² g(x)`; nonsingular everywhere.
///
/// * `A(x) = x(x² + δ²)`
/// * `B(x) = 3δ² + 2βδ²x + (2λ+4)x² + 2βx³`
/// * `C(x) = 3βδ² + (4λ + β²δ² + 2)x + (2λ+4)βx² - γ²x³`
pub fn gh_operator_alt<F: Real>(p: &GhParams<F>) -> Result<OperatorCoefficients<F>> {
    require_centered(p)?;
    let (l, b, d2, g2) = (
        p.lambda(),
        p.beta(),
        p.delta() * p.delta(),
        p.gamma() * p.gamma(),
    );
    let (two, three, four) = (F::lit(2.0), F::lit(3.0), F::lit(4.0));
    Ok(OperatorCoefficients::second_order(
        "gh_alt",
        "g = f/x^2",
        move |x: F| x * (x * x + d2),
        move |x: F| three * d2 + two * b * d2 * x + (two * l + four) * x * x + two * b * x * x * x,
        move |x: F| {
            three * b * d2 + (four * l + b * b * d2 + two) * x + (two * l + four) * b * x * x
                - g2 * x * x * x
        },
        Vec::new(),
    ))
}

/// Residual of the second-order ODE satisfied by the GH density (`μ = 0`):
///
/// `(x²+δ²)/x p'' + (-2(λ-1) - 2βx - 2βδ²/x - δ²/x²) p'
///   + (2(λ-1)β - γ²x + β²δ²/x + βδ²/x²) p`,
///
/// with `p'`, `p''` from Bessel ladder identities. Returns the residual and
/// the scale `|p| + |p'| + |p''|`.
pub fn density_ode_residual<F: Real>(p: &GhParams<F>, x: F) -> Result<(F, F)> {
    require_centered(p)?;
    if x == F::zero() || !x.is_finite() {
        return Err(Error::SingularPoint(x.as_f64()));
    }
    let (l, b, d2, g2) = (
        p.lambda(),
        p.beta(),
        p.delta() * p.delta(),
        p.gamma() * p.gamma(),
    );
    let two = F::lit(2.0);
    let (p0, p1, p2) = p.pdf_derivatives(x);
    let lm1 = l - F::one();
    let c2 = (x * x + d2) / x;
    let c1 = -two * lm1 - two * b * x - two * b * d2 / x - d2 / (x * x);
    let c0 = two * lm1 * b - g2 * x + b * b * d2 / x + b * d2 / (x * x);
    Ok((c2 * p2 + c1 * p1 + c0 * p0, p0.abs() + p1.abs() + p2.abs()))
}
