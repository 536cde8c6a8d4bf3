//! Special and limiting cases of the GH law: their Stein operators, numerical
//! convergence of the GH operator coefficients along each limit path, closed
//! form densities, and the solution of the GIG Stein equation.

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_k, ln_bessel_k};
use crate::distributions::{GhParams, GigParams};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::numerics::{integrate, integrate_semi_infinite, Estimate, QuadratureConfig};
use crate::scalar::Real;
use crate::stein::{gh_operator, OperatorCoefficients, TestFunctionSpec};

/// A special or limiting case of the GH family with its own parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", bound = "")]
pub enum LimitCase<F: Real> {
    /// `VG₂(ν, α, β, 0)`: `δ → 0` with `ν = λ - 1/2`.
    Vg2 {
        nu: F,
        alpha: F,
        beta: F,
    },
    /// `VG₁(r, θ, σ, 0)`.
    Vg1 {
        r: F,
        theta: F,
        sigma: F,
    },
    /// `Γ(s, λ)` with shape `s` and rate `λ`.
    Gamma {
        shape: F,
        rate: F,
    },
    Normal {
        sigma: F,
    },
    /// `Laplace(0, σ) = VG₁(2, 0, σ, 0)`.
    Laplace {
        sigma: F,
    },
    /// Product of independent `N(0, σ_X²)` and `N(0, σ_Y²)`.
    ProductNormal {
        sigma_x: F,
        sigma_y: F,
    },
    /// Scaled and shifted Student's t: `λ = -ν/2`, `α, β → 0`.
    StudentT {
        nu: F,
        delta: F,
        mu: F,
    },
    /// `GIG(λ, a, b)`: `β = α - a/2`, `α → ∞`, `αδ² → b`.
    Gig {
        lambda: F,
        a: F,
        b: F,
    },
}

fn positive<F: Real>(name: &str, v: F) -> Result<()> {
    if v > F::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn finite<F: Real>(name: &str, v: F) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl<F: Real> LimitCase<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Vg2 { .. } => "vg2",
            Self::Vg1 { .. } => "vg1",
            Self::Gamma { .. } => "gamma",
            Self::Normal { .. } => "normal",
            Self::Laplace { .. } => "laplace",
            Self::ProductNormal { .. } => "product_normal",
            Self::StudentT { .. } => "student_t",
            Self::Gig { .. } => "gig",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Vg2 { nu, alpha, beta } => {
                if !(nu > F::lit(-0.5)) {
                    return Err(Error::InvalidParameter(format!(
                        "VG2 needs nu > -1/2, got nu = {nu}"
                    )));
                }
                finite("beta", beta)?;
                if !(alpha > beta.abs()) || !alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must exceed |beta| (alpha = {alpha}, beta = {beta})"
                    )));
                }
                Ok(())
            }
            Self::Vg1 { r, theta, sigma } => {
                positive("r", r)?;
                finite("theta", theta)?;
                if !(sigma >= F::zero()) || !sigma.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma must be non-negative, got {sigma}"
                    )));
                }
                Ok(())
            }
            Self::Gamma { shape, rate } => positive("shape", shape).and(positive("rate", rate)),
            Self::Normal { sigma } | Self::Laplace { sigma } => positive("sigma", sigma),
            Self::ProductNormal { sigma_x, sigma_y } => {
                positive("sigma_x", sigma_x).and(positive("sigma_y", sigma_y))
            }
            Self::StudentT { nu, delta, mu } => {
                positive("nu", nu)?;
                positive("delta", delta)?;
                finite("mu", mu)
            }
            Self::Gig { lambda, a, b } => {
                finite("lambda", lambda)?;
                positive("a", a)?;
                positive("b", b)
            }
        }
    }

    /// Case with the default parameters used by the convergence runs.
    pub fn default_for(name: &str) -> Result<Self> {
        let l = F::lit;
        let case = match name {
            "vg2" => Self::Vg2 { nu: l(0.5), alpha: l(2.0), beta: l(0.5) },
            "vg1" => Self::Vg1 { r: l(2.0), theta: l(0.5), sigma: l(1.0) },
            "gamma" => Self::Gamma { shape: l(2.0), rate: l(1.5) },
            "normal" => Self::Normal { sigma: l(1.0) },
            "laplace" => Self::Laplace { sigma: l(1.0) },
            "product_normal" => Self::ProductNormal { sigma_x: l(1.0), sigma_y: l(2.0) },
            "student_t" => Self::StudentT { nu: l(3.0), delta: l(1.0), mu: l(0.0) },
            "gig" => Self::Gig { lambda: l(1.0), a: l(2.0), b: l(1.0) },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown case {other:?}; expected one of vg2, vg1, gamma, normal, laplace, product_normal, student_t, gig"
                )))
            }
        };
        Ok(case)
    }
}

/// `(ν, α, β)` of `VG₂` from the `VG₁(r, θ, σ)` parametrisation.
pub fn vg_reparameterize<F: Real>(r: F, theta: F, sigma: F) -> Result<(F, F, F)> {
    positive("r", r)?;
    finite("theta", theta)?;
    if !(sigma > F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive for the VG2 form, got {sigma}; sigma = 0 is the gamma limit"
        )));
    }
    let s2 = sigma * sigma;
    Ok((
        (r - F::one()) / F::lit(2.0),
        (theta * theta + s2).sqrt() / s2,
        theta / s2,
    ))
}

fn vg1_operator<F: Real>(name: &str, r: F, theta: F, sigma: F) -> OperatorCoefficients<F> {
    let s2 = sigma * sigma;
    let two = F::lit(2.0);
    OperatorCoefficients::second_order(
        name,
        "f",
        move |x: F| s2 * x,
        move |x: F| s2 * r + two * theta * x,
        move |x: F| r * theta - x,
        Vec::new(),
    )
}

/// Stein operator of a limiting case.
///
/// Student's t and GIG operators are first order in their unknown `g`
/// (`f' = x g` for t, `f = x g` before the limit for GIG).
pub fn limit_operator<F: Real>(case: &LimitCase<F>) -> Result<OperatorCoefficients<F>> {
    case.validate()?;
    let two = F::lit(2.0);
    Ok(match *case {
        LimitCase::Vg2 { nu, alpha, beta } => {
            let k = two * nu + F::one();
            let g2 = alpha * alpha - beta * beta;
            OperatorCoefficients::second_order(
                "vg2",
                "f",
                |x: F| x,
                move |x: F| k + two * beta * x,
                move |x: F| k * beta - g2 * x,
                Vec::new(),
            )
        }
        LimitCase::Vg1 { r, theta, sigma } => vg1_operator("vg1", r, theta, sigma),
        LimitCase::Gamma { shape, rate } => OperatorCoefficients::first_order(
            "gamma",
            "f",
            |x: F| x,
            move |x: F| shape - rate * x,
            Vec::new(),
        ),
        LimitCase::Normal { sigma } => {
            let s2 = sigma * sigma;
            OperatorCoefficients::first_order("normal", "f", move |_: F| s2, |x: F| -x, Vec::new())
        }
        LimitCase::Laplace { sigma } => vg1_operator("laplace", two, F::zero(), sigma),
        LimitCase::ProductNormal { sigma_x, sigma_y } => {
            vg1_operator("product_normal", F::one(), F::zero(), sigma_x * sigma_y)
        }
        LimitCase::StudentT { nu, delta, mu } => {
            let d2 = delta * delta;
            OperatorCoefficients::first_order(
                "student_t",
                "g with f' = x g",
                move |x: F| (x - mu) * (x - mu) + d2,
                move |x: F| -(nu - F::one()) * (x - mu),
                Vec::new(),
            )
        }
        LimitCase::Gig { lambda, a, b } => OperatorCoefficients::first_order(
            "gig",
            "g",
            move |x: F| two * x * x,
            move |x: F| -a * x * x + two * (lambda + F::one()) * x + b,
            Vec::new(),
        ),
    })
}

/// The GH operator applied to `f = x g` and divided by `β`:
///
/// * `A(x) = (x² + δ²)/β`
/// * `B(x) = (2βx² + 2(λ+1)x + 2βδ² + δ²/x)/β`
/// * `C(x) = (-γ²x² + 2(λ+1)βx + 2λ + β²δ² + βδ²/x - δ²/x²)/β`
pub fn gh_operator_gig_form<F: Real>(p: &GhParams<F>) -> Result<OperatorCoefficients<F>> {
    if p.mu() != F::zero() {
        return Err(Error::InvalidParameter(format!(
            "operator is defined for mu = 0 (got mu = {})",
            p.mu()
        )));
    }
    if !(p.beta() > F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "dividing by beta needs beta > 0, got {}",
            p.beta()
        )));
    }
    let (l, b, d2, g2) = (
        p.lambda(),
        p.beta(),
        p.delta() * p.delta(),
        p.gamma() * p.gamma(),
    );
    let two = F::lit(2.0);
    let l1 = l + F::one();
    Ok(OperatorCoefficients::second_order(
        "gh_gig_form",
        "g = f/x",
        move |x: F| (x * x + d2) / b,
        move |x: F| (two * b * x * x + two * l1 * x + two * b * d2 + d2 / x) / b,
        move |x: F| {
            (-g2 * x * x + two * l1 * b * x + two * l + b * b * d2 + b * d2 / x - d2 / (x * x)) / b
        },
        vec![F::zero()],
    ))
}

/// One coefficient compared along a limit path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientDeviation<F: Real> {
    pub name: String,
    pub path_value: F,
    pub limit_value: F,
    /// `|path - limit| / (1 + |limit|)`.
    pub deviation: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproachEntry<F: Real> {
    pub params: GhParams<F>,
    pub coefficients: Vec<CoefficientDeviation<F>>,
    pub max_deviation: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable<F: Real> {
    pub x: F,
    pub entries: Vec<ApproachEntry<F>>,
    /// Deviations are non-increasing over the last three entries.
    pub monotone_tail: bool,
    pub final_deviation: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport<F: Real> {
    pub case: LimitCase<F>,
    pub probes: Vec<ProbeTable<F>>,
    pub monotone: bool,
    pub final_max_deviation: F,
}

impl<F: Real> ConvergenceReport<F> {
    pub fn passes(&self, tolerance: F) -> bool {
        self.monotone && self.final_max_deviation <= tolerance
    }
}

fn deviation<F: Real>(name: &str, path: F, limit: F) -> CoefficientDeviation<F> {
    CoefficientDeviation {
        name: name.into(),
        path_value: path,
        limit_value: limit,
        deviation: (path - limit).abs() / (F::one() + limit.abs()),
    }
}

fn close<F: Real>(a: F, b: F) -> bool {
    (a - b).abs() <= F::lit(1e-9) * (F::one() + a.abs().max(b.abs()))
}

fn off_path(case: &str, what: String) -> Error {
    Error::InvalidParameter(format!(
        "approach sequence is not on the {case} limit path: {what}"
    ))
}

fn path_coefficients<F: Real>(
    case: &LimitCase<F>,
    p: &GhParams<F>,
    x: F,
) -> Result<Vec<CoefficientDeviation<F>>> {
    if p.mu() != F::zero() {
        return Err(off_path(
            case.name(),
            format!("mu = {} (must be 0)", p.mu()),
        ));
    }
    let limit = limit_operator(case)?;
    match *case {
        LimitCase::Vg2 { nu, alpha, beta } => {
            if !close(p.lambda(), nu + F::lit(0.5))
                || !close(p.alpha(), alpha)
                || !close(p.beta(), beta)
            {
                return Err(off_path(
                    "vg2",
                    format!("need lambda = nu + 1/2, alpha = {alpha}, beta = {beta}; got {p:?}"),
                ));
            }
            let (a, b, c) = gh_operator(p)?.coefficients(x)?;
            let (la, lb, lc) = limit.coefficients(x)?;
            Ok(vec![
                deviation("A", a, la),
                deviation("B", b, lb),
                deviation("C", c, lc),
            ])
        }
        LimitCase::StudentT { nu, delta, mu } => {
            if !close(p.lambda(), -nu / F::lit(2.0)) || !close(p.delta(), delta) {
                return Err(off_path(
                    "student_t",
                    format!("need lambda = -nu/2 and delta = {delta}; got {p:?}"),
                ));
            }
            // f' = y g with y = x - mu turns A f'' + B f' + C f into
            // y A g' + (A + y B) g + C f
            let y = x - mu;
            let (a, b, c) = gh_operator(p)?.coefficients(y)?;
            let (_, lb, lc) = limit.coefficients(x)?;
            Ok(vec![
                deviation("g'", y * a, lb),
                deviation("g", a + y * b, lc),
                deviation("f", c, F::zero()),
            ])
        }
        LimitCase::Gig { lambda, a, .. } => {
            if !close(p.lambda(), lambda) || !close(p.beta(), p.alpha() - a / F::lit(2.0)) {
                return Err(off_path(
                    "gig",
                    format!("need lambda = {lambda} and beta = alpha - a/2; got {p:?}"),
                ));
            }
            if !(x > F::zero()) {
                return Err(Error::SingularPoint(x.as_f64()));
            }
            let (ga, gb, gc) = gh_operator_gig_form(p)?.coefficients(x)?;
            let (_, lb, lc) = limit.coefficients(x)?;
            Ok(vec![
                deviation("g''", ga, F::zero()),
                deviation("g'", gb, lb),
                deviation("g", gc, lc),
            ])
        }
        _ => Err(Error::InvalidParameter(format!(
            "case {} has no GH approach path here; its operator is an exact reduction of VG1",
            case.name()
        ))),
    }
}

/// Deviation of the GH-path coefficients from the limiting operator, per probe
/// point and sequence entry.
pub fn gh_to_limit_convergence<F: Real>(
    case: &LimitCase<F>,
    approach: &[GhParams<F>],
    probes: &[F],
) -> Result<ConvergenceReport<F>> {
    case.validate()?;
    let mut tables = Vec::with_capacity(probes.len());
    for &x in probes {
        if x == F::zero() || !x.is_finite() {
            return Err(Error::SingularPoint(x.as_f64()));
        }
        let mut entries = Vec::with_capacity(approach.len());
        for p in approach {
            let coefficients = path_coefficients(case, p, x)?;
            let max_deviation = coefficients
                .iter()
                .fold(F::zero(), |m, c| m.max(c.deviation));
            entries.push(ApproachEntry {
                params: *p,
                coefficients,
                max_deviation,
            });
        }
        let devs: Vec<F> = entries.iter().map(|e| e.max_deviation).collect();
        let tail = &devs[devs.len().saturating_sub(3)..];
        let monotone_tail = tail.windows(2).all(|w| w[1] <= w[0]);
        let final_deviation = devs.last().copied().unwrap_or(F::zero());
        tables.push(ProbeTable {
            x,
            entries,
            monotone_tail,
            final_deviation,
        });
    }
    let monotone = tables.iter().all(|t| t.monotone_tail);
    let final_max_deviation = tables
        .iter()
        .fold(F::zero(), |m, t| m.max(t.final_deviation));
    Ok(ConvergenceReport {
        case: *case,
        probes: tables,
        monotone,
        final_max_deviation,
    })
}

/// Default approach sequence for a case with a GH limit path.
///
/// * VG2: `δ ∈ {10⁻¹, 10⁻², 10⁻³}`
/// * Student's t: `α = ε`, `β = ε/2`, `ε ∈ {10⁻¹, …, 10⁻⁴}`
/// * GIG: `α ∈ {10³, 10⁴, 10⁵}`, `β = α - a/2`, `δ² = b/α`
pub fn default_approach<F: Real>(case: &LimitCase<F>) -> Result<Vec<GhParams<F>>> {
    case.validate()?;
    let l = F::lit;
    match *case {
        LimitCase::Vg2 { nu, alpha, beta } => [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&d| GhParams::new(nu + l(0.5), alpha, beta, l(d), F::zero()))
            .collect(),
        LimitCase::StudentT { nu, delta, .. } => [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| GhParams::new(-nu / l(2.0), l(e), l(e / 2.0), delta, F::zero()))
            .collect(),
        LimitCase::Gig { lambda, a, b } => [1e3, 1e4, 1e5]
            .iter()
            .map(|&al| {
                let al = l(al);
                GhParams::new(lambda, al, al - a / l(2.0), (b / al).sqrt(), F::zero())
            })
            .collect(),
        _ => Err(Error::InvalidParameter(format!(
            "case {} has no GH approach path",
            case.name()
        ))),
    }
}

/// Default probe points (nonzero, inside the support).
pub fn default_probes<F: Real>(case: &LimitCase<F>) -> Vec<F> {
    let v: &[f64] = match case {
        LimitCase::Gig { .. } => &[0.25, 0.5, 1.0, 2.0, 4.0],
        _ => &[-2.0, -0.5, 0.5, 1.0, 2.0],
    };
    v.iter().map(|&x| F::lit(x)).collect()
}

/// Hyperbolic density (`λ = 1`).
pub fn hyperbolic_pdf<F: Real>(alpha: F, beta: F, delta: F, mu: F, x: F) -> Result<F> {
    let p = GhParams::new(F::one(), alpha, beta, delta, mu)?;
    let g = p.gamma();
    let y = x - mu;
    Ok(
        g / (F::lit(2.0) * alpha * delta * bessel_k(F::one(), delta * g)?)
            * (-alpha * (delta * delta + y * y).sqrt() + beta * y).exp(),
    )
}

/// Normal-inverse Gaussian density (`λ = -1/2`).
pub fn nig_pdf<F: Real>(alpha: F, beta: F, delta: F, mu: F, x: F) -> Result<F> {
    let p = GhParams::new(F::lit(-0.5), alpha, beta, delta, mu)?;
    let y = x - mu;
    let r = (delta * delta + y * y).sqrt();
    let ln = (alpha * delta / (F::PI() * r)).ln()
        + delta * p.gamma()
        + beta * y
        + ln_bessel_k(F::one(), alpha * r)?;
    Ok(ln.exp())
}

fn vg2_ln_pdf<F: Real>(nu: F, alpha: F, beta: F, x: F) -> Result<F> {
    let two = F::lit(2.0);
    let g2 = alpha * alpha - beta * beta;
    let ln_c =
        (nu + F::lit(0.5)) * g2.ln() - F::lit(0.5) * F::PI().ln() - ln_gamma(nu + F::lit(0.5));
    let ax = x.abs();
    if ax == F::zero() {
        if !(nu > F::zero()) {
            return Err(Error::Domain(format!(
                "VG density is unbounded at its centre for nu = {nu} <= 0"
            )));
        }
        // |x|^ν K_ν(α|x|) → Γ(ν) 2^{ν-1} α^{-ν}
        return Ok(
            ln_c - nu * (two * alpha).ln() + ln_gamma(nu) + (nu - F::one()) * two.ln()
                - nu * alpha.ln(),
        );
    }
    Ok(ln_c + nu * (ax / (two * alpha)).ln() + beta * x + ln_bessel_k(nu, alpha * ax)?)
}

/// Closed-form density of a limiting case.
pub fn limit_pdf<F: Real>(case: &LimitCase<F>, x: F) -> Result<F> {
    case.validate()?;
    if !x.is_finite() {
        return Err(Error::Domain(format!("density needs finite x, got {x}")));
    }
    let two = F::lit(2.0);
    let half = F::lit(0.5);
    match *case {
        LimitCase::Vg2 { nu, alpha, beta } => Ok(vg2_ln_pdf(nu, alpha, beta, x)?.exp()),
        LimitCase::Vg1 { r, theta, sigma } => {
            let (nu, alpha, beta) = vg_reparameterize(r, theta, sigma)?;
            Ok(vg2_ln_pdf(nu, alpha, beta, x)?.exp())
        }
        LimitCase::Laplace { sigma } => Ok((-x.abs() / sigma).exp() / (two * sigma)),
        LimitCase::ProductNormal { sigma_x, sigma_y } => {
            let s = sigma_x * sigma_y;
            if x == F::zero() {
                return Err(Error::Domain(
                    "product-normal density is unbounded at 0".into(),
                ));
            }
            Ok(bessel_k(F::zero(), x.abs() / s)? / (F::PI() * s))
        }
        LimitCase::Normal { sigma } => {
            Ok((-half * (x / sigma).powi(2)).exp() / (sigma * (two * F::PI()).sqrt()))
        }
        LimitCase::Gamma { shape, rate } => {
            if !(x > F::zero()) {
                return Err(Error::Domain(format!(
                    "gamma density requires x > 0, got {x}"
                )));
            }
            Ok(
                (shape * rate.ln() + (shape - F::one()) * x.ln() - rate * x - ln_gamma(shape))
                    .exp(),
            )
        }
        LimitCase::StudentT { nu, delta, mu } => {
            let z = (x - mu) / delta;
            let ln = ln_gamma(half * (nu + F::one()))
                - ln_gamma(half * nu)
                - half * (F::PI() * delta * delta).ln()
                - half * (nu + F::one()) * (z * z).ln_1p();
            Ok(ln.exp())
        }
        LimitCase::Gig { lambda, a, b } => GigParams::new(lambda, a, b)?.pdf(x),
    }
}

/// Which integral form of the GIG Stein solution to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GigForm {
    /// `g(x) = (2x²p(x))⁻¹ ∫_0^x h̃ p`
    FromZero,
    /// `g(x) = -(2x²p(x))⁻¹ ∫_x^∞ h̃ p`
    FromInfinity,
}

/// Solution of `2x² g' + (-ax² + 2(λ+1)x + b) g = h - E h` for `X ~ GIG(λ, a, b)`.
#[derive(Debug, Clone)]
pub struct GigSteinSolution<F: Real> {
    params: GigParams<F>,
    test_fn: TestFunctionSpec<F>,
    quadrature: QuadratureConfig,
    mean_h: Estimate<F>,
}

impl<F: Real> GigSteinSolution<F> {
    pub fn new(
        params: GigParams<F>,
        test_fn: TestFunctionSpec<F>,
        quadrature: QuadratureConfig,
    ) -> Result<Self> {
        quadrature.validate()?;
        let mut s = Self {
            params,
            test_fn,
            quadrature,
            mean_h: Estimate::zero(),
        };
        s.mean_h = match s.test_fn.centered_mean() {
            Some(m) => Estimate {
                value: m,
                error: F::zero(),
            },
            None => {
                let m = s.params.mode();
                let zero = |x: F| s.weighted(x, m, false);
                let left = s.piecewise(zero, F::zero(), m)?;
                let right = s.tail(zero, m)?;
                let total = left + right;
                Estimate {
                    value: total.value * s.params.pdf(m)?,
                    error: total.error * s.params.pdf(m)?,
                }
            }
        };
        Ok(s)
    }

    pub fn params(&self) -> &GigParams<F> {
        &self.params
    }

    pub fn test_fn(&self) -> &TestFunctionSpec<F> {
        &self.test_fn
    }

    pub fn mean_h(&self) -> F {
        self.mean_h.value
    }

    fn h_tilde(&self, t: F) -> F {
        self.test_fn.eval(t) - self.mean_h.value
    }

    /// `p(t)/p(x)` times `h(t)` or `h̃(t)`.
    fn weighted(&self, t: F, x: F, centered: bool) -> F {
        if !(t > F::zero()) {
            return F::zero();
        }
        let ratio = (self.params.log_pdf_unchecked(t) - self.params.log_pdf_unchecked(x)).exp();
        if ratio == F::zero() {
            return F::zero();
        }
        ratio
            * if centered {
                self.h_tilde(t)
            } else {
                self.test_fn.eval(t)
            }
    }

    fn piecewise<G: Fn(F) -> F>(&self, f: G, lo: F, hi: F) -> Result<Estimate<F>> {
        let (a, b, sign) = if lo <= hi {
            (lo, hi, F::one())
        } else {
            (hi, lo, -F::one())
        };
        let mut cuts: Vec<F> = self
            .test_fn
            .breaks()
            .iter()
            .copied()
            .filter(|&c| c > a && c < b)
            .collect();
        cuts.sort_by(|u, v| u.partial_cmp(v).unwrap_or(std::cmp::Ordering::Equal));
        let mut total = Estimate::zero();
        let mut left = a;
        for c in cuts.into_iter().chain(std::iter::once(b)) {
            total = total + integrate(&f, left, c, &self.quadrature)?;
            left = c;
        }
        Ok(total.scale(sign))
    }

    fn tail<G: Fn(F) -> F>(&self, f: G, from: F) -> Result<Estimate<F>> {
        let last = self
            .test_fn
            .breaks()
            .iter()
            .copied()
            .filter(|&c| c > from)
            .fold(from, F::max);
        let finite = self.piecewise(&f, from, last)?;
        let rest = integrate_semi_infinite(
            |s: F| f(last + s),
            F::zero(),
            F::lit(0.5) * self.params.a(),
            &self.quadrature,
        )?;
        Ok(finite + rest)
    }

    /// `g(x)` from the requested form, with its quadrature error.
    ///
    /// The non-preferred form cancels heavily; when its quadrature stops at
    /// the roundoff floor the estimate is returned with that error.
    pub fn value_form(&self, x: F, form: GigForm) -> Result<Estimate<F>> {
        if !(x > F::zero()) || !x.is_finite() {
            return Err(Error::Domain(format!(
                "GIG Stein solution requires x > 0, got {x}"
            )));
        }
        let f = |t: F| self.weighted(t, x, true);
        let lenient = form != self.preferred_form(x);
        let integral = match form {
            GigForm::FromZero => accept(self.piecewise(f, F::zero(), x), lenient)?,
            GigForm::FromInfinity => accept(self.tail(f, x), lenient)?.scale(-F::one()),
        };
        let s = F::lit(2.0) * x * x;
        // the integrals are linear in E h; propagate its error through ∫ p(t)/p(x)
        let mass = match form {
            GigForm::FromZero => self.piecewise(|t: F| self.ratio(t, x), F::zero(), x)?,
            GigForm::FromInfinity => self.tail(|t: F| self.ratio(t, x), x)?,
        };
        let error = integral.error + self.mean_h.error * mass.value.abs();
        Ok(Estimate {
            value: integral.value / s + F::zero(),
            error: error / s,
        })
    }

    fn ratio(&self, t: F, x: F) -> F {
        if !(t > F::zero()) {
            return F::zero();
        }
        (self.params.log_pdf_unchecked(t) - self.params.log_pdf_unchecked(x)).exp()
    }

    /// `FromZero` below the mean, `FromInfinity` above it.
    pub fn preferred_form(&self, x: F) -> GigForm {
        if x <= self.params.mean() {
            GigForm::FromZero
        } else {
            GigForm::FromInfinity
        }
    }

    pub fn value(&self, x: F) -> Result<F> {
        Ok(self.value_form(x, self.preferred_form(x))?.value)
    }

    /// `g'(x)` by the quotient rule on `N(x)/(2x² p(x))` with `N' = h̃ p`:
    /// `g' = h̃/(2x²) - g (2/x + p'/p)`.
    pub fn derivative(&self, x: F) -> Result<F> {
        let g = self.value(x)?;
        let (l, a, b) = (self.params.lambda(), self.params.a(), self.params.b());
        let two = F::lit(2.0);
        let dlogp = (l - F::one()) / x - a / two + b / (two * x * x);
        Ok(self.h_tilde(x) / (two * x * x) - g * (two / x + dlogp))
    }

    /// `‖h - E h‖ / (2 l² p(l))` with `l = E X`, given the range `[h_inf, h_sup]`
    /// of `h` on the positive half line.
    pub fn bound(&self, h_inf: F, h_sup: F) -> Result<F> {
        let m = self.mean_h.value;
        let norm = (h_sup - m).max(m - h_inf);
        gig_solution_bound(&self.params, norm)
    }
}

fn accept<F: Real>(r: Result<Estimate<F>>, lenient: bool) -> Result<Estimate<F>> {
    match r {
        Err(Error::QuadratureNonConvergence {
            estimate, error, ..
        }) if lenient => Ok(Estimate {
            value: F::lit(estimate),
            error: F::lit(error),
        }),
        other => other,
    }
}

/// `norm / (2 l² p(l))` with `l = E X`.
pub fn gig_solution_bound<F: Real>(params: &GigParams<F>, norm: F) -> Result<F> {
    let l = params.mean();
    Ok(norm / (F::lit(2.0) * l * l * params.pdf(l)?))
}
