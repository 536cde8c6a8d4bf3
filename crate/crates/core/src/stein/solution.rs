//! Solution of the GH Stein equation `A f'' + B f' + C f = h - E h` by
//! variation of parameters.
//!
//! With `r = √(δ² + x²)`, `ν = λ - 1/2` and homogeneous solutions
//! `w₁ = e^{-βx} K_ν(αr)/r^ν`, `w₂ = e^{-βx} I_ν(αr)/r^ν`, the bounded solution is
//!
//! ```text
//! f(x) = -w₁(x) ∫_0^x e^{βt} r_t^ν I_ν(αr_t) h̃(t) dt - w₂(x) ∫_x^∞ e^{βt} r_t^ν K_ν(αr_t) h̃(t) dt
//!      = -w₁(x) ∫_0^x (…) dt + w₂(x) ∫_{-∞}^x e^{βt} r_t^ν K_ν(αr_t) h̃(t) dt.
//! ```
//!
//! The first form ("upper") is used for `x >= 0`, the second ("lower") for
//! `x < 0`, so the growing factor `I_ν` always multiplies an integral over the
//! side where the kernel decays. Prefactors are folded into the integrands and
//! Bessel functions are evaluated in scaled form, so nothing overflows.

use std::fmt;
use std::sync::Arc;

use crate::bessel::{i_scaled_raw, k_scaled_raw};
use crate::distributions::GhParams;
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite, integrate_with_breaks, Estimate, QuadratureConfig};
use crate::scalar::Real;

type TestFn<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

/// A right-hand side `h` for the Stein equation.
#[derive(Clone)]
pub struct TestFunctionSpec<F> {
    name: String,
    h: TestFn<F>,
    h_bound: Option<F>,
    breaks: Vec<F>,
    centered_mean: Option<F>,
}

impl<F: Real> fmt::Debug for TestFunctionSpec<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunctionSpec")
            .field("name", &self.name)
            .field("h_bound", &self.h_bound)
            .field("breaks", &self.breaks)
            .field("centered_mean", &self.centered_mean)
            .finish()
    }
}

impl<F: Real> TestFunctionSpec<F> {
    /// `h_bound = None` marks an unbounded `h`; `breaks` lists jump points.
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(F) -> F + Send + Sync + 'static,
        h_bound: Option<F>,
        breaks: Vec<F>,
    ) -> Self {
        Self {
            name: name.into(),
            h: Arc::new(h),
            h_bound,
            breaks,
            centered_mean: None,
        }
    }

    /// Supply `E h` instead of computing it by quadrature.
    pub fn with_centered_mean(mut self, mean: F) -> Self {
        self.centered_mean = Some(mean);
        self
    }

    pub fn constant(c: F) -> Self {
        Self::new("const", move |_| c, Some(c.abs()), Vec::new()).with_centered_mean(c)
    }

    /// Indicator of `(a, b]`.
    pub fn indicator(a: F, b: F) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidParameter(format!(
                "indicator needs a < b, got ({a}, {b}]"
            )));
        }
        Ok(Self::new(
            format!("indicator:{a}:{b}"),
            move |x| if x > a && x <= b { F::one() } else { F::zero() },
            Some(F::one()),
            vec![a, b],
        ))
    }

    pub fn sin() -> Self {
        Self::new("sin", F::sin, Some(F::one()), Vec::new())
    }

    pub fn arctan() -> Self {
        Self::new("arctan", F::atan, Some(F::FRAC_PI_2()), Vec::new())
    }

    /// Built-in catalogue: `const`, `const:c`, `indicator:a:b`, `sin`, `arctan`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |s: &str| -> Result<F> {
            s.trim().parse::<f64>().map(F::lit).map_err(|_| {
                Error::InvalidParameter(format!("cannot parse {s:?} in test function {spec:?}"))
            })
        };
        match parts.as_slice() {
            ["const"] => Ok(Self::constant(F::one())),
            ["const", c] => Ok(Self::constant(num(c)?)),
            ["indicator", a, b] => Self::indicator(num(a)?, num(b)?),
            ["sin"] => Ok(Self::sin()),
            ["arctan"] => Ok(Self::arctan()),
            _ => Err(Error::InvalidParameter(format!(
                "unknown test function {spec:?}; expected one of const, const:c, indicator:a:b, sin, arctan"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h_bound(&self) -> Option<F> {
        self.h_bound
    }

    pub fn breaks(&self) -> &[F] {
        &self.breaks
    }

    pub fn centered_mean(&self) -> Option<F> {
        self.centered_mean
    }

    pub fn eval(&self, x: F) -> F {
        (self.h)(x)
    }
}

/// Which of the two equal integral forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionForm {
    /// `-w₁ ∫_0^x … - w₂ ∫_x^∞ …`
    Upper,
    /// `-w₁ ∫_0^x … + w₂ ∫_{-∞}^x …`
    Lower,
}

/// `f(x)` and `f'(x)` with a propagated quadrature error bound for `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionPoint<F> {
    pub x: F,
    pub value: F,
    pub derivative: F,
    pub error: F,
}

/// The solution `f` of the GH Stein equation for one test function.
#[derive(Clone, Debug)]
pub struct SteinSolution<F: Real> {
    params: GhParams<F>,
    test_fn: TestFunctionSpec<F>,
    nu: F,
    quadrature: QuadratureConfig,
    mean_h: F,
    mean_h_error: F,
}

/// Quadrature settings for one evaluation.
struct Quad {
    cfg: QuadratureConfig,
    /// Accept a roundoff-limited estimate together with its error instead of failing.
    lenient: bool,
    /// Replace `h̃` by 1.
    unit: bool,
}

impl Quad {
    fn accept<F: Real>(&self, r: Result<Estimate<F>>) -> Result<Estimate<F>> {
        match r {
            Err(Error::QuadratureNonConvergence {
                estimate, error, ..
            }) if self.lenient => Ok(Estimate {
                value: F::lit(estimate),
                error: F::lit(error),
            }),
            other => other,
        }
    }
}

fn sensitivity_config() -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: 1e-3,
        abs_tol: 1e-300,
        max_subdivisions: 200,
    }
}

/// Tolerances used for `E h` when it is not supplied: `1e-12`, or `100 ε`
/// when that is larger.
pub fn centered_mean_config<F: Real>() -> QuadratureConfig {
    let tol = (100.0 * F::epsilon().as_f64()).max(1e-12);
    QuadratureConfig {
        rel_tol: tol,
        abs_tol: tol,
        max_subdivisions: 4000,
    }
}

impl<F: Real> SteinSolution<F> {
    pub fn new(
        params: GhParams<F>,
        test_fn: TestFunctionSpec<F>,
        quadrature: QuadratureConfig,
    ) -> Result<Self> {
        if params.mu() != F::zero() {
            return Err(Error::InvalidParameter(format!(
                "Stein solution is defined for mu = 0 (got mu = {})",
                params.mu()
            )));
        }
        quadrature.validate()?;
        let (mean_h, mean_h_error) = match test_fn.centered_mean() {
            Some(m) => (m, F::zero()),
            None => {
                let e = params.expectation(
                    |t| test_fn.eval(t),
                    test_fn.breaks(),
                    &centered_mean_config::<F>(),
                )?;
                (e.value, e.error)
            }
        };
        Ok(Self {
            params,
            test_fn,
            nu: params.nu(),
            quadrature,
            mean_h,
            mean_h_error,
        })
    }

    pub fn params(&self) -> &GhParams<F> {
        &self.params
    }

    pub fn test_fn(&self) -> &TestFunctionSpec<F> {
        &self.test_fn
    }

    /// `ν = λ - 1/2`.
    pub fn nu(&self) -> F {
        self.nu
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quadrature
    }

    /// `E h` under the GH law.
    pub fn mean_h(&self) -> F {
        self.mean_h
    }

    /// Quadrature error of `E h`; zero when the mean was supplied.
    pub fn mean_h_error(&self) -> F {
        self.mean_h_error
    }

    /// `h̃(x) = h(x) - E h`.
    pub fn h_tilde(&self, x: F) -> F {
        self.test_fn.eval(x) - self.mean_h
    }

    fn r(&self, x: F) -> F {
        let d = self.params.delta();
        (d * d + x * x).sqrt()
    }

    /// Kernel of the `∫_0^x` integral, scaled by `e^{βx} r_x^ν e^{-α r_x}`.
    fn inner_kernel(&self, x: F, rx: F, t: F, unit: bool) -> F {
        let ht = if unit { F::one() } else { self.h_tilde(t) };
        if ht == F::zero() {
            return F::zero();
        }
        let (a, b) = (self.params.alpha(), self.params.beta());
        let rt = self.r(t);
        let i = i_scaled_raw(self.nu, a * rt).unwrap_or(F::nan());
        (b * (t - x) + a * (rt - rx) + self.nu * (rt / rx).ln()).exp() * i * ht
    }

    /// Kernel of the tail integrals, scaled by `e^{βx} r_x^ν e^{α r_x}`.
    fn outer_kernel(&self, x: F, rx: F, t: F, unit: bool) -> F {
        let ht = if unit { F::one() } else { self.h_tilde(t) };
        if ht == F::zero() {
            return F::zero();
        }
        let (a, b) = (self.params.alpha(), self.params.beta());
        let rt = self.r(t);
        let k = k_scaled_raw(self.nu, a * rt).unwrap_or(F::nan());
        (b * (t - x) - a * (rt - rx) + self.nu * (rt / rx).ln()).exp() * k * ht
    }

    fn inner_integral(&self, x: F, rx: F, q: &Quad) -> Result<Estimate<F>> {
        q.accept(integrate_with_breaks(
            |t| self.inner_kernel(x, rx, t, q.unit),
            F::zero(),
            x,
            self.test_fn.breaks(),
            &q.cfg,
        ))
    }

    /// `∫_x^∞` of the outer kernel.
    fn upper_integral(&self, x: F, rx: F, q: &Quad) -> Result<Estimate<F>> {
        let k = |t: F| self.outer_kernel(x, rx, t, q.unit);
        let last = self
            .test_fn
            .breaks()
            .iter()
            .copied()
            .filter(|&c| c > x)
            .fold(x, F::max);
        let finite = q.accept(integrate_with_breaks(
            k,
            x,
            last,
            self.test_fn.breaks(),
            &q.cfg,
        ))?;
        let decay = self.params.alpha() - self.params.beta();
        let tail = q.accept(integrate_semi_infinite(
            |s: F| k(last + s),
            F::zero(),
            decay,
            &q.cfg,
        ))?;
        Ok(finite + tail)
    }

    /// `∫_{-∞}^x` of the outer kernel.
    fn lower_integral(&self, x: F, rx: F, q: &Quad) -> Result<Estimate<F>> {
        let k = |t: F| self.outer_kernel(x, rx, t, q.unit);
        let first = self
            .test_fn
            .breaks()
            .iter()
            .copied()
            .filter(|&c| c < x)
            .fold(x, F::min);
        let finite = q.accept(integrate_with_breaks(
            k,
            first,
            x,
            self.test_fn.breaks(),
            &q.cfg,
        ))?;
        let decay = self.params.alpha() + self.params.beta();
        let tail = q.accept(integrate_semi_infinite(
            |s: F| k(first - s),
            F::zero(),
            decay,
            &q.cfg,
        ))?;
        Ok(finite + tail)
    }

    fn outer_integral(&self, x: F, rx: F, form: SolutionForm, q: &Quad) -> Result<Estimate<F>> {
        match form {
            SolutionForm::Upper => self.upper_integral(x, rx, q),
            SolutionForm::Lower => self.lower_integral(x, rx, q),
        }
    }

    /// `f(x)` and `f'(x)` from the requested form.
    ///
    /// Away from the origin the non-preferred form is a small difference of
    /// large terms. Its quadrature may stop at the roundoff floor; the estimate
    /// is then returned with that error rather than rejected. The error also
    /// includes the propagated uncertainty of `E h`.
    pub fn evaluate_form(&self, x: F, form: SolutionForm) -> Result<SolutionPoint<F>> {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "Stein solution needs finite x, got {x}"
            )));
        }
        let (a, b) = (self.params.alpha(), self.params.beta());
        let rx = self.r(x);
        let z = a * rx;
        let (k0, k1) = (
            k_scaled_raw(self.nu, z)?,
            k_scaled_raw(self.nu + F::one(), z)?,
        );
        let (i0, i1) = (
            i_scaled_raw(self.nu, z)?,
            i_scaled_raw(self.nu + F::one(), z)?,
        );
        let preferred = form == Self::preferred_form(x);
        let q = Quad {
            cfg: self.quadrature,
            lenient: !preferred,
            unit: false,
        };
        let s1 = self.inner_integral(x, rx, &q)?;
        let s2 = self.outer_integral(x, rx, form, &q)?;
        let sign = match form {
            SolutionForm::Upper => -F::one(),
            SolutionForm::Lower => F::one(),
        };
        let slope = a * x / rx;
        let value = -k0 * s1.value + sign * i0 * s2.value + F::zero();
        let derivative =
            (b * k0 + slope * k1) * s1.value - sign * (b * i0 - slope * i1) * s2.value + F::zero();
        let mut error = k0.abs() * s1.error + i0.abs() * s2.error;
        if self.mean_h_error > F::zero() {
            // both integrals are linear in E h; their sensitivities are the unit-weight integrals
            let q = Quad {
                cfg: sensitivity_config(),
                lenient: true,
                unit: true,
            };
            let g1 = self.inner_integral(x, rx, &q)?;
            let g2 = self.outer_integral(x, rx, form, &q)?;
            error = error
                + self.mean_h_error
                    * (k0.abs() * (g1.value.abs() + g1.error)
                        + i0.abs() * (g2.value.abs() + g2.error));
        }
        Ok(SolutionPoint {
            x,
            value,
            derivative,
            error,
        })
    }

    /// `Upper` for `x >= 0`, `Lower` otherwise.
    pub fn preferred_form(x: F) -> SolutionForm {
        if x >= F::zero() {
            SolutionForm::Upper
        } else {
            SolutionForm::Lower
        }
    }

    /// Evaluation with the numerically preferred form for the sign of `x`.
    pub fn evaluate(&self, x: F) -> Result<SolutionPoint<F>> {
        self.evaluate_form(x, Self::preferred_form(x))
    }

    pub fn value(&self, x: F) -> Result<F> {
        Ok(self.evaluate(x)?.value)
    }

    /// `f'(x)` from the differentiated prefactors; the boundary terms of the
    /// integrals cancel.
    pub fn derivative(&self, x: F) -> Result<F> {
        Ok(self.evaluate(x)?.derivative)
    }

    /// `(w₁(x), w₂(x))`.
    pub fn homogeneous(&self, x: F) -> Result<(F, F)> {
        let (a, b) = (self.params.alpha(), self.params.beta());
        let r = self.r(x);
        let z = a * r;
        let base = -b * x - self.nu * r.ln();
        let w1 = (base - z).exp() * k_scaled_raw(self.nu, z)?;
        let w2 = (base + z).exp() * i_scaled_raw(self.nu, z)?;
        Ok((w1, w2))
    }

    /// `(w₁'(x), w₂'(x))` from `d/dr[K_ν(αr)/r^ν] = -α K_{ν+1}(αr)/r^ν` and its `I` analogue.
    pub fn homogeneous_derivatives(&self, x: F) -> Result<(F, F)> {
        let (a, b) = (self.params.alpha(), self.params.beta());
        let r = self.r(x);
        let z = a * r;
        let base = -b * x - self.nu * r.ln();
        let slope = a * x / r;
        let (k0, k1) = (
            k_scaled_raw(self.nu, z)?,
            k_scaled_raw(self.nu + F::one(), z)?,
        );
        let (i0, i1) = (
            i_scaled_raw(self.nu, z)?,
            i_scaled_raw(self.nu + F::one(), z)?,
        );
        let d1 = (base - z).exp() * (-b * k0 - slope * k1);
        let d2 = (base + z).exp() * (-b * i0 + slope * i1);
        Ok((d1, d2))
    }

    /// `w₁ w₂' - w₂ w₁'` from the computed homogeneous solutions.
    pub fn wronskian(&self, x: F) -> Result<F> {
        let (w1, w2) = self.homogeneous(x)?;
        let (d1, d2) = self.homogeneous_derivatives(x)?;
        Ok(w1 * d2 - w2 * d1)
    }

    /// Closed form `x e^{-2βx} / (δ² + x²)^{ν+1}` of the Wronskian.
    pub fn wronskian_closed_form(&self, x: F) -> F {
        let d = self.params.delta();
        x * (F::lit(-2.0) * self.params.beta() * x).exp() / (d * d + x * x).powf(self.nu + F::one())
    }
}
