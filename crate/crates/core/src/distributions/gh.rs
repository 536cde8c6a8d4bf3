//! Generalized hyperbolic law `GH(λ, α, β, δ, μ)`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bessel::{k_scaled_raw, pair_scaled_raw};
use crate::distributions::gig::{check_sorted, parallel_draws, GigSampler};
use crate::distributions::sample::{SampleSet, SampleSource};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate, integrate_semi_infinite, integrate_with_breaks, Estimate, QuadratureConfig,
    RandomStream,
};
use crate::scalar::Real;

/// The five GH parameters with `α > |β|`, `δ > 0`.
///
/// `γ = √(α² - β²)` and the log normalizing constant are cached at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GhRepr<F>", into = "GhRepr<F>")]
#[serde(bound = "")]
pub struct GhParams<F: Real> {
    lambda: F,
    alpha: F,
    beta: F,
    delta: F,
    mu: F,
    gamma: F,
    log_norm: F,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GhRepr<F> {
    lambda: F,
    alpha: F,
    beta: F,
    delta: F,
    mu: F,
}

impl<F: Real> TryFrom<GhRepr<F>> for GhParams<F> {
    type Error = Error;
    fn try_from(r: GhRepr<F>) -> Result<Self> {
        Self::new(r.lambda, r.alpha, r.beta, r.delta, r.mu)
    }
}

impl<F: Real> From<GhParams<F>> for GhRepr<F> {
    fn from(p: GhParams<F>) -> Self {
        Self {
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
            delta: p.delta,
            mu: p.mu,
        }
    }
}

impl<F: Real> GhParams<F> {
    pub fn new(lambda: F, alpha: F, beta: F, delta: F, mu: F) -> Result<Self> {
        for (name, v) in [
            ("lambda", lambda),
            ("alpha", alpha),
            ("beta", beta),
            ("delta", delta),
            ("mu", mu),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if !(alpha > beta.abs()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must exceed |beta| (alpha = {alpha}, beta = {beta})"
            )));
        }
        if !(delta > F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive (delta = {delta})"
            )));
        }
        let gamma = ((alpha - beta) * (alpha + beta)).sqrt();
        let z = delta * gamma;
        let k = k_scaled_raw(lambda, z)?;
        let half = F::lit(0.5);
        let log_norm = lambda * gamma.ln()
            - half * F::TAU().ln()
            - (lambda - half) * alpha.ln()
            - lambda * delta.ln()
            - (k.ln() - z);
        if !log_norm.is_finite() {
            return Err(Error::Overflow(format!("GH normalizing constant not representable for lambda = {lambda}, delta*gamma = {z}")));
        }
        Ok(Self {
            lambda,
            alpha,
            beta,
            delta,
            mu,
            gamma,
            log_norm,
        })
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn mu(&self) -> F {
        self.mu
    }

    /// `γ = √(α² - β²)`.
    pub fn gamma(&self) -> F {
        self.gamma
    }

    /// `ν = λ - 1/2`, the Bessel order of the density kernel.
    pub fn nu(&self) -> F {
        self.lambda - F::lit(0.5)
    }

    /// `α - |β|`, the slowest exponential tail decay.
    pub fn decay_rate(&self) -> F {
        self.alpha - self.beta.abs()
    }

    pub fn with_mu(&self, mu: F) -> Result<Self> {
        Self::new(self.lambda, self.alpha, self.beta, self.delta, mu)
    }

    pub fn centered(&self) -> Self {
        Self {
            mu: F::zero(),
            ..*self
        }
    }

    pub fn log_pdf(&self, x: F) -> F {
        let y = x - self.mu;
        let r = (self.delta * self.delta + y * y).sqrt();
        let z = self.alpha * r;
        let nu = self.nu();
        let k = k_scaled_raw(nu, z).unwrap_or(F::nan());
        self.log_norm + self.beta * y + nu * r.ln() + k.ln() - z
    }

    pub fn pdf(&self, x: F) -> F {
        self.log_pdf(x).exp()
    }

    /// `(p(x), p'(x), p''(x))` from the ladder `d/dr[r^m K_m(αr)] = -α r^m K_{m-1}(αr)`.
    pub fn pdf_derivatives(&self, x: F) -> (F, F, F) {
        let y = x - self.mu;
        let r2 = self.delta * self.delta + y * y;
        let r = r2.sqrt();
        let z = self.alpha * r;
        let nu = self.nu();
        let (k2, k1) = pair_scaled_raw(nu - F::lit(2.0), z).unwrap_or((F::nan(), F::nan()));
        let k0 = k2 + F::lit(2.0) * (nu - F::one()) / z * k1;
        let e = (self.log_norm + self.beta * y + nu * r.ln() - z).exp();
        let (a, b) = (self.alpha, self.beta);
        let p = e * k0;
        let p1 = e * (b * k0 - a * y / r * k1);
        let p2 =
            e * (b * b * k0 - (F::lit(2.0) * a * b * y + a) / r * k1 + a * a * y * y / r2 * k2);
        (p, p1, p2)
    }

    /// `∫ h(x) p(x) dx` over the real line, split at `μ` and at `breaks`.
    pub fn expectation<G: Fn(F) -> F>(
        &self,
        h: G,
        breaks: &[F],
        cfg: &QuadratureConfig,
    ) -> Result<Estimate<F>> {
        let g = |x: F| {
            let p = self.pdf(x);
            if p == F::zero() {
                F::zero()
            } else {
                h(x) * p
            }
        };
        let mut cuts: Vec<F> = breaks.iter().copied().filter(|c| c.is_finite()).collect();
        cuts.push(self.mu);
        let lo = cuts.iter().copied().fold(F::infinity(), F::min);
        let hi = cuts.iter().copied().fold(F::neg_infinity(), F::max);
        let middle = integrate_with_breaks(g, lo, hi, &cuts, cfg)?;
        let left =
            integrate_semi_infinite(|t: F| g(lo - t), F::zero(), self.alpha + self.beta, cfg)?;
        let right =
            integrate_semi_infinite(|t: F| g(hi + t), F::zero(), self.alpha - self.beta, cfg)?;
        Ok(left + middle + right)
    }

    fn lower_tail(&self, x: F, cfg: &QuadratureConfig) -> Result<F> {
        Ok(integrate_semi_infinite(
            |t: F| self.pdf(x - t),
            F::zero(),
            self.alpha + self.beta,
            cfg,
        )?
        .value)
    }

    fn upper_tail(&self, x: F, cfg: &QuadratureConfig) -> Result<F> {
        Ok(integrate_semi_infinite(
            |t: F| self.pdf(x + t),
            F::zero(),
            self.alpha - self.beta,
            cfg,
        )?
        .value)
    }

    /// `P(X <= x)`, absolute accuracy about `cfg.abs_tol`.
    pub fn cdf_with(&self, x: F, cfg: &QuadratureConfig) -> Result<F> {
        if x == F::neg_infinity() {
            return Ok(F::zero());
        }
        if x == F::infinity() {
            return Ok(F::one());
        }
        let v = if x <= self.mean() {
            self.lower_tail(x, cfg)?
        } else {
            F::one() - self.upper_tail(x, cfg)?
        };
        Ok(v.max(F::zero()).min(F::one()))
    }

    pub fn cdf(&self, x: F) -> Result<F> {
        self.cdf_with(x, &cdf_config())
    }

    /// CDF on ascending points, accumulated from non-negative increments so the
    /// result is nondecreasing.
    pub fn cdf_grid(&self, points: &[F], cfg: &QuadratureConfig) -> Result<Vec<F>> {
        check_sorted(points)?;
        let mut out = Vec::with_capacity(points.len());
        let mut acc = F::zero();
        for (i, &x) in points.iter().enumerate() {
            acc = if i == 0 || x.is_infinite() {
                self.cdf_with(x, cfg)?
            } else {
                let prev = points[i - 1];
                if prev.is_infinite() {
                    self.cdf_with(x, cfg)?
                } else {
                    acc + integrate(|t| self.pdf(t), prev, x, cfg)?
                        .value
                        .max(F::zero())
                }
            };
            out.push(acc.min(F::one()));
        }
        Ok(out)
    }

    /// Moment generating function; requires `|β + t| < α`.
    pub fn mgf(&self, t: F) -> Result<F> {
        let bt = self.beta + t;
        if !(bt.abs() < self.alpha) {
            return Err(Error::Domain(format!(
                "mgf requires |beta + t| < alpha (beta + t = {bt}, alpha = {})",
                self.alpha
            )));
        }
        let g = ((self.alpha - bt) * (self.alpha + bt)).sqrt();
        let (dg, dgam) = (self.delta * g, self.delta * self.gamma);
        let kg = k_scaled_raw(self.lambda, dg)?;
        let kgam = k_scaled_raw(self.lambda, dgam)?;
        let ln = self.mu * t + self.lambda * (self.gamma.ln() - g.ln()) + kg.ln() - kgam.ln() - dg
            + dgam;
        Ok(ln.exp())
    }

    /// `K_{λ+j}(δγ)/K_λ(δγ)`.
    pub(crate) fn k_ratio(&self, j: F) -> F {
        let z = self.delta * self.gamma;
        k_scaled_raw(self.lambda + j, z).unwrap_or(F::nan())
            / k_scaled_raw(self.lambda, z).unwrap_or(F::nan())
    }

    pub fn mean(&self) -> F {
        self.mu + self.delta * self.beta / self.gamma * self.k_ratio(F::one())
    }

    pub fn variance(&self) -> F {
        let r1 = self.k_ratio(F::one());
        let r2 = self.k_ratio(F::lit(2.0));
        let bd_g = self.beta * self.delta / self.gamma;
        self.delta / self.gamma * r1 + bd_g * bd_g * (r2 - r1 * r1)
    }

    /// Leading term of the tail expansion,
    /// `γ^λ / (2 (αδ)^λ K_λ(δγ)) |x-μ|^{λ-1} e^{-α|x-μ| + β(x-μ)}`.
    pub fn tail_leading(&self, x: F) -> F {
        self.log_tail_leading(x).exp()
    }

    /// Logarithm of [`tail_leading`](Self::tail_leading); finite where the term underflows.
    pub fn log_tail_leading(&self, x: F) -> F {
        let y = x - self.mu;
        let z = self.delta * self.gamma;
        let k = k_scaled_raw(self.lambda, z).unwrap_or(F::nan());

        self.lambda * (self.gamma.ln() - (self.alpha * self.delta).ln()) - F::LN_2() - (k.ln() - z)
            + (self.lambda - F::one()) * y.abs().ln()
            - self.alpha * y.abs()
            + self.beta * y
    }

    /// Law of `aX + b`: `GH(λ, α/|a|, β/a, δ|a|, aμ + b)`.
    pub fn affine(&self, a: F, b: F) -> Result<Self> {
        if a == F::zero() || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "affine scale must be finite and nonzero, got {a}"
            )));
        }
        Self::new(
            self.lambda,
            self.alpha / a.abs(),
            self.beta / a,
            self.delta * a.abs(),
            a * self.mu + b,
        )
    }

    /// `n` draws of `μ + βV + √V Z` with `V ~ GIG(λ, γ², δ²)`, `Z ~ N(0,1)`.
    pub fn sample(&self, n: usize, stream: RandomStream) -> Result<SampleSet<F>> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        let g = self.gamma.as_f64();
        let d = self.delta.as_f64();
        let mixing = GigSampler::new(self.lambda.as_f64(), g * g, d * d);
        let (mu, beta) = (self.mu.as_f64(), self.beta.as_f64());
        let values = parallel_draws(n, stream, |rng| {
            let v = mixing.draw(rng);
            let z: f64 = StandardNormal.sample(rng);
            F::lit(mu + beta * v + v.sqrt() * z)
        });
        Ok(SampleSet::new(
            values,
            SampleSource::Gh(*self),
            Some(stream),
        ))
    }
}

fn cdf_config() -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-12,
        max_subdivisions: 2000,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{derivative, DiffOrder};

    fn p() -> GhParams<f64> {
        GhParams::new(1.0, 2.0, 0.5, 1.0, 0.0).unwrap()
    }

    #[test]
    fn parameter_checks_name_the_inequality() {
        let e = GhParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap_err();
        assert!(e.to_string().contains("alpha must exceed |beta|"));
        let e = GhParams::new(1.0, 2.0, 0.0, 0.0, 0.0).unwrap_err();
        assert!(e.to_string().contains("delta must be positive"));
        assert!(GhParams::new(f64::NAN, 2.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn serde_validates() {
        let text = serde_json::to_string(&p()).unwrap();
        assert_eq!(
            text,
            r#"{"lambda":1.0,"alpha":2.0,"beta":0.5,"delta":1.0,"mu":0.0}"#
        );
        let back: GhParams<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p());
        let bad = r#"{"lambda":1.0,"alpha":0.5,"beta":0.5,"delta":1.0,"mu":0.0}"#;
        assert!(serde_json::from_str::<GhParams<f64>>(bad).is_err());
    }

    #[test]
    fn hyperbolic_closed_form() {
        let q = p();
        let g = q.gamma();
        let k1 = crate::bessel::bessel_k(1.0, g).unwrap();
        for x in [-3.0_f64, -0.2, 0.0, 1.0, 6.0] {
            let want = g / (2.0 * 2.0 * k1) * (-2.0 * (1.0 + x * x).sqrt() + 0.5 * x).exp();
            assert!((q.pdf(x) / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for q in [
            p(),
            GhParams::new(-1.3, 1.5, -0.7, 0.6, 0.4).unwrap(),
            GhParams::new(3.0, 5.0, 2.5, 2.0, 0.0).unwrap(),
        ] {
            for x in [-2.0, -0.3, 0.0, 1.0, 3.5] {
                let (p0, p1, p2) = q.pdf_derivatives(x);
                assert!((p0 / q.pdf(x) - 1.0).abs() < 1e-13);
                let n1 = derivative(|t| q.pdf(t), x, DiffOrder::First);
                let n2 = derivative(|t| q.pdf(t), x, DiffOrder::Second);
                let scale = p0.abs() + p1.abs();
                assert!((p1 - n1).abs() < 1e-8 * scale, "p'({x}) {p1} vs {n1}");
                assert!(
                    (p2 - n2).abs() < 1e-5 * (scale + p2.abs()),
                    "p''({x}) {p2} vs {n2}"
                );
            }
        }
    }

    #[test]
    fn mgf_domain() {
        assert!(matches!(p().mgf(1.5), Err(Error::Domain(_))));
        assert!((p().mgf(0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_rules() {
        let q = GhParams::new(0.7, 2.0, 0.5, 1.3, 0.2).unwrap();
        assert_eq!(q.affine(1.0, 0.0).unwrap(), q);
        let f = q.affine(-1.0, 0.0).unwrap();
        assert_eq!(
            (f.alpha(), f.beta(), f.delta(), f.mu()),
            (2.0, -0.5, 1.3, -0.2)
        );
        assert!(q.affine(0.0, 1.0).is_err());
    }

    #[test]
    fn far_tail_log_density_is_finite() {
        let q = GhParams::<f64>::new(1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
        assert!(q.log_pdf(1e4).is_finite());
        assert!(q.log_pdf(-1e4).is_finite());
        assert_eq!(q.pdf(1e4), 0.0);
    }

    #[test]
    fn cdf_endpoints_and_symmetry() {
        let q = GhParams::new(0.5, 2.0, 0.0, 1.0, 0.3).unwrap();
        assert_eq!(q.cdf(f64::NEG_INFINITY).unwrap(), 0.0);
        assert_eq!(q.cdf(f64::INFINITY).unwrap(), 1.0);
        assert!((q.cdf(0.3).unwrap() - 0.5).abs() < 1e-12);
        assert!(q.cdf(-60.0).unwrap() < 1e-30);
        assert!(q.cdf(60.0).unwrap() > 1.0 - 1e-15);
    }
}
