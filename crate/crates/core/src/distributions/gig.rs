//! Generalized inverse Gaussian law `GIG(λ, a, b)` with density
//! `(a/b)^{λ/2} / (2 K_λ(√(ab))) x^{λ-1} e^{-(ax + b/x)/2}` on `x > 0`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::k_scaled_raw;
use crate::distributions::sample::{SampleSet, SampleSource, SAMPLE_CHUNK};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate, integrate_semi_infinite, Estimate, QuadratureConfig, RandomStream,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GigRepr<F>", into = "GigRepr<F>")]
#[serde(bound = "")]
pub struct GigParams<F: Real> {
    lambda: F,
    a: F,
    b: F,
    log_norm: F,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GigRepr<F> {
    lambda: F,
    a: F,
    b: F,
}

impl<F: Real> TryFrom<GigRepr<F>> for GigParams<F> {
    type Error = Error;
    fn try_from(r: GigRepr<F>) -> Result<Self> {
        Self::new(r.lambda, r.a, r.b)
    }
}

impl<F: Real> From<GigParams<F>> for GigRepr<F> {
    fn from(p: GigParams<F>) -> Self {
        Self {
            lambda: p.lambda,
            a: p.a,
            b: p.b,
        }
    }
}

impl<F: Real> GigParams<F> {
    pub fn new(lambda: F, a: F, b: F) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        if !(a > F::zero()) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "a must be positive, got {a}"
            )));
        }
        if !(b > F::zero()) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be positive, got {b}"
            )));
        }
        let omega = (a * b).sqrt();
        let k = k_scaled_raw(lambda, omega)?;
        let log_norm = F::lit(0.5) * lambda * (a / b).ln() - F::LN_2() - (k.ln() - omega);
        if !log_norm.is_finite() {
            return Err(Error::Overflow(format!(
                "GIG normalizing constant for lambda = {lambda}, a = {a}, b = {b}"
            )));
        }
        Ok(Self {
            lambda,
            a,
            b,
            log_norm,
        })
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn a(&self) -> F {
        self.a
    }

    pub fn b(&self) -> F {
        self.b
    }

    /// `√(ab)`, the Bessel argument.
    pub fn omega(&self) -> F {
        (self.a * self.b).sqrt()
    }

    /// `√(b/a)`, the scale of the standardized law.
    pub fn eta(&self) -> F {
        (self.b / self.a).sqrt()
    }

    pub fn mode(&self) -> F {
        let lm1 = self.lambda - F::one();
        (lm1 + (lm1 * lm1 + self.a * self.b).sqrt()) / self.a
    }

    pub fn log_pdf(&self, x: F) -> Result<F> {
        if !(x > F::zero()) {
            return Err(Error::Domain(format!(
                "GIG density requires x > 0, got {x}"
            )));
        }
        Ok(self.log_pdf_unchecked(x))
    }

    pub(crate) fn log_pdf_unchecked(&self, x: F) -> F {
        self.log_norm + (self.lambda - F::one()) * x.ln() - F::lit(0.5) * (self.a * x + self.b / x)
    }

    pub fn pdf(&self, x: F) -> Result<F> {
        Ok(self.log_pdf(x)?.exp())
    }

    fn density_or_zero(&self, x: F) -> F {
        if x > F::zero() {
            self.log_pdf_unchecked(x).exp()
        } else {
            F::zero()
        }
    }

    /// Ratio `K_{λ+j}(ω)/K_λ(ω)`.
    fn k_ratio(&self, j: F) -> F {
        let w = self.omega();
        k_scaled_raw(self.lambda + j, w).unwrap_or(F::nan())
            / k_scaled_raw(self.lambda, w).unwrap_or(F::nan())
    }

    pub fn mean(&self) -> F {
        self.eta() * self.k_ratio(F::one())
    }

    pub fn variance(&self) -> F {
        let r1 = self.k_ratio(F::one());
        let r2 = self.k_ratio(F::lit(2.0));
        self.b / self.a * (r2 - r1 * r1)
    }

    /// `E X^k = η^k K_{λ+k}(ω)/K_λ(ω)` for real `k`.
    pub fn raw_moment(&self, k: F) -> F {
        self.eta().powf(k) * self.k_ratio(k)
    }

    /// `∫_0^∞ h(x) p(x) dx`.
    pub fn expectation<G: Fn(F) -> F>(&self, h: G, cfg: &QuadratureConfig) -> Result<Estimate<F>> {
        let m = self.mode();
        let g = |x: F| {
            let p = self.density_or_zero(x);
            if p == F::zero() {
                F::zero()
            } else {
                h(x) * p
            }
        };
        let left = integrate(g, F::zero(), m, cfg)?;
        let right = integrate_semi_infinite(|t: F| g(m + t), F::zero(), F::lit(0.5) * self.a, cfg)?;
        Ok(left + right)
    }

    pub fn cdf(&self, x: F, cfg: &QuadratureConfig) -> Result<F> {
        if x <= F::zero() {
            return Ok(F::zero());
        }
        if x.is_infinite() {
            return Ok(F::one());
        }
        let v = if x <= self.mode() {
            integrate(|t| self.density_or_zero(t), F::zero(), x, cfg)?.value
        } else {
            let upper = integrate_semi_infinite(
                |t| self.density_or_zero(x + t),
                F::zero(),
                F::lit(0.5) * self.a,
                cfg,
            )?;
            F::one() - upper.value
        };
        Ok(v.max(F::zero()).min(F::one()))
    }

    /// CDF at ascending `points`, built from non-negative increments so the
    /// output is nondecreasing.
    pub fn cdf_sorted(&self, points: &[F], cfg: &QuadratureConfig) -> Result<Vec<F>> {
        check_sorted(points)?;
        let mut out = Vec::with_capacity(points.len());
        let mut acc = F::zero();
        let mut prev: Option<F> = None;
        for &x in points {
            acc = match prev {
                None => self.cdf(x, cfg)?,
                Some(p) if x <= F::zero() || p == x => acc,
                Some(p) => {
                    acc + integrate(|t| self.density_or_zero(t), p.max(F::zero()), x, cfg)?
                        .value
                        .max(F::zero())
                }
            };
            let clamped = acc.min(F::one());
            out.push(clamped);
            prev = Some(x);
        }
        Ok(out)
    }

    /// `n` draws by ratio-of-uniforms with mode shift.
    pub fn sample(&self, n: usize, stream: RandomStream) -> Result<SampleSet<F>> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        let sampler = GigSampler::new(self.lambda.as_f64(), self.a.as_f64(), self.b.as_f64());
        let values = parallel_draws(n, stream, |rng| F::lit(sampler.draw(rng)));
        Ok(SampleSet::new(
            values,
            SampleSource::Gig(*self),
            Some(stream),
        ))
    }
}

pub(crate) fn check_sorted<F: Real>(points: &[F]) -> Result<()> {
    if points.iter().any(|x| x.is_nan()) {
        return Err(Error::Data("evaluation points must not be NaN".into()));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Data(
            "evaluation points must be in ascending order".into(),
        ));
    }
    Ok(())
}

/// Fill `n` values chunk by chunk, each chunk from its own block of the stream,
/// so the output is independent of the thread count.
pub(crate) fn parallel_draws<F, D>(n: usize, stream: RandomStream, draw: D) -> Vec<F>
where
    F: Send,
    D: Fn(&mut rand_chacha::ChaCha20Rng) -> F + Sync,
{
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Vec<F>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            let mut rng = stream.block_rng(c as u64);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Precomputed ratio-of-uniforms envelope for `GIG(|λ|, ω)` in standard form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GigSampler {
    lambda: f64,
    omega: f64,
    eta: f64,
    invert: bool,
    mode: f64,
    v_minus: f64,
    v_plus: f64,
}

impl GigSampler {
    pub(crate) fn new(lambda: f64, a: f64, b: f64) -> Self {
        let omega = (a * b).sqrt();
        let eta = (b / a).sqrt();
        let invert = lambda < 0.0;
        let lambda = lambda.abs();
        let lm1 = lambda - 1.0;
        let mode = (lm1 + (lm1 * lm1 + omega * omega).sqrt()) / omega;

        // extremes of (y - m)·√g(y) solve y³ + a2 y² + a1 y + a0 = 0
        let a2 = -(2.0 * (lambda + 1.0) / omega + mode);
        let a1 = 2.0 * mode * lm1 / omega - 1.0;
        let a0 = mode;
        let p = a1 - a2 * a2 / 3.0;
        let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
        let phi = (-0.5 * q * (-27.0 / (p * p * p)).sqrt())
            .clamp(-1.0, 1.0)
            .acos();
        let r = 2.0 * (-p / 3.0).sqrt();
        let mut roots = [0.0, 2.0, 4.0]
            .map(|k| r * (phi / 3.0 + k * std::f64::consts::FRAC_PI_3).cos() - a2 / 3.0);
        roots.sort_by(f64::total_cmp);
        let (y_minus, y_plus) = (roots[1], roots[2]);

        let mut s = Self {
            lambda,
            omega,
            eta,
            invert,
            mode,
            v_minus: 0.0,
            v_plus: 0.0,
        };
        s.v_minus = (y_minus - mode) * (0.5 * s.log_ratio(y_minus)).exp();
        s.v_plus = (y_plus - mode) * (0.5 * s.log_ratio(y_plus)).exp();
        s
    }

    /// `ln(g(y)/g(m))` for the standardized kernel `g(y) = y^{λ-1} e^{-ω(y+1/y)/2}`.
    fn log_ratio(&self, y: f64) -> f64 {
        let m = self.mode;
        (self.lambda - 1.0) * (y / m).ln() - 0.5 * self.omega * (y + 1.0 / y - m - 1.0 / m)
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random();
            if u == 0.0 {
                continue;
            }
            let v = self.v_minus + (self.v_plus - self.v_minus) * rng.random::<f64>();
            let y = v / u + self.mode;
            if y <= 0.0 {
                continue;
            }
            if 2.0 * u.ln() <= self.log_ratio(y) {
                let y = if self.invert { 1.0 / y } else { y };
                return self.eta * y;
            }
        }
    }
}
