//! Modified Bessel functions `I_ν` and `K_ν` of real order and positive argument.
//!
//! `K_ν` is evaluated on `|ν|` by splitting `ν = n + μ` with `|μ| <= 1/2`:
//! Temme's series gives `K_μ, K_{μ+1}` for `x < 2`, Steed's continued fraction
//! for `x >= 2`, and forward recurrence climbs to `K_ν`. `I_ν` uses the power
//! series for moderate arguments, the Hankel asymptotic expansion for large
//! ones, and in between a continued fraction for `I_{ν+1}/I_ν` combined with
//! the Wronskian `K_ν I_ν' - K_ν' I_ν = 1/x`.
//!
//! Scaled variants (`e^x K_ν(x)`, `e^{-x} I_ν(x)`) never overflow and are what
//! the rest of the crate builds on.

use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma, temme_gammas};
use crate::scalar::Real;

const MAX_ITER: usize = 100_000;

/// Below this argument the `I_ν` power series is used unconditionally.
const SERIES_LIMIT: f64 = 50.0;

/// Maximum number of terms of the divergent large-argument expansions.
pub const ASYMPTOTIC_MAX_TERMS: usize = 10;

fn check_positive<F: Real>(what: &str, x: F) -> Result<()> {
    if x.is_nan() || x <= F::zero() {
        return Err(Error::Domain(format!("{what} requires x > 0, got {x}")));
    }
    Ok(())
}

/// Coefficient `a_k(ν) = Π_{j=1..k} (4ν² - (2j-1)²) / (k! 8^k)`, with `a_0 = 1`.
pub fn asymptotic_coeff<F: Real>(nu: F, k: usize) -> F {
    let four_nu2 = F::lit(4.0) * nu * nu;
    (1..=k).fold(F::one(), |acc, j| {
        let odd = F::of_usize(2 * j - 1);
        acc * (four_nu2 - odd * odd) / (F::lit(8.0) * F::of_usize(j))
    })
}

/// The coefficients `a_0(ν), …, a_K(ν)` of the large-argument expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCoefficients<F> {
    nu: F,
    coeffs: Vec<F>,
}

impl<F: Real> AsymptoticCoefficients<F> {
    pub fn new(nu: F, k_max: usize) -> Self {
        let four_nu2 = F::lit(4.0) * nu * nu;
        let mut coeffs = Vec::with_capacity(k_max + 1);
        let mut a = F::one();
        coeffs.push(a);
        for j in 1..=k_max {
            let odd = F::of_usize(2 * j - 1);
            a = a * (four_nu2 - odd * odd) / (F::lit(8.0) * F::of_usize(j));
            coeffs.push(a);
        }
        Self { nu, coeffs }
    }

    pub fn nu(&self) -> F {
        self.nu
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn get(&self, k: usize) -> Option<F> {
        self.coeffs.get(k).copied()
    }
}

/// Sum of `Σ s^k a_k(ν)/x^k` truncated before the smallest term, at most `max_terms` terms.
fn asymptotic_sum<F: Real>(nu: F, x: F, max_terms: usize, alternating: bool) -> F {
    let four_nu2 = F::lit(4.0) * nu * nu;
    let mut term = F::one();
    let mut sum = F::one();
    for k in 1..max_terms {
        let odd = F::of_usize(2 * k - 1);
        let mut next = term * (four_nu2 - odd * odd) / (F::lit(8.0) * F::of_usize(k) * x);
        if alternating {
            next = -next;
        }
        if next.abs() >= term.abs() {
            break;
        }
        sum = sum + next;
        if next.abs() <= F::epsilon() * sum.abs() {
            break;
        }
        term = next;
    }
    sum
}

/// `e^x K_ν(x)` from the large-argument expansion with smallest-term truncation.
pub fn bessel_k_asymptotic_scaled<F: Real>(nu: F, x: F, max_terms: usize) -> Result<F> {
    check_positive("bessel_k_asymptotic_scaled", x)?;
    Ok((F::FRAC_PI_2() / x).sqrt() * asymptotic_sum(nu, x, max_terms, false))
}

/// `e^{-x} I_ν(x)` from the large-argument expansion with smallest-term truncation.
pub fn bessel_i_asymptotic_scaled<F: Real>(nu: F, x: F, max_terms: usize) -> Result<F> {
    check_positive("bessel_i_asymptotic_scaled", x)?;
    Ok(asymptotic_sum(nu, x, max_terms, true) / (F::TAU() * x).sqrt())
}

/// Temme's series: unscaled `(K_μ(x), K_{μ+1}(x))` for `|μ| <= 1/2`, `0 < x < 2`.
fn temme_k<F: Real>(mu: F, x: F) -> Result<(F, F)> {
    let eps = F::epsilon();
    let half = F::lit(0.5);
    let x2 = half * x;
    let pimu = F::PI() * mu;
    let fact = if pimu.abs() < eps {
        F::one()
    } else {
        pimu / pimu.sin()
    };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < eps {
        F::one()
    } else {
        e.sinh() / e
    };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e = e.exp();
    let mut p = half * e / gampl;
    let mut q = half / (e * gammi);
    let mut c = F::one();
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = F::of_usize(i);
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c = c * dd / fi;
        p = p / (fi - mu);
        q = q / (fi + mu);
        let del = c * ff;
        sum = sum + del;
        sum1 = sum1 + c * (p - fi * ff);
        if del.abs() < sum.abs() * eps {
            return Ok((sum, sum1 * F::lit(2.0) / x));
        }
    }
    Err(Error::NonConvergence(format!(
        "Temme series for K at x = {x}"
    )))
}

/// Steed's continued fraction: scaled `(e^x K_μ(x), e^x K_{μ+1}(x))` for `|μ| <= 1/2`, `x >= 2`.
fn steed_k_scaled<F: Real>(mu: F, x: F) -> Result<(F, F)> {
    let eps = F::epsilon();
    let two = F::lit(2.0);
    let mut b = two * (F::one() + x);
    let mut d = F::one() / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = F::zero();
    let mut q2 = F::one();
    let a1 = F::lit(0.25) - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = F::one() + q * delh;
    let mut converged = false;
    for i in 2..MAX_ITER {
        let fi = F::of_usize(i);
        a = a - two * (fi - F::one());
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = F::one() / (b + a * d);
        delh = (b * d - F::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < eps {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "continued fraction for K at x = {x}"
        )));
    }
    h = a1 * h;
    let kmu = (F::FRAC_PI_2() / x).sqrt() / s;
    let k1 = kmu * (mu + x + F::lit(0.5) - h) / x;
    Ok((kmu, k1))
}

/// Scaled pair `(e^x K_ν(x), e^x K_{ν+1}(x))` for `ν >= 0`, `x > 0`.
fn k_pair_scaled_nonneg<F: Real>(nu: F, x: F) -> Result<(F, F)> {
    let nl = (nu + F::lit(0.5)).floor();
    let mu = nu - nl;
    let (mut kmu, mut k1) = if x < F::lit(2.0) {
        let (k0, k1) = temme_k(mu, x)?;
        let ex = x.exp();
        (k0 * ex, k1 * ex)
    } else {
        steed_k_scaled(mu, x)?
    };
    let n = nl.to_usize().unwrap_or(0);
    let two_over_x = F::lit(2.0) / x;
    for i in 1..=n {
        let next = (mu + F::of_usize(i)) * two_over_x * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    Ok((kmu, k1))
}

/// Ratio `I_{ν+1}(x) / I_ν(x)` by the continued fraction
/// `1/(2(ν+1)/x + 1/(2(ν+2)/x + …))` (modified Lentz), valid for `ν > -1`.
fn i_ratio<F: Real>(nu: F, x: F) -> Result<F> {
    let tiny = F::min_positive_value() / F::epsilon();
    let two_over_x = F::lit(2.0) / x;
    let mut f = tiny;
    let mut c = f;
    let mut d = F::zero();
    for k in 1..MAX_ITER {
        let b = (nu + F::of_usize(k)) * two_over_x;
        d = b + d;
        if d == F::zero() {
            d = tiny;
        }
        d = F::one() / d;
        c = b + F::one() / c;
        if c == F::zero() {
            c = tiny;
        }
        let delta = c * d;
        f = f * delta;
        if (delta - F::one()).abs() < F::epsilon() {
            return Ok(f);
        }
    }
    Err(Error::NonConvergence(format!(
        "continued fraction for I ratio at x = {x}"
    )))
}

/// `e^{-x} I_ν(x)` by the ascending series, `ν > -1`, `x > 0`.
fn i_series_scaled<F: Real>(nu: F, x: F) -> Result<F> {
    let half_x = F::lit(0.5) * x;
    let q = half_x * half_x;
    let mut term = F::one();
    let mut sum = F::one();
    let mut converged = false;
    for k in 1..MAX_ITER {
        let fk = F::of_usize(k);
        term = term * q / (fk * (nu + fk));
        sum = sum + term;
        if term < F::epsilon() * sum {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "power series for I at x = {x}"
        )));
    }
    // leading factor (x/2)^ν / Γ(ν+1) · e^{-x}
    let lead = if nu.abs() < F::lit(60.0) && x < F::lit(SERIES_LIMIT + 1.0) {
        half_x.powf(nu) / gamma(nu + F::one()) * (-x).exp()
    } else {
        (nu * half_x.ln() - ln_gamma(nu + F::one()) - x).exp()
    };
    Ok(lead * sum)
}

/// `e^{-x} I_ν(x)` for `ν >= 0`, `x > 0`.
fn i_scaled_nonneg<F: Real>(nu: F, x: F) -> Result<F> {
    let crossover = F::lit(SERIES_LIMIT).max(F::lit(2.0) * nu * nu);
    if x <= F::lit(SERIES_LIMIT) {
        i_series_scaled(nu, x)
    } else if x > crossover {
        bessel_i_asymptotic_scaled(nu, x, ASYMPTOTIC_MAX_TERMS)
    } else {
        let ratio = i_ratio(nu, x)?;
        let (k0, k1) = k_pair_scaled_nonneg(nu, x)?;
        Ok(F::one() / (x * (ratio * k0 + k1)))
    }
}

/// `sin(νπ)` with exact zeros at integers.
fn sin_pi<F: Real>(nu: F) -> F {
    let two = F::lit(2.0);
    let r = nu - two * (nu / two).floor();
    if r == r.floor() {
        return F::zero();
    }
    (F::PI() * r).sin()
}

pub(crate) fn k_scaled_raw<F: Real>(nu: F, x: F) -> Result<F> {
    Ok(k_pair_scaled_nonneg(nu.abs(), x)?.0)
}

pub(crate) fn i_scaled_raw<F: Real>(nu: F, x: F) -> Result<F> {
    if nu >= F::zero() {
        return i_scaled_nonneg(nu, x);
    }
    let pos = -nu;
    let base = i_scaled_nonneg(pos, x)?;
    let s = sin_pi(pos);
    if s == F::zero() {
        return Ok(base);
    }
    let k = k_scaled_raw(pos, x)?;
    Ok(base + F::FRAC_2_PI() * s * k * (F::lit(-2.0) * x).exp())
}

/// `e^x K_ν(x)`; symmetric in `ν`.
pub fn bessel_k_scaled<F: Real>(nu: F, x: F) -> Result<F> {
    check_positive("bessel_k_scaled", x)?;
    k_scaled_raw(nu, x)
}

/// `K_ν(x)`; symmetric in `ν` bit for bit. Underflows to zero for very large `x`.
pub fn bessel_k<F: Real>(nu: F, x: F) -> Result<F> {
    check_positive("bessel_k", x)?;
    let scaled = k_scaled_raw(nu, x)?;
    if scaled.is_infinite() {
        return Ok(scaled);
    }
    Ok(scaled * (-x).exp())
}

/// `ln K_ν(x)`, finite wherever `e^x K_ν(x)` is.
pub fn ln_bessel_k<F: Real>(nu: F, x: F) -> Result<F> {
    Ok(bessel_k_scaled(nu, x)?.ln() - x)
}

/// `(e^x K_ν(x), e^x K_{ν+1}(x))` for any real `ν`.
pub fn bessel_k_scaled_pair<F: Real>(nu: F, x: F) -> Result<(F, F)> {
    check_positive("bessel_k_scaled_pair", x)?;
    pair_scaled_raw(nu, x)
}

pub(crate) fn pair_scaled_raw<F: Real>(nu: F, x: F) -> Result<(F, F)> {
    if nu >= F::zero() {
        return k_pair_scaled_nonneg(nu, x);
    }
    // K_{ν+1} = K_{-ν-1}; compute both orders on their absolute values
    Ok((k_scaled_raw(nu, x)?, k_scaled_raw(nu + F::one(), x)?))
}

/// `e^{-x} I_ν(x)`.
pub fn bessel_i_scaled<F: Real>(nu: F, x: F) -> Result<F> {
    check_positive("bessel_i_scaled", x)?;
    i_scaled_raw(nu, x)
}

/// `I_ν(x)` for `x >= 0` (`x = 0` only where the value is finite).
pub fn bessel_i<F: Real>(nu: F, x: F) -> Result<F> {
    if x.is_nan() || x < F::zero() {
        return Err(Error::Domain(format!("bessel_i requires x >= 0, got {x}")));
    }
    if x == F::zero() {
        if nu == F::zero() {
            return Ok(F::one());
        }
        if nu > F::zero() || nu == nu.floor() {
            return Ok(F::zero());
        }
        return Err(Error::Domain(format!("I_{nu}(0) is infinite")));
    }
    if x > F::max_value().ln() {
        return Err(Error::Overflow(format!(
            "I_{nu}({x}) exceeds the representable range; use bessel_i_scaled"
        )));
    }
    let v = i_scaled_raw(nu, x)? * x.exp();
    if v.is_infinite() {
        return Err(Error::Overflow(format!(
            "I_{nu}({x}) exceeds the representable range"
        )));
    }
    Ok(v)
}

/// `K_ν'(x) = (ν/x) K_ν(x) - K_{ν+1}(x)`.
pub fn bessel_k_derivative<F: Real>(nu: F, x: F) -> Result<F> {
    check_positive("bessel_k_derivative", x)?;
    let (k0, k1) = pair_scaled_raw(nu, x)?;
    Ok(((nu / x) * k0 - k1) * (-x).exp())
}

/// `I_ν'(x) = (ν/x) I_ν(x) + I_{ν+1}(x)`.
pub fn bessel_i_derivative<F: Real>(nu: F, x: F) -> Result<F> {
    check_positive("bessel_i_derivative", x)?;
    Ok(((nu / x) * bessel_i(nu, x)?) + bessel_i(nu + F::one(), x)?)
}
