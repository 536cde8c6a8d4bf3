//! Raw moments `M_k = E W^k` of `W ~ GH(λ, α, β, δ, 0)`.
//!
//! `M_0..M_3` are seeded in closed form from the normal variance-mean mixture
//! `W = βV + √V Z` with `E V^j = (δ/γ)^j K_{λ+j}(δγ)/K_λ(δγ)`. Higher moments
//! follow from applying the Stein operator to `x^k`:
//!
//! ```text
//! γ² M_{k+1} = 2β(λ+k) M_k + (k(k-1) + 2λk + β²δ²) M_{k-1}
//!            + (2k-1)βδ² M_{k-2} + k(k-2)δ² M_{k-3},      k >= 2.
//! ```
//!
//! For `k < 2` the identity involves negative moments, which do not exist.

use serde::{Deserialize, Serialize};

use crate::distributions::GhParams;
use crate::error::{Error, Result};
use crate::numerics::{Estimate, QuadratureConfig};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Seed,
    Recurrence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MomentTable<F: Real> {
    params: GhParams<F>,
    moments: Vec<F>,
    provenance: Vec<Provenance>,
}

impl<F: Real> MomentTable<F> {
    pub fn params(&self) -> &GhParams<F> {
        &self.params
    }

    /// `M_0, M_1, …`.
    pub fn moments(&self) -> &[F] {
        &self.moments
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn get(&self, k: usize) -> Option<F> {
        self.moments.get(k).copied()
    }

    /// Highest available order.
    pub fn max_order(&self) -> usize {
        self.moments.len() - 1
    }

    /// Right minus left side of the recurrence at `k`, relative to the
    /// magnitude of the terms. Needs `2 <= k < max_order`.
    pub fn recurrence_residual(&self, k: usize) -> Result<F> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "the moment recurrence holds for k >= 2 only, got k = {k}"
            )));
        }
        if k + 1 > self.max_order() {
            return Err(Error::InvalidParameter(format!(
                "M_{} is not in the table",
                k + 1
            )));
        }
        let terms = recurrence_terms(&self.params, &self.moments, k);
        let lhs = self.params.gamma().powi(2) * self.moments[k + 1];
        let rhs: F = terms.iter().copied().sum();
        let scale = terms.iter().fold(lhs.abs(), |m, t| m + t.abs());
        Ok(if scale == F::zero() {
            F::zero()
        } else {
            (lhs - rhs) / scale
        })
    }
}

fn recurrence_terms<F: Real>(p: &GhParams<F>, m: &[F], k: usize) -> [F; 4] {
    let (l, b, d2) = (p.lambda(), p.beta(), p.delta() * p.delta());
    let kf = F::of_usize(k);
    let one = F::one();
    let two = F::lit(2.0);
    let back3 = if k >= 3 {
        kf * (kf - two) * d2 * m[k - 3]
    } else {
        F::zero()
    };
    [
        two * b * (l + kf) * m[k],
        (kf * (kf - one) + two * l * kf + b * b * d2) * m[k - 1],
        (two * kf - one) * b * d2 * m[k - 2],
        back3,
    ]
}

fn require_centered<F: Real>(p: &GhParams<F>) -> Result<()> {
    if p.mu() != F::zero() {
        return Err(Error::InvalidParameter(format!(
            "moment table is defined for mu = 0 (got mu = {})",
            p.mu()
        )));
    }
    Ok(())
}

/// `M_0..M_3` in closed form.
pub fn seed_moments<F: Real>(p: &GhParams<F>) -> Result<MomentTable<F>> {
    require_centered(p)?;
    let b = p.beta();
    let scale = p.delta() / p.gamma();
    let v1 = scale * p.k_ratio(F::one());
    let v2 = scale * scale * p.k_ratio(F::lit(2.0));
    let v3 = scale * scale * scale * p.k_ratio(F::lit(3.0));
    let three = F::lit(3.0);
    let moments = vec![
        F::one(),
        b * v1,
        b * b * v2 + v1,
        b * b * b * v3 + three * b * v2,
    ];
    if moments.iter().any(|m| !m.is_finite()) {
        return Err(Error::Overflow(format!(
            "seed moments are not finite for {p:?}"
        )));
    }
    Ok(MomentTable {
        params: *p,
        moments,
        provenance: vec![Provenance::Seed; 4],
    })
}

/// Extends a table to `M_K` with the recurrence. `K < 4` leaves it unchanged.
pub fn extend_moments<F: Real>(table: &MomentTable<F>, k_max: usize) -> Result<MomentTable<F>> {
    if table.moments.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "the recurrence needs M_0..M_3, table has {} entries",
            table.moments.len()
        )));
    }
    let mut out = table.clone();
    if k_max < 4 {
        return Ok(out);
    }
    let g2 = table.params.gamma().powi(2);
    while out.moments.len() <= k_max {
        let k = out.moments.len() - 1;
        let next = recurrence_terms(&out.params, &out.moments, k)
            .iter()
            .copied()
            .sum::<F>()
            / g2;
        if !next.is_finite() {
            return Err(Error::Overflow(format!("M_{} overflows", k + 1)));
        }
        out.moments.push(next);
        out.provenance.push(Provenance::Recurrence);
    }
    Ok(out)
}

/// `M_0..M_K` (seeded and extended).
pub fn moment_table<F: Real>(p: &GhParams<F>, k_max: usize) -> Result<MomentTable<F>> {
    let mut t = extend_moments(&seed_moments(p)?, k_max)?;
    t.moments.truncate(k_max + 1);
    t.provenance.truncate(k_max + 1);
    Ok(t)
}

/// `∫ x^k p(x) dx` by quadrature.
pub fn moment_oracle<F: Real>(p: &GhParams<F>, k: i32) -> Result<Estimate<F>> {
    require_centered(p)?;
    if k < 0 {
        return Err(Error::InvalidParameter(format!(
            "moment order must be non-negative, got {k}"
        )));
    }
    let cfg = QuadratureConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 4000,
    };
    p.expectation(|x| x.powi(k), &[], &cfg)
}

/// Third derivative of the MGF at 0 by Richardson-extrapolated central differences.
pub fn mgf_third_derivative<F: Real>(p: &GhParams<F>) -> Result<F> {
    let gap = p.alpha() - p.beta().abs();
    let d3 = |h: F| -> Result<F> {
        let two = F::lit(2.0);
        Ok(
            (p.mgf(two * h)? - two * p.mgf(h)? + two * p.mgf(-h)? - p.mgf(-two * h)?)
                / (two * h * h * h),
        )
    };
    let h = F::lit(0.02) * gap;
    let coarse = d3(h)?;
    let fine = d3(h / F::lit(2.0))?;
    Ok((F::lit(4.0) * fine - coarse) / F::lit(3.0))
}
