//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and work limit for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive, got rel_tol = {}, abs_tol = {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<F> {
    pub value: F,
    pub error: F,
}

impl<F: Real> Estimate<F> {
    pub fn zero() -> Self {
        Self {
            value: F::zero(),
            error: F::zero(),
        }
    }

    pub fn scale(self, s: F) -> Self {
        Self {
            value: self.value * s,
            error: self.error * s.abs(),
        }
    }
}

impl<F: Real> std::ops::Add for Estimate<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

struct Panel<F> {
    a: F,
    b: F,
    value: F,
    error: F,
}

impl<F: Real> PartialEq for Panel<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<F: Real> Eq for Panel<F> {}

impl<F: Real> PartialOrd for Panel<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Real> Ord for Panel<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.as_f64().total_cmp(&other.error.as_f64())
    }
}

fn kronrod15<F: Real, G: Fn(F) -> F>(f: &G, a: F, b: F) -> Panel<F> {
    let half = F::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut res_g = fc * F::lit(WG[3]);
    let mut res_k = fc * F::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [F::zero(); 7];
    let mut fv2 = [F::zero(); 7];
    for j in 0..7 {
        let dx = half_len * F::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = F::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + F::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = half * res_k;
    let mut res_asc = F::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + F::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half_len.abs();
    let value = res_k * half_len;
    res_abs = res_abs * scale;
    res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half_len).abs();
    if res_asc != F::zero() && err != F::zero() {
        let r = (F::lit(200.0) * err / res_asc).powf(F::lit(1.5));
        err = res_asc * r.min(F::one());
    }
    let floor = F::lit(50.0) * F::epsilon() * res_abs;
    if res_abs > F::min_positive_value() / (F::lit(50.0) * F::epsilon()) && floor > err {
        err = floor;
    }
    if !value.is_finite() || !err.is_finite() {
        err = F::infinity();
    }
    Panel {
        a,
        b,
        value,
        error: err,
    }
}

fn adaptive<F: Real, G: Fn(F) -> F>(
    f: &G,
    a: F,
    b: F,
    cfg: &QuadratureConfig,
) -> Result<Estimate<F>> {
    cfg.validate()?;
    let rel = F::lit(cfg.rel_tol).max(F::lit(50.0) * F::epsilon());
    let abs = F::lit(cfg.abs_tol);
    let first = kronrod15(f, a, b);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;
    loop {
        if total_err <= abs.max(rel * total.abs()) {
            break;
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(non_convergence(total, total_err, subdivisions));
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = F::lit(0.5) * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel below floating point resolution
            return Err(non_convergence(total, total_err, subdivisions));
        }
        let left = kronrod15(f, worst.a, mid);
        let right = kronrod15(f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        total_err = total_err - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // re-sum to avoid drift from repeated subtraction
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: F = heap.iter().map(|p| p.value).sum();
    let error: F = heap.iter().map(|p| p.error).sum();
    if !value.is_finite() {
        return Err(non_convergence(value, error, subdivisions));
    }
    Ok(Estimate { value, error })
}

fn non_convergence<F: Real>(value: F, error: F, subdivisions: usize) -> Error {
    Error::QuadratureNonConvergence {
        estimate: value.as_f64(),
        error: error.as_f64(),
        subdivisions,
    }
}

/// Integral of `f` over `(a, b)`; either bound may be infinite.
///
/// Infinite ranges are mapped onto finite ones (`x = t/(1-t²)` on the whole
/// line, `x = a + t/(1-t)` on a half line). Reversed bounds flip the sign.
pub fn integrate<F, G>(f: G, a: F, b: F, cfg: &QuadratureConfig) -> Result<Estimate<F>>
where
    F: Real,
    G: Fn(F) -> F,
{
    if a.is_nan() || b.is_nan() {
        return Err(Error::Domain("integration bounds must not be NaN".into()));
    }
    if a == b {
        return Ok(Estimate::zero());
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(Estimate {
            value: -r.value,
            error: r.error,
        });
    }
    let one = F::one();
    match (a.is_infinite(), b.is_infinite()) {
        (false, false) => adaptive(&f, a, b, cfg),
        (true, true) => {
            let g = |t: F| {
                let d = one - t * t;
                f(t / d) * (one + t * t) / (d * d)
            };
            adaptive(&g, -one, one, cfg)
        }
        (false, true) => {
            let g = |t: F| {
                let d = one - t;
                f(a + t / d) / (d * d)
            };
            adaptive(&g, F::zero(), one, cfg)
        }
        (true, false) => {
            let g = |t: F| {
                let d = one - t;
                f(b - t / d) / (d * d)
            };
            adaptive(&g, F::zero(), one, cfg)
        }
    }
}

/// Integral of `f` over `(a, ∞)` for an integrand with `|f(t)| <= C e^{-decay_rate t}`.
///
/// The range is cut at `T = a + max(40, -ln abs_tol)/decay_rate`; further
/// panels of the same width are appended while they still contribute more
/// than the absolute tolerance.
pub fn integrate_semi_infinite<F, G>(
    f: G,
    a: F,
    decay_rate: F,
    cfg: &QuadratureConfig,
) -> Result<Estimate<F>>
where
    F: Real,
    G: Fn(F) -> F,
{
    if !(decay_rate > F::zero()) || !decay_rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "decay_rate must be positive, got {decay_rate}"
        )));
    }
    cfg.validate()?;
    let width = F::lit(40.0f64.max(-cfg.abs_tol.ln())) / decay_rate;
    let mut lo = a;
    let mut hi = a + width;
    let mut acc = Pieces::default();
    acc.add(adaptive(&f, lo, hi, cfg))?;
    let abs = F::lit(cfg.abs_tol);
    for _ in 0..64 {
        lo = hi;
        hi = hi + width;
        let piece = acc.add(adaptive(&f, lo, hi, cfg))?;
        if piece.value.abs() <= abs {
            break;
        }
    }
    acc.finish()
}

/// Sum of panel integrals. A panel that fails to converge still contributes
/// its estimate, and the failure is reported for the whole sum at the end.
struct Pieces<F> {
    total: Estimate<F>,
    failed: Option<usize>,
}

impl<F: Real> Default for Pieces<F> {
    fn default() -> Self {
        Self {
            total: Estimate::zero(),
            failed: None,
        }
    }
}

impl<F: Real> Pieces<F> {
    fn add(&mut self, r: Result<Estimate<F>>) -> Result<Estimate<F>> {
        let piece = match r {
            Ok(e) => e,
            Err(Error::QuadratureNonConvergence {
                estimate,
                error,
                subdivisions,
            }) if estimate.is_finite() => {
                self.failed = Some(self.failed.unwrap_or(0) + subdivisions);
                Estimate {
                    value: F::lit(estimate),
                    error: F::lit(error),
                }
            }
            Err(e) => return Err(e),
        };
        self.total = self.total + piece;
        Ok(piece)
    }

    fn finish(self) -> Result<Estimate<F>> {
        match self.failed {
            Some(subdivisions) => Err(non_convergence(
                self.total.value,
                self.total.error,
                subdivisions,
            )),
            None => Ok(self.total),
        }
    }
}

/// Integral over `(a, b)` split at the interior `breaks`.
pub fn integrate_with_breaks<F, G>(
    f: G,
    a: F,
    b: F,
    breaks: &[F],
    cfg: &QuadratureConfig,
) -> Result<Estimate<F>>
where
    F: Real,
    G: Fn(F) -> F,
{
    let (lo, hi, sign) = if a <= b {
        (a, b, F::one())
    } else {
        (b, a, -F::one())
    };
    let mut cuts: Vec<F> = breaks
        .iter()
        .copied()
        .filter(|&c| c > lo && c < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.dedup();
    let mut acc = Pieces::default();
    let mut left = lo;
    for c in cuts.into_iter().chain(std::iter::once(hi)) {
        acc.add(integrate(&f, left, c, cfg))?;
        left = c;
    }
    match acc.finish() {
        Ok(total) => Ok(total.scale(sign)),
        Err(Error::QuadratureNonConvergence {
            estimate,
            error,
            subdivisions,
        }) => Err(Error::QuadratureNonConvergence {
            estimate: estimate * sign.as_f64(),
            error,
            subdivisions,
        }),
        Err(e) => Err(e),
    }
}
