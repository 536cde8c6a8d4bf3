//! Gamma function helpers.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Taylor coefficients of `1/Γ(1+z)` about `z = 0`.
pub(crate) const RGAMMA1P: [f64; 25] = [
    1.0,
    5.772_156_649_015_328_6e-1,
    -6.558_780_715_202_538_8e-1,
    -4.200_263_503_409_523_6e-2,
    1.665_386_113_822_914_9e-1,
    -4.219_773_455_554_433_7e-2,
    -9.621_971_527_876_973_6e-3,
    7.218_943_246_663_099_5e-3,
    -1.165_167_591_859_065_1e-3,
    -2.152_416_741_149_509_7e-4,
    1.280_502_823_881_161_9e-4,
    -2.013_485_478_078_823_9e-5,
    -1.250_493_482_142_670_7e-6,
    1.133_027_231_981_695_9e-6,
    -2.056_338_416_977_607_1e-7,
    6.116_095_104_481_415_8e-9,
    5.002_007_644_469_222_9e-9,
    -1.181_274_570_487_020_1e-9,
    1.043_426_711_691_100_5e-10,
    7.782_263_439_905_071e-12,
    -3.696_805_618_642_205_7e-12,
    5.100_370_287_454_476e-13,
    -2.058_326_053_566_506_8e-14,
    -5.348_122_539_423_018e-15,
    1.226_778_628_238_260_8e-15,
];

fn lanczos_sum<F: Real>(x: F) -> F {
    let mut a = F::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + F::lit(c) / (x + F::of_usize(i));
    }
    a
}

/// Γ(x) for real `x` (poles return ±∞).
pub fn gamma<F: Real>(x: F) -> F {
    let half = F::lit(0.5);
    if x < half {
        let s = (F::PI() * x).sin();
        if s == F::zero() {
            return F::infinity();
        }
        return F::PI() / (s * gamma(F::one() - x));
    }
    let x = x - F::one();
    let t = x + F::lit(LANCZOS_G) + half;
    (F::TAU()).sqrt() * t.powf(x + half) * (-t).exp() * lanczos_sum(x)
}

/// ln |Γ(x)|.
pub fn ln_gamma<F: Real>(x: F) -> F {
    let half = F::lit(0.5);
    if x < half {
        let s = (F::PI() * x).sin().abs();
        if s == F::zero() {
            return F::infinity();
        }
        return (F::PI() / s).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let t = x + F::lit(LANCZOS_G) + half;
    half * F::TAU().ln() + (x + half) * t.ln() - t + lanczos_sum(x).ln()
}

/// Temme's auxiliary quantities for `|mu| <= 1/2`:
/// `gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ)`, `gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2`,
/// together with `1/Γ(1+μ)` and `1/Γ(1-μ)`.
pub(crate) fn temme_gammas<F: Real>(mu: F) -> (F, F, F, F) {
    let mut gam1 = F::zero();
    let mut gam2 = F::zero();
    let mu2 = mu * mu;
    // even coefficients build gam2, odd ones (with sign flip) gam1
    for (j, &c) in RGAMMA1P.iter().enumerate().rev() {
        if j % 2 == 0 {
            gam2 = gam2 * mu2 + F::lit(c);
        } else {
            gam1 = gam1 * mu2 - F::lit(c);
        }
    }
    let gampl = gam2 - mu * gam1;
    let gammi = gam2 + mu * gam1;
    (gam1, gam2, gampl, gammi)
}
