mod common;

use common::grid;
use gh_stein::moments::{
    mgf_third_derivative, moment_oracle, moment_table, seed_moments, Provenance,
};
use gh_stein::GhParams64;
use nalgebra::DMatrix;

#[test]
fn recurrence_matches_quadrature_oracle() {
    for p in grid() {
        let t = moment_table(&p, 8).unwrap();
        for k in 0..=8 {
            let want = moment_oracle(&p, k as i32).unwrap().value;
            let got = t.get(k).unwrap();
            assert!(
                (got - want).abs() <= 1e-5 * want.abs().max(1.0),
                "{p:?} M_{k}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn matches_high_precision_reference() {
    // 30-digit quadrature of x^k p(x)
    let want = [
        1.0,
        0.573_062_558_308_736_07,
        1.301_119_878_053_522_9,
        2.628_766_512_818_676_6,
        8.613_761_398_752_143_5,
        30.933_061_104_686_790,
        140.691_560_046_108_53,
        723.207_109_745_768_74,
        4_313.240_018_239_731_5,
    ];
    let p = GhParams64::new(0.5, 2.0, 0.7, 1.0, 0.0).unwrap();
    let t = moment_table(&p, 8).unwrap();
    for (k, w) in want.iter().enumerate() {
        let got = t.get(k).unwrap();
        assert!((got - w).abs() <= 1e-12 * w.abs(), "M_{k}: {got} vs {w}");
    }
}

#[test]
fn symmetric_laws_have_vanishing_odd_moments() {
    for p in grid().into_iter().filter(|p| p.beta() == 0.0) {
        let t = moment_table(&p, 8).unwrap();
        for k in [1, 3, 5, 7] {
            assert_eq!(t.get(k).unwrap(), 0.0, "{p:?} M_{k}");
        }
    }
}

#[test]
fn recurrence_holds_on_seed_rows() {
    for p in grid() {
        let t = moment_table(&p, 8).unwrap();
        assert_eq!(&t.provenance()[..4], &[Provenance::Seed; 4]);
        assert!(t.provenance()[4..]
            .iter()
            .all(|&s| s == Provenance::Recurrence));
        // k = 2 links the four seeds alone
        assert!(t.recurrence_residual(2).unwrap().abs() <= 1e-13, "{p:?}");
        for k in 3..8 {
            assert!(
                t.recurrence_residual(k).unwrap().abs() <= 1e-13,
                "{p:?} k = {k}"
            );
        }
    }
}

#[test]
fn seeds_agree_with_moment_generating_function() {
    for p in grid() {
        let seed = seed_moments(&p).unwrap();
        let d3 = mgf_third_derivative(&p).unwrap();
        let m3 = seed.get(3).unwrap();
        assert!(
            (d3 - m3).abs() <= 1e-5 * m3.abs().max(1.0),
            "{p:?}: {d3} vs {m3}"
        );
        assert!((seed.get(1).unwrap() - p.mean()).abs() <= 1e-14 * p.mean().abs().max(1.0));
        let var = seed.get(2).unwrap() - seed.get(1).unwrap().powi(2);
        assert!((var - p.variance()).abs() <= 1e-12 * p.variance());
    }
}

#[test]
fn hankel_matrices_are_positive_definite() {
    for p in grid() {
        let t = moment_table(&p, 8).unwrap();
        let h = DMatrix::from_fn(5, 5, |i, j| t.get(i + j).unwrap());
        assert!(
            h.clone().cholesky().is_some(),
            "{p:?}: Hankel matrix not positive definite"
        );
        let shifted = DMatrix::from_fn(4, 4, |i, j| t.get(i + j + 2).unwrap());
        assert!(
            shifted.cholesky().is_some(),
            "{p:?}: shifted Hankel matrix not positive definite"
        );
    }
}
