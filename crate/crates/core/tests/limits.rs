mod common;

use common::rel;
use gh_stein::limits::{
    default_approach, default_probes, gh_to_limit_convergence, gig_solution_bound, hyperbolic_pdf,
    limit_operator, limit_pdf, nig_pdf, GigForm, GigSteinSolution,
};
use gh_stein::numerics::integrate;
use gh_stein::stein::TestFunctionSpec;
use gh_stein::{GhParams64, GigParams64, LimitCase64, QuadratureConfig};

fn probes() -> Vec<f64> {
    (-12..=12).map(|i| 0.5 * i as f64 + 0.1).collect()
}

#[test]
fn convergence_tables_for_limit_paths() {
    for name in ["vg2", "student_t", "gig"] {
        let case = LimitCase64::default_for(name).unwrap();
        let report = gh_to_limit_convergence(
            &case,
            &default_approach(&case).unwrap(),
            &default_probes(&case),
        )
        .unwrap();
        for t in &report.probes {
            assert!(t.monotone_tail, "{name} x = {}", t.x);
            assert!(
                t.final_deviation <= 1e-3,
                "{name} x = {}: {}",
                t.x,
                t.final_deviation
            );
        }
        assert!(report.passes(1e-3));
    }
}

#[test]
fn vg2_deviation_at_one_is_tiny() {
    let case = LimitCase64::default_for("vg2").unwrap();
    let report = gh_to_limit_convergence(&case, &default_approach(&case).unwrap(), &[1.0]).unwrap();
    let last = report.probes[0].entries.last().unwrap();
    for c in &last.coefficients {
        assert!(
            (c.path_value - c.limit_value).abs() <= 1e-4 * (1.0 + c.limit_value.abs()),
            "{c:?}"
        );
    }
}

#[test]
fn singular_and_off_path_inputs_are_rejected() {
    let case = LimitCase64::default_for("vg2").unwrap();
    let approach = default_approach(&case).unwrap();
    assert!(gh_to_limit_convergence(&case, &approach, &[0.0]).is_err());
    let wrong = vec![GhParams64::new(3.0, 2.0, 0.5, 0.1, 0.0).unwrap()];
    assert!(gh_to_limit_convergence(&case, &wrong, &[1.0]).is_err());
}

#[test]
fn report_serializes_to_tables() {
    let case = LimitCase64::default_for("gig").unwrap();
    let report = gh_to_limit_convergence(&case, &default_approach(&case).unwrap(), &[1.0]).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    assert_eq!(v["case"]["case"], "gig");
    assert_eq!(v["probes"][0]["entries"].as_array().unwrap().len(), 3);
    assert!(v["probes"][0]["entries"][0]["coefficients"][0]["deviation"].is_number());
}

#[test]
fn hyperbolic_and_nig_are_gh_special_cases() {
    for (alpha, beta, delta, mu) in [
        (2.0, 0.5, 1.0, 0.0),
        (1.0, -0.6, 0.4, 1.5),
        (5.0, 2.5, 2.0, -1.0),
    ] {
        let hyp = GhParams64::new(1.0, alpha, beta, delta, mu).unwrap();
        let nig = GhParams64::new(-0.5, alpha, beta, delta, mu).unwrap();
        for x in probes() {
            let (h, n) = (
                hyperbolic_pdf(alpha, beta, delta, mu, x).unwrap(),
                nig_pdf(alpha, beta, delta, mu, x).unwrap(),
            );
            assert!(rel(hyp.pdf(x), h) <= 1e-12, "hyperbolic x = {x}");
            assert!(rel(nig.pdf(x), n) <= 1e-12, "NIG x = {x}");
        }
    }
}

#[test]
fn vg1_coefficient_reads() {
    let coeffs = |c: &LimitCase64, x: f64| limit_operator(c).unwrap().coefficients(x).unwrap();
    for x in probes() {
        let (a, b, c) = coeffs(
            &LimitCase64::Vg1 {
                r: 2.0,
                theta: 0.0,
                sigma: 1.3,
            },
            x,
        );
        let (la, lb, lc) = coeffs(&LimitCase64::Laplace { sigma: 1.3 }, x);
        assert!((a - la).abs() <= 1e-12 && (b - lb).abs() <= 1e-12 && (c - lc).abs() <= 1e-12);

        let (a, b, c) = coeffs(
            &LimitCase64::Vg1 {
                r: 1.0,
                theta: 0.0,
                sigma: 0.6,
            },
            x,
        );
        let (pa, pb, pc) = coeffs(
            &LimitCase64::ProductNormal {
                sigma_x: 1.5,
                sigma_y: 0.4,
            },
            x,
        );
        assert!((a - pa).abs() <= 1e-12 && (b - pb).abs() <= 1e-12 && (c - pc).abs() <= 1e-12);

        // σ = 0 leaves 2θ x f' + (rθ - x) f = 2θ [x f' + (r/2 - x/(2θ)) f]
        let (r, theta) = (3.0, 0.8);
        let (a, b, c) = coeffs(
            &LimitCase64::Vg1 {
                r,
                theta,
                sigma: 0.0,
            },
            x,
        );
        let (_, gb, gc) = coeffs(
            &LimitCase64::Gamma {
                shape: r / 2.0,
                rate: 1.0 / (2.0 * theta),
            },
            x,
        );
        assert_eq!(a, 0.0);
        assert!((b - 2.0 * theta * gb).abs() <= 1e-12 && (c - 2.0 * theta * gc).abs() <= 1e-12);
    }
}

#[test]
fn limit_densities_are_gh_limits() {
    // δ → 0 towards VG2
    let vg = LimitCase64::Vg2 {
        nu: 0.5,
        alpha: 2.0,
        beta: 0.5,
    };
    let gh = GhParams64::new(1.0, 2.0, 0.5, 1e-6, 0.0).unwrap();
    // α, β → 0 towards Student's t
    let t = LimitCase64::StudentT {
        nu: 3.0,
        delta: 1.2,
        mu: 0.3,
    };
    let gt = GhParams64::new(-1.5, 1e-7, 0.0, 1.2, 0.3).unwrap();
    for x in [-3.0_f64, -0.7, 0.4, 2.5] {
        assert!(
            rel(gh.pdf(x), limit_pdf(&vg, x).unwrap()) <= 1e-5,
            "vg2 x = {x}"
        );
        assert!(
            rel(gt.pdf(x), limit_pdf(&t, x).unwrap()) <= 1e-5,
            "t x = {x}"
        );
    }
}

#[test]
fn limit_densities_normalize() {
    let cfg = QuadratureConfig::new(1e-10, 1e-12, 2000).unwrap();
    for name in ["vg2", "vg1", "normal", "laplace", "student_t"] {
        let c = LimitCase64::default_for(name).unwrap();
        let f = |x: f64| limit_pdf(&c, x).unwrap_or(0.0);
        let total = integrate(f, f64::NEG_INFINITY, 0.0, &cfg).unwrap().value
            + integrate(f, 0.0, f64::INFINITY, &cfg).unwrap().value;
        assert!((total - 1.0).abs() <= 1e-8, "{name}: {total}");
    }
}

fn gig_grid() -> Vec<f64> {
    (0..=196).map(|i| 0.2 + 0.05 * i as f64).collect()
}

#[test]
fn gig_solution_solves_its_equation() {
    for (l, a, b) in [
        (1.0, 2.0, 1.0),
        (-1.5, 1.0, 3.0),
        (0.3, 0.5, 0.5),
        (4.0, 3.0, 0.2),
    ] {
        let p = GigParams64::new(l, a, b).unwrap();
        for h in ["arctan", "sin", "indicator:0:1"] {
            let spec = TestFunctionSpec::parse(h).unwrap();
            let s = GigSteinSolution::new(p, spec.clone(), QuadratureConfig::default()).unwrap();
            for x in gig_grid() {
                let g = s.value(x).unwrap();
                let gp = s.derivative(x).unwrap();
                let res = 2.0 * x * x * gp + (-a * x * x + 2.0 * (l + 1.0) * x + b) * g
                    - (spec.eval(x) - s.mean_h());
                assert!(res.abs() <= 1e-6, "GIG({l}, {a}, {b}) {h} x = {x}: {res:e}");
                let u = s.value_form(x, GigForm::FromZero).unwrap();
                let v = s.value_form(x, GigForm::FromInfinity).unwrap();
                assert!(
                    (u.value - v.value).abs() <= 2.0 * (u.error + v.error) + 1e-12,
                    "forms at x = {x}"
                );
            }
        }
    }
}

#[test]
fn gig_solution_matches_high_precision_reference() {
    // 30-digit quadrature at (λ, a, b) = (1, 2, 1), h = 1_{(0,1]}
    let p = GigParams64::new(1.0, 2.0, 1.0).unwrap();
    let s = GigSteinSolution::new(
        p,
        TestFunctionSpec::indicator(0.0, 1.0).unwrap(),
        QuadratureConfig::default(),
    )
    .unwrap();
    assert!((s.mean_h() - 0.381_848_152_233_835_67).abs() <= 1e-12);
    assert!((s.value(0.2).unwrap() - 0.386_291_847_521_241_65).abs() <= 1e-10);
    let bound = gig_solution_bound(&p, 1.0 - s.mean_h()).unwrap();
    assert!((bound - 0.374_076_464_223_951_51).abs() <= 1e-10);
}

#[test]
fn gig_bound_holds_for_smooth_test_functions_at_reference_parameters() {
    let p = GigParams64::new(1.0, 2.0, 1.0).unwrap();
    for (h, lo, hi) in [
        ("arctan", 0.0, std::f64::consts::FRAC_PI_2),
        ("sin", -1.0, 1.0),
    ] {
        let s = GigSteinSolution::new(
            p,
            TestFunctionSpec::parse(h).unwrap(),
            QuadratureConfig::default(),
        )
        .unwrap();
        let bound = s.bound(lo, hi).unwrap();
        let sup = gig_grid()
            .into_iter()
            .map(|x| s.value(x).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(sup <= bound, "{h}: sup {sup} > bound {bound}");
    }
}

#[test]
fn gig_bound_fails_near_zero_for_the_indicator() {
    // g(0+) = (h(0+) - E h)/b, which exceeds ‖h - E h‖/(2 l² p(l)) when 2 l² p(l) > b
    let p = GigParams64::new(1.0, 2.0, 1.0).unwrap();
    let s = GigSteinSolution::new(
        p,
        TestFunctionSpec::indicator(0.0, 1.0).unwrap(),
        QuadratureConfig::default(),
    )
    .unwrap();
    let bound = s.bound(0.0, 1.0).unwrap();
    let l = p.mean();
    assert!(2.0 * l * l * p.pdf(l).unwrap() > p.b());
    assert!(s.value(0.2).unwrap() > bound);
    let near_zero = s.value(1e-3).unwrap();
    assert!((near_zero - (1.0 - s.mean_h()) / p.b()).abs() <= 0.01);
}
