//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails that is not listed in `KNOWN_RED`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::{Command, ExitCode};
use std::time::Instant;

use gh_stein::bessel::{bessel_i, bessel_k};
use gh_stein::limits::{
    default_approach, default_probes, gh_to_limit_convergence, hyperbolic_pdf, limit_operator,
    nig_pdf, GigSteinSolution,
};
use gh_stein::moments::{moment_oracle, moment_table};
use gh_stein::stein::{
    default_family, density_ode_residual, gh_operator, stein_discrepancy, SolutionForm,
    SteinSolution, TestFunctionSpec,
};
use gh_stein::{GhParams64, GigParams64, LimitCase64, QuadratureConfig, RandomStream};
use rayon::prelude::*;

const K_HALF_TOL: f64 = 1e-12;
const WRONSKIAN_TOL: f64 = 1e-10;
const BESSEL_ODE_TOL: f64 = 1e-6;
const NORMALIZATION_TOL: f64 = 1e-8;
const DENSITY_ODE_TOL: f64 = 1e-8;
const Z_THRESHOLD: f64 = 4.0;
const MC_N: usize = 1_000_000;
const MC_SEED: u64 = 20_261_016;
const PLUG_BACK_TOL: f64 = 1e-4;
const FORM_FACTOR: f64 = 2.0;
const REFINEMENT_TOL: f64 = 0.01;
const MOMENT_TOL: f64 = 1e-5;
const LIMIT_TOL: f64 = 1e-3;
const IDENTITY_TOL: f64 = 1e-12;
const GIG_PLUG_BACK_TOL: f64 = 1e-6;
const TAIL_TOL: f64 = 0.02;
const POWER_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Criteria expected to fail, with the reason.
const KNOWN_RED: &[(&str, &str)] = &[(
    "9b",
    "g(0+) = (h(0+) - E h)/b exceeds the bound whenever 2 l^2 p(l) > b and |h - E h| peaks near 0",
)];

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid() -> Vec<GhParams64> {
    let mut out = Vec::new();
    for lambda in [-1.0, 0.5, 2.0] {
        for alpha in [1.0, 2.0, 5.0] {
            for beta in [0.0, alpha / 2.0, -alpha / 2.0] {
                out.push(GhParams64::new(lambda, alpha, beta, 1.0, 0.0).unwrap());
            }
        }
    }
    out
}

fn fmax(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn d1<G: Fn(f64) -> f64>(f: G, x: f64) -> f64 {
    let h = 1e-3 * x.min(1.0);
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

fn d2<G: Fn(f64) -> f64>(f: G, x: f64) -> f64 {
    let h = 1e-2 * x.min(1.0);
    (16.0 * (f(x + h) + f(x - h)) - (f(x + 2.0 * h) + f(x - 2.0 * h)) - 30.0 * f(x))
        / (12.0 * h * h)
}

fn bessel_foundation() -> Outcome {
    let xs: Vec<f64> = (0..=1000).map(|i| 0.1 + 49.9 * i as f64 / 1000.0).collect();
    let k_half = fmax(xs.iter().map(|&x| {
        let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
        ((bessel_k(0.5, x).unwrap() - want) / want).abs()
    }));
    let orders: Vec<f64> = (-20..=20).map(|i| 0.25 * i as f64).collect();
    let points: Vec<f64> = (0..60)
        .map(|i| 0.1 * 300f64.powf(i as f64 / 59.0))
        .collect();
    let (mut wr, mut ode) = (0.0_f64, 0.0_f64);
    for &nu in &orders {
        for &x in &points {
            let k = |t: f64| bessel_k(nu, t).unwrap();
            let i = |t: f64| bessel_i(nu, t).unwrap();
            let (kx, ix, kp, ip) = (k(x), i(x), d1(k, x), d1(i, x));
            let w = kx * ip - kp * ix;
            wr = wr.max((w - 1.0 / x).abs() / (kx * ip).abs().max((kp * ix).abs()).max(1.0 / x));
            for r in [&k as &dyn Fn(f64) -> f64, &i] {
                let terms = [x * x * d2(r, x), x * d1(r, x), -(x * x + nu * nu) * r(x)];
                let scale: f64 = terms.iter().map(|t| t.abs()).sum();
                ode = ode.max(terms.iter().sum::<f64>().abs() / scale);
            }
        }
    }
    outcome(
        k_half <= K_HALF_TOL && wr <= WRONSKIAN_TOL && ode <= BESSEL_ODE_TOL,
        format!("K_1/2 rel {k_half:.1e}, Wronskian {wr:.1e}, ODE {ode:.1e}"),
    )
}

fn density_normalization() -> Outcome {
    let cfg = QuadratureConfig::new(1e-12, 1e-14, 4000).unwrap();
    let gh = fmax(
        grid()
            .par_iter()
            .map(|p| (p.expectation(|_| 1.0, &[], &cfg).unwrap().value - 1.0).abs())
            .collect::<Vec<_>>()
            .into_iter(),
    );
    let gig = fmax(grid().iter().map(|p| {
        let g = GigParams64::new(p.lambda(), p.gamma().powi(2), p.delta().powi(2)).unwrap();
        (g.expectation(|_| 1.0, &cfg).unwrap().value - 1.0).abs()
    }));
    outcome(
        gh <= NORMALIZATION_TOL && gig <= NORMALIZATION_TOL,
        format!("max |1 - ∫p| GH {gh:.1e}, GIG {gig:.1e}"),
    )
}

fn density_ode() -> Outcome {
    let worst = fmax(grid().iter().flat_map(|p| {
        [-3.0, -1.0, -0.5, 0.5, 1.0, 3.0].map(|x: f64| {
            let (res, scale) = density_ode_residual(p, x).unwrap();
            res.abs() / (scale * (1.0 + x * x))
        })
    }));
    outcome(
        worst <= DENSITY_ODE_TOL,
        format!("max normalized residual {worst:.1e}"),
    )
}

fn characterisation() -> Outcome {
    let fam = default_family::<f64>();
    let worst = fmax(grid().iter().enumerate().map(|(i, p)| {
        let s = p
            .sample(MC_N, RandomStream::new(MC_SEED, i as u64))
            .unwrap();
        stein_discrepancy(&s, p, &fam).unwrap().max_abs_z
    }));
    outcome(
        worst <= Z_THRESHOLD,
        format!("max |z| {worst:.2} over 27 laws x 4 functions, n = {MC_N}"),
    )
}

fn plug_back() -> Outcome {
    let cfg = QuadratureConfig::default();
    let xs: Vec<f64> = (0..=19)
        .map(|i| 0.25 + 0.25 * i as f64)
        .flat_map(|x| [x, -x])
        .collect();
    let rows: Vec<(f64, f64)> = grid()
        .par_iter()
        .map(|p| {
            let s = SteinSolution::new(*p, TestFunctionSpec::sin(), cfg).unwrap();
            let op = gh_operator(p).unwrap();
            let res = fmax(xs.iter().map(|&x| {
                let pt = s.evaluate(x).unwrap();
                let f2 = (s.derivative(x + 1e-4).unwrap() - s.derivative(x - 1e-4).unwrap()) / 2e-4;
                (op.act(x, pt.value, pt.derivative, f2).unwrap() - s.h_tilde(x)).abs()
            }));
            let forms = fmax((-20..=20).map(|i| {
                let x = 0.5 * i as f64;
                let u = s.evaluate_form(x, SolutionForm::Upper).unwrap();
                let l = s.evaluate_form(x, SolutionForm::Lower).unwrap();
                (u.value - l.value).abs() / (FORM_FACTOR * (u.error + l.error))
            }));
            (res, forms)
        })
        .collect();
    let res = fmax(rows.iter().map(|r| r.0));
    let forms = fmax(rows.iter().map(|r| r.1));
    outcome(
        res <= PLUG_BACK_TOL && forms <= 1.0,
        format!("max residual {res:.1e}; max |upper - lower| / (2 x error bound) {forms:.1e}"),
    )
}

fn boundedness() -> Outcome {
    let cfg = QuadratureConfig::default();
    let sup = |s: &SteinSolution<f64>, step: f64| {
        let n = (100.0 / step).round() as i64;
        (0..=n)
            .map(|i| -50.0 + step * i as f64)
            .fold((0.0_f64, 0.0_f64), |(f, d), x| {
                let pt = s.evaluate(x).unwrap();
                (f.max(pt.value.abs()), d.max(pt.derivative.abs()))
            })
    };
    let changes: Vec<(f64, bool)> = grid()
        .par_iter()
        .map(|p| {
            let s = SteinSolution::new(*p, TestFunctionSpec::indicator(0.0, 1.0).unwrap(), cfg)
                .unwrap();
            let (f1, g1) = sup(&s, 0.05);
            let (f2, g2) = sup(&s, 0.025);
            let finite = [f1, g1, f2, g2].iter().all(|v| v.is_finite());
            (((f2 - f1).abs() / f2).max((g2 - g1).abs() / g2), finite)
        })
        .collect();
    let worst = fmax(changes.iter().map(|c| c.0));
    let finite = changes.iter().all(|c| c.1);
    outcome(
        finite && worst < REFINEMENT_TOL,
        format!("all sups finite: {finite}; max relative change under refinement {worst:.1e}"),
    )
}

fn moments() -> Outcome {
    let (mut rel, mut odd, mut k2) = (0.0_f64, 0.0_f64, 0.0_f64);
    for p in grid() {
        let t = moment_table(&p, 8).unwrap();
        for k in 4..=8 {
            let want = moment_oracle(&p, k as i32).unwrap().value;
            rel = rel.max((t.get(k).unwrap() - want).abs() / want.abs().max(1.0));
        }
        if p.beta() == 0.0 {
            odd = odd.max(fmax([1, 3, 5, 7].iter().map(|&k| t.get(k).unwrap().abs())));
        }
        k2 = k2.max(t.recurrence_residual(2).unwrap().abs());
    }
    outcome(
        rel <= MOMENT_TOL && odd == 0.0 && k2 <= 1e-13,
        format!(
            "M_4..M_8 max rel {rel:.1e}; beta = 0 odd moments max {odd:e}; k = 2 residual {k2:.1e}"
        ),
    )
}

fn limits() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["vg2", "student_t", "gig"] {
        let case = LimitCase64::default_for(name).unwrap();
        let r = gh_to_limit_convergence(
            &case,
            &default_approach(&case).unwrap(),
            &default_probes(&case),
        )
        .unwrap();
        pass &= r.passes(LIMIT_TOL);
        parts.push(format!(
            "{name} monotone {} final {:.1e}",
            r.monotone, r.final_max_deviation
        ));
    }
    let xs: Vec<f64> = (-12..=12).map(|i| 0.5 * i as f64 + 0.1).collect();
    let mut ident = 0.0_f64;
    for (a, b, d, m) in [
        (2.0, 0.5, 1.0, 0.0),
        (1.0, -0.6, 0.4, 1.5),
        (5.0, 2.5, 2.0, -1.0),
    ] {
        let hyp = GhParams64::new(1.0, a, b, d, m).unwrap();
        let nig = GhParams64::new(-0.5, a, b, d, m).unwrap();
        for &x in &xs {
            let h = hyperbolic_pdf(a, b, d, m, x).unwrap();
            let n = nig_pdf(a, b, d, m, x).unwrap();
            ident = ident
                .max(((hyp.pdf(x) - h) / h).abs())
                .max(((nig.pdf(x) - n) / n).abs());
        }
    }
    let coeffs = |c: LimitCase64, x: f64| limit_operator(&c).unwrap().coefficients(x).unwrap();
    let diff = |u: (f64, f64, f64), v: (f64, f64, f64)| {
        (u.0 - v.0)
            .abs()
            .max((u.1 - v.1).abs())
            .max((u.2 - v.2).abs())
    };
    for &x in &xs {
        ident = ident.max(diff(
            coeffs(
                LimitCase64::Vg1 {
                    r: 2.0,
                    theta: 0.0,
                    sigma: 1.3,
                },
                x,
            ),
            coeffs(LimitCase64::Laplace { sigma: 1.3 }, x),
        ));
        ident = ident.max(diff(
            coeffs(
                LimitCase64::Vg1 {
                    r: 1.0,
                    theta: 0.0,
                    sigma: 0.6,
                },
                x,
            ),
            coeffs(
                LimitCase64::ProductNormal {
                    sigma_x: 1.5,
                    sigma_y: 0.4,
                },
                x,
            ),
        ));
        let g = coeffs(
            LimitCase64::Gamma {
                shape: 1.5,
                rate: 1.0 / 1.6,
            },
            x,
        );
        ident = ident.max(diff(
            coeffs(
                LimitCase64::Vg1 {
                    r: 3.0,
                    theta: 0.8,
                    sigma: 0.0,
                },
                x,
            ),
            (0.0, 1.6 * g.1, 1.6 * g.2),
        ));
    }
    pass &= ident <= IDENTITY_TOL;
    parts.push(format!("exact identities {ident:.1e}"));
    outcome(pass, parts.join("; "))
}

fn gig_grid() -> Vec<f64> {
    (0..=196).map(|i| 0.2 + 0.05 * i as f64).collect()
}

fn gig_h() -> [(&'static str, f64, f64); 3] {
    [
        ("arctan", 0.0, FRAC_PI_2),
        ("sin", -1.0, 1.0),
        ("indicator:0:1", 0.0, 1.0),
    ]
}

fn gig_plug_back() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst = 0.0_f64;
    for (l, a, b) in [
        (1.0, 2.0, 1.0),
        (-1.5, 1.0, 3.0),
        (0.3, 0.5, 0.5),
        (4.0, 3.0, 0.2),
    ] {
        let p = GigParams64::new(l, a, b).unwrap();
        for (h, _, _) in gig_h() {
            let spec = TestFunctionSpec::parse(h).unwrap();
            let s = GigSteinSolution::new(p, spec.clone(), cfg).unwrap();
            worst = worst.max(fmax(gig_grid().into_iter().map(|x| {
                let (g, gp) = (s.value(x).unwrap(), s.derivative(x).unwrap());
                (2.0 * x * x * gp + (-a * x * x + 2.0 * (l + 1.0) * x + b) * g
                    - (spec.eval(x) - s.mean_h()))
                .abs()
            })));
        }
    }
    outcome(
        worst <= GIG_PLUG_BACK_TOL,
        format!("max residual {worst:.1e} on [0.2, 10], 4 laws x 3 functions"),
    )
}

fn gig_bound() -> Outcome {
    let p = GigParams64::new(1.0, 2.0, 1.0).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for (h, lo, hi) in gig_h() {
        let s = GigSteinSolution::new(
            p,
            TestFunctionSpec::parse(h).unwrap(),
            QuadratureConfig::default(),
        )
        .unwrap();
        let bound = s.bound(lo, hi).unwrap();
        let (sup, at) = gig_grid()
            .into_iter()
            .map(|x| (s.value(x).unwrap().abs(), x))
            .fold((0.0, 0.0), |m, v| if v.0 > m.0 { v } else { m });
        pass &= sup <= bound;
        parts.push(format!(
            "{h}: sup|g| {sup:.4} at x = {at} vs bound {bound:.4}"
        ));
    }
    outcome(pass, format!("GIG(1, 2, 1) {}", parts.join("; ")))
}

fn tails() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [
        GhParams64::new(1.0, 2.0, 0.5, 1.0, 0.0).unwrap(),
        GhParams64::new(0.5, 1.0, 0.0, 1.0, 0.0).unwrap(),
        GhParams64::new(-0.5, 3.0, -1.0, 1.0, 0.5).unwrap(),
        GhParams64::new(2.0, 1.5, 0.75, 0.5, -1.0).unwrap(),
    ] {
        let ratio = |x: f64| (p.log_pdf(x) - p.log_tail_leading(x)).exp();
        let (r100, r200) = (ratio(100.0), ratio(200.0));
        pass &= (r200 - 1.0).abs() <= TAIL_TOL && (r200 - 1.0).abs() < (r100 - 1.0).abs();
        parts.push(format!("{r100:.4} -> {r200:.4}"));
    }
    outcome(
        pass,
        format!("ratio at x = 100 -> 200: {}", parts.join(", ")),
    )
}

fn diagnostic_power() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gh-stein");
    let dir = tempfile::tempdir().unwrap();
    let gh = ["--lambda", "1", "--beta", "0.5", "--delta", "1"];
    let (mut matched, mut perturbed) = (Vec::new(), Vec::new());
    for seed in POWER_SEEDS {
        let file = dir.path().join(format!("s{seed}.json"));
        let status = Command::new(bin)
            .args([
                "sample",
                "--alpha",
                "2",
                "--n",
                &MC_N.to_string(),
                "--seed",
                &seed.to_string(),
                "--out",
                file.to_str().unwrap(),
            ])
            .args(gh)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        let check = |alpha: &str| {
            Command::new(bin)
                .args([
                    "stein-check",
                    "--alpha",
                    alpha,
                    "--input",
                    file.to_str().unwrap(),
                ])
                .args(gh)
                .output()
                .unwrap()
                .status
                .code()
                .unwrap()
        };
        matched.push(check("2"));
        perturbed.push(check("2.4"));
    }
    let pass = matched.iter().all(|&c| c == 0) && perturbed.iter().all(|&c| c == 1);
    outcome(
        pass,
        format!("exit codes matched {matched:?}, alpha x 1.2 {perturbed:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1", "Bessel foundation", bessel_foundation),
        ("2", "density normalization", density_normalization),
        ("3", "density ODE", density_ode),
        ("4", "characterisation necessity", characterisation),
        (
            "5",
            "Stein solution plug-back and form agreement",
            plug_back,
        ),
        ("6", "Stein solution boundedness", boundedness),
        ("7", "moment recurrence", moments),
        ("8", "limit reductions", limits),
        ("9a", "GIG Stein solution plug-back", gig_plug_back),
        ("9b", "GIG Stein solution bound", gig_bound),
        ("10", "tail behaviour", tails),
        ("11", "diagnostic power", diagnostic_power),
    ];
    let mut unexpected = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let o = run();
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>3} {status} {title}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        match (o.pass, known) {
            (false, Some((_, why))) => println!("              known failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("              listed as a known failure but passed");
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected result(s)");
        ExitCode::FAILURE
    }
}
