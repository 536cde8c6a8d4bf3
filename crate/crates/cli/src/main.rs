//! `gh-stein`: densities, sampling, moments, Stein diagnostics and limit checks
//! for the generalized hyperbolic family.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gh_stein::distributions::parse_values;
use gh_stein::limits::{default_approach, default_probes, gh_to_limit_convergence};
use gh_stein::moments::moment_table;
use gh_stein::stein::{default_family, stein_discrepancy};
use gh_stein::{
    Error, GhParams64, LimitCase64, QuadratureConfig, RandomStream, SampleSet64, SteinSolution64,
    TestFunctionSpec,
};
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "gh-stein",
    version,
    about = "Generalized hyperbolic distributions and Stein diagnostics"
)]
struct Cli {
    /// Worker threads (default: GH_STEIN_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<GhParams64, Error> {
        GhParams64::new(self.lambda, self.alpha, self.beta, self.delta, self.mu)
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Read evaluation points from a JSON array or one-column CSV instead.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    points_file: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density, log-density and distribution function on a grid.
    Pdf {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw a reproducible sample.
    Sample {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stein discrepancy of a data file against a GH model (exit 1 on rejection).
    SteinCheck {
        #[command(flatten)]
        params: ParamArgs,
        /// Sample file (JSON or CSV as written by `sample`, or a bare list).
        #[arg(long)]
        input: PathBuf,
        /// Reject when any |z| exceeds this.
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Raw moments M_0..M_k (requires mu = 0).
    Moments {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence of the GH operator to a limiting case (exit 1 if not converged).
    Limits {
        /// Case name (vg2, student_t, gig) or a JSON object such as
        /// '{"case":"gig","lambda":1,"a":2,"b":1}'.
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solution of the Stein equation for a test function.
    Solve {
        #[command(flatten)]
        params: ParamArgs,
        /// Test function: const, const:c, indicator:a:b, sin, arctan.
        #[arg(long)]
        h: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(f) = configure_threads(cli.threads) {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("GH_STEIN_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(v.trim().parse::<usize>().map_err(|_| {
                usage(format!(
                    "GH_STEIN_THREADS must be a positive integer, got {v:?}"
                ))
            })?),
            _ => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Pdf {
            params,
            grid,
            output,
        } => pdf(&params.params()?, &grid, &output),
        Command::Sample {
            params,
            n,
            seed,
            stream,
            output,
        } => sample(&params.params()?, n, seed, stream, &output),
        Command::SteinCheck {
            params,
            input,
            threshold,
            out,
        } => stein_check(&params.params()?, &input, threshold, out.as_deref()),
        Command::Moments { params, k, output } => moments(&params.params()?, k, &output),
        Command::Limits {
            case,
            tolerance,
            out,
        } => limits(&case, tolerance, out.as_deref()),
        Command::Solve {
            params,
            h,
            grid,
            output,
        } => solve(&params.params()?, &h, &grid, &output),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn grid_points(grid: &GridArgs, p: &GhParams64) -> CliResult<Vec<f64>> {
    if let Some(path) = &grid.points_file {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let pts: Vec<f64> = parse_values(&text)?;
        if pts.is_empty() {
            return Err(usage(format!("{}: no points", path.display())));
        }
        if let Some(x) = pts.iter().find(|x| !x.is_finite()) {
            return Err(usage(format!("evaluation point {x} is not finite")));
        }
        return Ok(pts);
    }
    let spread = 5.0 * p.variance().sqrt();
    let from = grid.from.unwrap_or(p.mean() - spread);
    let to = grid.to.unwrap_or(p.mean() + spread);
    if !from.is_finite() || !to.is_finite() || from > to {
        return Err(usage(format!("invalid grid [{from}, {to}]")));
    }
    match grid.points {
        0 => Err(usage("--points must be positive")),
        1 => Ok(vec![from]),
        n => Ok((0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect()),
    }
}

#[derive(Serialize)]
struct PdfRow {
    x: f64,
    pdf: f64,
    log_pdf: f64,
    cdf: f64,
}

fn pdf(p: &GhParams64, grid: &GridArgs, output: &OutputArgs) -> CliResult<u8> {
    let xs = grid_points(grid, p)?;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let cfg = QuadratureConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_subdivisions: 4000,
    };
    let cdf_sorted = p.cdf_grid(&sorted, &cfg)?;
    let mut cdf = vec![0.0; xs.len()];
    for (k, &i) in order.iter().enumerate() {
        cdf[i] = cdf_sorted[k];
    }
    let rows: Vec<PdfRow> = xs
        .iter()
        .zip(&cdf)
        .map(|(&x, &c)| PdfRow {
            x,
            pdf: p.pdf(x),
            log_pdf: p.log_pdf(x),
            cdf: c,
        })
        .collect();
    let text = match output.format {
        Format::Json => to_json(&json!({ "params": p, "rows": rows }))?,
        Format::Csv => {
            let mut s = String::from("x,pdf,log_pdf,cdf\n");
            for r in &rows {
                let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.x, r.pdf, r.log_pdf, r.cdf);
            }
            s
        }
    };
    emit(output.out.as_deref(), &text)?;
    Ok(0)
}

fn sample(p: &GhParams64, n: usize, seed: u64, stream: u64, output: &OutputArgs) -> CliResult<u8> {
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    let s = p.sample(n, RandomStream::new(seed, stream))?;
    let text = match output.format {
        Format::Json => s.to_json_string() + "\n",
        Format::Csv => s.to_csv_string(),
    };
    emit(output.out.as_deref(), &text)?;
    let summary = json!({
        "n": n,
        "seed": seed,
        "stream": stream,
        "sample_mean": s.mean(),
        "sample_variance": s.variance(),
        "mean": p.mean(),
        "variance": p.variance(),
    });
    let summary = to_json(&summary)?;
    if output.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(0)
}

fn stein_check(p: &GhParams64, input: &Path, threshold: f64, out: Option<&Path>) -> CliResult<u8> {
    if !(threshold > 0.0) {
        return Err(usage("--threshold must be positive"));
    }
    let data = SampleSet64::read(input)?;
    let centered = data.shifted(p.mu());
    let report = stein_discrepancy(&centered, &p.centered(), &default_family())?;
    let pass = report.passes(threshold);
    let doc = json!({
        "params": p,
        "threshold": threshold,
        "n": report.n,
        "results": report.results,
        "max_abs_z": report.max_abs_z,
        "pass": pass,
    });
    emit(out, &to_json(&doc)?)?;
    Ok(if pass { 0 } else { 1 })
}

fn moments(p: &GhParams64, k: usize, output: &OutputArgs) -> CliResult<u8> {
    let table = moment_table(p, k)?;
    let text = match output.format {
        Format::Json => to_json(&table)?,
        Format::Csv => {
            let mut s = String::from("k,moment,provenance\n");
            for (i, (m, src)) in table.moments().iter().zip(table.provenance()).enumerate() {
                let src = serde_json::to_value(src)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default();
                let _ = writeln!(s, "{i},{m:?},{src}");
            }
            s
        }
    };
    emit(output.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_case(spec: &str) -> CliResult<LimitCase64> {
    let trimmed = spec.trim();
    let case: LimitCase64 = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| usage(format!("invalid case {spec:?}: {e}")))?
    } else {
        LimitCase64::default_for(trimmed)?
    };
    case.validate()?;
    Ok(case)
}

fn limits(spec: &str, tolerance: f64, out: Option<&Path>) -> CliResult<u8> {
    if !(tolerance > 0.0) {
        return Err(usage("--tolerance must be positive"));
    }
    let case = parse_case(spec)?;
    let approach = default_approach(&case)?;
    let report = gh_to_limit_convergence(&case, &approach, &default_probes(&case))?;
    let pass = report.passes(tolerance);
    let doc = json!({ "tolerance": tolerance, "pass": pass, "report": report });
    emit(out, &to_json(&doc)?)?;
    Ok(if pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct SolveRow {
    x: f64,
    f: f64,
    f_prime: f64,
    error: f64,
}

fn solve(p: &GhParams64, h: &str, grid: &GridArgs, output: &OutputArgs) -> CliResult<u8> {
    let spec = TestFunctionSpec::parse(h)?;
    let name = spec.name().to_owned();
    let cfg = QuadratureConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        max_subdivisions: 2000,
    };
    let solution = SteinSolution64::new(p.centered(), spec, cfg)?;
    let xs = grid_points(grid, p)?;
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let pt = solution.evaluate(x - p.mu())?;
        rows.push(SolveRow {
            x,
            f: pt.value,
            f_prime: pt.derivative,
            error: pt.error,
        });
    }
    let text = match output.format {
        Format::Json => to_json(&json!({
            "params": p,
            "h": name,
            "mean_h": solution.mean_h(),
            "rows": rows,
        }))?,
        Format::Csv => {
            let mut s = String::from("x,f,f_prime,error\n");
            for r in &rows {
                let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.x, r.f, r.f_prime, r.error);
            }
            s
        }
    };
    emit(output.out.as_deref(), &text)?;
    Ok(0)
}
