//! Command-line front end. Every subcommand writes deterministic CSV/text
//! files into `--out-dir` and maps outcomes to exit codes:
//! 0 success, 1 a check failed, 2 bad input or configuration.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::certificates::{find_admissible_constants, ConstantCertificate, DEFAULT_SAMPLE_DENSITY};
use crate::config::{parse_point, RunConfig};
use crate::field::GridFunction;
use crate::inequalities::check_lemmas;
use crate::operator::{evaluate_many, plimit_ratio};
use crate::regularity::{default_slack, oscillation_report};
use crate::solver::{solve_dirichlet, DirichletProblem};
use crate::{Error, Point, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Nonlocal p-Laplace numerics: operator, solver, certificates, Hölder scans")]
pub struct Cli {
    /// Directory receiving all output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized check of the three elementary power inequalities.
    CheckLemmas {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Search for admissible (k, eta) and write the certificate.
    CertifyConstants {
        #[command(flatten)]
        config: ConfigArg,
        /// Measure threshold: the lemma needs |{u <= 0} ∩ B_1| > delta. Defaults to `analysis.delta`.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Evaluate Lu at the points of a CSV file.
    OperatorEval {
        #[command(flatten)]
        config: ConfigArg,
        /// CSV of evaluation points, one per line (header optional).
        #[arg(long)]
        points: PathBuf,
    },
    /// Solve the Dirichlet problem and write the solution grid.
    Solve {
        #[command(flatten)]
        config: ConfigArg,
        /// Solution file, relative to --out-dir.
        #[arg(long, default_value = "u.csv")]
        out: PathBuf,
    },
    /// Dyadic oscillation table, Hölder fit and optional scan against alpha.
    Hoelder {
        #[arg(long = "in")]
        input: PathBuf,
        /// Center, e.g. `0` or `0.1,0`.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        /// Exponent to scan against; without it only the fit is reported.
        #[arg(long)]
        alpha: Option<f64>,
        /// Deepest dyadic level (clipped to the grid resolution).
        #[arg(long, default_value_t = 16)]
        j_max: usize,
        /// Additive slack of the scan; defaults to 2 sqrt(h).
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Ratio table (1-s) Lφ / (-Δ_p φ) over an s-ladder.
    LimitStudy {
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Run configuration (`section.key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Pass,
    Fail(String),
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Pass) => EXIT_OK,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("check failed: {msg}");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::SearchExhausted { .. } | Error::UndefinedFit(_) => EXIT_CHECK_FAILED,
        _ => EXIT_BAD_INPUT,
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| io_error(&cli.out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::CheckLemmas { samples } => cmd_check_lemmas(&cli.out_dir, *samples, cli.seed),
        Command::CertifyConstants { config, delta } => cmd_certify(&cli.out_dir, &config.config, *delta),
        Command::OperatorEval { config, points } => cmd_operator_eval(&cli.out_dir, &config.config, points),
        Command::Solve { config, out } => cmd_solve(&cli.out_dir, &config.config, out),
        Command::Hoelder {
            input,
            center,
            alpha,
            j_max,
            slack,
        } => cmd_hoelder(&cli.out_dir, input, center, *alpha, *j_max, *slack),
        Command::LimitStudy { config } => cmd_limit_study(&cli.out_dir, &config.config),
    })
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn create(dir: &Path, name: &Path) -> Result<BufWriter<File>> {
    let path = if name.is_absolute() { name.to_path_buf() } else { dir.join(name) };
    File::create(&path).map(BufWriter::new).map_err(|e| io_error(&path, e))
}

fn write_err(e: std::io::Error) -> Error {
    Error::Io(e)
}

fn fmt_point(x: Point, dim: usize) -> String {
    if dim == 1 {
        format!("{}", x[0])
    } else {
        format!("{},{}", x[0], x[1])
    }
}

fn cmd_check_lemmas(dir: &Path, samples: usize, seed: u64) -> Result<Outcome> {
    if samples == 0 {
        return Err(Error::config("samples", "must be positive"));
    }
    let summaries = check_lemmas(samples, seed);
    let mut w = create(dir, Path::new("lemmas.csv"))?;
    writeln!(w, "lemma,samples,violations,worst_margin,worst_a,worst_b,worst_p").map_err(write_err)?;
    for s in &summaries {
        let (a, b, p) = s.worst_sample;
        writeln!(
            w,
            "{},{},{},{},{a},{b},{p}",
            s.lemma.name(),
            s.samples,
            s.violations,
            s.worst_margin
        )
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    let failed: Vec<_> = summaries.iter().filter(|s| !s.passed()).map(|s| s.lemma.name()).collect();
    Ok(if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("violations in {}", failed.join(", ")))
    })
}

pub fn write_certificate<W: Write>(mut w: W, cert: &ConstantCertificate, dim: usize) -> Result<()> {
    let e = write_err;
    writeln!(w, "k = {}", cert.k).map_err(e)?;
    writeln!(w, "eta = {}", cert.eta).map_err(e)?;
    writeln!(w, "delta = {}", cert.delta_measure).map_err(e)?;
    writeln!(w, "theta = {}", cert.theta).map_err(e)?;
    writeln!(w, "epsilon = {}", cert.epsilon).map_err(e)?;
    writeln!(w, "branch = {:?}", cert.branch).map_err(e)?;
    writeln!(w, "x_worst = {}", fmt_point(cert.x_worst, dim)).map_err(e)?;
    writeln!(w, "rhs_bound = {}", cert.rhs_bound).map_err(e)?;
    writeln!(w, "margin = {}", cert.margin).map_err(e)?;
    for t in &cert.lhs_terms {
        writeln!(w, "term.{} = {} +- {}", t.name, t.value, t.error).map_err(e)?;
    }
    Ok(())
}

fn cmd_certify(dir: &Path, config: &Path, delta: Option<f64>) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.kernel()?;
    let delta = match delta {
        Some(d) => d,
        None => cfg.f64_required("analysis.delta")?,
    };
    let density = cfg.usize_or("analysis.sample_density", DEFAULT_SAMPLE_DENSITY)?;
    let quad = cfg.quadrature_free()?;
    let cert = match find_admissible_constants(&spec, delta, density, &quad) {
        Ok(c) => c,
        Err(Error::SearchExhausted(msg)) => return Ok(Outcome::Fail(msg)),
        Err(e) => return Err(e),
    };
    let mut w = create(dir, Path::new("certificate.txt"))?;
    write_certificate(&mut w, &cert, spec.dim)?;
    w.flush().map_err(write_err)?;
    let mut w = create(dir, Path::new("certificate_points.csv"))?;
    let coords = if spec.dim == 1 { "x" } else { "x,y" };
    writeln!(w, "{coords},branch,rhs,margin,epsilon").map_err(write_err)?;
    for p in &cert.points {
        writeln!(
            w,
            "{},{:?},{},{},{}",
            fmt_point(p.x, spec.dim),
            p.branch,
            p.rhs,
            p.margin,
            p.epsilon
        )
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    Ok(Outcome::Pass)
}

/// Reads points from a CSV file: one point per line, an optional header line.
pub fn read_points(path: &Path, dim: usize) -> Result<Vec<Point>> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut pts = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(path, e))?;
        let t = line.trim();
        if t.is_empty() || (i == 0 && t.chars().next().is_some_and(|c| c.is_alphabetic())) {
            continue;
        }
        pts.push(parse_point("points", t, dim)?);
    }
    Ok(pts)
}

fn cmd_operator_eval(dir: &Path, config: &Path, points: &Path) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.kernel()?;
    let grid = cfg.grid()?;
    let quad = cfg.quadrature(&grid)?;
    let u = GridFunction::from_profile(grid, cfg.profile("field.profile")?)?;
    let pts = read_points(points, spec.dim)?;
    let values = evaluate_many(&u, &pts, &spec, &quad)?;
    let mut w = create(dir, Path::new("operator.csv"))?;
    let coords = if spec.dim == 1 { "x" } else { "x,y" };
    writeln!(w, "{coords},value,error_bound,inner_bound,tail_bound,quadrature_estimate").map_err(write_err)?;
    for (x, v) in pts.iter().zip(&values) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_point(*x, spec.dim),
            v.value,
            v.error_bound,
            v.inner_bound,
            v.tail_bound,
            v.quadrature_estimate
        )
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    Ok(Outcome::Pass)
}

fn cmd_solve(dir: &Path, config: &Path, out: &Path) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.kernel()?;
    let grid = cfg.grid()?;
    let quad = cfg.quadrature(&grid)?;
    let solve = cfg.solve_config()?;
    let domain = cfg.domain()?;
    let problem = DirichletProblem {
        spec,
        domain,
        rhs: cfg.rhs(grid)?,
        data: cfg.problem_data(grid, domain)?,
    };
    let (u, report) = match solve_dirichlet(&problem, &solve, &quad) {
        Ok(r) => r,
        Err(Error::NonConvergence {
            sweeps,
            last_change,
            residual,
            last_iterate,
        }) => {
            last_iterate.write_csv(create(dir, out)?)?;
            return Ok(Outcome::Fail(format!(
                "no convergence after {sweeps} sweeps (last change {last_change}, residual {residual}); last iterate written"
            )));
        }
        Err(e) => return Err(e),
    };
    u.write_csv(create(dir, out)?)?;
    let mut w = create(dir, Path::new("solve_report.txt"))?;
    writeln!(w, "sweeps = {}", report.sweeps).map_err(write_err)?;
    writeln!(w, "last_change = {}", report.last_change).map_err(write_err)?;
    writeln!(w, "residual_sup = {}", report.residual_sup).map_err(write_err)?;
    writeln!(w, "free_nodes = {}", report.free_nodes).map_err(write_err)?;
    writeln!(w, "runtime_secs = {:.3}", report.runtime_secs).map_err(write_err)?;
    w.flush().map_err(write_err)?;
    log::info!("solve finished in {:.2}s", report.runtime_secs);
    Ok(Outcome::Pass)
}

fn cmd_hoelder(
    dir: &Path,
    input: &Path,
    center: &str,
    alpha: Option<f64>,
    j_max: usize,
    slack: Option<f64>,
) -> Result<Outcome> {
    let file = File::open(input).map_err(|e| io_error(input, e))?;
    let u = GridFunction::read_csv(BufReader::new(file))?;
    let x0 = parse_point("center", center, u.dim())?;
    if !u.grid.contains(x0) {
        return Err(Error::config("center", "must lie inside the grid box"));
    }
    let slack = slack.unwrap_or_else(|| default_slack(u.grid.spacing));
    let report = oscillation_report(&u, x0, j_max, alpha, slack);
    let mut w = create(dir, Path::new("oscillation.csv"))?;
    writeln!(w, "j,radius,osc,threshold,ok").map_err(write_err)?;
    for (j, (r, osc)) in report.radii.iter().zip(&report.osc_values).enumerate() {
        let (thr, ok) = match &report.scan {
            Some(s) => (s.thresholds[j].to_string(), (s.first_failure != Some(j)).to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(w, "{j},{r},{osc},{thr},{ok}").map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    let mut w = create(dir, Path::new("hoelder_report.txt"))?;
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());
    writeln!(w, "alpha_hat = {}", opt(report.alpha_hat)).map_err(write_err)?;
    writeln!(w, "fit_quality = {}", opt(report.fit_quality)).map_err(write_err)?;
    if let Some(scan) = &report.scan {
        writeln!(w, "alpha = {}", scan.alpha).map_err(write_err)?;
        writeln!(w, "slack = {}", scan.slack).map_err(write_err)?;
        writeln!(w, "passed = {}", scan.passed).map_err(write_err)?;
        writeln!(w, "first_failure = {}", scan.first_failure.map_or("none".into(), |j| j.to_string()))
            .map_err(write_err)?;
        writeln!(w, "max_alpha = {}", opt(scan.max_alpha)).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    Ok(if report.passed() {
        Outcome::Pass
    } else {
        Outcome::Fail(format!("oscillation exceeds the alpha = {} envelope", alpha.unwrap_or(f64::NAN)))
    })
}

fn cmd_limit_study(dir: &Path, config: &Path) -> Result<Outcome> {
    let cfg = RunConfig::load(config)?;
    let spec = cfg.kernel()?;
    let s_list = cfg
        .f64_list("limit.s_list")?
        .ok_or_else(|| Error::config("limit.s_list", "missing key"))?;
    let points = cfg
        .point_list("limit.points", spec.dim)?
        .ok_or_else(|| Error::config("limit.points", "missing key"))?;
    let profile = match cfg.get("limit.profile") {
        Some(_) => cfg.profile("limit.profile")?,
        None => crate::field::AnalyticProfile::Beta,
    };
    let table = plimit_ratio(&profile, &spec, &s_list, &points)?;
    let mut w = create(dir, Path::new("limit_table.csv"))?;
    writeln!(w, "p,s,x,value,comparator,ratio").map_err(write_err)?;
    for c in &table.cells {
        let ratio = c.ratio.map_or(String::new(), |r| r.to_string());
        writeln!(w, "{},{},{},{},{},{ratio}", table.p, c.s, c.x[0], c.value, c.comparator).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    let mut w = create(dir, Path::new("limit_spread.csv"))?;
    writeln!(w, "s,spread").map_err(write_err)?;
    for (s, spread) in &table.spreads {
        writeln!(w, "{s},{}", spread.map_or(String::new(), |v| v.to_string())).map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    let spreads: Vec<f64> = table.spreads.iter().filter_map(|(_, v)| *v).collect();
    let decreasing = spreads.windows(2).all(|w| w[1] < w[0]);
    Ok(if decreasing {
        Outcome::Pass
    } else {
        Outcome::Fail("spread is not strictly decreasing along the s-ladder".into())
    })
}
