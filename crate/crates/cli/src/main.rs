//! Command-line front end: solve, verify, spectrum, moulton, gallery and
//! project subcommands over JSON problem/solution files.
//!
//! Exit codes: 0 success, 1 no convergence, 2 input validation,
//! 3 collision, 4 verification-gate failure.

mod files;
mod gallery;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cencon::analysis::{
    hessian_composed, radial_eigencheck, rigidity_checks, spectra_correspondence, spectrum,
    sphere_restricted_hessian, triple_q, GeometryTolerances,
};
use cencon::cochain::{coboundary0, coboundary1, mass_norm_c1, project_pm, Configuration, Masses};
use cencon::error::CcError;
use cencon::potential::{cc_residual, lambda_of, PotentialParams};
use cencon::solvers::{
    moulton_orderings, multistart_solve, rescale_to_lambda, solution_from_configuration, solve,
    solve_moulton, CCSolution, Method, SolveSettings,
};

use files::{
    positions_csv, read_json, spectrum_csv, write_json, CochainFile, ProblemFile, SettingsFile,
    SolutionFile, SpectrumFile, SpectrumSection,
};

const EXIT_NO_CONVERGENCE: i32 = 1;
const EXIT_VALIDATION: i32 = 2;
const EXIT_COLLISION: i32 = 3;
const EXIT_GATE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "cencon",
    version,
    about = "Central configurations of the n-body problem via mutual differences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for central configurations from a problem file or flags
    Solve(SolveArgs),
    /// Check a solution or positions file: residual, triples, corollaries
    Verify(VerifyArgs),
    /// Spectral report (Hessians, Morse data) for a verified solution
    Spectrum(SpectrumArgs),
    /// One collinear solution per ordering chamber
    Moulton(MoultonArgs),
    /// Canonical configurations: lagrange, euler, square, ngon, pyramid
    Gallery(GalleryArgs),
    /// Apply the cocycle projection P_m to a cochain file
    Project(ProjectArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file; flags override its fields
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated masses, e.g. 1,2,3
    #[arg(long)]
    masses: Option<String>,
    /// Equal masses (requires --n when no input file is given)
    #[arg(long, default_value_t = false)]
    equal_masses: bool,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    /// Output directory (default: $CENCON_OUTDIR or .)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write positions and spectrum CSV files
    #[arg(long, default_value_t = false)]
    csv: bool,
    /// Record wall-clock time in solution files (breaks byte determinism)
    #[arg(long, default_value_t = false)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution file, or problem file with positions
    #[arg(long)]
    input: PathBuf,
    /// Residual tolerance for the PASS verdict
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Treat --tol as an absolute bound on the residual mass-norm instead
    /// of relative to |delta q|
    #[arg(long, default_value_t = false)]
    abs_tol: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Solution file to analyze
    #[arg(long)]
    input: PathBuf,
    /// Verification gate tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    csv: bool,
}

#[derive(Args)]
struct MoultonArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    masses: Option<String>,
    #[arg(long, default_value_t = false)]
    equal_masses: bool,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GalleryName {
    Lagrange,
    Euler,
    Square,
    Ngon,
    Pyramid,
}

#[derive(Args)]
struct GalleryArgs {
    #[arg(value_enum)]
    name: GalleryName,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    masses: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    csv: bool,
}

#[derive(Args)]
struct ProjectArgs {
    /// Cochain file with n, d, masses and pair entries
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct CmdError {
    code: i32,
    message: String,
}

impl CmdError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn cc_exit_code(e: &CcError) -> i32 {
    match e {
        CcError::Collision { .. } => EXIT_COLLISION,
        CcError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        let code = e
            .downcast_ref::<CcError>()
            .map(cc_exit_code)
            .unwrap_or(EXIT_VALIDATION);
        Self {
            code,
            message: format!("{e:#}"),
        }
    }
}

impl From<CcError> for CmdError {
    fn from(e: CcError) -> Self {
        Self {
            code: cc_exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Moulton(args) => cmd_moulton(args),
        Command::Gallery(args) => cmd_gallery(args),
        Command::Project(args) => cmd_project(args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            std::process::exit(err.code);
        }
    }
}

fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf, CmdError> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("CENCON_OUTDIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("creating {}: {e}", dir.display())))?;
    Ok(dir)
}

fn parse_masses(text: &str) -> Result<Vec<f64>, CmdError> {
    let mut out = Vec::new();
    for (idx, tok) in text.split(',').enumerate() {
        let value: f64 = tok.trim().parse().map_err(|_| {
            CmdError::new(
                EXIT_VALIDATION,
                format!("mass entry {idx} ('{tok}') is not a number"),
            )
        })?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(CmdError::new(
                EXIT_VALIDATION,
                format!("mass entry {idx} is {value}; every mass must be strictly positive"),
            ));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(CmdError::new(EXIT_VALIDATION, "empty mass list"));
    }
    Ok(out)
}

/// Warns when input masses are not yet normalized; the scale is recorded in
/// solution files as `mass_scale`.
fn warn_if_unnormalized(masses: &[f64]) {
    let sum: f64 = masses.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        eprintln!("note: masses sum to {sum}; normalizing to 1 (scale recorded in output)");
    }
}

fn build_problem(args: &SolveArgs) -> Result<ProblemFile, CmdError> {
    let mut problem: ProblemFile = match &args.input {
        Some(path) => read_json(path)?,
        None => {
            let masses = match (&args.masses, args.equal_masses) {
                (Some(text), false) => parse_masses(text)?,
                (None, true) => {
                    let n = args.n.ok_or_else(|| {
                        CmdError::new(EXIT_VALIDATION, "--equal-masses requires --n")
                    })?;
                    vec![1.0 / n as f64; n]
                }
                (Some(_), true) => {
                    return Err(CmdError::new(
                        EXIT_VALIDATION,
                        "--masses and --equal-masses are mutually exclusive",
                    ))
                }
                (None, false) => {
                    return Err(CmdError::new(
                        EXIT_VALIDATION,
                        "provide --input, --masses or --equal-masses",
                    ))
                }
            };
            ProblemFile {
                n: masses.len(),
                d: 2,
                alpha: 1.0,
                masses,
                positions: None,
                rng_seed: 0,
                settings: SettingsFile::default(),
            }
        }
    };

    // flags override file fields
    if let Some(n) = args.n {
        if args.input.is_none() && n != problem.n {
            return Err(CmdError::new(
                EXIT_VALIDATION,
                format!("--n {} contradicts {} masses", n, problem.n),
            ));
        }
        problem.n = n;
    }
    if let Some(d) = args.d {
        problem.d = d;
    }
    if let Some(alpha) = args.alpha {
        problem.alpha = alpha;
    }
    if args.input.is_some() {
        if let Some(text) = &args.masses {
            problem.masses = parse_masses(text)?;
            problem.n = problem.masses.len();
        }
    }
    if let Some(seed) = args.seed {
        problem.rng_seed = seed;
    }
    if let Some(tol) = args.tol {
        problem.settings.residual_tolerance = tol;
    }
    if let Some(iters) = args.max_iterations {
        problem.settings.max_iterations = iters;
    }
    if let Some(method) = &args.method {
        problem.settings.method = method.clone();
    }
    if let Some(starts) = args.starts {
        problem.settings.starts = starts;
    }
    problem
        .validate()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    Ok(problem)
}

fn solution_file(
    problem: &ProblemFile,
    sol: &CCSolution,
    m: &Masses,
    p: &PotentialParams,
    timing_ms: Option<f64>,
) -> Result<SolutionFile, CmdError> {
    let sphere = spectrum(&sphere_restricted_hessian(
        &sol.configuration,
        m,
        p,
        sol.lambda.value(),
    )?)?;
    Ok(SolutionFile::from_solution(
        problem, sol, &sphere, timing_ms,
    ))
}

fn write_solution_outputs(
    dir: &Path,
    stem: &str,
    file: &SolutionFile,
    csv: bool,
) -> Result<(), CmdError> {
    write_json(&dir.join(format!("{stem}.json")), file).map_err(CmdError::from)?;
    if csv {
        std::fs::write(
            dir.join(format!("{stem}_positions.csv")),
            positions_csv(&file.configuration),
        )
        .map_err(|e| CmdError::new(EXIT_VALIDATION, e.to_string()))?;
        std::fs::write(
            dir.join(format!("{stem}_spectrum.csv")),
            spectrum_csv(&file.spectrum),
        )
        .map_err(|e| CmdError::new(EXIT_VALIDATION, e.to_string()))?;
    }
    Ok(())
}

fn describe(sol: &CCSolution) -> String {
    let tags: Vec<&str> = sol.classification.iter().map(|t| t.kind.as_str()).collect();
    format!(
        "lambda {:+.12e}  residual {:.3e}  iterations {:4}  tags [{}]",
        sol.lambda.value(),
        sol.residual_norm,
        sol.iterations,
        tags.join(", ")
    )
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CmdError> {
    let problem = build_problem(&args)?;
    warn_if_unnormalized(&problem.masses);
    let dir = out_dir(&args.output)?;
    let m = problem
        .masses_value()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    let p = PotentialParams::new(problem.alpha)?;
    let settings = problem.settings.to_solve_settings(problem.rng_seed)?;

    let t0 = Instant::now();
    let solutions: Vec<CCSolution> = match problem
        .configuration()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?
    {
        Some(q0) => vec![solve(&q0, &m, &p, &settings)?],
        None => {
            let outcome = multistart_solve(
                problem.n,
                problem.d,
                &m,
                &p,
                &settings,
                problem.settings.starts,
            )?;
            eprintln!(
                "multistart: {} starts, {} converged, {} failed, {} classes",
                outcome.attempted,
                outcome.converged,
                outcome.failed,
                outcome.solutions.len()
            );
            outcome.solutions
        }
    };
    let elapsed_ms = t0.elapsed().as_secs_f64() * 1e3;

    if solutions.is_empty() {
        eprintln!("no start converged");
        return Ok(EXIT_NO_CONVERGENCE);
    }
    let timing = args.timing.then_some(elapsed_ms);
    for (idx, sol) in solutions.iter().enumerate() {
        let file = solution_file(&problem, sol, &m, &p, timing)?;
        let stem = format!("solution_{idx:03}");
        write_solution_outputs(&dir, &stem, &file, args.csv)?;
        println!("{stem}: {}", describe(sol));
    }
    println!(
        "wrote {} solution file(s) to {}",
        solutions.len(),
        dir.display()
    );
    Ok(0)
}

/// Loads either a solution file or a problem file carrying positions.
fn load_configuration(path: &Path) -> Result<(ProblemFile, Configuration), CmdError> {
    if let Ok(sol) = read_json::<SolutionFile>(path) {
        if !sol.configuration.is_empty() {
            let q = sol
                .configuration_value()
                .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
            return Ok((sol.problem, q));
        }
    }
    let problem: ProblemFile = read_json(path)?;
    problem
        .validate()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    let q = problem
        .configuration()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?
        .ok_or_else(|| {
            CmdError::new(EXIT_VALIDATION, "input file carries no positions to verify")
        })?;
    Ok((problem, q))
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, CmdError> {
    let (problem, q) = load_configuration(&args.input)?;
    let m = problem
        .masses_value()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    let p = PotentialParams::new(problem.alpha)?;

    let (residual, rel_norm) = cc_residual(&q, &m, &p)?;
    let lambda = lambda_of(&q, &m, &p)?.value();
    let abs_norm = mass_norm_c1(&residual, &m)?;
    let measured = if args.abs_tol { abs_norm } else { rel_norm };

    println!("n = {}, d = {}, alpha = {}", q.n(), q.d(), problem.alpha);
    println!("lambda        = {lambda:+.16e}");
    println!("residual      = {rel_norm:.3e} (relative), {abs_norm:.3e} (mass-norm)");

    println!("triples (Q_ijk = Q_ij + Q_jk + Q_ki):");
    for i in 0..q.n() {
        for j in (i + 1)..q.n() {
            for k in (j + 1)..q.n() {
                let report = triple_q(&q, (i, j, k), &p)?;
                println!(
                    "  ({i},{j},{k})  |Q| = {:.3e}  cross = {:.3e}  scale = {:.3e}  {}",
                    report.norm,
                    report.cross_norm,
                    report.scale,
                    report.classification.as_str()
                );
            }
        }
    }

    println!("rigidity checks:");
    for check in rigidity_checks(&q, &GeometryTolerances::default()) {
        println!(
            "  {:42} {} {}  ({})",
            check.name,
            if check.applicable {
                "applicable    "
            } else {
                "not applicable"
            },
            if check.pass { "PASS" } else { "FAIL" },
            check.detail
        );
    }

    let pass = measured <= args.tol;
    println!(
        "verdict: {} (residual {measured:.3e} vs tolerance {:.3e}{})",
        if pass { "PASS" } else { "FAIL" },
        args.tol,
        if args.abs_tol { ", absolute" } else { "" }
    );
    Ok(if pass { 0 } else { EXIT_GATE })
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<i32, CmdError> {
    let (problem, q) = load_configuration(&args.input)?;
    let m = problem
        .masses_value()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    let p = PotentialParams::new(problem.alpha)?;
    let dir = out_dir(&args.output)?;

    // verification gate: refuse non-central inputs
    let method: Method = problem.settings.method.parse().unwrap_or(Method::Newton);
    let sol = match solution_from_configuration(&q, &m, &p, args.tol, method, 0) {
        Ok(sol) => sol,
        Err(CcError::NoConvergence { residual_norm, .. }) => {
            eprintln!(
                "input fails verification: residual {residual_norm:.3e} > tolerance {:.3e}",
                args.tol
            );
            return Ok(EXIT_GATE);
        }
        Err(e) => return Err(e.into()),
    };

    let sphere = spectrum(&sphere_restricted_hessian(
        &sol.configuration,
        &m,
        &p,
        sol.lambda.value(),
    )?)?;
    let q2 = rescale_to_lambda(&sol, -2.0, &p)?;
    let full = spectrum(&cencon::analysis::hessian_f(&q2, &m, &p, -2.0)?)?;
    let composed = spectrum(&hessian_composed(&coboundary0(&q2), &m, &p)?)?;
    let radial = radial_eigencheck(&sol, &m, &p)?;
    let corr = spectra_correspondence(&sol, &m, &p)?;

    println!(
        "sphere-restricted: morse index {}, nullity {}, {} eigenvalues",
        sphere.morse_index,
        sphere.nullity,
        sphere.eigenvalues.len()
    );
    println!(
        "radial eigenvalue: expected {:.10e} measured {:.10e} (rel err {:.2e})",
        radial.expected,
        radial.measured,
        radial.relative_error()
    );
    println!(
        "spectra correspondence at lambda = -2: {} (max rel mismatch {:.2e})",
        if corr.pass { "PASS" } else { "FAIL" },
        corr.max_rel_error
    );
    if !corr.pass {
        eprintln!("{}", corr.detail);
    }

    let report = SpectrumFile {
        problem,
        sphere_restricted: SpectrumSection::from(&sphere),
        c0_full_lambda2: SpectrumSection::from(&full),
        c1_composed: SpectrumSection::from(&composed),
        radial_expected: radial.expected,
        radial_measured: radial.measured,
        correspondence_pass: corr.pass,
        correspondence_max_rel_error: corr.max_rel_error,
        h_nonzero: corr.h_nonzero.clone(),
        htilde_nonzero: corr.htilde_nonzero.clone(),
    };
    let path = dir.join("spectrum.json");
    write_json(&path, &report)?;
    if args.csv {
        std::fs::write(
            dir.join("spectrum_sphere.csv"),
            spectrum_csv(&sphere.eigenvalues),
        )
        .map_err(|e| CmdError::new(EXIT_VALIDATION, e.to_string()))?;
    }
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_moulton(args: MoultonArgs) -> Result<i32, CmdError> {
    if args.n < 2 || args.n > 6 {
        return Err(CmdError::new(
            EXIT_VALIDATION,
            format!(
                "moulton supports 2 <= n <= 6 ({}!/2 chambers would be too many)",
                args.n
            ),
        ));
    }
    let masses = match (&args.masses, args.equal_masses) {
        (Some(text), false) => parse_masses(text)?,
        (None, _) => vec![1.0 / args.n as f64; args.n],
        (Some(_), true) => {
            return Err(CmdError::new(
                EXIT_VALIDATION,
                "--masses and --equal-masses are mutually exclusive",
            ))
        }
    };
    if masses.len() != args.n {
        return Err(CmdError::new(
            EXIT_VALIDATION,
            format!("expected {} masses, found {}", args.n, masses.len()),
        ));
    }
    warn_if_unnormalized(&masses);
    let dir = out_dir(&args.output)?;
    let m = Masses::new(&masses)?;
    let p = PotentialParams::new(args.alpha)?;
    let mut settings = SolveSettings::default();
    if let Some(tol) = args.tol {
        settings.residual_tolerance = tol;
    }

    let mut problem = ProblemFile {
        n: args.n,
        d: 1,
        alpha: args.alpha,
        masses,
        positions: None,
        rng_seed: 0,
        settings: SettingsFile::default(),
    };
    problem.settings.residual_tolerance = settings.residual_tolerance;

    let mut failures = 0usize;
    let orderings = moulton_orderings(args.n);
    for ordering in &orderings {
        let label: Vec<String> = ordering.iter().map(|b| b.to_string()).collect();
        let stem = format!("moulton_{}", label.join("_"));
        match solve_moulton(ordering, &m, &p, &settings) {
            Ok(sol) => {
                let file = solution_file(&problem, &sol, &m, &p, None)?;
                write_solution_outputs(&dir, &stem, &file, args.csv)?;
                println!("{stem}: {}", describe(&sol));
            }
            Err(e) => {
                failures += 1;
                eprintln!("{stem}: failed: {e}");
            }
        }
    }
    println!(
        "{} of {} chambers solved, files in {}",
        orderings.len() - failures,
        orderings.len(),
        dir.display()
    );
    Ok(if failures == 0 {
        0
    } else {
        EXIT_NO_CONVERGENCE
    })
}

fn cmd_gallery(args: GalleryArgs) -> Result<i32, CmdError> {
    let p = PotentialParams::new(args.alpha)?;
    let settings = SolveSettings::default();
    let to_masses = |text: &Option<String>, n: usize| -> Result<Masses, CmdError> {
        match text {
            Some(t) => {
                let values = parse_masses(t)?;
                warn_if_unnormalized(&values);
                Ok(Masses::new(&values)?)
            }
            None => Ok(Masses::equal(n)),
        }
    };

    let (name, sol, masses) = match args.name {
        GalleryName::Lagrange => {
            let m = to_masses(&args.masses, 3)?;
            let sol = gallery::lagrange(&m, &p).map_err(CmdError::from)?;
            ("lagrange", sol, m)
        }
        GalleryName::Euler => {
            let m = to_masses(&args.masses, 3)?;
            let sol = gallery::euler(&m, &p, &settings).map_err(CmdError::from)?;
            ("euler", sol, m)
        }
        GalleryName::Square => {
            let sol = gallery::square(&p).map_err(CmdError::from)?;
            ("square", sol, Masses::equal(4))
        }
        GalleryName::Ngon => {
            let n = args.n.unwrap_or(6);
            let sol = gallery::ngon(n, &p).map_err(CmdError::from)?;
            ("ngon", sol, Masses::equal(n))
        }
        GalleryName::Pyramid => {
            let n = args.n.unwrap_or(5);
            let sol = gallery::pyramid(n, &p, &settings).map_err(CmdError::from)?;
            ("pyramid", sol, Masses::equal(n))
        }
    };

    // generators must emit verified configurations
    let (_, residual) = cc_residual(&sol.configuration, &masses, &p)?;
    if residual > 1e-9 {
        return Err(CmdError::new(
            EXIT_GATE,
            format!("internal error: gallery generator produced residual {residual:.3e}"),
        ));
    }

    let dir = out_dir(&args.output)?;
    let q = &sol.configuration;
    let problem = ProblemFile {
        n: q.n(),
        d: q.d(),
        alpha: args.alpha,
        masses: masses.values().to_vec(),
        positions: Some((0..q.n()).map(|j| q.point(j).to_vec()).collect()),
        rng_seed: 0,
        settings: SettingsFile::default(),
    };
    write_json(&dir.join(format!("gallery_{name}_problem.json")), &problem)?;
    let file = solution_file(&problem, &sol, &masses, &p, None)?;
    write_solution_outputs(&dir, &format!("gallery_{name}_solution"), &file, args.csv)?;
    println!("gallery_{name}: {}", describe(&sol));
    Ok(0)
}

fn cmd_project(args: ProjectArgs) -> Result<i32, CmdError> {
    let cochain: CochainFile = read_json(&args.input)?;
    cochain
        .validate()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;
    warn_if_unnormalized(&cochain.masses);
    let m = Masses::new(&cochain.masses)?;
    let z = cochain
        .cochain_value()
        .map_err(|e| CmdError::new(EXIT_VALIDATION, format!("{e:#}")))?;

    let before = coboundary1(&z).norm();
    let projected = project_pm(&z, &m)?;
    let after = coboundary1(&projected).norm();
    let moved = mass_norm_c1(&projected.add_scaled(&z, -1.0), &m)?;
    println!("coboundary norm before = {before:.6e}");
    println!("coboundary norm after  = {after:.6e}");
    println!("projection displacement (mass-norm) = {moved:.6e}");

    let dir = out_dir(&args.output)?;
    let out = CochainFile::from_cochain(&projected, m.values());
    let path = dir.join("projected.json");
    write_json(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(0)
}
