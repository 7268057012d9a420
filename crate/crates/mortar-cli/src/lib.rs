//! Command-line front end: run convergence studies to CSV and render
//! log-log SVG plots from those CSVs.
//!
//! Exit codes: 0 on success, 2 on flag/format errors, 1 on numerical
//! failures (the message names the failing stage).

pub mod csv;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mortar_fem::coupling::{Method, MethodConfig};
use mortar_fem::experiments::{
    errors_vs_h, errors_vs_n, problem_lshape, problem_smooth, problem_spring, run_adaptive_study,
    run_uniform_study, Problem, RunSettings, StudyRecord,
};
use mortar_fem::space::Degree;
use mortar_fem::Error;

#[derive(Parser)]
#[command(
    name = "mortar-fem",
    about = "Two-subdomain interface coupling studies: penalty vs Nitsche",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write a CSV table.
    Study(StudyArgs),
    /// Render a log-log SVG plot from study CSVs.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Smooth,
    Lshape,
    Spring,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodKind {
    Penalty,
    NitscheOnesided,
    NitscheAverage,
}

impl MethodKind {
    fn to_method(self) -> Method {
        match self {
            MethodKind::Penalty => Method::Penalty,
            MethodKind::NitscheOnesided => Method::NitscheOneSided,
            MethodKind::NitscheAverage => Method::NitscheAverage,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Uniform,
    Adaptive,
}

fn parse_degree(s: &str) -> Result<u8, String> {
    match s.parse::<u8>() {
        Ok(p @ (1 | 2)) => Ok(p),
        _ => Err("unsupported degree (use 1 or 2)".into()),
    }
}

#[derive(Args)]
struct StudyArgs {
    /// Test problem to solve.
    #[arg(long, value_enum)]
    problem: ProblemKind,

    /// Interface coupling method.
    #[arg(long, value_enum)]
    method: MethodKind,

    /// Refinement strategy.
    #[arg(long, value_enum)]
    mode: Mode,

    /// Polynomial degree of the Lagrange space.
    #[arg(long, default_value = "1", value_parser = parse_degree)]
    degree: u8,

    /// Refinement levels (uniform mode).
    #[arg(long, default_value_t = 5)]
    levels: usize,

    /// DOF budget (adaptive mode): the run stops after the first level
    /// exceeding it.
    #[arg(long, default_value_t = 10_000)]
    max_dofs: usize,

    /// Dörfler marking fraction (adaptive mode).
    #[arg(long, default_value_t = 0.5)]
    theta: f64,

    /// Nitsche stabilization safety factor.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Penalty scale c in ε = c·h_E.
    #[arg(long, default_value_t = 1.0)]
    penalty_scale: f64,

    /// Spring stiffness ε0 (spring problem only).
    #[arg(long, default_value_t = 0.1)]
    epsilon0: f64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotAxis {
    H,
    N,
}

#[derive(Args)]
struct PlotArgs {
    /// Study CSVs to plot (one polyline each).
    #[arg(required = true)]
    csvs: Vec<PathBuf>,

    /// X axis: mesh size (h) or degrees of freedom (n).
    #[arg(long, value_enum, default_value = "h")]
    axis: PlotAxis,

    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

/// Parses and executes the command line; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Study(args) => run_study(args),
        Command::Plot(args) => run_plot(args),
    }
}

fn validate_study(args: &StudyArgs) -> Result<(), String> {
    if matches!(args.mode, Mode::Uniform) && args.levels < 2 {
        return Err("uniform mode needs --levels >= 2".into());
    }
    if !(args.theta > 0.0 && args.theta <= 1.0) {
        return Err("--theta must be in (0, 1]".into());
    }
    if args.penalty_scale <= 0.0 {
        return Err("--penalty-scale must be positive".into());
    }
    if args.alpha <= 0.0 {
        return Err("--alpha must be positive".into());
    }
    if matches!(args.problem, ProblemKind::Spring) {
        if !matches!(args.method, MethodKind::Penalty) {
            return Err("the spring problem requires --method penalty".into());
        }
        if !matches!(args.mode, Mode::Uniform) {
            return Err("the spring problem supports --mode uniform only".into());
        }
        if args.epsilon0 <= 0.0 {
            return Err("--epsilon0 must be positive".into());
        }
    }
    Ok(())
}

fn run_study(args: StudyArgs) -> i32 {
    if let Err(msg) = validate_study(&args) {
        eprintln!("mortar-fem: {msg}");
        return 2;
    }
    if matches!(args.problem, ProblemKind::Lshape) && args.degree == 1 {
        eprintln!("mortar-fem: warning: the L-shape study is usually run with --degree 2");
    }
    if args.alpha >= 1.0 {
        eprintln!("mortar-fem: warning: --alpha >= 1 is outside the guaranteed-stability range");
    }

    let problem: Problem = match args.problem {
        ProblemKind::Smooth => problem_smooth(),
        ProblemKind::Lshape => problem_lshape(),
        ProblemKind::Spring => problem_spring(args.epsilon0),
    };
    let degree = match Degree::from_u8(args.degree) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("mortar-fem: {e}");
            return 2;
        }
    };
    let mut config = MethodConfig::new(args.method.to_method());
    config.alpha = args.alpha;
    config.penalty_scale = args.penalty_scale;
    let mut settings = RunSettings::new(config, degree);
    if matches!(args.problem, ProblemKind::Spring) {
        settings.fixed_epsilon = Some(args.epsilon0);
    }

    let outcome: Result<(Vec<StudyRecord>, Vec<Option<f64>>), Error> = match args.mode {
        Mode::Uniform => {
            run_uniform_study(&problem, &settings, args.levels, false).map(|records| {
                let (h, e) = errors_vs_h(&records);
                let rates = csv::per_step_rates(&h, &e);
                (records, rates)
            })
        }
        Mode::Adaptive => {
            run_adaptive_study(&problem, &settings, args.theta, args.max_dofs).map(|iters| {
                let records: Vec<StudyRecord> = iters.into_iter().map(|it| it.record).collect();
                let (n, e) = errors_vs_n(&records);
                let rates = csv::per_step_rates(&n, &e);
                (records, rates)
            })
        }
    };
    let (records, rates) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let code = if e.stage() == "config" { 2 } else { 1 };
            eprintln!("mortar-fem: failure in {} stage: {e}", e.stage());
            return code;
        }
    };
    let text = csv::render(&records, &rates);
    if let Err(e) = std::fs::write(&args.out, text) {
        eprintln!("mortar-fem: cannot write {}: {e}", args.out.display());
        return 1;
    }
    println!(
        "wrote {} ({} levels, final n_dofs {})",
        args.out.display(),
        records.len(),
        records.last().map(|r| r.n_dofs).unwrap_or(0)
    );
    0
}

fn run_plot(args: PlotArgs) -> i32 {
    let mut series = Vec::new();
    for path in &args.csvs {
        let rows = match csv::read_file(path) {
            Ok(rows) => rows,
            Err(msg) => {
                eprintln!("mortar-fem: {msg}");
                return 2;
            }
        };
        let points: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| {
                let x = match args.axis {
                    PlotAxis::H => r.h_max,
                    PlotAxis::N => r.ndofs,
                };
                (x, r.energy_error)
            })
            .collect();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        series.push(svg::Series { label, points });
    }
    let axis = match args.axis {
        PlotAxis::H => svg::Axis::MeshSize,
        PlotAxis::N => svg::Axis::Dofs,
    };
    let doc = match svg::render(&series, axis) {
        Ok(doc) => doc,
        Err(msg) => {
            eprintln!("mortar-fem: {msg}");
            return 2;
        }
    };
    if let Err(e) = std::fs::write(&args.out, doc) {
        eprintln!("mortar-fem: cannot write {}: {e}", args.out.display());
        return 1;
    }
    println!("wrote {}", args.out.display());
    0
}
