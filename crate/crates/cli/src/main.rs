use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use ska_core::bench::{
    self, log_lambda_grid, order_violations, parse_phantom, phantom_name, rows_to_csv,
    trace_to_csv, BenchError, BenchSpec, LambdaSearch, ProblemSpec, DEFAULT_F_HI_HZ,
    DEFAULT_F_LO_HZ, DEFAULT_SNR_MIN, OPNORM_MAX_IT, OPNORM_TOL,
};
use ska_core::io::{convergence_csv, write_pgm16, Container, IoError};
use ska_core::metrics::{self, MetricsError};
use ska_core::simulate::{
    make_phantom, preprocess_matrix, MatrixModel, PhantomKind, SimulateError, DEFAULT_NOISE_LEVEL,
};
use ska_core::solvers::{
    power_iteration_opnorm, Algorithm, RowOrder, SolverConfig, SolverError, ROW_NORM_TOL,
};
use ska_core::wavelet::{FilterPair, Udwt};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_ORDER: u8 = 1;

#[derive(Parser)]
#[command(
    name = "ska",
    version,
    about = "Sparse Kaczmarz reconstruction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a phantom, a synthetic system matrix and noisy measurements.
    Simulate(SimulateArgs),
    /// Preprocess a system and reconstruct an image from its measurements.
    Reconstruct(ReconstructArgs),
    /// Print PSNR and SSIM of a reconstruction against a reference image.
    Metrics(MetricsArgs),
    /// Tune λ per cell over phantoms × sigmas × algorithms and tabulate.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_phantom, default_value = "shape")]
    phantom: PhantomKind,
    #[arg(long, value_parser = parse_dims, default_value = "32,32")]
    dims: Dims,
    #[arg(long, value_parser = positive_f64)]
    sigma: f64,
    #[arg(long, default_value_t = 2048)]
    rows: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_parser = nonneg_f64, default_value_t = DEFAULT_NOISE_LEVEL)]
    noise_level: f64,
    #[arg(long, default_value = "fourier-blur")]
    model: MatrixModel,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    algo: Algorithm,
    #[arg(long, value_parser = nonneg_f64)]
    lambda: f64,
    #[arg(long, value_parser = positive_f64, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 3000)]
    max_epochs: usize,
    #[arg(long, value_parser = finite_f64, default_value_t = DEFAULT_SNR_MIN)]
    snr_min: f64,
    #[arg(long, value_parser = nonneg_f64, default_value_t = DEFAULT_F_LO_HZ)]
    f_lo: f64,
    #[arg(long, value_parser = nonneg_f64, default_value_t = DEFAULT_F_HI_HZ)]
    f_hi: f64,
    /// Wavelet decomposition depth.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Visit rows in a fresh seeded random order every epoch.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    rec: PathBuf,
    #[arg(long, value_parser = positive_f64)]
    sigma: f64,
    /// Print the `psnr_db,ssim` header line first.
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Greedy,
    Exhaustive,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_phantom, default_value = "shape")]
    phantoms: Vec<PhantomKind>,
    #[arg(long, value_delimiter = ',', value_parser = positive_f64, default_value = "10,50")]
    sigmas: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ska-nng,ska-st,fista-nng,fista-st,regkz"
    )]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// `lo:hi:n` for n log-spaced values, or an explicit comma list.
    #[arg(long, value_parser = parse_lambda_grid, default_value = "1e-5:1e-1:13")]
    lambda_grid: LambdaGrid,
    #[arg(long, value_enum, default_value = "greedy")]
    search: SearchMode,
    /// Consecutive worse grid points that end a greedy search.
    #[arg(long, default_value_t = 2)]
    patience: usize,
    #[arg(long, value_parser = parse_dims, default_value = "32,32")]
    dims: Dims,
    #[arg(long, default_value_t = 2048)]
    rows: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_parser = nonneg_f64, default_value_t = DEFAULT_NOISE_LEVEL)]
    noise_level: f64,
    #[arg(long, default_value = "fourier-blur")]
    model: MatrixModel,
    #[arg(long, value_parser = positive_f64, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 3000)]
    max_epochs: usize,
    /// Fail unless ska-nng reaches at least the PSNR of regkz in every cell.
    #[arg(long)]
    assert_order: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct LambdaGrid(Vec<f64>);

#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn solver(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let dims: Vec<usize> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{t}' is not a grid size"))
        })
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.len() > 3 || dims.contains(&0) {
        return Err("expected 1 to 3 positive sizes, e.g. 32,32".into());
    }
    Ok(Dims(dims))
}

fn finite_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("'{s}' is not a finite number")),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be > 0".into())
    }
}

fn nonneg_f64(s: &str) -> Result<f64, String> {
    let v = finite_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("must be >= 0".into())
    }
}

fn parse_lambda_grid(s: &str) -> Result<LambdaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, n] => {
            let n = n
                .parse::<usize>()
                .map_err(|_| format!("'{n}' is not a point count"))?;
            log_lambda_grid(positive_f64(lo)?, positive_f64(hi)?, n).map_err(|e| e.to_string())?
        }
        [list] => list.split(',').map(nonneg_f64).collect::<Result<_, _>>()?,
        _ => return Err("expected lo:hi:n or a comma-separated list".into()),
    };
    if values.is_empty() {
        return Err("empty lambda grid".into());
    }
    Ok(LambdaGrid(values))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` and prints a `sha256sum`-style manifest line.
fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    println!("{}  {}", sha256_hex(bytes), path.display());
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))
}

fn read_container(path: &Path) -> Result<Container, CliError> {
    Container::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn simulate_error(e: BenchError) -> CliError {
    match e {
        BenchError::Simulate(SimulateError::Grid(_) | SimulateError::GridTooSmall { .. }) => {
            CliError::usage(format!("--dims: {e}"))
        }
        BenchError::Simulate(SimulateError::InvalidSigma(_)) => {
            CliError::usage(format!("--sigma: {e}"))
        }
        BenchError::Simulate(SimulateError::InvalidArgument(_))
        | BenchError::InvalidArgument(_) => CliError::usage(e.to_string()),
        other => CliError::solver(other.to_string()),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.rows == 0 {
        return Err(CliError::usage("--rows must be >= 1"));
    }
    let spec = ProblemSpec {
        phantom: args.phantom.clone(),
        dims: args.dims.0.clone(),
        sigma: args.sigma,
        rows: args.rows,
        seed: args.seed,
        model: args.model,
        noise_level: args.noise_level,
        ..ProblemSpec::default()
    };
    let (truth, a, b) = bench::simulate_raw(&spec).map_err(simulate_error)?;
    create_dir(&args.out)?;

    let phantom =
        Container::from_image(&truth).with_meta("phantom", phantom_name(&args.phantom))?;
    let matrix = Container::from_matrix(&a).with_meta("model", args.model.name())?;
    let data = Container::from_vector(&b)
        .with_meta("sigma", format!("{:?}", args.sigma))?
        .with_meta("seed", args.seed.to_string())?
        .with_meta("noise_level", format!("{:?}", args.noise_level))?;
    write_artifact(&args.out.join("phantom.mpir"), &phantom.to_bytes())?;
    write_artifact(&args.out.join("matrix.mpir"), &matrix.to_bytes())?;
    write_artifact(&args.out.join("data.mpir"), &data.to_bytes())?;
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), CliError> {
    if args.f_lo > args.f_hi {
        return Err(CliError::usage("--f-lo must not exceed --f-hi"));
    }
    let cfg = SolverConfig {
        max_epochs: args.max_epochs,
        eps_r: args.eps,
        row_order: if args.shuffle {
            RowOrder::Shuffled(args.seed)
        } else {
            RowOrder::Cyclic
        },
        ..SolverConfig::default()
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;

    let raw = read_container(&args.matrix)?.to_matrix()?;
    let raw_b = read_container(&args.data)?.to_vector()?;
    if raw_b.len() != raw.rows() {
        return Err(CliError::usage(format!(
            "--data has {} entries, --matrix has {} rows",
            raw_b.len(),
            raw.rows()
        )));
    }
    let (mut a, b) = preprocess_matrix(&raw, &raw_b, args.snr_min, args.f_lo, args.f_hi).map_err(
        |e| match e {
            SimulateError::InvalidArgument(_) => CliError::usage(e.to_string()),
            other => CliError::solver(other.to_string()),
        },
    )?;
    // a cached norm is still valid when preprocessing changed nothing
    if a.rows() == raw.rows() && raw.is_row_normalized(ROW_NORM_TOL) {
        a.set_op_norm(raw.op_norm());
    }
    eprintln!("rows used: {} of {}", a.rows(), raw.rows());
    if args.algo.needs_op_norm() && a.op_norm().is_none() {
        let rho = power_iteration_opnorm(&a, OPNORM_TOL, OPNORM_MAX_IT)
            .map_err(|e| CliError::solver(e.to_string()))?;
        eprintln!("computed op_norm={rho:?} by power iteration");
        a.set_op_norm(Some(rho));
    }
    let mut cfg = cfg;
    cfg.gamma = a.op_norm();

    let phi = Udwt::new(a.grid_dims(), FilterPair::haar(), args.levels)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let report = args
        .algo
        .run(&a, &b, args.lambda, &cfg, &phi, &mut |_| {})
        .map_err(|e: SolverError| CliError::solver(e.to_string()))?;
    eprintln!(
        "{}: {} epochs ({}), {:.3} s",
        args.algo,
        report.epochs_run,
        report.stopped_by.name(),
        report.wall_time_s
    );

    create_dir(&args.out)?;
    let image = Container::from_image(&report.x)
        .with_meta("algo", args.algo.name())?
        .with_meta("lambda", format!("{:?}", args.lambda))?;
    write_artifact(&args.out.join("recon.mpir"), &image.to_bytes())?;
    let pgm_path = args.out.join("recon.pgm");
    write_pgm16(&pgm_path, &report.x)?;
    println!(
        "{}  {}",
        sha256_hex(&fs::read(&pgm_path)?),
        pgm_path.display()
    );
    write_artifact(
        &args.out.join("convergence.csv"),
        convergence_csv(&report).as_bytes(),
    )?;

    let history: Vec<Vec<f64>> = report
        .rel_change_history
        .iter()
        .zip(&report.residual_history)
        .enumerate()
        .map(|(k, (&eps, &res))| vec![(k + 1) as f64, eps, res])
        .collect();
    let mut summary = Container::report(&["epoch", "eps_r", "residual"], &history)?
        .with_meta("algo", args.algo.name())?
        .with_meta("lambda", format!("{:?}", args.lambda))?
        .with_meta("epochs", report.epochs_run.to_string())?
        .with_meta("stopped_by", report.stopped_by.name())?
        .with_meta("rows_used", a.rows().to_string())?
        .with_meta("eps", format!("{:?}", args.eps))?
        .with_meta("max_epochs", args.max_epochs.to_string())?;
    if let Some(rho) = a.op_norm() {
        summary.push_meta("op_norm", format!("{rho:?}"))?;
    }
    write_artifact(&args.out.join("report.mpir"), &summary.to_bytes())?;
    Ok(())
}

fn format_psnr(p: f64) -> String {
    if p.is_infinite() && p > 0.0 {
        "inf".into()
    } else {
        format!("{p:.4}")
    }
}

fn cmd_metrics(args: MetricsArgs) -> Result<(), CliError> {
    let reference = read_container(&args.reference)?.to_image()?;
    let rec = read_container(&args.rec)?.to_image()?;
    let usage = |e: MetricsError| CliError::usage(e.to_string());
    let p = metrics::psnr(&rec, &reference, args.sigma).map_err(usage)?;
    let s = metrics::ssim(&rec.scaled(args.sigma), &reference).map_err(usage)?;
    if args.header {
        println!("psnr_db,ssim");
    }
    println!("{},{:.4}", format_psnr(p), s);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be >= 1"));
    }
    let spec = BenchSpec {
        phantoms: args.phantoms,
        sigmas: args.sigmas,
        algos: args.algos,
        repeats: args.repeats,
        lambdas: args.lambda_grid.0,
        search: match args.search {
            SearchMode::Greedy => LambdaSearch::Greedy {
                patience: args.patience,
            },
            SearchMode::Exhaustive => LambdaSearch::Exhaustive,
        },
        problem: ProblemSpec {
            dims: args.dims.0,
            rows: args.rows,
            seed: args.seed,
            model: args.model,
            noise_level: args.noise_level,
            ..ProblemSpec::default()
        },
        solver: SolverConfig {
            eps_r: args.eps,
            max_epochs: args.max_epochs,
            ..SolverConfig::default()
        },
    };
    spec.solver
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    if spec.problem.rows == 0 {
        return Err(CliError::usage("--rows must be >= 1"));
    }
    // fail on a bad grid before spending time on the cells
    for phantom in &spec.phantoms {
        make_phantom(phantom, &spec.problem.dims)
            .map_err(|e| CliError::usage(format!("--dims: {e}")))?;
    }

    create_dir(&args.out.join("traces"))?;
    let outcome = bench::run_bench(&spec, &mut |cell| {
        let r = &cell.row;
        eprintln!(
            "{} {} sigma={} lambda={:e} psnr={:.2} epochs={} {}",
            r.algo, r.phantom, r.sigma, r.lambda, r.psnr_db, r.epochs, r.status
        );
    })
    .map_err(simulate_error)?;

    let rows = outcome.rows();
    let table = rows_to_csv(&rows);
    fs::write(args.out.join("bench.csv"), &table)?;
    print!("{table}");

    let mut trials = String::from("algo,phantom,sigma,lambda,psnr_db,ssim,epochs,stopped_by\n");
    for cell in &outcome.cells {
        let r = &cell.row;
        for t in &cell.trials {
            trials.push_str(&format!(
                "{},{},{},{},{:.4},{:.4},{},{}\n",
                r.algo,
                r.phantom,
                r.sigma,
                t.lambda,
                t.psnr_db,
                t.ssim,
                t.epochs,
                t.stopped_by.name()
            ));
        }
        if !cell.trace.is_empty() {
            let name = format!("{}_{}_sigma{}.csv", r.algo, r.phantom, r.sigma);
            fs::write(
                args.out.join("traces").join(name),
                trace_to_csv(&cell.trace),
            )?;
        }
    }
    fs::write(args.out.join("lambda_trials.csv"), trials)?;

    if outcome.succeeded() == 0 {
        return Err(CliError::solver("no benchmark cell succeeded"));
    }
    if args.assert_order {
        let violations = order_violations(&rows, Algorithm::SkaNng, Algorithm::Regkz);
        if !violations.is_empty() {
            return Err(CliError {
                code: EXIT_ORDER,
                message: format!("ordering violated:\n{}", violations.join("\n")),
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
