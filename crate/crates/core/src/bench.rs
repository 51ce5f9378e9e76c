//! Comparative benchmark: per-cell λ tuning by best PSNR, result rows and
//! PSNR-versus-time traces.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::grid::ImageGrid;
use crate::metrics::{self, MetricsError};
use crate::simulate::{
    forward_simulate, make_phantom, preprocess_matrix, synth_system_matrix, MatrixModel,
    NoiseModel, PhantomKind, SimulateError, DEFAULT_NOISE_LEVEL,
};
use crate::solvers::{
    power_iteration_opnorm, Algorithm, EpochInfo, SolverConfig, SolverError, StopReason,
    SystemMatrix,
};
use crate::wavelet::{Udwt, WaveletError};

/// Column header of the result table.
pub const BENCH_CSV_HEADER: &str =
    "algo,phantom,sigma,lambda,psnr_db,ssim,epochs,wall_time_s,status";

/// Header of the per-cell trace files.
pub const TRACE_CSV_HEADER: &str = "epoch,seconds,psnr_db,eps_r,residual";

pub const OPNORM_TOL: f64 = 1e-10;
pub const OPNORM_MAX_IT: usize = 20_000;

/// Default band-pass and SNR row selection.
pub const DEFAULT_F_LO_HZ: f64 = 70e3;
pub const DEFAULT_F_HI_HZ: f64 = 3e6;
pub const DEFAULT_SNR_MIN: f64 = 3.0;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("{0}")]
    InvalidArgument(String),
}

/// `n` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_lambda_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, BenchError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(BenchError::InvalidArgument(format!(
            "lambda grid needs 0 < lo <= hi and n >= 1, got lo={lo} hi={hi} n={n}"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)
            }
        })
        .collect())
}

/// The default grid: 13 points from 1e-5 to 1e-1.
pub fn default_lambda_grid() -> Vec<f64> {
    log_lambda_grid(1e-5, 1e-1, 13).expect("static grid")
}

pub fn phantom_name(kind: &PhantomKind) -> String {
    match kind {
        PhantomKind::Shape => "shape".into(),
        PhantomKind::VascularTree => "vascular".into(),
        PhantomKind::Delta => "delta".into(),
        PhantomKind::Custom(p) => p.display().to_string(),
    }
}

pub fn parse_phantom(s: &str) -> Result<PhantomKind, String> {
    match s {
        "shape" => Ok(PhantomKind::Shape),
        "vascular" => Ok(PhantomKind::VascularTree),
        "delta" => Ok(PhantomKind::Delta),
        _ => Err(format!(
            "unknown phantom '{s}' (expected shape, vascular or delta)"
        )),
    }
}

/// Everything needed to generate one synthetic reconstruction problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub phantom: PhantomKind,
    pub dims: Vec<usize>,
    pub sigma: f64,
    pub rows: usize,
    pub seed: u64,
    pub model: MatrixModel,
    pub noise_level: f64,
    pub snr_min: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub wavelet_levels: usize,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            phantom: PhantomKind::Shape,
            dims: vec![32, 32],
            sigma: 10.0,
            rows: 2048,
            seed: 7,
            model: MatrixModel::FourierBlur,
            noise_level: DEFAULT_NOISE_LEVEL,
            snr_min: DEFAULT_SNR_MIN,
            f_lo_hz: DEFAULT_F_LO_HZ,
            f_hi_hz: DEFAULT_F_HI_HZ,
            wavelet_levels: 2,
        }
    }
}

/// Seed of the background noise, derived from the problem seed so that the
/// matrix and the noise draw from unrelated streams.
pub fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Preprocessed system, data and ground truth of one benchmark cell.
#[derive(Clone, Debug)]
pub struct BenchProblem {
    pub spec: ProblemSpec,
    pub truth: ImageGrid,
    /// Row-filtered, row-normalised matrix with its operator norm cached.
    pub a: SystemMatrix,
    pub b: Vec<Complex64>,
    pub phi: Udwt,
}

/// Phantom, raw system matrix and raw measurements for `spec`.
pub fn simulate_raw(
    spec: &ProblemSpec,
) -> Result<(ImageGrid, SystemMatrix, Vec<Complex64>), BenchError> {
    let truth = make_phantom(&spec.phantom, &spec.dims)?;
    let a = synth_system_matrix(&spec.dims, spec.rows, spec.seed, spec.model)?;
    let noise = NoiseModel::colored(&a, spec.sigma, spec.noise_level, noise_seed(spec.seed));
    let b = forward_simulate(&a, &truth, &noise)?;
    Ok((truth, a, b))
}

pub fn prepare_problem(spec: &ProblemSpec) -> Result<BenchProblem, BenchError> {
    let (truth, raw, raw_b) = simulate_raw(spec)?;
    let (mut a, b) = preprocess_matrix(&raw, &raw_b, spec.snr_min, spec.f_lo_hz, spec.f_hi_hz)?;
    let rho = power_iteration_opnorm(&a, OPNORM_TOL, OPNORM_MAX_IT)?;
    a.set_op_norm(Some(rho));
    let phi = Udwt::new(
        &spec.dims,
        crate::wavelet::FilterPair::haar(),
        spec.wavelet_levels,
    )?;
    Ok(BenchProblem {
        spec: spec.clone(),
        truth,
        a,
        b,
        phi,
    })
}

/// One line of the result table.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchResultRow {
    pub algo: String,
    pub phantom: String,
    pub sigma: f64,
    pub lambda: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub epochs: usize,
    pub wall_time_s: f64,
    pub status: String,
}

impl BenchResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// CSV line without the trailing newline. Commas in the status are
    /// replaced so the column count stays fixed.
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{},{:.4},{}",
            self.algo,
            self.phantom,
            self.sigma,
            self.lambda,
            self.psnr_db,
            self.ssim,
            self.epochs,
            self.wall_time_s,
            self.status.replace([',', '\n', '\r'], ";")
        )
    }
}

pub fn rows_to_csv(rows: &[BenchResultRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub epoch: usize,
    pub seconds: f64,
    pub psnr_db: f64,
    pub rel_change: f64,
    pub residual: f64,
}

pub fn trace_to_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for p in trace {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:e},{:e}",
            p.epoch, p.seconds, p.psnr_db, p.rel_change, p.residual
        );
    }
    out
}

/// Outcome of one λ of the grid search.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaTrial {
    pub lambda: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub epochs: usize,
    pub wall_time_s: f64,
    pub stopped_by: StopReason,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub row: BenchResultRow,
    pub trials: Vec<LambdaTrial>,
    /// Per-epoch trace of the winning λ.
    pub trace: Vec<TracePoint>,
    pub recon: Option<ImageGrid>,
}

/// Image the observers and metrics see: the real part, clamped at zero when
/// the solver enforces nonnegativity.
fn observed_image(x: &[Complex64], nonneg: bool) -> Vec<f64> {
    x.iter()
        .map(|c| if nonneg { c.re.max(0.0) } else { c.re })
        .collect()
}

fn failed_row(algo: Algorithm, problem: &BenchProblem, status: String) -> BenchResultRow {
    BenchResultRow {
        algo: algo.name().into(),
        phantom: phantom_name(&problem.spec.phantom),
        sigma: problem.spec.sigma,
        lambda: f64::NAN,
        psnr_db: f64::NAN,
        ssim: f64::NAN,
        epochs: 0,
        wall_time_s: 0.0,
        status,
    }
}

/// Runs `algo` once at `lambda`, returning the trial, the trace and the
/// reconstruction.
pub fn run_trial(
    problem: &BenchProblem,
    algo: Algorithm,
    lambda: f64,
    base: &SolverConfig,
) -> Result<(LambdaTrial, Vec<TracePoint>, ImageGrid), BenchError> {
    let mut cfg = base.clone();
    if algo.needs_op_norm() && cfg.gamma.is_none() {
        cfg.gamma = problem.a.op_norm();
    }
    let sigma = problem.spec.sigma;
    let dims = problem.truth.dims().to_vec();
    let mut trace = Vec::new();
    let mut observer = |info: &EpochInfo| {
        let img = ImageGrid::new(&dims, observed_image(info.x, cfg.enforce_nonneg))
            .expect("solver keeps dims");
        let p = metrics::psnr(&img, &problem.truth, sigma).unwrap_or(f64::NAN);
        trace.push(TracePoint {
            epoch: info.epoch,
            seconds: info.elapsed_s,
            psnr_db: p,
            rel_change: info.rel_change,
            residual: info.residual,
        });
    };
    let report = algo.run(
        &problem.a,
        &problem.b,
        lambda,
        &cfg,
        &problem.phi,
        &mut observer,
    )?;
    let psnr_db = metrics::psnr(&report.x, &problem.truth, sigma)?;
    let ssim = metrics::ssim(&report.x.scaled(sigma), &problem.truth)?;
    let trial = LambdaTrial {
        lambda,
        psnr_db,
        ssim,
        epochs: report.epochs_run,
        wall_time_s: report.wall_time_s,
        stopped_by: report.stopped_by,
    };
    Ok((trial, trace, report.x))
}

/// How the λ grid is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaSearch {
    /// Every grid point.
    Exhaustive,
    /// Walk the grid from the largest λ down and stop once `patience`
    /// consecutive points have a PSNR below the best so far. Ties do not
    /// count, so the flat stretch where every coefficient is thresholded
    /// away is crossed.
    Greedy { patience: usize },
}

impl Default for LambdaSearch {
    fn default() -> Self {
        LambdaSearch::Greedy { patience: 2 }
    }
}

/// Search over `lambdas` keeping the λ of highest PSNR (the first one
/// visited on ties). Methods without a regularisation weight run once.
/// Failures end up in the status column instead of an error.
pub fn run_cell(
    problem: &BenchProblem,
    algo: Algorithm,
    lambdas: &[f64],
    search: LambdaSearch,
    base: &SolverConfig,
) -> CellResult {
    if algo == Algorithm::FusedLasso {
        return CellResult {
            row: failed_row(algo, problem, "not_implemented".into()),
            trials: Vec::new(),
            trace: Vec::new(),
            recon: None,
        };
    }
    let mut grid: Vec<f64> = if algo == Algorithm::Kaczmarz {
        vec![0.0]
    } else {
        lambdas.to_vec()
    };
    let patience = match search {
        LambdaSearch::Exhaustive => usize::MAX,
        LambdaSearch::Greedy { patience } => {
            grid.sort_by(|a, b| b.total_cmp(a));
            patience.max(1)
        }
    };
    if grid.is_empty() {
        return CellResult {
            row: failed_row(algo, problem, "error: empty lambda grid".into()),
            trials: Vec::new(),
            trace: Vec::new(),
            recon: None,
        };
    }
    let mut trials: Vec<LambdaTrial> = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, Vec<TracePoint>, ImageGrid)> = None;
    let mut last_error = None;
    let mut misses = 0;
    for &lambda in &grid {
        match run_trial(problem, algo, lambda, base) {
            Ok((trial, trace, recon)) => {
                let best_psnr = best.as_ref().map(|(k, _, _)| trials[*k].psnr_db);
                let improved = best_psnr.is_none_or(|b| trial.psnr_db > b);
                // a plateau is neither progress nor a miss
                let worse = best_psnr.is_some_and(|b| trial.psnr_db < b);
                trials.push(trial);
                if improved {
                    best = Some((trials.len() - 1, trace, recon));
                    misses = 0;
                } else if worse {
                    misses += 1;
                }
            }
            Err(e) => {
                last_error = Some(e.to_string());
                misses += 1;
            }
        }
        if best.is_some() && misses >= patience {
            break;
        }
    }
    match best {
        Some((k, trace, recon)) => {
            let t: &LambdaTrial = &trials[k];
            let row = BenchResultRow {
                algo: algo.name().into(),
                phantom: phantom_name(&problem.spec.phantom),
                sigma: problem.spec.sigma,
                lambda: t.lambda,
                psnr_db: t.psnr_db,
                ssim: t.ssim,
                epochs: t.epochs,
                wall_time_s: t.wall_time_s,
                status: "ok".into(),
            };
            CellResult {
                row,
                trials,
                trace,
                recon: Some(recon),
            }
        }
        None => CellResult {
            row: failed_row(
                algo,
                problem,
                format!("error: {}", last_error.unwrap_or_default()),
            ),
            trials,
            trace: Vec::new(),
            recon: None,
        },
    }
}

/// The full grid of a benchmark run.
#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub phantoms: Vec<PhantomKind>,
    pub sigmas: Vec<f64>,
    pub algos: Vec<Algorithm>,
    pub repeats: usize,
    pub lambdas: Vec<f64>,
    pub search: LambdaSearch,
    /// Template for every cell; phantom and sigma are overwritten.
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            phantoms: vec![PhantomKind::Shape],
            sigmas: vec![10.0, 50.0],
            algos: vec![
                Algorithm::SkaNng,
                Algorithm::SkaSoft,
                Algorithm::FistaNng,
                Algorithm::FistaSoft,
                Algorithm::Regkz,
            ],
            repeats: 1,
            lambdas: default_lambda_grid(),
            search: LambdaSearch::default(),
            problem: ProblemSpec::default(),
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOutcome {
    /// In cell order: phantoms, then sigmas, then algorithms.
    pub cells: Vec<CellResult>,
}

impl BenchOutcome {
    pub fn rows(&self) -> Vec<BenchResultRow> {
        self.cells.iter().map(|c| c.row.clone()).collect()
    }

    pub fn succeeded(&self) -> usize {
        self.cells.iter().filter(|c| c.row.is_ok()).count()
    }
}

/// Runs every cell of `spec` sequentially. `progress` is called after each
/// cell. With `repeats > 1` every cell is re-run; the reported wall time is
/// the mean and a cell whose PSNR differs between repeats is marked.
pub fn run_bench(
    spec: &BenchSpec,
    progress: &mut dyn FnMut(&CellResult),
) -> Result<BenchOutcome, BenchError> {
    if spec.repeats == 0 {
        return Err(BenchError::InvalidArgument("repeats must be >= 1".into()));
    }
    let mut cells = Vec::new();
    for phantom in &spec.phantoms {
        for &sigma in &spec.sigmas {
            let pspec = ProblemSpec {
                phantom: phantom.clone(),
                sigma,
                ..spec.problem.clone()
            };
            let problem = match prepare_problem(&pspec) {
                Ok(p) => Some(p),
                Err(e) => {
                    for &algo in &spec.algos {
                        let cell = CellResult {
                            row: BenchResultRow {
                                algo: algo.name().into(),
                                phantom: phantom_name(phantom),
                                sigma,
                                lambda: f64::NAN,
                                psnr_db: f64::NAN,
                                ssim: f64::NAN,
                                epochs: 0,
                                wall_time_s: 0.0,
                                status: format!("error: {e}"),
                            },
                            trials: Vec::new(),
                            trace: Vec::new(),
                            recon: None,
                        };
                        progress(&cell);
                        cells.push(cell);
                    }
                    None
                }
            };
            let Some(problem) = problem else { continue };
            for &algo in &spec.algos {
                let mut cell = run_cell(&problem, algo, &spec.lambdas, spec.search, &spec.solver);
                let mut total_time = cell.row.wall_time_s;
                for _ in 1..spec.repeats {
                    let again = run_cell(&problem, algo, &spec.lambdas, spec.search, &spec.solver);
                    total_time += again.row.wall_time_s;
                    let same = again.row.psnr_db.to_bits() == cell.row.psnr_db.to_bits()
                        && again.row.ssim.to_bits() == cell.row.ssim.to_bits();
                    if cell.row.is_ok() && !same {
                        cell.row.status = "nondeterministic".into();
                    }
                }
                cell.row.wall_time_s = total_time / spec.repeats as f64;
                progress(&cell);
                cells.push(cell);
            }
        }
    }
    Ok(BenchOutcome { cells })
}

/// Cells where `better` has a lower PSNR than `worse` on the same phantom
/// and sigma. Cells where either row failed are skipped.
pub fn order_violations(
    rows: &[BenchResultRow],
    better: Algorithm,
    worse: Algorithm,
) -> Vec<String> {
    let mut out = Vec::new();
    for hi in rows.iter().filter(|r| r.algo == better.name() && r.is_ok()) {
        for lo in rows.iter().filter(|r| {
            r.algo == worse.name()
                && r.is_ok()
                && r.phantom == hi.phantom
                && r.sigma.to_bits() == hi.sigma.to_bits()
        }) {
            if hi.psnr_db < lo.psnr_db {
                out.push(format!(
                    "{} sigma={}: {} {:.4} dB < {} {:.4} dB",
                    hi.phantom, hi.sigma, better, hi.psnr_db, worse, lo.psnr_db
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], 1e-5);
        assert_eq!(g[12], 1e-1);
        assert!((g[3] / 1e-4 - 1.0).abs() < 1e-12 && (g[6] / 1e-3 - 1.0).abs() < 1e-12);
        assert!(g
            .windows(2)
            .all(|w| (w[1] / w[0] - 10f64.powf(1.0 / 3.0)).abs() < 1e-9));
        assert!(log_lambda_grid(0.0, 1.0, 3).is_err());
        assert_eq!(log_lambda_grid(0.5, 0.5, 1).unwrap(), vec![0.5]);
    }

    #[test]
    fn csv_row_format() {
        let row = BenchResultRow {
            algo: "ska-nng".into(),
            phantom: "shape".into(),
            sigma: 10.0,
            lambda: 0.001,
            psnr_db: 31.23456,
            ssim: 0.91234,
            epochs: 42,
            wall_time_s: 0.5,
            status: "error: a, b".into(),
        };
        assert_eq!(
            row.to_csv(),
            "ska-nng,shape,10,0.001,31.2346,0.9123,42,0.5000,error: a; b"
        );
        assert_eq!(rows_to_csv(&[]), format!("{BENCH_CSV_HEADER}\n"));
    }

    #[test]
    fn order_check() {
        let mk = |algo: &str, psnr: f64| BenchResultRow {
            algo: algo.into(),
            phantom: "shape".into(),
            sigma: 10.0,
            lambda: 0.0,
            psnr_db: psnr,
            ssim: 0.0,
            epochs: 1,
            wall_time_s: 0.0,
            status: "ok".into(),
        };
        let rows = vec![mk("ska-nng", 30.0), mk("regkz", 31.0), mk("ska-st", 29.0)];
        assert_eq!(
            order_violations(&rows, Algorithm::SkaNng, Algorithm::Regkz).len(),
            1
        );
        assert!(order_violations(&rows, Algorithm::SkaNng, Algorithm::SkaSoft).is_empty());
    }

    #[test]
    fn small_cell_runs_and_placeholder_is_marked() {
        let spec = ProblemSpec {
            dims: vec![16, 16],
            rows: 512,
            ..ProblemSpec::default()
        };
        let problem = prepare_problem(&spec).unwrap();
        assert!(problem.a.is_row_normalized(1e-10));
        let base = SolverConfig {
            max_epochs: 50,
            ..SolverConfig::default()
        };
        let cell = run_cell(
            &problem,
            Algorithm::SkaNng,
            &[1e-3, 1e-2],
            LambdaSearch::Exhaustive,
            &base,
        );
        assert!(cell.row.is_ok(), "{}", cell.row.status);
        assert_eq!(cell.trials.len(), 2);
        assert_eq!(cell.trace.len(), cell.row.epochs);
        let fused = run_cell(
            &problem,
            Algorithm::FusedLasso,
            &[1e-3],
            LambdaSearch::default(),
            &base,
        );
        assert_eq!(fused.row.status, "not_implemented");
    }
}
