#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ska_core::grid::ImageGrid;
use ska_core::io::Container;
use ska_core::metrics::{psnr, ssim};
use ska_core::simulate::preprocess_matrix;

fn ska(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ska"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn simulate(dir: &Path, sigma: &str) -> Output {
    let out = ska(&[
        "simulate",
        "--sigma",
        sigma,
        "--dims",
        "16,16",
        "--rows",
        "768",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    out
}

fn reconstruct(dir: &Path, algo: &str, lambda: &str, out: &str) -> Output {
    let d = |f: &str| dir.join(f).to_str().unwrap().to_string();
    let res = ska(&[
        "reconstruct",
        "--algo",
        algo,
        "--lambda",
        lambda,
        "--matrix",
        &d("matrix.mpir"),
        "--data",
        &d("data.mpir"),
        "--out",
        &d(out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    res
}

/// `seconds` is wall-clock time and the only column allowed to differ.
fn without_seconds(csv: &[u8]) -> Vec<String> {
    String::from_utf8(csv.to_vec())
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect()
}

#[test]
fn simulate_writes_identical_files_for_a_seed() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (o1, o2) = (simulate(d1.path(), "10"), simulate(d2.path(), "10"));
    let sums = |o: &Output| {
        stdout(o)
            .lines()
            .map(|l| l.split_whitespace().next().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(sums(&o1).len(), 3);
    assert_eq!(sums(&o1), sums(&o2));
    for f in ["phantom.mpir", "matrix.mpir", "data.mpir"] {
        assert_eq!(
            fs::read(d1.path().join(f)).unwrap(),
            fs::read(d2.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let data = Container::read(&d1.path().join("data.mpir")).unwrap();
    assert_eq!(data.get_meta("sigma"), Some("10.0"));
}

#[test]
fn simulate_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let zero = ska(&["simulate", "--sigma", "0", "--out", out]);
    assert_eq!(code(&zero), 2);
    assert!(stderr(&zero).contains("--sigma"));
    let small = ska(&["simulate", "--sigma", "1", "--dims", "8,8", "--out", out]);
    assert_eq!(code(&small), 2);
    assert!(stderr(&small).contains("--dims"));
    assert_eq!(code(&ska(&["simulate", "--out", out])), 2);
    assert_eq!(
        code(&ska(&[
            "simulate", "--sigma", "1", "--dims", "4,x", "--out", out
        ])),
        2
    );
}

#[test]
fn reconstruct_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "10");
    reconstruct(dir.path(), "ska-nng", "2.5e-2", "a");
    reconstruct(dir.path(), "ska-nng", "2.5e-2", "b");
    let read = |run: &str, f: &str| fs::read(dir.path().join(run).join(f)).unwrap();
    for f in ["recon.mpir", "recon.pgm", "report.mpir"] {
        assert_eq!(read("a", f), read("b", f), "{f}");
    }
    let csv = without_seconds(&read("a", "convergence.csv"));
    assert_eq!(csv, without_seconds(&read("b", "convergence.csv")));
    assert_eq!(csv[0], "epoch,eps_r,residual");

    let report = Container::read(&dir.path().join("a/report.mpir")).unwrap();
    assert_eq!(report.get_meta("algo"), Some("ska-nng"));
    assert_eq!(report.get_meta("stopped_by"), Some("tolerance"));
    assert_eq!(report.dims, vec![csv.len() - 1, 3]);
    let recon = Container::read(&dir.path().join("a/recon.mpir"))
        .unwrap()
        .to_image()
        .unwrap();
    assert_eq!(recon.dims(), &[16, 16]);
    assert!(recon.values().iter().all(|&v| v >= 0.0));
}

#[test]
fn fista_reports_the_operator_norm_of_the_filtered_matrix() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "10");
    let out = reconstruct(dir.path(), "fista-st", "1e-3", "r");
    let logged: f64 = stderr(&out)
        .lines()
        .find_map(|l| {
            l.strip_prefix("computed op_norm=")?
                .split_whitespace()
                .next()?
                .parse()
                .ok()
        })
        .expect("op_norm is logged");
    let raw = Container::read(&dir.path().join("matrix.mpir"))
        .unwrap()
        .to_matrix()
        .unwrap();
    let b = Container::read(&dir.path().join("data.mpir"))
        .unwrap()
        .to_vector()
        .unwrap();
    let (a, _) = preprocess_matrix(&raw, &b, 3.0, 70e3, 3e6).unwrap();
    let want = common::gram_max_eigenvalue(a.entries(), a.rows(), a.cols());
    assert!((logged - want).abs() <= 1e-6 * want, "{logged} vs {want}");
}

#[test]
fn reconstruct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "10");
    let d = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let run = |extra: &[&str], matrix: &str| {
        let mut args = vec!["reconstruct", "--algo", "ska-nng", "--lambda", "1e-3"];
        args.extend_from_slice(extra);
        let (m, b, o) = (d(matrix), d("data.mpir"), d("out"));
        args.extend_from_slice(&["--matrix", &m, "--data", &b, "--out", &o]);
        code(&ska(&args))
    };
    assert_eq!(run(&["--snr-min", "1e9"], "matrix.mpir"), 4);
    assert_eq!(run(&[], "missing.mpir"), 3);
    assert_eq!(run(&[], "data.mpir"), 3);
    assert_eq!(run(&["--f-lo", "-1"], "matrix.mpir"), 2);
    assert_eq!(
        code(&ska(&["reconstruct", "--algo", "sart", "--lambda", "1"])),
        2
    );
}

fn write_image(path: &Path, img: &ImageGrid) {
    Container::from_image(img).write(path).unwrap();
}

#[test]
fn metrics_prints_psnr_and_ssim() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f);
    let truth = ska_core::simulate::make_shape_phantom(&[32, 32])
        .unwrap()
        .scaled(8.0);
    write_image(&p("ref.mpir"), &truth);
    write_image(&p("exact.mpir"), &truth.scaled(0.25));
    let s = |f: &str| p(f).to_str().unwrap().to_string();

    let out = ska(&[
        "metrics",
        "--ref",
        &s("ref.mpir"),
        "--rec",
        &s("exact.mpir"),
        "--sigma",
        "4",
    ]);
    assert_eq!(stdout(&out), "inf,1.0000\n");
    let out = ska(&[
        "metrics",
        "--ref",
        &s("ref.mpir"),
        "--rec",
        &s("exact.mpir"),
        "--sigma",
        "4",
        "--header",
    ]);
    assert_eq!(stdout(&out), "psnr_db,ssim\ninf,1.0000\n");

    let mut r = common::rng(5);
    let noisy = ImageGrid::new(
        &[32, 32],
        truth
            .values()
            .iter()
            .map(|v| 0.25 * v + 0.05 * common::gaussian_vec(&mut r, 1)[0])
            .collect(),
    )
    .unwrap();
    write_image(&p("noisy.mpir"), &noisy);
    let out = ska(&[
        "metrics",
        "--ref",
        &s("ref.mpir"),
        "--rec",
        &s("noisy.mpir"),
        "--sigma",
        "4",
    ]);
    let want = format!(
        "{:.4},{:.4}\n",
        psnr(&noisy, &truth, 4.0).unwrap(),
        ssim(&noisy.scaled(4.0), &truth).unwrap()
    );
    assert_eq!(stdout(&out), want);

    write_image(&p("other.mpir"), &ImageGrid::zeros(&[16, 32]).unwrap());
    let out = ska(&[
        "metrics",
        "--ref",
        &s("ref.mpir"),
        "--rec",
        &s("other.mpir"),
        "--sigma",
        "4",
    ]);
    assert_eq!(code(&out), 2);
    let out = ska(&[
        "metrics",
        "--ref",
        &s("ref.mpir"),
        "--rec",
        &s("none.mpir"),
        "--sigma",
        "4",
    ]);
    assert_eq!(code(&out), 3);
}

fn bench(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "bench",
        "--dims",
        "16,16",
        "--rows",
        "768",
        "--sigmas",
        "10",
        "--lambda-grid",
        "1e-3,1e-2",
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ska(&args)
}

#[test]
fn bench_tabulates_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(
        dir.path(),
        &["--algos", "ska-nng,fused-lasso", "--repeats", "2"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = stdout(&out);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "algo,phantom,sigma,lambda,psnr_db,ssim,epochs,wall_time_s,status"
    );
    assert!(lines[1].starts_with("ska-nng,shape,10,") && lines[1].ends_with(",ok"));
    assert!(lines[2].starts_with("fused-lasso,") && lines[2].ends_with(",not_implemented"));
    assert_eq!(
        fs::read_to_string(dir.path().join("bench.csv")).unwrap(),
        table
    );
    assert!(dir.path().join("traces/ska-nng_shape_sigma10.csv").exists());
    let trials = fs::read_to_string(dir.path().join("lambda_trials.csv")).unwrap();
    assert!(trials.lines().skip(1).all(|l| l.starts_with("ska-nng,")));

    let again = tempfile::tempdir().unwrap();
    let out2 = bench(
        again.path(),
        &["--algos", "ska-nng,fused-lasso", "--repeats", "2"],
    );
    let stable = |t: &str| {
        t.lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(stable(&table), stable(&stdout(&out2)));
}

#[test]
fn bench_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&bench(&dir.path().join("a"), &["--algos", "fused-lasso"])),
        4
    );
    assert_eq!(
        code(&bench(
            &dir.path().join("b"),
            &["--algos", "ska-nng", "--repeats", "0"]
        )),
        2
    );
    assert_eq!(
        code(&bench(&dir.path().join("c"), &["--lambda-grid", "1:0.1:3"])),
        2
    );
    let out = bench(
        &dir.path().join("d"),
        &[
            "--algos",
            "ska-nng,regkz",
            "--sigmas",
            "50",
            "--assert-order",
        ],
    );
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("ordering violated"));
}
