//! End-to-end checks of the command-line contract: exit codes, CSV
//! schema, SVG determinism.

use std::path::Path;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["mortar-fem"];
    argv.extend_from_slice(args);
    mortar_cli::run(argv)
}

fn study_smooth(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let out_s = out.to_str().unwrap().to_string();
    let mut args = vec![
        "study",
        "--problem",
        "smooth",
        "--method",
        "nitsche-average",
        "--mode",
        "uniform",
        "--degree",
        "1",
        "--levels",
        "3",
        "--out",
        &out_s,
    ];
    args.extend_from_slice(extra);
    assert_eq!(run(&args), 0);
    out
}

#[test]
fn uniform_study_writes_csv_with_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smooth.csv");
    let code = run(&[
        "study",
        "--problem",
        "smooth",
        "--method",
        "nitsche-average",
        "--mode",
        "uniform",
        "--degree",
        "1",
        "--levels",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,ndofs,h_max,energy_error,estimator,interface_estimator,rate"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    // First row has an empty rate, later rows do not.
    assert!(rows[0].ends_with(','));
    assert!(!rows[4].ends_with(','));
    assert!(!text.contains('\r'));
}

#[test]
fn unsupported_degree_is_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let code = run(&[
        "study",
        "--problem",
        "smooth",
        "--method",
        "penalty",
        "--mode",
        "uniform",
        "--degree",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn adaptive_penalty_study_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pen.csv");
    let code = run(&[
        "study",
        "--problem",
        "smooth",
        "--method",
        "penalty",
        "--mode",
        "adaptive",
        "--max-dofs",
        "2000",
        "--theta",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = std::fs::read_to_string(&out).unwrap();
    assert!(rows.lines().count() > 3);
}

#[test]
fn invalid_combinations_are_rejected_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out_s = out.to_str().unwrap();
    let base = [
        "study",
        "--problem",
        "spring",
        "--mode",
        "uniform",
        "--out",
        out_s,
    ];
    // Spring requires the penalty method.
    let mut args = base.to_vec();
    args.extend_from_slice(&["--method", "nitsche-average"]);
    assert_eq!(run(&args), 2);
    // Bad theta.
    assert_eq!(
        run(&[
            "study",
            "--problem",
            "smooth",
            "--method",
            "penalty",
            "--mode",
            "adaptive",
            "--theta",
            "1.5",
            "--out",
            out_s,
        ]),
        2
    );
    // Uniform with a single level.
    assert_eq!(
        run(&[
            "study",
            "--problem",
            "smooth",
            "--method",
            "penalty",
            "--mode",
            "uniform",
            "--levels",
            "1",
            "--out",
            out_s,
        ]),
        2
    );
    assert!(!out.exists());
}

#[test]
fn spring_study_runs_with_penalty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spring.csv");
    let code = run(&[
        "study",
        "--problem",
        "spring",
        "--method",
        "penalty",
        "--mode",
        "uniform",
        "--levels",
        "3",
        "--epsilon0",
        "0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn plot_renders_deterministic_svg_with_legend() {
    let dir = tempfile::tempdir().unwrap();
    let a = study_smooth(dir.path(), "a.csv", &[]);
    let b = study_smooth(dir.path(), "b.csv", &["--penalty-scale", "2.0"]);
    let svg1 = dir.path().join("plot1.svg");
    let svg2 = dir.path().join("plot2.svg");
    for out in [&svg1, &svg2] {
        let code = run(&[
            "plot",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--axis",
            "h",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let doc1 = std::fs::read(&svg1).unwrap();
    let doc2 = std::fs::read(&svg2).unwrap();
    assert_eq!(doc1, doc2, "plot output must be byte-identical");
    let text = String::from_utf8(doc1).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(text.contains(">a<") && text.contains(">b<"));
    assert!(text.contains("h^1/2") && text.contains("h^1"));
}

#[test]
fn plot_rejects_empty_or_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(
        &empty,
        "level,ndofs,h_max,energy_error,estimator,interface_estimator,rate\n",
    )
    .unwrap();
    let out = dir.path().join("plot.svg");
    assert_eq!(
        run(&[
            "plot",
            empty.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
    let malformed = dir.path().join("bad.csv");
    std::fs::write(&malformed, "level,stuff\n0,1\n").unwrap();
    assert_eq!(
        run(&[
            "plot",
            malformed.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
    assert!(!out.exists());
}

#[test]
fn binary_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bin.csv");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_mortar-fem"))
        .args([
            "study",
            "--problem",
            "smooth",
            "--method",
            "nitsche-onesided",
            "--mode",
            "uniform",
            "--degree",
            "2",
            "--levels",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.exists());

    let status = std::process::Command::new(env!("CARGO_BIN_EXE_mortar-fem"))
        .args(["study", "--degree", "3", "--out", "x.csv"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
