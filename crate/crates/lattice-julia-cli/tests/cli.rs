use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-julia"))
        .args(args)
        .env_remove("LATTICE_JULIA_OUT")
        .env_remove("LATTICE_JULIA_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a tab-separated table, split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

#[test]
fn classify_examples() {
    let o = run(&["classify", "-d", "2", "--lambda", "4,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CaptureDepth(0), quasicircle=true"), "{}", stdout(&o));

    let o = run(&["classify", "-d", "2", "--lambda", "1.319448,1.633170"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("CaptureDepth(3)"));

    let o = run(&["classify", "-d", "2", "--lambda", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Degenerate");
}

#[test]
fn classify_exit_codes() {
    let o = run(&["classify", "--lambda", "1.5,0.866025"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("NonEscapingWithinBudget"));
    assert_eq!(run(&["classify", "--lambda", "4,x"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "-d", "1", "--lambda", "4"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "--lambda", "4", "--max-iter", "0"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn classify_record_has_five_conditions() {
    let o = run(&["classify", "--lambda", "-3,0.5", "--record"]);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].len(), 12);
    assert_eq!(r[0][11], "true");
}

#[test]
fn help_documents_defaults() {
    for sub in ["classify", "render-julia", "render-param", "dimension", "verify-asymptotic", "series-check", "centers", "real-fixed"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        let text = stdout(&o);
        assert!(text.contains("--threads"), "{sub}");
        if !matches!(sub, "series-check" | "real-fixed") {
            assert!(text.contains("[default: 5000]"), "{sub}");
        }
    }
    assert!(stdout(&run(&["series-check", "--help"])).contains("[default: 0.01,0.02,0.04]"));
}

#[test]
fn dimension_table() {
    let o = run(&["dimension", "-d", "2", "--lambda", "1000", "-n", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# lattice-julia format v1\n"));
    let r = rows(&out);
    assert_eq!(r[0][6], "1.003607");
    assert!(stderr(&o).contains("fitted error constant"));

    let o = run(&["dimension", "-d", "2", "--lambda", "1e6"]);
    let diff: f64 = rows(&stdout(&o))[0][7].parse().unwrap();
    assert!(diff.abs() < 1e-5, "{diff}");
}

#[test]
fn dimension_skips_and_rejects() {
    assert_eq!(run(&["dimension", "-d", "2"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("lambdas.txt");
    std::fs::write(&file, "# sample parameters\n1e4\n\n1.319448,1.633170  # captured at depth 3\n").unwrap();
    let o = run(&["dimension", "--lambda-file", file.to_str().unwrap(), "-n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&stdout(&o)).len(), 1);
    assert!(stderr(&o).contains("skipped lambda = 1.319448"));
    assert_eq!(run(&["dimension", "--lambda", "1.319448,1.633170", "-n", "8"]).status.code(), Some(2));
    assert_eq!(run(&["dimension", "--lambda", "1e4", "-n", "40"]).status.code(), Some(1));
}

fn status_of<'a>(r: &'a [Vec<String>], id: &str) -> Vec<&'a str> {
    r.iter().filter(|f| f[0] == id).map(|f| f[7].as_str()).collect()
}

#[test]
fn series_check_examples() {
    let o = run(&["series-check", "-d", "2", "-n", "4", "--alpha", "0.02"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    for id in ["sigma_difference_sum", "u1_sigma_sum", "u1_u1_sum", "a_a_sum"] {
        assert_eq!(status_of(&r, id), ["pass"], "{id}");
    }

    let o = run(&["series-check", "-d", "3", "-n", "3", "--alpha", "0.02"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let vanishing: Vec<_> = r.iter().filter(|f| f[0].contains("_mean[")).collect();
    assert!(!vanishing.is_empty());
    for f in vanishing {
        assert!(f[5].parse::<f64>().unwrap() < 1e-10, "{f:?}");
    }

    let o = run(&["series-check", "-d", "2", "-n", "8", "--alpha", "0.02", "--second-order-n", "8", "--dim", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(status_of(&rows(&stdout(&o)), "second_order_coefficient"), ["pass"]);
}

#[test]
fn series_check_rejects_large_alpha() {
    assert_eq!(run(&["series-check", "--alpha", "0.2"]).status.code(), Some(1));
}

#[test]
fn verify_asymptotic_passes() {
    let o = run(&["verify-asymptotic", "-d", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(rows(&stdout(&o)).iter().all(|f| f[5] == "pass"));
}

#[test]
fn centers_and_real_fixed_points() {
    let o = run(&["centers", "-d", "2", "-n", "1", "--seed", "1.5,0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    let re: f64 = r[0][2].parse().unwrap();
    let im: f64 = r[0][3].parse().unwrap();
    assert!((re - 2.0).abs() < 1e-8 && im.abs() < 1e-8);

    let o = run(&["real-fixed", "-d", "2", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let xs: Vec<f64> = rows(&stdout(&o)).iter().map(|f| f[0].parse().unwrap()).collect();
    assert!(xs.iter().any(|&x| x > 1.0));
    assert_eq!(run(&["real-fixed", "--lambda", "0"]).status.code(), Some(1));
}

fn render_param(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let o = run(&[
        "render-param",
        "--threads",
        threads,
        "--out-dir",
        dir.to_str().unwrap(),
        "--width",
        "48",
        "--height",
        "40",
        "--bounds",
        "-3,5,-4,4",
        "--max-iter",
        "500",
        "--palette",
        "depth-cycle",
        "--output",
        name,
        "--grid",
        &format!("{name}.txt"),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn renders_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = render_param(dir.path(), "a.ppm", "1");
    let b = render_param(dir.path(), "b.ppm", "4");
    assert_eq!(a, b);
    assert!(a.starts_with(b"P6\n48 40\n255\n"));
    assert_eq!(a.len(), 3 * 48 * 40 + b"P6\n48 40\n255\n".len());
    assert!(dir.path().join("a.ppm.json").exists());
    assert_eq!(
        std::fs::read(dir.path().join("a.ppm.txt")).unwrap(),
        std::fs::read(dir.path().join("b.ppm.txt")).unwrap()
    );
}

#[test]
fn render_julia_uses_output_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lattice-julia"))
        .args(["render-julia", "--lambda", "30,0", "--width", "64", "--height", "64"])
        .env("LATTICE_JULIA_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("julia.ppm").exists());
    assert!(stderr(&o).contains("undetermined: 0"));
    assert_eq!(run(&["render-julia", "--lambda", "30,0", "--bounds", "1,1,0,1"]).status.code(), Some(1));
}
