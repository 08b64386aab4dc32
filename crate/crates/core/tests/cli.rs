use std::fs;
use std::path::Path;

use aplorder::cli::{
    curve_csv, emit_curve_csv, run_with_output, table_csv, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE,
};
use aplorder::estimation::sample_gumbel_pareto;
use aplorder::{
    bivariate_grid, elliptical_curve, CovarianceMatrix, DiversificationCurve, Model, QuadConfig, TailIndex,
};
use serde_json::Value;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Outcome {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("stdout is a JSON summary")
    }
}

fn run(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("aplorder").chain(args.iter().copied());
    let code = run_with_output(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn a(x: f64) -> TailIndex {
    TailIndex::new(x).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn gumbel_curve_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let r = run(&[
        "curve",
        "--model",
        "gumbel",
        "--theta",
        "2",
        "--alpha",
        "4",
        "--grid",
        "101",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("xi1,xi2,value\n"));
    assert!(text.ends_with('\n'));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[0][2], 1.0);
    assert_eq!(rows[100][2], 1.0);
    let summary = r.json();
    assert_eq!(summary["command"], "curve");
    assert_eq!(summary["version"], aplorder::VERSION);
    assert_eq!(summary["input"]["theta"], 2.0);
    assert_eq!(summary["outputs"][0], path_str(&out));
}

#[test]
fn comonotone_curve_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let r = run(&[
        "curve",
        "--model",
        "comonotone",
        "--d",
        "2",
        "--alpha",
        "2",
        "--grid",
        "11",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[2] == 1.0));
}

#[test]
fn gumbel_order_example() {
    let r = run(&["order", "--left", "gumbel:1.4", "--right", "gumbel:2", "--alpha", "8"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.json()["result"]["verdict"], "left_precedes");
    let r = run(&["order", "--left", "gumbel:2", "--right", "gumbel:1.4", "--alpha", "8"]);
    assert_eq!(r.json()["result"]["verdict"], "right_precedes");
}

#[test]
fn independence_csv_rows() {
    let grid = bivariate_grid(3).unwrap();
    let curve = Model::Independent { d: 2 }.curve(a(2.0), &grid, &QuadConfig::default()).unwrap();
    assert_eq!(curve_csv(&curve), "xi1,xi2,value\n0,1,1\n0.5,0.5,0.5\n1,0,1\n");
}

#[test]
fn emit_curve_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = DiversificationCurve { alpha: a(2.0), grid: vec![], values: vec![], non_canonical: false };
    let p = dir.path().join("empty.csv");
    emit_curve_csv(&empty, &p).unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), "xi1,xi2,value\n");

    let curve = Model::Gumbel { theta: 1.4 }
        .curve(a(3.0), &bivariate_grid(17).unwrap(), &QuadConfig::default())
        .unwrap();
    let (p1, p2) = (dir.path().join("1.csv"), dir.path().join("2.csv"));
    emit_curve_csv(&curve, &p1).unwrap();
    emit_curve_csv(&curve, &p2).unwrap();
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    // twelve significant digits
    let text = fs::read_to_string(&p1).unwrap();
    let value = text.lines().nth(5).unwrap().rsplit(',').next().unwrap().to_string();
    let digits = value.trim_start_matches("0.").trim_start_matches('0').len();
    assert!(digits <= 12, "{value}");
    assert_eq!(
        value.parse::<f64>().unwrap(),
        aplorder::cli::format_sig(curve.values[4], 12).parse::<f64>().unwrap()
    );
    assert!(emit_curve_csv(&curve, &dir.path().join("missing").join("c.csv")).is_err());
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for i in 0..2 {
        let c = dir.path().join(format!("curve{i}.csv"));
        let s = dir.path().join(format!("cloud{i}.csv"));
        let e = dir.path().join(format!("est{i}.csv"));
        assert_eq!(
            run(&[
                "curve",
                "--model",
                "galambos:0.7",
                "--alpha",
                "1.5",
                "--grid",
                "21",
                "--out",
                path_str(&c)
            ])
            .code,
            EXIT_OK
        );
        assert_eq!(
            run(&[
                "simulate",
                "--model",
                "gumbel:2",
                "--alpha",
                "2",
                "--n",
                "5000",
                "--seed",
                "3",
                "--out",
                path_str(&s)
            ])
            .code,
            EXIT_OK
        );
        assert_eq!(
            run(&[
                "estimate",
                "--model",
                "gumbel:2",
                "--alpha",
                "2",
                "--n",
                "20000",
                "--seed",
                "3",
                "--out",
                path_str(&e)
            ])
            .code,
            EXIT_OK
        );
        seen.push([c, s, e].map(|p| fs::read(p).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("c.csv");
    fs::write(
        &cfg,
        format!(
            r#"{{"command": "curve", "model": "gumbel", "theta": 2.0, "alpha": [4.0], "grid": 11, "out": "{}"}}"#,
            path_str(&out)
        ),
    )
    .unwrap();
    let r = run(&["curve", "--config", path_str(&cfg)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(data_rows(&fs::read_to_string(&out).unwrap()).len(), 11);

    let r = run(&["curve", "--config", path_str(&cfg), "--grid", "5", "--theta", "3"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(data_rows(&fs::read_to_string(&out).unwrap()).len(), 5);
    assert_eq!(r.json()["input"]["theta"], 3.0);

    fs::write(&cfg, r#"{"modle": "gumbel"}"#).unwrap();
    assert_eq!(run(&["curve", "--config", path_str(&cfg)]).code, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["curve".into(), "--bogus".into()],
        vec!["transmogrify".into()],
        vec![
            "curve".into(),
            "--model".into(),
            "gumbel".into(),
            "--theta".into(),
            "0.5".into(),
            "--alpha".into(),
            "2".into(),
        ],
        vec!["curve".into(), "--model".into(), "gumbel:2".into(), "--alpha".into(), "-1".into()],
        vec!["curve".into(), "--model".into(), "gumbel:2".into()],
        vec!["order".into(), "--left".into(), "gumbel:2".into(), "--alpha".into(), "2".into()],
        vec![
            "simulate".into(),
            "--model".into(),
            "galambos:1".into(),
            "--alpha".into(),
            "2".into(),
            "--n".into(),
            "10".into(),
            "--out".into(),
            dir.path().join("x.csv").display().to_string(),
        ],
        vec![
            "curve".into(),
            "--model".into(),
            "gumbel:2".into(),
            "--alpha".into(),
            "2".into(),
            "--grid".into(),
            "5".into(),
            "--out".into(),
            dir.path().join("no").join("such").join("c.csv").display().to_string(),
        ],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = run(&refs);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}: {}", r.stdout);
        assert!(!r.stderr.is_empty());
    }
}

#[test]
fn unconverged_quadrature_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let r = run(&[
        "curve",
        "--model",
        "gumbel:2",
        "--alpha",
        "2",
        "--grid",
        "2",
        "--quad-tol",
        "1e-30",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(r.code, EXIT_NUMERICAL);
    assert!(r.stderr.contains("quadrature"), "{}", r.stderr);
    assert!(!out.exists());
}

#[test]
fn library_calls_reproduce_cli_files() {
    let dir = tempfile::tempdir().unwrap();
    let q = QuadConfig::default();

    let out = dir.path().join("gumbel.csv");
    assert_eq!(
        run(&["curve", "--model", "gumbel:2", "--alpha", "4", "--grid", "41", "--out", path_str(&out)]).code,
        EXIT_OK
    );
    let grid = bivariate_grid(41).unwrap();
    let curve = Model::Gumbel { theta: 2.0 }.curve(a(4.0), &grid, &q).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), curve_csv(&curve));

    let out = dir.path().join("ellip.csv");
    assert_eq!(
        run(&[
            "curve",
            "--model",
            "elliptical",
            "--rho",
            "0.3",
            "--alpha",
            "2",
            "--grid",
            "21",
            "--out",
            path_str(&out)
        ])
        .code,
        EXIT_OK
    );
    let cov = CovarianceMatrix::bivariate(0.3).unwrap();
    let grid = bivariate_grid(21).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), curve_csv(&elliptical_curve(&cov, a(2.0), &grid).unwrap()));

    let out = dir.path().join("sweep.csv");
    assert_eq!(
        run(&[
            "curve",
            "--model",
            "galambos:1",
            "--alpha",
            "0.5",
            "--alpha",
            "2",
            "--grid",
            "11",
            "--out",
            path_str(&out)
        ])
        .code,
        EXIT_OK
    );
    let grid = bivariate_grid(11).unwrap();
    let m = Model::Galambos { theta: 1.0 };
    let cols: Vec<Vec<f64>> = [0.5, 2.0].iter().map(|&x| m.curve(a(x), &grid, &q).unwrap().values).collect();
    let text = fs::read_to_string(&out).unwrap();
    let labels: Vec<String> = text.lines().next().unwrap().split(',').skip(2).map(String::from).collect();
    assert_eq!(text, table_csv(&grid, &labels, &cols));

    let out = dir.path().join("cloud.csv");
    assert_eq!(
        run(&[
            "simulate",
            "--model",
            "gumbel:2",
            "--alpha",
            "2",
            "--n",
            "3000",
            "--seed",
            "11",
            "--out",
            path_str(&out)
        ])
        .code,
        EXIT_OK
    );
    let mut buf = Vec::new();
    sample_gumbel_pareto(2.0, 2.0, 2, 3000, 11).unwrap().write_csv(&mut buf).unwrap();
    assert_eq!(fs::read(&out).unwrap(), buf);
}

#[test]
fn presets_write_multi_column_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig.csv");
    let r = run(&["curve", "--preset", "figure1a", "--grid", "11", "--out", path_str(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let text = fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert!(header.len() > 3, "{header:?}");
    assert_eq!(data_rows(&text).len(), 11);
    assert_eq!(run(&["curve", "--preset", "figure9z"]).code, EXIT_USAGE);
}

#[test]
fn other_subcommands_report_results() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&["canonicalize", "--model", "independent", "--d", "3", "--alpha", "2"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.json()["result"]["validation"]["pass"], true);

    let atoms = dir.path().join("atoms.json");
    fs::write(&atoms, r#"{"atoms": [{"direction": [0.5, 0.5], "weight": 1.0}]}"#).unwrap();
    let r = run(&["canonicalize", "--input", path_str(&atoms), "--alpha", "2"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.json()["result"]["total_mass"], 2.0);

    let out = dir.path().join("b.json");
    let r = run(&[
        "bounds",
        "--model",
        "gumbel:1.4",
        "--alpha",
        "0.5",
        "--alpha",
        "3",
        "--grid",
        "21",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let written: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(written.is_object() || written.is_array());
}

#[test]
fn estimate_compares_two_models() {
    use aplorder::estimation::{sample_comonotone_pareto, sample_independent_pareto, tail_ratio_series};
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.json");
    let args = [
        "estimate",
        "--left",
        "independent",
        "--right",
        "comonotone",
        "--alpha",
        "2",
        "--n",
        "50000",
        "--seed",
        "7",
        "--levels",
        "0.99",
        "--u",
        "5",
        "--out",
        path_str(&out),
    ];
    let r = run(&args);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let first = fs::read(&out).unwrap();
    assert_eq!(run(&args).code, EXIT_OK);
    assert_eq!(fs::read(&out).unwrap(), first);

    let written: Value = serde_json::from_slice(&first).unwrap();
    let x = sample_independent_pareto(2.0, 2, 50_000, 7).unwrap();
    let y = sample_comonotone_pareto(2.0, 2, 50_000, 8).unwrap();
    let lib = tail_ratio_series(&x, &y, &aplorder::Portfolio::bivariate(0.5).unwrap(), &[0.99]).unwrap();
    assert_eq!(written["comparisons"][0]["tail_ratios"], serde_json::to_value(&lib).unwrap());
    assert_eq!(written["comparisons"][0]["stop_loss"]["regime"], "increasing_convex");

    let r = run(&["estimate", "--left", "independent", "--alpha", "2", "--n", "100"]);
    assert_eq!(r.code, EXIT_USAGE);
}
