use std::fs;

use ortho_traj::cli::{run_with, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("ortho-traj").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn report(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn intersect_reports_two_crossings() {
    let (code, out, _) = run(&["intersect", "-m", "1", "-C", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("2 crossing(s)"), "{out}");
    let orth: Vec<&str> = out.lines().filter(|l| l.ends_with(" orthogonal")).collect();
    assert_eq!(orth.len(), 1);
    assert!(
        orth[0].contains("(1.000000000000, -2.000000000000)"),
        "{}",
        orth[0]
    );
    assert!(out.contains("(9.000000000000, 6.000000000000)"));
}

#[test]
fn json_report_echoes_numeric_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let args = [
        "--json-out",
        path.to_str().unwrap(),
        "intersect",
        "-m",
        "-0.37",
        "-C",
        "1.25e0",
        "--t-min",
        "-7.5",
        "--t-max",
        "6.125",
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let r = report(&path);
    assert_eq!(r["command"], "intersect");
    assert_eq!(r["pass"], true);
    assert_eq!(r["inputs"]["m"].as_f64(), Some(-0.37));
    assert_eq!(r["inputs"]["C"].as_f64(), Some(1.25));
    assert_eq!(r["inputs"]["t_min"].as_f64(), Some(-7.5));
    assert_eq!(r["inputs"]["t_max"].as_f64(), Some(6.125));
    assert_eq!(r["results"]["orthogonal_count"], 1);

    let args = [
        "--json-out",
        path.to_str().unwrap(),
        "trace",
        "--x0",
        "0",
        "--y0",
        "3",
        "--p0",
        "1",
        "--tol",
        "1e-9",
        "--step",
        "0.05",
        "--max-arc",
        "4",
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let r = report(&path);
    for (k, v) in [
        ("x0", 0.0),
        ("y0", 3.0),
        ("p0", 1.0),
        ("tol", 1e-9),
        ("step", 0.05),
        ("max_arc", 4.0),
    ] {
        assert_eq!(r["inputs"][k].as_f64(), Some(v), "{k}");
    }
    assert!((r["results"]["level"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn classify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let (code, out, _) = run(&["--json-out", path.to_str().unwrap(), "classify", "-C", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Parabola"), "{out}");
    assert_eq!(report(&path)["results"]["verdict"], "parabola");
    let (code, out, _) = run(&["classify", "-C", "-4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("NotConic") && out.contains("0.76642"), "{out}");
}

#[test]
fn verify_all_passes() {
    let (code, out, _) = run(&["verify", "--suite", "all"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn verify_single_suite() {
    let (code, out, _) = run(&["verify", "--suite", "cusps"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.trim_end().ends_with("overall: PASS"));
}

#[test]
fn plot_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1a.svg");
    let (code, out, err) = run(&["plot", "--preset", "fig1a", "-o", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("wrote "));
    let svg = fs::read_to_string(&path).unwrap();
    let (_, stdout_svg, _) = run(&["plot", "--preset", "fig1a"]);
    assert_eq!(svg, stdout_svg);
}

#[test]
fn plot_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"curves": [{"C": 0.5, "t_range": [-2, 2], "dashed": false}], "lines": [0.5],
            "x_window": [-2, 6], "y_window": [-5, 5], "samples_per_curve": 50,
            "width_px": 300, "height_px": 300}"#,
    )
    .unwrap();
    let (code, svg, err) = run(&["plot", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(
        doc.descendants().filter(|n| n.has_tag_name("path")).count(),
        2
    );
}

#[test]
fn config_file_supplies_values_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let json = dir.path().join("r.json");
    fs::write(&cfg, r#"{"intersect": {"m": 2.0, "C": 0.0}}"#).unwrap();
    let (code, _, err) = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--json-out",
        json.to_str().unwrap(),
        "intersect",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(report(&json)["inputs"]["m"].as_f64(), Some(2.0));
    let (code, _, _) = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--json-out",
        json.to_str().unwrap(),
        "intersect",
        "-m",
        "-1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(report(&json)["inputs"]["m"].as_f64(), Some(-1.0));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"intersect": {"m": 1.0, "slope": 3}}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["intersect", "-C", "0"],
        vec!["intersect", "-m", "abc", "-C", "0"],
        vec!["verify", "--suite", "nope"],
        vec!["plot", "--preset", "fig9"],
        vec!["plot"],
        vec!["trace", "--x0", "1", "--y0", "0"],
        vec!["--config", cfg.to_str().unwrap(), "intersect"],
        vec!["--config", "/nonexistent/cfg.json", "classify", "-C", "1"],
    ];
    for args in cases {
        let (code, _, err) = run(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn inconclusive_classification_exits_1() {
    // Near C = 0 the conic residual falls between the accept and reject bands.
    let (code, out, _) = run(&["classify", "-C", "1e-3"]);
    assert_eq!(code, EXIT_FAIL, "{out}");
    assert!(out.contains("Inconclusive"));
}

#[test]
fn help_exits_0() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verify") && out.contains("plot"));
}
