use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn kcurve(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kcurve").chain(args.iter().copied());
    let code = kcurve::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_table(dir: &Path, name: &str, header: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut text = format!("{header}\n");
    for (x, y) in rows {
        text.push_str(&format!("{x},{y}\n"));
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn sampled(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            (x, f(x))
        })
        .collect()
}

fn constant_field(dir: &Path, name: &str, k: f64, lo: f64, hi: f64) -> String {
    write_table(dir, name, "x,kappa", [(lo, k), (hi, k)])
}

#[test]
fn sigma_prints_value_or_inf() {
    let dir = TempDir::new().unwrap();
    let zero = constant_field(dir.path(), "zero.csv", 0.0, 0.0, 4.0);
    let one = constant_field(dir.path(), "one.csv", 1.0, 0.0, 4.0);
    assert_eq!(kcurve(&["sigma", "--kappa", &zero, "--theta", "1", "--t", "0.5"]), (0, "0.5\n".into(), String::new()));
    assert_eq!(kcurve(&["sigma", "--kappa", &one, "--theta", "3.2", "--t", "0.5"]).1, "inf\n");
    let (code, out, _) = kcurve(&["sigma", "--kappa", &one, "--theta", "1", "--t", "0.25", "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["finite"], true);
    let exact = 0.25f64.sin() / 1f64.sin();
    assert!((v["value"].as_f64().unwrap() - exact).abs() < 1e-10);
    let (_, out, _) = kcurve(&["sigma", "--kappa", &one, "--theta", "3.2", "--t", "0.5", "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], Value::Null);
    assert_eq!(v["finite"], false);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,kappa\n0,1\n1,abc\n").unwrap();
    let (code, out, err) = kcurve(&["sigma", "--kappa", bad.to_str().unwrap(), "--theta", "1", "--t", "0.5"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("line 3"), "{err}");
    let one = constant_field(dir.path(), "one.csv", 1.0, 0.0, 4.0);
    assert_eq!(kcurve(&["sigma", "--kappa", &one, "--theta", "5", "--t", "0.5"]).0, 2);
    assert_eq!(kcurve(&["sigma", "--kappa", "missing.csv", "--theta", "1", "--t", "0.5"]).0, 2);
    assert_eq!(kcurve(&["sigma", "--kappa", &one, "--theta", "1"]).0, 2);
    assert_eq!(kcurve(&["frobnicate"]).0, 2);
    assert_eq!(kcurve(&["certify", "--S", &one, "--kappa", &one, "--N", "0.5"]).0, 2);
    assert_eq!(kcurve(&["--help"]).0, 0);
}

#[test]
fn sin_matches_closed_form() {
    let (code, out, _) = kcurve(&["sin", "--kappa", "model:const:1:0:4", "--L", "2", "--step", "0.01"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,s,c"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!((v[1] - v[0].sin()).abs() < 1e-9 && (v[2] - v[0].cos()).abs() < 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 201);
    let (_, out, _) = kcurve(&["sin", "--kappa", "model:const:1:0:4", "--L", "4", "--json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["first_zero"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let s = write_table(dir.path(), "s.csv", "x,S", sampled(-2.0, 2.0, 400, |x| 0.5 * x * x));
    let k1 = constant_field(dir.path(), "k1.csv", 1.0, -2.0, 2.0);
    let k15 = constant_field(dir.path(), "k15.csv", 1.5, -2.0, 2.0);
    let (code, out, _) = kcurve(&["certify", "--S", &s, "--kappa", &k1, "--N", "inf"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("pass"));
    for crit in ["i", "ii", "iii", "iv"] {
        let (code, out, _) = kcurve(&["certify", "--S", &s, "--kappa", &k15, "--N", "inf", "--criterion", crit]);
        assert_eq!(code, 1, "criterion {crit}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "fail");
        assert!(v["worst_margin"].as_f64().unwrap() < 0.0);
        assert!(v["worst_witness"].is_object());
    }
}

#[test]
fn cde_overclaim_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let gauss = write_table(dir.path(), "gauss.csv", "x,weight", sampled(-8.0, 8.0, 3200, |x| (-0.5 * x * x).exp()));
    let k1 = constant_field(dir.path(), "k1.csv", 1.0, -8.0, 8.0);
    let k12 = constant_field(dir.path(), "k12.csv", 1.2, -8.0, 8.0);
    let normal = |m: f64, s: f64| move |x: f64| (-(x - m) * (x - m) / (2.0 * s * s)).exp();
    let mu0 = write_table(dir.path(), "mu0.csv", "x,density", sampled(-3.5, 1.5, 2000, normal(-1.0, 0.5)));
    let mu1 = write_table(dir.path(), "mu1.csv", "x,density", sampled(-1.0, 3.0, 2000, normal(1.0, 0.4)));
    let args = |k: &str| vec!["cde", "--space", &gauss, "--kappa", k, "--N", "inf", "--mu0", &mu0, "--mu1", &mu1]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let run = |a: Vec<String>| kcurve(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let pass = run(args(&k1));
    assert_eq!(pass.0, 0, "{}", pass.1);
    let (code, out, _) = run(args(&k12));
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "fail");
    assert_eq!(v["worst_witness"]["kind"], "time");
}

#[test]
fn bg_reports_ratios() {
    let (code, out, _) = kcurve(&[
        "bg", "--space", "model:gauss", "--x0", "0", "--r", "0.5", "--R", "1.5", "--kappa-lower", "0", "--N", "3",
    ]);
    assert_eq!(code, 0, "{out}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "quantity,observed,model,sharp,margin");
    assert!(lines[1].starts_with("s_ratio,") && lines[2].starts_with("v_ratio,"));
    assert_eq!(lines.len(), 3);
    let (code, _, _) = kcurve(&[
        "bg", "--space", "model:gauss", "--x0", "0", "--r", "2", "--R", "1", "--kappa-lower", "0", "--N", "3",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn flow_reports_have_fixed_columns() {
    let base = ["flow", "--f", "model:quadratic", "--x0", "1", "--horizon", "0.5", "--dt", "1e-3"];
    for (report, kappa, n) in [
        ("dissipation", "model:const:1", "inf"),
        ("evi", "model:const:1", "inf"),
        ("contraction", "model:quadratic-bound", "2"),
    ] {
        let mut args = base.to_vec();
        args.extend(["--report", report, "--kappa", kappa, "--N", n]);
        let (code, out, err) = kcurve(&args);
        assert_eq!(code, 0, "{report}: {err}");
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("s,value,bound,margin"));
        assert!(lines.all(|l| l.split(',').count() == 4));
    }
    let mut args = base.to_vec();
    args.extend(["--report", "evi", "--kappa", "model:const:1.2", "--N", "inf", "--z", "-1", "--tol", "1e-6"]);
    let (code, out, _) = kcurve(&args);
    assert_eq!(code, 1);
    let witness: Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(witness["report"], "evi");
    assert!(witness["margin"].as_f64().unwrap() < -1e-6);
}

fn sweep(dir: &Path, name: &str, config: &str) -> (i32, String, String) {
    let path = dir.join(name);
    fs::write(&path, config).unwrap();
    kcurve(&["sweep", "--config", path.to_str().unwrap()])
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let (code, out, _) = sweep(dir.path(), "e.cfg", "command = sigma\nkappa = model:const:1\ntheta =\n");
    assert_eq!(code, 0);
    assert_eq!(out, "theta,t,value,finite\n");
}

#[test]
fn sigma_sweep_flags_infinite_past_pi() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = sigma\nkappa = model:const:1\ntheta = 0.1:3.0:0.1, 3.1, 3.14159, 3.1416, 3.2:3.5:0.1\n\
               t = 0.25, 0.5\noutput = out\n";
    let (code, _, _) = sweep(dir.path(), "s.cfg", cfg);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(dir.path().join("out/sigma.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let theta: f64 = f[0].parse().unwrap();
        assert_eq!(f[3] == "false", theta >= std::f64::consts::PI, "{line}");
        assert_eq!(f[2] == "inf", f[3] == "false");
        rows += 1;
    }
    assert_eq!(rows, 2 * 37);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"], 74);
    assert_eq!(summary["extra"]["smallest_infinite_theta"], 3.1416);
}

#[test]
fn contraction_sweep_margins() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = contraction\nkappa = model:quadratic-bound\nN = 2, 10, inf\nlambda = 0.5, 1, 2\noutput = out\n";
    let (code, out, err) = sweep(dir.path(), "c.cfg", cfg);
    assert_eq!(code, 0, "{out}{err}");
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"], 9);
    assert!(summary["min_margin"].as_f64().unwrap() >= -1e-4);
    let csv = fs::read_to_string(dir.path().join("out/contraction.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("N,lambda,min_margin,r,verdict"));
}

#[test]
fn failing_sweep_emits_rerunnable_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = "command = cde\nseed = 3\nkappa = model:const:1.3:-8:8\nN = inf\npairs = 4\nsd = 0.3, 0.4\n";
    let (code, out, _) = sweep(dir.path(), "f.cfg", cfg);
    assert_eq!(code, 1);
    let witness: Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    let cell = &witness["failure"];
    let (code, out, _) = kcurve(&[
        "cde",
        "--space",
        cell["space"].as_str().unwrap(),
        "--kappa",
        cell["kappa"].as_str().unwrap(),
        "--N",
        "inf",
        "--mu0",
        cell["mu0"].as_str().unwrap(),
        "--mu1",
        cell["mu1"].as_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let cert: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(cert["worst_margin"], cell["margin"]);
}

#[test]
fn sweeps_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = |out: &str| format!("command = cde\nseed = 11\nkappa = model:const:1\nN = inf\npairs = 6\noutput = {out}\n");
    sweep(dir.path(), "a.cfg", &cfg("a"));
    sweep(dir.path(), "b.cfg", &cfg("b"));
    for file in ["cde.csv", "summary.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let other = format!("command = cde\nseed = 12\nkappa = model:const:1\nN = inf\npairs = 6\noutput = c\n");
    sweep(dir.path(), "c.cfg", &other);
    assert_ne!(fs::read(dir.path().join("a/cde.csv")).unwrap(), fs::read(dir.path().join("c/cde.csv")).unwrap());
}

#[test]
fn config_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let (code, _, err) = sweep(dir.path(), "bad.cfg", "command = sigma\nkappa = model:const:1\ntheta = 1, two\n");
    assert_eq!(code, 2);
    assert!(err.contains("config line 3"), "{err}");
    let (code, _, err) = sweep(dir.path(), "bad2.cfg", "command = sigma\nwhatever = 1\n");
    assert_eq!(code, 2);
    assert!(err.contains("config line 2"), "{err}");
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("t.cfg");
    fs::write(&cfg, "command = sigma\nkappa = model:const:1\ntheta = 0.5:2.5:0.5\nt = 0.5\n").unwrap();
    let bin = env!("CARGO_BIN_EXE_kcurve");
    let run = |threads: &str| {
        Command::new(bin)
            .args(["sweep", "--config", cfg.to_str().unwrap()])
            .env("KCURVE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("lots").status.code(), Some(2));
}
