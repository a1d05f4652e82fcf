//! Config-driven sweeps over a Cartesian parameter grid.
//!
//! Cells run concurrently and rows are collected in grid order, so the CSV and
//! the summary are byte-identical for equal configs and seeds.

use std::fmt::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use kcurve_core::convexity::{Dimension, Verdict, DEFAULT_TOL};
use kcurve_core::distortion::DistortionProfile;
use kcurve_core::evi::gradient_flow;
use kcurve_core::wasserstein::{bishop_gromov_check, check_entropic_cd, CD_TOL};

use crate::commands::{certify_on_overlap, contraction_rows, criterion, time_grid};
use crate::format::{dimension, extended, float, Csv};
use crate::{inputs, CliError, Context, Outcome, SweepConfig};

/// Default tolerance of the contraction sweep.
pub const CONTRACTION_TOL: f64 = 1e-4;

/// Rows and summary of one sweep.
pub struct SweepOutput {
    pub command: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Summary,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub seed: u64,
    pub cells: usize,
    pub failed_cells: usize,
    /// Smallest margin over all cells, absent for sweeps without margins.
    pub min_margin: Option<f64>,
    /// Parameters of the cell attaining `min_margin`.
    pub min_witness: Option<Value>,
    /// Parameters of the first failing cell in grid order.
    pub failure: Option<Value>,
    pub extra: Value,
}

pub fn run(ctx: &Context, cfg: &SweepConfig, dir: Option<&Path>, out: &mut String) -> Result<Outcome, CliError> {
    let result = evaluate(cfg)?;
    let mut csv = Csv::new(&result.header);
    for r in &result.rows {
        csv.row(r);
    }
    let csv = csv.into_string();
    let summary = serde_json::to_string_pretty(&result.summary).expect("serializable") + "\n";
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            let csv_path = dir.join(format!("{}.csv", result.command));
            std::fs::write(&csv_path, &csv).map_err(|e| io_error(&csv_path, e))?;
            let json_path = dir.join("summary.json");
            std::fs::write(&json_path, &summary).map_err(|e| io_error(&json_path, e))?;
        }
        None if ctx.json => out.push_str(&summary),
        None => out.push_str(&csv),
    }
    let failed = result.summary.failed_cells > 0;
    if failed {
        let witness = json!({"command": result.command, "failure": result.summary.failure});
        let _ = writeln!(out, "{}", serde_json::to_string(&witness).expect("serializable"));
    }
    Ok(Outcome::from_pass(!failed))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Runs the sweep named by the config's `command` key.
pub fn evaluate(cfg: &SweepConfig) -> Result<SweepOutput, CliError> {
    let command = cfg.string("command")?.to_string();
    let seed = cfg.seed()?;
    let cells = match command.as_str() {
        "sigma" => sigma_sweep(cfg)?,
        "contraction" => contraction_sweep(cfg)?,
        "cde" => cde_sweep(cfg, seed)?,
        "bg" => bg_sweep(cfg)?,
        "certify" => certify_sweep(cfg)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown sweep command `{other}`, expected sigma, contraction, cde, bg or certify"
            )))
        }
    };
    Ok(summarize(command, seed, cells))
}

/// One evaluated cell: its CSV row, margin, pass flag and parameters.
struct Cell {
    row: Vec<String>,
    margin: Option<f64>,
    pass: bool,
    params: Value,
}

struct Cells {
    header: Vec<&'static str>,
    cells: Vec<Cell>,
    extra: Value,
}

fn summarize(command: String, seed: u64, c: Cells) -> SweepOutput {
    let mut min_margin: Option<f64> = None;
    let mut min_witness = None;
    let mut failure = None;
    let mut failed_cells = 0;
    for cell in &c.cells {
        if let Some(m) = cell.margin {
            if min_margin.is_none_or(|cur| m < cur) {
                min_margin = Some(m);
                min_witness = Some(cell.params.clone());
            }
        }
        if !cell.pass {
            failed_cells += 1;
            if failure.is_none() {
                failure = Some(cell.params.clone());
            }
        }
    }
    SweepOutput {
        command: command.clone(),
        header: c.header,
        rows: c.cells.iter().map(|cell| cell.row.clone()).collect(),
        summary: Summary {
            command,
            seed,
            cells: c.cells.len(),
            failed_cells,
            min_margin,
            min_witness,
            failure,
            extra: c.extra,
        },
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::String(float(v))
    }
}

fn dim_value(n: Dimension) -> Value {
    match n {
        Dimension::Finite(x) => json!(x),
        Dimension::Infinite => json!("inf"),
    }
}

fn sigma_sweep(cfg: &SweepConfig) -> Result<Cells, CliError> {
    let kappa = cfg.string("kappa")?;
    let field = inputs::curvature(kappa, &cfg.base, None)?;
    let thetas = cfg.grid("theta", &[])?;
    let ts = cfg.grid("t", &[0.5])?;
    let per_theta: Vec<Result<Vec<Cell>, CliError>> = thetas
        .par_iter()
        .map(|&theta| {
            let prof = DistortionProfile::new(&field, theta)?;
            ts.iter()
                .map(|&t| {
                    let v = prof.sigma(t)?;
                    Ok(Cell {
                        row: vec![float(theta), float(t), extended(v), v.is_finite().to_string()],
                        margin: None,
                        pass: true,
                        params: json!({"kappa": kappa, "theta": theta, "t": t}),
                    })
                })
                .collect()
        })
        .collect();
    let cells = flatten(per_theta)?;
    let infinite: Vec<f64> = thetas
        .iter()
        .flat_map(|&th| ts.iter().map(move |_| th))
        .zip(&cells)
        .filter(|(_, c)| c.row[3] == "false")
        .map(|(th, _)| th)
        .collect();
    Ok(Cells {
        header: vec!["theta", "t", "value", "finite"],
        extra: json!({
            "infinite_cells": infinite.len(),
            "smallest_infinite_theta": infinite.first().copied(),
        }),
        cells,
    })
}

fn flatten(parts: Vec<Result<Vec<Cell>, CliError>>) -> Result<Vec<Cell>, CliError> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn contraction_sweep(cfg: &SweepConfig) -> Result<Cells, CliError> {
    let f_spec = cfg.get("f").unwrap_or("model:quadratic");
    let kappa = cfg.string("kappa")?;
    let (f, dom) = inputs::function(f_spec, &cfg.base)?;
    let ns = cfg.dimensions("n", &[Dimension::Finite(2.0), Dimension::Finite(10.0)])?;
    let lambdas = cfg.grid("lambda", &[1.0])?;
    let x0 = cfg.number_or("x0", 1.0)?;
    let y0 = cfg.number_or("y0", -0.5)?;
    let horizon = cfg.number_or("horizon", 1.0)?;
    let dt = cfg.number_or("dt", 1e-3)?;
    let tol = cfg.number_or("tol", CONTRACTION_TOL)?;
    let grid: Vec<(Dimension, f64)> = ns.iter().flat_map(|&n| lambdas.iter().map(move |&l| (n, l))).collect();
    if grid.is_empty() {
        return Ok(Cells {
            header: contraction_header(),
            cells: Vec::new(),
            extra: json!({}),
        });
    }
    let x = gradient_flow(&f, x0, horizon, dt, dom)?;
    let y = gradient_flow(&f, y0, horizon, dt, dom)?;
    let cells: Vec<Result<Cell, CliError>> = grid
        .par_iter()
        .map(|&(n, lambda)| {
            let field = inputs::curvature(kappa, &cfg.base, Some(n))?;
            let rows = contraction_rows(&x, &y, &field, n, lambda)?;
            let (r_min, m) = rows
                .iter()
                .map(|r| (r.s, r.margin))
                .fold((f64::NAN, f64::INFINITY), |acc, (r, m)| if m < acc.1 { (r, m) } else { acc });
            let pass = m >= -tol;
            Ok(Cell {
                row: vec![dimension(n), float(lambda), float(m), float(r_min), verdict(pass)],
                margin: Some(m),
                pass,
                params: json!({
                    "f": f_spec, "kappa": kappa, "N": dim_value(n), "lambda": lambda,
                    "x0": x0, "y0": y0, "horizon": horizon, "dt": dt, "r": finite_or_null(r_min),
                    "margin": finite_or_null(m),
                }),
            })
        })
        .collect();
    Ok(Cells {
        header: contraction_header(),
        cells: cells.into_iter().collect::<Result<_, _>>()?,
        extra: json!({"tol": tol}),
    })
}

fn contraction_header() -> Vec<&'static str> {
    vec!["N", "lambda", "min_margin", "r", "verdict"]
}

fn verdict(pass: bool) -> String {
    if pass { "pass" } else { "fail" }.to_string()
}

/// Random measure pairs drawn from `seed`, described as model specs.
fn measure_pairs(cfg: &SweepConfig, seed: u64) -> Result<Vec<(String, String)>, CliError> {
    let pairs = cfg.count_or("pairs", 20)?;
    let family = cfg.get("family").unwrap_or("normal");
    let support = cfg.grid("support", &[-1.0, 1.0])?;
    let [lo, hi] = support[..] else {
        return Err(CliError::Usage("`support` must be two numbers lo, hi".into()));
    };
    if !(lo < hi) {
        return Err(CliError::Usage("`support` needs lo < hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Result<String, CliError> {
        match family {
            "normal" => {
                let sd = cfg.grid("sd", &[0.3, 0.8])?;
                let [s_lo, s_hi] = sd[..] else {
                    return Err(CliError::Usage("`sd` must be two numbers lo, hi".into()));
                };
                if !(0.0 < s_lo && s_lo <= s_hi) {
                    return Err(CliError::Usage("`sd` needs 0 < lo ≤ hi".into()));
                }
                let m = rng.random_range(lo..hi);
                let s = if s_lo == s_hi { s_lo } else { rng.random_range(s_lo..s_hi) };
                Ok(format!("model:normal:{}:{}", float(m), float(s)))
            }
            "uniform" => {
                let min_width = 0.1 * (hi - lo);
                let a = rng.random_range(lo..hi - min_width);
                let b = rng.random_range(a + min_width..=hi);
                Ok(format!("model:uniform:{}:{}", float(a), float(b)))
            }
            other => Err(CliError::Usage(format!("unknown measure family `{other}`, expected normal or uniform"))),
        }
    };
    (0..pairs)
        .map(|_| Ok((draw(&mut rng)?, draw(&mut rng)?)))
        .collect()
}

fn cde_sweep(cfg: &SweepConfig, seed: u64) -> Result<Cells, CliError> {
    let space_spec = cfg.get("space").unwrap_or("model:gauss");
    let kappa = cfg.string("kappa")?;
    let ns = cfg.dimensions("n", &[Dimension::Infinite])?;
    let ts = time_grid(cfg.count_or("t_points", 11)?)?;
    let tol = cfg.number_or("tol", CD_TOL)?;
    let pairs = measure_pairs(cfg, seed)?;
    let grid: Vec<(Dimension, usize)> = ns.iter().flat_map(|&n| (0..pairs.len()).map(move |k| (n, k))).collect();
    let cells: Vec<Result<Cell, CliError>> = grid
        .par_iter()
        .map(|&(n, k)| {
            let space = inputs::space(space_spec, &cfg.base, Some(n))?;
            let field = inputs::curvature(kappa, &cfg.base, Some(n))?;
            let (s0, s1) = &pairs[k];
            let mu0 = inputs::measure(s0, &cfg.base)?;
            let mu1 = inputs::measure(s1, &cfg.base)?;
            let cert = check_entropic_cd(&space, &field, n, &mu0, &mu1, &ts, tol)?;
            let m = cert.worst_margin;
            let pass = cert.verdict == Verdict::Pass;
            Ok(Cell {
                row: vec![dimension(n), k.to_string(), s0.clone(), s1.clone(), float(m), verdict(pass)],
                margin: Some(m),
                pass,
                params: json!({
                    "space": space_spec, "kappa": kappa, "N": dim_value(n), "pair": k,
                    "mu0": s0, "mu1": s1, "t_points": ts.len(), "tol": tol,
                    "margin": finite_or_null(m), "witness": cert.worst_witness,
                }),
            })
        })
        .collect();
    Ok(Cells {
        header: vec!["N", "pair", "mu0", "mu1", "worst_margin", "verdict"],
        cells: cells.into_iter().collect::<Result<_, _>>()?,
        extra: json!({"tol": tol}),
    })
}

fn bg_sweep(cfg: &SweepConfig) -> Result<Cells, CliError> {
    let space_spec = cfg.string("space")?;
    let x0 = cfg.number("x0")?;
    let big_r = cfg.number("big_r")?;
    let rs = cfg.grid("r", &[])?;
    let ns = cfg.grid("n", &[])?;
    let tol = cfg.number_or("tol", CD_TOL)?;
    let lower = cfg.get("kappa_lower").map(|_| cfg.number("kappa_lower")).transpose()?;
    let grid: Vec<(f64, f64)> = ns.iter().flat_map(|&n| rs.iter().map(move |&r| (n, r))).collect();
    let cells: Vec<Result<Cell, CliError>> = grid
        .par_iter()
        .map(|&(n, r)| {
            let space = inputs::space(space_spec, &cfg.base, Some(Dimension::Finite(n)))?;
            let k = lower.unwrap_or(n - 1.0);
            let rep = bishop_gromov_check(&space, x0, r, big_r, k, n, tol)?;
            let m = rep.s_margin.min(rep.v_margin);
            Ok(Cell {
                row: vec![
                    float(n),
                    float(r),
                    float(big_r),
                    float(rep.s_ratio),
                    float(rep.v_ratio),
                    float(rep.model_s_ratio),
                    float(rep.model_v_ratio),
                    float(rep.sharp_s_ratio),
                    float(rep.sharp_v_ratio),
                    float(rep.s_margin),
                    float(rep.v_margin),
                    verdict(rep.holds),
                ],
                margin: Some(m),
                pass: rep.holds,
                params: json!({
                    "space": space_spec, "x0": x0, "r": r, "R": big_r, "kappa_lower": k, "N": n,
                    "tol": tol, "margin": finite_or_null(m),
                }),
            })
        })
        .collect();
    Ok(Cells {
        header: vec![
            "N",
            "r",
            "R",
            "s_ratio",
            "v_ratio",
            "model_s_ratio",
            "model_v_ratio",
            "sharp_s_ratio",
            "sharp_v_ratio",
            "s_margin",
            "v_margin",
            "verdict",
        ],
        cells: cells.into_iter().collect::<Result<_, _>>()?,
        extra: json!({"tol": tol}),
    })
}

fn certify_sweep(cfg: &SweepConfig) -> Result<Cells, CliError> {
    let s_spec = cfg.string("s")?;
    let kappa = cfg.string("kappa")?;
    let (s, dom) = inputs::function(s_spec, &cfg.base)?;
    let ns = cfg.dimensions("n", &[])?;
    let crits = cfg.list("criterion", &["iii"]);
    let points = cfg.count_or("points", 17)?;
    let t_points = cfg.count_or("t_points", 9)?;
    let tol = cfg.number_or("tol", DEFAULT_TOL)?;
    let grid: Vec<(Dimension, &str)> = ns
        .iter()
        .flat_map(|&n| crits.iter().map(move |c| (n, c.as_str())))
        .collect();
    let cells: Vec<Result<Cell, CliError>> = grid
        .par_iter()
        .map(|&(n, c)| {
            let crit = criterion(c)?;
            let field = inputs::curvature(kappa, &cfg.base, Some(n))?;
            let cert = certify_on_overlap(&s, dom, &field, n, crit, points, t_points, tol)?;
            let m = cert.worst_margin;
            Ok(Cell {
                row: vec![
                    dimension(n),
                    c.to_string(),
                    cert.checked.to_string(),
                    float(m),
                    verdict(cert.passed()),
                ],
                margin: Some(m),
                pass: cert.passed(),
                params: json!({
                    "S": s_spec, "kappa": kappa, "N": dim_value(n), "criterion": c,
                    "points": points, "t_points": t_points, "tol": tol,
                    "margin": finite_or_null(m), "witness": cert.worst_witness,
                }),
            })
        })
        .collect();
    Ok(Cells {
        header: vec!["N", "criterion", "checked", "worst_margin", "verdict"],
        cells: cells.into_iter().collect::<Result<_, _>>()?,
        extra: json!({"tol": tol}),
    })
}
