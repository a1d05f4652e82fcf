use std::fmt::Write;

use serde::Serialize;
use serde_json::json;

use kcurve_core::convexity::{certify_kappa_n_convex, ConvexityCertificate, Criterion, Dimension, SegmentSample};
use kcurve_core::distortion::sigma;
use kcurve_core::evi::{
    contraction_bound_infinite, dimensional_contraction_bound, dissipation_residual, evi_terms_at, gradient_flow,
    EVITrace, TraceFlags,
};
use kcurve_core::ode::solve_generalized_sin;
use kcurve_core::wasserstein::{bishop_gromov_check, check_entropic_cd, density_inequality_check};
use kcurve_core::{CurvatureField, Error as CoreError, RealFunction};

use crate::format::{float, Csv};
use crate::{inputs, sweep, BgArgs, CdeArgs, CertifyArgs, CliError, Command, Context, FlowArgs, Outcome, Report};
use crate::{SigmaArgs, SinArgs, SweepConfig};

pub fn dispatch(ctx: &Context, command: &Command, out: &mut String) -> Result<Outcome, CliError> {
    match command {
        Command::Sin(a) => sin(ctx, a, out),
        Command::Sigma(a) => sigma_cmd(ctx, a, out),
        Command::Certify(a) => certify(ctx, a, out),
        Command::Flow(a) => flow(ctx, a, out),
        Command::Cde(a) => cde(ctx, a, out),
        Command::Bg(a) => bg(ctx, a, out),
        Command::Sweep(a) => {
            let cfg = SweepConfig::read(&a.config)?;
            let dir = a.out.clone().or_else(|| cfg.output());
            sweep::run(ctx, &cfg, dir.as_deref(), out)
        }
    }
}

pub fn dimension(s: &str) -> Result<Dimension, CliError> {
    match Dimension::parse(s) {
        Some(Dimension::Finite(n)) if !(n >= 1.0) => Err(CliError::Usage(format!("N = {n} must be at least 1"))),
        Some(n) => Ok(n),
        None => Err(CliError::Usage(format!("cannot parse `{s}` as a dimension"))),
    }
}

pub fn criterion(s: &str) -> Result<Criterion, CliError> {
    Criterion::parse(s).ok_or_else(|| CliError::Usage(format!("unknown criterion `{s}`, expected i, ii, iii or iv")))
}

fn json_line(out: &mut String, value: &impl Serialize) {
    let _ = writeln!(out, "{}", serde_json::to_string(value).expect("serializable"));
}

fn sin(ctx: &Context, a: &SinArgs, out: &mut String) -> Result<Outcome, CliError> {
    let field = inputs::curvature(&a.kappa, &ctx.base, None)?;
    if !(a.length > 0.0) || a.length > field.length() * (1.0 + 1e-12) {
        return Err(CoreError::Domain(format!(
            "L = {} must be positive and at most the field length {}",
            a.length,
            field.length()
        ))
        .into());
    }
    if !(a.step > 0.0) {
        return Err(CliError::Usage("step must be positive".into()));
    }
    let start = field.start();
    let gs = solve_generalized_sin(&field.restrict(start, (start + a.length).min(field.end())), a.step)?;
    let xs: Vec<f64> = gs.nodes.iter().map(|x| start + x).collect();
    if ctx.json {
        json_line(
            out,
            &json!({
                "length": a.length,
                "step": a.step,
                "first_zero": gs.first_zero(),
                "x": xs,
                "s": gs.s,
                "c": gs.c,
            }),
        );
    } else {
        let mut csv = Csv::new(&["x", "s", "c"]);
        for ((x, s), c) in xs.iter().zip(&gs.s).zip(&gs.c) {
            csv.row(&[float(*x), float(*s), float(*c)]);
        }
        out.push_str(&csv.into_string());
    }
    Ok(Outcome::Pass)
}

fn sigma_cmd(ctx: &Context, a: &SigmaArgs, out: &mut String) -> Result<Outcome, CliError> {
    let field = inputs::curvature(&a.kappa, &ctx.base, None)?;
    let value = sigma(&field, a.t, a.theta)?;
    if ctx.json {
        json_line(
            out,
            &json!({"t": a.t, "theta": a.theta, "value": value.finite(), "finite": value.is_finite()}),
        );
    } else {
        let _ = writeln!(out, "{value}");
    }
    Ok(Outcome::Pass)
}

/// Prints a certificate: a one-line summary on pass, JSON on fail or with `--json`.
fn certificate(ctx: &Context, cert: &ConvexityCertificate, out: &mut String) -> Outcome {
    if ctx.json || !cert.passed() {
        json_line(out, cert);
    } else {
        let _ = writeln!(
            out,
            "pass: worst margin {} over {} checks",
            float(cert.worst_margin),
            cert.checked
        );
    }
    Outcome::from_pass(cert.passed())
}

fn certify(ctx: &Context, a: &CertifyArgs, out: &mut String) -> Result<Outcome, CliError> {
    let n = dimension(&a.n)?;
    let crit = criterion(&a.criterion)?;
    let (s, dom) = inputs::function(&a.s, &ctx.base)?;
    let field = inputs::curvature(&a.kappa, &ctx.base, Some(n))?;
    let cert = certify_on_overlap(&s, dom, &field, n, crit, a.points, a.t_points, a.tol)?;
    Ok(certificate(ctx, &cert, out))
}

#[allow(clippy::too_many_arguments)]
pub fn certify_on_overlap(
    s: &RealFunction,
    dom: Option<(f64, f64)>,
    field: &CurvatureField,
    n: Dimension,
    crit: Criterion,
    points: usize,
    t_points: usize,
    tol: f64,
) -> Result<ConvexityCertificate, CliError> {
    let (lo, hi) = dom.unwrap_or((field.start(), field.end()));
    let (a, b) = (lo.max(field.start()), hi.min(field.end()));
    if !(a < b) {
        return Err(CoreError::Domain("the function and the curvature field do not overlap".into()).into());
    }
    if points < 2 || t_points < 1 {
        return Err(CliError::Usage("need at least two points and one interior time".into()));
    }
    let sample = SegmentSample::grid(a, b, points, t_points);
    Ok(certify_kappa_n_convex(s, a, b, field, n, crit, &sample, tol)?)
}

#[derive(Serialize)]
pub struct FlowRow {
    pub s: f64,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

fn flow(ctx: &Context, a: &FlowArgs, out: &mut String) -> Result<Outcome, CliError> {
    let n = dimension(&a.n)?;
    let (f, dom) = inputs::function(&a.f, &ctx.base)?;
    let field = inputs::curvature(&a.kappa, &ctx.base, Some(n))?;
    let x = gradient_flow(&f, a.x0, a.horizon, a.dt, dom)?;
    let mut flags = x.flags;
    let rows = match a.report {
        Report::Evi => evi_rows(&x, a.z, &field, n)?,
        Report::Dissipation => dissipation_rows(&x)?,
        Report::Contraction => {
            let y = gradient_flow(&f, a.y0.unwrap_or(-a.x0), a.horizon, a.dt, dom)?;
            flags.exited_domain |= y.flags.exited_domain;
            contraction_rows(&x, &y, &field, n, a.lambda)?
        }
    };
    let badness = |r: &FlowRow| match a.report {
        Report::Dissipation => -r.margin.abs(),
        _ => r.margin,
    };
    let worst = rows
        .iter()
        .min_by(|p, q| badness(p).total_cmp(&badness(q)));
    let failed = match (a.tol, worst) {
        (Some(tol), Some(w)) => badness(w) < -tol || badness(w).is_nan(),
        _ => false,
    };
    let witness = worst.filter(|_| failed).map(|w| {
        json!({
            "report": format!("{:?}", a.report).to_lowercase(),
            "s": w.s,
            "value": w.value,
            "bound": w.bound,
            "margin": w.margin,
            "tol": a.tol,
        })
    });
    if ctx.json {
        json_line(out, &flow_json(&rows, flags, witness.as_ref()));
    } else {
        let mut csv = Csv::new(&["s", "value", "bound", "margin"]);
        for r in &rows {
            csv.row(&[float(r.s), float(r.value), float(r.bound), float(r.margin)]);
        }
        out.push_str(&csv.into_string());
        if let Some(w) = &witness {
            json_line(out, w);
        }
    }
    Ok(Outcome::from_pass(!failed))
}

fn flow_json(rows: &[FlowRow], flags: TraceFlags, witness: Option<&serde_json::Value>) -> serde_json::Value {
    json!({"flags": flags, "rows": rows, "witness": witness})
}

fn evi_rows(x: &EVITrace, z: f64, field: &CurvatureField, n: Dimension) -> Result<Vec<FlowRow>, CliError> {
    (0..x.len())
        .map(|i| {
            let (value, bound) = evi_terms_at(x, z, field, n, i)?;
            Ok(FlowRow {
                s: x.times[i],
                value,
                bound,
                margin: bound - value,
            })
        })
        .collect()
}

fn dissipation_rows(x: &EVITrace) -> Result<Vec<FlowRow>, CliError> {
    let f0 = x.f_values[0];
    (0..x.len())
        .map(|i| {
            let s = x.times[i];
            let value = f0 - x.f_values[i];
            let margin = if i == 0 { 0.0 } else { dissipation_residual(x, 0.0, s)? };
            Ok(FlowRow {
                s,
                value,
                bound: value - margin,
                margin,
            })
        })
        .collect()
}

pub fn contraction_rows(
    x: &EVITrace,
    y: &EVITrace,
    field: &CurvatureField,
    n: Dimension,
    lambda: f64,
) -> Result<Vec<FlowRow>, CliError> {
    let report = match n {
        Dimension::Infinite => {
            let len = x.len().min(y.len());
            let cut = |t: &EVITrace| {
                let mut c = t.clone();
                c.times.truncate(len);
                c.states.truncate(len);
                c.velocities.truncate(len);
                c.speeds.truncate(len);
                c.slopes.truncate(len);
                c.f_values.truncate(len);
                c
            };
            contraction_bound_infinite(&cut(x), &cut(y), field)?
        }
        Dimension::Finite(nn) => {
            if !(lambda > 0.0) {
                return Err(CliError::Usage("lambda must be positive".into()));
            }
            let reach = x.horizon().min(y.horizon()) / lambda.max(1.0 / lambda);
            let rs: Vec<f64> = x.times.iter().copied().filter(|&r| r <= reach * (1.0 - 1e-12)).collect();
            dimensional_contraction_bound(x, y, field, nn, lambda, &rs)?.0
        }
    };
    Ok((0..report.times.len())
        .map(|i| FlowRow {
            s: report.times[i],
            value: report.observed[i],
            bound: report.bound[i],
            margin: report.margins[i],
        })
        .collect())
}

fn cde(ctx: &Context, a: &CdeArgs, out: &mut String) -> Result<Outcome, CliError> {
    let n = dimension(&a.n)?;
    let space = inputs::space(&a.space, &ctx.base, Some(n))?;
    let field = inputs::curvature(&a.kappa, &ctx.base, Some(n))?;
    let mu0 = inputs::measure(&a.mu0, &ctx.base)?;
    let mu1 = inputs::measure(&a.mu1, &ctx.base)?;
    let ts = time_grid(a.t_points)?;
    let cert = if a.density {
        density_inequality_check(&space, &field, n, &mu0, &mu1, &ts, a.tol)?
    } else {
        check_entropic_cd(&space, &field, n, &mu0, &mu1, &ts, a.tol)?
    };
    Ok(certificate(ctx, &cert, out))
}

/// `points` equally spaced times in `[0, 1]`.
pub fn time_grid(points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 {
        return Err(CliError::Usage("need at least two time points".into()));
    }
    Ok((0..points).map(|i| i as f64 / (points - 1) as f64).collect())
}

fn bg(ctx: &Context, a: &BgArgs, out: &mut String) -> Result<Outcome, CliError> {
    let space = inputs::space(&a.space, &ctx.base, Some(Dimension::Finite(a.n)))?;
    let rep = bishop_gromov_check(&space, a.x0, a.r, a.big_r, a.kappa_lower, a.n, a.tol)?;
    if ctx.json {
        json_line(out, &rep);
    } else {
        let mut csv = Csv::new(&["quantity", "observed", "model", "sharp", "margin"]);
        csv.row(&[
            "s_ratio".into(),
            float(rep.s_ratio),
            float(rep.model_s_ratio),
            float(rep.sharp_s_ratio),
            float(rep.s_margin),
        ]);
        csv.row(&[
            "v_ratio".into(),
            float(rep.v_ratio),
            float(rep.model_v_ratio),
            float(rep.sharp_v_ratio),
            float(rep.v_margin),
        ]);
        out.push_str(&csv.into_string());
        if !rep.holds {
            json_line(out, &rep);
        }
    }
    Ok(Outcome::from_pass(rep.holds))
}
