//! Input specifications: either a path to a two-column table or a built-in
//! model of the form `model:NAME[:ARG...]`.

use std::path::{Path, PathBuf};

use kcurve_core::convexity::Dimension;
use kcurve_core::table::{read_table, Table, TableRules};
use kcurve_core::wasserstein::{gaussian_line, model_sphere, MMSpace1D, ProbMeasure1D};
use kcurve_core::{CurvatureField, Interpolation, RealFunction};

use crate::CliError;

/// Default domain of constant model fields.
pub const CONST_DOMAIN: (f64, f64) = (-10.0, 10.0);
/// Domain of the `quadratic-bound` field.
pub const QUADRATIC_DOMAIN: (f64, f64) = (-4.0, 4.0);
/// Half width of the truncated Gaussian line.
pub const GAUSS_HALF_WIDTH: f64 = 8.0;
/// End-point offset of the model sphere `[ε, π − ε]`.
pub const SPHERE_EPS: f64 = 1e-3;
/// Truncation of normal measures, in standard deviations.
pub const NORMAL_SDS: f64 = 5.0;
const DENSITY_CELLS: usize = 4096;

enum Spec<'a> {
    Model(&'a str, Vec<&'a str>),
    File(PathBuf),
}

fn spec<'a>(s: &'a str, base: &Path) -> Spec<'a> {
    match s.strip_prefix("model:") {
        Some(rest) => {
            let mut parts = rest.split(':');
            let name = parts.next().unwrap_or("");
            Spec::Model(name, parts.collect())
        }
        None => Spec::File(base.join(s)),
    }
}

fn numbers(args: &[&str], what: &str) -> Result<Vec<f64>, CliError> {
    args.iter()
        .map(|a| {
            a.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: cannot parse `{a}` as a number")))
        })
        .collect()
}

fn table(path: &Path, rules: TableRules) -> Result<Table, CliError> {
    read_table(path, rules).map_err(|e| CliError::input(path, e))
}

fn finite_rules() -> TableRules {
    TableRules {
        require_finite: true,
        require_nonnegative: false,
    }
}

fn density_rules() -> TableRules {
    TableRules {
        require_finite: true,
        require_nonnegative: true,
    }
}

/// A curvature field. `model:const:K[:a:b]` is constant on `[a, b]` (default
/// `[−10, 10]`); `model:quadratic-bound` is `1 − x²/N` on `[−4, 4]`, the best
/// bound for `x²/2`, and `≡ 1` for `N = ∞`.
pub fn curvature(s: &str, base: &Path, n: Option<Dimension>) -> Result<CurvatureField, CliError> {
    match spec(s, base) {
        Spec::File(path) => {
            let t = table(&path, finite_rules())?;
            CurvatureField::from_table(&t.xs, &t.ys).map_err(|e| CliError::input(&path, e))
        }
        Spec::Model("const", args) => {
            let v = numbers(&args, s)?;
            match v.as_slice() {
                [k] => Ok(CurvatureField::constant(*k, CONST_DOMAIN.0, CONST_DOMAIN.1)),
                [k, a, b] if a < b => Ok(CurvatureField::constant(*k, *a, *b)),
                _ => Err(CliError::Usage(format!("{s}: expected model:const:K or model:const:K:a:b"))),
            }
        }
        Spec::Model("quadratic-bound", _) => {
            let (a, b) = QUADRATIC_DOMAIN;
            match n {
                Some(Dimension::Finite(n)) => Ok(CurvatureField::from_fn(a, b, 1.0 - b * b / n, move |x| {
                    1.0 - x * x / n
                })),
                Some(Dimension::Infinite) => Ok(CurvatureField::constant(1.0, a, b)),
                None => Err(CliError::Usage(format!("{s} needs a dimension N"))),
            }
        }
        Spec::Model(name, _) => Err(CliError::Usage(format!("unknown curvature model `{name}`"))),
    }
}

/// A potential. Tables are interpolated by cubic Hermite splines.
/// `model:quadratic` is `x²/2` and `model:quartic` is `x⁴/4`.
pub fn function(s: &str, base: &Path) -> Result<(RealFunction, Option<(f64, f64)>), CliError> {
    match spec(s, base) {
        Spec::File(path) => {
            let t = table(&path, finite_rules())?;
            let domain = (t.xs[0], *t.xs.last().unwrap());
            let f = RealFunction::table(t.xs, t.ys, Interpolation::Cubic).map_err(|e| CliError::input(&path, e))?;
            Ok((f, Some(domain)))
        }
        Spec::Model("quadratic", _) => Ok((RealFunction::with_derivative(|x| 0.5 * x * x, |x| x), None)),
        Spec::Model("quartic", _) => Ok((RealFunction::with_derivative(|x| 0.25 * x.powi(4), |x| x.powi(3)), None)),
        Spec::Model(name, _) => Err(CliError::Usage(format!("unknown function model `{name}`"))),
    }
}

/// A weighted interval. `model:gauss` is `e^{−x²/2}` on `[−8, 8]`,
/// `model:sphere` is `sin^{N−1}` on `[ε, π − ε]`, `model:lebesgue:a:b` is flat.
pub fn space(s: &str, base: &Path, n: Option<Dimension>) -> Result<MMSpace1D, CliError> {
    match spec(s, base) {
        Spec::File(path) => {
            let t = table(&path, density_rules())?;
            MMSpace1D::from_table(t.xs, t.ys, None).map_err(|e| CliError::input(&path, e))
        }
        Spec::Model("gauss", _) => Ok(gaussian_line(GAUSS_HALF_WIDTH)?),
        Spec::Model("sphere", _) => match n {
            Some(Dimension::Finite(n)) => Ok(model_sphere(n, SPHERE_EPS)?),
            _ => Err(CliError::Usage(format!("{s} needs a finite dimension N"))),
        },
        Spec::Model("lebesgue", args) => match numbers(&args, s)?.as_slice() {
            [a, b] => Ok(MMSpace1D::lebesgue(*a, *b)?),
            _ => Err(CliError::Usage(format!("{s}: expected model:lebesgue:a:b"))),
        },
        Spec::Model(name, _) => Err(CliError::Usage(format!("unknown space model `{name}`"))),
    }
}

/// A probability measure from an `x,density` table, or `model:normal:m:s`
/// (truncated at five standard deviations) or `model:uniform:a:b`.
pub fn measure(s: &str, base: &Path) -> Result<ProbMeasure1D, CliError> {
    match spec(s, base) {
        Spec::File(path) => {
            let t = table(&path, density_rules())?;
            ProbMeasure1D::from_density(t.xs, t.ys).map_err(|e| CliError::input(&path, e))
        }
        Spec::Model("normal", args) => match numbers(&args, s)?.as_slice() {
            [m, sd] if *sd > 0.0 => Ok(normal(*m, *sd)?),
            _ => Err(CliError::Usage(format!("{s}: expected model:normal:m:s with s > 0"))),
        },
        Spec::Model("uniform", args) => match numbers(&args, s)?.as_slice() {
            [a, b] => Ok(ProbMeasure1D::uniform(*a, *b)?),
            _ => Err(CliError::Usage(format!("{s}: expected model:uniform:a:b"))),
        },
        Spec::Model(name, _) => Err(CliError::Usage(format!("unknown measure model `{name}`"))),
    }
}

pub fn normal(m: f64, sd: f64) -> kcurve_core::Result<ProbMeasure1D> {
    let half = NORMAL_SDS * sd;
    ProbMeasure1D::from_density_fn(m - half, m + half, DENSITY_CELLS, |x| {
        (-(x - m) * (x - m) / (2.0 * sd * sd)).exp()
    })
}
