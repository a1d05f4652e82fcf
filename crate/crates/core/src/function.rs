//! Scalar functions of one real variable, either closed-form or tabulated.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Piecewise cubic Hermite with finite-difference slopes.
    Cubic,
}

#[derive(Clone)]
enum Repr {
    Analytic {
        value: Closure,
        derivative: Option<Closure>,
    },
    Table {
        xs: Arc<Vec<f64>>,
        ys: Arc<Vec<f64>>,
        slopes: Arc<Vec<f64>>,
        interp: Interpolation,
    },
}

/// A real function of one variable.
///
/// Tabulated functions are evaluated by interpolation inside the table and
/// held constant outside it. Infinite table values propagate: any point whose
/// interpolation stencil touches an infinite sample evaluates to that sample.
#[derive(Clone)]
pub struct RealFunction {
    repr: Repr,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Analytic { derivative, .. } => f
                .debug_struct("RealFunction::Analytic")
                .field("has_derivative", &derivative.is_some())
                .finish(),
            Repr::Table { xs, interp, .. } => f
                .debug_struct("RealFunction::Table")
                .field("points", &xs.len())
                .field("interp", interp)
                .finish(),
        }
    }
}

impl RealFunction {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RealFunction {
            repr: Repr::Analytic {
                value: Arc::new(value),
                derivative: None,
            },
        }
    }

    pub fn with_derivative(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RealFunction {
            repr: Repr::Analytic {
                value: Arc::new(value),
                derivative: Some(Arc::new(derivative)),
            },
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_derivative(move |_| c, |_| 0.0)
    }

    /// Tabulated function; `xs` must be strictly increasing.
    pub fn table(xs: Vec<f64>, ys: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::precondition("table columns differ in length"));
        }
        if xs.len() < 2 {
            return Err(Error::precondition("table needs at least two rows"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::precondition("table abscissae must be strictly increasing"));
        }
        let slopes = hermite_slopes(&xs, &ys);
        Ok(RealFunction {
            repr: Repr::Table {
                xs: Arc::new(xs),
                ys: Arc::new(ys),
                slopes: Arc::new(slopes),
                interp,
            },
        })
    }

    /// Samples `f` on `xs` and returns the tabulated function.
    pub fn sampled(f: impl Fn(f64) -> f64, xs: Vec<f64>, interp: Interpolation) -> Result<Self> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::table(xs, ys, interp)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Analytic { value, .. } => value(x),
            Repr::Table {
                xs,
                ys,
                slopes,
                interp,
            } => {
                let (i, s) = locate(xs, x);
                let (y0, y1) = (ys[i], ys[i + 1]);
                if !y0.is_finite() || !y1.is_finite() {
                    return if s <= 0.0 {
                        y0
                    } else if s >= 1.0 {
                        y1
                    } else if y0.is_finite() {
                        y1
                    } else {
                        y0
                    };
                }
                match interp {
                    Interpolation::Linear => y0 + s * (y1 - y0),
                    Interpolation::Cubic => {
                        let h = xs[i + 1] - xs[i];
                        hermite(y0, y1, slopes[i] * h, slopes[i + 1] * h, s)
                    }
                }
            }
        }
    }

    /// First derivative. Analytic functions without a supplied derivative use a
    /// fourth-order central difference.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Analytic {
                derivative: Some(d),
                ..
            } => d(x),
            Repr::Analytic { value, .. } => {
                let h = 1e-4 * (1.0 + x.abs());
                (8.0 * (value(x + h) - value(x - h)) - (value(x + 2.0 * h) - value(x - 2.0 * h)))
                    / (12.0 * h)
            }
            Repr::Table {
                xs,
                ys,
                slopes,
                interp,
            } => {
                let (i, s) = locate(xs, x);
                let h = xs[i + 1] - xs[i];
                match interp {
                    Interpolation::Linear => (ys[i + 1] - ys[i]) / h,
                    Interpolation::Cubic => {
                        hermite_d(ys[i], ys[i + 1], slopes[i] * h, slopes[i + 1] * h, s) / h
                    }
                }
            }
        }
    }

    /// Table knots, if tabulated.
    pub fn knots(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Table { xs, .. } => Some(xs),
            Repr::Analytic { .. } => None,
        }
    }

    /// Closed domain covered by the table, if tabulated.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.knots().map(|k| (k[0], k[k.len() - 1]))
    }
}

/// Returns the cell index and local coordinate in [0,1], clamped to the table.
fn locate(xs: &[f64], x: f64) -> (usize, f64) {
    let n = xs.len();
    if x <= xs[0] {
        return (0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 2, 1.0);
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let i = i.min(n - 2);
    (i, (x - xs[i]) / (xs[i + 1] - xs[i]))
}

fn hermite_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let d = (ys[b] - ys[a]) / (xs[b] - xs[a]);
            if d.is_finite() {
                d
            } else {
                0.0
            }
        })
        .collect()
}

pub(crate) fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * m1
}

pub(crate) fn hermite_d(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * m1
}
