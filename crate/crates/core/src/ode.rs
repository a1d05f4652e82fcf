//! The comparison equation `v'' + κv = 0` and its generalized sine.

use serde::Serialize;

use crate::curvature::{CurvatureField, Side};
use crate::error::{Error, Result};
use crate::function::{hermite, hermite_d};
use crate::quadrature::merge_sorted;

/// Sampled solution of `v'' + κv = 0` on `[0, L]` with a first-zero marker.
///
/// Abscissae are local: node `x` corresponds to `field.start() + x`.
#[derive(Clone, Debug)]
pub struct GeneralizedSine {
    pub nodes: Vec<f64>,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    /// `κ` one-sided values at each node: `(left, right)`.
    kappa: Vec<(f64, f64)>,
    first_zero: Option<f64>,
}

/// Integrates `v'' + κv = 0` from `(v0, dv0)` over the field's domain with
/// fixed RK4 steps no longer than `step`, aligned to every breakpoint.
pub fn solve_ivp(field: &CurvatureField, step: f64, v0: f64, dv0: f64) -> GeneralizedSine {
    let a = field.start();
    let len = field.length();
    let mut edges = vec![0.0];
    edges.extend(field.breakpoints().iter().map(|&p| p - a).filter(|&x| x > 0.0 && x < len));
    edges.push(len);
    let edges = merge_sorted(edges, 0.0);

    let kap = |x: f64, side: Side| field.eval_side(a + x, side);
    let mut nodes = vec![0.0];
    let mut s = vec![v0];
    let mut c = vec![dv0];
    let (mut v, mut dv) = (v0, dv0);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let m = ((hi - lo) / step).ceil().max(1.0) as usize;
        let h = (hi - lo) / m as f64;
        for j in 0..m {
            let x = lo + h * j as f64;
            let xe = if j + 1 == m { hi } else { x + h };
            let k0 = kap(x, Side::Right);
            let km = kap(x + 0.5 * h, Side::At);
            let k1 = kap(xe, Side::Left);
            let (a1, b1) = (dv, -k0 * v);
            let (a2, b2) = (dv + 0.5 * h * b1, -km * (v + 0.5 * h * a1));
            let (a3, b3) = (dv + 0.5 * h * b2, -km * (v + 0.5 * h * a2));
            let (a4, b4) = (dv + h * b3, -k1 * (v + h * a3));
            v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            dv += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            nodes.push(xe);
            s.push(v);
            c.push(dv);
        }
    }
    let kappa = nodes
        .iter()
        .map(|&x| (kap(x, Side::Left), kap(x, Side::Right)))
        .collect();
    let mut gs = GeneralizedSine {
        nodes,
        s,
        c,
        kappa,
        first_zero: None,
    };
    gs.first_zero = gs.locate_first_zero();
    gs
}

/// Generalized sine `s_κ` with `s(0) = 0`, `s'(0) = 1`.
pub fn solve_generalized_sin(field: &CurvatureField, step: f64) -> Result<GeneralizedSine> {
    let len = field.length();
    if !(step > 0.0) || !(len > 0.0) || step > len / 10.0 {
        return Err(Error::precondition(format!(
            "step {step} must be positive and at most L/10 = {}",
            len / 10.0
        )));
    }
    Ok(solve_ivp(field, step, 0.0, 1.0))
}

/// First positive zero of the generalized sine on its domain, if any.
pub fn first_zero(gs: &GeneralizedSine) -> Option<f64> {
    gs.first_zero
}

impl GeneralizedSine {
    pub fn length(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn first_zero(&self) -> Option<f64> {
        self.first_zero
    }

    fn cell(&self, x: f64) -> (usize, f64, f64) {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.nodes[i + 1] - self.nodes[i];
        (i, h, ((x - self.nodes[i]) / h).clamp(0.0, 1.0))
    }

    /// `s_κ(x)` by cubic Hermite interpolation of `(s, c)`.
    pub fn eval(&self, x: f64) -> f64 {
        let (i, h, u) = self.cell(x);
        hermite(self.s[i], self.s[i + 1], self.c[i] * h, self.c[i + 1] * h, u)
    }

    /// `c_κ(x) = s_κ'(x)` by cubic Hermite interpolation using `c' = −κs`.
    pub fn eval_c(&self, x: f64) -> f64 {
        let (i, h, u) = self.cell(x);
        let m0 = -self.kappa[i].1 * self.s[i] * h;
        let m1 = -self.kappa[i + 1].0 * self.s[i + 1] * h;
        hermite(self.c[i], self.c[i + 1], m0, m1, u)
    }

    fn locate_first_zero(&self) -> Option<f64> {
        const NODE_ZERO: f64 = 1e-12;
        for i in 1..self.nodes.len() {
            if self.s[i].abs() < NODE_ZERO {
                return Some(self.nodes[i]);
            }
            if self.s[i] < 0.0 {
                let (mut lo, mut hi) = (self.nodes[i - 1], self.nodes[i]);
                let h = hi - lo;
                let (y0, y1, m0, m1) = (self.s[i - 1], self.s[i], self.c[i - 1] * h, self.c[i] * h);
                let base = lo;
                while hi - lo > 1e-11 {
                    let mid = 0.5 * (lo + hi);
                    if hermite(y0, y1, m0, m1, (mid - base) / h) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
        }
        None
    }

    /// Derivative of `s` from the interpolant, for testing consistency.
    pub fn eval_ds(&self, x: f64) -> f64 {
        let (i, h, u) = self.cell(x);
        hermite_d(self.s[i], self.s[i + 1], self.c[i] * h, self.c[i + 1] * h, u) / h
    }
}

/// Green function of `−d²/dt²` on `[0, 1]` with Dirichlet conditions.
pub fn green_kernel(s: f64, t: f64) -> f64 {
    if s <= t {
        s * (1.0 - t)
    } else {
        t * (1.0 - s)
    }
}

/// Model sine for constant curvature `k`.
pub fn sin_k(k: f64, x: f64) -> f64 {
    if k > 0.0 {
        let r = k.sqrt();
        (r * x).sin() / r
    } else if k < 0.0 {
        let r = (-k).sqrt();
        (r * x).sinh() / r
    } else {
        x
    }
}

/// Model cosine for constant curvature `k`.
pub fn cos_k(k: f64, x: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * x).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * x).cosh()
    } else {
        1.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SturmReport {
    /// Minimum over the grid of `s_lo − s_hi`.
    pub min_difference: f64,
    pub argmin: f64,
    pub tol: f64,
    pub success: bool,
}

/// Checks `s_{κ_lo} ≥ s_{κ_hi}` on the shared domain.
pub fn check_sturm_comparison(
    lo: &CurvatureField,
    hi: &CurvatureField,
    step: f64,
    tol: f64,
) -> Result<SturmReport> {
    if (lo.start() - hi.start()).abs() > 1e-12 || (lo.end() - hi.end()).abs() > 1e-12 {
        return Err(Error::Ordering("fields must share a domain".into()));
    }
    let s_lo = solve_generalized_sin(lo, step)?;
    let s_hi = solve_generalized_sin(hi, step)?;
    let mut grid = s_lo.nodes.clone();
    grid.extend(s_hi.nodes.iter().copied());
    let grid = merge_sorted(grid, 0.0);
    let a = lo.start();
    for &x in &grid {
        for side in [Side::Left, Side::Right] {
            if hi.eval_side(a + x, side) < lo.eval_side(a + x, side) - 1e-12 {
                return Err(Error::Ordering(format!(
                    "upper field lies below the lower field at x = {}",
                    a + x
                )));
            }
        }
    }
    let len = s_hi.length();
    if let Some(z) = s_hi.first_zero() {
        if z < len - 1e-9 {
            return Err(Error::Ordering(format!(
                "s of the upper field vanishes at {z} inside the domain"
            )));
        }
    }
    let mut min_difference = f64::INFINITY;
    let mut argmin = 0.0;
    for &x in &grid {
        let d = s_lo.eval(x) - s_hi.eval(x);
        if d < min_difference {
            min_difference = d;
            argmin = x;
        }
    }
    Ok(SturmReport {
        min_difference,
        argmin,
        tol,
        success: min_difference >= -tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(k: f64, len: f64, step: f64) -> GeneralizedSine {
        solve_generalized_sin(&CurvatureField::constant(k, 0.0, len), step).unwrap()
    }

    #[test]
    fn constant_curvature_closed_forms() {
        let flat = sine(0.0, 2.0, 0.01);
        assert!((flat.eval(1.3) - 1.3).abs() < 1e-14);
        assert!((flat.eval_c(1.3) - 1.0).abs() < 1e-14);
        let round = sine(1.0, 2.0, 1e-3);
        assert!((round.eval(PI / 2.0) - 1.0).abs() < 1e-8);
        let hyper = sine(-1.0, 2.0, 1e-3);
        assert!((hyper.eval(1.0) - 1.175_201_19).abs() < 1e-6);
        assert!((hyper.eval_c(1.0) - 1f64.cosh()).abs() < 1e-8);
        assert_eq!(round.s[0], 0.0);
        assert_eq!(round.c[0], 1.0);
    }

    #[test]
    fn first_zero_of_constant_fields() {
        assert!((sine(1.0, 4.0, 1e-3).first_zero().unwrap() - PI).abs() < 1e-8);
        assert_eq!(sine(-1.0, 4.0, 1e-3).first_zero(), None);
        assert_eq!(sine(0.0, 4.0, 1e-2).first_zero(), None);
    }

    #[test]
    fn first_zero_of_step_field() {
        // s = x on [0,1]; afterwards sin(x−1) + cos(x−1), which vanishes at 1 + 3π/4.
        let k = CurvatureField::steps(vec![0.0, 1.0, 4.0], vec![0.0, 1.0]).unwrap();
        let gs = solve_generalized_sin(&k, 1e-3).unwrap();
        let exact = 1.0 + 0.75 * PI;
        assert!((gs.first_zero().unwrap() - exact).abs() < 1e-8);
        assert!((gs.eval(2.0) - (1f64.sin() + 1f64.cos())).abs() < 1e-9);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let gs = sine(1.0, 20.0, h);
            gs.nodes
                .iter()
                .zip(&gs.s)
                .map(|(x, s)| (s - x.sin()).abs())
                .fold(0.0, f64::max)
        };
        let e = [err(1e-2), err(5e-3), err(2.5e-3)];
        assert!(e[0] / e[1] >= 14.0, "{e:?}");
        assert!(e[1] / e[2] >= 14.0, "{e:?}");
    }

    #[test]
    fn step_must_resolve_domain() {
        let k = CurvatureField::constant(0.0, 0.0, 1.0);
        assert!(solve_generalized_sin(&k, 0.2).is_err());
    }

    #[test]
    fn green_kernel_values() {
        assert_eq!(green_kernel(0.5, 0.5), 0.25);
        assert!((green_kernel(0.3, 0.7) - 0.09).abs() < 1e-15);
        assert!((green_kernel(0.7, 0.3) - 0.09).abs() < 1e-15);
        for t in [0.0, 0.2, 1.0] {
            assert_eq!(green_kernel(0.0, t), 0.0);
            assert_eq!(green_kernel(1.0, t), 0.0);
        }
    }

    #[test]
    fn sturm_examples() {
        let zero = CurvatureField::constant(0.0, 0.0, 1.0);
        let one = CurvatureField::constant(1.0, 0.0, 1.0);
        let r = check_sturm_comparison(&zero, &one, 1e-3, 1e-10).unwrap();
        assert!(r.success && r.min_difference >= 0.0);
        let r = check_sturm_comparison(&one, &one, 1e-3, 1e-10).unwrap();
        assert_eq!(r.min_difference, 0.0);
        assert!(check_sturm_comparison(&one, &zero, 1e-3, 1e-10).is_err());
    }

    #[test]
    fn sturm_linear_fields_against_refined_reference() {
        let lo = CurvatureField::from_fn(0.0, 2.0, -2.0, |x| -x);
        let hi = CurvatureField::from_fn(0.0, 2.0, 0.0, |x| x);
        let coarse = check_sturm_comparison(&lo, &hi, 1e-2, 1e-10).unwrap();
        let fine = check_sturm_comparison(&lo, &hi, 5e-3, 1e-10).unwrap();
        assert!(coarse.success);
        // The margin is zero at x = 0 and grows away from it.
        assert!(coarse.min_difference.abs() < 1e-14);
        let a = solve_generalized_sin(&lo, 5e-3).unwrap();
        let b = solve_generalized_sin(&hi, 5e-3).unwrap();
        assert!(a.eval(2.0) - b.eval(2.0) > 0.5);
        assert!((coarse.min_difference - fine.min_difference).abs() < 1e-12);
    }
}
