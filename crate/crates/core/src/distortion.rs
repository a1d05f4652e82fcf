//! Distortion coefficients `σ_κ^(t)(θ)` of variable curvature bounds.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureField, GeodesicCurvature};
use crate::error::{Error, Result};
use crate::ode::{green_kernel, solve_ivp, GeneralizedSine};
use crate::quadrature::{cumulative, merge_sorted, Rule};

/// Number of RK4 steps used on the rescaled interval `[0, 1]`.
pub const SIGMA_STEPS: usize = 1000;

/// Below this value of `s_κ(θ)/θ` the coefficient is classified as infinite.
pub const INFINITE_THRESHOLD: f64 = 1e-10;

/// A non-negative real or `+∞`, with the convention `∞·0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// `f64` view with `+∞` for the infinite tag.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            Extended::Finite(v)
        } else {
            Extended::Infinite
        }
    }
}

impl Mul<f64> for Extended {
    type Output = Extended;

    fn mul(self, rhs: f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::from_f64(v * rhs),
            Extended::Infinite if rhs == 0.0 => Extended::Finite(0.0),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl std::fmt::Display for Extended {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// The map `t ↦ σ_κ^(t)(θ)` for one field and one `θ`, computed from a single
/// solve of `u'' + θ²κ(θτ)u = 0` on `[0, 1]`, so that `σ^(t) = u(t)/u(1)`.
#[derive(Clone, Debug)]
pub struct DistortionProfile {
    theta: f64,
    scaled: Option<CurvatureField>,
    solution: Option<GeneralizedSine>,
    u1: f64,
    finite: bool,
}

impl DistortionProfile {
    /// `field` is read on `[start, start + θ]`.
    pub fn new(field: &CurvatureField, theta: f64) -> Result<Self> {
        Self::with_steps(field, theta, SIGMA_STEPS)
    }

    pub fn with_steps(field: &CurvatureField, theta: f64, steps: usize) -> Result<Self> {
        if !(theta >= 0.0) || theta > field.length() * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::domain(format!(
                "theta {theta} outside [0, {}]",
                field.length()
            )));
        }
        if theta == 0.0 || field.constant_value() == Some(0.0) {
            return Ok(DistortionProfile {
                theta,
                scaled: None,
                solution: None,
                u1: 1.0,
                finite: true,
            });
        }
        let a = field.start();
        let scaled = field.restrict(a, a + theta).rescaled();
        let solution = solve_ivp(&scaled, 1.0 / steps as f64, 0.0, 1.0);
        let u1 = *solution.s.last().unwrap();
        let finite = solution.first_zero().is_none() && u1 >= INFINITE_THRESHOLD;
        Ok(DistortionProfile {
            theta,
            scaled: Some(scaled),
            solution: Some(solution),
            u1,
            finite,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// `s_κ(θ)/θ`, the value of the rescaled solution at 1.
    pub fn scaled_endpoint(&self) -> f64 {
        self.u1
    }

    pub fn sigma(&self, t: f64) -> Result<Extended> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("t = {t} outside [0, 1]")));
        }
        Ok(self.sigma_unchecked(t))
    }

    pub(crate) fn sigma_unchecked(&self, t: f64) -> Extended {
        match &self.solution {
            None => Extended::Finite(t),
            Some(_) if !self.finite => {
                if t == 0.0 {
                    Extended::Finite(0.0)
                } else {
                    Extended::Infinite
                }
            }
            Some(sol) => {
                if t == 1.0 {
                    Extended::Finite(1.0)
                } else if t == 0.0 {
                    Extended::Finite(0.0)
                } else {
                    Extended::Finite(sol.eval(t) / self.u1)
                }
            }
        }
    }

    /// `dσ^(t)/dt` from the solver (`u'(t)/u(1)`).
    pub fn sigma_dt(&self, t: f64) -> Extended {
        match &self.solution {
            None => Extended::Finite(1.0),
            Some(_) if !self.finite => Extended::Infinite,
            Some(sol) => Extended::Finite(sol.eval_c(t) / self.u1),
        }
    }

    fn rescaled_kappa(&self, s: f64) -> f64 {
        self.scaled.as_ref().map_or(0.0, |k| k.eval(s))
    }

    /// Partition of `[0, 1]` containing the solver nodes, the field's
    /// breakpoints and `extra`.
    fn partition(&self, extra: &[f64]) -> Vec<f64> {
        let mut pts: Vec<f64> = match &self.solution {
            Some(sol) => sol.nodes.clone(),
            None => vec![0.0, 1.0],
        };
        if let Some(k) = &self.scaled {
            pts.extend_from_slice(k.breakpoints());
        }
        pts.extend(extra.iter().copied().filter(|&x| (0.0..=1.0).contains(&x)));
        merge_sorted(pts, 1e-14)
    }

    /// Green-weighted integrals of `F(s) = θ²κ(θs)σ^(s)` on the partition:
    /// `A(x) = ∫₀ˣ sF`, `B(x) = ∫ₓ¹ (1−s)F`.
    fn green_integrals(&self, extra: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let knots = self.partition(extra);
        let f = |s: f64| self.rescaled_kappa(s) * self.sigma_unchecked(s.clamp(0.0, 1.0)).to_f64();
        let a = cumulative(Rule::Gauss5, &knots, |s| s * f(s));
        let c = cumulative(Rule::Gauss5, &knots, |s| (1.0 - s) * f(s));
        let total = *c.last().unwrap();
        let b = c.iter().map(|v| total - v).collect();
        (knots, a, b)
    }
}

fn not_finite() -> Error {
    Error::not_applicable("distortion coefficient is infinite for this curvature and length")
}

/// `σ_κ^(t)(θ)` for a field read on `[start, start + θ]`.
pub fn sigma(field: &CurvatureField, t: f64, theta: f64) -> Result<Extended> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [0, 1]")));
    }
    DistortionProfile::new(field, theta)?.sigma(t)
}

/// `σ_{κₙ}^(t)(θ)` along the approximants `n = n₀·2^k`, `k = 0..=10`.
pub fn sigma_approximants(
    field: &CurvatureField,
    t: f64,
    theta: f64,
    n0: u32,
) -> Result<Vec<(u32, Extended)>> {
    let a = field.start();
    let local = field.restrict(a, a + theta);
    (0..=10)
        .map(|k| {
            let n = n0 << k;
            Ok((n, sigma(&local.lsc_approx(n), t, theta)?))
        })
        .collect()
}

/// Max over the uniform `grid`-point t-grid of
/// `|σ^(t) − ∫₀¹ g(s,t)θ²κ(θs)σ^(s) ds − t|`.
pub fn fixed_point_residual(field: &CurvatureField, theta: f64, grid: usize) -> Result<f64> {
    let prof = DistortionProfile::new(field, theta)?;
    if !prof.is_finite() {
        return Err(not_finite());
    }
    if prof.solution.is_none() {
        return Ok(0.0);
    }
    let m = grid.max(2) - 1;
    let ts: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    let (knots, a, b) = prof.green_integrals(&ts);
    let mut worst: f64 = 0.0;
    for &t in &ts {
        let j = knots.partition_point(|&k| k < t - 1e-14).min(knots.len() - 1);
        let integral = (1.0 - t) * a[j] + t * b[j];
        let sigma = prof.sigma_unchecked(t).to_f64();
        worst = worst.max((sigma - integral - t).abs());
    }
    Ok(worst)
}

/// The Green-kernel integral `∫₀¹ g(s,t)θ²κ(θs)σ^(s) ds` evaluated directly.
pub fn green_integral(field: &CurvatureField, theta: f64, t: f64) -> Result<f64> {
    let prof = DistortionProfile::new(field, theta)?;
    if !prof.is_finite() {
        return Err(not_finite());
    }
    let knots = prof.partition(&[t]);
    let f = |s: f64| {
        green_kernel(s, t) * prof.rescaled_kappa(s) * prof.sigma_unchecked(s).to_f64()
    };
    Ok(crate::quadrature::integrate_partition(Rule::Gauss5, &knots, f))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryDerivatives {
    /// `d/dt σ^(t)|_{t=0}` by the Green integral.
    pub at0: Extended,
    /// `d/dt σ^(t)|_{t=1}` by the Green integral; `−∞` when σ is infinite.
    pub at1: f64,
    /// Centered finite-difference cross-checks of the same two derivatives.
    pub fd_at0: Option<f64>,
    pub fd_at1: Option<f64>,
}

/// Boundary derivatives of `t ↦ σ_κ^(t)(θ)`.
pub fn boundary_derivatives(field: &CurvatureField, theta: f64) -> Result<BoundaryDerivatives> {
    let prof = DistortionProfile::new(field, theta)?;
    Ok(boundary_derivatives_of(&prof))
}

pub fn boundary_derivatives_of(prof: &DistortionProfile) -> BoundaryDerivatives {
    if !prof.is_finite() {
        return BoundaryDerivatives {
            at0: Extended::Infinite,
            at1: f64::NEG_INFINITY,
            fd_at0: None,
            fd_at1: None,
        };
    }
    if prof.solution.is_none() {
        return BoundaryDerivatives {
            at0: Extended::Finite(1.0),
            at1: 1.0,
            fd_at0: Some(1.0),
            fd_at1: Some(1.0),
        };
    }
    let (_, a, b) = prof.green_integrals(&[]);
    let at0 = 1.0 + b[0];
    let at1 = 1.0 - a[a.len() - 1];
    // Second-order one-sided differences; σ is only defined on [0, 1].
    let h = 1e-3;
    let sig = |t: f64| prof.sigma_unchecked(t).to_f64();
    let fd_at0 = (-3.0 * sig(0.0) + 4.0 * sig(h) - sig(2.0 * h)) / (2.0 * h);
    let fd_at1 = (3.0 * sig(1.0) - 4.0 * sig(1.0 - h) + sig(1.0 - 2.0 * h)) / (2.0 * h);
    BoundaryDerivatives {
        at0: Extended::Finite(at0),
        at1,
        fd_at0: Some(fd_at0),
        fd_at1: Some(fd_at1),
    }
}

/// `σ^(t)(h) − t[1 + (1 − t²)κ(0)h²/6]`.
pub fn taylor_remainder(field: &CurvatureField, t: f64, h: f64) -> Result<f64> {
    let k0 = field.eval(field.start());
    let s = sigma(field, t, h)?
        .finite()
        .ok_or_else(not_finite)?;
    Ok(s - t * (1.0 + (1.0 - t * t) * k0 * h * h / 6.0))
}

/// Margin `σ_a^{1−λ}·σ_b^λ − σ_{(1−λ)a + λb}` at `(t, θ)`.
pub fn log_convex_combine(
    a: &CurvatureField,
    b: &CurvatureField,
    lambda: f64,
    t: f64,
    theta: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("lambda = {lambda} outside [0, 1]")));
    }
    let mix = CurvatureField::combine(1.0 - lambda, a, lambda, b);
    let sa = sigma(a, t, theta)?.finite().ok_or_else(not_finite)?;
    let sb = sigma(b, t, theta)?.finite().ok_or_else(not_finite)?;
    let sm = sigma(&mix, t, theta)?.finite().ok_or_else(not_finite)?;
    let lhs = if lambda == 0.0 {
        sa
    } else if lambda == 1.0 {
        sb
    } else {
        sa.powf(1.0 - lambda) * sb.powf(lambda)
    };
    Ok(lhs - sm)
}

/// `G(x, y, κ) = log[σ_{κ⁻}^{(1−t)}(θ)eˣ + σ_{κ⁺}^{(t)}(θ)eʸ]` along a geodesic of length θ.
pub fn g_function(x: f64, y: f64, kappa: &GeodesicCurvature, t: f64) -> Result<f64> {
    let theta = kappa.length;
    let minus = sigma(&kappa.reversed, 1.0 - t, theta)?;
    let plus = sigma(&kappa.forward, t, theta)?;
    match (minus, plus) {
        (Extended::Finite(m), Extended::Finite(p)) => Ok((m * x.exp() + p * y.exp()).ln()),
        _ => Err(not_finite()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(k: f64, len: f64) -> CurvatureField {
        CurvatureField::constant(k, 0.0, len)
    }

    #[test]
    fn flat_sigma_is_linear() {
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(sigma(&c(0.0, 2.0), t, 1.7).unwrap(), Extended::Finite(t));
        }
        assert_eq!(sigma(&c(1.0, 2.0), 0.4, 0.0).unwrap(), Extended::Finite(0.4));
    }

    #[test]
    fn spherical_sigma() {
        let v = sigma(&c(1.0, 4.0), 0.5, PI / 2.0).unwrap().finite().unwrap();
        assert!((v - (PI / 4.0).sin()).abs() < 1e-8);
        assert_eq!(sigma(&c(1.0, 4.0), 0.5, PI).unwrap(), Extended::Infinite);
        assert!(sigma(&c(1.0, 4.0), 1.5, 1.0).is_err());
    }

    #[test]
    fn step_sigma_matches_transfer_matrix() {
        // κ = 0 on [0,½], 8 on (½,1]: s(x) = x up to ½, then
        // s = ½cos(√8(x−½)) + sin(√8(x−½))/√8.
        let k = CurvatureField::steps(vec![0.0, 0.5, 1.0], vec![0.0, 8.0]).unwrap();
        let r = 8f64.sqrt();
        let s1 = 0.5 * (0.5 * r).cos() + (0.5 * r).sin() / r;
        let exact = 0.25 / s1;
        let v = sigma(&k, 0.25, 1.0).unwrap().finite().unwrap();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        assert!((exact - 0.585_21).abs() < 1e-4);
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(fixed_point_residual(&c(0.0, 1.0), 1.0, 1000).unwrap(), 0.0);
        assert!(fixed_point_residual(&c(1.0, 1.0), 1.0, 1000).unwrap() <= 1e-6);
        assert!(fixed_point_residual(&c(-2.0, 2.0), 2.0, 1000).unwrap() <= 1e-6);
        assert!(matches!(
            fixed_point_residual(&c(1.0, 4.0), PI, 100),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn direct_green_integral_matches_closed_form() {
        // For κ ≡ 1, θ = 1: σ(t) − t = sin t / sin 1 − t.
        let t: f64 = 0.3;
        let v = green_integral(&c(1.0, 1.0), 1.0, t).unwrap();
        assert!((v - (t.sin() / 1f64.sin() - t)).abs() < 1e-10);
    }

    #[test]
    fn boundary_derivative_examples() {
        let flat = boundary_derivatives(&c(0.0, 1.0), 1.0).unwrap();
        assert_eq!(flat.at0, Extended::Finite(1.0));
        assert_eq!(flat.at1, 1.0);
        let d = boundary_derivatives(&c(1.0, 2.0), PI / 2.0).unwrap();
        assert!((d.at0.finite().unwrap() - PI / 2.0).abs() < 1e-6);
        assert!(d.at1.abs() < 1e-6);
        assert!((d.fd_at0.unwrap() - PI / 2.0).abs() < 1e-4);
        assert!(d.fd_at1.unwrap().abs() < 1e-4);
        let inf = boundary_derivatives(&c(1.0, 4.0), PI).unwrap();
        assert_eq!(inf.at0, Extended::Infinite);
    }

    #[test]
    fn taylor_examples() {
        assert!(taylor_remainder(&c(0.0, 1.0), 0.5, 0.1).unwrap().abs() < 1e-15);
        let r: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| taylor_remainder(&c(1.0, 1.0), 0.5, h).unwrap().abs())
            .collect();
        assert!(r[0] / r[1] >= 7.5 && r[1] / r[2] >= 7.5, "{r:?}");
        assert!(taylor_remainder(&c(-1.0, 1.0), 0.5, 0.1).unwrap().abs() <= 1e-4);
        // Closed-form remainder for κ ≡ 1 is t·h⁴(1−t²)(7−3t²)/360 + O(h⁶).
        let h: f64 = 0.1;
        let t: f64 = 0.5;
        let lead = t * h.powi(4) * (1.0 - t * t) * (7.0 - 3.0 * t * t) / 360.0;
        let got = taylor_remainder(&c(1.0, 1.0), t, h).unwrap();
        assert!((got - lead).abs() < 0.02 * lead);
    }

    #[test]
    fn log_convexity_examples() {
        let a = c(0.0, 1.0);
        let b = c(1.0, 1.0);
        assert!(log_convex_combine(&a, &b, 0.5, 0.5, 1.0).unwrap() >= 0.0);
        assert!(log_convex_combine(&b, &b, 0.3, 0.5, 1.0).unwrap().abs() < 1e-14);
        assert_eq!(log_convex_combine(&a, &b, 0.0, 0.5, 1.0).unwrap(), 0.0);
        assert!(log_convex_combine(&a, &b, 1.0, 0.5, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn extended_arithmetic() {
        assert_eq!(Extended::Infinite * 0.0, Extended::Finite(0.0));
        assert_eq!(Extended::Infinite * 2.0, Extended::Infinite);
        assert!(Extended::Infinite > Extended::Finite(1e300));
        assert_eq!(serde_json::to_string(&Extended::Infinite).unwrap(), "null");
    }
}
