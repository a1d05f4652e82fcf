//! Gradient flows on intervals and the EVI, dissipation and contraction
//! diagnostics evaluated along them.

use serde::Serialize;

use crate::convexity::Dimension;
use crate::curvature::{restrict_to_geodesic, CurvatureField};
use crate::distortion::{boundary_derivatives_of, DistortionProfile, Extended};
use crate::error::{Error, Result};
use crate::function::{hermite, RealFunction};
use crate::quadrature::{integrate_partition, partition, trapezoid, Rule};

/// Target for the energy-dissipation residual of adaptively computed traces.
pub const DISSIPATION_TARGET: f64 = 1e-5;
/// Smallest step the adaptive integrator will try.
pub const MIN_DT: f64 = 1e-6;
/// Cells of the τ-grid used for `a_γ` and `b_γ` quadratures.
pub const TAU_CELLS: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TraceFlags {
    /// The trajectory left the admissible interval and was truncated.
    pub exited_domain: bool,
    /// Adaptive refinement stopped at the minimal step without meeting its target.
    pub dt_floor: bool,
}

/// A sampled trajectory of a gradient flow on the line.
#[derive(Clone, Debug)]
pub struct EVITrace {
    pub f: RealFunction,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub velocities: Vec<f64>,
    pub speeds: Vec<f64>,
    pub slopes: Vec<f64>,
    pub f_values: Vec<f64>,
    pub flags: TraceFlags,
}

impl EVITrace {
    fn build(f: &RealFunction, times: Vec<f64>, states: Vec<f64>, velocities: Vec<f64>, flags: TraceFlags) -> Self {
        let speeds = velocities.iter().map(|v| v.abs()).collect();
        let slopes = states.iter().map(|&x| f.derivative(x).abs()).collect();
        let f_values = states.iter().map(|&x| f.eval(x)).collect();
        EVITrace {
            f: f.clone(),
            times,
            states,
            velocities,
            speeds,
            slopes,
            f_values,
            flags,
        }
    }

    /// Trace from given states; velocities are recomputed by finite differences.
    pub fn from_states(f: &RealFunction, times: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        if times.len() != states.len() || times.len() < 5 {
            return Err(Error::precondition("a trace needs at least five matching samples"));
        }
        let velocities = derivative_on_grid(&times, &states);
        Ok(Self::build(f, times, states, velocities, TraceFlags::default()))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of the grid time nearest to `s`.
    pub fn nearest_index(&self, s: f64) -> usize {
        let i = self.times.partition_point(|&t| t < s);
        if i == 0 {
            0
        } else if i >= self.times.len() {
            self.times.len() - 1
        } else if (self.times[i] - s).abs() < (s - self.times[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }

    fn cell(&self, s: f64) -> (usize, f64, f64) {
        let n = self.times.len();
        let i = self.times.partition_point(|&t| t <= s).clamp(1, n - 1) - 1;
        let h = self.times[i + 1] - self.times[i];
        (i, h, ((s - self.times[i]) / h).clamp(0.0, 1.0))
    }

    /// State at time `s` by Hermite interpolation of states and velocities.
    pub fn state_at(&self, s: f64) -> f64 {
        let (i, h, u) = self.cell(s);
        hermite(
            self.states[i],
            self.states[i + 1],
            self.velocities[i] * h,
            self.velocities[i + 1] * h,
            u,
        )
    }

    /// Velocity at time `s`, linearly interpolated.
    pub fn velocity_at(&self, s: f64) -> f64 {
        let (i, _, u) = self.cell(s);
        self.velocities[i] + u * (self.velocities[i + 1] - self.velocities[i])
    }
}

/// Derivative of sampled data: fourth-order centered differences on uniform
/// interiors, second-order one-sided differences at the two ends.
fn derivative_on_grid(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                let h = 0.5 * (ts[i + 1] - ts[i - 1]);
                (-ys[i + 2] + 8.0 * ys[i + 1] - 8.0 * ys[i - 1] + ys[i - 2]) / (12.0 * h)
            } else if i == 0 {
                let h = ts[1] - ts[0];
                (-3.0 * ys[0] + 4.0 * ys[1] - ys[2]) / (2.0 * h)
            } else if i == n - 1 {
                let h = ts[n - 1] - ts[n - 2];
                (3.0 * ys[n - 1] - 4.0 * ys[n - 2] + ys[n - 3]) / (2.0 * h)
            } else {
                (ys[i + 1] - ys[i - 1]) / (ts[i + 1] - ts[i - 1])
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub value: f64,
    /// Only one side of `x` lies in the domain.
    pub one_sided: bool,
}

/// Descending slope `limsup_{y→x} [f(x) − f(y)]₊ / |x − y|`, estimated by the
/// maximal difference quotient over 16 samples per side at radii `r` and `r/2`,
/// Richardson-extrapolated to `r → 0`.
pub fn descending_slope(
    f: &RealFunction,
    x: f64,
    radius: f64,
    domain: Option<(f64, f64)>,
) -> Result<SlopeEstimate> {
    if !(radius > 0.0) {
        return Err(Error::precondition("radius must be positive"));
    }
    if let Some(k) = f.knots() {
        let i = k.partition_point(|&v| v <= x).clamp(1, k.len() - 1) - 1;
        if radius < 3.0 * (k[i + 1] - k[i]) * (1.0 - 1e-12) {
            return Err(Error::precondition("radius must span at least three table cells"));
        }
    }
    let (a, b) = domain.or_else(|| f.domain()).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if x < a || x > b {
        return Err(Error::domain(format!("x = {x} outside [{a}, {b}]")));
    }
    let left = x - radius >= a;
    let right = x + radius <= b;
    let one_sided = !(left && right);
    let fx = f.eval(x);
    let quotient = |r: f64| {
        let mut best: f64 = 0.0;
        for j in 1..=16 {
            let h = r * j as f64 / 16.0;
            for (ok, y) in [(left || x - h >= a, x - h), (right || x + h <= b, x + h)] {
                if ok {
                    best = best.max((fx - f.eval(y)).max(0.0) / h);
                }
            }
        }
        best
    };
    let value = (2.0 * quotient(0.5 * radius) - quotient(radius)).max(0.0);
    Ok(SlopeEstimate { value, one_sided })
}

/// RK4 integration of `x' = −f'(x)` from `x0` with step `dt` up to `horizon`.
pub fn gradient_flow(
    f: &RealFunction,
    x0: f64,
    horizon: f64,
    dt: f64,
    domain: Option<(f64, f64)>,
) -> Result<EVITrace> {
    if !(dt > 0.0) || !(horizon > 0.0) {
        return Err(Error::precondition("dt and horizon must be positive"));
    }
    let (a, b) = domain.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if x0 < a || x0 > b {
        return Err(Error::domain(format!("x0 = {x0} outside [{a}, {b}]")));
    }
    let steps = (horizon / dt).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let v = |x: f64| -f.derivative(x);
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut velocities = vec![v(x0)];
    let mut flags = TraceFlags::default();
    let mut x = x0;
    for i in 1..=steps {
        let k1 = v(x);
        let k2 = v(x + 0.5 * h * k1);
        let k3 = v(x + 0.5 * h * k2);
        let k4 = v(x + h * k3);
        let next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(next >= a && next <= b) || !next.is_finite() {
            flags.exited_domain = true;
            break;
        }
        x = next;
        times.push(h * i as f64);
        states.push(x);
        velocities.push(v(x));
    }
    Ok(EVITrace::build(f, times, states, velocities, flags))
}

/// [`gradient_flow`] with `dt` halved until the dissipation residual over the
/// whole horizon is at most `target`, or `dt` drops below [`MIN_DT`].
pub fn gradient_flow_adaptive(
    f: &RealFunction,
    x0: f64,
    horizon: f64,
    dt: f64,
    domain: Option<(f64, f64)>,
    target: f64,
) -> Result<EVITrace> {
    let mut dt = dt;
    loop {
        let mut trace = gradient_flow(f, x0, horizon, dt, domain)?;
        let end = trace.horizon();
        let res = if end > 0.0 {
            dissipation_residual(&trace, 0.0, end)?.abs()
        } else {
            0.0
        };
        if res <= target {
            return Ok(trace);
        }
        if dt * 0.5 < MIN_DT {
            trace.flags.dt_floor = true;
            return Ok(trace);
        }
        dt *= 0.5;
    }
}

/// `f(x_s) − f(x_t) − ½∫_s^t (|ẋ|² + |∇⁻f|²) dr` by the trapezoid rule on the trace grid.
pub fn dissipation_residual(trace: &EVITrace, s: f64, t: f64) -> Result<f64> {
    if !(s <= t) || s < trace.times[0] || t > trace.horizon() * (1.0 + 1e-12) {
        return Err(Error::domain(format!("need 0 ≤ s ≤ t ≤ {}", trace.horizon())));
    }
    let i = trace.nearest_index(s);
    let j = trace.nearest_index(t);
    if i == j {
        return Ok(0.0);
    }
    let integrand: Vec<f64> = (i..=j)
        .map(|k| trace.speeds[k].powi(2) + trace.slopes[k].powi(2))
        .collect();
    let integral = trapezoid(&trace.times[i..=j], &integrand);
    Ok(trace.f_values[i] - trace.f_values[j] - 0.5 * integral)
}

/// `d/ds d(x_s, z)²` at grid index `i` by finite differences of the sampled distances.
pub fn squared_distance_rate(trace: &EVITrace, z: f64, i: usize) -> f64 {
    let n = trace.len();
    let d2 = |k: usize| (trace.states[k] - z).powi(2);
    let ts = &trace.times;
    if i >= 2 && i + 2 < n {
        let h = 0.5 * (ts[i + 1] - ts[i - 1]);
        (-d2(i + 2) + 8.0 * d2(i + 1) - 8.0 * d2(i - 1) + d2(i - 2)) / (12.0 * h)
    } else if i == 0 {
        (-3.0 * d2(0) + 4.0 * d2(1) - d2(2)) / (2.0 * (ts[1] - ts[0]))
    } else if i == n - 1 {
        (3.0 * d2(n - 1) - 4.0 * d2(n - 2) + d2(n - 3)) / (2.0 * (ts[n - 1] - ts[n - 2]))
    } else {
        (d2(i + 1) - d2(i - 1)) / (ts[i + 1] - ts[i - 1])
    }
}

/// `∫₀¹ w(τ)κ(γ(τ)) dτ` along the segment from `x` to `z`.
fn weighted_kappa_integral(kappa: &CurvatureField, x: f64, z: f64, w: impl Fn(f64) -> f64) -> f64 {
    let len = z - x;
    let bps: Vec<f64> = if len != 0.0 {
        kappa.breakpoints().iter().map(|&p| (p - x) / len).collect()
    } else {
        Vec::new()
    };
    let knots = partition(0.0, 1.0, TAU_CELLS, &bps);
    integrate_partition(Rule::Gauss5, &knots, |tau| w(tau) * kappa.eval(x + tau * len))
}

fn infinite_derivative() -> Error {
    Error::not_applicable("boundary derivative of the distortion coefficient is infinite")
}

/// Boundary derivatives entering the finite-dimensional EVI along the segment
/// from `x` to `z`: `(σ'_{κ⁻/N}(1), σ'_{κ⁺/N}(0))`.
fn evi_derivatives(kappa: &CurvatureField, x: f64, z: f64, n: f64) -> Result<(f64, f64)> {
    let geo = restrict_to_geodesic(kappa, x, z)?;
    let plus = DistortionProfile::new(&geo.forward.scaled(1.0 / n), geo.length)?;
    let minus = DistortionProfile::new(&geo.reversed.scaled(1.0 / n), geo.length)?;
    let at0 = boundary_derivatives_of(&plus).at0.finite().ok_or_else(infinite_derivative)?;
    let at1 = boundary_derivatives_of(&minus).at1;
    if !at1.is_finite() {
        return Err(infinite_derivative());
    }
    Ok((at1, at0))
}

/// EVI residual at the trace time nearest to `s`, oriented so that a
/// non-negative value means the inequality holds.
///
/// Finite `N`: `−(1/2N)·d/ds d² + σ'_{κ⁻/N}(1) − σ'_{κ⁺/N}(0)·U_N(z)/U_N(x_s)`.
///
/// `N = ∞`: `f(z) − f(x_s) − ½·d/ds d² − ∫₀¹(1−τ)κ(γ(τ))dτ·d²`, the limit of `N`
/// times the finite-dimensional residual.
pub fn evi_residual(trace: &EVITrace, z: f64, kappa: &CurvatureField, n: Dimension, s: f64) -> Result<f64> {
    evi_residual_at(trace, z, kappa, n, trace.nearest_index(s))
}

pub fn evi_residual_at(
    trace: &EVITrace,
    z: f64,
    kappa: &CurvatureField,
    n: Dimension,
    i: usize,
) -> Result<f64> {
    let (value, bound) = evi_terms_at(trace, z, kappa, n, i)?;
    Ok(bound - value)
}

/// The two sides of the EVI at grid index `i` as `(value, bound)`, where the
/// inequality reads `value ≤ bound`.
///
/// Finite `N`: value `σ'_{κ⁺/N}(0)·U_N(z)/U_N(x_s)`, bound `−(1/2N)·d/ds d² + σ'_{κ⁻/N}(1)`.
/// `N = ∞`: value `½·d/ds d² + ∫₀¹(1−τ)κ(γ(τ))dτ·d²`, bound `f(z) − f(x_s)`.
pub fn evi_terms_at(
    trace: &EVITrace,
    z: f64,
    kappa: &CurvatureField,
    n: Dimension,
    i: usize,
) -> Result<(f64, f64)> {
    let x = trace.states[i];
    let rate = squared_distance_rate(trace, z, i);
    let fx = trace.f_values[i];
    let fz = trace.f.eval(z);
    match n {
        Dimension::Finite(nn) => {
            let (at1, at0) = evi_derivatives(kappa, x, z, nn)?;
            let ratio = ((fx - fz) / nn).exp();
            Ok((at0 * ratio, -rate / (2.0 * nn) + at1))
        }
        Dimension::Infinite => {
            restrict_to_geodesic(kappa, x, z)?;
            let d2 = (z - x).powi(2);
            let a = weighted_kappa_integral(kappa, x, z, |tau| 1.0 - tau);
            Ok((0.5 * rate + a * d2, fz - fx))
        }
    }
}

/// Constant-curvature form of the finite-dimensional EVI:
/// `cos_{K/N}(d) − (1/N)·sin_{K/N}(d)·ḋ − U_N(z)/U_N(x_s)`, with `ḋ = d/ds d`.
///
/// It equals `sin_{K/N}(d)/d` times [`evi_residual`] for `κ ≡ K`.
pub fn evi_residual_constant(trace: &EVITrace, z: f64, k: f64, n: f64, s: f64) -> Result<f64> {
    let i = trace.nearest_index(s);
    let x = trace.states[i];
    let d = (z - x).abs();
    let rate = squared_distance_rate(trace, z, i);
    let kn = k / n;
    if kn > 0.0 && d * kn.sqrt() >= std::f64::consts::PI {
        return Err(infinite_derivative());
    }
    let ratio = ((trace.f_values[i] - trace.f.eval(z)) / n).exp();
    if d == 0.0 {
        return Ok(1.0 - rate / (2.0 * n) - ratio);
    }
    let ddot = rate / (2.0 * d);
    Ok(crate::ode::cos_k(kn, d) - crate::ode::sin_k(kn, d) * ddot / n - ratio)
}

/// Observed and bounded rates of squared distance along a pair of flows.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub observed: Vec<f64>,
    pub bound: Vec<f64>,
    /// `bound − observed`, reported even when negative.
    pub margins: Vec<f64>,
    /// Squared distances `d(x_s, y_s)²` (infinite-dimensional report only).
    pub distance2: Vec<f64>,
    /// `exp(−2∫₀^s ∫₀¹ κ(γ^τ) dt dτ)·d₀²` (infinite-dimensional report only).
    pub gronwall: Vec<f64>,
}

impl ContractionReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Differential contraction bound `d/ds d² ≤ −2∫₀¹κ(γ^s(t))dt·d²` and its
/// Gronwall-integrated form along two traces on the same time grid.
pub fn contraction_bound_infinite(x: &EVITrace, y: &EVITrace, kappa: &CurvatureField) -> Result<ContractionReport> {
    if x.times.len() != y.times.len()
        || x.times.iter().zip(&y.times).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
    {
        return Err(Error::precondition("traces must share a time grid"));
    }
    let mut report = ContractionReport::default();
    let mut mean_kappa = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let (xi, yi) = (x.states[i], y.states[i]);
        restrict_to_geodesic(kappa, xi, yi)?;
        let d2 = (yi - xi).powi(2);
        let observed = 2.0 * (xi - yi) * (x.velocities[i] - y.velocities[i]);
        let a = weighted_kappa_integral(kappa, xi, yi, |_| 1.0);
        let bound = -2.0 * a * d2;
        report.times.push(x.times[i]);
        report.observed.push(observed);
        report.bound.push(bound);
        report.margins.push(bound - observed);
        report.distance2.push(d2);
        mean_kappa.push(a);
    }
    let d0 = report.distance2[0];
    let mut acc = 0.0;
    report.gronwall.push(d0);
    for i in 1..x.len() {
        acc += 0.5 * (x.times[i] - x.times[i - 1]) * (mean_kappa[i] + mean_kappa[i - 1]);
        report.gronwall.push((-2.0 * acc).exp() * d0);
    }
    Ok(report)
}

/// Terms of the dimensional contraction bound at one `r`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DimensionalTerms {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub defect: f64,
    pub observed: f64,
    pub bound: f64,
}

/// `b_γ = ∫₀¹ κ(γ(τ))((1−τ)λ + τ/λ)(σ^{(1−τ)}_{κ⁻/N} + σ^{(τ)}_{κ⁺/N}) dτ` and
/// the defect `2N[√(λσ'_{κ⁺/N}(0)) − √(σ'_{κ⁻/N}(0)/λ)]²` for the segment from `x` to `y`.
pub fn dimensional_terms(kappa: &CurvatureField, x: f64, y: f64, n: f64, lambda: f64) -> Result<(f64, f64)> {
    let geo = restrict_to_geodesic(kappa, x, y)?;
    let plus = DistortionProfile::new(&geo.forward.scaled(1.0 / n), geo.length)?;
    let minus = DistortionProfile::new(&geo.reversed.scaled(1.0 / n), geo.length)?;
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::not_applicable("distortion coefficient is infinite along the connecting geodesic"));
    }
    let len = y - x;
    let bps: Vec<f64> = if len != 0.0 {
        kappa.breakpoints().iter().map(|&p| (p - x) / len).collect()
    } else {
        Vec::new()
    };
    let knots = partition(0.0, 1.0, TAU_CELLS, &bps);
    let b = integrate_partition(Rule::Gauss5, &knots, |tau| {
        let sig = minus.sigma_unchecked(1.0 - tau).to_f64() + plus.sigma_unchecked(tau).to_f64();
        kappa.eval(x + tau * len) * ((1.0 - tau) * lambda + tau / lambda) * sig
    });
    let a_plus = match boundary_derivatives_of(&plus).at0 {
        Extended::Finite(v) => v,
        Extended::Infinite => return Err(infinite_derivative()),
    };
    let a_minus = match boundary_derivatives_of(&minus).at0 {
        Extended::Finite(v) => v,
        Extended::Infinite => return Err(infinite_derivative()),
    };
    let defect = 2.0 * n * ((lambda * a_plus).sqrt() - (a_minus / lambda).sqrt()).powi(2);
    Ok((b, defect))
}

/// Dimensional contraction bound for `g(r) = d(y_{r/λ}, x_{λr})²`:
/// `g'(r) ≤ −2b·g(r) + defect`, evaluated at each `r` in `rs`.
pub fn dimensional_contraction_bound(
    x: &EVITrace,
    y: &EVITrace,
    kappa: &CurvatureField,
    n: f64,
    lambda: f64,
    rs: &[f64],
) -> Result<(ContractionReport, Vec<DimensionalTerms>)> {
    if !(lambda > 0.0) || !(n >= 1.0) {
        return Err(Error::domain("need λ > 0 and N ≥ 1"));
    }
    let mut report = ContractionReport::default();
    let mut terms = Vec::with_capacity(rs.len());
    for &r in rs {
        let (sx, sy) = (lambda * r, r / lambda);
        if sx > x.horizon() * (1.0 + 1e-12) || sy > y.horizon() * (1.0 + 1e-12) || r < 0.0 {
            return Err(Error::domain(format!("r = {r} is not covered by both traces")));
        }
        let (xs, ys) = (x.state_at(sx), y.state_at(sy));
        let g = (ys - xs).powi(2);
        let observed = 2.0 * (ys - xs) * (y.velocity_at(sy) / lambda - lambda * x.velocity_at(sx));
        let (b, defect) = dimensional_terms(kappa, xs, ys, n, lambda)?;
        let bound = -2.0 * b * g + defect;
        report.times.push(r);
        report.observed.push(observed);
        report.bound.push(bound);
        report.margins.push(bound - observed);
        terms.push(DimensionalTerms {
            r,
            g,
            b,
            defect,
            observed,
            bound,
        });
    }
    Ok((report, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> RealFunction {
        RealFunction::with_derivative(|x| 0.5 * x * x, |x| x)
    }

    #[test]
    fn slope_examples() {
        let abs = RealFunction::new(f64::abs);
        assert_eq!(descending_slope(&abs, 0.0, 0.1, None).unwrap().value, 0.0);
        let lin = RealFunction::new(|x| x);
        assert!((descending_slope(&lin, 0.3, 0.1, None).unwrap().value - 1.0).abs() < 1e-12);
        let sq = RealFunction::new(|x| x * x);
        assert!((descending_slope(&sq, 1.0, 0.1, None).unwrap().value - 2.0).abs() < 1e-3);
        let edge = descending_slope(&lin, 0.0, 0.1, Some((0.0, 1.0))).unwrap();
        assert!(edge.one_sided);
        assert_eq!(edge.value, 0.0);
        let edge = descending_slope(&lin, 1.0, 0.1, Some((0.0, 1.0))).unwrap();
        assert!(edge.one_sided && (edge.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_radius_must_cover_cells() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let f = RealFunction::sampled(|x| x, xs, crate::function::Interpolation::Linear).unwrap();
        assert!(descending_slope(&f, 0.5, 0.02, None).is_err());
        assert!(descending_slope(&f, 0.5, 0.05, None).is_ok());
    }

    #[test]
    fn flow_examples() {
        let t = gradient_flow(&quad(), 1.0, 1.0, 1e-3, None).unwrap();
        assert!((t.states.last().unwrap() - (-1f64).exp()).abs() < 1e-6);
        let c = gradient_flow(&RealFunction::constant(3.0), 0.4, 1.0, 1e-2, None).unwrap();
        assert!(c.states.iter().all(|&x| x == 0.4));
        let quartic = RealFunction::with_derivative(|x| x.powi(4) / 4.0, |x| x.powi(3));
        let t = gradient_flow(&quartic, 1.0, 1.0, 1e-3, None).unwrap();
        for (s, x) in t.times.iter().zip(&t.states) {
            assert!((x - (1.0 + 2.0 * s).powf(-0.5)).abs() < 1e-6);
        }
        assert!(t.f_values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn flow_truncates_at_boundary() {
        let lin = RealFunction::new(|x| x);
        let t = gradient_flow(&lin, 0.5, 2.0, 1e-2, Some((0.0, 1.0))).unwrap();
        assert!(t.flags.exited_domain);
        assert!(t.horizon() < 0.51);
    }

    #[test]
    fn dissipation_examples() {
        let t = gradient_flow_adaptive(&quad(), 1.0, 1.0, 1e-2, None, DISSIPATION_TARGET).unwrap();
        assert!(dissipation_residual(&t, 0.0, 1.0).unwrap().abs() <= 1e-5);
        assert!(!t.flags.dt_floor);
        let c = gradient_flow(&RealFunction::constant(1.0), 0.0, 1.0, 1e-2, None).unwrap();
        assert_eq!(dissipation_residual(&c, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_trace_is_detected() {
        let t = gradient_flow(&quad(), 1.0, 1.0, 1e-3, None).unwrap();
        let states: Vec<f64> = t.times.iter().zip(&t.states).map(|(s, x)| x + 0.01 * s.sin()).collect();
        let p = EVITrace::from_states(&quad(), t.times.clone(), states).unwrap();
        let r = dissipation_residual(&p, 0.0, 1.0).unwrap();
        // The defect is quadratic in the amplitude, about −8.5e−5.
        let expected = -0.5e-4 * (1.0 + (1.0 - 2f64.cos()) / 2.0);
        assert!((r - expected).abs() < 2e-6, "{r}");
        assert!(r.abs() > 5.0 * DISSIPATION_TARGET);
    }

    #[test]
    fn evi_infinite_examples() {
        let t = gradient_flow(&quad(), 1.0, 2.0, 1e-3, None).unwrap();
        let one = CurvatureField::constant(1.0, -3.0, 3.0);
        let strong = CurvatureField::constant(1.5, -3.0, 3.0);
        for i in (0..t.len()).step_by(100) {
            let r = evi_residual_at(&t, 0.0, &one, Dimension::Infinite, i).unwrap();
            assert!(r.abs() < 1e-5, "{r}");
        }
        let r = evi_residual(&t, 0.0, &strong, Dimension::Infinite, 0.5).unwrap();
        assert!(r < -1e-3);
    }

    #[test]
    fn constant_form_matches_profile_form() {
        let t = gradient_flow(&quad(), 1.5, 1.0, 1e-3, None).unwrap();
        let one = CurvatureField::constant(1.0, -3.0, 3.0);
        for &z in &[-1.0, 0.3, 2.0] {
            for &s in &[0.0, 0.4, 1.0] {
                let i = t.nearest_index(s);
                let d = (z - t.states[i]).abs();
                let full = evi_residual(&t, z, &one, Dimension::Finite(2.0), s).unwrap();
                let kn: f64 = 0.5;
                let scale = (kn.sqrt() * d).sin() / kn.sqrt() / d;
                let closed = evi_residual_constant(&t, z, 1.0, 2.0, s).unwrap();
                assert!((scale * full - closed).abs() < 1e-8, "z={z}, s={s}");
            }
        }
    }

    #[test]
    fn contraction_infinite_examples() {
        let x = gradient_flow(&quad(), 1.0, 1.0, 1e-3, None).unwrap();
        let y = gradient_flow(&quad(), -0.5, 1.0, 1e-3, None).unwrap();
        let one = CurvatureField::constant(1.0, -2.0, 2.0);
        let rep = contraction_bound_infinite(&x, &y, &one).unwrap();
        assert!(rep.min_margin().abs() < 1e-6);
        for (s, g) in rep.times.iter().zip(&rep.gronwall) {
            assert!((g - (-2.0 * s).exp() * 2.25).abs() < 1e-6);
        }
        let zero = CurvatureField::constant(0.0, -2.0, 2.0);
        let rep = contraction_bound_infinite(&x, &y, &zero).unwrap();
        assert!(rep.min_margin() >= 0.0);
        assert!(rep.gronwall.iter().all(|&g| g == 2.25));

        let quartic = RealFunction::with_derivative(|x| x.powi(4) / 4.0, |x| x.powi(3));
        let x = gradient_flow(&quartic, 1.0, 1.0, 1e-3, None).unwrap();
        let y = gradient_flow(&quartic, 0.2, 1.0, 1e-3, None).unwrap();
        let cubic = CurvatureField::from_fn(-1.5, 1.5, 0.0, |x| 3.0 * x * x);
        let rep = contraction_bound_infinite(&x, &y, &cubic).unwrap();
        assert!(rep.min_margin() >= -1e-5, "{}", rep.min_margin());

        let short = gradient_flow(&quad(), 1.0, 0.5, 1e-3, None).unwrap();
        assert!(contraction_bound_infinite(&x, &short, &one).is_err());
    }

    #[test]
    fn dimensional_constant_case_reduces() {
        let x = gradient_flow(&quad(), 1.0, 2.0, 1e-3, None).unwrap();
        let y = gradient_flow(&quad(), -0.5, 2.0, 1e-3, None).unwrap();
        let k = CurvatureField::constant(1.0, -2.0, 2.0);
        let (_, terms) = dimensional_contraction_bound(&x, &y, &k, 2.0, 1.0, &[0.5]).unwrap();
        let t = terms[0];
        assert!(t.defect.abs() < 1e-12);
        // b = K∫[σ^{(1−τ)} + σ^{(τ)}]dτ for K/N = ½ at θ = d.
        let d = t.g.sqrt();
        let kn: f64 = 0.5;
        let r = kn.sqrt();
        let exact = 2.0 * (1.0 - (r * d).cos()) / (r * d * (r * d).sin());
        assert!((t.b - exact).abs() < 1e-9, "{} vs {exact}", t.b);

        let zero = CurvatureField::constant(0.0, -2.0, 2.0);
        let (rep, _) = dimensional_contraction_bound(&x, &y, &zero, 2.0, 1.0, &[0.2, 0.7]).unwrap();
        assert!(rep.bound.iter().all(|b| b.abs() < 1e-12));
        assert!(rep.observed.iter().all(|&o| o <= 0.0));
    }
}
