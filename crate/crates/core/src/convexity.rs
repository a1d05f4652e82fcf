//! Certificates for `κu`-concavity and `(κ, N)`-convexity on intervals.
//!
//! Four equivalent criteria are implemented: the distributional inequality
//! `u'' + κu ≤ 0` tested against bump functions, the Green-kernel inequality,
//! and σ-concavity along segments, either all of them or only those shorter
//! than a given length.
//!
//! All margins are oriented so that a negative value is a violation; a check
//! passes when its smallest margin is at least `−tol`.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{restrict_to_geodesic, CurvatureField};
use crate::distortion::{DistortionProfile, Extended};
use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::ode::green_kernel;
use crate::quadrature::{integrate_partition, merge_sorted, partition, Rule};

/// Margin tolerance for a grid size of 1e−3.
pub const DEFAULT_TOL: f64 = 1e-7;

/// On an interval geodesics are unique, so weak and strong convexity coincide.
pub const WEAK_EQUALS_STRONG: &str = "weak=strong on 1-D";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    pub fn parse(s: &str) -> Option<Dimension> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Some(Dimension::Infinite),
            other => other.parse::<f64>().ok().map(|n| {
                if n.is_infinite() {
                    Dimension::Infinite
                } else {
                    Dimension::Finite(n)
                }
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// `∫φ''u + ∫φκu ≤ 0` for non-negative bumps `φ`.
    Distributional,
    /// The Green-kernel inequality along segments.
    Green,
    /// σ-concavity on segments of length at most a bound.
    SigmaBounded,
    /// σ-concavity on all segments.
    Sigma,
    /// Green-weighted convexity of `S` for `N = ∞`.
    KappaConvex,
    /// Boundary-derivative (first-variation) form of σ-concavity.
    FirstVariation,
    /// Entropic curvature-dimension inequality.
    EntropicCd,
    /// Green-weighted entropy convexity (`N = ∞`).
    EntropicCdInfinite,
    /// Pointwise density inequality along particles.
    Density,
}

impl Criterion {
    pub fn parse(s: &str) -> Option<Criterion> {
        match s {
            "i" => Some(Criterion::Distributional),
            "ii" => Some(Criterion::Green),
            "iii" => Some(Criterion::SigmaBounded),
            "iv" => Some(Criterion::Sigma),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Segment { x0: f64, x1: f64, t: f64 },
    TestFunction { index: usize, center: f64, width: f64 },
    Particle { level: f64, t: f64 },
    Time { t: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCertificate {
    pub verdict: Verdict,
    pub criterion: Criterion,
    /// Smallest margin found; negative values are violations.
    pub worst_margin: f64,
    pub worst_witness: Option<Witness>,
    pub checked: usize,
    pub tol: f64,
    pub note: &'static str,
}

impl ConvexityCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Builds a certificate from `(margin, witness)` pairs; the first minimal
    /// margin in iteration order is kept, so results do not depend on scheduling.
    pub fn from_margins(
        criterion: Criterion,
        tol: f64,
        margins: impl IntoIterator<Item = (f64, Witness)>,
    ) -> Self {
        let mut worst = f64::INFINITY;
        let mut witness = None;
        let mut checked = 0;
        for (m, w) in margins {
            checked += 1;
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            if m < worst {
                worst = m;
                witness = Some(w);
            }
        }
        ConvexityCertificate {
            verdict: if worst >= -tol { Verdict::Pass } else { Verdict::Fail },
            criterion,
            worst_margin: worst,
            worst_witness: witness,
            checked,
            tol,
            note: WEAK_EQUALS_STRONG,
        }
    }
}

/// A non-negative function `u` and a curvature bound on `[a, b]`.
#[derive(Clone, Debug)]
pub struct ConvexityProblem {
    pub a: f64,
    pub b: f64,
    pub u: RealFunction,
    pub curvature: CurvatureField,
    pub tol: f64,
}

impl ConvexityProblem {
    pub fn new(a: f64, b: f64, u: RealFunction, curvature: CurvatureField) -> Self {
        ConvexityProblem {
            a,
            b,
            u,
            curvature,
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn u_at(&self, x: f64) -> f64 {
        self.u.eval(x).max(0.0)
    }

    fn knots(&self, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
        let mut extra: Vec<f64> = self.curvature.breakpoints().to_vec();
        if let Some(k) = self.u.knots() {
            extra.extend_from_slice(k);
        }
        partition(lo, hi, cells, &extra)
    }
}

/// Tolerance scaled linearly from `DEFAULT_TOL` at grid size 1e−3.
pub fn scaled_tol(grid: f64) -> f64 {
    DEFAULT_TOL * grid / 1e-3
}

/// A quadratic B-spline bump with unit mass, supported on
/// `[center − 1.5·width, center + 1.5·width]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn support(&self) -> (f64, f64) {
        (self.center - 1.5 * self.width, self.center + 1.5 * self.width)
    }

    fn knots(&self) -> [f64; 4] {
        let (c, w) = (self.center, self.width);
        [c - 1.5 * w, c - 0.5 * w, c + 0.5 * w, c + 1.5 * w]
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width + 1.5;
        let b = if !(0.0..=3.0).contains(&s) {
            0.0
        } else if s < 1.0 {
            0.5 * s * s
        } else if s < 2.0 {
            0.75 - (s - 1.5) * (s - 1.5)
        } else {
            0.5 * (3.0 - s) * (3.0 - s)
        };
        b / self.width
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width + 1.5;
        let b = if !(0.0..=3.0).contains(&s) {
            0.0
        } else if s < 1.0 {
            1.0
        } else if s < 2.0 {
            -2.0
        } else {
            1.0
        };
        b / self.width.powi(3)
    }
}

/// `centers × widths` bumps with supports inside `(a, b)`. Widths are
/// `(b − a)/12, /24, /48, …`.
pub fn bump_family(a: f64, b: f64, centers: usize, widths: usize) -> Vec<Bump> {
    let len = b - a;
    let mut out = Vec::with_capacity(centers * widths);
    for k in 0..widths {
        let width = len / (12.0 * 2f64.powi(k as i32));
        let lo = a + 1.5 * width * (1.0 + 1e-9);
        let hi = b - 1.5 * width * (1.0 + 1e-9);
        for i in 0..centers {
            let frac = if centers == 1 {
                0.5
            } else {
                i as f64 / (centers - 1) as f64
            };
            out.push(Bump {
                center: lo + (hi - lo) * frac,
                width,
            });
        }
    }
    out
}

/// The default bump family: 64 centers × 4 widths.
pub fn default_bumps(a: f64, b: f64) -> Vec<Bump> {
    bump_family(a, b, 64, 4)
}

/// Criterion (i): margin `−(∫φ''u + ∫φκu)` for every bump.
pub fn distributional_residual(
    prob: &ConvexityProblem,
    family: &[Bump],
) -> Result<ConvexityCertificate> {
    distributional_with(prob, family, |p, phi| {
        let (lo, hi) = phi.support();
        let mut knots = p.knots(lo, hi, 16);
        knots.extend_from_slice(&phi.knots());
        let knots = merge_sorted(knots, 1e-15);
        let v = integrate_partition(Rule::Gauss5, &knots, |x| {
            let u = p.u_at(x);
            phi.second_derivative(x) * u + phi.value(x) * p.curvature.eval(x) * u
        });
        -v
    })
}

fn distributional_with(
    prob: &ConvexityProblem,
    family: &[Bump],
    margin: impl Fn(&ConvexityProblem, &Bump) -> f64 + Sync,
) -> Result<ConvexityCertificate> {
    if family.is_empty() {
        return Err(Error::precondition("test-function family is empty"));
    }
    let margins: Vec<(f64, Witness)> = family
        .par_iter()
        .enumerate()
        .map(|(index, phi)| {
            (
                margin(prob, phi),
                Witness::TestFunction {
                    index,
                    center: phi.center,
                    width: phi.width,
                },
            )
        })
        .collect();
    Ok(ConvexityCertificate::from_margins(
        Criterion::Distributional,
        prob.tol,
        margins,
    ))
}

/// Segments `[x0, x1]` and interior times at which segment criteria are evaluated.
#[derive(Clone, Debug)]
pub struct SegmentSample {
    pub segments: Vec<(f64, f64)>,
    pub ts: Vec<f64>,
}

impl SegmentSample {
    /// All pairs `x_i < x_j` from `points` equally spaced endpoints, with
    /// `t_points` interior times.
    pub fn grid(a: f64, b: f64, points: usize, t_points: usize) -> Self {
        let m = points.max(2) - 1;
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let mut segments = Vec::new();
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                segments.push((xs[i], xs[j]));
            }
        }
        SegmentSample {
            segments,
            ts: interior_times(t_points),
        }
    }

    pub fn shorter_than(&self, max_length: f64) -> Self {
        SegmentSample {
            segments: self
                .segments
                .iter()
                .copied()
                .filter(|&(x0, x1)| (x1 - x0).abs() <= max_length)
                .collect(),
            ts: self.ts.clone(),
        }
    }

    pub fn max_length(&self) -> f64 {
        self.segments
            .iter()
            .map(|&(x0, x1)| (x1 - x0).abs())
            .fold(0.0, f64::max)
    }
}

/// `n` equally spaced times strictly inside `(0, 1)`.
pub fn interior_times(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

fn segment_margins(
    sample: &SegmentSample,
    per_segment: impl Fn(f64, f64) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<(f64, Witness)>> {
    let rows: Vec<Result<Vec<(f64, Witness)>>> = sample
        .segments
        .par_iter()
        .map(|&(x0, x1)| {
            let ms = per_segment(x0, x1)?;
            Ok(ms
                .into_iter()
                .zip(&sample.ts)
                .map(|(m, &t)| (m, Witness::Segment { x0, x1, t }))
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Green integral `∫₀¹ g(s,t)θ²κ(γ(s))w(γ(s)) ds` for the segment from `x0` to `x1`.
fn green_term(
    kappa: &CurvatureField,
    weight: impl Fn(f64) -> f64,
    x0: f64,
    x1: f64,
    t: f64,
    extra: &[f64],
) -> f64 {
    let theta = (x1 - x0).abs();
    if theta == 0.0 {
        return 0.0;
    }
    let to_s = |x: f64| (x - x0) / (x1 - x0);
    let mut pts: Vec<f64> = kappa.breakpoints().iter().map(|&p| to_s(p)).collect();
    pts.extend(extra.iter().map(|&p| to_s(p)));
    pts.push(t);
    let knots = partition(0.0, 1.0, 200, &pts);
    let t2 = theta * theta;
    integrate_partition(Rule::Gauss5, &knots, |s| {
        let x = x0 + s * (x1 - x0);
        green_kernel(s, t) * t2 * kappa.eval(x) * weight(x)
    })
}

/// Criterion (ii): `u(γ_t) − (1−t)u(γ₀) − t·u(γ₁) − ∫g(s,t)κ(γ_s)θ²u(γ_s) ds`.
pub fn green_inequality_check(
    prob: &ConvexityProblem,
    sample: &SegmentSample,
) -> Result<ConvexityCertificate> {
    check_inside(prob, sample)?;
    let extra: Vec<f64> = prob.u.knots().map(|k| k.to_vec()).unwrap_or_default();
    let margins = segment_margins(sample, |x0, x1| {
        let (u0, u1) = (prob.u_at(x0), prob.u_at(x1));
        Ok(sample
            .ts
            .iter()
            .map(|&t| {
                let ut = prob.u_at(x0 + t * (x1 - x0));
                let g = green_term(&prob.curvature, |x| prob.u_at(x), x0, x1, t, &extra);
                ut - (1.0 - t) * u0 - t * u1 - g
            })
            .collect())
    })?;
    Ok(ConvexityCertificate::from_margins(
        Criterion::Green,
        prob.tol,
        margins,
    ))
}

fn check_inside(prob: &ConvexityProblem, sample: &SegmentSample) -> Result<()> {
    let slack = 1e-12 * (1.0 + prob.a.abs().max(prob.b.abs()));
    for &(x0, x1) in &sample.segments {
        if x0.min(x1) < prob.a - slack || x0.max(x1) > prob.b + slack {
            return Err(Error::domain(format!(
                "segment [{x0}, {x1}] leaves [{}, {}]",
                prob.a, prob.b
            )));
        }
    }
    Ok(())
}

/// Distortion profiles `(κ⁺_γ, κ⁻_γ)` for the segment from `x0` to `x1`.
pub fn segment_profiles(
    kappa: &CurvatureField,
    x0: f64,
    x1: f64,
) -> Result<(DistortionProfile, DistortionProfile)> {
    let geo = restrict_to_geodesic(kappa, x0, x1)?;
    let plus = DistortionProfile::new(&geo.forward, geo.length)?;
    let minus = DistortionProfile::new(&geo.reversed, geo.length)?;
    Ok((plus, minus))
}

/// Endpoint values at or below this count as zero against an infinite coefficient.
pub const ZERO_VALUE: f64 = 1e-12;

fn zeroed(u: f64) -> f64 {
    if u <= ZERO_VALUE {
        0.0
    } else {
        u
    }
}

/// `u(γ_t) − [σ_{κ⁻}^{(1−t)}(θ)·u(γ₀) + σ_{κ⁺}^{(t)}(θ)·u(γ₁)]` with `∞·0 = 0`.
fn sigma_margin(
    plus: &DistortionProfile,
    minus: &DistortionProfile,
    t: f64,
    u0: f64,
    ut: f64,
    u1: f64,
) -> f64 {
    let sm = minus.sigma_unchecked(1.0 - t);
    let sp = plus.sigma_unchecked(t);
    let rhs = sm * if sm.is_finite() { u0 } else { zeroed(u0) };
    let rhs2 = sp * if sp.is_finite() { u1 } else { zeroed(u1) };
    match (rhs, rhs2) {
        (Extended::Finite(p), Extended::Finite(q)) => ut - p - q,
        _ => f64::NEG_INFINITY,
    }
}

/// Criteria (iii) and (iv): σ-concavity on every sampled segment, or only on
/// those of length at most `max_length`.
pub fn sigma_concavity_check(
    prob: &ConvexityProblem,
    sample: &SegmentSample,
    max_length: Option<f64>,
) -> Result<ConvexityCertificate> {
    check_inside(prob, sample)?;
    let (sample, criterion) = match max_length {
        Some(l) => (sample.shorter_than(l), Criterion::SigmaBounded),
        None => (sample.clone(), Criterion::Sigma),
    };
    let margins = segment_margins(&sample, |x0, x1| {
        let (plus, minus) = segment_profiles(&prob.curvature, x0, x1)?;
        let (u0, u1) = (prob.u_at(x0), prob.u_at(x1));
        Ok(sample
            .ts
            .iter()
            .map(|&t| {
                let ut = prob.u_at(x0 + t * (x1 - x0));
                sigma_margin(&plus, &minus, t, u0, ut, u1)
            })
            .collect())
    })?;
    Ok(ConvexityCertificate::from_margins(criterion, prob.tol, margins))
}

/// Largest `L` (to relative precision 2⁻¹⁶ of `b − a`) for which criterion (iii)
/// passes on the sample, or `None` if it fails for every sampled length.
pub fn largest_passing_length(prob: &ConvexityProblem, sample: &SegmentSample) -> Result<Option<f64>> {
    let full = sample.max_length();
    if sigma_concavity_check(prob, sample, Some(full))?.passed() {
        return Ok(Some(full));
    }
    let shortest = sample
        .segments
        .iter()
        .map(|&(x0, x1)| (x1 - x0).abs())
        .fold(f64::INFINITY, f64::min);
    if !sigma_concavity_check(prob, sample, Some(shortest))?.passed() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (shortest, full);
    for _ in 0..16 {
        let mid = 0.5 * (lo + hi);
        if sigma_concavity_check(prob, sample, Some(mid))?.passed() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// First-variation form on every sampled segment:
/// `σ'_{κ⁻}(1)·u(γ₀) + (u∘γ)'(0) − σ'_{κ⁺}(0)·u(γ₁)`.
pub fn first_variation_check(
    prob: &ConvexityProblem,
    sample: &SegmentSample,
    max_length: Option<f64>,
) -> Result<ConvexityCertificate> {
    check_inside(prob, sample)?;
    let sample = match max_length {
        Some(l) => sample.shorter_than(l),
        None => sample.clone(),
    };
    let margins: Vec<Result<(f64, Witness)>> = sample
        .segments
        .par_iter()
        .map(|&(x0, x1)| {
            let (plus, minus) = segment_profiles(&prob.curvature, x0, x1)?;
            let d_plus = crate::distortion::boundary_derivatives_of(&plus);
            let d_minus = crate::distortion::boundary_derivatives_of(&minus);
            let w = Witness::Segment { x0, x1, t: 0.0 };
            let m = match d_plus.at0 {
                Extended::Finite(a0) => {
                    d_minus.at1 * prob.u_at(x0) + prob.u.derivative(x0) * (x1 - x0)
                        - a0 * prob.u_at(x1)
                }
                Extended::Infinite => f64::NEG_INFINITY,
            };
            Ok((m, w))
        })
        .collect();
    let margins: Result<Vec<_>> = margins.into_iter().collect();
    Ok(ConvexityCertificate::from_margins(
        Criterion::FirstVariation,
        prob.tol,
        margins?,
    ))
}

/// `U_N = e^{−S/N}` with `e^{−∞} = 0`.
pub fn u_n_of(s: f64, n: f64) -> f64 {
    if s == f64::INFINITY {
        0.0
    } else {
        (-s / n).exp()
    }
}

/// Certifies `(κ, N)`-convexity of `S` on `[a, b]`.
///
/// For finite `N` the chosen criterion is applied to `U_N = e^{−S/N}` with
/// curvature `κ/N`. For `N = ∞` the Green-weighted inequality
/// `S(γ_t) ≤ (1−t)S(γ₀) + tS(γ₁) − ∫g(s,t)θ²κ(γ_s) ds` is checked on the
/// segments, or its distributional form `S'' ≥ κ` for criterion (i).
pub fn certify_kappa_n_convex(
    s: &RealFunction,
    a: f64,
    b: f64,
    kappa: &CurvatureField,
    n: Dimension,
    criterion: Criterion,
    sample: &SegmentSample,
    tol: f64,
) -> Result<ConvexityCertificate> {
    match n {
        Dimension::Finite(nn) => {
            if !(nn >= 1.0) {
                return Err(Error::domain(format!("N = {nn} must be at least 1")));
            }
            let sf = s.clone();
            let u = RealFunction::new(move |x| u_n_of(sf.eval(x), nn));
            let prob = ConvexityProblem::new(a, b, u, kappa.scaled(1.0 / nn)).with_tol(tol);
            run_criterion(&prob, criterion, sample)
        }
        Dimension::Infinite => {
            let prob = ConvexityProblem::new(a, b, s.clone(), kappa.clone()).with_tol(tol);
            if criterion == Criterion::Distributional {
                return distributional_with(&prob, &default_bumps(a, b), |p, phi| {
                    let (lo, hi) = phi.support();
                    let mut knots = p.knots(lo, hi, 16);
                    knots.extend_from_slice(&phi.knots());
                    let knots = merge_sorted(knots, 1e-15);
                    integrate_partition(Rule::Gauss5, &knots, |x| {
                        phi.second_derivative(x) * p.u.eval(x) - phi.value(x) * p.curvature.eval(x)
                    })
                });
            }
            check_inside(&prob, sample)?;
            let extra: Vec<f64> = s.knots().map(|k| k.to_vec()).unwrap_or_default();
            let margins = segment_margins(sample, |x0, x1| {
                let (s0, s1) = (s.eval(x0), s.eval(x1));
                Ok(sample
                    .ts
                    .iter()
                    .map(|&t| {
                        let st = s.eval(x0 + t * (x1 - x0));
                        if s0 == f64::INFINITY || s1 == f64::INFINITY {
                            return f64::INFINITY;
                        }
                        let g = green_term(kappa, |_| 1.0, x0, x1, t, &extra);
                        (1.0 - t) * s0 + t * s1 - g - st
                    })
                    .collect())
            })?;
            Ok(ConvexityCertificate::from_margins(
                Criterion::KappaConvex,
                tol,
                margins,
            ))
        }
    }
}

/// Runs one of the four criteria, with `max_length` half the sample's longest
/// segment for the bounded σ-criterion.
pub fn run_criterion(
    prob: &ConvexityProblem,
    criterion: Criterion,
    sample: &SegmentSample,
) -> Result<ConvexityCertificate> {
    match criterion {
        Criterion::Distributional => distributional_residual(prob, &default_bumps(prob.a, prob.b)),
        Criterion::Green => green_inequality_check(prob, sample),
        Criterion::SigmaBounded => {
            sigma_concavity_check(prob, sample, Some(0.5 * sample.max_length()))
        }
        Criterion::FirstVariation => first_variation_check(prob, sample, None),
        _ => sigma_concavity_check(prob, sample, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample(a: f64, b: f64) -> SegmentSample {
        SegmentSample::grid(a, b, 9, 9)
    }

    fn k(c: f64, a: f64, b: f64) -> CurvatureField {
        CurvatureField::constant(c, a, b)
    }

    #[test]
    fn bumps_have_unit_mass_and_zero_curvature_mass() {
        let phi = Bump {
            center: 0.3,
            width: 0.05,
        };
        let (lo, hi) = phi.support();
        let knots = partition(lo, hi, 3, &[]);
        let mass = integrate_partition(Rule::Gauss5, &knots, |x| phi.value(x));
        let curv = integrate_partition(Rule::Gauss5, &knots, |x| phi.second_derivative(x));
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(curv.abs() < 1e-9);
    }

    #[test]
    fn distributional_examples() {
        let lin = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| x), k(0.0, 0.0, 1.0));
        let c = distributional_residual(&lin, &default_bumps(0.0, 1.0)).unwrap();
        assert!(c.passed() && c.worst_margin.abs() <= 1e-10, "{c:?}");

        let sine = ConvexityProblem::new(0.0, PI, RealFunction::new(f64::sin), k(1.0, 0.0, PI));
        let c = distributional_residual(&sine, &default_bumps(0.0, PI)).unwrap();
        assert!(c.passed() && c.worst_margin.abs() <= 1e-9, "{c:?}");

        let sq = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| x * x), k(0.0, 0.0, 1.0));
        let c = distributional_residual(&sq, &default_bumps(0.0, 1.0)).unwrap();
        assert!(!c.passed());
        // ∫φ''x² = 2∫φ = 2 for every unit-mass bump.
        assert!((c.worst_margin + 2.0).abs() < 1e-9);
        assert!(matches!(c.worst_witness, Some(Witness::TestFunction { .. })));
        assert!(distributional_residual(&sq, &[]).is_err());
    }

    #[test]
    fn green_examples() {
        let lin = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| 2.0 * x + 1.0), k(0.0, 0.0, 1.0));
        let c = green_inequality_check(&lin, &sample(0.0, 1.0)).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-12);

        let sine = ConvexityProblem::new(0.0, PI, RealFunction::new(f64::sin), k(1.0, 0.0, PI));
        let single = SegmentSample {
            segments: vec![(0.1, 2.9)],
            ts: interior_times(19),
        };
        let c = green_inequality_check(&sine, &single).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-9, "{c:?}");

        let one = ConvexityProblem::new(0.0, 3.0, RealFunction::constant(1.0), k(1.0, 0.0, 3.0));
        let mid = SegmentSample {
            segments: vec![(0.0, 3.0)],
            ts: vec![0.5],
        };
        let c = green_inequality_check(&one, &mid).unwrap();
        // 1 − 1 − θ²·∫g(s,½)ds = −9/8.
        assert!(!c.passed());
        assert!((c.worst_margin + 9.0 / 8.0).abs() < 1e-10);
    }

    #[test]
    fn sigma_examples() {
        let sine = ConvexityProblem::new(0.0, PI, RealFunction::new(f64::sin), k(1.0, 0.0, PI));
        let c = sigma_concavity_check(&sine, &sample(0.0, PI), None).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-8, "{c:?}");

        let lin = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| x), k(0.0, 0.0, 1.0));
        let c = sigma_concavity_check(&lin, &sample(0.0, 1.0), None).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-12);

        let cosh = ConvexityProblem::new(-1.0, 1.0, RealFunction::new(f64::cosh), k(-1.0, -1.0, 1.0));
        let c = sigma_concavity_check(&cosh, &sample(-1.0, 1.0), None).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-8, "{c:?}");
    }

    #[test]
    fn infinite_sigma_follows_zero_convention() {
        // The full segment [0, π] has infinite σ but u vanishes at both ends.
        let sine = ConvexityProblem::new(0.0, PI, RealFunction::new(f64::sin), k(1.0, 0.0, PI));
        let whole = SegmentSample {
            segments: vec![(0.0, PI)],
            ts: interior_times(5),
        };
        assert!(sigma_concavity_check(&sine, &whole, None).unwrap().passed());
        let one = ConvexityProblem::new(0.0, PI, RealFunction::constant(1.0), k(1.0, 0.0, PI));
        let c = sigma_concavity_check(&one, &whole, None).unwrap();
        assert_eq!(c.worst_margin, f64::NEG_INFINITY);
    }

    #[test]
    fn bounded_length_and_bisection() {
        let p = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| 1.0 + x * (1.0 - x)), k(0.0, 0.0, 1.0));
        let s = sample(0.0, 1.0);
        assert_eq!(largest_passing_length(&p, &s).unwrap(), Some(1.0));
        let q = ConvexityProblem::new(0.0, 1.0, RealFunction::new(|x| x * x), k(0.0, 0.0, 1.0));
        assert_eq!(largest_passing_length(&q, &s).unwrap(), None);
    }

    #[test]
    fn first_variation_on_model() {
        let sine = ConvexityProblem::new(0.0, PI, RealFunction::with_derivative(f64::sin, f64::cos), k(1.0, 0.0, PI));
        let s = SegmentSample::grid(0.2, 2.9, 7, 1);
        let c = first_variation_check(&sine, &s, None).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-7, "{c:?}");
    }

    #[test]
    fn kappa_n_examples() {
        let sq = RealFunction::new(|x| 0.5 * x * x);
        let s = sample(-2.0, 2.0);
        let c = certify_kappa_n_convex(&sq, -2.0, 2.0, &k(1.0, -2.0, 2.0), Dimension::Infinite, Criterion::Green, &s, 1e-7).unwrap();
        assert!(c.passed() && c.worst_margin.abs() < 1e-10, "{c:?}");
        let c = certify_kappa_n_convex(&sq, -2.0, 2.0, &k(1.1, -2.0, 2.0), Dimension::Infinite, Criterion::Green, &s, 1e-7).unwrap();
        assert!(!c.passed());
        if let Some(Witness::Segment { x0, x1, t }) = c.worst_witness {
            assert_eq!((x0, x1, t), (-2.0, 2.0, 0.5));
        } else {
            panic!("expected a segment witness");
        }

        for n in [1.0, 2.0, 5.0] {
            let logsin = RealFunction::new(move |x: f64| -n * x.sin().ln());
            let c = certify_kappa_n_convex(
                &logsin,
                0.0,
                PI,
                &k(n, 0.0, PI),
                Dimension::Finite(n),
                Criterion::Sigma,
                &sample(0.0, PI),
                1e-7,
            )
            .unwrap();
            assert!(c.passed(), "N={n}: {c:?}");
        }
    }

    #[test]
    fn dimension_parsing() {
        assert_eq!(Dimension::parse("inf"), Some(Dimension::Infinite));
        assert_eq!(Dimension::parse("2"), Some(Dimension::Finite(2.0)));
        assert_eq!(Dimension::parse("x"), None);
    }
}
