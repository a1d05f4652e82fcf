//! Optimal transport on weighted intervals: quantile representation of
//! probability measures, W₂ geodesics, relative entropy and the entropic
//! curvature-dimension, density and volume comparison checks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::convexity::{ConvexityCertificate, Criterion, Dimension, Witness, ZERO_VALUE};
use crate::curvature::{restrict_to_geodesic, CurvatureField, PlanCurvature};
use crate::distortion::{DistortionProfile, Extended};
use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::ode::sin_k;
use crate::quadrature::{cumulative, integrate_partition, partition, Rule};

/// Number of quantile levels `u_k = (k + ½)/M`.
pub const QUANTILE_LEVELS: usize = 2048;
/// Default tolerance of the entropic checks.
pub const CD_TOL: f64 = 1e-4;
/// Cells used for quadratures over `[a, b]` and over geodesic time.
const CELLS: usize = 1000;

pub fn levels(m: usize) -> Vec<f64> {
    (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect()
}

/// An interval `[a, b]` with reference measure `w·dx` and base point `p`.
/// A degenerate interval carries a unit point mass.
#[derive(Clone, Debug)]
pub struct MMSpace1D {
    pub a: f64,
    pub b: f64,
    pub weight: RealFunction,
    pub reference: f64,
    /// The interval truncates a space with unbounded tails.
    pub truncated: bool,
}

impl MMSpace1D {
    pub fn new(a: f64, b: f64, weight: RealFunction, reference: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::domain(format!("need a < b, got [{a}, {b}]")));
        }
        let space = MMSpace1D {
            a,
            b,
            weight,
            reference,
            truncated: false,
        };
        let total = space.mass(a, b);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain("reference measure must have positive finite mass"));
        }
        Ok(space)
    }

    pub fn lebesgue(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, RealFunction::constant(1.0), 0.5 * (a + b))
    }

    pub fn point(p: f64) -> Self {
        MMSpace1D {
            a: p,
            b: p,
            weight: RealFunction::constant(1.0),
            reference: p,
            truncated: false,
        }
    }

    /// `[a, b]` with weight from an `x, weight` table, linearly interpolated.
    pub fn from_table(xs: Vec<f64>, ws: Vec<f64>, reference: Option<f64>) -> Result<Self> {
        if ws.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be finite and non-negative"));
        }
        let (a, b) = (xs[0], *xs.last().unwrap());
        let weight = RealFunction::table(xs, ws, crate::function::Interpolation::Linear)?;
        Self::new(a, b, weight, reference.unwrap_or(0.5 * (a + b)))
    }

    pub fn with_truncated_tails(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub fn is_point(&self) -> bool {
        self.a == self.b
    }

    pub fn weight_at(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            0.0
        } else {
            self.weight.eval(x).max(0.0)
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let extra: Vec<f64> = self.weight.knots().map(|k| k.to_vec()).unwrap_or_default();
        partition(lo, hi, CELLS, &extra)
    }

    /// `m([lo, hi])`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if self.is_point() {
            return if lo <= self.a && self.a <= hi { 1.0 } else { 0.0 };
        }
        let (lo, hi) = (lo.max(self.a), hi.min(self.b));
        if !(lo < hi) {
            return 0.0;
        }
        integrate_partition(Rule::Gauss5, &self.knots(lo, hi), |x| self.weight_at(x))
    }

    /// `m(B̄_r(x₀))`.
    pub fn ball(&self, x0: f64, r: f64) -> f64 {
        self.mass(x0 - r, x0 + r)
    }
}

/// Piecewise-linear normalized density on `xs`.
#[derive(Clone, Debug)]
struct Density {
    xs: Vec<f64>,
    ps: Vec<f64>,
    cdf: Vec<f64>,
}

impl Density {
    fn new(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.len() != ps.len() || xs.len() < 2 {
            return Err(Error::precondition("density needs at least two matching samples"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Ordering("density abscissae must increase strictly".into()));
        }
        if ps.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::domain("density values must be finite and non-negative"));
        }
        let mut cdf = vec![0.0];
        for i in 0..xs.len() - 1 {
            let m = 0.5 * (xs[i + 1] - xs[i]) * (ps[i] + ps[i + 1]);
            cdf.push(cdf[i] + m);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::domain("density has zero mass"));
        }
        Ok(Density {
            xs,
            ps: ps.iter().map(|p| p / total).collect(),
            cdf: cdf.iter().map(|c| c / total).collect(),
        })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let s = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ps[i] + s * (self.ps[i + 1] - self.ps[i])
    }

    fn cdf_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let s = x - self.xs[i];
        let k = (self.ps[i + 1] - self.ps[i]) / (self.xs[i + 1] - self.xs[i]);
        self.cdf[i] + self.ps[i] * s + 0.5 * k * s * s
    }

    /// Exact inverse of the piecewise-quadratic CDF, with `1/ρ` at the result.
    fn quantile(&self, u: f64) -> (f64, f64) {
        let n = self.xs.len();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let k = (self.ps[i + 1] - self.ps[i]) / h;
        let r = (u - self.cdf[i]).max(0.0);
        let p = self.ps[i];
        let disc = (p * p + 2.0 * k * r).max(0.0);
        let s = if r == 0.0 { 0.0 } else { (2.0 * r / (p + disc.sqrt())).min(h) };
        let rho = p + k * s;
        let dq = if rho > 0.0 { 1.0 / rho } else { f64::INFINITY };
        (self.xs[i] + s, dq)
    }
}

/// A probability measure on the line, stored by its quantile function on
/// [`QUANTILE_LEVELS`] midpoint levels together with `q′ = 1/ρ∘q`.
#[derive(Clone, Debug)]
pub struct ProbMeasure1D {
    quantiles: Arc<Vec<f64>>,
    dq: Arc<Vec<f64>>,
    density: Option<Arc<Density>>,
}

impl ProbMeasure1D {
    /// Measure with piecewise-linear density through `(xs, ps)`, normalized.
    pub fn from_density(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        let d = Density::new(xs, ps)?;
        let (q, dq): (Vec<f64>, Vec<f64>) = levels(QUANTILE_LEVELS).iter().map(|&u| d.quantile(u)).unzip();
        Ok(ProbMeasure1D {
            quantiles: Arc::new(q),
            dq: Arc::new(dq),
            density: Some(Arc::new(d)),
        })
    }

    /// Density `f` sampled on `cells` uniform cells of `[lo, hi]`.
    pub fn from_density_fn(lo: f64, hi: f64, cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let xs: Vec<f64> = (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect();
        let ps = xs.iter().map(|&x| f(x)).collect();
        Self::from_density(xs, ps)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::from_density(vec![lo, hi], vec![1.0, 1.0])
    }

    pub fn dirac(x: f64) -> Self {
        ProbMeasure1D {
            quantiles: Arc::new(vec![x; QUANTILE_LEVELS]),
            dq: Arc::new(vec![0.0; QUANTILE_LEVELS]),
            density: None,
        }
    }

    /// Measure given directly by quantile levels and their derivatives.
    pub fn from_quantiles(quantiles: Vec<f64>, dq: Vec<f64>) -> Result<Self> {
        if quantiles.len() != dq.len() || quantiles.is_empty() {
            return Err(Error::precondition("quantile and derivative vectors must match"));
        }
        if quantiles.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Ordering("quantiles must be non-decreasing".into()));
        }
        Ok(ProbMeasure1D {
            quantiles: Arc::new(quantiles),
            dq: Arc::new(dq),
            density: None,
        })
    }

    /// Push-forward under `x ↦ x + c`.
    pub fn translated(&self, c: f64) -> Self {
        ProbMeasure1D {
            quantiles: Arc::new(self.quantiles.iter().map(|q| q + c).collect()),
            dq: self.dq.clone(),
            density: self.density.as_ref().map(|d| {
                Arc::new(Density {
                    xs: d.xs.iter().map(|x| x + c).collect(),
                    ps: d.ps.clone(),
                    cdf: d.cdf.clone(),
                })
            }),
        }
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    pub fn quantile_derivatives(&self) -> &[f64] {
        &self.dq
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// Some quantile level sits on an atom.
    pub fn has_atoms(&self) -> bool {
        self.dq.iter().any(|&d| !(d > 0.0))
    }

    /// Smallest and largest quantile levels.
    pub fn support(&self) -> (f64, f64) {
        match &self.density {
            Some(d) => (d.xs[0], *d.xs.last().unwrap()),
            None => (self.quantiles[0], *self.quantiles.last().unwrap()),
        }
    }

    /// Quantile at level `u`: exact for density-backed measures, otherwise
    /// linear between stored levels.
    pub fn quantile(&self, u: f64) -> f64 {
        if let Some(d) = &self.density {
            return d.quantile(u.clamp(0.0, 1.0)).0;
        }
        let m = self.quantiles.len();
        let pos = (u * m as f64 - 0.5).clamp(0.0, (m - 1) as f64);
        let i = (pos.floor() as usize).min(m.saturating_sub(2));
        if m == 1 {
            return self.quantiles[0];
        }
        let s = pos - i as f64;
        self.quantiles[i] + s * (self.quantiles[i + 1] - self.quantiles[i])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if let Some(d) = &self.density {
            return d.cdf_at(x);
        }
        let m = self.quantiles.len();
        self.quantiles.partition_point(|&q| q <= x) as f64 / m as f64
    }

    /// Density with respect to Lebesgue measure, if the measure carries one.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.density.as_ref().map(|d| d.eval(x))
    }
}

fn same_levels(mu: &ProbMeasure1D, nu: &ProbMeasure1D) -> Result<()> {
    if mu.quantiles.len() != nu.quantiles.len() {
        return Err(Error::precondition("measures use different quantile grids"));
    }
    Ok(())
}

/// `W₂(μ, ν) = (∫₀¹ |q_μ − q_ν|² du)^{1/2}` by the midpoint rule on the levels.
pub fn w2_distance(mu: &ProbMeasure1D, nu: &ProbMeasure1D) -> Result<f64> {
    same_levels(mu, nu)?;
    let m = mu.quantiles.len() as f64;
    let s: f64 = mu.quantiles.iter().zip(nu.quantiles.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / m).sqrt())
}

/// Displacement interpolation `μ_t` with quantile `(1 − t)q₀ + t·q₁`.
#[derive(Clone, Debug)]
pub struct WassersteinGeodesic {
    pub mu0: ProbMeasure1D,
    pub mu1: ProbMeasure1D,
    pub theta: f64,
    pub ts: Vec<f64>,
}

impl WassersteinGeodesic {
    pub fn at(&self, t: f64) -> ProbMeasure1D {
        if t == 0.0 {
            return self.mu0.clone();
        }
        if t == 1.0 {
            return self.mu1.clone();
        }
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect() };
        ProbMeasure1D {
            quantiles: Arc::new(mix(&self.mu0.quantiles, &self.mu1.quantiles)),
            dq: Arc::new(mix(&self.mu0.dq, &self.mu1.dq)),
            density: None,
        }
    }

    pub fn interpolants(&self) -> Vec<ProbMeasure1D> {
        self.ts.iter().map(|&t| self.at(t)).collect()
    }

    /// `|γ̇|(u) = |q₁(u) − q₀(u)|` per level.
    pub fn particle_speeds(&self) -> Vec<f64> {
        self.mu0.quantiles.iter().zip(self.mu1.quantiles.iter()).map(|(a, b)| (b - a).abs()).collect()
    }

    /// Monotone plan as straight particle paths, for curvature averaging.
    pub fn plan(&self, kappa: &CurvatureField) -> Result<PlanCurvature> {
        PlanCurvature::from_quantiles(kappa, &self.mu0.quantiles, &self.mu1.quantiles)
    }
}

pub fn displacement_geodesic(mu: &ProbMeasure1D, nu: &ProbMeasure1D, ts: &[f64]) -> Result<WassersteinGeodesic> {
    let theta = w2_distance(mu, nu)?;
    if ts.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::domain("geodesic times must lie in [0, 1]"));
    }
    Ok(WassersteinGeodesic {
        mu0: mu.clone(),
        mu1: nu.clone(),
        theta,
        ts: ts.to_vec(),
    })
}

/// `∫ρ log ρ dm` for `μ = ρm`, or `+∞` if μ has atoms or charges `{w = 0}`.
///
/// Density-backed measures are integrated in space; quantile-only measures
/// use [`lagrangian_entropy`].
pub fn entropy(mu: &ProbMeasure1D, space: &MMSpace1D) -> Extended {
    if mu.has_atoms() || space.is_point() {
        return Extended::Infinite;
    }
    let Some(d) = &mu.density else {
        return lagrangian_entropy(mu, space);
    };
    let mut total = 0.0;
    for i in 0..d.xs.len() - 1 {
        let (lo, hi) = (d.xs[i], d.xs[i + 1]);
        if d.ps[i] == 0.0 && d.ps[i + 1] == 0.0 {
            continue;
        }
        let cells = ((hi - lo) / (space.b - space.a) * CELLS as f64).ceil().clamp(1.0, 64.0) as usize;
        let mut charged_null = false;
        let part = integrate_partition(Rule::Gauss5, &partition(lo, hi, cells, &[]), |x| {
            let rho = d.eval(x);
            if rho <= 0.0 {
                return 0.0;
            }
            let w = space.weight_at(x);
            if w <= 0.0 {
                charged_null = true;
                return 0.0;
            }
            rho * (rho / w).ln()
        });
        if charged_null {
            return Extended::Infinite;
        }
        total += part;
    }
    Extended::Finite(total)
}

/// `−∫₀¹ log(q′(u)·w(q(u))) du` by the midpoint rule over the quantile levels.
pub fn lagrangian_entropy(mu: &ProbMeasure1D, space: &MMSpace1D) -> Extended {
    if mu.has_atoms() || space.is_point() {
        return Extended::Infinite;
    }
    let m = mu.quantiles.len() as f64;
    let mut s = 0.0;
    for (&q, &dq) in mu.quantiles.iter().zip(mu.dq.iter()) {
        let w = space.weight_at(q);
        if !(w > 0.0) || !dq.is_finite() {
            return Extended::Infinite;
        }
        s -= (dq * w).ln();
    }
    Extended::Finite(s / m)
}

/// `U_N = exp(−Ent/N)` with `Ent = ∞ ↦ 0`.
pub fn u_n_of(ent: Extended, n: f64) -> f64 {
    match ent {
        Extended::Finite(e) => (-e / n).exp(),
        Extended::Infinite => 0.0,
    }
}

pub fn u_n(mu: &ProbMeasure1D, space: &MMSpace1D, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain("N must be positive"));
    }
    Ok(u_n_of(entropy(mu, space), n))
}

fn check_support(space: &MMSpace1D, mu: &ProbMeasure1D) -> Result<()> {
    let (lo, hi) = mu.support();
    let slack = 1e-12 * (1.0 + space.a.abs().max(space.b.abs()));
    if lo < space.a - slack || hi > space.b + slack {
        return Err(Error::domain(format!(
            "measure support [{lo}, {hi}] leaves [{}, {}]",
            space.a, space.b
        )));
    }
    Ok(())
}

/// `∫₀¹ g(t, τ) p(τ) dτ` at each `t`, from prefix sums over a shared τ partition.
fn green_weighted(p: impl Fn(f64) -> f64, ts: &[f64]) -> Vec<f64> {
    let knots = partition(0.0, 1.0, CELLS, ts);
    let a = cumulative(Rule::Gauss5, &knots, |tau| tau * p(tau));
    let b = cumulative(Rule::Gauss5, &knots, |tau| (1.0 - tau) * p(tau));
    let b_total = *b.last().unwrap();
    ts.iter()
        .map(|&t| {
            let i = knots.partition_point(|&k| k < t).min(knots.len() - 1);
            let (ai, bi) = (a[i], b_total - b[i]);
            (1.0 - t) * ai + t * bi
        })
        .collect()
}

/// Entropic curvature-dimension inequality along the displacement geodesic:
/// `U_N(μ_t) ≥ σ^{(1−t)}_{κ⁻_Π/N}(Θ)U_N(μ₀) + σ^{(t)}_{κ⁺_Π/N}(Θ)U_N(μ₁)` for finite
/// `N`, and `(1−t)Ent(μ₀) + tEnt(μ₁) − Ent(μ_t) ≥ ∫₀¹ g(t,τ)κ_Π(τΘ)Θ² dτ` for `N = ∞`.
///
/// Entropies are Lagrangian at every `t`, so all three share one quadrature.
pub fn check_entropic_cd(
    space: &MMSpace1D,
    kappa: &CurvatureField,
    n: Dimension,
    mu0: &ProbMeasure1D,
    mu1: &ProbMeasure1D,
    ts: &[f64],
    tol: f64,
) -> Result<ConvexityCertificate> {
    check_support(space, mu0)?;
    check_support(space, mu1)?;
    let criterion = match n {
        Dimension::Finite(_) => Criterion::EntropicCd,
        Dimension::Infinite => Criterion::EntropicCdInfinite,
    };
    let geo = displacement_geodesic(mu0, mu1, ts)?;
    if geo.theta == 0.0 {
        let mut cert = ConvexityCertificate::from_margins(criterion, tol, ts.iter().map(|&t| (0.0, Witness::Time { t })));
        cert.note = "Θ = 0";
        return Ok(cert);
    }
    let plan = geo.plan(kappa)?;
    let e0 = lagrangian_entropy(mu0, space);
    let e1 = lagrangian_entropy(mu1, space);
    let ents: Vec<Extended> = ts.par_iter().map(|&t| lagrangian_entropy(&geo.at(t), space)).collect();
    let margins: Vec<(f64, Witness)> = match n {
        Dimension::Finite(nn) => {
            let plus = DistortionProfile::new(&plan.as_field().scaled(1.0 / nn), 1.0)?;
            let minus = DistortionProfile::new(&plan.as_reversed_field().scaled(1.0 / nn), 1.0)?;
            let (u0, u1) = (u_n_of(e0, nn), u_n_of(e1, nn));
            ts.iter()
                .zip(&ents)
                .map(|(&t, &et)| {
                    let rhs = weighted(minus.sigma_unchecked(1.0 - t), u0) + weighted(plus.sigma_unchecked(t), u1);
                    (u_n_of(et, nn) - rhs, Witness::Time { t })
                })
                .collect()
        }
        Dimension::Infinite => {
            let (Extended::Finite(e0), Extended::Finite(e1)) = (e0, e1) else {
                return Err(Error::not_applicable("endpoint measures must have finite entropy"));
            };
            let field = plan.as_field();
            let green = green_weighted(|tau| field.eval(tau), ts);
            ts.iter()
                .zip(&ents)
                .zip(&green)
                .map(|((&t, &et), &g)| {
                    let m = match et {
                        Extended::Finite(et) => (1.0 - t) * e0 + t * e1 - et - g,
                        Extended::Infinite => f64::NEG_INFINITY,
                    };
                    (m, Witness::Time { t })
                })
                .collect()
        }
    };
    Ok(ConvexityCertificate::from_margins(criterion, tol, margins))
}

/// `σ·u` with `∞·0 = 0`; values at or below [`ZERO_VALUE`] count as zero.
fn weighted(sigma: Extended, u: f64) -> f64 {
    match sigma {
        Extended::Finite(s) => s * u,
        Extended::Infinite if u <= ZERO_VALUE => 0.0,
        Extended::Infinite => f64::INFINITY,
    }
}

/// Pointwise density inequality per quantile level (one particle each):
/// `ρ_t(γ_t)^{−1/N} ≥ σ^{(1−t)}_{κ⁻_γ/N}(|γ̇|)ρ₀(γ₀)^{−1/N} + σ^{(t)}_{κ⁺_γ/N}(|γ̇|)ρ₁(γ₁)^{−1/N}`,
/// with densities taken against `m`. For `N = ∞` the logarithmic form
/// `(1−t)log ρ₀ + t log ρ₁ − log ρ_t ≥ ∫₀¹ g(t,τ)κ(γ_τ)|γ̇|² dτ` is checked.
pub fn density_inequality_check(
    space: &MMSpace1D,
    kappa: &CurvatureField,
    n: Dimension,
    mu0: &ProbMeasure1D,
    mu1: &ProbMeasure1D,
    ts: &[f64],
    tol: f64,
) -> Result<ConvexityCertificate> {
    check_support(space, mu0)?;
    check_support(space, mu1)?;
    same_levels(mu0, mu1)?;
    if mu0.has_atoms() || mu1.has_atoms() {
        return Err(Error::not_applicable("density inequality needs absolutely continuous measures"));
    }
    let m = mu0.quantiles.len();
    let lv = levels(m);
    // ρ against m along a particle: 1/(q′·w(q)).
    let inv_density = |q: f64, dq: f64| dq * space.weight_at(q);
    let per_level: Vec<Result<Vec<(f64, Witness)>>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let (x0, x1) = (mu0.quantiles[k], mu1.quantiles[k]);
            let (d0, d1) = (mu0.dq[k], mu1.dq[k]);
            let (j0, j1) = (inv_density(x0, d0), inv_density(x1, d1));
            let level = lv[k];
            let jt = |t: f64| inv_density((1.0 - t) * x0 + t * x1, (1.0 - t) * d0 + t * d1);
            match n {
                Dimension::Finite(nn) => {
                    let geo = restrict_to_geodesic(kappa, x0, x1)?;
                    let plus = DistortionProfile::new(&geo.forward.scaled(1.0 / nn), geo.length)?;
                    let minus = DistortionProfile::new(&geo.reversed.scaled(1.0 / nn), geo.length)?;
                    let root = |j: f64| if j > 0.0 && j.is_finite() { j.powf(1.0 / nn) } else { 0.0 };
                    Ok(ts
                        .iter()
                        .map(|&t| {
                            let rhs = weighted(minus.sigma_unchecked(1.0 - t), root(j0))
                                + weighted(plus.sigma_unchecked(t), root(j1));
                            (root(jt(t)) - rhs, Witness::Particle { level, t })
                        })
                        .collect())
                }
                Dimension::Infinite => {
                    restrict_to_geodesic(kappa, x0, x1)?;
                    let len2 = (x1 - x0) * (x1 - x0);
                    let green = if len2 > 0.0 {
                        green_weighted(|tau| kappa.eval((1.0 - tau) * x0 + tau * x1) * len2, ts)
                    } else {
                        vec![0.0; ts.len()]
                    };
                    Ok(ts
                        .iter()
                        .zip(&green)
                        .map(|(&t, &g)| {
                            let lhs = (1.0 - t) * (-j0.ln()) + t * (-j1.ln()) + jt(t).ln();
                            let lhs = if lhs.is_nan() { f64::NEG_INFINITY } else { lhs };
                            (lhs - g, Witness::Particle { level, t })
                        })
                        .collect())
                }
            }
        })
        .collect();
    let mut margins = Vec::with_capacity(m * ts.len());
    for r in per_level {
        margins.extend(r?);
    }
    Ok(ConvexityCertificate::from_margins(Criterion::Density, tol, margins))
}

/// Ball volumes, Minkowski contents and their ratios against the comparison models.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BishopGromovReport {
    pub r: f64,
    pub big_r: f64,
    pub v_r: f64,
    pub v_big_r: f64,
    pub s_r: f64,
    pub s_big_r: f64,
    pub s_ratio: f64,
    pub v_ratio: f64,
    /// Model ratios `sin^N_{κ̲/N}` of the comparison theorem.
    pub model_s_ratio: f64,
    pub model_v_ratio: f64,
    /// Ratios of the sharp one-dimensional model `sin^{N−1}_{κ̲/(N−1)}`.
    pub sharp_s_ratio: f64,
    pub sharp_v_ratio: f64,
    /// `s_ratio − model_s_ratio` and `v_ratio − model_v_ratio`.
    pub s_margin: f64,
    pub v_margin: f64,
    pub holds: bool,
}

/// Minkowski content `s(r)` from one-sided quotients at `δ ∈ {1e−3, 5e−4}`,
/// Richardson-extrapolated to `δ → 0`.
pub fn minkowski_content(space: &MMSpace1D, x0: f64, r: f64) -> f64 {
    let v = space.ball(x0, r);
    let q = |delta: f64| (space.ball(x0, r + delta) - v) / delta;
    2.0 * q(5e-4) - q(1e-3)
}

/// `(∫₀^r f, f(r))` for a model density `f` on `[0, R]`.
fn model_pair(f: &dyn Fn(f64) -> f64, r: f64) -> (f64, f64) {
    (integrate_partition(Rule::Gauss5, &partition(0.0, r, CELLS, &[]), f), f(r))
}

pub fn bishop_gromov_check(
    space: &MMSpace1D,
    x0: f64,
    r: f64,
    big_r: f64,
    kappa_lower: f64,
    n: f64,
    tol: f64,
) -> Result<BishopGromovReport> {
    if !(0.0 < r && r < big_r) {
        return Err(Error::domain("need 0 < r < R"));
    }
    if !(n >= 1.0) {
        return Err(Error::domain("need N ≥ 1"));
    }
    if n == 1.0 && kappa_lower > 0.0 {
        return Err(Error::domain("N = 1 requires κ̲ ≤ 0"));
    }
    if kappa_lower > 0.0 && big_r > std::f64::consts::PI * (n / kappa_lower).sqrt() * (1.0 + 1e-12) {
        return Err(Error::domain("R exceeds π√(N/κ̲)"));
    }
    if x0 < space.a || x0 > space.b {
        return Err(Error::domain(format!("x0 = {x0} outside [{}, {}]", space.a, space.b)));
    }
    let (v_r, v_big_r) = (space.ball(x0, r), space.ball(x0, big_r));
    let (s_r, s_big_r) = (minkowski_content(space, x0, r), minkowski_content(space, x0, big_r));
    let ratios = |f: &dyn Fn(f64) -> f64| {
        let (vr, sr) = model_pair(f, r);
        let (vb, sb) = model_pair(f, big_r);
        (sr / sb, vr / vb)
    };
    let (model_s_ratio, model_v_ratio) = if n == 1.0 {
        (1.0, r / big_r)
    } else {
        let k = kappa_lower / n;
        ratios(&|t: f64| sin_k(k, t).max(0.0).powf(n))
    };
    let (sharp_s_ratio, sharp_v_ratio) = if n == 1.0 {
        (1.0, r / big_r)
    } else {
        let k = kappa_lower / (n - 1.0);
        ratios(&|t: f64| sin_k(k, t).max(0.0).powf(n - 1.0))
    };
    let s_ratio = s_r / s_big_r;
    let v_ratio = v_r / v_big_r;
    let s_margin = s_ratio - model_s_ratio;
    let v_margin = v_ratio - model_v_ratio;
    Ok(BishopGromovReport {
        r,
        big_r,
        v_r,
        v_big_r,
        s_r,
        s_big_r,
        s_ratio,
        v_ratio,
        model_s_ratio,
        model_v_ratio,
        sharp_s_ratio,
        sharp_v_ratio,
        s_margin,
        v_margin,
        holds: s_margin >= -tol && v_margin >= -tol,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VolumeGrowth {
    pub value: f64,
    pub finite: bool,
}

/// `∫ e^{−c·d(p,x)²} dm(x)`. On truncated spaces the integral over eight
/// annuli per side is extrapolated geometrically; non-decaying outer annuli
/// flag divergence.
pub fn volume_growth_check(space: &MMSpace1D, c: f64) -> Result<VolumeGrowth> {
    if !(c > 0.0) {
        return Err(Error::domain("c must be positive"));
    }
    let p = space.reference;
    if space.is_point() {
        return Ok(VolumeGrowth { value: 1.0, finite: true });
    }
    let h = |x: f64| (-c * (x - p) * (x - p)).exp() * space.weight_at(x);
    let integral = |lo: f64, hi: f64| {
        if hi <= lo {
            0.0
        } else {
            integrate_partition(Rule::Gauss5, &space.knots(lo, hi), h)
        }
    };
    if !space.truncated {
        return Ok(VolumeGrowth {
            value: integral(space.a, space.b),
            finite: true,
        });
    }
    const ANNULI: usize = 8;
    let mut value = 0.0;
    let mut finite = true;
    for (from, to) in [(p, space.b), (p, space.a)] {
        let (lo, hi) = (from.min(to), from.max(to));
        if hi - lo <= 0.0 {
            continue;
        }
        let width = (hi - lo) / ANNULI as f64;
        let parts: Vec<f64> = (0..ANNULI)
            .map(|k| {
                let (r0, r1) = (k as f64 * width, (k + 1) as f64 * width);
                if to > from {
                    integral(from + r0, from + r1)
                } else {
                    integral(from - r1, from - r0)
                }
            })
            .collect();
        let side: f64 = parts.iter().sum();
        let (last, prev) = (parts[ANNULI - 1], parts[ANNULI - 2]);
        if last > 1e-14 * side.max(f64::MIN_POSITIVE) && last >= prev {
            finite = false;
            value += side;
        } else if prev > 0.0 {
            let rho = last / prev;
            value += side + last * rho / (1.0 - rho);
        } else {
            value += side;
        }
    }
    Ok(VolumeGrowth { value, finite })
}

/// Weight `sin^{N−1}` on `[ε, π − ε]`.
pub fn model_sphere(n: f64, eps: f64) -> Result<MMSpace1D> {
    MMSpace1D::new(
        eps,
        std::f64::consts::PI - eps,
        RealFunction::new(move |x: f64| x.sin().max(0.0).powf(n - 1.0)),
        std::f64::consts::FRAC_PI_2,
    )
}

/// Weight `e^{−x²/2}` on `[−L, L]`, marked as a truncation.
pub fn gaussian_line(half_width: f64) -> Result<MMSpace1D> {
    Ok(MMSpace1D::new(
        -half_width,
        half_width,
        RealFunction::new(|x: f64| (-0.5 * x * x).exp()),
        0.0,
    )?
    .with_truncated_tails())
}
