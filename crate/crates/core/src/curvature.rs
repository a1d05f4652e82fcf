//! Lower semi-continuous curvature bounds on intervals.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::merge_sorted;

/// Which one-sided value to read at a point.
///
/// Away from breakpoints all three agree. At a breakpoint, `Left` and `Right`
/// are the one-sided limits and `At` is the lower semi-continuous value, the
/// smaller of the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    At,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::At => Side::At,
        }
    }
}

type Sampler = Arc<dyn Fn(f64, Side) -> f64 + Send + Sync>;

/// A lower semi-continuous, bounded-below curvature function on `[start, end]`.
///
/// Piecewise-constant fields use left-closed cells whose value is the infimum
/// over the cell; at a breakpoint the field takes the smaller adjacent value,
/// which keeps sampled fields exactly lower semi-continuous.
#[derive(Clone)]
pub struct CurvatureField {
    start: f64,
    end: f64,
    lower_bound: f64,
    breakpoints: Arc<Vec<f64>>,
    constant: Option<f64>,
    sampler: Sampler,
    /// Set on reversed fields; reversing again returns it unchanged.
    mirror: Option<Arc<CurvatureField>>,
}

impl fmt::Debug for CurvatureField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurvatureField")
            .field("start", &self.start)
            .field("end", &self.end)
            .field("lower_bound", &self.lower_bound)
            .field("breakpoints", &self.breakpoints.len())
            .field("constant", &self.constant)
            .finish()
    }
}

impl CurvatureField {
    pub fn constant(c: f64, start: f64, end: f64) -> Self {
        CurvatureField {
            start,
            end,
            lower_bound: c,
            breakpoints: Arc::new(Vec::new()),
            constant: Some(c),
            sampler: Arc::new(move |_, _| c),
            mirror: None,
        }
    }

    /// Piecewise-constant field: cell `i` is `[edges[i], edges[i+1])` with value `values[i]`.
    pub fn steps(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::precondition("steps need one more edge than values"));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::precondition("step edges must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::precondition("curvature values must be finite"));
        }
        let lower_bound = values.iter().copied().fold(f64::INFINITY, f64::min);
        let start = edges[0];
        let end = edges[edges.len() - 1];
        let interior: Vec<f64> = edges[1..edges.len() - 1].to_vec();
        let cells = Arc::new(edges);
        let vals = Arc::new(values);
        let sampler: Sampler = Arc::new(move |x, side| {
            let n = vals.len();
            let right = cells.partition_point(|&e| e <= x).clamp(1, n) - 1;
            let on_edge = right > 0 && cells[right] == x;
            if !on_edge || x <= cells[0] {
                return vals[right];
            }
            match side {
                Side::Right => vals[right],
                Side::Left => vals[right - 1],
                Side::At => vals[right].min(vals[right - 1]),
            }
        });
        Ok(CurvatureField {
            start,
            end,
            lower_bound,
            breakpoints: Arc::new(interior),
            constant: None,
            sampler,
            mirror: None,
        })
    }

    /// Field from a two-column table read as left-closed cells `[x_i, x_{i+1})`
    /// with value `kappa_i`. The final row only enters through the value at
    /// the right endpoint. The lower bound is the table minimum.
    pub fn from_table(xs: &[f64], kappa: &[f64]) -> Result<Self> {
        if xs.len() != kappa.len() || xs.len() < 2 {
            return Err(Error::precondition("curvature table needs at least two rows"));
        }
        let n = xs.len();
        let mut field = Self::steps(xs.to_vec(), kappa[..n - 1].to_vec())?;
        let last = kappa[n - 1];
        if !last.is_finite() {
            return Err(Error::precondition("curvature values must be finite"));
        }
        let end = xs[n - 1];
        let inner = field.sampler.clone();
        field.sampler = Arc::new(move |x, side| {
            let v = inner(x, side);
            if x >= end {
                v.min(last)
            } else {
                v
            }
        });
        field.lower_bound = field.lower_bound.min(last);
        if kappa.iter().all(|&k| k == kappa[0]) {
            field.constant = Some(kappa[0]);
        }
        Ok(field)
    }

    /// Continuous field from a closure with a known lower bound.
    pub fn from_fn(
        start: f64,
        end: f64,
        lower_bound: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CurvatureField {
            start,
            end,
            lower_bound,
            breakpoints: Arc::new(Vec::new()),
            constant: None,
            sampler: Arc::new(move |x, _| f(x)),
            mirror: None,
        }
    }

    /// Field from a side-aware closure. `breakpoints` lists the points where
    /// one-sided values may differ.
    pub fn from_sided_fn(
        start: f64,
        end: f64,
        lower_bound: f64,
        breakpoints: Vec<f64>,
        f: impl Fn(f64, Side) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CurvatureField {
            start,
            end,
            lower_bound,
            breakpoints: Arc::new(breakpoints),
            constant: None,
            sampler: Arc::new(f),
            mirror: None,
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// The constant value if the field is known to be constant.
    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    /// Interior breakpoints, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Lower semi-continuous value at `x` (clamped to the domain).
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::At)
    }

    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        (self.sampler)(x.clamp(self.start, self.end), side)
    }

    fn map(&self, start: f64, end: f64, lower_bound: f64, sampler: Sampler, bps: Vec<f64>) -> Self {
        CurvatureField {
            start,
            end,
            lower_bound,
            breakpoints: Arc::new(merge_sorted(bps, 0.0)),
            constant: None,
            sampler,
            mirror: None,
        }
    }

    /// Unit-speed restriction along the segment from `x0` to `x1`, as a field
    /// on `[0, |x1 - x0|]`.
    pub fn restrict(&self, x0: f64, x1: f64) -> Self {
        let len = (x1 - x0).abs();
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let inner = self.sampler.clone();
        let (a, b) = (self.start, self.end);
        let pairs: Vec<(f64, f64)> = self
            .breakpoints
            .iter()
            .map(|&p| ((p - x0) * dir, p))
            .filter(|&(s, _)| s > 0.0 && s < len)
            .collect();
        let bps = pairs.iter().map(|p| p.0).collect();
        let sampler: Sampler = Arc::new(move |s, side| {
            let side = if dir < 0.0 { side.flip() } else { side };
            let x = snap(&pairs, s).unwrap_or(x0 + dir * s);
            inner(x.clamp(a, b), side)
        });
        let mut out = self.map(0.0, len, self.lower_bound, sampler, bps);
        out.constant = self.constant;
        out
    }

    /// The reversed field `x ↦ κ(start + end − x)`.
    pub fn reversed(&self) -> Self {
        if let Some(original) = &self.mirror {
            return (**original).clone();
        }
        let inner = self.sampler.clone();
        let (a, b) = (self.start, self.end);
        let pairs: Vec<(f64, f64)> = self.breakpoints.iter().map(|&p| (a + b - p, p)).collect();
        let bps = pairs.iter().map(|p| p.0).collect();
        let sampler: Sampler = Arc::new(move |x, side| {
            let y = snap(&pairs, x).unwrap_or(a + b - x);
            inner(y, side.flip())
        });
        let mut out = self.map(a, b, self.lower_bound, sampler, bps);
        out.constant = self.constant;
        out.mirror = Some(Arc::new(self.clone()));
        out
    }

    /// `α·κ` for `α ≥ 0`.
    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "scaling a curvature field by a negative factor breaks semicontinuity");
        let inner = self.sampler.clone();
        let sampler: Sampler = Arc::new(move |x, side| alpha * inner(x, side));
        let mut out = self.map(
            self.start,
            self.end,
            alpha * self.lower_bound,
            sampler,
            self.breakpoints.to_vec(),
        );
        out.constant = self.constant.map(|c| alpha * c);
        out
    }

    /// `κ + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.sampler.clone();
        let sampler: Sampler = Arc::new(move |x, side| inner(x, side) + c);
        let mut out = self.map(
            self.start,
            self.end,
            self.lower_bound + c,
            sampler,
            self.breakpoints.to_vec(),
        );
        out.constant = self.constant.map(|k| k + c);
        out
    }

    /// `wa·a + wb·b` on the common domain of `a`, with `wa, wb ≥ 0`.
    pub fn combine(wa: f64, a: &CurvatureField, wb: f64, b: &CurvatureField) -> Self {
        assert!(wa >= 0.0 && wb >= 0.0, "combination weights must be non-negative");
        let (sa, sb) = (a.sampler.clone(), b.sampler.clone());
        let sampler: Sampler = Arc::new(move |x, side| wa * sa(x, side) + wb * sb(x, side));
        let mut bps = a.breakpoints.to_vec();
        bps.extend(b.breakpoints.iter().copied());
        let mut out = a.map(
            a.start,
            a.end,
            wa * a.lower_bound + wb * b.lower_bound,
            sampler,
            bps,
        );
        if let (Some(x), Some(y)) = (a.constant, b.constant) {
            out.constant = Some(wa * x + wb * y);
        }
        out
    }

    /// The field `τ ↦ θ²κ(start + θτ)` on `[0, 1]`, where `θ` is the domain length.
    pub fn rescaled(&self) -> Self {
        let theta = self.length();
        let t2 = theta * theta;
        let inner = self.sampler.clone();
        let a = self.start;
        let pairs: Vec<(f64, f64)> = if theta > 0.0 {
            self.breakpoints.iter().map(|&p| ((p - a) / theta, p)).collect()
        } else {
            Vec::new()
        };
        let bps = pairs.iter().map(|p| p.0).collect();
        let sampler: Sampler = Arc::new(move |x, side| {
            let y = snap(&pairs, x).unwrap_or(a + theta * x);
            t2 * inner(y, side)
        });
        let mut out = self.map(0.0, 1.0, t2 * self.lower_bound, sampler, bps);
        out.constant = self.constant.map(|c| t2 * c);
        out
    }

    /// Points where the lower envelope in [`lsc_approx`](Self::lsc_approx) is taken:
    /// the breakpoints plus a uniform grid.
    fn envelope_points(&self) -> Vec<(f64, f64)> {
        const GRID: usize = 4096;
        let mut pts: Vec<(f64, f64)> = (0..=GRID)
            .map(|i| {
                let x = self.start + self.length() * i as f64 / GRID as f64;
                (x, self.eval(x))
            })
            .collect();
        pts.extend(self.breakpoints.iter().map(|&p| (p, self.eval(p))));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }

    /// The Lipschitz approximant `κₙ(x) = min[min_y {κ(y) + n|x − y|}, n]`.
    ///
    /// The inner minimum runs over the breakpoints, a uniform grid and `y = x`
    /// itself, which is exact for piecewise-constant fields. Approximants built
    /// this way are non-decreasing in `n` and bounded by the field.
    pub fn lsc_approx(&self, n: u32) -> Self {
        assert!(n >= 1, "approximant index must be positive");
        let nf = n as f64;
        let pts = self.envelope_points();
        let ys: Vec<f64> = pts.iter().map(|p| p.0).collect();
        // Indices of the minimizers of k − n·y over prefixes and of k + n·y over
        // suffixes; the envelope is then evaluated as k + n|x − y| directly.
        let mut prefix = Vec::with_capacity(pts.len());
        let mut best = 0;
        for (i, &(y, k)) in pts.iter().enumerate() {
            if k - nf * y < pts[best].1 - nf * pts[best].0 {
                best = i;
            }
            prefix.push(best);
        }
        let mut suffix = vec![0; pts.len()];
        let mut best = pts.len().saturating_sub(1);
        for (i, &(y, k)) in pts.iter().enumerate().rev() {
            if k + nf * y <= pts[best].1 + nf * pts[best].0 {
                best = i;
            }
            suffix[i] = best;
        }
        let pts = Arc::new(pts);
        let prefix = Arc::new(prefix);
        let suffix = Arc::new(suffix);
        let base = self.sampler.clone();
        let sampler: Sampler = Arc::new(move |x, _| {
            let idx = ys.partition_point(|&y| y <= x);
            let mut v = base(x, Side::At).min(nf);
            if idx > 0 {
                let (y, k) = pts[prefix[idx - 1]];
                v = v.min(k + nf * (x - y));
            }
            if idx < suffix.len() {
                let (y, k) = pts[suffix[idx]];
                v = v.min(k + nf * (y - x));
            }
            v
        });
        let mut out = self.map(
            self.start,
            self.end,
            self.lower_bound.min(nf),
            sampler,
            Vec::new(),
        );
        out.constant = self.constant.map(|c| c.min(nf));
        out
    }

    /// Lower semi-continuous values on a uniform grid of `points` points.
    pub fn sample(&self, points: usize) -> Vec<(f64, f64)> {
        let m = points.max(2) - 1;
        (0..=m)
            .map(|i| {
                let x = self.start + self.length() * i as f64 / m as f64;
                (x, self.eval(x))
            })
            .collect()
    }
}

/// Maps a transformed coordinate that lands on a transformed breakpoint (up to
/// rounding) back to the exact original breakpoint.
fn snap(pairs: &[(f64, f64)], x: f64) -> Option<f64> {
    pairs
        .iter()
        .find(|&&(new, _)| (x - new).abs() <= 8.0 * f64::EPSILON * (1.0 + new.abs()))
        .map(|&(_, old)| old)
}

/// Curvature seen along a constant-speed geodesic of length `θ`, in both
/// orientations (unit-speed parametrization on `[0, θ]`).
#[derive(Clone, Debug)]
pub struct GeodesicCurvature {
    pub length: f64,
    pub forward: CurvatureField,
    pub reversed: CurvatureField,
}

impl GeodesicCurvature {
    pub fn new(forward: CurvatureField) -> Self {
        let reversed = forward.reversed();
        GeodesicCurvature {
            length: forward.length(),
            forward,
            reversed,
        }
    }

    pub fn constant(c: f64, length: f64) -> Self {
        Self::new(CurvatureField::constant(c, 0.0, length))
    }

    /// Curvature along the same segment traversed backwards.
    pub fn flipped(&self) -> Self {
        GeodesicCurvature {
            length: self.length,
            forward: self.reversed.clone(),
            reversed: self.forward.clone(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        GeodesicCurvature {
            length: self.length,
            forward: self.forward.scaled(alpha),
            reversed: self.reversed.scaled(alpha),
        }
    }
}

/// Restricts `field` to the segment from `x0` to `x1`.
///
/// A degenerate segment yields an empty-domain restriction whose distortion
/// coefficients are `σ^(t)(0) = t`.
pub fn restrict_to_geodesic(field: &CurvatureField, x0: f64, x1: f64) -> Result<GeodesicCurvature> {
    let slack = 1e-12 * (1.0 + field.start.abs().max(field.end.abs()));
    let (lo, hi) = (x0.min(x1), x0.max(x1));
    if !(lo >= field.start - slack && hi <= field.end + slack) {
        return Err(Error::domain(format!(
            "segment [{lo}, {hi}] leaves the field domain [{}, {}]",
            field.start, field.end
        )));
    }
    Ok(GeodesicCurvature::new(field.restrict(x0, x1)))
}

/// Plan-averaged curvature `t ↦ ∫ κ(e_t(γ)) |γ̇|² dΠ(γ)` for a plan supported on
/// straight particle paths, each moving from `x0` to `x1` with mass `w`.
#[derive(Clone, Debug)]
pub struct PlanCurvature {
    theta: f64,
    field: CurvatureField,
    particles: Arc<Vec<(f64, f64, f64)>>,
}

impl PlanCurvature {
    /// Masses are normalized to sum to one.
    pub fn from_particles(field: &CurvatureField, particles: Vec<(f64, f64, f64)>) -> Result<Self> {
        let total: f64 = particles.iter().map(|p| p.2).sum();
        if !(total > 0.0) || particles.iter().any(|p| p.2 < 0.0) {
            return Err(Error::precondition("plan masses must be non-negative with positive total"));
        }
        let slack = 1e-9 * (1.0 + field.length());
        for &(a, b, _) in &particles {
            if a.min(b) < field.start - slack || a.max(b) > field.end + slack {
                return Err(Error::domain("plan support leaves the field domain"));
            }
        }
        let particles: Vec<(f64, f64, f64)> =
            particles.into_iter().map(|(a, b, w)| (a, b, w / total)).collect();
        let theta = particles
            .iter()
            .map(|&(a, b, w)| w * (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        Ok(PlanCurvature {
            theta,
            field: field.clone(),
            particles: Arc::new(particles),
        })
    }

    /// Monotone plan between two equal-length quantile vectors with equal masses.
    pub fn from_quantiles(field: &CurvatureField, q0: &[f64], q1: &[f64]) -> Result<Self> {
        if q0.len() != q1.len() || q0.is_empty() {
            return Err(Error::precondition("quantile vectors must have equal positive length"));
        }
        let w = 1.0 / q0.len() as f64;
        Self::from_particles(field, q0.iter().zip(q1).map(|(&a, &b)| (a, b, w)).collect())
    }

    /// Mixture `(1 − λ)·self + λ·other` of two plans on the same field.
    pub fn mixture(&self, other: &PlanCurvature, lambda: f64) -> Result<Self> {
        let mut parts: Vec<(f64, f64, f64)> =
            self.particles.iter().map(|&(a, b, w)| (a, b, (1.0 - lambda) * w)).collect();
        parts.extend(other.particles.iter().map(|&(a, b, w)| (a, b, lambda * w)));
        Self::from_particles(&self.field, parts)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn profile(&self, t: f64) -> f64 {
        match self.field.constant_value() {
            Some(c) => c * self.theta * self.theta,
            None => profile_at(&self.field, &self.particles, t),
        }
    }

    /// `τ ↦ profile(τ) = θ²κ_Π(τθ)` as a field on `[0, 1]`, i.e. the rescaled
    /// plan curvature whose distortion coefficients are taken at `θ = 1`.
    pub fn as_field(&self) -> CurvatureField {
        let field = self.field.clone();
        let parts = self.particles.clone();
        let lb = self.field.lower_bound() * self.theta * self.theta;
        if let Some(c) = self.field.constant_value() {
            return CurvatureField::constant(c * self.theta * self.theta, 0.0, 1.0);
        }
        CurvatureField::from_fn(0.0, 1.0, lb, move |t| profile_at(&field, &parts, t))
    }

    /// The reversed profile `τ ↦ profile(1 − τ)`.
    pub fn as_reversed_field(&self) -> CurvatureField {
        self.as_field().reversed()
    }
}

fn profile_at(field: &CurvatureField, parts: &[(f64, f64, f64)], t: f64) -> f64 {
    parts
        .iter()
        .map(|&(a, b, w)| {
            let d = b - a;
            if d == 0.0 {
                0.0
            } else {
                w * field.eval((1.0 - t) * a + t * b) * d * d
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_step() -> CurvatureField {
        CurvatureField::steps(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn steps_are_lower_semicontinuous() {
        let k = half_step();
        assert_eq!(k.eval(0.5), 0.0);
        assert_eq!(k.eval_side(0.5, Side::Right), 1.0);
        assert_eq!(k.eval_side(0.5, Side::Left), 0.0);
        assert_eq!(k.eval(0.75), 1.0);
        assert_eq!(k.eval(1.0), 1.0);
        let down = CurvatureField::steps(vec![0.0, 0.5, 1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(down.eval(0.5), 1.0);
    }

    #[test]
    fn table_last_row_only_touches_endpoint() {
        let k = CurvatureField::from_table(&[0.0, 1.0, 2.0], &[3.0, 4.0, -1.0]).unwrap();
        assert_eq!(k.eval(0.5), 3.0);
        assert_eq!(k.eval(1.0), 3.0);
        assert_eq!(k.eval(1.5), 4.0);
        assert_eq!(k.eval(2.0), -1.0);
        assert_eq!(k.lower_bound(), -1.0);
    }

    #[test]
    fn approximant_trivial_cases() {
        let zero = CurvatureField::constant(0.0, 0.0, 1.0).lsc_approx(5);
        let seven = CurvatureField::constant(7.0, 0.0, 1.0).lsc_approx(5);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert_eq!(zero.eval(x), 0.0);
            assert_eq!(seven.eval(x), 5.0);
        }
    }

    #[test]
    fn approximant_of_step_matches_brute_force() {
        let k = half_step();
        let k2 = k.lsc_approx(2);
        let ygrid: Vec<f64> = (0..=20000).map(|i| i as f64 / 20000.0).collect();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let brute = ygrid
                .iter()
                .map(|&y| k.eval(y) + 2.0 * (x - y).abs())
                .fold(f64::INFINITY, f64::min)
                .min(2.0);
            let ramp = (2.0 * (x - 0.5)).max(0.0).min(1.0);
            assert!((k2.eval(x) - brute).abs() < 1e-12, "x={x}");
            assert!((k2.eval(x) - ramp).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn restriction_is_affine() {
        let k = CurvatureField::from_fn(0.0, 1.0, 0.0, |x| x);
        let g = restrict_to_geodesic(&k, 0.2, 0.6).unwrap();
        assert!((g.length - 0.4).abs() < 1e-15);
        for i in 0..=10 {
            let s = 0.04 * i as f64;
            assert!((g.forward.eval(s) - (0.2 + s)).abs() < 1e-14);
            assert!((g.reversed.eval(s) - (0.6 - s)).abs() < 1e-14);
        }
        assert!(restrict_to_geodesic(&k, 0.5, 1.5).is_err());
    }

    #[test]
    fn reversed_step_is_mirrored() {
        let k = CurvatureField::steps(vec![0.0, 0.3, 1.0], vec![0.0, 2.0]).unwrap();
        let g = restrict_to_geodesic(&k, 0.0, 1.0).unwrap();
        assert_eq!(g.reversed.breakpoints(), &[0.7]);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert_eq!(g.reversed.eval(x), g.forward.eval(1.0 - x));
        }
        assert_eq!(g.reversed.eval_side(0.7, Side::Left), 2.0);
        assert_eq!(g.reversed.eval_side(0.7, Side::Right), 0.0);
    }

    #[test]
    fn backwards_restriction_swaps_sides() {
        let k = half_step();
        let g = k.restrict(1.0, 0.0);
        assert_eq!(g.breakpoints(), &[0.5]);
        assert_eq!(g.eval_side(0.5, Side::Left), 1.0);
        assert_eq!(g.eval_side(0.5, Side::Right), 0.0);
        assert_eq!(g.eval(0.25), 1.0);
    }

    #[test]
    fn rescaled_field() {
        let k = CurvatureField::from_fn(0.0, 2.0, 0.0, |x| x);
        let r = k.rescaled();
        assert!((r.eval(0.5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn plan_profiles() {
        let c = CurvatureField::constant(2.0, 0.0, 3.0);
        let p = PlanCurvature::from_quantiles(&c, &[0.0, 1.0], &[1.0, 3.0]).unwrap();
        let theta2 = 0.5 * (1.0 + 4.0);
        assert!((p.theta() * p.theta() - theta2).abs() < 1e-14);
        assert!((p.profile(0.3) - 2.0 * theta2).abs() < 1e-14);

        let id = CurvatureField::from_fn(0.0, 1.0, 0.0, |x| x);
        let dirac = PlanCurvature::from_quantiles(&id, &[0.0], &[1.0]).unwrap();
        for t in [0.0, 0.25, 0.8, 1.0] {
            assert!((dirac.profile(t) - t).abs() < 1e-15);
        }

        let still = PlanCurvature::from_quantiles(&id, &[0.2, 0.4], &[0.2, 0.4]).unwrap();
        assert_eq!(still.theta(), 0.0);
        assert_eq!(still.profile(0.5), 0.0);
    }
}
