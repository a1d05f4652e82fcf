//! Variable-curvature distortion coefficients and the convexity, gradient-flow
//! and curvature-dimension checks built on them, for one-dimensional model
//! spaces.
//!
//! A curvature bound is a lower semi-continuous function `κ` on an interval
//! ([`curvature::CurvatureField`]). Its generalized sine solves
//! `v'' + κv = 0` ([`ode`]), and the ratio `s_κ(tθ)/s_κ(θ)` is the distortion
//! coefficient `σ_κ^(t)(θ)` ([`distortion`]). These coefficients drive the
//! concavity certificates of [`convexity`], the EVI and contraction diagnostics
//! of [`evi`], and the entropic curvature-dimension checks on weighted
//! intervals of [`wasserstein`].

pub mod convexity;
pub mod curvature;
pub mod distortion;
pub mod error;
pub mod evi;
pub mod function;
pub mod ode;
pub mod quadrature;
pub mod table;
pub mod wasserstein;

pub use curvature::{CurvatureField, GeodesicCurvature, PlanCurvature, Side};
pub use distortion::{DistortionProfile, Extended};
pub use error::{Error, Result};
pub use function::{Interpolation, RealFunction};
pub use ode::GeneralizedSine;
