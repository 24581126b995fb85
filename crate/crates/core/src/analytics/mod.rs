//! Analytic miss function `m(t)`, its integral `M(t)`, characteristic times
//! and the hit-ratio approximations built on them.

pub mod box_model;
pub mod estimate;
pub mod gamma;
pub mod marks;
pub mod scale_family;

use crate::error::Result;
use crate::numerics::QuadratureConfig;
use crate::traffic::{CanonicalIntensity, Shape};

pub use box_model::{big_m_box_pointwise, m_box_pointwise, BoxModelSpec};
pub use estimate::{
    char_time, expected_misses_exact, first_order_term, hit_ratio_estimates, write_estimates_csv, Estimate,
    HitRatioEstimates,
};
pub use gamma::{central_moment_polynomial, gamma_central_moment, gamma_tail_bound};
pub use scale_family::ScaleFamilySpec;

/// Expected number of misses per document, as a function of the TTL `t`.
pub trait MissFunction: Sync {
    /// `m(t)` for `t >= 0`.
    fn m(&self, t: f64, q: &QuadratureConfig) -> Result<f64>;
    /// `m'(t)` for `t > 0`.
    fn m_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64>;
    /// `m''(t)` for `t > 0`.
    fn m_double_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64>;
    /// `M(t) = ∫_0^t m`.
    fn big_m(&self, t: f64, q: &QuadratureConfig) -> Result<f64>;
    /// `E[Λ̂] = m(0)`.
    fn mean_requests(&self) -> f64;
    /// `μ_0 = lim m(t) = E[1 - e^{-Λ̂}]`.
    fn mu0(&self, q: &QuadratureConfig) -> Result<f64>;
}

/// Analytic counterpart of a [`CanonicalIntensity`].
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticModel {
    Box(BoxModelSpec),
    ScaleFamily(ScaleFamilySpec),
}

impl AnalyticModel {
    pub fn from_intensity(model: &CanonicalIntensity) -> Self {
        match &model.shape {
            Shape::Box => Self::Box(BoxModelSpec::new(model.rho_law, model.lifespan_law)),
            Shape::ScaleFamily(f) => {
                Self::ScaleFamily(ScaleFamilySpec::new(model.rho_law, model.lifespan_law, f.clone()))
            }
        }
    }

    fn inner(&self) -> &dyn MissFunction {
        match self {
            Self::Box(b) => b,
            Self::ScaleFamily(s) => s,
        }
    }
}

impl From<&CanonicalIntensity> for AnalyticModel {
    fn from(model: &CanonicalIntensity) -> Self {
        Self::from_intensity(model)
    }
}

impl MissFunction for AnalyticModel {
    fn m(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.inner().m(t, q)
    }

    fn m_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.inner().m_prime(t, q)
    }

    fn m_double_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.inner().m_double_prime(t, q)
    }

    fn big_m(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        self.inner().big_m(t, q)
    }

    fn mean_requests(&self) -> f64 {
        self.inner().mean_requests()
    }

    fn mu0(&self, q: &QuadratureConfig) -> Result<f64> {
        self.inner().mu0(q)
    }
}
