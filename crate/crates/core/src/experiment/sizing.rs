//! Simulation length from the stable-law scaling of the request count.
//!
//! With a Lomax lifespan of tail index `α ∈ (1, 2)`, the fluctuation of the
//! number of observed documents over a window holding `n` of them scales like
//! `K_α / n^{1 - 1/α}`. The window is chosen so that this is below a
//! threshold, with `n = γ S μ_0`.

use statrs::function::gamma::gamma as gamma_fn;

use crate::analytics::{AnalyticModel, MissFunction};
use crate::error::{invalid, Result};
use crate::numerics::QuadratureConfig;
use crate::traffic::{CanonicalIntensity, MarkLaw, Shape};

/// `K_α = σ (Γ(2 - α) |cos(π α / 2)| / (α - 1))^{1/α}`.
pub fn k_alpha(alpha: f64, sigma: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid(
            "alpha",
            format!("lifespan tail index must lie in (1, 2), got {alpha}"),
        ));
    }
    let c = gamma_fn(2.0 - alpha) * (std::f64::consts::FRAC_PI_2 * alpha).cos().abs() / (alpha - 1.0);
    Ok(sigma * c.powf(1.0 / alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizing {
    /// Chosen duration.
    pub sim_time: f64,
    pub k_alpha: f64,
    /// Required document count `(K_α / threshold)^{α/(α-1)}`.
    pub documents: f64,
    /// Duration meeting the stable-law threshold alone.
    pub stable_time: f64,
    /// `10 ×` the `(1 - ε)`-quantile of the lifespan.
    pub coverage_time: f64,
    /// `true` when `cap` cut the result.
    pub capped: bool,
}

/// Smallest `S` with `K_α / (γ S μ_0)^{1 - 1/α} <= threshold` and
/// `S >= 10 q_L(1 - ε)`, then limited to `cap`.
pub fn size_simulation_time(
    model: &CanonicalIntensity,
    gamma: f64,
    threshold: f64,
    cap: f64,
    q: &QuadratureConfig,
) -> Result<Sizing> {
    if !matches!(model.shape, Shape::Box) {
        return Err(invalid("model", "automatic sizing needs the Box model"));
    }
    let p = match &model.lifespan_law {
        MarkLaw::Lomax(p) => *p,
        MarkLaw::Fixed(_) => return Err(invalid("lifespan", "automatic sizing needs a Lomax lifespan")),
    };
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    if !(threshold > 0.0) {
        return Err(invalid("threshold", "must be > 0"));
    }
    if !(cap > 0.0) {
        return Err(invalid("cap", "must be > 0"));
    }
    let alpha = p.alpha();
    let k = k_alpha(alpha, p.sigma())?;
    let documents = (k / threshold).powf(alpha / (alpha - 1.0));
    let mu0 = AnalyticModel::from_intensity(model).mu0(q)?;
    let stable_time = documents / (gamma * mu0);
    let coverage_time = 10.0 * p.quantile(1.0 - q.tail_mass_cut);
    let wanted = stable_time.max(coverage_time);
    Ok(Sizing {
        sim_time: wanted.min(cap),
        k_alpha: k,
        documents,
        stable_time,
        coverage_time,
        capped: wanted > cap,
    })
}
