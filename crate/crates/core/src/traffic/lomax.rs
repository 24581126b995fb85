use rand::Rng;

use crate::error::{invalid, Result};

/// Pareto–Lomax law with density `α σ^α / (σ + x)^{α+1}` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LomaxParams {
    alpha: f64,
    sigma: f64,
}

impl LomaxParams {
    /// Requires `alpha > 1` (finite mean) and `sigma > 0`.
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(invalid(
                "alpha",
                format!("tail index must be finite and > 1, got {alpha}"),
            ));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("scale must be finite and > 0, got {sigma}")));
        }
        Ok(Self { alpha, sigma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        self.sigma / (self.alpha - 1.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.alpha / self.sigma * (self.sigma / (self.sigma + x)).powf(self.alpha + 1.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// `P(X > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (self.sigma / (self.sigma + x)).powf(self.alpha)
        }
    }

    /// `E[(X - x)^+] = (σ + x) P(X > x) / (α - 1)`.
    pub fn excess_mean(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        (self.sigma + x) * self.survival(x) / (self.alpha - 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.inverse_cdf(p)
    }

    /// `σ((1 - u)^{-1/α} - 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        self.sigma * ((1.0 - u).powf(-1.0 / self.alpha) - 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_lomax(self, rng)
    }

    /// Draws from the length-biased law `x f(x) / E[X]` by rejection from a
    /// Lomax proposal with tail index `α - 1` (acceptance `1/α`).
    pub fn sample_length_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let proposal = LomaxProposal {
            alpha: self.alpha - 1.0,
            sigma: self.sigma,
        };
        loop {
            let x = proposal.sample(rng);
            let accept = x / (self.sigma + x);
            if rng.random::<f64>() < accept {
                return x;
            }
        }
    }
}

// Lomax without the finite-mean restriction, used as a rejection proposal.
struct LomaxProposal {
    alpha: f64,
    sigma: f64,
}

impl LomaxProposal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.sigma * ((1.0 - u).powf(-1.0 / self.alpha) - 1.0)
    }
}

/// Inverse-CDF Lomax variate: `σ((1 - U)^{-1/α} - 1)` with `U ~ U[0, 1)`.
pub fn sample_lomax<R: Rng + ?Sized>(params: &LomaxParams, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    params.inverse_cdf(u)
}
