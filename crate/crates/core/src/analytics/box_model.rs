//! Miss function of the Box model with independent `ρ` and `L` marks.
//!
//! Conditioning on `L` and swapping the order of integration leaves one-dimensional
//! `ρ`-expectations of the form `E[ρ^k e^{-sρ}]`, `E[1 - e^{-sρ}]` and a few
//! companions, nested inside an integral over `L <= t`. Combinations that
//! cancel for small arguments go through series.

use crate::error::{invalid, Result};
use crate::numerics::{Integral, QuadratureConfig};
use crate::traffic::MarkLaw;

use super::marks::{expect, expect_below, power_exp_sup};
use super::MissFunction;

/// `1 - e^{-x}`.
fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `x - (1 - e^{-x})`.
pub(crate) fn j_term(x: f64) -> f64 {
    if x < 0.1 {
        // x^2/2 - x^3/6 + x^4/24 - ...
        let mut term = x * x / 2.0;
        let mut sum = 0.0;
        for n in 2..14 {
            sum += term;
            term *= -x / f64::from(n + 1);
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// `x - 2 (1 - e^{-x}) + x e^{-x}`, the inner `ρ`-antiderivative of the
/// straddling term.
pub(crate) fn h_term(x: f64) -> f64 {
    if x < 1.0 {
        // sum_{n >= 3} (-1)^n (2 - n) x^n / n!
        let mut pow_fact = x * x * x / 6.0;
        let mut sum = 0.0;
        for n in 3..30 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * f64::from(2 - n) * pow_fact;
            pow_fact *= x / f64::from(n + 1);
        }
        sum
    } else {
        x - 2.0 * one_minus_exp(x) + x * (-x).exp()
    }
}

/// `m(t)` for a single deterministic box of height `rho` and width `lifespan`.
pub fn m_box_pointwise(rho: f64, lifespan: f64, t: f64) -> f64 {
    if lifespan <= t {
        one_minus_exp(rho * lifespan)
    } else {
        one_minus_exp(rho * t) + rho * (lifespan - t) * (-rho * t).exp()
    }
}

/// `M(t) = ∫_0^t m` for a single deterministic box.
pub fn big_m_box_pointwise(rho: f64, lifespan: f64, t: f64) -> f64 {
    if t <= lifespan {
        h_term(rho * t) / rho + lifespan * one_minus_exp(rho * t)
    } else {
        2.0 / rho * j_term(rho * lifespan) + (t - lifespan) * one_minus_exp(rho * lifespan)
    }
}

/// Box model with independent marks.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxModelSpec {
    pub rho_law: MarkLaw,
    pub lifespan_law: MarkLaw,
}

impl BoxModelSpec {
    pub fn new(rho_law: MarkLaw, lifespan_law: MarkLaw) -> Self {
        Self { rho_law, lifespan_law }
    }

    /// `E[ρ^k e^{-sρ}]`.
    fn phi(&self, k: i32, s: f64, q: &QuadratureConfig) -> Result<Integral> {
        expect(
            &self.rho_law,
            |r| Ok(r.powi(k) * (-s * r).exp()),
            |x| power_exp_sup(k, s, x),
            q,
        )
    }

    /// `E[1 - e^{-sρ}]`.
    fn chi(&self, s: f64, q: &QuadratureConfig) -> Result<Integral> {
        expect(&self.rho_law, |r| Ok(one_minus_exp(s * r)), |_| 1.0, q)
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        Ok(())
    }

    pub fn m_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(Integral::exact(self.mean_requests()));
        }
        let inner = q.nested();
        let short = expect_below(&self.lifespan_law, t, |l| Ok(self.chi(l, &inner)?.value), |_| 1.0, q)?;
        let surv = self.lifespan_law.survival(t);
        let exc = self.lifespan_law.excess_mean(t);
        let mut total = short;
        if surv > 0.0 {
            total = total + self.chi(t, q)? * surv;
        }
        if exc > 0.0 {
            total = total + self.phi(1, t, q)? * exc;
        }
        Ok(total)
    }

    pub fn m_prime_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        Self::check_positive(t)?;
        let exc = self.lifespan_law.excess_mean(t);
        if exc == 0.0 {
            return Ok(Integral::ZERO);
        }
        Ok(self.phi(2, t, q)? * (-exc))
    }

    pub fn m_double_prime_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        Self::check_positive(t)?;
        let surv = self.lifespan_law.survival(t);
        let exc = self.lifespan_law.excess_mean(t);
        let mut total = Integral::ZERO;
        if surv > 0.0 {
            total = total + self.phi(2, t, q)? * surv;
        }
        if exc > 0.0 {
            total = total + self.phi(3, t, q)? * exc;
        }
        Ok(total)
    }

    pub fn big_m_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(Integral::ZERO);
        }
        let inner = q.nested();
        // Boxes shorter than t contribute their full closed-form M.
        let short = expect_below(
            &self.lifespan_law,
            t,
            |l| {
                let v = expect(
                    &self.rho_law,
                    |r| Ok(2.0 / r * j_term(r * l) + (t - l) * one_minus_exp(r * l)),
                    |_| 2.0 * t,
                    &inner,
                )?;
                Ok(v.value)
            },
            |_| 2.0 * t,
            q,
        )?;
        let surv = self.lifespan_law.survival(t);
        let exc = self.lifespan_law.excess_mean(t);
        let mut total = short;
        if surv > 0.0 {
            let h = expect(&self.rho_law, |r| Ok(h_term(r * t) / r), |_| t, q)?;
            total = total + h * surv;
        }
        let weight = exc + t * surv;
        if weight > 0.0 {
            total = total + self.chi(t, q)? * weight;
        }
        Ok(total)
    }

    pub fn mu0_integral(&self, q: &QuadratureConfig) -> Result<Integral> {
        let inner = q.nested();
        expect(&self.lifespan_law, |l| Ok(self.chi(l, &inner)?.value), |_| 1.0, q)
    }

    fn check_positive(t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid("t", format!("must be finite and > 0, got {t}")));
        }
        Ok(())
    }
}

impl MissFunction for BoxModelSpec {
    fn m(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        Ok(self.m_integral(t, q)?.value)
    }

    fn m_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        Ok(self.m_prime_integral(t, q)?.value)
    }

    fn m_double_prime(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        Ok(self.m_double_prime_integral(t, q)?.value)
    }

    fn big_m(&self, t: f64, q: &QuadratureConfig) -> Result<f64> {
        Ok(self.big_m_integral(t, q)?.value)
    }

    fn mean_requests(&self) -> f64 {
        self.rho_law.mean() * self.lifespan_law.mean()
    }

    fn mu0(&self, q: &QuadratureConfig) -> Result<f64> {
        Ok(self.mu0_integral(q)?.value)
    }
}
