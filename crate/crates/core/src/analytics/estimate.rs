//! Characteristic time, hit-ratio approximations and the exact expectation
//! of the miss count over the Gamma-distributed exit time.

use std::io::Write;

use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

use crate::error::{invalid, Result};
use crate::numerics::{expand_bracket, integrate_fallible, solve_increasing, Integral, QuadratureConfig, RootOptions};
use crate::traffic::trace::format_decimal;

use super::MissFunction;

fn root_options(theta: f64, q: &QuadratureConfig) -> RootOptions {
    // M is only known to its quadrature tolerance, so a residual below that
    // cannot be certified.
    RootOptions {
        f_tol: q.abs_tol.max(0.1 * q.rel_tol * theta),
        ..RootOptions::default()
    }
}

/// `t_θ = M^{-1}(θ)`.
pub fn char_time<M: MissFunction + ?Sized>(theta: f64, model: &M, q: &QuadratureConfig) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(invalid("theta", format!("must be finite and > 0, got {theta}")));
    }
    let opts = root_options(theta, q);
    let mut f = |t: f64| Ok(model.big_m(t, q)? - theta);
    // M(t) <= m(0) t, so θ / m(0) is a lower bound for the root.
    let start = theta / model.mean_requests();
    let (lo, hi) = expand_bracket(&mut f, 0.0, start, &opts)?;
    solve_increasing(&mut f, lo, hi, &opts)
}

/// `e(t_θ) = θ² / (2 m²) (m'' - m'² / m)` at `t = t_θ`.
pub fn first_order_term<M: MissFunction + ?Sized>(
    t_theta: f64,
    theta: f64,
    model: &M,
    q: &QuadratureConfig,
) -> Result<f64> {
    let m = model.m(t_theta, q)?;
    let m1 = model.m_prime(t_theta, q)?;
    let m2 = model.m_double_prime(t_theta, q)?;
    Ok(theta * theta / (2.0 * m * m) * (m2 - m1 * m1 / m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRatioEstimates {
    pub char_time: f64,
    pub m_char: f64,
    pub e_term: f64,
    pub zero_order: f64,
    pub first_order: f64,
    /// The raw value fell outside `[0, 1]` and was clamped.
    pub zero_clamped: bool,
    pub first_clamped: bool,
}

fn clamp_ratio(x: f64) -> (f64, bool) {
    if x < 0.0 {
        (0.0, true)
    } else if x > 1.0 {
        (1.0, true)
    } else {
        (x, false)
    }
}

/// Zero- and first-order hit-ratio approximations for capacity `c` at
/// `θ = c / γ`.
pub fn hit_ratio_estimates<M: MissFunction + ?Sized>(
    theta: f64,
    capacity: f64,
    model: &M,
    q: &QuadratureConfig,
) -> Result<HitRatioEstimates> {
    if !(capacity >= 1.0) {
        return Err(invalid("capacity", format!("must be >= 1, got {capacity}")));
    }
    let t = char_time(theta, model, q)?;
    let m = model.m(t, q)?;
    let e = first_order_term(t, theta, model, q)?;
    let mean = model.mean_requests();
    let (zero_order, zero_clamped) = clamp_ratio(1.0 - m / mean);
    let (first_order, first_clamped) = clamp_ratio(1.0 - (m + e / capacity) / mean);
    if zero_clamped || first_clamped {
        log::warn!("hit ratio clamped to [0, 1] at theta={theta}, C={capacity}");
    }
    Ok(HitRatioEstimates {
        char_time: t,
        m_char: m,
        e_term: e,
        zero_order,
        first_order,
        zero_clamped,
        first_clamped,
    })
}

/// `E[m(M^{-1}(G / γ))]` with `G ~ Gamma(C, 1)`: the expected misses per
/// document under the Gamma exit-time law, integrated between the
/// `ε` and `1 - ε` quantiles of `G`; the dropped mass times `m(0)` joins the
/// error.
pub fn expected_misses_exact<M: MissFunction + ?Sized>(
    capacity: f64,
    gamma: f64,
    model: &M,
    q: &QuadratureConfig,
) -> Result<Integral> {
    if !(capacity >= 1.0) || !capacity.is_finite() {
        return Err(invalid("capacity", format!("must be finite and >= 1, got {capacity}")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    let law = Gamma::new(capacity, 1.0).map_err(|e| invalid("capacity", e.to_string()))?;
    let eps = q.tail_mass_cut;
    let lo = law.inverse_cdf(eps);
    let hi = law.inverse_cdf(1.0 - eps);
    let inner = q.nested();
    // Solved (θ, t_θ) pairs, kept sorted, used to bracket later solves.
    let mut solved: Vec<(f64, f64)> = Vec::new();
    let m0 = model.mean_requests();
    let mut integrand = |x: f64| -> Result<f64> {
        let theta = x / gamma;
        let t = inverse_big_m(theta, model, &inner, &mut solved, m0)?;
        Ok(model.m(t, &inner)? * law.pdf(x))
    };
    let body = integrate_fallible(&mut integrand, lo, hi, q)?;
    Ok(body
        + Integral {
            value: 0.0,
            abs_error: 2.0 * eps * m0,
        })
}

fn inverse_big_m<M: MissFunction + ?Sized>(
    theta: f64,
    model: &M,
    q: &QuadratureConfig,
    solved: &mut Vec<(f64, f64)>,
    m0: f64,
) -> Result<f64> {
    let opts = root_options(theta, q);
    let mut f = |t: f64| Ok(model.big_m(t, q)? - theta);
    let pos = solved.partition_point(|&(th, _)| th < theta);
    let below = if pos > 0 { Some(solved[pos - 1].1) } else { None };
    let above = solved.get(pos).map(|&(_, t)| t);
    let (lo, hi) = match (below, above) {
        (Some(lo), Some(hi)) if lo < hi => (lo, hi),
        (Some(lo), _) => expand_bracket(&mut f, lo, lo.max(theta / m0), &opts)?,
        _ => expand_bracket(&mut f, 0.0, theta / m0, &opts)?,
    };
    let t = solve_increasing(&mut f, lo, hi, &opts)?;
    solved.insert(pos, (theta, t));
    Ok(t)
}

/// All analytic quantities for one `(γ, C)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub gamma: f64,
    pub capacity: f64,
    pub theta: f64,
    pub ratios: HitRatioEstimates,
    /// Hit ratio from [`expected_misses_exact`], when computed.
    pub exact_hit: Option<f64>,
}

impl Estimate {
    pub fn compute<M: MissFunction + ?Sized>(
        gamma: f64,
        capacity: f64,
        model: &M,
        q: &QuadratureConfig,
        with_exact: bool,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
        }
        let theta = capacity / gamma;
        let ratios = hit_ratio_estimates(theta, capacity, model, q)?;
        let exact_hit = if with_exact {
            let e = expected_misses_exact(capacity, gamma, model, q)?;
            Some(1.0 - e.value / model.mean_requests())
        } else {
            None
        };
        Ok(Self {
            gamma,
            capacity,
            theta,
            ratios,
            exact_hit,
        })
    }
}

/// CSV with header
/// `gamma,C,theta,char_time,m_char,e_term,zero_order_hit,first_order_hit,exact_hit`;
/// a missing exact value is written as an empty field.
pub fn write_estimates_csv<W: Write>(writer: W, rows: &[Estimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "gamma",
        "C",
        "theta",
        "char_time",
        "m_char",
        "e_term",
        "zero_order_hit",
        "first_order_hit",
        "exact_hit",
    ])?;
    for r in rows {
        w.write_record([
            format_decimal(r.gamma),
            format_decimal(r.capacity),
            format_decimal(r.theta),
            format_decimal(r.ratios.char_time),
            format_decimal(r.ratios.m_char),
            format_decimal(r.ratios.e_term),
            format_decimal(r.ratios.zero_order),
            format_decimal(r.ratios.first_order),
            r.exact_hit.map(format_decimal).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
