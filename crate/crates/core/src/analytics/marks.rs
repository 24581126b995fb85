//! Expectations over a single mark law by deterministic quadrature.
//!
//! Lomax integrals are taken in `u = x / (σ + x)`, which maps `[0, ∞)` onto
//! `[0, 1)` with density `α (1 - u)^{α - 1}`. The range is split at the
//! `(1 - ε)`-quantile; the part beyond is dropped when `sup|g| · P(X > q)` is
//! provably below a tenth of `abs_tol` (the bound joins the error estimate)
//! and integrated otherwise.

use crate::error::Result;
use crate::numerics::{integrate_fallible, Integral, QuadratureConfig};
use crate::traffic::{LomaxParams, MarkLaw};

/// `E[g(X) 1{X <= upper}]`. `tail_sup(q)` must bound `|g|` on `[q, upper]`
/// (return `f64::INFINITY` when no bound is known).
pub fn expect_below<G, S>(law: &MarkLaw, upper: f64, mut g: G, tail_sup: S, q: &QuadratureConfig) -> Result<Integral>
where
    G: FnMut(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    match law {
        MarkLaw::Fixed(v) => {
            if *v <= upper {
                Ok(Integral::exact(g(*v)?))
            } else {
                Ok(Integral::ZERO)
            }
        }
        MarkLaw::Lomax(p) => lomax_expect_below(p, upper, g, tail_sup, q),
    }
}

/// `E[g(X)]`.
pub fn expect<G, S>(law: &MarkLaw, g: G, tail_sup: S, q: &QuadratureConfig) -> Result<Integral>
where
    G: FnMut(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    expect_below(law, f64::INFINITY, g, tail_sup, q)
}

fn lomax_expect_below<G, S>(
    p: &LomaxParams,
    upper: f64,
    mut g: G,
    tail_sup: S,
    q: &QuadratureConfig,
) -> Result<Integral>
where
    G: FnMut(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    if upper <= 0.0 {
        return Ok(Integral::ZERO);
    }
    let (alpha, sigma) = (p.alpha(), p.sigma());
    let u_upper = if upper.is_infinite() {
        1.0
    } else {
        upper / (sigma + upper)
    };
    let u_split = 1.0 - q.tail_mass_cut.powf(1.0 / alpha);
    let mut weighted = |u: f64| -> Result<f64> {
        let om = 1.0 - u;
        let x = sigma * u / om;
        let w = alpha * om.powf(alpha - 1.0);
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(g(x)? * w)
    };
    if u_upper <= u_split {
        return integrate_fallible(&mut weighted, 0.0, u_upper, q);
    }
    let body = integrate_fallible(&mut weighted, 0.0, u_split, q)?;
    let split_x = p.quantile(1.0 - q.tail_mass_cut);
    let mass = p.survival(split_x) - if upper.is_infinite() { 0.0 } else { p.survival(upper) };
    let bound = tail_sup(split_x) * mass;
    if bound.is_finite() && bound <= 0.1 * q.abs_tol {
        return Ok(body
            + Integral {
                value: 0.0,
                abs_error: bound,
            });
    }
    let tail = integrate_fallible(&mut weighted, u_split, u_upper, q)?;
    Ok(body + tail)
}

/// `sup_{x >= q} x^k e^{-s x}`.
pub fn power_exp_sup(k: i32, s: f64, q: f64) -> f64 {
    if k == 0 {
        return (-s * q).exp();
    }
    if s <= 0.0 {
        return f64::INFINITY;
    }
    let peak = f64::from(k) / s;
    let x = q.max(peak);
    x.powi(k) * (-s * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn lomax_moments() {
        let law = MarkLaw::lomax(1.7, 0.07).unwrap();
        let one = expect(&law, |_| Ok(1.0), |_| 1.0, &q()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let mean = expect(&law, Ok, |_| f64::INFINITY, &q()).unwrap();
        assert!((mean.value - 0.1).abs() < 1e-9, "{mean:?}");
    }

    #[test]
    fn partial_expectation_matches_cdf() {
        let p = LomaxParams::new(1.9, 22.5).unwrap();
        let law = MarkLaw::Lomax(p);
        for &t in &[0.1, 10.0, 1e4] {
            let r = expect_below(&law, t, |_| Ok(1.0), |_| 1.0, &q()).unwrap();
            assert!((r.value - p.cdf(t)).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn laplace_transform_matches_x_space_integral() {
        let p = LomaxParams::new(2.0, 1.0).unwrap();
        let law = MarkLaw::Lomax(p);
        let s = 0.7;
        let r = expect(&law, |x| Ok((-s * x).exp()), |qq| power_exp_sup(0, s, qq), &q()).unwrap();
        let direct = crate::numerics::integrate(|x| (-s * x).exp() * p.density(x), 0.0, 80.0, &q()).unwrap();
        assert!((r.value - direct.value).abs() < 1e-11);
    }

    #[test]
    fn fixed_law_is_pointwise() {
        let law = MarkLaw::Fixed(2.0);
        assert_eq!(expect(&law, |x| Ok(x * x), |_| 0.0, &q()).unwrap().value, 4.0);
        assert_eq!(expect_below(&law, 1.0, Ok, |_| 0.0, &q()).unwrap().value, 0.0);
        assert_eq!(expect_below(&law, 2.0, Ok, |_| 0.0, &q()).unwrap().value, 2.0);
    }

    #[test]
    fn sup_bounds() {
        assert_eq!(power_exp_sup(1, 0.0, 5.0), f64::INFINITY);
        let s = 2.0;
        // peak at 1/s = 0.5
        assert!((power_exp_sup(1, s, 0.1) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((power_exp_sup(1, s, 3.0) - 3.0 * (-6.0f64).exp()).abs() < 1e-15);
    }
}
