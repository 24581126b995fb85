//! Miss function for intensities `ρ f(u / L)` with a tabulated shape `f`.
//!
//! For fixed marks, `m` and its derivatives are one-dimensional integrals
//! over the shape variable; random marks add one quadrature level each.
//! `M` is the quadrature of `m`, so random marks make it expensive.

use crate::error::{invalid, Result};
use crate::numerics::{integrate_fallible, Integral, QuadratureConfig};
use crate::traffic::{MarkLaw, ShapeFunction};

use super::marks::expect;
use super::MissFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFamilySpec {
    pub rho_law: MarkLaw,
    pub lifespan_law: MarkLaw,
    pub shape: ShapeFunction,
}

#[derive(Clone, Copy)]
enum Order {
    Value,
    First,
    Second,
}

impl ScaleFamilySpec {
    pub fn new(rho_law: MarkLaw, lifespan_law: MarkLaw, shape: ShapeFunction) -> Self {
        Self {
            rho_law,
            lifespan_law,
            shape,
        }
    }

    /// Integrates `g` over `[0, end]`, splitting at the given kinks.
    fn pieces<G>(&self, mut g: G, kinks: &mut Vec<f64>, end: f64, q: &QuadratureConfig) -> Result<Integral>
    where
        G: FnMut(f64) -> f64,
    {
        kinks.retain(|&k| k > 0.0 && k < end);
        kinks.push(0.0);
        kinks.push(end);
        kinks.sort_by(|a, b| a.total_cmp(b));
        kinks.dedup();
        let mut total = Integral::ZERO;
        for w in kinks.windows(2) {
            total = total + crate::numerics::integrate(&mut g, w[0], w[1], q)?;
        }
        Ok(total)
    }

    /// `m`, `m'` or `m''` at time `t` for fixed marks.
    fn pointwise(&self, order: Order, rho: f64, lifespan: f64, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        let a = rho * lifespan;
        if a == 0.0 {
            return Ok(Integral::ZERO);
        }
        let tau = t / lifespan;
        let f = &self.shape;
        // Every integrand is bounded by a multiple of a f(v), so the mass
        // beyond `end` bounds the truncation.
        let scale = match order {
            Order::Value => a,
            Order::First => rho * a * f.peak(),
            Order::Second => rho * rho * (a * f.peak() * f.peak() + max_abs_slope(f)),
        };
        let cut = (0.1 * q.abs_tol / scale).min(0.5);
        let end = f.upper_tail_point(cut);
        let dropped = scale * f.upper_mass(end);
        let mut kinks: Vec<f64> = f.nodes().to_vec();
        kinks.extend(f.nodes().iter().map(|n| n - tau));
        let kernel = |v: f64| (-a * (f.upper_mass(v) - f.upper_mass(v + tau))).exp();
        let r = match order {
            Order::Value => self.pieces(|v| a * f.value(v) * kernel(v), &mut kinks, end, q)?,
            Order::First => self.pieces(
                |v| -rho * a * f.value(v) * f.value(v + tau) * kernel(v),
                &mut kinks,
                end,
                q,
            )?,
            Order::Second => self.pieces(
                |v| {
                    let fv = f.value(v);
                    let ft = f.value(v + tau);
                    rho * rho * fv * (a * ft * ft - f.derivative(v + tau)) * kernel(v)
                },
                &mut kinks,
                end,
                q,
            )?,
        };
        Ok(r + Integral {
            value: 0.0,
            abs_error: dropped,
        })
    }

    fn over_marks<G>(&self, mut g: G, q: &QuadratureConfig) -> Result<Integral>
    where
        G: FnMut(f64, f64, &QuadratureConfig) -> Result<f64>,
    {
        let inner = q.nested();
        let innermost = inner.nested();
        expect(
            &self.lifespan_law,
            |l| {
                let v = expect(&self.rho_law, |r| g(r, l, &innermost), |_| f64::INFINITY, &inner)?;
                Ok(v.value)
            },
            |_| f64::INFINITY,
            q,
        )
    }

    pub fn m_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        check_time(t, false)?;
        if t == 0.0 {
            return Ok(Integral::exact(self.mean_requests()));
        }
        self.over_marks(|r, l, qq| Ok(self.pointwise(Order::Value, r, l, t, qq)?.value), q)
    }

    pub fn m_prime_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        check_time(t, true)?;
        self.over_marks(|r, l, qq| Ok(self.pointwise(Order::First, r, l, t, qq)?.value), q)
    }

    pub fn m_double_prime_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        check_time(t, true)?;
        self.over_marks(|r, l, qq| Ok(self.pointwise(Order::Second, r, l, t, qq)?.value), q)
    }

    pub fn big_m_integral(&self, t: f64, q: &QuadratureConfig) -> Result<Integral> {
        check_time(t, false)?;
        if t == 0.0 {
            return Ok(Integral::ZERO);
        }
        let inner = q.nested();
        integrate_fallible(|s| Ok(self.m_integral(s, &inner)?.value), 0.0, t, q)
    }

    pub fn mu0_integral(&self, q: &QuadratureConfig) -> Result<Integral> {
        self.over_marks(|r, l, _| Ok(-(-r * l).exp_m1()), q)
    }
}

fn max_abs_slope(f: &ShapeFunction) -> f64 {
    let nodes = f.nodes();
    let mut best = f.derivative(nodes[nodes.len() - 1]).abs();
    for &n in &nodes[..nodes.len() - 1] {
        best = best.max(f.derivative(n).abs());
    }
    best
}

fn check_time(t: f64, strict: bool) -> Result<()> {
    let ok = t.is_finite() && if strict { t > 0.0 } else { t >= 0.0 };
    if !ok {
        return Err(invalid("t", format!("out of range: {t}")));
    }
    Ok(())
}

impl MissFunction for ScaleFamilySpec {
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
