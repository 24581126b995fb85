//! Concentration facts for `X ~ Gamma(C, 1) / C`.

use crate::error::{invalid, Result};

/// `2 exp(-C φ(1 + η))` with `φ(x) = x - 1 - ln x`, an upper bound on
/// `P(|X - 1| >= η)`.
pub fn gamma_tail_bound(capacity: f64, eta: f64) -> Result<f64> {
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(invalid("capacity", format!("must be finite and > 0, got {capacity}")));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid("eta", format!("must be finite and > 0, got {eta}")));
    }
    let phi = eta - eta.ln_1p();
    Ok(2.0 * (-capacity * phi).exp())
}

/// Integer coefficients `c_j` with `E[(G - C)^k] = Σ_j c_j C^j` for
/// `G ~ Gamma(C, 1)`, or `None` when they overflow `i128`.
pub fn central_moment_polynomial(k: usize) -> Option<Vec<i128>> {
    // Unsigned Stirling numbers of the first kind: (C)_i = Σ_j s[i][j] C^j.
    let mut stirling: Vec<Vec<i128>> = vec![vec![1]];
    for i in 0..k {
        let prev = &stirling[i];
        let mut next = vec![0i128; i + 2];
        for (j, &v) in prev.iter().enumerate() {
            next[j + 1] = next[j + 1].checked_add(v)?;
            next[j] = next[j].checked_add(v.checked_mul(i as i128)?)?;
        }
        stirling.push(next);
    }
    let mut coef = vec![0i128; k + 1];
    let mut binom: i128 = 1;
    for (i, row) in stirling.iter().enumerate() {
        // binom(k, i) (-C)^{k - i} (C)_i
        let sign: i128 = if (k - i).is_multiple_of(2) { 1 } else { -1 };
        for (j, &s) in row.iter().enumerate() {
            let term = binom.checked_mul(s)?.checked_mul(sign)?;
            coef[j + k - i] = coef[j + k - i].checked_add(term)?;
        }
        if i < k {
            binom = binom.checked_mul((k - i) as i128)? / (i as i128 + 1);
        }
    }
    Some(coef)
}

/// `E[(X - 1)^k]` for `X ~ Gamma(C, 1) / C`.
///
/// Uses the exact integer polynomial while it fits in `i128` and the
/// moment-cumulant recursion (all terms positive, so no cancellation)
/// beyond that.
pub fn gamma_central_moment(capacity: f64, k: usize) -> Result<f64> {
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(invalid("capacity", format!("must be finite and > 0, got {capacity}")));
    }
    if let Some(coef) = central_moment_polynomial(k) {
        let inv = 1.0 / capacity;
        let mut acc = 0.0;
        // Σ_j c_j C^{j - k} as a polynomial in 1/C; c_0 multiplies the
        // highest power.
        for &c in coef.iter() {
            acc = acc * inv + c as f64;
        }
        return Ok(acc);
    }
    Ok(cumulant_recursion(capacity, k))
}

/// Central moments from the cumulants `κ_n = (n - 1)! / C^{n-1}` of
/// `Gamma(C, 1) / C`.
pub(crate) fn cumulant_recursion(capacity: f64, k: usize) -> f64 {
    let mut kappa = vec![0.0; k + 1];
    let mut fact = 1.0;
    for (n, slot) in kappa.iter_mut().enumerate().skip(1) {
        if n > 1 {
            fact *= (n - 1) as f64;
        }
        *slot = fact / capacity.powi(n as i32 - 1);
    }
    let mut mu = vec![0.0; k + 1];
    mu[0] = 1.0;
    for n in 2..=k {
        let mut binom = 1.0;
        let mut s = 0.0;
        for j in 0..=n - 2 {
            s += binom * kappa[n - j] * mu[j];
            binom = binom * (n - 1 - j) as f64 / (j + 1) as f64;
        }
        mu[n] = s;
    }
    mu[k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

    #[test]
    fn tail_bound_values() {
        let b = gamma_tail_bound(100.0, 0.1).unwrap();
        assert!((b - 1.251_277_664_623_926).abs() < 1e-13);
        assert!(gamma_tail_bound(0.0, 0.1).is_err());
        assert!(gamma_tail_bound(10.0, -0.1).is_err());
    }

    #[test]
    fn tail_bound_dominates_exact_probability() {
        for &c in &[5.0, 50.0, 500.0] {
            for &eta in &[0.1, 0.3, 0.8] {
                let g = Gamma::new(c, c).unwrap();
                let p = g.cdf(1.0 - eta) + g.sf(1.0 + eta);
                assert!(p <= gamma_tail_bound(c, eta).unwrap(), "C={c} eta={eta}");
            }
        }
    }

    #[test]
    fn low_order_polynomials() {
        assert_eq!(central_moment_polynomial(0).unwrap(), vec![1]);
        assert_eq!(central_moment_polynomial(1).unwrap(), vec![0, 0]);
        assert_eq!(central_moment_polynomial(2).unwrap(), vec![0, 1, 0]);
        assert_eq!(central_moment_polynomial(3).unwrap(), vec![0, 2, 0, 0]);
        assert_eq!(central_moment_polynomial(4).unwrap(), vec![0, 6, 3, 0, 0]);
    }

    #[test]
    fn polynomial_degree_is_at_most_half_the_order() {
        for k in 2..=20 {
            let c = central_moment_polynomial(k).unwrap();
            for (j, &v) in c.iter().enumerate() {
                if j > k / 2 {
                    assert_eq!(v, 0, "k={k} j={j}");
                }
            }
            assert!(c[k / 2] > 0);
        }
    }

    #[test]
    fn exact_and_recursive_moments_agree() {
        for k in 2..=20 {
            for &c in &[1.5, 10.0, 1e3] {
                let a = gamma_central_moment(c, k).unwrap();
                let b = cumulant_recursion(c, k);
                assert!((a - b).abs() <= 1e-12 * b.abs(), "k={k} C={c}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn moment_matches_quadrature() {
        let c = 10.0;
        let g = Gamma::new(c, c).unwrap();
        let direct = crate::numerics::integrate(
            |x| (x - 1.0).powi(6) * g.pdf(x),
            0.0,
            12.0,
            &crate::numerics::QuadratureConfig::default(),
        )
        .unwrap();
        let got = gamma_central_moment(c, 6).unwrap();
        assert!((got - direct.value).abs() < 1e-10 * got);
    }

    #[test]
    fn large_orders_fall_back() {
        assert!(central_moment_polynomial(60).is_none());
        let v = gamma_central_moment(100.0, 60).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(gamma_central_moment(-1.0, 4).is_err());
    }
}
