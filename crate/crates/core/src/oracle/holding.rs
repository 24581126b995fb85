//! Holding-time functionals of a Poisson process with deterministic
//! intensity: `E[Σ_{r >= 2} F(τ_r - τ_{r-1})]` as a double integral and by
//! direct simulation.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::numerics::{integrate, integrate_fallible, QuadratureConfig};
use crate::rng;

use super::{OracleReport, Welford};

/// Piecewise-linear intensity on `[nodes[0], nodes[n-1]]`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedIntensity {
    nodes: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedIntensity {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(invalid("intensity", "need at least two nodes and one value per node"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("intensity", "nodes must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("intensity", "values must be finite and >= 0"));
        }
        let mut cumulative = vec![0.0];
        for i in 1..nodes.len() {
            let seg = 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        Ok(Self {
            nodes,
            values,
            cumulative,
        })
    }

    /// Constant `rate` on `[0, length]`.
    pub fn boxed(rate: f64, length: f64) -> Result<Self> {
        Self::new(vec![0.0, length], vec![rate, rate])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn segment(&self, u: f64) -> Option<usize> {
        let (a, b) = self.support();
        if u < a || u > b {
            return None;
        }
        Some(
            self.nodes
                .partition_point(|&x| x <= u)
                .saturating_sub(1)
                .min(self.nodes.len() - 2),
        )
    }

    pub fn value(&self, u: f64) -> f64 {
        match self.segment(u) {
            None => 0.0,
            Some(i) => {
                let w = (u - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
                self.values[i] + w * (self.values[i + 1] - self.values[i])
            }
        }
    }

    /// `Λ(u) = ∫_{-∞}^u λ`.
    pub fn mean_function(&self, u: f64) -> f64 {
        let (a, _) = self.support();
        if u <= a {
            return 0.0;
        }
        match self.segment(u) {
            None => self.total(),
            Some(i) => {
                let h = u - self.nodes[i];
                let slope = (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i]);
                self.cumulative[i] + self.values[i] * h + 0.5 * slope * h * h
            }
        }
    }

    /// `Λ(∞)`.
    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// One realisation of the Poisson process, by thinning.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (a, b) = self.support();
        let peak = self.peak();
        if peak == 0.0 {
            return Vec::new();
        }
        let n = crate::traffic::sampling::sample_poisson(peak * (b - a), rng);
        let mut t = Vec::new();
        for _ in 0..n {
            let u = a + (b - a) * rng.random::<f64>();
            if rng.random::<f64>() * peak < self.value(u) {
                t.push(u);
            }
        }
        t.sort_by(f64::total_cmp);
        t
    }
}

/// [`holding_time_functional_split`] without extra breakpoints.
pub fn holding_time_functional<F>(f: F, lambda: &TabulatedIntensity, q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    holding_time_functional_split(f, lambda, &[], q)
}

/// `∫_0^∞ F(w) ∫ λ(u) λ(u+w) e^{-(Λ(u+w) - Λ(u))} du dw`.
///
/// The outer integral is split at the differences of the tabulation nodes
/// and at the given `kinks` (discontinuities of `F`).
pub fn holding_time_functional_split<F>(
    f: F,
    lambda: &TabulatedIntensity,
    kinks: &[f64],
    q: &QuadratureConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = lambda.support();
    let span = b - a;
    let nodes = lambda.nodes();
    let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&k| k > 0.0 && k < span).collect();
    if nodes.len() <= 64 {
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                cuts.push(nodes[j] - nodes[i]);
            }
        }
    }
    cuts.push(0.0);
    cuts.push(span);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let inner_q = q.nested();
    let inner = |w: f64| -> Result<f64> {
        let mut pts: Vec<f64> = nodes
            .iter()
            .flat_map(|&n| [n, n - w])
            .filter(|&u| u > a && u < b - w)
            .collect();
        pts.push(a);
        pts.push(b - w);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let g = |u: f64| {
            lambda.value(u) * lambda.value(u + w) * (-(lambda.mean_function(u + w) - lambda.mean_function(u))).exp()
        };
        let mut total = 0.0;
        for p in pts.windows(2) {
            total += integrate(g, p[0], p[1], &inner_q)?.value;
        }
        Ok(total)
    };
    let mut total = 0.0;
    for c in cuts.windows(2) {
        total += integrate_fallible(|w| Ok(f(w) * inner(w)?), c[0], c[1], q)?.value;
    }
    Ok(total)
}

/// Direct simulation of `Σ_{r >= 2} F(τ_r - τ_{r-1})` against the quadrature
/// value.
pub fn mc_holding_time_functional<F>(
    f: F,
    lambda: &TabulatedIntensity,
    kinks: &[f64],
    n_samples: u64,
    seed: u64,
    q: &QuadratureConfig,
) -> Result<OracleReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(invalid("n_samples", "need at least two samples"));
    }
    let target = holding_time_functional_split(&f, lambda, kinks, q)?;
    const CHUNKS: u64 = 64;
    let acc = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c);
            let mut w = Welford::new();
            for _ in n_samples * c / CHUNKS..n_samples * (c + 1) / CHUNKS {
                let t = lambda.sample(&mut r);
                w.push(t.windows(2).map(|p| f(p[1] - p[0])).sum());
            }
            w
        })
        .reduce(Welford::new, |x, y| x.merge(&y));
    Ok(OracleReport::new(&acc, target))
}
