//! Law of the LRU exit time: simulated `T_C^s - s` against the time-changed
//! Gamma law `P(T_C <= t) = P(G_C <= γ M(t))`.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::analytics::{char_time, AnalyticModel, MissFunction};
use crate::cache::{estimate_exit_time, ExitTime};
use crate::error::{invalid, Result};
use crate::numerics::QuadratureConfig;
use crate::rng::split_seed;
use crate::traffic::{generate_trace_with, CanonicalIntensity, MarginPolicy, TraceOptions};

/// Censoring above this fraction is flagged.
pub const MAX_CENSORED_FRACTION: f64 = 0.05;

// Horizon: the analytic (1 - HORIZON_MASS)-quantile of T_C.
const HORIZON_MASS: f64 = 1e-4;
const GRID: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct ExitLawReport {
    pub ks_statistic: f64,
    pub p_value: f64,
    pub n_reps: usize,
    pub n_censored: usize,
    /// Observation length after `s` in each replication.
    pub horizon: f64,
    pub excessive_censoring: bool,
    /// Sorted observed values of `T_C^s - s`.
    pub samples: Vec<f64>,
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `M` on a grid with cubic Hermite interpolation (slopes `m`), which is
/// far below KS resolution and avoids one root solve per sample.
struct BigMTable {
    t: Vec<f64>,
    big_m: Vec<f64>,
    m: Vec<f64>,
}

impl BigMTable {
    fn new<M: MissFunction + ?Sized>(model: &M, horizon: f64, q: &QuadratureConfig) -> Result<Self> {
        // Quadratic spacing: m varies fastest near zero.
        let t: Vec<f64> = (0..=GRID).map(|i| horizon * (i as f64 / GRID as f64).powi(2)).collect();
        let rows: Vec<Result<(f64, f64)>> = t
            .par_iter()
            .map(|&x| Ok((model.big_m(x, q)?, model.m(x, q)?)))
            .collect();
        let mut big_m = Vec::with_capacity(t.len());
        let mut m = Vec::with_capacity(t.len());
        for r in rows {
            let (a, b) = r?;
            big_m.push(a);
            m.push(b);
        }
        Ok(Self { t, big_m, m })
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.t.partition_point(|&v| v <= x).clamp(1, self.t.len() - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let s = ((x - self.t[i]) / h).clamp(0.0, 1.0);
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.big_m[i]
            + (s3 - 2.0 * s2 + s) * h * self.m[i]
            + (-2.0 * s3 + 3.0 * s2) * self.big_m[i + 1]
            + (s3 - s2) * h * self.m[i + 1]
    }
}

/// Simulates `n_reps` independent traces on `[0, s + horizon]`, measures
/// `T_C^s - s` in each and runs a one-sample KS test against the analytic
/// law. Replications that do not reach `C` distinct documents within the
/// horizon are censored; the empirical CDF is compared on the observed range.
#[allow(clippy::too_many_arguments)]
pub fn mc_exit_time_law(
    gamma: f64,
    model: &CanonicalIntensity,
    capacity: usize,
    s: f64,
    n_reps: usize,
    seed: u64,
    margin: MarginPolicy,
    q: &QuadratureConfig,
) -> Result<ExitLawReport> {
    if capacity == 0 {
        return Err(invalid("capacity", "must be >= 1"));
    }
    if n_reps < 2 {
        return Err(invalid("n_reps", "need at least two replications"));
    }
    if !(s >= 0.0) || !s.is_finite() {
        return Err(invalid("s", format!("must be finite and >= 0, got {s}")));
    }
    let analytic = AnalyticModel::from_intensity(model);
    let law = Gamma::new(capacity as f64, 1.0).map_err(|e| invalid("capacity", e.to_string()))?;
    let horizon = char_time(law.inverse_cdf(1.0 - HORIZON_MASS) / gamma, &analytic, q)?;
    let table = BigMTable::new(&analytic, horizon, q)?;
    let options = TraceOptions {
        margin,
        ..TraceOptions::default()
    };
    let outcomes: Vec<Result<Option<f64>>> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let trace = generate_trace_with(gamma, model, (0.0, s + horizon), split_seed(seed, rep), &options)?;
            Ok(match estimate_exit_time(&trace, s, capacity)? {
                ExitTime::Reached(t) => Some(t - s),
                ExitTime::Censored => None,
            })
        })
        .collect();
    let mut samples = Vec::with_capacity(n_reps);
    let mut n_censored = 0;
    for o in outcomes {
        match o? {
            Some(x) => samples.push(x),
            None => n_censored += 1,
        }
    }
    samples.sort_by(f64::total_cmp);
    let n = n_reps as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = law.cdf(gamma * table.eval(x));
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    // The censored mass sits beyond the horizon.
    d = d.max((law.cdf(gamma * table.eval(horizon)) - samples.len() as f64 / n).abs());
    let excessive_censoring = n_censored as f64 > MAX_CENSORED_FRACTION * n;
    if excessive_censoring {
        log::warn!("exit-time law: {n_censored} of {n_reps} replications censored");
    }
    Ok(ExitLawReport {
        ks_statistic: d,
        p_value: ks_p_value(d, n_reps),
        n_reps,
        n_censored,
        horizon,
        excessive_censoring,
        samples,
    })
}
