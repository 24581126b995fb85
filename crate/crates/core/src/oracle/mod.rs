//! Brute-force validators for the analytic layer: Monte Carlo estimates of
//! `m(t)`, the holding-time functional of a deterministic intensity, and the
//! law of the LRU exit time.

pub mod exit_law;
pub mod holding;
pub mod ttl;

use std::fmt;
use std::io::Write;

use crate::error::Result;
use crate::traffic::trace::format_decimal;

pub use exit_law::{ks_p_value, mc_exit_time_law, ExitLawReport};
pub use holding::{
    holding_time_functional, holding_time_functional_split, mc_holding_time_functional, TabulatedIntensity,
};
pub use ttl::mc_ttl_misses;

/// Streaming mean and variance (Welford), mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        Self { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// A Monte Carlo estimate set against its analytic target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub target: f64,
    pub z_score: f64,
}

impl OracleReport {
    pub fn new(acc: &Welford, target: f64) -> Self {
        let std_error = acc.std_error();
        Self {
            estimate: acc.mean(),
            std_error,
            n_samples: acc.count(),
            target,
            z_score: (acc.mean() - target) / std_error,
        }
    }

    /// `|z| <= z_max`. A zero standard error passes only on an exact match.
    pub fn passes(&self, z_max: f64) -> bool {
        if self.std_error == 0.0 {
            return self.estimate == self.target;
        }
        self.z_score.abs() <= z_max
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "estimate {:>14.8}  stderr {:>11.3e}  target {:>14.8}  z {:>7.2}  n {}",
            self.estimate, self.std_error, self.target, self.z_score, self.n_samples
        )
    }
}

/// CSV with header `name,estimate,std_error,n_samples,target,z_score`.
pub fn write_reports_csv<W: Write>(writer: W, rows: &[(String, OracleReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["name", "estimate", "std_error", "n_samples", "target", "z_score"])?;
    for (name, r) in rows {
        w.write_record([
            name.clone(),
            format_decimal(r.estimate),
            format_decimal(r.std_error),
            r.n_samples.to_string(),
            format_decimal(r.target),
            format_decimal(r.z_score),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 + 1e6).collect();
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((w.mean() - mean).abs() < 1e-9);
        assert!((w.variance() - var).abs() < 1e-9 * var);
        let (a, b) = xs.split_at(313);
        let mut wa = Welford::new();
        let mut wb = Welford::new();
        a.iter().for_each(|&x| wa.push(x));
        b.iter().for_each(|&x| wb.push(x));
        let m = wa.merge(&wb);
        assert_eq!(m.count(), 1000);
        assert!((m.mean() - mean).abs() < 1e-9);
        assert!((m.variance() - var).abs() < 1e-8 * var);
    }

    #[test]
    fn report_z_score_and_output() {
        let mut w = Welford::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            w.push(x);
        }
        let r = OracleReport::new(&w, 2.0);
        assert!((r.z_score - 0.5 / r.std_error).abs() < 1e-15);
        assert!(r.passes(4.0));
        let mut out = Vec::new();
        write_reports_csv(&mut out, &[("x".into(), r)]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(
            s.starts_with("name,estimate,std_error,n_samples,target,z_score\nx,2.5,"),
            "{s}"
        );
        assert!(s.contains(",4,2,"));
        assert!(format!("{r}").contains("z"));
    }
}
