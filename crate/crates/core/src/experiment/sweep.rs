//! Replicated LRU simulation over a `(γ, C)` grid next to the analytic
//! estimates.

use std::io::Write;

use rayon::prelude::*;

use crate::analytics::{AnalyticModel, Estimate};
use crate::cache::lru_replay_many;
use crate::error::{invalid, Result};
use crate::oracle::Welford;
use crate::rng::split_seed;
use crate::traffic::trace::format_decimal;
use crate::traffic::{generate_trace_with, TraceOptions};

use super::config::{ExperimentConfig, SimTime, SweepCell};
use super::sizing::{size_simulation_time, Sizing};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub capacity: usize,
    pub theta: f64,
    /// Mean over replications of the per-trace hit ratio.
    pub emp_hit: f64,
    /// Replication-level standard error; NaN for a single replication.
    pub emp_stderr: f64,
    pub zero_hit: f64,
    pub first_hit: f64,
    /// NaN (an empty CSV field) when not computed.
    pub exact_hit: f64,
    pub char_time: f64,
    pub e_term: f64,
    pub n_reps: usize,
    pub sim_time: f64,
}

/// A replication or an analytic cell that failed; the sweep carries on.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub gamma: f64,
    pub capacity: Option<usize>,
    pub replication: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<CellFailure>,
    /// Per-`γ` sizing, present when `sim_time = auto`.
    pub sizing: Vec<(f64, Option<Sizing>)>,
}

/// Seed of replication `rep` at the `gi`-th rate.
pub fn replication_seed(base: u64, gamma_index: usize, rep: usize) -> u64 {
    split_seed(split_seed(base, gamma_index as u64), rep as u64)
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let cells = config.cells()?;
    if cells.is_empty() {
        return Err(invalid("sweep", "empty sweep grid"));
    }
    let q = &config.quadrature;
    let analytic = AnalyticModel::from_intensity(&config.model);
    let options = TraceOptions {
        margin: config.margin,
        ..TraceOptions::default()
    };
    let mut rows = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    let mut sizing = Vec::new();

    for (gi, &gamma) in config.gamma_list.iter().enumerate() {
        let (sim_time, size) = match config.sim_time {
            SimTime::Fixed(s) => (s, None),
            SimTime::Auto => {
                let s = size_simulation_time(&config.model, gamma, config.sizing_threshold, config.sim_time_cap, q)?;
                log::info!(
                    "gamma {gamma}: sim_time {} (K_alpha {}, stable {}, coverage {}, capped {})",
                    s.sim_time,
                    s.k_alpha,
                    s.stable_time,
                    s.coverage_time,
                    s.capped
                );
                (s.sim_time, Some(s))
            }
        };
        sizing.push((gamma, size));
        let my_cells: Vec<SweepCell> = cells.iter().copied().filter(|c| c.gamma_index == gi).collect();

        // Replications in parallel; every capacity replays the same trace.
        let reps: Vec<std::result::Result<Vec<f64>, String>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = replication_seed(config.seed, gi, rep);
                let trace = generate_trace_with(gamma, &config.model, (0.0, sim_time), seed, &options)
                    .map_err(|e| e.to_string())?;
                let caps: Vec<usize> = my_cells.iter().map(|c| c.capacity).collect();
                let stats = lru_replay_many(trace.events(), &caps).map_err(|e| e.to_string())?;
                Ok(stats.iter().map(|s| s.hit_ratio()).collect())
            })
            .collect();
        let mut acc = vec![Welford::new(); my_cells.len()];
        for (rep, r) in reps.into_iter().enumerate() {
            match r {
                Ok(hits) => {
                    for (a, h) in acc.iter_mut().zip(hits) {
                        a.push(h);
                    }
                }
                Err(message) => failures.push(CellFailure {
                    gamma,
                    capacity: None,
                    replication: Some(rep),
                    message,
                }),
            }
        }

        let estimates: Vec<Result<Estimate>> = my_cells
            .par_iter()
            .map(|c| Estimate::compute(gamma, c.capacity as f64, &analytic, q, config.exact))
            .collect();
        for ((c, a), est) in my_cells.iter().zip(&acc).zip(estimates) {
            let mut row = SweepRow {
                gamma,
                capacity: c.capacity,
                theta: c.theta,
                emp_hit: if a.count() > 0 { a.mean() } else { f64::NAN },
                emp_stderr: a.std_error(),
                zero_hit: f64::NAN,
                first_hit: f64::NAN,
                exact_hit: f64::NAN,
                char_time: f64::NAN,
                e_term: f64::NAN,
                n_reps: a.count() as usize,
                sim_time,
            };
            match est {
                Ok(e) => {
                    row.zero_hit = e.ratios.zero_order;
                    row.first_hit = e.ratios.first_order;
                    row.exact_hit = e.exact_hit.unwrap_or(f64::NAN);
                    row.char_time = e.ratios.char_time;
                    row.e_term = e.ratios.e_term;
                }
                Err(err) => {
                    log::warn!("analytics failed at gamma {gamma}, C {}: {err}", c.capacity);
                    failures.push(CellFailure {
                        gamma,
                        capacity: Some(c.capacity),
                        replication: None,
                        message: err.to_string(),
                    });
                }
            }
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.capacity.cmp(&b.capacity)));
    Ok(SweepResult { rows, failures, sizing })
}

pub const SWEEP_HEADER: [&str; 12] = [
    "gamma",
    "C",
    "theta",
    "emp_hit",
    "emp_stderr",
    "zero_hit",
    "first_hit",
    "exact_hit",
    "char_time",
    "e_term",
    "n_reps",
    "sim_time",
];

pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            format_decimal(r.gamma),
            r.capacity.to_string(),
            format_decimal(r.theta),
            format_decimal(r.emp_hit),
            format_decimal(r.emp_stderr),
            format_decimal(r.zero_hit),
            format_decimal(r.first_hit),
            if r.exact_hit.is_nan() {
                String::new()
            } else {
                format_decimal(r.exact_hit)
            },
            format_decimal(r.char_time),
            format_decimal(r.e_term),
            r.n_reps.to_string(),
            format_decimal(r.sim_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}
