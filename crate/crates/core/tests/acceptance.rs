//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any fails.
//!
//! Numeric arguments select criteria, e.g. `cargo test --test acceptance -- 1 7`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use che::analytics::{char_time, expected_misses_exact, first_order_term, gamma_central_moment, gamma_tail_bound};
use che::cache::mean_distinct;
use che::numerics::integrate;
use che::oracle::mc_ttl_misses;
use che::{
    generate_trace_with, AnalyticModel, BoxModelSpec, CanonicalIntensity, ExperimentConfig, MarginPolicy, MarkLaw,
    MissFunction, QuadratureConfig, TraceOptions,
};
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn closed_forms() -> Result<Outcome, String> {
    let q = QuadratureConfig::default();
    let tight = QuadratureConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..q
    };
    // m(t) = ∫ λ(u) exp(-(Λ(u+t) - Λ(u))) du for the unit box.
    let t = 0.5;
    let quad_m = integrate(|u| (-((u + t).min(1.0) - u)).exp(), 0.0, 1.0, &tight)
        .map_err(err)?
        .value;
    let quad_big_m = integrate(|s| che::analytics::m_box_pointwise(1.0, 1.0, s), 0.0, 1.0, &tight)
        .map_err(err)?
        .value;
    let spec = BoxModelSpec::new(MarkLaw::fixed(1.0).map_err(err)?, MarkLaw::fixed(1.0).map_err(err)?);
    let closed_m = 1.0 - 0.5 * (-0.5f64).exp();
    let closed_big_m = 2.0 / std::f64::consts::E;
    let devs = [
        (che::analytics::m_box_pointwise(1.0, 1.0, t) - quad_m).abs(),
        (closed_m - quad_m).abs(),
        (spec.m(t, &q).map_err(err)? - quad_m).abs(),
        (che::analytics::big_m_box_pointwise(1.0, 1.0, 1.0) - quad_big_m).abs(),
        (closed_big_m - quad_big_m).abs(),
        (spec.big_m(1.0, &q).map_err(err)? - quad_big_m).abs(),
    ];
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!("max |closed form - quadrature| = {worst:.2e} (tol 1e-10)"),
    )
}

fn gamma_facts() -> Result<Outcome, String> {
    let mut pass = true;
    let mut worst_moment = 0.0f64;
    for c in [2.0, 10.0, 100.0] {
        let v = gamma_central_moment(c, 2).map_err(err)?;
        let dev = (v - 1.0 / c).abs() / (1.0 / c);
        worst_moment = worst_moment.max(dev);
        pass &= dev <= 4.0 * f64::EPSILON;
    }
    let n = 1_000_000u64;
    let mut notes = Vec::new();
    for (k, c) in [10.0, 100.0].into_iter().enumerate() {
        let law = Gamma::new(c, 1.0 / c).map_err(err)?;
        let mut rng = che::rng::stream(2024, k as u64);
        let draws: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
        for eta in [0.2, 0.5] {
            let freq = draws.iter().filter(|&&x| (x - 1.0).abs() >= eta).count() as f64 / n as f64;
            let bound = gamma_tail_bound(c, eta).map_err(err)?;
            pass &= freq <= bound;
            notes.push(format!("C={c} η={eta}: {freq:.2e} <= {bound:.2e}"));
        }
    }
    outcome(pass, format!("moment rel dev {worst_moment:.1e}; {}", notes.join(", ")))
}

fn distinct_count_identity() -> Result<Outcome, String> {
    let gamma = 100.0;
    let reps = 50u64;
    let spans = [0.05, 0.1, 0.2];
    let window = (0.0, 200.0);
    let model = CanonicalIntensity::lomax_reference();
    let analytic = AnalyticModel::from_intensity(&model);
    let q = QuadratureConfig::default();
    let opts = TraceOptions {
        margin: MarginPolicy::Stationary,
        ..TraceOptions::default()
    };
    // Each replication averages X^s_{s+t} over start times s spaced 0.5 apart.
    let starts: Vec<f64> = (0..398).map(|i| i as f64 * 0.5).collect();
    let per_rep: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let trace = generate_trace_with(gamma, &model, window, che::rng::split_seed(3, r), &opts).map_err(err)?;
            spans
                .iter()
                .map(|&t| mean_distinct(&trace, t, &starts).map_err(err))
                .collect()
        })
        .collect::<Result<_, String>>()?;
    let mut pass = true;
    let mut notes = Vec::new();
    for (k, &t) in spans.iter().enumerate() {
        let mean = per_rep.iter().map(|v| v[k]).sum::<f64>() / reps as f64;
        let big_m = analytic.big_m(t, &q).map_err(err)?;
        let rel = (mean / gamma - big_m).abs() / big_m;
        pass &= rel <= 0.02;
        notes.push(format!("t={t}: X/γ={:.5} M={big_m:.5} rel {rel:.4}", mean / gamma));
    }
    outcome(pass, format!("{} (tol 0.02)", notes.join(", ")))
}

fn ttl_oracle() -> Result<Outcome, String> {
    let model = CanonicalIntensity::lomax_reference();
    let q = QuadratureConfig::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for (k, t) in [0.01, 0.1, 1.0].into_iter().enumerate() {
        let r = mc_ttl_misses(&model, t, 1_000_000, 40 + k as u64, &q).map_err(err)?;
        pass &= r.passes(4.0);
        notes.push(format!("t={t}: z={:+.2}", r.z_score));
    }
    outcome(pass, format!("{} (|z| <= 4)", notes.join(", ")))
}

fn sweep_config(text: &str) -> Result<ExperimentConfig, String> {
    ExperimentConfig::parse(text).map_err(err)
}

fn zero_order_large_gamma() -> Result<Outcome, String> {
    // θ = C/500 for ten integer capacities spanning [0.01, 0.25].
    let cfg = sweep_config(
        "gamma_list = 500\ncapacity_list = 5,18,32,45,58,72,85,98,112,125\nreplications = 20\n\
         seed = 11\nsim_time = auto\nsim_time_cap = 2000\nexact = false",
    )?;
    let res = che::run_sweep(&cfg).map_err(err)?;
    if !res.failures.is_empty() || res.rows.len() != 10 {
        return outcome(
            false,
            format!("{} rows, {} failures", res.rows.len(), res.failures.len()),
        );
    }
    let (worst, at) = res
        .rows
        .iter()
        .map(|r| ((r.emp_hit - r.zero_hit).abs(), r.theta))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    outcome(
        worst <= 0.02,
        format!(
            "max |emp - zero| = {worst:.4} at θ={at} (tol 0.02), S={}",
            res.rows[0].sim_time
        ),
    )
}

fn first_order_small_gamma() -> Result<Outcome, String> {
    let cfg = sweep_config(
        "gamma_list = 50\ncapacity_list = 1,2,3,4,5,6,7,8,9,10\nreplications = 50\n\
         seed = 1\nsim_time = auto\nsim_time_cap = 20000\nexact = false",
    )?;
    let res = che::run_sweep(&cfg).map_err(err)?;
    if !res.failures.is_empty() || res.rows.len() != 10 {
        return outcome(
            false,
            format!("{} rows, {} failures", res.rows.len(), res.failures.len()),
        );
    }
    let zero: Vec<f64> = res.rows.iter().map(|r| (r.zero_hit - r.emp_hit).abs()).collect();
    let first: Vec<f64> = res.rows.iter().map(|r| (r.first_hit - r.emp_hit).abs()).collect();
    let better = zero.iter().zip(&first).filter(|(z, f)| f <= z).count();
    let max_zero = zero.iter().cloned().fold(0.0, f64::max);
    let max_first = first.iter().cloned().fold(0.0, f64::max);
    outcome(
        better * 10 >= 8 * zero.len() && max_first < max_zero,
        format!(
            "first <= zero on {better}/{} points (need 80%), max error {max_first:.4} vs {max_zero:.4}, S={}",
            zero.len(),
            res.rows[0].sim_time
        ),
    )
}

fn first_order_convergence() -> Result<Outcome, String> {
    let theta = 0.1;
    let model = AnalyticModel::from_intensity(&CanonicalIntensity::lomax_reference());
    let q = QuadratureConfig {
        rel_tol: 1e-9,
        abs_tol: 1e-12,
        ..QuadratureConfig::default()
    };
    let t = char_time(theta, &model, &q).map_err(err)?;
    let m = model.m(t, &q).map_err(err)?;
    let e = first_order_term(t, theta, &model, &q).map_err(err)?;
    let scaled: Vec<(usize, f64)> = [64usize, 128, 256, 512]
        .into_par_iter()
        .map(|c| {
            let exact = expected_misses_exact(c as f64, c as f64 / theta, &model, &q).map_err(err)?;
            Ok((c, c as f64 * (exact.value - m)))
        })
        .collect::<Result<_, String>>()?;
    let last = scaled.last().unwrap().1;
    let rel = (last - e).abs() / e.abs();
    let trail: Vec<String> = scaled.iter().map(|(c, v)| format!("{c}:{v:.5}")).collect();
    outcome(
        rel <= 0.10,
        format!("e={e:.5}, C(E-m) = {} -> rel dev {rel:.4} (tol 0.10)", trail.join(" ")),
    )
}

fn lru_structure() -> Result<Outcome, String> {
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&common::request_sequence(), |events| {
        common::check_lru_properties(&events, 20).map_err(TestCaseError::fail)
    });
    match result {
        Ok(()) => outcome(
            true,
            "inclusion, conservation and first-request miss on 100 traces, C=1..20".into(),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

const CRITERIA: [(&str, Duration, Check); 8] = [
    ("closed-form identities", Duration::from_secs(1), closed_forms),
    ("gamma concentration", Duration::from_secs(30), gamma_facts),
    (
        "distinct count vs M(t)",
        Duration::from_secs(300),
        distinct_count_identity,
    ),
    ("TTL oracle agreement", Duration::from_secs(120), ttl_oracle),
    (
        "zero-order at gamma=500",
        Duration::from_secs(900),
        zero_order_large_gamma,
    ),
    (
        "first-order at gamma=50",
        Duration::from_secs(900),
        first_order_small_gamma,
    ),
    (
        "first-order convergence",
        Duration::from_secs(120),
        first_order_convergence,
    ),
    ("LRU structural properties", Duration::from_secs(60), lru_structure),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, budget, check)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let slow = if elapsed > *budget {
            format!(" [over {}s budget]", budget.as_secs())
        } else {
            String::new()
        };
        println!(
            "{} criterion {id}: {name}: {detail} ({:.1}s){slow}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
