//! Poisson cluster traffic, LRU/TTL cache simulation and analytic hit-ratio
//! estimates for heavy-tailed document popularity.
//!
//! The crate is organised as
//! - [`traffic`]: the request model and synthetic trace generation,
//! - [`cache`]: exact LRU and TTL replay of a trace,
//! - [`analytics`]: `m(t)`, `M(t)`, characteristic times and estimators,
//! - [`oracle`]: Monte Carlo cross-checks of the analytic identities,
//! - [`experiment`]: configuration files and replicated sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analytics;
pub mod cache;
pub mod error;
pub mod experiment;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod traffic;

pub use analytics::{AnalyticModel, BoxModelSpec, Estimate, MissFunction, ScaleFamilySpec};
pub use cache::{lru_process, lru_replay_many, ttl_process, ExitTime, LruState, SimStats, TtlState};
pub use error::{Error, Result};
pub use experiment::{run_sweep, ExperimentConfig, SweepResult, SweepRow};
pub use numerics::{Integral, QuadratureConfig};
pub use oracle::{OracleReport, Welford};
pub use traffic::{
    generate_trace, generate_trace_with, CanonicalIntensity, DocId, DocumentProfile, MarginPolicy, MarkLaw, Request,
    RequestTrace, ShapeFunction, TraceOptions,
};
