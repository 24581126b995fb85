//! Request model: a Poisson catalog of documents, each emitting a Cox process
//! of requests driven by a random intensity profile.

pub mod intensity;
pub mod lomax;
pub mod sampling;
pub mod trace;

pub use intensity::{CanonicalIntensity, DocId, DocumentProfile, IntensityKind, MarkLaw, Shape, ShapeFunction};
pub use lomax::{sample_lomax, LomaxParams};
pub use sampling::{sample_catalog, sample_document_requests, sample_document_requests_in};
pub use trace::{
    auto_margin, generate_trace, generate_trace_with, MarginPolicy, Request, RequestTrace, TraceDiagnostics,
    TraceOptions,
};
