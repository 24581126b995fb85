//! Assembly of the total request process into a time-ordered trace.

use std::collections::HashSet;
use std::io::{Read, Write};

use rayon::prelude::*;

use super::intensity::{CanonicalIntensity, DocId, DocumentProfile, MarkLaw, Shape};
use super::sampling::{sample_catalog, sample_document_requests_in, sample_poisson, DEFAULT_TRUNCATION};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, CATALOG_STREAM};

/// Streams at and above this index belong to documents that arrived before
/// the observation window under [`MarginPolicy::Stationary`].
const PREWINDOW_BASE: u64 = 1 << 62;
const PREWINDOW_COUNT_STREAM: u64 = u64::MAX;

/// One request event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub time: f64,
    pub doc: DocId,
}

/// How documents that arrived before the observation window are included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginPolicy {
    /// Catalog arrivals start `B` before the window, with `B` the smallest
    /// value past the peak of `B ↦ P(span > B) E[ρ] B` that brings it under
    /// `1e-3` times the expected requests per unit rate in the window.
    Auto,
    /// Catalog arrivals start this much before the window.
    Fixed(f64),
    /// Exact stationary start (Box model only): documents alive at the window
    /// start are drawn directly, with a length-biased lifespan and a uniform
    /// age.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub margin: MarginPolicy,
    /// Scale-family request streams are cut where `Λ̄` drops below this.
    pub truncation: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            margin: MarginPolicy::Auto,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

/// Counters collected while generating a trace.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TraceDiagnostics {
    /// Pre-extension margin actually used (0 for a stationary start).
    pub margin: f64,
    pub documents_sampled: usize,
    /// Sampled documents with no request inside the window; dropped.
    pub empty_documents: usize,
    /// Documents from the margin still active at the window start whose
    /// lifespan exceeds the margin. Their earlier-arriving counterparts were
    /// not sampled.
    pub margin_overruns: usize,
    /// `γ E[(span - B)^+]`: mean number of active documents at the window
    /// start lost to the finite margin.
    pub expected_missing_active: f64,
}

/// Time-ordered request events of the total process inside `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestTrace {
    events: Vec<Request>,
    window: (f64, f64),
    /// Catalog arrival rate, when known.
    pub gamma: Option<f64>,
    /// Seed the trace was generated from, when known.
    pub seed: Option<u64>,
    pub diagnostics: TraceDiagnostics,
}

impl RequestTrace {
    /// Wraps externally produced events; they must be sorted and inside
    /// `window`.
    pub fn from_events(events: Vec<Request>, window: (f64, f64)) -> Result<Self> {
        if !(window.0 <= window.1) {
            return Err(invalid("window", format!("[{}, {}] is empty", window.0, window.1)));
        }
        if let Some(i) = events.windows(2).position(|w| w[1].time < w[0].time) {
            return Err(Error::UnsortedTrace { index: i + 1 });
        }
        if let Some(e) = events
            .iter()
            .find(|e| e.time < window.0 || e.time > window.1 || !e.time.is_finite())
        {
            return Err(invalid("events", format!("event at {} outside window", e.time)));
        }
        Ok(Self {
            events,
            window,
            gamma: None,
            seed: None,
            diagnostics: TraceDiagnostics::default(),
        })
    }

    pub fn events(&self) -> &[Request] {
        &self.events
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn distinct_documents(&self) -> usize {
        self.events.iter().map(|e| e.doc).collect::<HashSet<_>>().len()
    }

    /// The same trace without the requests of `doc` (the tagged document).
    pub fn without_doc(&self, doc: DocId) -> Self {
        Self {
            events: self.events.iter().copied().filter(|e| e.doc != doc).collect(),
            ..self.clone()
        }
    }

    /// Index of the first event at or after `t`.
    pub fn first_index_at_or_after(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time < t)
    }

    /// Writes `time,doc_id` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time", "doc_id"])?;
        for e in &self.events {
            w.write_record([format_decimal(e.time), e.doc.0.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`RequestTrace::write_csv`]. Without an
    /// explicit window, the span of the event times is used.
    pub fn read_csv<R: Read>(reader: R, window: Option<(f64, f64)>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "time" || &headers[1] != "doc_id" {
            return Err(Error::Parse {
                line: 1,
                reason: format!(
                    "expected header `time,doc_id`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut events = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    reason: "expected two fields".into(),
                });
            }
            let time: f64 = rec[0].trim().parse().map_err(|_| Error::Parse {
                line,
                reason: format!("bad time `{}`", &rec[0]),
            })?;
            let doc: u64 = rec[1].trim().parse().map_err(|_| Error::Parse {
                line,
                reason: format!("bad doc_id `{}`", &rec[1]),
            })?;
            events.push(Request { time, doc: DocId(doc) });
        }
        let window = match window {
            Some(w) => w,
            None => match (events.first(), events.last()) {
                (Some(a), Some(b)) => (a.time, b.time.max(a.time)),
                _ => (0.0, 0.0),
            },
        };
        Self::from_events(events, window)
    }
}

/// Shortest decimal that parses back to the same binary64; exponent form
/// outside `[1e-6, 1e16)`.
pub fn format_decimal(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-6..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Pre-extension margin prescribed by [`MarginPolicy::Auto`].
pub fn auto_margin(model: &CanonicalIntensity, window_len: f64, truncation: f64) -> Result<f64> {
    if !(window_len > 0.0) {
        return Err(invalid("window", "observation window must have positive length"));
    }
    let target = 1e-3 * window_len * model.mean_requests();
    let mean_rho = model.rho_law.mean();
    // Lifespan scale of the requests: L for Box, L u* for a scale family.
    let stretch = match &model.shape {
        Shape::Box => 1.0,
        Shape::ScaleFamily(f) => f.upper_tail_point((truncation / model.mean_requests()).min(1.0)),
    };
    match model.lifespan_law {
        MarkLaw::Fixed(l) => Ok(l * stretch),
        MarkLaw::Lomax(p) => {
            let excess = |b: f64| p.survival(b / stretch) * mean_rho * b;
            let mut hi = stretch * p.sigma() / (p.alpha() - 1.0);
            let mut lo = hi;
            let mut doublings = 0;
            while excess(hi) >= target {
                lo = hi;
                hi *= 2.0;
                doublings += 1;
                if doublings > 2000 || !hi.is_finite() {
                    return Err(invalid("margin", "could not satisfy the pre-extension rule"));
                }
            }
            if doublings == 0 {
                return Ok(hi);
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if excess(mid) >= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(hi)
        }
    }
}

struct SampledDoc {
    stream: u64,
    arrival: f64,
    lifespan: f64,
    times: Vec<f64>,
}

/// Generates the request trace observed on `window` with the default options.
pub fn generate_trace(gamma: f64, model: &CanonicalIntensity, window: (f64, f64), seed: u64) -> Result<RequestTrace> {
    generate_trace_with(gamma, model, window, seed, &TraceOptions::default())
}

/// Generates the request trace observed on `window`.
///
/// Deterministic in `(gamma, model, window, seed, options)`: document `i` of
/// the catalog draws from its own stream, so the result does not depend on
/// scheduling. Documents without in-window requests are dropped and counted.
pub fn generate_trace_with(
    gamma: f64,
    model: &CanonicalIntensity,
    window: (f64, f64),
    seed: u64,
    options: &TraceOptions,
) -> Result<RequestTrace> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(invalid("window", format!("[{t0}, {t1}] must be finite and nonempty")));
    }
    let margin = match options.margin {
        MarginPolicy::Auto => auto_margin(model, t1 - t0, options.truncation)?,
        MarginPolicy::Fixed(b) if b >= 0.0 && b.is_finite() => b,
        MarginPolicy::Fixed(b) => return Err(invalid("margin", format!("must be finite and >= 0, got {b}"))),
        MarginPolicy::Stationary => {
            if !matches!(model.shape, Shape::Box) {
                return Err(invalid(
                    "margin",
                    "stationary start is only available for the Box model",
                ));
            }
            0.0
        }
    };

    let arrivals = sample_catalog(gamma, (t0 - margin, t1), &mut rng::stream(seed, CATALOG_STREAM))?;
    let sample_doc = |stream: u64, arrival: f64| -> SampledDoc {
        let mut r = rng::stream(seed, stream);
        let rho = model.rho_law.sample(&mut r);
        let lifespan = model.lifespan_law.sample(&mut r);
        let profile = DocumentProfile {
            doc_id: DocId(stream),
            arrival,
            rho,
            lifespan,
        };
        let times = sample_document_requests_in(&profile, model, window, options.truncation, &mut r);
        SampledDoc {
            stream,
            arrival,
            lifespan,
            times,
        }
    };
    let mut docs: Vec<SampledDoc> = arrivals
        .par_iter()
        .enumerate()
        .map(|(i, &a)| sample_doc(i as u64 + 1, a))
        .collect();

    if options.margin == MarginPolicy::Stationary {
        // Documents alive at t0: Poisson(γ E[L]) of them, lifespan
        // length-biased, age uniform on (0, L).
        let mut r = rng::stream(seed, PREWINDOW_COUNT_STREAM);
        let n = sample_poisson(gamma * model.lifespan_law.mean(), &mut r);
        let early: Vec<SampledDoc> = (0..n)
            .into_par_iter()
            .map(|j| {
                let stream = PREWINDOW_BASE + j;
                let mut r = rng::stream(seed, stream);
                let lifespan = model.lifespan_law.sample_length_biased(&mut r);
                let age = lifespan * rand::Rng::random::<f64>(&mut r);
                let rho = model.rho_law.sample(&mut r);
                let arrival = t0 - age;
                let profile = DocumentProfile {
                    doc_id: DocId(stream),
                    arrival,
                    rho,
                    lifespan,
                };
                let times = sample_document_requests_in(&profile, model, window, options.truncation, &mut r);
                SampledDoc {
                    stream,
                    arrival,
                    lifespan,
                    times,
                }
            })
            .collect();
        docs.extend(early);
    }

    docs.sort_by(|a, b| a.arrival.total_cmp(&b.arrival).then(a.stream.cmp(&b.stream)));

    let mut diagnostics = TraceDiagnostics {
        margin,
        documents_sampled: docs.len(),
        ..Default::default()
    };
    if options.margin != MarginPolicy::Stationary {
        diagnostics.margin_overruns = docs
            .iter()
            .filter(|d| d.arrival < t0 && d.arrival + d.lifespan > t0 && d.lifespan > margin)
            .count();
        diagnostics.expected_missing_active = match model.shape {
            Shape::Box => gamma * model.lifespan_law.excess_mean(margin),
            Shape::ScaleFamily(_) => f64::NAN,
        };
    }

    let mut events = Vec::with_capacity(docs.iter().map(|d| d.times.len()).sum());
    for (id, d) in docs.iter().enumerate() {
        if d.times.is_empty() {
            diagnostics.empty_documents += 1;
        }
        events.extend(d.times.iter().map(|&time| Request {
            time,
            doc: DocId(id as u64),
        }));
    }
    events.par_sort_by(|a, b| a.time.total_cmp(&b.time).then(a.doc.cmp(&b.doc)));

    Ok(RequestTrace {
        events,
        window,
        gamma: Some(gamma),
        seed: Some(seed),
        diagnostics,
    })
}
