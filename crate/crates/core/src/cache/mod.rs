//! Exact cache replays over request traces and measurement of the
//! distinct-document process.

mod lru;
mod stack;
mod stats;
mod ttl;

use std::collections::{HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};

pub use lru::LruState;
pub use stack::lru_replay_many;
pub use stats::{write_stats_csv, write_ttl_stats_csv, DocTally, SimStats};
pub use ttl::TtlState;

use crate::error::{invalid, Error, Result};
use crate::traffic::{DocId, Request, RequestTrace};

/// Multiplicative hasher for dense integer document ids.
#[derive(Default, Clone, Copy)]
pub struct IdHasher(u64);

impl Hasher for IdHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ u64::from(b)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }
    fn write_u64(&mut self, x: u64) {
        self.0 = (x ^ (x >> 29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

pub(crate) type IdBuild = BuildHasherDefault<IdHasher>;

// Tracks which documents have been seen; dense ids use a bitmap.
enum SeenSet {
    Dense(Vec<bool>),
    Sparse(HashSet<DocId, IdBuild>),
}

impl SeenSet {
    fn for_events(events: &[Request]) -> Self {
        let max = events.iter().map(|e| e.doc.0).max().unwrap_or(0);
        if (max as usize) < 4 * events.len() + 1024 {
            SeenSet::Dense(vec![false; max as usize + 1])
        } else {
            SeenSet::Sparse(HashSet::default())
        }
    }

    /// Marks `doc`; returns `true` if it was new.
    fn insert(&mut self, doc: DocId) -> bool {
        match self {
            SeenSet::Dense(v) => !std::mem::replace(&mut v[doc.0 as usize], true),
            SeenSet::Sparse(s) => s.insert(doc),
        }
    }
}

fn check_sorted(events: &[Request]) -> Result<()> {
    match events.windows(2).position(|w| w[1].time < w[0].time) {
        Some(i) => Err(Error::UnsortedTrace { index: i + 1 }),
        None => Ok(()),
    }
}

fn replay<F: FnMut(&Request) -> bool>(events: &[Request], per_doc: bool, mut hit: F) -> Result<SimStats> {
    check_sorted(events)?;
    let mut stats = SimStats {
        per_doc: per_doc.then(HashMap::new),
        ..Default::default()
    };
    let mut seen = SeenSet::for_events(events);
    for e in events {
        let is_hit = hit(e);
        let first = seen.insert(e.doc);
        debug_assert!(!(first && is_hit));
        stats.total_requests += 1;
        if !is_hit {
            stats.misses += 1;
        }
        if first {
            stats.first_request_misses += 1;
        }
        if let Some(map) = stats.per_doc.as_mut() {
            let t = map.entry(e.doc).or_default();
            t.requests += 1;
            t.misses += u64::from(!is_hit);
        }
    }
    Ok(stats)
}

/// Replays `events` through an LRU cache of `capacity` documents.
pub fn lru_replay(events: &[Request], capacity: usize, per_doc: bool) -> Result<SimStats> {
    let mut cache = LruState::new(capacity)?;
    replay(events, per_doc, |e| cache.access(e.doc))
}

/// Exact LRU replay with per-document tallies.
pub fn lru_process(trace: &RequestTrace, capacity: usize) -> Result<SimStats> {
    lru_replay(trace.events(), capacity, true)
}

/// Replays `events` through a TTL cache with the given eviction time.
pub fn ttl_replay(events: &[Request], eviction_time: f64, per_doc: bool) -> Result<SimStats> {
    if !(eviction_time >= 0.0) {
        return Err(invalid("eviction_time", format!("must be >= 0, got {eviction_time}")));
    }
    let mut cache = TtlState::new(eviction_time);
    replay(events, per_doc, |e| cache.access(e.doc, e.time))
}

/// Exact TTL replay with per-document tallies. `f64::INFINITY` never evicts.
pub fn ttl_process(trace: &RequestTrace, eviction_time: f64) -> Result<SimStats> {
    ttl_replay(trace.events(), eviction_time, true)
}

fn check_query(trace: &RequestTrace, s: f64, t: f64) -> Result<()> {
    let (w0, w1) = trace.window();
    if !(s <= t) || s < w0 || t > w1 {
        return Err(Error::OutOfWindow {
            start: s,
            end: t,
            window_start: w0,
            window_end: w1,
        });
    }
    Ok(())
}

/// Number of distinct documents with at least one request in `[s, t]`.
pub fn measure_distinct(trace: &RequestTrace, s: f64, t: f64) -> Result<usize> {
    check_query(trace, s, t)?;
    let lo = trace.first_index_at_or_after(s);
    let hi = trace.events().partition_point(|e| e.time <= t);
    let set: HashSet<DocId, IdBuild> = trace.events()[lo..hi].iter().map(|e| e.doc).collect();
    Ok(set.len())
}

/// Mean of `X^s_{s+span}` over the given start times.
pub fn mean_distinct(trace: &RequestTrace, span: f64, starts: &[f64]) -> Result<f64> {
    if starts.is_empty() {
        return Err(invalid("starts", "need at least one start time"));
    }
    let mut total = 0usize;
    for &s in starts {
        total += measure_distinct(trace, s, s + span)?;
    }
    Ok(total as f64 / starts.len() as f64)
}

/// First passage of the distinct-document count from `s` to `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitTime {
    Reached(f64),
    /// The window ended before `C` distinct documents were requested.
    Censored,
}

impl ExitTime {
    pub fn time(self) -> Option<f64> {
        match self {
            ExitTime::Reached(t) => Some(t),
            ExitTime::Censored => None,
        }
    }
}

/// `T_C^s = inf{t >= s : X^s_t = C}` measured on the trace.
pub fn estimate_exit_time(trace: &RequestTrace, s: f64, capacity: usize) -> Result<ExitTime> {
    let w1 = trace.window().1;
    check_query(trace, s, w1.max(s))?;
    if capacity == 0 {
        return Ok(ExitTime::Reached(s));
    }
    let mut seen: HashSet<DocId, IdBuild> = HashSet::default();
    for e in &trace.events()[trace.first_index_at_or_after(s)..] {
        seen.insert(e.doc);
        if seen.len() == capacity {
            return Ok(ExitTime::Reached(e.time));
        }
    }
    Ok(ExitTime::Censored)
}
