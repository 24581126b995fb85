use std::collections::HashMap;

use super::IdBuild;
use crate::traffic::DocId;

/// TTL cache: a document is in the cache at `u` iff it was requested in
/// `[u - eviction_time, u]`.
#[derive(Debug, Clone)]
pub struct TtlState {
    eviction_time: f64,
    last_seen: HashMap<DocId, f64, IdBuild>,
}

impl TtlState {
    pub fn new(eviction_time: f64) -> Self {
        Self {
            eviction_time,
            last_seen: HashMap::default(),
        }
    }

    pub fn eviction_time(&self) -> f64 {
        self.eviction_time
    }

    pub fn contains(&self, doc: DocId, time: f64) -> bool {
        self.last_seen
            .get(&doc)
            .is_some_and(|&last| time - last <= self.eviction_time)
    }

    /// Requests `doc` at `time`; returns `true` on a hit.
    pub fn access(&mut self, doc: DocId, time: f64) -> bool {
        let hit = self.contains(doc, time);
        self.last_seen.insert(doc, time);
        hit
    }
}
