//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use std::collections::HashSet;

use che::{lru_replay_many, DocId, LruState, Request};
use proptest::prelude::*;

/// Up to 600 requests over at most 40 documents, at unit spacing.
pub fn request_sequence() -> impl Strategy<Value = Vec<Request>> {
    (1u64..40).prop_flat_map(|docs| {
        prop::collection::vec(0..docs, 1..600).prop_map(|ids| {
            ids.into_iter()
                .enumerate()
                .map(|(i, d)| Request {
                    time: i as f64,
                    doc: DocId(d),
                })
                .collect()
        })
    })
}

/// Replays every capacity `1..=max_c` side by side and checks, after each
/// request, that the cache of size `C` is contained in the one of size `C+1`,
/// that first requests miss, and that hits and misses add up.
pub fn check_lru_properties(events: &[Request], max_c: usize) -> Result<(), String> {
    let mut caches: Vec<LruState> = (1..=max_c).map(|c| LruState::new(c).unwrap()).collect();
    let mut misses = vec![0u64; max_c];
    let mut seen = HashSet::new();
    for (i, e) in events.iter().enumerate() {
        let first = seen.insert(e.doc);
        for (k, cache) in caches.iter_mut().enumerate() {
            let hit = cache.access(e.doc);
            if first && hit {
                return Err(format!("request {i}: first request of {:?} hit at C={}", e.doc, k + 1));
            }
            misses[k] += u64::from(!hit);
        }
        for k in 1..max_c {
            let bigger: HashSet<DocId> = caches[k].iter().collect();
            if let Some(d) = caches[k - 1].iter().find(|d| !bigger.contains(d)) {
                return Err(format!("request {i}: {d:?} cached at C={} but not at C={}", k, k + 1));
            }
        }
    }
    for k in 1..max_c {
        if misses[k] > misses[k - 1] {
            return Err(format!("misses grew from C={} to C={}", k, k + 1));
        }
    }
    let caps: Vec<usize> = (1..=max_c).collect();
    let stats = lru_replay_many(events, &caps).map_err(|e| e.to_string())?;
    for (k, s) in stats.iter().enumerate() {
        if s.hits() + s.misses != events.len() as u64 || s.total_requests != events.len() as u64 {
            return Err(format!("C={}: hits + misses != requests", k + 1));
        }
        if s.misses != misses[k] {
            return Err(format!(
                "C={}: one-pass misses {} vs replay {}",
                k + 1,
                s.misses,
                misses[k]
            ));
        }
        if s.first_request_misses != seen.len() as u64 || s.misses < s.first_request_misses {
            return Err(format!("C={}: first-request misses not counted", k + 1));
        }
    }
    Ok(())
}
