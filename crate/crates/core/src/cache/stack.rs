//! LRU misses for many capacities in one pass.
//!
//! A request hits an LRU cache of size `C` iff fewer than `C` distinct other
//! documents were requested since the previous request of the same document
//! (its stack distance). The distance is counted with a Fenwick tree marking
//! the latest request position of every document.

use std::collections::HashMap;

use super::{check_sorted, IdBuild, SimStats};
use crate::error::{invalid, Result};
use crate::traffic::{DocId, Request};

struct Fenwick(Vec<i32>);

impl Fenwick {
    fn add(&mut self, mut i: usize, v: i32) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `[0, i)`.
    fn prefix(&self, mut i: usize) -> i64 {
        let mut s = 0i64;
        while i > 0 {
            s += i64::from(self.0[i]);
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// LRU statistics (without per-document tallies) for every capacity in
/// `capacities`; equal to running [`super::lru_replay`] once per capacity.
pub fn lru_replay_many(events: &[Request], capacities: &[usize]) -> Result<Vec<SimStats>> {
    if capacities.contains(&0) {
        return Err(invalid("capacity", "must be >= 1"));
    }
    check_sorted(events)?;
    let max_c = capacities.iter().copied().max().unwrap_or(0);
    // hist[d] counts re-requests at stack distance d < max_c.
    let mut hist = vec![0u64; max_c];
    let mut tree = Fenwick(vec![0; events.len() + 1]);
    let mut last: HashMap<DocId, usize, IdBuild> = HashMap::default();
    let mut first_requests = 0u64;
    for (i, e) in events.iter().enumerate() {
        match last.insert(e.doc, i) {
            None => first_requests += 1,
            Some(j) => {
                let distance = (tree.prefix(i) - tree.prefix(j + 1)) as usize;
                if distance < max_c {
                    hist[distance] += 1;
                }
                tree.add(j, -1);
            }
        }
        tree.add(i, 1);
    }
    let total = events.len() as u64;
    Ok(capacities
        .iter()
        .map(|&c| {
            let hits: u64 = hist[..c].iter().sum();
            SimStats {
                total_requests: total,
                misses: total - hits,
                first_request_misses: first_requests,
                per_doc: None,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::lru_replay;
    use crate::traffic::{generate_trace, CanonicalIntensity};

    #[test]
    fn agrees_with_direct_replay() {
        let t = generate_trace(40.0, &CanonicalIntensity::lomax_reference(), (0.0, 30.0), 3).unwrap();
        let caps = [1, 2, 5, 17, 200];
        let many = lru_replay_many(t.events(), &caps).unwrap();
        for (c, s) in caps.iter().zip(&many) {
            let direct = lru_replay(t.events(), *c, false).unwrap();
            assert_eq!(s.misses, direct.misses, "C={c}");
            assert_eq!(s.total_requests, direct.total_requests);
            assert_eq!(s.first_request_misses, direct.first_request_misses);
        }
    }

    #[test]
    fn small_cases() {
        let ev: Vec<Request> = [0u64, 1, 0, 2, 1, 0]
            .iter()
            .enumerate()
            .map(|(i, &d)| Request {
                time: i as f64,
                doc: DocId(d),
            })
            .collect();
        // distances: 0 -> 1 (doc 1 between), 1 -> 2, 0 -> 2
        let s = lru_replay_many(&ev, &[1, 2, 3]).unwrap();
        assert_eq!(s.iter().map(|x| x.misses).collect::<Vec<_>>(), vec![6, 5, 3]);
        assert!(lru_replay_many(&ev, &[0]).is_err());
        assert!(lru_replay_many(&[], &[3]).unwrap()[0].total_requests == 0);
    }
}
