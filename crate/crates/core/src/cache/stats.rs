use std::collections::HashMap;
use std::io::Write;

use crate::error::Result;
use crate::traffic::trace::format_decimal;
use crate::traffic::DocId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DocTally {
    pub requests: u64,
    pub misses: u64,
}

/// Counters of one cache replay.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimStats {
    pub total_requests: u64,
    pub misses: u64,
    /// First requests of documents; always misses.
    pub first_request_misses: u64,
    /// Per-document tallies, when requested.
    pub per_doc: Option<HashMap<DocId, DocTally>>,
}

impl SimStats {
    pub fn hits(&self) -> u64 {
        self.total_requests - self.misses
    }

    pub fn hit_ratio(&self) -> f64 {
        if self.total_requests == 0 {
            return 0.0;
        }
        self.hits() as f64 / self.total_requests as f64
    }

    pub fn miss_ratio(&self) -> f64 {
        1.0 - self.hit_ratio()
    }

    /// Misses per distinct requested document.
    pub fn misses_per_document(&self) -> f64 {
        if self.first_request_misses == 0 {
            return 0.0;
        }
        self.misses as f64 / self.first_request_misses as f64
    }

    /// Sums counters of independent runs; per-document tallies are kept only
    /// if both sides carry them.
    pub fn merge(mut self, other: &SimStats) -> SimStats {
        self.total_requests += other.total_requests;
        self.misses += other.misses;
        self.first_request_misses += other.first_request_misses;
        self.per_doc = match (self.per_doc.take(), &other.per_doc) {
            (Some(mut a), Some(b)) => {
                for (k, v) in b {
                    let e = a.entry(*k).or_default();
                    e.requests += v.requests;
                    e.misses += v.misses;
                }
                Some(a)
            }
            _ => None,
        };
        self
    }
}

/// Writes `eviction_time,total_requests,misses,hit_ratio` rows for TTL runs.
pub fn write_ttl_stats_csv<W: Write>(writer: W, rows: &[(f64, &SimStats)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["eviction_time", "total_requests", "misses", "hit_ratio"])?;
    for (t, s) in rows {
        w.write_record([
            format_decimal(*t),
            s.total_requests.to_string(),
            s.misses.to_string(),
            format!("{:.12}", s.hit_ratio()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `capacity,total_requests,misses,hit_ratio` rows; per-document rows
/// `capacity,doc_id,requests,misses` follow when `per_doc` is set.
pub fn write_stats_csv<W: Write>(writer: W, rows: &[(usize, &SimStats)], per_doc: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["capacity", "total_requests", "misses", "hit_ratio"])?;
    for (cap, s) in rows {
        w.write_record([
            cap.to_string(),
            s.total_requests.to_string(),
            s.misses.to_string(),
            format!("{:.12}", s.hit_ratio()),
        ])?;
    }
    w.flush()?;
    let mut inner = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    if per_doc {
        let mut w = csv::WriterBuilder::new().from_writer(&mut inner);
        w.write_record(["capacity", "doc_id", "requests", "misses"])?;
        for (cap, s) in rows {
            if let Some(map) = &s.per_doc {
                let mut docs: Vec<_> = map.iter().collect();
                docs.sort_by_key(|(d, _)| **d);
                for (d, t) in docs {
                    w.write_record([
                        cap.to_string(),
                        d.0.to_string(),
                        t.requests.to_string(),
                        t.misses.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}
