//! Monte Carlo estimate of the TTL miss function.

use rayon::prelude::*;

use crate::analytics::{AnalyticModel, MissFunction};
use crate::error::{invalid, Result};
use crate::numerics::QuadratureConfig;
use crate::rng;
use crate::traffic::{sample_document_requests, CanonicalIntensity, DocId, DocumentProfile};

use super::{OracleReport, Welford};

const CHUNKS: u64 = 256;

/// Misses of a single TTL-`t` document: its first request plus every gap
/// longer than `t`.
pub(crate) fn ttl_misses_of(times: &[f64], t: f64) -> u64 {
    if times.is_empty() {
        return 0;
    }
    1 + times.windows(2).filter(|w| w[1] - w[0] > t).count() as u64
}

/// Samples `n_samples` documents, counts their TTL misses and compares the
/// mean with the analytic `m(t)`.
///
/// Samples are split into fixed chunks with their own streams, so the result
/// does not depend on the thread count.
pub fn mc_ttl_misses(
    model: &CanonicalIntensity,
    t: f64,
    n_samples: u64,
    seed: u64,
    q: &QuadratureConfig,
) -> Result<OracleReport> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    if n_samples < 1000 {
        return Err(invalid("n_samples", format!("must be >= 1000, got {n_samples}")));
    }
    let target = AnalyticModel::from_intensity(model).m(t, q)?;
    let acc = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let lo = n_samples * c / CHUNKS;
            let hi = n_samples * (c + 1) / CHUNKS;
            let mut r = rng::stream(seed, c);
            let mut w = Welford::new();
            for i in lo..hi {
                let rho = model.rho_law.sample(&mut r);
                let lifespan = model.lifespan_law.sample(&mut r);
                let profile = DocumentProfile {
                    doc_id: DocId(i),
                    arrival: 0.0,
                    rho,
                    lifespan,
                };
                let times = sample_document_requests(&profile, model, &mut r);
                w.push(ttl_misses_of(&times, t) as f64);
            }
            w
        })
        .reduce(Welford::new, |a, b| a.merge(&b));
    Ok(OracleReport::new(&acc, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::MarkLaw;

    #[test]
    fn miss_counting() {
        assert_eq!(ttl_misses_of(&[], 1.0), 0);
        assert_eq!(ttl_misses_of(&[0.0, 0.5, 2.0, 2.1], 1.0), 2);
        assert_eq!(ttl_misses_of(&[0.0, 0.5, 2.0, 2.1], 0.0), 4);
    }

    #[test]
    fn unit_box_against_closed_form() {
        let model = CanonicalIntensity::boxed(MarkLaw::Fixed(1.0), MarkLaw::Fixed(1.0));
        let q = QuadratureConfig::default();
        let r = mc_ttl_misses(&model, 0.5, 200_000, 7, &q).unwrap();
        assert!((r.target - 0.696734670143683).abs() < 1e-14);
        assert!(r.passes(3.0), "{r}");
        let r0 = mc_ttl_misses(&model, 0.0, 200_000, 8, &q).unwrap();
        assert!((r0.target - 1.0).abs() < 1e-15);
        assert!(r0.passes(4.0), "{r0}");
        let big = mc_ttl_misses(&model, 1e3, 200_000, 9, &q).unwrap();
        assert!((big.target - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!(big.passes(4.0), "{big}");
    }

    #[test]
    fn rejects_small_samples() {
        let model = CanonicalIntensity::lomax_reference();
        assert!(mc_ttl_misses(&model, 0.1, 10, 1, &QuadratureConfig::default()).is_err());
    }
}
