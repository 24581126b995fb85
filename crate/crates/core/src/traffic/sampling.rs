//! Catalog arrivals and per-document request sampling.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::intensity::{CanonicalIntensity, DocumentProfile, Shape};
use crate::error::{invalid, Result};

/// Requests of a scale-family document are dropped beyond the point where the
/// remaining expected count `Λ̄` falls below this value.
pub const DEFAULT_TRUNCATION: f64 = 1e-6;

/// Draws a Poisson count; the sampler is avoided for tiny means.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean < 1e-9 {
        return u64::from(rng.random::<f64>() < mean);
    }
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng) as u64,
        // Above the sampler's range a normal approximation is exact to f64.
        Err(_) => {
            let z: f64 = rand_distr::StandardNormal.sample(rng);
            (mean + mean.sqrt() * z).round().max(0.0) as u64
        }
    }
}

/// Homogeneous Poisson arrivals of rate `gamma` on `window`, sorted.
pub fn sample_catalog<R: Rng + ?Sized>(gamma: f64, window: (f64, f64), rng: &mut R) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(
            "gamma",
            format!("catalog rate must be finite and > 0, got {gamma}"),
        ));
    }
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(invalid("window", format!("[{a}, {b}] is not a valid window")));
    }
    let n = sample_poisson(gamma * (b - a), rng);
    let mut times: Vec<f64> = (0..n).map(|_| a + (b - a) * rng.random::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    Ok(times)
}

/// Uniform sorted points of a homogeneous Poisson process on `[lo, hi]`.
fn homogeneous<R: Rng + ?Sized>(rate: f64, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    if hi <= lo {
        return Vec::new();
    }
    let n = sample_poisson(rate * (hi - lo), rng);
    let mut t: Vec<f64> = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    t.sort_by(f64::total_cmp);
    t
}

/// All request times of one document, sorted.
pub fn sample_document_requests<R: Rng + ?Sized>(
    profile: &DocumentProfile,
    model: &CanonicalIntensity,
    rng: &mut R,
) -> Vec<f64> {
    sample_document_requests_in(
        profile,
        model,
        (f64::NEG_INFINITY, f64::INFINITY),
        DEFAULT_TRUNCATION,
        rng,
    )
}

/// Request times of one document restricted to `window`, sorted.
///
/// Box: homogeneous Poisson of rate `ρ` on `[a, a + L] ∩ window`.
/// Scale family: thinning of a rate-`ρ max f` process on
/// `[a, a + L u*] ∩ window`, where `Λ̄` beyond `a + L u*` is below
/// `truncation`.
pub fn sample_document_requests_in<R: Rng + ?Sized>(
    profile: &DocumentProfile,
    model: &CanonicalIntensity,
    window: (f64, f64),
    truncation: f64,
    rng: &mut R,
) -> Vec<f64> {
    let a = profile.arrival;
    let (rho, life) = (profile.rho, profile.lifespan);
    match &model.shape {
        Shape::Box => homogeneous(rho, a.max(window.0), (a + life).min(window.1), rng),
        Shape::ScaleFamily(f) => {
            let span = f.upper_tail_point((truncation / (rho * life)).min(1.0));
            let lo = a.max(window.0);
            let hi = (a + life * span).min(window.1);
            let majorant = rho * f.peak();
            homogeneous(majorant, lo, hi, rng)
                .into_iter()
                .filter(|&t| rng.random::<f64>() * f.peak() < f.value((t - a) / life))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::traffic::intensity::{DocId, MarkLaw, ShapeFunction};

    #[test]
    fn catalog_rejects_bad_rate_and_handles_empty_window() {
        let mut r = rng::stream(1, 0);
        assert!(sample_catalog(0.0, (0.0, 1.0), &mut r).is_err());
        assert!(sample_catalog(-1.0, (0.0, 1.0), &mut r).is_err());
        assert!(sample_catalog(5.0, (3.0, 3.0), &mut r).unwrap().is_empty());
    }

    #[test]
    fn catalog_moments() {
        // γ = 10 on a window of length 100: mean and variance 1000.
        let reps = 2000;
        let counts: Vec<f64> = (0..reps)
            .map(|i| {
                sample_catalog(10.0, (0.0, 100.0), &mut rng::stream(3, i))
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((mean - 1000.0).abs() < 4.0 * (1000.0 / reps as f64).sqrt());
        // Var of the sample variance ≈ 2σ⁴/n for near-normal counts.
        assert!((var - 1000.0).abs() < 4.0 * 1000.0 * (2.0 / reps as f64).sqrt());
        let t = sample_catalog(10.0, (0.0, 100.0), &mut rng::stream(3, 0)).unwrap();
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.iter().all(|&x| (0.0..=100.0).contains(&x)));
    }

    #[test]
    fn catalog_count_tail() {
        // γ = 50, length 200: count within 10000 ± 400.
        for i in 0..200 {
            let n = sample_catalog(50.0, (0.0, 200.0), &mut rng::stream(4, i))
                .unwrap()
                .len() as f64;
            assert!((n - 10_000.0).abs() <= 400.0);
        }
    }

    #[test]
    fn box_counts_are_poisson_rho_l() {
        let model = CanonicalIntensity::boxed(MarkLaw::Fixed(5.0), MarkLaw::Fixed(2.0));
        let prof = DocumentProfile::new(DocId(0), 0.0, 5.0, 2.0).unwrap();
        let mut r = rng::stream(5, 0);
        let n = 100_000;
        let total: usize = (0..n)
            .map(|_| sample_document_requests(&prof, &model, &mut r).len())
            .sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 10.0).abs() < 3.0 * (10.0 / n as f64).sqrt(), "{mean}");

        let prof1 = DocumentProfile::new(DocId(0), 0.0, 1.0, 1.0).unwrap();
        let empty = (0..n)
            .filter(|_| sample_document_requests(&prof1, &model, &mut r).is_empty())
            .count();
        let p0 = (-1.0f64).exp();
        let p = empty as f64 / n as f64;
        assert!((p - p0).abs() < 4.0 * (p0 * (1.0 - p0) / n as f64).sqrt());
    }

    #[test]
    fn tiny_rate_is_almost_surely_empty() {
        let model = CanonicalIntensity::boxed(MarkLaw::Fixed(1.0), MarkLaw::Fixed(1.0));
        let prof = DocumentProfile::new(DocId(0), 0.0, f64::MIN_POSITIVE, 1.0).unwrap();
        let mut r = rng::stream(6, 0);
        assert!((0..1000).all(|_| sample_document_requests(&prof, &model, &mut r).is_empty()));
    }

    #[test]
    fn thinning_matches_scale_family_mean() {
        let f = ShapeFunction::exponential(20.0, 2000).unwrap();
        let model = CanonicalIntensity::scale_family(MarkLaw::Fixed(3.0), MarkLaw::Fixed(0.5), f.clone());
        let prof = DocumentProfile::new(DocId(0), 1.0, 3.0, 0.5).unwrap();
        let mut r = rng::stream(7, 0);
        let n = 50_000;
        let mut total = 0usize;
        let mut before_half = 0usize;
        for _ in 0..n {
            let t = sample_document_requests(&prof, &model, &mut r);
            assert!(t.iter().all(|&x| x >= 1.0));
            total += t.len();
            before_half += t.iter().filter(|&&x| x <= 1.25).count();
        }
        let mean = total as f64 / n as f64;
        assert!((mean - 1.5).abs() < 4.0 * (1.5 / n as f64).sqrt(), "{mean}");
        // Λ(0.25) = ρ L F(0.25 / L)
        let expect = 1.5 * f.cumulative(0.5);
        let got = before_half as f64 / n as f64;
        assert!(
            (got - expect).abs() < 4.0 * (expect / n as f64).sqrt(),
            "{got} vs {expect}"
        );
    }
}
