//! Globally adaptive Gauss–Kronrod (10/21 point) integration.
//!
//! The interval with the largest local error estimate is bisected until the
//! summed error meets `max(abs_tol, rel_tol * |I|)`. The local error uses the
//! QUADPACK scaling of `|K21 - G10|`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

/// Tolerances shared by every integral in the analytics and oracle modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Probability mass beyond which heavy-tailed mark integrals are split
    /// (and dropped when the tail is provably below tolerance).
    pub tail_mass_cut: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_depth: 48,
            tail_mass_cut: 1e-9,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if self.max_depth == 0 {
            return Err(invalid("max_depth", "must be >= 1"));
        }
        if !(self.tail_mass_cut > 0.0 && self.tail_mass_cut < 1e-6) {
            return Err(invalid("tail_mass_cut", "must lie in (0, 1e-6)"));
        }
        Ok(())
    }

    /// Tighter tolerances for integrals nested inside another integrand.
    pub fn nested(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

/// Value of an integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
}

impl Integral {
    pub const ZERO: Integral = Integral {
        value: 0.0,
        abs_error: 0.0,
    };

    pub fn exact(value: f64) -> Self {
        Self { value, abs_error: 0.0 }
    }
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, rhs: Integral) -> Integral {
        Integral {
            value: self.value + rhs.value,
            abs_error: self.abs_error + rhs.abs_error,
        }
    }
}

impl std::ops::Mul<f64> for Integral {
    type Output = Integral;
    fn mul(self, k: f64) -> Integral {
        Integral {
            value: self.value * k,
            abs_error: self.abs_error * k.abs(),
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_059,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_114,
    0.562_757_134_668_604_683_339_000_099_272,
    0.433_395_394_129_247_190_799_265_943_165,
    0.294_392_862_701_460_198_131_126_603_103,
    0.148_874_338_981_631_210_884_826_001_129,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_244,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_325,
    0.123_491_976_262_065_851_077_600_525_138,
    0.134_709_217_311_473_325_928_054_001_771,
    0.142_775_938_577_060_080_797_094_273_138,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_389,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_657,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centr = 0.5 * (a + b);
    let hlgth = 0.5 * (b - a);
    let fc = f(centr);
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = hlgth * XGK[j];
        let f1 = f(centr - dx);
        let f2 = f(centr + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * hlgth;
    resabs *= hlgth.abs();
    resasc *= hlgth.abs();
    let mut abserr = ((resk - resg) * hlgth).abs();
    if resasc != 0.0 && abserr != 0.0 {
        abserr = resasc * (200.0 * abserr / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        abserr = abserr.max(50.0 * f64::EPSILON * resabs);
    }
    (result, abserr)
}

/// Integrates `f` over `[a, b]` (`a <= b`). The integrand is never evaluated
/// at the endpoints, so integrable endpoint singularities are admissible.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("bounds", format!("non-finite interval [{a}, {b}]")));
    }
    if b < a {
        return integrate(f, b, a, cfg).map(|i| i * -1.0);
    }
    if a == b {
        return Ok(Integral::ZERO);
    }
    let (value, error) = gk21(&mut f, a, b);
    if !value.is_finite() {
        return Err(Error::ToleranceNotMet {
            achieved: f64::INFINITY,
            target: cfg.abs_tol,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        depth: 0,
    });
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.depth >= cfg.max_depth || !(worst.a < mid && mid < worst.b) {
            // The worst piece cannot be refined further.
            heap.push(worst);
            let achieved: f64 = heap.iter().map(|s| s.error).sum();
            return Err(Error::ToleranceNotMet { achieved, target });
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::ToleranceNotMet {
                achieved: f64::INFINITY,
                target,
            });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        let depth = worst.depth + 1;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().map(|s| s.error).sum::<f64>().max(total_err.min(f64::MAX));
    Ok(Integral { value, abs_error })
}

/// [`integrate`] for integrands that can fail (typically because they
/// contain a nested integral). The first failure aborts the result.
pub fn integrate_fallible<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure: Option<Error> = None;
    let r = integrate(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            match f(x) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        a,
        b,
        cfg,
    );
    match failure {
        Some(e) => Err(e),
        None => r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, &cfg()).unwrap();
        assert!((r.value - (9.0 - 1.5 + 6.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_and_oscillatory() {
        let r = integrate(|x| (-x).exp(), 0.0, 30.0, &cfg()).unwrap();
        assert!((r.value - (1.0 - (-30.0f64).exp())).abs() < 1e-12);
        let r = integrate(|x| (50.0 * x).sin(), 0.0, std::f64::consts::PI, &cfg()).unwrap();
        assert!(r.value.abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2; plain bisection converges like sqrt(h) here.
        let loose = QuadratureConfig {
            rel_tol: 1e-7,
            abs_tol: 1e-9,
            ..cfg()
        };
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &loose).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let r = integrate(|x| x, 1.0, 0.0, &cfg()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
        assert_eq!(integrate(|x| x, 2.0, 2.0, &cfg()).unwrap().value, 0.0);
    }

    #[test]
    fn divergent_integral_is_reported() {
        let tight = QuadratureConfig { max_depth: 12, ..cfg() };
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = QuadratureConfig {
            tail_mass_cut: 1e-3,
            ..cfg()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { rel_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }
}
