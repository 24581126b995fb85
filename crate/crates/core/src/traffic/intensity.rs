//! Laws of the per-document request intensity `λ(u) = ρ f(u / L)`.

use std::fmt;

use rand::Rng;

use super::lomax::LomaxParams;
use crate::error::{invalid, Result};

/// Law of one scalar mark (request rate `ρ` or lifespan `L`).
///
/// `Fixed` is a point mass; it is how deterministic intensities are
/// expressed throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarkLaw {
    Lomax(LomaxParams),
    Fixed(f64),
}

impl MarkLaw {
    pub fn lomax(alpha: f64, sigma: f64) -> Result<Self> {
        LomaxParams::new(alpha, sigma).map(MarkLaw::Lomax)
    }

    pub fn fixed(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(invalid(
                "mark",
                format!("fixed mark must be finite and > 0, got {value}"),
            ));
        }
        Ok(MarkLaw::Fixed(value))
    }

    pub fn mean(&self) -> f64 {
        match self {
            MarkLaw::Lomax(p) => p.mean(),
            MarkLaw::Fixed(v) => *v,
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        match self {
            MarkLaw::Lomax(p) => p.survival(x),
            MarkLaw::Fixed(v) => {
                if *v > x {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `E[(X - x)^+]`.
    pub fn excess_mean(&self, x: f64) -> f64 {
        match self {
            MarkLaw::Lomax(p) => p.excess_mean(x),
            MarkLaw::Fixed(v) => (v - x.max(0.0)).max(0.0),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            MarkLaw::Lomax(l) => l.quantile(p),
            MarkLaw::Fixed(v) => *v,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MarkLaw::Lomax(p) => p.sample(rng),
            MarkLaw::Fixed(v) => *v,
        }
    }

    /// Draws from the length-biased law `x P(dx) / E[X]`.
    pub fn sample_length_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MarkLaw::Lomax(p) => p.sample_length_biased(rng),
            MarkLaw::Fixed(v) => *v,
        }
    }
}

impl fmt::Display for MarkLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkLaw::Lomax(p) => write!(f, "lomax({}, {})", p.alpha(), p.sigma()),
            MarkLaw::Fixed(v) => write!(f, "fixed({v})"),
        }
    }
}

/// Tabulated unimodal shape `f` on `[0, ∞)`.
///
/// Piecewise linear on `nodes` (first node `0`) and continued beyond the last
/// node by `f(u_n) e^{-κ(u - u_n)}`. Total mass is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    tail_rate: f64,
    // Cumulative mass at each node.
    cumulative: Vec<f64>,
    peak: f64,
}

impl ShapeFunction {
    /// Builds the shape and checks positivity, unimodality and unit mass
    /// (to `1e-9`). `∫f²` and `∫|f'|` are finite by construction.
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, tail_rate: f64) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(invalid("shape", "need at least two nodes and one value per node"));
        }
        if nodes[0] != 0.0 {
            return Err(invalid("shape", "first node must be 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("shape", "nodes must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("shape", "values must be finite and strictly positive"));
        }
        if !(tail_rate > 0.0 && tail_rate.is_finite()) {
            return Err(invalid("shape", "tail rate must be finite and > 0"));
        }
        // Unimodal: non-decreasing then non-increasing.
        let mut falling = false;
        for w in values.windows(2) {
            if w[1] < w[0] {
                falling = true;
            } else if falling && w[1] > w[0] {
                return Err(invalid("shape", "values must be unimodal"));
            }
        }
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(0.0);
        for i in 1..nodes.len() {
            let seg = 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        let total = cumulative[cumulative.len() - 1] + values[values.len() - 1] / tail_rate;
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("shape", format!("mass must be 1, got {total}")));
        }
        let peak = values.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            nodes,
            values,
            tail_rate,
            cumulative,
            peak,
        })
    }

    /// Tabulates `g` on `nodes`, appends an exponential tail with rate
    /// `tail_rate` and rescales to unit mass.
    pub fn tabulate<G: Fn(f64) -> f64>(g: G, nodes: Vec<f64>, tail_rate: f64) -> Result<Self> {
        let values: Vec<f64> = nodes.iter().map(|&u| g(u)).collect();
        let mut mass = values[values.len() - 1] / tail_rate;
        for i in 1..nodes.len() {
            mass += 0.5 * (values[i] + values[i - 1]) * (nodes[i] - nodes[i - 1]);
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("shape", "tabulated mass must be finite and positive"));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Self::new(nodes, values, tail_rate)
    }

    /// `e^{-u}` tabulated on a uniform grid of `n` steps over `[0, span]`.
    pub fn exponential(span: f64, n: usize) -> Result<Self> {
        let nodes: Vec<f64> = (0..=n).map(|i| span * i as f64 / n as f64).collect();
        Self::tabulate(|u| (-u).exp(), nodes, 1.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    fn segment(&self, u: f64) -> Option<usize> {
        if u >= self.nodes[self.nodes.len() - 1] {
            return None;
        }
        Some(self.nodes.partition_point(|&x| x <= u).saturating_sub(1))
    }

    pub fn value(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        match self.segment(u) {
            Some(i) => {
                let w = (u - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
                self.values[i] + w * (self.values[i + 1] - self.values[i])
            }
            None => {
                let last = self.nodes.len() - 1;
                self.values[last] * (-self.tail_rate * (u - self.nodes[last])).exp()
            }
        }
    }

    /// Right derivative `f'(u)`.
    pub fn derivative(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        match self.segment(u) {
            Some(i) => (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i]),
            None => -self.tail_rate * self.value(u),
        }
    }

    /// `F(u) = ∫_0^u f`.
    pub fn cumulative(&self, u: f64) -> f64 {
        1.0 - self.upper_mass(u)
    }

    /// `1 - F(u)`, computed without cancellation in the tail.
    pub fn upper_mass(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        let last = self.nodes.len() - 1;
        match self.segment(u) {
            Some(i) => {
                let h = u - self.nodes[i];
                let slope = (self.values[i + 1] - self.values[i]) / (self.nodes[i + 1] - self.nodes[i]);
                let below = self.cumulative[i] + self.values[i] * h + 0.5 * slope * h * h;
                let total_tab = self.cumulative[last];
                (total_tab - below) + self.values[last] / self.tail_rate
            }
            None => self.values[last] / self.tail_rate * (-self.tail_rate * (u - self.nodes[last])).exp(),
        }
    }

    /// Smallest `u` with `1 - F(u) <= mass`.
    pub fn upper_tail_point(&self, mass: f64) -> f64 {
        if mass >= 1.0 {
            return 0.0;
        }
        let last = self.nodes.len() - 1;
        let tail_mass = self.values[last] / self.tail_rate;
        if mass <= tail_mass {
            return self.nodes[last] + (tail_mass / mass).ln() / self.tail_rate;
        }
        // Inside the tabulation: bisection on the monotone upper mass.
        let (mut lo, mut hi) = (0.0, self.nodes[last]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.upper_mass(mid) > mass {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Request-intensity profile family.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `λ(u) = ρ 1{0 <= u <= L}`.
    Box,
    /// `λ(u) = ρ f(u / L)`.
    ScaleFamily(ShapeFunction),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityKind {
    Box,
    ScaleFamily,
}

/// Law of the canonical intensity: independent `ρ` and `L` marks and a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalIntensity {
    pub rho_law: MarkLaw,
    pub lifespan_law: MarkLaw,
    pub shape: Shape,
}

impl CanonicalIntensity {
    pub fn boxed(rho_law: MarkLaw, lifespan_law: MarkLaw) -> Self {
        Self {
            rho_law,
            lifespan_law,
            shape: Shape::Box,
        }
    }

    pub fn scale_family(rho_law: MarkLaw, lifespan_law: MarkLaw, shape: ShapeFunction) -> Self {
        Self {
            rho_law,
            lifespan_law,
            shape: Shape::ScaleFamily(shape),
        }
    }

    /// Heavy-tailed Box model with `ρ ~ Lomax(1.9, 22.5)` and
    /// `L ~ Lomax(1.7, 0.07)`: boxes of mean height 25 and mean width 0.1.
    pub fn lomax_reference() -> Self {
        Self::boxed(
            MarkLaw::lomax(1.9, 22.5).expect("valid constants"),
            MarkLaw::lomax(1.7, 0.07).expect("valid constants"),
        )
    }

    pub fn kind(&self) -> IntensityKind {
        match self.shape {
            Shape::Box => IntensityKind::Box,
            Shape::ScaleFamily(_) => IntensityKind::ScaleFamily,
        }
    }

    /// `E[Λ̂] = E[ρ] E[L]`; the shape has unit mass in both kinds.
    pub fn mean_requests(&self) -> f64 {
        self.rho_law.mean() * self.lifespan_law.mean()
    }

    /// `λ(u)` for given marks.
    pub fn intensity(&self, rho: f64, lifespan: f64, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        match &self.shape {
            Shape::Box => {
                if u <= lifespan {
                    rho
                } else {
                    0.0
                }
            }
            Shape::ScaleFamily(f) => rho * f.value(u / lifespan),
        }
    }

    /// `Λ(u) = ∫_0^u λ`.
    pub fn mean_function(&self, rho: f64, lifespan: f64, u: f64) -> f64 {
        rho * lifespan - self.complementary_mean(rho, lifespan, u)
    }

    /// `Λ̄(u) = Λ̂ - Λ(u)`.
    pub fn complementary_mean(&self, rho: f64, lifespan: f64, u: f64) -> f64 {
        let u = u.max(0.0);
        match &self.shape {
            Shape::Box => rho * (lifespan - u).max(0.0),
            Shape::ScaleFamily(f) => rho * lifespan * f.upper_mass(u / lifespan),
        }
    }
}

/// Opaque document identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(pub u64);

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Marks of one document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentProfile {
    pub doc_id: DocId,
    pub arrival: f64,
    pub rho: f64,
    pub lifespan: f64,
}

impl DocumentProfile {
    pub fn new(doc_id: DocId, arrival: f64, rho: f64, lifespan: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(invalid("rho", format!("must be finite and > 0, got {rho}")));
        }
        if !(lifespan > 0.0 && lifespan.is_finite()) {
            return Err(invalid("lifespan", format!("must be finite and > 0, got {lifespan}")));
        }
        Ok(Self {
            doc_id,
            arrival,
            rho,
            lifespan,
        })
    }

    /// `Λ̂ = ρ L`.
    pub fn mean_requests(&self) -> f64 {
        self.rho * self.lifespan
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_shape_is_normalized() {
        let f = ShapeFunction::exponential(12.0, 1200).unwrap();
        assert!((f.cumulative(1e9) - 1.0).abs() < 1e-12);
        // Piecewise-linear approximation of e^{-u}.
        assert!((f.value(1.0) - (-1.0f64).exp()).abs() < 1e-4);
        assert!((f.upper_mass(2.0) - (-2.0f64).exp()).abs() < 1e-4);
        assert!(f.peak() > 0.99);
    }

    #[test]
    fn shape_rejects_bad_tables() {
        assert!(ShapeFunction::new(vec![0.0, 1.0], vec![0.5, 0.5], 1.0).is_ok());
        assert!(ShapeFunction::new(vec![0.0, 1.0], vec![0.5, 0.5], 2.0).is_err());
        assert!(ShapeFunction::new(vec![1.0, 2.0], vec![0.5, 0.5], 1.0).is_err());
        assert!(ShapeFunction::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.1, 0.3], 1.0).is_err());
        assert!(ShapeFunction::new(vec![0.0, 1.0], vec![0.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn upper_tail_point_inverts_mass() {
        let f = ShapeFunction::tabulate(
            |u| u * (-u).exp() + 0.01,
            (0..=100).map(|i| i as f64 * 0.1).collect(),
            1.0,
        )
        .unwrap();
        for &m in &[0.9, 0.5, 1e-3, 1e-9] {
            let u = f.upper_tail_point(m);
            assert!((f.upper_mass(u) - m).abs() < 1e-9 * m.max(1e-3), "{m}");
        }
    }

    #[test]
    fn box_mean_functions() {
        let model = CanonicalIntensity::boxed(MarkLaw::Fixed(2.0), MarkLaw::Fixed(3.0));
        assert_eq!(model.intensity(2.0, 3.0, 1.0), 2.0);
        assert_eq!(model.intensity(2.0, 3.0, 3.5), 0.0);
        assert_eq!(model.mean_function(2.0, 3.0, 1.0), 2.0);
        assert_eq!(model.complementary_mean(2.0, 3.0, 1.0), 4.0);
        assert_eq!(model.complementary_mean(2.0, 3.0, 10.0), 0.0);
        assert_eq!(model.kind(), IntensityKind::Box);
    }

    #[test]
    fn reference_model_mean_requests() {
        let m = CanonicalIntensity::lomax_reference();
        assert!((m.mean_requests() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn profile_validation() {
        assert!(DocumentProfile::new(DocId(1), 0.0, 0.0, 1.0).is_err());
        assert!(DocumentProfile::new(DocId(1), 0.0, 1.0, -1.0).is_err());
        assert_eq!(
            DocumentProfile::new(DocId(1), 0.0, 5.0, 2.0).unwrap().mean_requests(),
            10.0
        );
    }
}
