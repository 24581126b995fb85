//! `key = value` experiment files.
//!
//! One assignment per line, `#` starts a comment, lists are comma separated.
//!
//! | key | value | default |
//! |---|---|---|
//! | `gamma_list` | catalog rates | required |
//! | `capacity_list` | integer cache sizes | one of the two |
//! | `theta_list` | mean sojourn times `C / γ` | one of the two |
//! | `rho` | `lomax(α, σ)` or `fixed(x)` | `lomax(1.9, 22.5)` |
//! | `lifespan` | `lomax(α, σ)` or `fixed(x)` | `lomax(1.7, 0.07)` |
//! | `shape` | `box` or `exponential` | `box` |
//! | `replications` | count | `1` |
//! | `seed` | unsigned integer | `0` |
//! | `sim_time` | `auto` or a duration | `auto` |
//! | `sim_time_cap` | upper bound for `auto` | `20000` |
//! | `sizing_threshold` | stable-law accuracy target | `1e-3` |
//! | `margin` | `stationary`, `auto` or a duration | `stationary` (Box), `auto` |
//! | `exact` | compute the Gamma-quadrature hit ratio | `true` |
//! | `rel_tol`, `abs_tol`, `max_depth`, `tail_mass_cut` | quadrature | library defaults |
//! | `output` | CSV path | none |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::numerics::QuadratureConfig;
use crate::traffic::{CanonicalIntensity, MarginPolicy, MarkLaw, ShapeFunction};

pub const KEYS: &[&str] = &[
    "gamma_list",
    "capacity_list",
    "theta_list",
    "rho",
    "lifespan",
    "shape",
    "replications",
    "seed",
    "sim_time",
    "sim_time_cap",
    "sizing_threshold",
    "margin",
    "exact",
    "rel_tol",
    "abs_tol",
    "max_depth",
    "tail_mass_cut",
    "output",
];

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Capacities(Vec<usize>),
    Thetas(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimTime {
    Auto,
    Fixed(f64),
}

/// One `(γ, C)` point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub gamma_index: usize,
    pub gamma: f64,
    pub capacity: usize,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub gamma_list: Vec<f64>,
    pub axis: SweepAxis,
    pub model: CanonicalIntensity,
    pub replications: usize,
    pub seed: u64,
    pub sim_time: SimTime,
    pub sim_time_cap: f64,
    pub sizing_threshold: f64,
    pub margin: MarginPolicy,
    pub exact: bool,
    pub quadrature: QuadratureConfig,
    pub output_path: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Raw `key = value` assignments; a repeated key keeps its last value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignments(BTreeMap<String, String>);

impl Assignments {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", i + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(config_err(format!("line {}: unknown key `{k}`", i + 1)));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(config_err(format!("unknown key `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| config_err(format!("{key}: `{v}` is not a number")))
}

fn parse_list<T, F: Fn(&str) -> Result<T>>(key: &str, v: &str, f: F) -> Result<Vec<T>> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(config_err(format!("{key}: empty list")));
    }
    items.into_iter().map(f).collect()
}

fn parse_law(key: &str, v: &str) -> Result<MarkLaw> {
    let v = v.trim();
    let args = |name: &str| -> Option<Vec<&str>> {
        let inner = v.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
        Some(inner.split(',').map(str::trim).collect())
    };
    let law = if let Some(a) = args("lomax") {
        if a.len() != 2 {
            return Err(config_err(format!("{key}: lomax takes (alpha, sigma)")));
        }
        MarkLaw::lomax(parse_f64(key, a[0])?, parse_f64(key, a[1])?)
    } else if let Some(a) = args("fixed") {
        if a.len() != 1 {
            return Err(config_err(format!("{key}: fixed takes one value")));
        }
        MarkLaw::fixed(parse_f64(key, a[0])?)
    } else {
        MarkLaw::fixed(parse_f64(key, v)?)
    };
    law.map_err(|e| config_err(format!("{key}: {e}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(format!("{key}: `{v}` is not a boolean"))),
    }
}

/// The request model given by `rho`, `lifespan` and `shape`.
pub fn model_from(a: &Assignments) -> Result<CanonicalIntensity> {
    let rho = a.get("rho").map(|v| parse_law("rho", v)).transpose()?;
    let lifespan = a.get("lifespan").map(|v| parse_law("lifespan", v)).transpose()?;
    let reference = CanonicalIntensity::lomax_reference();
    let rho = rho.unwrap_or(reference.rho_law);
    let lifespan = lifespan.unwrap_or(reference.lifespan_law);
    Ok(match a.get("shape").unwrap_or("box") {
        "box" => CanonicalIntensity::boxed(rho, lifespan),
        "exponential" => CanonicalIntensity::scale_family(
            rho,
            lifespan,
            ShapeFunction::exponential(40.0, 4000).map_err(|e| config_err(e.to_string()))?,
        ),
        other => return Err(config_err(format!("shape: unknown shape `{other}`"))),
    })
}

/// Quadrature tolerances given by `rel_tol`, `abs_tol`, `max_depth` and
/// `tail_mass_cut`.
pub fn quadrature_from(a: &Assignments) -> Result<QuadratureConfig> {
    let positive = |key: &str, default: f64| -> Result<f64> {
        match a.get(key) {
            None => Ok(default),
            Some(v) => {
                let x = parse_f64(key, v)?;
                if !(x > 0.0) || !x.is_finite() {
                    return Err(config_err(format!("{key} must be finite and > 0")));
                }
                Ok(x)
            }
        }
    };
    let d = QuadratureConfig::default();
    let quadrature = QuadratureConfig {
        rel_tol: positive("rel_tol", d.rel_tol)?,
        abs_tol: positive("abs_tol", d.abs_tol)?,
        max_depth: match a.get("max_depth") {
            None => d.max_depth,
            Some(v) => v
                .parse::<u32>()
                .map_err(|_| config_err(format!("max_depth: `{v}` is not an integer")))?,
        },
        tail_mass_cut: positive("tail_mass_cut", d.tail_mass_cut)?,
    };
    quadrature.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(quadrature)
}

/// The `margin` key; stationary by default for the Box model.
pub fn margin_from(a: &Assignments, model: &CanonicalIntensity) -> Result<MarginPolicy> {
    Ok(match a.get("margin") {
        None if matches!(model.shape, crate::traffic::Shape::Box) => MarginPolicy::Stationary,
        None | Some("auto") => MarginPolicy::Auto,
        Some("stationary") => MarginPolicy::Stationary,
        Some(v) => MarginPolicy::Fixed(parse_f64("margin", v)?),
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_assignments(&Assignments::parse(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_assignments(a: &Assignments) -> Result<Self> {
        let gamma_list = parse_list(
            "gamma_list",
            a.get("gamma_list")
                .ok_or_else(|| config_err("gamma_list is required"))?,
            |s| {
                let g = parse_f64("gamma_list", s)?;
                if !(g > 0.0) || !g.is_finite() {
                    return Err(config_err(format!("gamma_list: {g} must be finite and > 0")));
                }
                Ok(g)
            },
        )?;
        let axis = match (a.get("capacity_list"), a.get("theta_list")) {
            (Some(_), Some(_)) => return Err(config_err("give capacity_list or theta_list, not both")),
            (None, None) => return Err(config_err("one of capacity_list or theta_list is required")),
            (Some(c), None) => SweepAxis::Capacities(parse_list("capacity_list", c, |s| {
                let v = s
                    .parse::<usize>()
                    .map_err(|_| config_err(format!("capacity_list: `{s}` is not a positive integer")))?;
                if v == 0 {
                    return Err(config_err("capacity_list: capacities must be >= 1"));
                }
                Ok(v)
            })?),
            (None, Some(t)) => SweepAxis::Thetas(parse_list("theta_list", t, |s| {
                let v = parse_f64("theta_list", s)?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(config_err(format!("theta_list: {v} must be finite and > 0")));
                }
                Ok(v)
            })?),
        };
        let model = model_from(a)?;
        let replications = match a.get("replications") {
            None => 1,
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|&r| r >= 1)
                .ok_or_else(|| config_err(format!("replications: `{v}` must be an integer >= 1")))?,
        };
        let seed = match a.get("seed") {
            None => 0,
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| config_err(format!("seed: `{v}` is not an unsigned integer")))?,
        };
        let sim_time = match a.get("sim_time") {
            None | Some("auto") => SimTime::Auto,
            Some(v) => {
                let s = parse_f64("sim_time", v)?;
                if !(s > 0.0) || !s.is_finite() {
                    return Err(config_err("sim_time must be finite and > 0"));
                }
                SimTime::Fixed(s)
            }
        };
        let positive = |key: &str, default: f64| -> Result<f64> {
            match a.get(key) {
                None => Ok(default),
                Some(v) => {
                    let x = parse_f64(key, v)?;
                    if !(x > 0.0) || !x.is_finite() {
                        return Err(config_err(format!("{key} must be finite and > 0")));
                    }
                    Ok(x)
                }
            }
        };
        let sim_time_cap = positive("sim_time_cap", 20_000.0)?;
        let sizing_threshold = positive("sizing_threshold", 1e-3)?;
        let margin = margin_from(a, &model)?;
        let exact = a
            .get("exact")
            .map(|v| parse_bool("exact", v))
            .transpose()?
            .unwrap_or(true);
        let quadrature = quadrature_from(a)?;
        let config = Self {
            gamma_list,
            axis,
            model,
            replications,
            seed,
            sim_time,
            sim_time_cap,
            sizing_threshold,
            margin,
            exact,
            quadrature,
            output_path: a.get("output").map(PathBuf::from),
        };
        config.cells()?;
        Ok(config)
    }

    /// The sweep grid, ordered by `γ` then `C`. A `θ` whose `γ θ` is not an
    /// integer (to a relative `1e-9`) is a configuration error.
    pub fn cells(&self) -> Result<Vec<SweepCell>> {
        let mut out = Vec::new();
        for (gi, &gamma) in self.gamma_list.iter().enumerate() {
            match &self.axis {
                SweepAxis::Capacities(cs) => {
                    for &c in cs {
                        out.push(SweepCell {
                            gamma_index: gi,
                            gamma,
                            capacity: c,
                            theta: c as f64 / gamma,
                        });
                    }
                }
                SweepAxis::Thetas(ts) => {
                    for &theta in ts {
                        let raw = gamma * theta;
                        let c = raw.round();
                        if c < 1.0 || (raw - c).abs() > 1e-9 * raw {
                            return Err(config_err(format!(
                                "theta {theta} at gamma {gamma} gives C = {raw}, not a positive integer"
                            )));
                        }
                        out.push(SweepCell {
                            gamma_index: gi,
                            gamma,
                            capacity: c as usize,
                            theta,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.capacity.cmp(&b.capacity)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
        # small-cache sweep
        gamma_list = 50
        capacity_list = 1, 2, 3   # small caches
        replications = 4
        seed = 42
        sim_time = 500
        rho = lomax(1.9, 22.5)
        lifespan = fixed(0.1)
    ";

    #[test]
    fn parses_documented_keys() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.gamma_list, vec![50.0]);
        assert_eq!(c.axis, SweepAxis::Capacities(vec![1, 2, 3]));
        assert_eq!(c.replications, 4);
        assert_eq!(c.seed, 42);
        assert_eq!(c.sim_time, SimTime::Fixed(500.0));
        assert_eq!(c.model.lifespan_law, MarkLaw::Fixed(0.1));
        assert_eq!(c.margin, MarginPolicy::Stationary);
        assert!(c.exact);
        let cells = c.cells().unwrap();
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[1].theta, 2.0 / 50.0);
    }

    #[test]
    fn theta_axis_derives_integer_capacities() {
        let c = ExperimentConfig::parse("gamma_list = 500, 50\ntheta_list = 0.02, 0.2").unwrap();
        let cells = c.cells().unwrap();
        let got: Vec<(f64, usize)> = cells.iter().map(|c| (c.gamma, c.capacity)).collect();
        assert_eq!(got, vec![(50.0, 1), (50.0, 10), (500.0, 10), (500.0, 100)]);
        assert!(ExperimentConfig::parse("gamma_list = 50\ntheta_list = 0.011").is_err());
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "capacity_list = 1",
            "gamma_list = 50",
            "gamma_list = 50\ncapacity_list =",
            "gamma_list = 50\ncapacity_list = 1\ntheta_list = 0.1",
            "gamma_list = 50\ncapacity_list = 0",
            "gamma_list = -5\ncapacity_list = 1",
            "gamma_list = 50\ncapacity_list = 1\nreplications = 0",
            "gamma_list = 50\ncapacity_list = 1\ncolour = blue",
            "gamma_list = 50\ncapacity_list = 1\nrho = lomax(0.5, 1)",
            "gamma_list = 50\ncapacity_list = 1\nshape = triangle",
            "gamma_list = 50\ncapacity_list = 1\ntail_mass_cut = 0.1",
            "gamma_list 50",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut a = Assignments::parse(SAMPLE).unwrap();
        a.set("seed", "7").unwrap();
        assert!(a.set("nonsense", "1").is_err());
        let c = ExperimentConfig::from_assignments(&a).unwrap();
        assert_eq!(c.seed, 7);
    }
}
