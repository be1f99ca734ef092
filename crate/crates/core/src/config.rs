//! Run configuration: a flat file of typed `section.key = value` lines.
//!
//! The syntax is the dotted-key subset of TOML:
//!
//! ```text
//! # comment
//! curve.kind = "mollified_polyline"
//! curve.k1 = -0.2
//! wave.u_minus = -1.0
//! experiment.times = [4, 8, 16]
//! ```
//!
//! `[section]` headers are accepted too and flatten to the same keys.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{Error, Result};
use crate::exactwave::RiemannData;
use crate::geometry::{Curve, CurveKind};
use crate::profiles::ProfileGrid;
use crate::solver::{Advection, Bump, Grid2D, Scheme};

/// Keys that change where or how fast a run happens but not what it
/// computes; they are left out of the hash.
const UNHASHED: [&str; 2] = ["out", "workers"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    Original,
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Exact,
    Viscous,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub coords: Coords,
    pub advection: Advection,
    pub scheme: Scheme,
    pub cfl: f64,
    pub boundary: BoundaryKind,
    pub boundary_refresh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Snapshot and sampling times.
    pub times: Vec<f64>,
    pub fit_window: (f64, f64),
    /// Largest admissible fitted exponent of the main-theorem run.
    pub target_exponent: f64,
    /// Nodes per side of sampled `u^R` comparisons and dumps.
    pub samples: usize,
    /// `x`-range of sampled comparisons.
    pub sample_x: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve: Curve,
    /// Second curve of `compare-curves`.
    pub curve2: Option<Curve>,
    pub data: RiemannData,
    pub grid: Option<Grid2D>,
    pub solver: SolverSpec,
    pub perturbation: Option<Bump>,
    pub experiment: ExperimentSpec,
    pub profile: ProfileGrid,
    pub out: PathBuf,
    pub workers: usize,
    pub seed: u64,
    /// SHA-256 of the canonical key-value listing.
    pub hash: String,
}

/// Flattened key-value view with usage tracking.
struct Fields {
    map: BTreeMap<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Fields {
    fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let span = e.span().map(|s| format!(" (byte {})", s.start)).unwrap_or_default();
            Error::config("<file>", format!("{}{span}", e.message()))
        })?;
        let mut map = BTreeMap::new();
        flatten("", &Value::Table(table), &mut map);
        Ok(Self { map, used: RefCell::new(BTreeSet::new()) })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        let v = self.map.get(key);
        if v.is_some() {
            self.used.borrow_mut().insert(key.to_string());
        }
        v
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.map.keys().any(|k| k.starts_with(prefix))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::config(key, format!("expected a number, found {}", v.type_str()))),
        }
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| missing(key))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(Error::config(key, format!("expected a non-negative integer, found {v}"))),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        self.usize_opt(key)?.ok_or_else(|| missing(key))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    fn str_opt(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(Error::config(key, format!("expected a string, found {}", v.type_str()))),
        }
    }

    fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str> {
        Ok(self.str_opt(key)?.unwrap_or(default))
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(n) => Ok(*n as f64),
                    _ => Err(Error::config(format!("{key}[{i}]"), "expected a number")),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(Error::config(key, format!("expected an array, found {}", v.type_str()))),
        }
    }

    fn pair(&self, key: &str) -> Result<Option<(f64, f64)>> {
        match self.f64_list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some(v) => Err(Error::config(key, format!("expected two numbers, found {}", v.len()))),
        }
    }

    fn unused(&self) -> Option<String> {
        let used = self.used.borrow();
        self.map.keys().find(|k| !used.contains(*k)).cloned()
    }

    fn canonical_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (k, v) in &self.map {
            if UNHASHED.contains(&k.as_str()) {
                continue;
            }
            hasher.update(format!("{k}={v}\n").as_bytes());
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut BTreeMap<String, Value>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        v => {
            out.insert(prefix.to_string(), v.clone());
        }
    }
}

fn missing(key: &str) -> Error {
    Error::config(key, "missing required field")
}

fn parse_curve(f: &Fields, section: &str) -> Result<Curve> {
    let key = |k: &str| format!("{section}.{k}");
    let kind = match f.str_opt(&key("kind"))?.ok_or_else(|| missing(&key("kind")))? {
        "line" => CurveKind::Line { k: f.f64(&key("k"))?, c: f.f64_or(&key("c"), 0.0)? },
        "mollified_polyline" => CurveKind::MollifiedPolyline {
            k1: f.f64(&key("k1"))?,
            c1: f.f64_or(&key("c1"), 0.0)?,
            k2: f.f64(&key("k2"))?,
            c2: f.f64_or(&key("c2"), 0.0)?,
            eps0: f.f64(&key("eps0"))?,
        },
        "perturbed_line" => CurveKind::PerturbedLine {
            k: f.f64(&key("k"))?,
            c: f.f64_or(&key("c"), 0.0)?,
            amplitude: f.f64(&key("amplitude"))?,
            width: f.f64(&key("width"))?,
        },
        other => {
            return Err(Error::config(
                key("kind"),
                format!("unknown curve kind `{other}` (line, mollified_polyline, perturbed_line)"),
            ))
        }
    };
    let curve = Curve::new(kind).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::config(section, m),
        other => other,
    })?;
    if let Some(m) = f.f64_opt(&key("shift"))? {
        return Ok(curve.shifted(m));
    }
    Ok(curve)
}

fn choice<T: Copy>(f: &Fields, key: &str, default: &str, options: &[(&str, T)]) -> Result<T> {
    let s = f.str_or(key, default)?;
    options.iter().find(|(name, _)| *name == s).map(|o| o.1).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|o| o.0).collect();
        Error::config(key, format!("unknown value `{s}` (expected one of {})", names.join(", ")))
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f = Fields::parse(text)?;
        let curve = parse_curve(&f, "curve")?;
        let curve2 = if f.has_prefix("curve2.") { Some(parse_curve(&f, "curve2")?) } else { None };

        let (u_minus, u_plus) = (f.f64("wave.u_minus")?, f.f64("wave.u_plus")?);
        if !(u_minus < u_plus) {
            return Err(Error::config("wave.u_plus", format!("need u_minus < u_plus, got {u_minus} >= {u_plus}")));
        }
        let data = RiemannData::new(u_minus, u_plus, curve)?;

        let grid = if f.has_prefix("grid.") {
            let (n1, n2) = (f.usize("grid.n1")?, f.usize("grid.n2")?);
            let b1 = f.pair("grid.x")?.ok_or_else(|| missing("grid.x"))?;
            let b2 = f.pair("grid.y")?.ok_or_else(|| missing("grid.y"))?;
            Some(Grid2D::new(b1, n1, b2, n2).map_err(|e| Error::config("grid", e.to_string()))?)
        } else {
            None
        };

        let solver = SolverSpec {
            coords: choice(&f, "solver.coords", "original", &[("original", Coords::Original), ("transformed", Coords::Transformed)])?,
            advection: choice(
                &f,
                "solver.advection",
                "llf",
                &[("llf", Advection::LocalLaxFriedrichs), ("centered", Advection::Centered)],
            )?,
            scheme: choice(
                &f,
                "solver.scheme",
                "explicit",
                &[("explicit", Scheme::Explicit), ("semi_implicit", Scheme::SemiImplicitDiffusion)],
            )?,
            cfl: f.f64_or("solver.cfl", 0.8)?,
            boundary: choice(
                &f,
                "solver.boundary",
                "exact",
                &[("exact", BoundaryKind::Exact), ("viscous", BoundaryKind::Viscous), ("frozen", BoundaryKind::Frozen)],
            )?,
            boundary_refresh: f.f64_or("solver.boundary_refresh", 0.05)?,
        };
        if !(solver.cfl > 0.0 && solver.cfl <= 1.0) {
            return Err(Error::config("solver.cfl", format!("{} outside (0, 1]", solver.cfl)));
        }
        if solver.boundary_refresh < 0.0 {
            return Err(Error::config("solver.boundary_refresh", "must be non-negative"));
        }

        let perturbation = match f.f64_or("perturbation.amplitude", 0.0)? {
            0.0 => None,
            amplitude => {
                let radius = f.f64("perturbation.radius")?;
                if !(radius > 0.0) {
                    return Err(Error::config("perturbation.radius", "must be positive"));
                }
                let center = f.pair("perturbation.center")?.unwrap_or((0.0, 0.0));
                Some(Bump { amplitude, center, radius })
            }
        };

        let times = f.f64_list("experiment.times")?.unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
        if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("experiment.times", "must be positive and strictly increasing"));
        }
        let experiment = ExperimentSpec {
            fit_window: f.pair("experiment.fit_window")?.unwrap_or((4.0, 64.0)),
            target_exponent: f.f64_or("experiment.target_exponent", -0.125 + crate::analysis::EPS_FIT)?,
            samples: f.usize_or("experiment.samples", 128)?,
            sample_x: f.pair("experiment.sample_x")?.unwrap_or((-20.0, 20.0)),
            times,
        };
        if experiment.samples < 2 {
            return Err(Error::config("experiment.samples", "need at least 2"));
        }

        let strip = curve.xi_strip().unwrap_or((0.0, 0.0));
        let margin = f.f64_or("profile.xi_margin", 2.0)?;
        let profile = ProfileGrid {
            xi: (strip.0 - margin, strip.1 + margin),
            n_xi: f.usize_or("profile.n_xi", 17)?,
            eta: f.pair("profile.eta")?.unwrap_or((-250.0, 250.0)),
            n_eta: f.usize_or("profile.n_eta", 1001)?,
        };
        if profile.n_xi < 2 || profile.n_eta < 2 {
            return Err(Error::config("profile", "need at least 2 nodes per axis"));
        }

        let out = PathBuf::from(f.str_or("out", "out")?);
        let workers = f.usize_or("workers", 1)?;
        let seed = match f.get("seed") {
            None => 0,
            Some(Value::Integer(i)) => *i as u64,
            Some(v) => return Err(Error::config("seed", format!("expected an integer, found {v}"))),
        };
        if let Some(k) = f.unused() {
            return Err(Error::config(k, "unknown field"));
        }
        Ok(Self { curve, curve2, data, grid, solver, perturbation, experiment, profile, out, workers, seed, hash: f.canonical_hash() })
    }

    pub fn require_grid(&self) -> Result<Grid2D> {
        self.grid.ok_or_else(|| missing("grid.n1"))
    }

    pub fn require_curve2(&self) -> Result<Curve> {
        self.curve2.ok_or_else(|| missing("curve2.kind"))
    }

    /// Short hash prefix used in file headers.
    pub fn short_hash(&self) -> &str {
        &self.hash[..16]
    }
}
