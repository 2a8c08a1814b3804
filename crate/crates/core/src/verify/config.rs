use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charts::DEFAULT_SEPARATION;
use crate::elliptic::ModularParam;
use crate::error::{Error, Result};
use crate::quiver::{Degree, Quiver, QuiverMode};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "ZASTAVA_SEED";

const MIN_IM_TAU: f64 = 0.1;
const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    EllipticIdentities,
    BracketAntisymmetry,
    Jacobi,
    Pushforward,
    Degenerations,
    RanksSegre,
    A2Model,
    Flows,
    ResidueCoords,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::EllipticIdentities,
        Suite::BracketAntisymmetry,
        Suite::Jacobi,
        Suite::Pushforward,
        Suite::Degenerations,
        Suite::RanksSegre,
        Suite::A2Model,
        Suite::Flows,
        Suite::ResidueCoords,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::EllipticIdentities => "elliptic_identities",
            Suite::BracketAntisymmetry => "bracket_antisymmetry",
            Suite::Jacobi => "jacobi",
            Suite::Pushforward => "pushforward",
            Suite::Degenerations => "degenerations",
            Suite::RanksSegre => "ranks_segre",
            Suite::A2Model => "a2_model",
            Suite::Flows => "flows",
            Suite::ResidueCoords => "residue_coords",
        }
    }

    /// Samples drawn when the configuration does not say otherwise.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::EllipticIdentities => 100,
            Suite::BracketAntisymmetry => 20,
            Suite::Jacobi => 20,
            Suite::Pushforward => 20,
            Suite::Degenerations => 5,
            Suite::RanksSegre => 20,
            Suite::A2Model => 1000,
            Suite::Flows => 3,
            Suite::ResidueCoords => 10,
        }
    }

    pub(crate) fn code(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Schema {
                field: "suites".into(),
                reason: format!("unknown suite `{s}`"),
            })
    }
}

/// Numerical thresholds of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Elliptic identities (oddness, quasi-periodicity, Legendre).
    pub tol: f64,
    /// Minimal separation of sampled positions.
    pub delta: f64,
    /// Jacobiator bound.
    pub jacobi_tol: f64,
    /// Relative bound on the pushforward identity.
    pub push_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol: 1e-10,
            delta: DEFAULT_SEPARATION,
            jacobi_tol: 1e-8,
            push_tol: 1e-9,
        }
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mp: ModularParam,
    pub quiver: Quiver,
    pub alpha: Degree,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub samples: BTreeMap<Suite, usize>,
    pub suites: Vec<Suite>,
}

impl RunConfig {
    pub fn new(tau: Complex64, quiver: Quiver, alpha: Degree) -> Result<Self> {
        let doc = ConfigDoc {
            tau: ComplexDoc::Pair([tau.re, tau.im]),
            quiver: QuiverDoc::Explicit {
                vertices: quiver.vertices().to_vec(),
                arrows: quiver
                    .arrows()
                    .iter()
                    .map(|&(o, i)| [quiver.vertices()[o].clone(), quiver.vertices()[i].clone()])
                    .collect(),
            },
            mode: Some(quiver.mode()),
            alpha: AlphaDoc::List(alpha.coefficients().to_vec()),
            seed: None,
            tolerances: None,
            samples: None,
            suites: None,
        };
        doc.validate()
    }

    pub fn tau(&self) -> Complex64 {
        self.mp.tau()
    }

    pub fn samples_for(&self, suite: Suite) -> usize {
        self.samples.get(&suite).copied().unwrap_or_else(|| suite.default_samples())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, suite: Suite, count: usize) -> Self {
        self.samples.insert(suite, count.max(1));
        self
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// Normalized echo of the configuration for reports.
    pub fn echo(&self) -> serde_json::Value {
        let q = &self.quiver;
        serde_json::json!({
            "tau": [self.tau().re, self.tau().im],
            "quiver": {
                "vertices": q.vertices(),
                "arrows": q.arrows().iter().map(|&(o, i)| [&q.vertices()[o], &q.vertices()[i]]).collect::<Vec<_>>(),
            },
            "alpha": self.alpha.coefficients(),
            "seed": self.seed,
            "tolerances": self.tolerances,
            "samples": self.suites.iter().map(|&s| (s.name().to_string(), self.samples_for(s))).collect::<BTreeMap<_, _>>(),
            "suites": self.suites,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ComplexDoc {
    Pair([f64; 2]),
    Real(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum QuiverDoc {
    Named(String),
    Explicit { vertices: Vec<String>, arrows: Vec<[String; 2]> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlphaDoc {
    List(Vec<u32>),
    Map(BTreeMap<String, u32>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    tau: ComplexDoc,
    quiver: QuiverDoc,
    #[serde(default)]
    mode: Option<QuiverMode>,
    alpha: AlphaDoc,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    tolerances: Option<Tolerances>,
    #[serde(default)]
    samples: Option<BTreeMap<String, usize>>,
    #[serde(default)]
    suites: Option<Vec<String>>,
}

fn schema(field: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        field: field.into(),
        reason: reason.into(),
    }
}

fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (parse_real(n)?, parse_real(d)?);
            (d != 0.0).then(|| n / d)
        }
        None => t.parse().ok(),
    }
}

/// Parses `"i"`, `"2i"`, `"-0.5i"`, `"1/2+i"`, `"0.3-1.5i"`, `"2"`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || schema("complex", format!("cannot parse `{text}` as a complex number"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    // split at the last sign that is not leading and not an exponent sign
    let bytes = t.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) if t.ends_with('i') => (&t[..k], &t[k..]),
        _ if t.ends_with('i') => ("", t.as_str()),
        _ => (t.as_str(), ""),
    };
    let re = if re_part.is_empty() { 0.0 } else { parse_real(re_part).ok_or_else(bad)? };
    let im = if im_part.is_empty() {
        0.0
    } else {
        let coeff = &im_part[..im_part.len() - 1];
        match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => {
                let c = c.strip_suffix('*').unwrap_or(c);
                parse_real(c).ok_or_else(bad)?
            }
        }
    };
    Ok(Complex64::new(re, im))
}

impl ComplexDoc {
    fn value(&self) -> Result<Complex64> {
        match self {
            ComplexDoc::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ComplexDoc::Real(re) => Ok(Complex64::new(*re, 0.0)),
            ComplexDoc::Text(t) => parse_complex(t).map_err(|_| schema("tau", format!("cannot parse `{t}`"))),
        }
    }
}

impl ConfigDoc {
    fn validate(self) -> Result<RunConfig> {
        let tau = self.tau.value()?;
        if !(tau.re.is_finite() && tau.im.is_finite()) || tau.im < MIN_IM_TAU {
            return Err(Error::Validation(format!(
                "Im(tau) must be at least {MIN_IM_TAU}, got {}",
                tau.im
            )));
        }
        let mp = ModularParam::new(tau).map_err(|e| Error::Validation(e.to_string()))?;
        let mode = self.mode.unwrap_or_default();
        let quiver = match self.quiver {
            QuiverDoc::Named(name) => {
                let q = Quiver::named(&name).map_err(|e| schema("quiver", e.to_string()))?;
                Quiver::from_indices(q.vertices().to_vec(), q.arrows().to_vec(), mode)
            }
            QuiverDoc::Explicit { vertices, arrows } => {
                let arrows: Vec<(String, String)> = arrows.into_iter().map(|[a, b]| (a, b)).collect();
                Quiver::new(&vertices, &arrows, mode)
            }
        }
        .map_err(|e| match e {
            Error::UnknownVertex(v) => schema("quiver", format!("unknown vertex `{v}`")),
            other => Error::Validation(other.to_string()),
        })?;
        let alpha = match self.alpha {
            AlphaDoc::List(a) => Degree::new(a),
            AlphaDoc::Map(m) => Degree::from_map(&quiver, &m),
        }
        .map_err(|e| schema("alpha", e.to_string()))?;
        alpha.check_matches(&quiver).map_err(|e| schema("alpha", e.to_string()))?;

        let tolerances = self.tolerances.unwrap_or_default();
        for (name, v) in [
            ("tol", tolerances.tol),
            ("delta", tolerances.delta),
            ("jacobi_tol", tolerances.jacobi_tol),
            ("push_tol", tolerances.push_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        let mut samples = BTreeMap::new();
        for (name, count) in self.samples.unwrap_or_default() {
            let suite: Suite = name.parse().map_err(|_| schema("samples", format!("unknown suite `{name}`")))?;
            if count == 0 {
                return Err(Error::Validation(format!("sample count for `{name}` must be at least 1")));
            }
            samples.insert(suite, count);
        }
        let suites = match self.suites {
            Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<Suite>>>()?,
            None => Suite::ALL.to_vec(),
        };
        Ok(RunConfig {
            mp,
            quiver,
            alpha,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            tolerances,
            samples,
            suites,
        })
    }
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| schema(SEED_ENV, format!("`{v}` is not an unsigned 64-bit integer"))),
        Err(_) => Ok(None),
    }
}

/// Parses and validates a json configuration document. `ZASTAVA_SEED`, when
/// set, replaces the configured seed.
pub fn parse_config(document: &str) -> Result<RunConfig> {
    let doc: ConfigDoc = serde_json::from_str(document).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
            .unwrap_or("document")
            .to_string();
        Error::Schema { field, reason: msg }
    })?;
    let mut cfg = doc.validate()?;
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
