//! TOML model configuration.
//!
//! ```toml
//! dimension = 1
//! lambda = 50.0
//! seed = 7
//!
//! [potential]
//! support = [[0, 1.0], [1, -0.5]]      # [site, value]; site is an int or a list
//!
//! [potential.tail]                     # optional
//! C = 1.0
//! alpha = 1.0
//! radius = 12
//! sign = "positive"                    # or "alternating"; optional
//!
//! [density]
//! kind = "uniform"                     # uniform | raised_cosine | piecewise_linear
//! params = [0.0, 1.0]
//! ```

use serde::Deserialize;

use crate::density::DisorderDensity;
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::model::ModelConfig;
use crate::potential::{SingleSitePotential, Tail, TailSign};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimension: usize,
    lambda: f64,
    potential: RawPotential,
    density: RawDensity,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    #[serde(default)]
    support: Vec<(RawSite, f64)>,
    tail: Option<RawTail>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSite {
    Scalar(i64),
    Vector(Vec<i64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    #[serde(rename = "C")]
    amplitude: f64,
    alpha: f64,
    radius: i64,
    sign: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

/// A parsed configuration file.
#[derive(Clone, Debug)]
pub struct FileConfig {
    pub model: ModelConfig,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = raw.dimension;
        if d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let mut core = Vec::new();
        for (site, v) in raw.potential.support {
            let s = match site {
                RawSite::Scalar(x) => vec![x],
                RawSite::Vector(c) => c,
            };
            if s.len() != d {
                return Err(Error::Config(format!("support site {s:?} does not have {d} coordinates")));
            }
            core.push((Site::new(s), v));
        }
        let potential = match raw.potential.tail {
            None => SingleSitePotential::finite(d, core)?,
            Some(t) => {
                let sign = match t.sign.as_deref() {
                    None | Some("positive") => TailSign::Positive,
                    Some("alternating") => TailSign::Alternating,
                    Some(other) => return Err(Error::Config(format!("unknown tail sign '{other}'"))),
                };
                let tail = Tail { amplitude: t.amplitude, rate: t.alpha, sign };
                SingleSitePotential::with_tail(d, core, tail, t.radius)?
            }
        };
        let density = DisorderDensity::from_spec(&raw.density.kind, &raw.density.params)?;
        let model = ModelConfig::new(raw.lambda, potential, density)?;
        Ok(Self { model, seed: raw.seed })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
