//! Run configuration: TOML document with the chain inline or in a separate file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sovchain::linalg::{c, C64};
use sovchain::model::{ChainSpec, Mat2, Site, Tolerances};
use sovchain::repn::Spin;
use sovchain::SovError;

/// Largest Hilbert-space dimension the dense routines accept.
pub const MAX_DIM: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSite {
    pub two_s: u32,
    pub xi: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTwist {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTolerances {
    pub residual: Option<f64>,
    pub zero: Option<f64>,
    pub gram: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRun {
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Chain keys; shared by the run file and a standalone chain file.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    eta: Option<[f64; 2]>,
    sites: Option<Vec<RawSite>>,
    twist: Option<RawTwist>,
    seed: Option<u64>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    chain: Option<PathBuf>,
    eta: Option<[f64; 2]>,
    sites: Option<Vec<RawSite>>,
    twist: Option<RawTwist>,
    seed: Option<u64>,
    tolerances: Option<RawTolerances>,
    run: Option<RawRun>,
}

/// Normalised chain description, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainConfig {
    pub eta: [f64; 2],
    pub sites: Vec<RawSite>,
    pub twist: RawTwist,
    pub seed: u64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub chain: ChainConfig,
    pub samples: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SAMPLES: usize = 4;

fn cplx(v: [f64; 2]) -> C64 {
    c(v[0], v[1])
}

fn parse_error(source: &str, err: toml::de::Error) -> ConfigError {
    let place = err
        .span()
        .map(|span| {
            let line = source[..span.start.min(source.len())].matches('\n').count() + 1;
            format!("{source_name} line {line}: ", source_name = "config")
        })
        .unwrap_or_default();
    ConfigError::Parse(format!("{place}{}", err.message()))
}

/// Parses a run configuration. `base` resolves a relative `chain = "..."` path.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let inline = RawChain { eta: raw.eta, sites: raw.sites, twist: raw.twist, seed: raw.seed, tolerances: raw.tolerances };
    let chain_raw = match raw.chain {
        Some(path) => {
            if inline != RawChain::default() {
                return Err(invalid("chain", "give either a chain file or inline chain keys, not both"));
            }
            let full = base.map(|b| b.join(&path)).unwrap_or(path);
            let body = std::fs::read_to_string(&full)
                .map_err(|e| ConfigError::Io { path: full.display().to_string(), message: e.to_string() })?;
            toml::from_str(&body).map_err(|e| parse_error(&body, e))?
        }
        None => inline,
    };
    let chain = validate_chain(chain_raw)?;
    let run = raw.run.unwrap_or_default();
    let samples = run.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(invalid("run.samples", "must be at least 1"));
    }
    Ok(RunConfig { chain, samples, out: run.out })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_config(&text, path.parent())
}

fn finite(field: &str, v: &[f64]) -> Result<(), ConfigError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(field, "entries must be finite"))
    }
}

fn validate_chain(raw: RawChain) -> Result<ChainConfig, ConfigError> {
    let eta = raw.eta.ok_or_else(|| invalid("eta", "missing"))?;
    finite("eta", &eta)?;
    if cplx(eta).norm() == 0.0 {
        return Err(invalid("eta", "must be nonzero"));
    }
    let sites = raw.sites.ok_or_else(|| invalid("sites", "missing"))?;
    if sites.is_empty() {
        return Err(invalid("sites", "at least one site is required"));
    }
    let mut dim = 1usize;
    for (k, s) in sites.iter().enumerate() {
        if s.two_s == 0 {
            return Err(invalid(format!("sites[{k}].two_s"), "must be at least 1"));
        }
        finite(&format!("sites[{k}].xi"), &s.xi)?;
        dim = dim.saturating_mul(s.two_s as usize + 1);
    }
    if dim > MAX_DIM {
        return Err(invalid("sites", format!("Hilbert space dimension {dim} exceeds {MAX_DIM}")));
    }
    let twist = raw.twist.ok_or_else(|| invalid("twist", "missing"))?;
    for (name, v) in [("twist.a", twist.a), ("twist.b", twist.b), ("twist.c", twist.c), ("twist.d", twist.d)] {
        finite(name, &v)?;
    }
    let seed = raw.seed.ok_or_else(|| invalid("seed", "missing"))?;
    let defaults = Tolerances::default();
    let t = raw.tolerances.unwrap_or_default();
    let tolerances = Tolerances {
        residual: t.residual.unwrap_or(defaults.residual),
        zero: t.zero.unwrap_or(defaults.zero),
        gram: t.gram.unwrap_or(defaults.gram),
    };
    for (name, v) in [("tolerances.residual", tolerances.residual), ("tolerances.zero", tolerances.zero), ("tolerances.gram", tolerances.gram)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, "must be positive"));
        }
    }
    let out = ChainConfig { eta, sites, twist, seed, tolerances };
    out.build()?;
    Ok(out)
}

impl ChainConfig {
    pub fn twist_matrix(&self) -> Mat2 {
        let t = &self.twist;
        [[cplx(t.a), cplx(t.b)], [cplx(t.c), cplx(t.d)]]
    }

    pub fn build(&self) -> Result<ChainSpec, ConfigError> {
        let sites = self
            .sites
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let spin = Spin::new(s.two_s).map_err(|e| invalid(format!("sites[{k}].two_s"), e.to_string()))?;
                Ok(Site { spin, xi: cplx(s.xi) })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        ChainSpec::new(cplx(self.eta), sites, self.twist_matrix(), self.tolerances, self.seed).map_err(|e| {
            let field = match e {
                SovError::SimpleSpectrumViolation | SovError::DegenerateTwistEigenvalues | SovError::SingularTwist => "twist",
                _ => "sites",
            };
            invalid(field, e.to_string())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
eta = [1.0, 0.0]
seed = 3
sites = [{ two_s = 1, xi = [0.0, 0.0] }]
twist = { a = [2.0, 0.0], b = [0.0, 0.0], c = [0.0, 0.0], d = [1.0, 0.0] }
"#;

    fn field_of(err: ConfigError) -> String {
        match err {
            ConfigError::Invalid { field, .. } => field,
            other => panic!("expected a validation error, got {other}"),
        }
    }

    #[test]
    fn minimal_single_site() {
        let cfg = parse_config(MINIMAL, None).unwrap();
        assert_eq!(cfg.chain.sites.len(), 1);
        assert_eq!(cfg.samples, DEFAULT_SAMPLES);
        assert_eq!(cfg.chain.build().unwrap().dim(), 2);
    }

    #[test]
    fn zero_spin_is_rejected() {
        let text = MINIMAL.replace("two_s = 1", "two_s = 0");
        assert_eq!(field_of(parse_config(&text, None).unwrap_err()), "sites[0].two_s");
    }

    #[test]
    fn missing_twist_is_rejected() {
        let text: String = MINIMAL.lines().filter(|l| !l.starts_with("twist")).collect::<Vec<_>>().join("\n");
        assert_eq!(field_of(parse_config(&text, None).unwrap_err()), "twist");
    }

    #[test]
    fn unknown_key_is_a_parse_error_with_line() {
        let text = format!("{MINIMAL}colour = 1\n");
        match parse_config(&text, None).unwrap_err() {
            ConfigError::Parse(msg) => assert!(msg.contains("line 6"), "{msg}"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn identity_twist_is_rejected() {
        let text = MINIMAL.replace("a = [2.0, 0.0]", "a = [1.0, 0.0]");
        assert_eq!(field_of(parse_config(&text, None).unwrap_err()), "twist");
    }

    #[test]
    fn colliding_sites_are_rejected() {
        let text = MINIMAL.replace(
            "sites = [{ two_s = 1, xi = [0.0, 0.0] }]",
            "sites = [{ two_s = 1, xi = [0.0, 0.0] }, { two_s = 1, xi = [1.0, 0.0] }]",
        );
        assert_eq!(field_of(parse_config(&text, None).unwrap_err()), "sites");
    }
}
