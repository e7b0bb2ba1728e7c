//! Flat key-value run configs with section headers, e.g.
//!
//! ```text
//! [model] kind=ising sites=3 ring=false
//! [couplings] J=1.0 default
//! [fields] mu=0.2 lambda=0.5
//! [suites] griffiths1 griffiths2 structural
//! [run] betas=0.5,1,2 seed=7 tolerance=1e-9
//! ```
//!
//! Tokens inside a section are either `key=value` pairs or bare flags;
//! sections may span lines. Unknown keys are rejected so typos surface as
//! config errors instead of silently running defaults.

use std::path::PathBuf;

use cgriff_core::expectations::Beta;
use cgriff_core::models::{self, LatticeSpec, ModelInstance};
use cgriff_core::verifier::suite_names;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kind: String,
    pub sites: usize,
    pub ring: bool,
    pub coupling: f64,
    pub mu: f64,
    pub lambda: f64,
    pub u_site: f64,
    pub u_hubbard: f64,
    pub mu_chemical: f64,
    pub truncation: usize,
    pub suites: Vec<String>,
    pub betas: Vec<Beta>,
    pub seed: u64,
    pub tolerance: f64,
    pub counterexample: bool,
    pub format: String,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: "ising".into(),
            sites: 2,
            ring: false,
            coupling: 1.0,
            mu: 0.0,
            lambda: 0.0,
            u_site: 1.0,
            u_hubbard: 0.0,
            mu_chemical: 0.0,
            truncation: 2,
            suites: vec!["griffiths1".into()],
            betas: vec![Beta::Finite(0.5), Beta::Finite(1.0), Beta::Finite(2.0)],
            seed: 7,
            tolerance: 1e-9,
            counterexample: false,
            format: "json".into(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut suites: Vec<String> = Vec::new();
        let mut suites_seen = false;
        // Comments run to the end of the line; tokens are whitespace-split.
        let tokens: Vec<&str> = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or(""))
            .flat_map(|line| line.split_whitespace().collect::<Vec<_>>())
            .collect();
        for raw in tokens {
            if raw.starts_with('[') && raw.ends_with(']') {
                section = raw[1..raw.len() - 1].to_string();
                continue;
            }
            let (key, value) = match raw.split_once('=') {
                Some((k, v)) => (k, Some(v)),
                None => (raw, None),
            };
            match (section.as_str(), key, value) {
                ("model", "kind", Some(v)) => cfg.kind = v.to_string(),
                ("model", "sites", Some(v)) => cfg.sites = parse_num(key, v)? as usize,
                ("model", "ring", Some(v)) => cfg.ring = parse_bool(key, v)?,
                ("model", "truncation", Some(v)) => cfg.truncation = parse_num(key, v)? as usize,
                ("couplings", "J", Some(v)) | ("couplings", "t", Some(v)) => {
                    cfg.coupling = parse_num(key, v)?
                }
                ("couplings", "default", None) => {}
                ("fields", "mu", Some(v)) => cfg.mu = parse_num(key, v)?,
                ("fields", "lambda", Some(v)) => cfg.lambda = parse_num(key, v)?,
                ("fields", "U", Some(v)) => {
                    cfg.u_site = parse_num(key, v)?;
                    cfg.u_hubbard = cfg.u_site;
                }
                ("fields", "mu_chemical", Some(v)) => cfg.mu_chemical = parse_num(key, v)?,
                ("suites", name, None) => {
                    suites_seen = true;
                    suites.push(name.to_string());
                }
                ("run", "betas", Some(v)) => {
                    cfg.betas = v
                        .split(',')
                        .map(|b| {
                            if b == "inf" {
                                Ok(Beta::Infinite)
                            } else {
                                b.parse::<f64>()
                                    .map(Beta::Finite)
                                    .map_err(|_| format!("bad beta `{b}`"))
                            }
                        })
                        .collect::<Result<_, _>>()?;
                }
                ("run", "seed", Some(v)) => cfg.seed = parse_num(key, v)? as u64,
                ("run", "tolerance", Some(v)) => cfg.tolerance = parse_num(key, v)?,
                ("run", "counterexample", Some(v)) => cfg.counterexample = parse_bool(key, v)?,
                ("run", "format", Some(v)) => cfg.format = v.to_string(),
                ("run", "out", Some(v)) => cfg.output = Some(PathBuf::from(v)),
                _ => {
                    return Err(format!(
                        "unrecognized config token `{raw}` in section [{section}]"
                    ))
                }
            }
        }
        if suites_seen {
            cfg.suites = suites;
        }
        let valid = suite_names();
        for s in &cfg.suites {
            if !valid.contains(&s.as_str()) {
                return Err(format!(
                    "unknown suite `{s}`; valid names: {}",
                    valid.join(", ")
                ));
            }
        }
        if cfg.betas.iter().any(|b| matches!(b, Beta::Finite(x) if *x < 0.0)) {
            return Err("betas must be nonnegative".into());
        }
        if !matches!(cfg.format.as_str(), "json" | "csv") {
            return Err(format!("unknown format `{}`", cfg.format));
        }
        Ok(cfg)
    }

    pub fn to_lattice(&self) -> LatticeSpec {
        let mut spec = if self.ring {
            LatticeSpec::ring(self.sites, self.coupling)
        } else {
            LatticeSpec::chain(self.sites, self.coupling)
        };
        spec.mu = vec![self.mu; self.sites];
        spec.lambda = vec![self.lambda; self.sites];
        spec.u_site = vec![self.u_site; self.sites];
        spec.u_hubbard = self.u_hubbard;
        spec.mu_chemical = self.mu_chemical;
        spec
    }

    pub fn build_model(&self) -> cgriff_core::Result<ModelInstance> {
        let spec = self.to_lattice();
        match self.kind.as_str() {
            "ising" => models::ising::build(&spec),
            "rotor" => models::rotor::build(&spec, self.truncation),
            "bose_hubbard" => models::bose_hubbard::build(&spec, self.truncation),
            "hubbard" => models::hubbard::build(&spec),
            other => Err(cgriff_core::CoreError::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("bad number for `{key}`: `{v}`"))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("bad boolean for `{key}`: `{v}`")),
    }
}
