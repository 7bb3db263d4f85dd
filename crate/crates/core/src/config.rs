//! Run configuration: model parameters plus replica and analysis settings.
//!
//! The file form is flat `key=value` text, one pair per line, `#` starting a
//! comment. Keys are the field names: `p`, `a1`, `a2`, `dimension`, `norm`,
//! `n`, `seed`, `replicas`, `seeds` (comma separated), `tracking`
//! (`none`, `all`, `top:K`), `split` (`log`, `half`), `omega`
//! (`loglog`, `logloglog` or a number), `delta` and `output_dir`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::clustering::{check_delta, OmegaMode, SplitPolicy};
use crate::error::{Result, SpaError};
use crate::graph::TrajectoryPolicy;
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub replicas: usize,
    /// Explicit replica seeds; otherwise `seed, seed+1, ...`.
    pub seeds: Option<Vec<u64>>,
    pub tracking: TrajectoryPolicy,
    pub split: SplitPolicy,
    /// `ω(n)` for trajectory onsets and the log-threshold split.
    pub omega: OmegaMode,
    /// Band half-width for the smoothed curves.
    pub delta: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelParams::default(),
            replicas: 1,
            seeds: None,
            tracking: TrajectoryPolicy::default(),
            split: SplitPolicy::default(),
            omega: OmegaMode::default(),
            delta: 0.1,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: [&str; 14] = [
    "p", "a1", "a2", "dimension", "norm", "n", "seed", "replicas", "seeds", "tracking", "split", "omega", "delta",
    "output_dir",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| SpaError::usage(format!("bad value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "p" => self.model.p = parse_value(key, value)?,
            "a1" => self.model.a1 = parse_value(key, value)?,
            "a2" => self.model.a2 = parse_value(key, value)?,
            "dimension" => self.model.dimension = parse_value(key, value)?,
            "norm" => self.model.norm = value.parse()?,
            "n" => self.model.n = parse_value(key, value)?,
            "seed" => self.model.seed = parse_value(key, value)?,
            "replicas" => self.replicas = parse_value(key, value)?,
            "seeds" => {
                let seeds = value
                    .split(',')
                    .map(|s| parse_value::<u64>(key, s.trim()))
                    .collect::<Result<Vec<_>>>()?;
                self.seeds = Some(seeds);
            }
            "tracking" => self.tracking = value.parse()?,
            "split" => self.split = SplitPolicy::parse(value, self.omega)?,
            "omega" => {
                self.omega = value.parse()?;
                if let SplitPolicy::ThresholdLog(_) = self.split {
                    self.split = SplitPolicy::ThresholdLog(self.omega);
                }
            }
            "delta" => self.delta = parse_value(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(SpaError::usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses the `key=value` form on top of the defaults and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut replicas_given = false;
        let mut seen = HashSet::new();
        let mut offset = 0u64;
        for raw in text.split_inclusive('\n') {
            let line_offset = offset;
            offset += raw.len() as u64;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SpaError::Parse { offset: line_offset, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            config.set(key, value).map_err(|e| err(e.to_string()))?;
            replicas_given |= key == "replicas";
        }
        if !replicas_given {
            if let Some(seeds) = &config.seeds {
                config.replicas = seeds.len();
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Renders the configuration in the file form; `parse` reads it back.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let mut out = String::new();
        let _ = writeln!(out, "p={}\na1={}\na2={}\ndimension={}\nnorm={}\nn={}\nseed={}", m.p, m.a1, m.a2, m.dimension, m.norm, m.n, m.seed);
        let _ = writeln!(out, "replicas={}", self.replicas);
        if let Some(seeds) = &self.seeds {
            let list: Vec<String> = seeds.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "seeds={}", list.join(","));
        }
        let _ = writeln!(out, "tracking={}", self.tracking);
        let _ = writeln!(out, "omega={}", self.omega);
        let _ = writeln!(out, "split={}", self.split.name());
        let _ = writeln!(out, "delta={}", self.delta);
        let _ = writeln!(out, "output_dir={}", self.output_dir.display());
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        check_delta(self.delta)?;
        if self.replicas == 0 {
            return Err(SpaError::usage("replicas must be at least 1"));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.replicas {
                return Err(SpaError::usage(format!(
                    "{} seeds given for {} replicas",
                    seeds.len(),
                    self.replicas
                )));
            }
        }
        let seeds = self.replica_seeds();
        let distinct: HashSet<_> = seeds.iter().collect();
        if distinct.len() != seeds.len() {
            return Err(SpaError::usage("replica seeds must be pairwise distinct"));
        }
        Ok(())
    }

    pub fn replica_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(seeds) => seeds.clone(),
            None => (0..self.replicas as u64).map(|i| self.model.seed.wrapping_add(i)).collect(),
        }
    }

    /// Model parameters of each replica, in seed order.
    pub fn replica_params(&self) -> Vec<ModelParams> {
        self.replica_seeds().into_iter().map(|s| self.model.with_seed(s)).collect()
    }
}
