use std::collections::BTreeMap;
use std::path::Path;

use polycode::estimate::CostConstants;

pub const KEYS: [&str; 7] = [
    "precision_bits",
    "sim_cap",
    "cost_rotations",
    "cost_circuits",
    "jobs",
    "trials",
    "seed",
];

/// Numeric settings from a flat `key = value` file. Flags override them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub precision_bits: Option<u32>,
    pub sim_cap: Option<usize>,
    pub cost_rotations: Option<f64>,
    pub cost_circuits: Option<f64>,
    pub jobs: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

fn value<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<Option<T>, String> {
    v.parse()
        .map(Some)
        .map_err(|_| format!("config line {line}: bad value {v:?} for {key}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut seen = BTreeMap::new();
        let mut c = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if seen.insert(k.to_string(), n + 1).is_some() {
                return Err(format!("config line {}: duplicate key {k}", n + 1));
            }
            match k {
                "precision_bits" => c.precision_bits = value(k, v, n + 1)?,
                "sim_cap" => c.sim_cap = value(k, v, n + 1)?,
                "cost_rotations" => c.cost_rotations = value(k, v, n + 1)?,
                "cost_circuits" => c.cost_circuits = value(k, v, n + 1)?,
                "jobs" => c.jobs = value(k, v, n + 1)?,
                "trials" => c.trials = value(k, v, n + 1)?,
                "seed" => c.seed = value(k, v, n + 1)?,
                _ => {
                    return Err(format!(
                        "config line {}: unknown key {k} (known: {})",
                        n + 1,
                        KEYS.join(", ")
                    ))
                }
            }
        }
        Ok(c)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                Config::parse(&text)
            }
        }
    }

    pub fn costs(&self, rotations: Option<f64>, circuits: Option<f64>) -> CostConstants {
        let d = CostConstants::default();
        CostConstants {
            rotations: rotations.or(self.cost_rotations).unwrap_or(d.rotations),
            circuits: circuits.or(self.cost_circuits).unwrap_or(d.circuits),
        }
    }
}
