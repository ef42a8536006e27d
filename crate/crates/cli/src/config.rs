//! Flat key-value experiment configuration.
//!
//! A config file is a TOML document with top-level keys only. Values are
//! strings, numbers, booleans, or arrays of numbers (grids). `-p key=value`
//! overrides replace file keys.

use std::collections::BTreeMap;
use std::path::Path;

use plantlab::models::PlantedModel;
use sha2::{Digest, Sha256};
use toml::Value;

use crate::CliError;

/// Every key any command reads. Unknown keys are rejected so typos surface.
pub const KNOWN_KEYS: &[&str] = &[
    "problem", "gaussian", "n", "size", "k", "alpha", "delta", "a", "b", "p", "q", "lambda",
    "lambda_exponent", "eps_noise", "gamma", "d", "big_d", "t_cap", "method", "trials", "samples",
    "scheme", "rho", "threshold", "target", "kind", "psd_tol", "dump_matrix", "planted", "format",
    "count_cache", "max_iter", "tol", "seed",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, Value>,
}

fn parse_override(raw: &str) -> Result<(String, Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{raw}` is not key=value")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        // bare words and comma lists are accepted without TOML quoting
        .unwrap_or_else(|| {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            let nums: Option<Vec<Value>> = parts
                .iter()
                .map(|s| s.parse::<i64>().map(Value::Integer).or_else(|_| s.parse::<f64>().map(Value::Float)).ok())
                .collect();
            match nums {
                Some(v) if parts.len() > 1 => Value::Array(v),
                _ => Value::String(value.to_string()),
            }
        });
    Ok((key, parsed))
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (k, v) in table {
                if v.is_table() {
                    return Err(CliError::Config(format!("key `{k}`: nested tables are not allowed")));
                }
                values.insert(k, v);
            }
        }
        for raw in overrides {
            let (k, v) = parse_override(raw)?;
            values.insert(k, v);
        }
        if let Some(k) = values.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown key `{k}`")));
        }
        Ok(Config { values })
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Short SHA-256 of the command, seed and sorted key-value pairs.
    pub fn hash(&self, command: &str, seed: u64) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={command}\nseed={seed}\n"));
        for (k, v) in &self.values {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn bad(key: &str, want: &str, v: &Value) -> CliError {
        CliError::Config(format!("key `{key}`: expected {want}, got {v}"))
    }

    pub fn str(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Self::bad(key, "a string", v)),
        }
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Self::bad(key, "a number", v)),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(Self::bad(key, "a non-negative integer", v)),
        }
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, CliError> {
        Ok(self.usize(key)?.map(|v| v as u64))
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(Self::bad(key, "true or false", v)),
        }
    }

    /// A grid; a scalar is a one-point grid.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(Self::bad(key, "numbers", other)),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Ok(self.f64(key)?.map(|x| vec![x])),
        }
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                    other => Err(Self::bad(key, "non-negative integers", other)),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Ok(self.usize(key)?.map(|x| vec![x])),
        }
    }

    pub fn require<T>(&self, key: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    /// The planted model at size `n` with `lambda` overriding the `lambda` key.
    pub fn model(&self, n: usize, lambda: Option<f64>) -> Result<PlantedModel, CliError> {
        let problem = self.require("problem", self.str("problem")?)?;
        let gaussian = self.bool("gaussian")?.unwrap_or(false);
        let lambda = match lambda {
            Some(l) => l,
            None => self.f64("lambda")?.unwrap_or(1.0),
        };
        let sparse_k = self.usize("k")?.unwrap_or((n / 5).max(1));
        let model = match problem.as_str() {
            "clique" => {
                let size = self.usize("size")?.unwrap_or((n as f64).sqrt().ceil() as usize);
                PlantedModel::clique(n, size)
            }
            "csp" => PlantedModel::csp_xor(
                n,
                self.usize("k")?.unwrap_or(3),
                self.f64("alpha")?.unwrap_or(5.0),
                self.f64("delta")?.unwrap_or(0.1),
            ),
            "sbm" => PlantedModel::sbm(n, self.f64("a")?.unwrap_or(30.0), self.f64("b")?.unwrap_or(5.0)),
            "dks" => PlantedModel::dks(n, sparse_k, self.f64("p")?.unwrap_or(0.1), self.f64("q")?.unwrap_or(0.6)),
            "tpca" => {
                let k = self.usize("k")?.unwrap_or(3);
                let eps = self.f64("eps_noise")?.unwrap_or(0.0);
                if gaussian {
                    PlantedModel::tpca_gaussian(n, k, lambda, eps)
                } else {
                    PlantedModel::tpca(n, k, lambda, eps)
                }
            }
            "spca" => {
                let gamma = self.f64("gamma")?.unwrap_or(0.0);
                if gaussian {
                    PlantedModel::spca_gaussian(n, sparse_k, lambda, gamma)
                } else {
                    PlantedModel::spca(n, sparse_k, lambda, gamma)
                }
            }
            other => return Err(CliError::Config(format!("unknown problem `{other}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_scalars_lists_and_words() {
        let c = Config::load(None, &["n=8,16,32".into(), "problem=tpca".into(), "lambda=0.5".into()]).unwrap();
        assert_eq!(c.usize_list("n").unwrap().unwrap(), vec![8, 16, 32]);
        assert_eq!(c.str("problem").unwrap().unwrap(), "tpca");
        assert_eq!(c.f64_list("lambda").unwrap().unwrap(), vec![0.5]);
        assert!(Config::load(None, &["bogus=1".into()]).is_err());
        assert!(Config::load(None, &["n".into()]).is_err());
    }

    #[test]
    fn hash_depends_on_every_input() {
        let a = Config::load(None, &["n=8".into()]).unwrap();
        let b = Config::load(None, &["n=9".into()]).unwrap();
        assert_eq!(a.hash("sample", 1), a.hash("sample", 1));
        assert_ne!(a.hash("sample", 1), b.hash("sample", 1));
        assert_ne!(a.hash("sample", 1), a.hash("sample", 2));
        assert_eq!(a.hash("sample", 1).len(), 16);
    }
}
