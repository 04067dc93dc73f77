//! TOML configuration files.
//!
//! ```toml
//! alphabet_size = 2
//! p_x = [0.5, 0.5]
//! p_y_given_x = [[0.9, 0.1], [0.1, 0.9]]
//! p_s = [0.0, 1.0]
//! s_max = 1
//! m = 4096
//! n = 60
//! lambda = 10000
//! master_seed = 7
//! ```
//!
//! Experiment keys (`epsilon`, `trials`, `sweep_axis`, `sweep_values`,
//! `threshold_constant`, `pseudo_count`, `memory_cap_bytes`) are optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, Sweep, SweepAxis, DEFAULT_MEMORY_CAP};
use crate::synth::ModelSpec;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub alphabet_size: Option<usize>,
    pub p_x: Option<Vec<f64>>,
    pub p_y_given_x: Option<Vec<Vec<f64>>>,
    pub p_s: Option<Vec<f64>>,
    pub s_max: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub lambda: Option<usize>,
    pub master_seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub trials: Option<usize>,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Option<Vec<usize>>,
    pub threshold_constant: Option<f64>,
    pub pseudo_count: Option<f64>,
    pub memory_cap_bytes: Option<u64>,
}

fn required<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_spec(spec: &ModelSpec) -> Self {
        Self {
            alphabet_size: Some(spec.alphabet_size()),
            p_x: Some(spec.p_x().to_vec()),
            p_y_given_x: Some(spec.p_y_given_x().to_vec()),
            p_s: Some(spec.p_s().to_vec()),
            s_max: Some(spec.s_max()),
            ..Self::default()
        }
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        let p_x = required(&self.p_x, "p_x")?;
        let alphabet = self.alphabet_size.unwrap_or(p_x.len());
        if alphabet != p_x.len() {
            return Err(Error::Config(format!(
                "alphabet_size = {alphabet} but p_x has {} entries",
                p_x.len()
            )));
        }
        let p_s = required(&self.p_s, "p_s")?;
        if let Some(s_max) = self.s_max {
            if p_s.len() != s_max + 1 {
                return Err(Error::Config(format!(
                    "s_max = {s_max} but p_s has {} entries",
                    p_s.len()
                )));
            }
        }
        ModelSpec::new(p_x, required(&self.p_y_given_x, "p_y_given_x")?, p_s)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let sweep = match (&self.sweep_axis, &self.sweep_values) {
            (Some(axis), Some(values)) => Some(Sweep {
                axis: *axis,
                values: values.clone(),
            }),
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "sweep_axis and sweep_values must be given together".into(),
                ))
            }
        };
        let config = ExperimentConfig {
            spec: self.model_spec()?,
            m: required(&self.m, "m")?,
            n: required(&self.n, "n")?,
            lambda: required(&self.lambda, "lambda")?,
            epsilon: self.epsilon.unwrap_or(crate::matching::DEFAULT_EPSILON),
            trials: self.trials.unwrap_or(1),
            master_seed: self.master_seed.unwrap_or(0),
            sweep,
            threshold_constant: self
                .threshold_constant
                .unwrap_or(crate::deletion::DEFAULT_THRESHOLD_CONSTANT),
            pseudo_count: self.pseudo_count.unwrap_or(0.0),
            memory_cap_bytes: self.memory_cap_bytes.unwrap_or(DEFAULT_MEMORY_CAP),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = r#"
        alphabet_size = 2
        p_x = [0.5, 0.5]
        p_y_given_x = [[0.9, 0.1], [0.1, 0.9]]
        p_s = [0.0, 1.0]
        s_max = 1
        m = 64
        n = 20
        lambda = 500
        master_seed = 3
    "#;

    #[test]
    fn parses_model_and_experiment() {
        let c = Config::parse(BSC).unwrap();
        assert_eq!(c.model_spec().unwrap(), ModelSpec::bsc(0.1, vec![0.0, 1.0]).unwrap());
        let e = c.experiment().unwrap();
        assert_eq!((e.m, e.n, e.lambda, e.master_seed, e.trials), (64, 20, 500, 3, 1));
        assert_eq!(e.epsilon, 0.05);
    }

    #[test]
    fn inconsistent_keys_rejected() {
        let c = Config::parse(&BSC.replace("s_max = 1", "s_max = 2")).unwrap();
        assert!(c.model_spec().is_err());
        let c = Config::parse(&BSC.replace("alphabet_size = 2", "alphabet_size = 3")).unwrap();
        assert!(c.model_spec().is_err());
        assert!(Config::parse("bogus = 1").is_err());
        let c = Config::parse(&BSC.replace("m = 64", "")).unwrap();
        assert!(c.experiment().is_err());
    }

    #[test]
    fn round_trip() {
        let c = Config::parse(BSC).unwrap();
        assert_eq!(Config::parse(&c.to_toml().unwrap()).unwrap(), c);
    }
}
