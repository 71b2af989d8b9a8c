use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stagewise::experiment::{BlockSpec, SineSpec};
use stagewise::stagewise::{IntegratorConfig, StagewiseConfig};
use stagewise::{Error, SolverConfig};

/// Settings loadable from `--config`. Every section is optional and flags
/// override whatever it sets.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub sequential: Option<bool>,
    pub solver: Option<SolverConfig>,
    pub stagewise: Option<StagewiseConfig>,
    pub integrator: Option<IntegratorConfig>,
    pub sine: Option<SineSpec>,
    pub block: Option<BlockSpec>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            .map_err(Into::into)
    }
}

pub fn report<T: Serialize>(command: &str, resolved: &T) {
    match serde_json::to_string(resolved) {
        Ok(json) => eprintln!("{command}: resolved config {json}"),
        Err(e) => log::warn!("could not serialize resolved config: {e}"),
    }
}
