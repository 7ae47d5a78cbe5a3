//! Layered configuration: defaults, then the manifest, then the config
//! file, then command-line flags. Each layer may set any subset of fields.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{validation, CliResult};
use crate::output::read_json;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub projection: Option<Value>,
    #[serde(default)]
    pub measure: Option<Value>,
    #[serde(default)]
    pub metrics: Option<Value>,
    #[serde(default)]
    pub bootstrap: Option<Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => read_json(p),
            None => Ok(ConfigFile::default()),
        }
    }
}

/// Overlays the top-level keys of each layer, in order, on the defaults.
pub fn layered<T>(section: &str, layers: &[Option<&Value>]) -> CliResult<T>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut merged = serde_json::to_value(T::default()).expect("defaults serialize");
    let target = merged.as_object_mut().expect("config sections are objects");
    for layer in layers.iter().flatten() {
        let obj = layer
            .as_object()
            .ok_or_else(|| validation(format!("{section} configuration must be a JSON object")))?;
        for (k, v) in obj {
            target.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(merged).map_err(|e| validation(format!("{section} configuration: {e}")))
}
