//! Input manifests. Relative paths are resolved against the manifest's
//! own directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use drr_anatomy::View;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{validation, CliResult};
use crate::output::{check_path_component, read_json, SCHEMA_VERSION};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyManifest {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub studies: Vec<StudyEntry>,
    /// Projection settings shared by all studies; overridden by the config
    /// file and by flags.
    #[serde(default)]
    pub projection: Option<Value>,
    #[serde(default)]
    pub roles: Option<RoleMapping>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyEntry {
    pub id: String,
    pub volume: PathBuf,
    #[serde(default)]
    pub labels: Vec<LabelEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelEntry {
    pub label_id: u32,
    pub path: PathBuf,
}

/// Which label ids make up each anatomical role.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleMapping {
    #[serde(default)]
    pub heart: Vec<u32>,
    /// Lung and rib-cage labels whose row-filled union is the thorax.
    #[serde(default)]
    pub thorax: Vec<u32>,
    /// Vertebrae in anatomical order.
    #[serde(default)]
    pub vertebrae: Vec<u32>,
}

fn check_schema(v: Option<u32>) -> CliResult<()> {
    match v {
        Some(v) if v > SCHEMA_VERSION => Err(validation(format!(
            "schema_version {v} is newer than this tool supports ({SCHEMA_VERSION})"
        ))),
        _ => Ok(()),
    }
}

pub fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_owned()
    } else {
        base.join(p)
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."))
        .to_owned()
}

impl StudyManifest {
    /// Loads and validates; returns the manifest and its base directory.
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let m: StudyManifest = read_json(path)?;
        m.validate()?;
        Ok((m, base_dir(path)))
    }

    fn validate(&self) -> CliResult<()> {
        check_schema(self.schema_version)?;
        if self.studies.is_empty() {
            return Err(validation("manifest lists no studies"));
        }
        let mut ids = BTreeSet::new();
        for s in &self.studies {
            check_path_component("study", &s.id)?;
            if !ids.insert(&s.id) {
                return Err(validation(format!("study id {:?} appears twice", s.id)));
            }
            let mut labels = BTreeSet::new();
            for l in &s.labels {
                if !labels.insert(l.label_id) {
                    return Err(validation(format!(
                        "study {}: label_id {} appears twice",
                        s.id, l.label_id
                    )));
                }
            }
        }
        if let Some(roles) = &self.roles {
            roles.validate()?;
        }
        Ok(())
    }
}

impl RoleMapping {
    /// Reads a role table, either bare or under a `roles` key (so a study
    /// manifest can serve as the mapping).
    pub fn load(path: &Path) -> CliResult<Self> {
        let v: Value = read_json(path)?;
        let table = match v.get("roles") {
            Some(r) => r.clone(),
            None => v,
        };
        let roles: RoleMapping =
            serde_json::from_value(table).map_err(|e| validation(format!("{}: {e}", path.display())))?;
        roles.validate()?;
        Ok(roles)
    }

    pub fn validate(&self) -> CliResult<()> {
        let mut seen = BTreeSet::new();
        for &id in &self.vertebrae {
            if !seen.insert(id) {
                return Err(validation(format!("vertebra label {id} listed twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalEntry {
    /// String or number.
    pub class_id: Value,
    pub pred_path: PathBuf,
    pub ref_path: PathBuf,
    #[serde(default)]
    pub view: Option<View>,
}

impl EvalEntry {
    pub fn class_key(&self) -> CliResult<String> {
        match &self.class_id {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(validation(format!("class_id must be a string or number, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalDocument {
    #[serde(default)]
    schema_version: Option<u32>,
    classes: Vec<EvalEntry>,
    #[serde(default)]
    metrics: Option<Value>,
    #[serde(default)]
    bootstrap: Option<Value>,
}

/// Pred/ref pairs to score, from either a bare JSON list or an object with
/// `classes` and optional `metrics`/`bootstrap` settings.
#[derive(Debug, Clone)]
pub struct EvalManifest {
    pub classes: Vec<EvalEntry>,
    pub metrics: Option<Value>,
    pub bootstrap: Option<Value>,
    pub base: PathBuf,
}

impl EvalManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let v: Value = read_json(path)?;
        let parse_err = |e: serde_json::Error| validation(format!("{}: {e}", path.display()));
        let doc = if v.is_array() {
            EvalDocument {
                schema_version: None,
                classes: serde_json::from_value(v).map_err(parse_err)?,
                metrics: None,
                bootstrap: None,
            }
        } else {
            serde_json::from_value(v).map_err(parse_err)?
        };
        check_schema(doc.schema_version)?;
        if doc.classes.is_empty() {
            return Err(validation("evaluation manifest lists no classes"));
        }
        let mut seen = BTreeSet::new();
        for c in &doc.classes {
            let key = c.class_key()?;
            if !seen.insert(key.clone()) {
                return Err(validation(format!("class_id {key:?} appears twice")));
            }
        }
        Ok(EvalManifest {
            classes: doc.classes,
            metrics: doc.metrics,
            bootstrap: doc.bootstrap,
            base: base_dir(path),
        })
    }
}
