use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use drr_anatomy::io::load_mask2d;
use drr_anatomy::measurement::{
    cardiothoracic_ratio, kyphosis_cobb, scoliosis_scd, thorax_from_parts, Condition, MeasureConfig, MeasurementReport,
};
use drr_anatomy::{Mask2D, View};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{layered, ConfigFile};
use crate::error::{validation, CliError, CliResult};
use crate::manifest::RoleMapping;
use crate::output::{write_json, StagedDir, SCHEMA_VERSION};
use crate::Global;

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Directory holding `<study>/<VIEW>/<label_id>.pgm` masks, as written by `project`.
    pub masks_dir: PathBuf,
    /// Role table (or a study manifest with a `roles` entry).
    #[arg(long)]
    pub mapping: PathBuf,
    /// Conditions to measure, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = Condition::ALL.map(|c| c.to_string()))]
    pub conditions: Vec<String>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Components smaller than this are discarded before measuring.
    #[arg(long)]
    pub min_component_px: Option<usize>,
}

#[derive(Serialize)]
struct MeasureDocument<'a> {
    schema_version: u32,
    study: &'a str,
    config: &'a MeasureConfig,
    report: &'a MeasurementReport,
}

/// Parses and de-duplicates condition names, keeping their order.
pub fn parse_conditions(names: &[String]) -> CliResult<Vec<Condition>> {
    let mut out: Vec<Condition> = Vec::new();
    for n in names {
        let c: Condition = n.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(validation("no conditions requested"));
    }
    Ok(out)
}

/// Roles each condition needs; a condition with an empty role is an error.
fn check_roles(roles: &RoleMapping, conditions: &[Condition]) -> CliResult<()> {
    for c in conditions {
        let missing: &[(&str, &Vec<u32>)] = match c {
            Condition::Cardiomegaly => &[("heart", &roles.heart), ("thorax", &roles.thorax)],
            Condition::Scoliosis | Condition::Kyphosis => &[("vertebrae", &roles.vertebrae)],
        };
        for (name, ids) in missing {
            if ids.is_empty() {
                return Err(validation(format!("mapping has no {name} labels, required for {c}")));
            }
        }
    }
    Ok(())
}

/// Sorted study directories, skipping hidden entries such as staging dirs.
fn list_studies(masks_dir: &Path) -> CliResult<Vec<String>> {
    let entries = fs::read_dir(masks_dir).map_err(|e| CliError::io(masks_dir, e))?;
    let mut studies = Vec::new();
    for e in entries {
        let e = e.map_err(|e| CliError::io(masks_dir, e))?;
        let name = e.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') || !e.path().is_dir() {
            continue;
        }
        studies.push(name);
    }
    studies.sort();
    if studies.is_empty() {
        return Err(validation(format!(
            "no study directories under {}",
            masks_dir.display()
        )));
    }
    Ok(studies)
}

fn mask_path(study_dir: &Path, view: View, id: u32) -> PathBuf {
    study_dir.join(view.as_str()).join(format!("{id}.pgm"))
}

/// Loads each listed label; `None` marks a missing file.
fn load_role(study_dir: &Path, view: View, ids: &[u32]) -> CliResult<Vec<Option<Mask2D>>> {
    ids.iter()
        .map(|&id| {
            let p = mask_path(study_dir, view, id);
            if !p.exists() {
                return Ok(None);
            }
            Ok(Some(load_mask2d(&p, view, id)?))
        })
        .collect()
}

fn missing_ids(ids: &[u32], masks: &[Option<Mask2D>]) -> String {
    ids.iter()
        .zip(masks)
        .filter(|(_, m)| m.is_none())
        .map(|(id, _)| id.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn measure_ctr(study_dir: &Path, roles: &RoleMapping, cfg: &MeasureConfig) -> CliResult<MeasurementReport> {
    const C: Condition = Condition::Cardiomegaly;
    let heart = load_role(study_dir, View::Pa, &roles.heart)?;
    if heart.iter().any(Option::is_none) {
        return Ok(MeasurementReport::excluded(
            C,
            format!("heart mask missing (label {})", missing_ids(&roles.heart, &heart)),
        ));
    }
    let thorax = load_role(study_dir, View::Pa, &roles.thorax)?;
    if thorax.iter().any(Option::is_none) {
        return Ok(MeasurementReport::excluded(
            C,
            format!("thorax mask missing (label {})", missing_ids(&roles.thorax, &thorax)),
        ));
    }
    let mut heart = heart.into_iter().flatten();
    let first = heart.next().expect("heart role is non-empty");
    let heart = heart.try_fold(first, |acc, m| acc.union(&m))?;
    let thorax: Vec<Mask2D> = thorax.into_iter().flatten().collect();
    let thorax = thorax_from_parts(&thorax)?;
    Ok(cardiothoracic_ratio(&heart, &thorax, cfg)?)
}

fn measure_spine(
    study_dir: &Path,
    condition: Condition,
    roles: &RoleMapping,
    cfg: &MeasureConfig,
) -> CliResult<MeasurementReport> {
    let view = match condition {
        Condition::Kyphosis => View::Ll,
        _ => View::Pa,
    };
    let loaded = load_role(study_dir, view, &roles.vertebrae)?;
    // A missing vertebra file counts as an undetected vertebra.
    let Some((w, h)) = loaded.iter().flatten().map(Mask2D::size).next() else {
        return Ok(MeasurementReport::excluded(
            condition,
            format!("no {view} vertebral masks found"),
        ));
    };
    let masks = roles
        .vertebrae
        .iter()
        .zip(loaded)
        .map(|(&id, m)| match m {
            Some(m) => Ok(m),
            None => Mask2D::empty(view, id, w, h),
        })
        .collect::<drr_anatomy::Result<Vec<_>>>()?;
    let report = match condition {
        Condition::Kyphosis => kyphosis_cobb(&masks, cfg)?,
        _ => scoliosis_scd(&masks, cfg)?,
    };
    Ok(report)
}

pub fn measure_study(
    study_dir: &Path,
    condition: Condition,
    roles: &RoleMapping,
    cfg: &MeasureConfig,
) -> CliResult<MeasurementReport> {
    match condition {
        Condition::Cardiomegaly => measure_ctr(study_dir, roles, cfg),
        Condition::Scoliosis | Condition::Kyphosis => measure_spine(study_dir, condition, roles, cfg),
    }
}

pub fn run(args: &MeasureArgs, global: &Global) -> CliResult<()> {
    let conditions = parse_conditions(&args.conditions)?;
    let roles = RoleMapping::load(&args.mapping)?;
    check_roles(&roles, &conditions)?;
    let file = ConfigFile::load(global.config.as_deref())?;
    let mut flags = Map::new();
    if let Some(px) = args.min_component_px {
        flags.insert("min_component_px".into(), json!(px));
    }
    let flags = Value::Object(flags);
    let cfg: MeasureConfig = layered("measure", &[file.measure.as_ref(), Some(&flags)])?;
    let studies = list_studies(&args.masks_dir)?;
    // Committing a study directory replaces it, which would destroy the masks.
    if args.out.canonicalize().ok() == args.masks_dir.canonicalize().ok() {
        return Err(validation("--out must differ from the masks directory"));
    }

    let results: Vec<CliResult<()>> = studies
        .par_iter()
        .map(|study| {
            measure_one(study, args, &conditions, &roles, &cfg).map_err(|e| e.context(format!("study {study}")))
        })
        .collect();
    results.into_iter().collect()
}

fn measure_one(
    study: &str,
    args: &MeasureArgs,
    conditions: &[Condition],
    roles: &RoleMapping,
    cfg: &MeasureConfig,
) -> CliResult<()> {
    let dir = args.masks_dir.join(study);
    let stage = StagedDir::new(&args.out.join(study))?;
    for &c in conditions {
        let report = measure_study(&dir, c, roles, cfg)?;
        if let Some(reason) = &report.exclusion_reason {
            warn!("study {study}: {c} excluded: {reason}");
        }
        let doc = MeasureDocument {
            schema_version: SCHEMA_VERSION,
            study,
            config: cfg,
            report: &report,
        };
        write_json(&stage.path().join(format!("{c}.json")), &doc)?;
    }
    stage.commit()?;
    info!("measured study {study}");
    Ok(())
}
