use std::path::{Path, PathBuf};

use clap::Args;
use drr_anatomy::io::{load_label_volume, load_volume, save_mask2d, save_projection, volume_paths};
use drr_anatomy::projection::{project_study, ProjectionConfig};
use drr_anatomy::View;
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{layered, ConfigFile};
use crate::error::{validation, CliError, CliResult};
use crate::manifest::{resolve, StudyEntry, StudyManifest};
use crate::output::{sha256_file, write_json, StagedDir, SCHEMA_VERSION};
use crate::Global;

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Study manifest (JSON).
    pub manifest: PathBuf,
    /// Output root; one directory per study is written beneath it.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Isotropic output pixel size in millimetres.
    #[arg(long)]
    pub target_spacing: Option<f64>,
    /// Final image size, e.g. 512x512.
    #[arg(long, value_parser = parse_size)]
    pub output_size: Option<[usize; 2]>,
    /// Views to produce, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub views: Option<Vec<View>>,
}

fn parse_size(s: &str) -> Result<[usize; 2], String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok([parse(w)?, parse(h)?])
}

#[derive(Serialize)]
struct InputFile {
    /// As written in the manifest.
    path: PathBuf,
    sidecar_sha256: String,
    raw_sha256: String,
}

#[derive(Serialize)]
struct LabelInput {
    label_id: u32,
    #[serde(flatten)]
    file: InputFile,
}

#[derive(Serialize)]
struct Provenance<'a> {
    schema_version: u32,
    tool: Value,
    study: &'a str,
    volume: InputFile,
    labels: Vec<LabelInput>,
    config: &'a ProjectionConfig,
    seed: Option<u64>,
    outputs: Vec<String>,
}

fn hash_input(base: &Path, written: &Path) -> CliResult<InputFile> {
    let (json, raw) = volume_paths(resolve(base, written));
    Ok(InputFile {
        path: written.to_owned(),
        sidecar_sha256: sha256_file(&json)?,
        raw_sha256: sha256_file(&raw)?,
    })
}

pub fn effective_config(
    args: &ProjectArgs,
    manifest: &StudyManifest,
    file: &ConfigFile,
) -> CliResult<ProjectionConfig> {
    let mut flags = Map::new();
    if let Some(s) = args.target_spacing {
        flags.insert("target_pixel_spacing".into(), json!(s));
    }
    if let Some(size) = args.output_size {
        flags.insert("output_size".into(), json!(size));
    }
    if let Some(views) = &args.views {
        flags.insert("views".into(), json!(views));
    }
    let flags = Value::Object(flags);
    let cfg: ProjectionConfig = layered(
        "projection",
        &[manifest.projection.as_ref(), file.projection.as_ref(), Some(&flags)],
    )?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &ProjectArgs, global: &Global) -> CliResult<()> {
    let (manifest, base) = StudyManifest::load(&args.manifest)?;
    let file = ConfigFile::load(global.config.as_deref())?;
    let cfg = effective_config(args, &manifest, &file)?;
    check_out_dir(&args.out)?;

    // Studies are independent; the first failure in manifest order is reported.
    let results: Vec<CliResult<()>> = manifest
        .studies
        .par_iter()
        .map(|s| project_one(s, &base, &args.out, &cfg, global.seed).map_err(|e| e.context(format!("study {}", s.id))))
        .collect();
    results.into_iter().collect()
}

fn project_one(
    study: &StudyEntry,
    base: &Path,
    out: &Path,
    cfg: &ProjectionConfig,
    seed: Option<u64>,
) -> CliResult<()> {
    let volume = load_volume(resolve(base, &study.volume))?;
    let labels = study
        .labels
        .iter()
        .map(|l| load_label_volume(resolve(base, &l.path), l.label_id))
        .collect::<drr_anatomy::Result<Vec<_>>>()?;
    let views = project_study(&volume, &labels, cfg)?;

    let stage = StagedDir::new(&out.join(&study.id))?;
    let mut outputs = Vec::new();
    for vp in &views {
        let name = format!("{}.pgm", vp.view);
        save_projection(&vp.image, stage.path().join(&name))?;
        outputs.push(name);
        if !vp.masks.is_empty() {
            let dir = stage.path().join(vp.view.as_str());
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        for m in &vp.masks {
            let name = format!("{}/{}.pgm", vp.view, m.label_id);
            save_mask2d(m, stage.path().join(&name))?;
            outputs.push(name);
        }
    }

    let provenance = Provenance {
        schema_version: SCHEMA_VERSION,
        tool: json!({"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")}),
        study: &study.id,
        volume: hash_input(base, &study.volume)?,
        labels: study
            .labels
            .iter()
            .map(|l| {
                Ok(LabelInput {
                    label_id: l.label_id,
                    file: hash_input(base, &l.path)?,
                })
            })
            .collect::<CliResult<_>>()?,
        config: cfg,
        seed,
        outputs,
    };
    write_json(&stage.path().join("provenance.json"), &provenance)?;
    stage.commit()?;
    info!("projected study {} ({} labels)", study.id, study.labels.len());
    Ok(())
}

/// Rejects an output root that already exists as a file.
pub fn check_out_dir(out: &Path) -> CliResult<()> {
    if out.is_file() {
        return Err(validation(format!("{} is a file, expected a directory", out.display())));
    }
    Ok(())
}
