use std::path::PathBuf;

use clap::Args;
use drr_anatomy::io::load_mask2d;
use drr_anatomy::metrics::{evaluate_class_set, ClassPair, ClassReport, MetricSummary, MetricsConfig};
use drr_anatomy::stats::BootstrapConfig;
use drr_anatomy::View;
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{layered, ConfigFile};
use crate::error::CliResult;
use crate::manifest::{resolve, EvalEntry, EvalManifest};
use crate::output::{to_json_bytes, write_file_atomic, SCHEMA_VERSION};
use crate::Global;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Pred/ref pair list (JSON).
    pub manifest: PathBuf,
    /// Output report path.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Bootstrap resamples for the aggregate intervals.
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Confidence level of the aggregate intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// NSD tolerance in pixels.
    #[arg(long)]
    pub nsd_tolerance: Option<f64>,
    /// Component IoU needed for a detection match.
    #[arg(long)]
    pub match_iou: Option<f64>,
}

#[derive(Serialize)]
struct EffectiveConfig<'a> {
    metrics: &'a MetricsConfig,
    bootstrap: &'a BootstrapConfig,
}

#[derive(Serialize)]
struct AggregateOut {
    n_classes: usize,
    n_degenerate: usize,
    /// Metric name to summary, in report order.
    metrics: Vec<NamedSummary>,
}

#[derive(Serialize)]
struct NamedSummary {
    metric: &'static str,
    #[serde(flatten)]
    summary: MetricSummary,
}

#[derive(Serialize)]
struct EvaluateDocument<'a> {
    schema_version: u32,
    config: EffectiveConfig<'a>,
    classes: &'a [ClassReport],
    aggregate: AggregateOut,
}

fn flag_layer(pairs: &[(&str, Option<Value>)]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        if let Some(v) = v {
            m.insert((*k).to_owned(), v.clone());
        }
    }
    Value::Object(m)
}

pub fn effective_config(
    args: &EvaluateArgs,
    manifest: &EvalManifest,
    file: &ConfigFile,
    seed: Option<u64>,
) -> CliResult<(MetricsConfig, BootstrapConfig)> {
    let metric_flags = flag_layer(&[
        ("nsd_tolerance_px", args.nsd_tolerance.map(|v| json!(v))),
        ("match_iou", args.match_iou.map(|v| json!(v))),
    ]);
    let boot_flags = flag_layer(&[
        ("n_resamples", args.resamples.map(|v| json!(v))),
        ("level", args.level.map(|v| json!(v))),
        ("seed", seed.map(|v| json!(v))),
    ]);
    let metrics: MetricsConfig = layered(
        "metrics",
        &[manifest.metrics.as_ref(), file.metrics.as_ref(), Some(&metric_flags)],
    )?;
    let boot: BootstrapConfig = layered(
        "bootstrap",
        &[manifest.bootstrap.as_ref(), file.bootstrap.as_ref(), Some(&boot_flags)],
    )?;
    metrics.validate()?;
    boot.validate()?;
    Ok((metrics, boot))
}

fn load_pair(entry: &EvalEntry, manifest: &EvalManifest) -> CliResult<ClassPair> {
    let class_id = entry.class_key()?;
    let view = entry.view.unwrap_or(View::Pa);
    let load = |p: &PathBuf| load_mask2d(resolve(&manifest.base, p), view, 0).map_err(|e| e.for_class(&class_id));
    Ok(ClassPair {
        pred: load(&entry.pred_path)?,
        reference: load(&entry.ref_path)?,
        class_id,
    })
}

pub fn run(args: &EvaluateArgs, global: &Global) -> CliResult<()> {
    let manifest = EvalManifest::load(&args.manifest)?;
    let file = ConfigFile::load(global.config.as_deref())?;
    let (metrics_cfg, boot) = effective_config(args, &manifest, &file, global.seed)?;

    let pairs = manifest
        .classes
        .par_iter()
        .map(|e| load_pair(e, &manifest))
        .collect::<CliResult<Vec<_>>>()?;
    let report = evaluate_class_set(&pairs, &metrics_cfg, &boot)?;

    let doc = EvaluateDocument {
        schema_version: SCHEMA_VERSION,
        config: EffectiveConfig {
            metrics: &metrics_cfg,
            bootstrap: &boot,
        },
        classes: &report.classes,
        aggregate: AggregateOut {
            n_classes: report.aggregate.n_classes,
            n_degenerate: report.aggregate.n_degenerate,
            metrics: report
                .aggregate
                .ordered()
                .into_iter()
                .map(|(metric, summary)| NamedSummary { metric, summary })
                .collect(),
        },
    };
    write_file_atomic(&args.out, &to_json_bytes(&doc)?)?;
    info!("evaluated {} classes", report.classes.len());
    Ok(())
}
