//! Writes the synthetic chest phantom as a study directory with a manifest
//! and a role mapping.
//!
//! Usage: `cargo run -p drr-anatomy --example write_phantom -- <dir>`

use std::path::PathBuf;

use drr_anatomy::io::{save_label_volume, save_volume};
use drr_anatomy::phantom::{self, chest_phantom};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir: PathBuf = std::env::args_os()
        .nth(1)
        .ok_or("usage: write_phantom <output dir>")?
        .into();
    let study = dir.join("phantom");
    std::fs::create_dir_all(study.join("labels"))?;

    let p = chest_phantom();
    save_volume(&p.volume, study.join("ct.json"))?;
    let mut labels = Vec::new();
    for l in &p.labels {
        let rel = format!("phantom/labels/{}.json", l.label_id());
        save_label_volume(l, dir.join(&rel))?;
        labels.push(json!({"label_id": l.label_id(), "path": rel}));
    }

    // superior first
    let vertebrae: Vec<u32> = phantom::VERTEBRAE.iter().rev().copied().collect();
    let roles = json!({
        "heart": [phantom::HEART],
        "thorax": [phantom::LUNG_A, phantom::LUNG_B],
        "vertebrae": vertebrae,
    });
    let manifest = json!({
        "schema_version": 1,
        "studies": [{"id": "phantom", "volume": "phantom/ct.json", "labels": labels}],
        "projection": {"target_pixel_spacing": 1.0},
        "roles": roles,
    });
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    std::fs::write(dir.join("mapping.json"), serde_json::to_string_pretty(&roles)? + "\n")?;
    Ok(())
}
