//! Library side of the `photonkin` command-line tool: configuration
//! handling, experiment execution, validation, and run manifests.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod validate;

use std::path::PathBuf;
use std::time::Instant;

use config::ExperimentConfig;
use error::Result;
use manifest::RunManifest;

/// Run an experiment end to end. The manifest is written even when the
/// experiment fails; the returned artifact list includes it.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let outcome = experiments::run_experiment(cfg);
    let wall = start.elapsed().as_secs_f64();
    let view = match &outcome {
        Ok(v) => Ok(v.clone()),
        Err(e) => Err(e),
    };
    let manifest = RunManifest::build(cfg, &view, wall)?;
    let manifest_path = manifest.write(&cfg.out_dir)?;
    let mut artifacts = outcome?;
    artifacts.push(manifest_path);
    Ok(artifacts)
}
