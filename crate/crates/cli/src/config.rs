//! Run configuration: defaults, optional JSON config file, flag overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dpsynth_core::pipeline::PipelineParams;
use dpsynth_core::{Error, Result};

/// Optional config file; any present field replaces the default, and any
/// explicit command-line flag wins over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<u64>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub iterations: Option<u32>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub schema: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParamFlags {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<u64>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub iterations: Option<u32>,
    pub seed: Option<u64>,
}

/// Seed precedence: flag, then config file, then DPSYNTH_SEED, then 0.
pub fn seed_fallback() -> Option<u64> {
    std::env::var("DPSYNTH_SEED").ok().and_then(|s| s.parse().ok())
}

pub fn resolve_params(file: &ConfigFile, flags: &ParamFlags) -> Result<PipelineParams> {
    let defaults = PipelineParams::default();
    let params = PipelineParams {
        epsilon: flags.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
        alpha: flags.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        beta: flags.beta.or(file.beta).unwrap_or(defaults.beta),
        gamma: flags.gamma.or(file.gamma).unwrap_or(defaults.gamma),
        gamma1: flags.gamma1.or(file.gamma1).unwrap_or(defaults.gamma1),
        gamma2: flags.gamma2.or(file.gamma2).unwrap_or(defaults.gamma2),
        iterations: flags
            .iterations
            .or(file.iterations)
            .unwrap_or(defaults.iterations),
        seed: flags
            .seed
            .or(file.seed)
            .or_else(seed_fallback)
            .unwrap_or(defaults.seed),
    };
    params.validate()?;
    Ok(params)
}
