use anyhow::{bail, Context, Result};
use serde::Deserialize;

/// Flat key-value settings for `train`, e.g.
///
/// ```toml
/// epochs = 500
/// lr = 0.01
/// metric = "ricci"
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub k: Option<usize>,
    pub metric: Option<String>,
    pub alpha: Option<f64>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub patience: Option<usize>,
    pub hidden: Option<usize>,
    pub embed: Option<usize>,
    pub mlp_hidden: Option<usize>,
    pub resolution: Option<String>,
    pub transform: Option<String>,
    pub workers: Option<usize>,
    pub ablate_topology: Option<bool>,
}

impl TrainFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid training config")
    }
}

/// `ROWSxCOLS`.
pub fn parse_resolution(text: &str) -> Result<(usize, usize)> {
    let Some((rows, cols)) = text.split_once(['x', 'X']) else {
        bail!("resolution {text:?} is not ROWSxCOLS");
    };
    let rows: usize = rows
        .trim()
        .parse()
        .with_context(|| format!("bad resolution {text:?}"))?;
    let cols: usize = cols
        .trim()
        .parse()
        .with_context(|| format!("bad resolution {text:?}"))?;
    if rows == 0 || cols == 0 {
        bail!("resolution {text:?} must be positive");
    }
    Ok((rows, cols))
}
