use std::collections::BTreeSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::split::{make_split, DataSplit, SplitRatios};
use super::train::{
    negative_schedule, train, training_graph, EpochMetrics, ImageProvider, PairImages, Report,
    TrainConfig, ZeroImages,
};
use crate::error::Result;
use crate::graph::Graph;
use crate::image::{ImageSpec, Transform, DEFAULT_RESOLUTION};
use crate::pipeline::{attach_image, batch_diagrams, with_ricci_weights, Metric, PairConfig};

/// One link-prediction run: split, topological features, training.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pair: PairConfig,
    /// Idleness of the random walk behind the Ricci metric.
    pub ricci_alpha: f64,
    pub resolution: (usize, usize),
    pub transform: Transform,
    /// Zero every image, keeping the decoder's input width.
    pub ablate_topology: bool,
    pub workers: usize,
    pub split: SplitRatios,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pair: PairConfig::default(),
            ricci_alpha: 0.5,
            resolution: DEFAULT_RESOLUTION,
            transform: Transform::default(),
            ablate_topology: false,
            workers: 1,
            split: SplitRatios::default(),
            train: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub split: DataSplit,
    pub report: Report,
    pub history: Vec<EpochMetrics>,
    /// Absent for the ablation.
    pub image_spec: Option<ImageSpec>,
    pub image_pairs: usize,
    pub clamped_weights: usize,
}

/// Images for every pair the training run will touch, computed on the
/// training graph. The window is fitted to the training positives.
fn topological_images(
    g: &Graph,
    split: &DataSplit,
    cfg: &ExperimentConfig,
) -> Result<(PairImages, ImageSpec, usize)> {
    let base = training_graph(g, split);
    let (topo, clamped) = match cfg.pair.metric {
        Metric::Hop => (base, 0),
        Metric::Ricci => {
            let (weighted, w) = with_ricci_weights(&base, cfg.ricci_alpha)?;
            (weighted, w.clamped)
        }
    };

    let mut pairs: BTreeSet<(usize, usize)> = split
        .train_pos
        .iter()
        .chain(&split.val_pos)
        .chain(&split.test_pos)
        .chain(&split.val_neg)
        .chain(&split.test_neg)
        .copied()
        .collect();
    for epoch in negative_schedule(g, split, cfg.train.epochs, cfg.train.seed)? {
        pairs.extend(epoch);
    }
    let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
    let diagrams = batch_diagrams(&topo, &pairs, &cfg.pair, cfg.workers)?;

    let train_pos: BTreeSet<&(usize, usize)> = split.train_pos.iter().collect();
    let spec = ImageSpec::fit(
        diagrams
            .iter()
            .filter(|d| train_pos.contains(&d.pair))
            .map(|d| &d.diagram),
        cfg.resolution.0,
        cfg.resolution.1,
        cfg.transform,
    )?;
    let mut images = PairImages::new(spec.len());
    for d in diagrams {
        let f = attach_image(d, &spec);
        images.insert(f.pair.0, f.pair.1, f.image)?;
    }
    Ok((images, spec, clamped))
}

pub fn run_experiment(
    g: &Graph,
    x: &Array2<f64>,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    let split = make_split(g, cfg.split, cfg.train.seed)?;
    let dim = cfg.resolution.0 * cfg.resolution.1;
    let (provider, image_spec, image_pairs, clamped): (Box<dyn ImageProvider>, _, _, _) =
        if cfg.ablate_topology {
            (Box::new(ZeroImages::new(dim)), None, 0, 0)
        } else {
            let (images, spec, clamped) = topological_images(g, &split, cfg)?;
            let count = images.len();
            (Box::new(images), Some(spec), count, clamped)
        };
    let outcome = train(g, x, &split, &*provider, &cfg.train)?;
    Ok(ExperimentOutcome {
        split,
        report: outcome.report,
        history: outcome.history,
        image_spec,
        image_pairs,
        clamped_weights: clamped,
    })
}
