use std::collections::{HashMap, HashSet};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::auc::roc_auc;
use super::model::{
    decode, gcn_forward, loss_and_gradients, GcnInput, ModelDims, ModelState, Params, Sample,
};
use super::split::{sample_non_edges, DataSplit};
use crate::error::{invalid, Result};
use crate::graph::Graph;

/// Per-pair image vectors fed to the decoder.
pub trait ImageProvider {
    fn dim(&self) -> usize;
    fn image(&self, u: usize, v: usize) -> Option<&[f64]>;
}

/// Precomputed images keyed by unordered pair.
#[derive(Clone, Debug, Default)]
pub struct PairImages {
    dim: usize,
    images: HashMap<(usize, usize), Vec<f64>>,
}

impl PairImages {
    pub fn new(dim: usize) -> Self {
        PairImages {
            dim,
            images: HashMap::new(),
        }
    }

    pub fn insert(&mut self, u: usize, v: usize, image: Vec<f64>) -> Result<()> {
        if image.len() != self.dim {
            return Err(invalid(format!(
                "image of length {} where {} expected",
                image.len(),
                self.dim
            )));
        }
        self.images.insert((u.min(v), u.max(v)), image);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

impl ImageProvider for PairImages {
    fn dim(&self) -> usize {
        self.dim
    }

    fn image(&self, u: usize, v: usize) -> Option<&[f64]> {
        self.images.get(&(u.min(v), u.max(v))).map(Vec::as_slice)
    }
}

/// The same zero vector for every pair: the topology ablation.
#[derive(Clone, Debug)]
pub struct ZeroImages {
    zeros: Vec<f64>,
}

impl ZeroImages {
    pub fn new(dim: usize) -> Self {
        ZeroImages {
            zeros: vec![0.0; dim],
        }
    }
}

impl ImageProvider for ZeroImages {
    fn dim(&self) -> usize {
        self.zeros.len()
    }

    fn image(&self, _: usize, _: usize) -> Option<&[f64]> {
        Some(&self.zeros)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub patience: usize,
    pub seed: u64,
    pub hidden: usize,
    pub embed: usize,
    pub mlp_hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 2000,
            lr: 0.01,
            weight_decay: 0.0,
            patience: 200,
            seed: 0,
            hidden: 100,
            embed: 16,
            mlp_hidden: 64,
        }
    }
}

impl TrainConfig {
    pub fn dims(&self, input: usize, image: usize) -> ModelDims {
        ModelDims {
            input,
            hidden: self.hidden,
            embed: self.embed,
            image,
            mlp_hidden: self.mlp_hidden,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub test_auc: f64,
    pub best_epoch: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// State at the best validation epoch.
    pub state: ModelState,
    /// State after the last epoch run.
    pub last: ModelState,
    pub history: Vec<EpochMetrics>,
    pub report: Report,
}

pub fn history_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,train_loss,val_auc\n");
    for h in history {
        out.push_str(&format!("{},{},{}\n", h.epoch, h.train_loss, h.val_auc));
    }
    out
}

/// Graph used for message passing: `g` without validation and test positives.
pub fn training_graph(g: &Graph, split: &DataSplit) -> Graph {
    let held_out: Vec<(usize, usize)> = split
        .val_pos
        .iter()
        .chain(&split.test_pos)
        .copied()
        .collect();
    g.without_edges(&held_out)
}

const RNG_STREAM_INIT: u64 = 1;
const RNG_STREAM_NEGATIVES: u64 = 2;

/// Training negatives for every epoch, as drawn by [`train`] with the same
/// seed: non-edges of `g`, distinct within an epoch, never one of the
/// evaluation negatives.
pub fn negative_schedule(
    g: &Graph,
    split: &DataSplit,
    epochs: usize,
    seed: u64,
) -> Result<Vec<Vec<(usize, usize)>>> {
    let n = g.node_count();
    let reserved: HashSet<(usize, usize)> = split
        .val_neg
        .iter()
        .chain(&split.test_neg)
        .copied()
        .collect();
    let available = n * n.saturating_sub(1) / 2 - g.edge_count() - reserved.len();
    let count = split.train_pos.len();
    if available < count {
        return Err(invalid(format!(
            "{count} training negatives needed per epoch, only {available} non-edges available"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RNG_STREAM_NEGATIVES);
    Ok((0..epochs)
        .map(|_| {
            let mut taken = reserved.clone();
            sample_non_edges(g, count, &mut taken, &mut rng)
        })
        .collect())
}

fn samples<'a>(
    pairs: &[(usize, usize)],
    label: bool,
    images: &'a dyn ImageProvider,
    out: &mut Vec<Sample<'a>>,
) -> Result<()> {
    for &(u, v) in pairs {
        let image = images
            .image(u, v)
            .ok_or_else(|| invalid(format!("no image for pair ({u}, {v})")))?;
        out.push(Sample { u, v, label, image });
    }
    Ok(())
}

/// Link probabilities for `pairs`.
pub fn score_pairs(
    input: &GcnInput,
    params: &Params,
    pairs: &[(usize, usize)],
    images: &dyn ImageProvider,
) -> Result<Vec<f64>> {
    let h = gcn_forward(input, params).h;
    pairs
        .iter()
        .map(|&(u, v)| {
            let image = images
                .image(u, v)
                .ok_or_else(|| invalid(format!("no image for pair ({u}, {v})")))?;
            Ok(decode(h.row(u), h.row(v), image, params))
        })
        .collect()
}

fn evaluate(
    input: &GcnInput,
    params: &Params,
    pos: &[(usize, usize)],
    neg: &[(usize, usize)],
    images: &dyn ImageProvider,
) -> Result<f64> {
    let mut scores = score_pairs(input, params, pos, images)?;
    scores.extend(score_pairs(input, params, neg, images)?);
    let labels: Vec<bool> = (0..pos.len() + neg.len()).map(|i| i < pos.len()).collect();
    roc_auc(&scores, &labels)
}

/// Full-batch training with fresh negatives each epoch and early stopping on
/// validation ROC-AUC. `g` is the full graph; validation and test positives
/// are removed before message passing.
pub fn train(
    g: &Graph,
    x: &Array2<f64>,
    split: &DataSplit,
    images: &dyn ImageProvider,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if x.nrows() != g.node_count() {
        return Err(invalid(format!(
            "{} feature rows for {} nodes",
            x.nrows(),
            g.node_count()
        )));
    }
    if !(cfg.lr >= 0.0 && cfg.lr.is_finite()) || !(cfg.weight_decay >= 0.0) {
        return Err(invalid(
            "learning rate and weight decay must be nonnegative",
        ));
    }
    let input = GcnInput::new(&training_graph(g, split), x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(RNG_STREAM_INIT);
    let mut state = ModelState::new(&cfg.dims(x.ncols(), images.dim()), &mut rng);
    let schedule = negative_schedule(g, split, cfg.epochs, cfg.seed)?;

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ModelState)> = None;
    let mut stale = 0;
    for (epoch, negatives) in (1..).zip(&schedule) {
        let mut batch = Vec::with_capacity(2 * negatives.len());
        samples(&split.train_pos, true, images, &mut batch)?;
        samples(negatives, false, images, &mut batch)?;
        let (train_loss, grad) = loss_and_gradients(&input, &state.params, &batch);
        state
            .optimizer
            .update(&mut state.params, &grad, cfg.lr, cfg.weight_decay);
        if !state.params.is_finite() {
            return Err(invalid(format!("parameters diverged at epoch {epoch}")));
        }
        let val_auc = evaluate(
            &input,
            &state.params,
            &split.val_pos,
            &split.val_neg,
            images,
        )?;
        history.push(EpochMetrics {
            epoch,
            train_loss,
            val_auc,
        });
        if best.as_ref().map_or(true, |b| val_auc > b.0) {
            best = Some((val_auc, epoch, state.clone()));
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
    }

    let last = state;
    let (best_epoch, state) = match best {
        Some((_, epoch, s)) => (epoch, s),
        None => (0, last.clone()),
    };
    let test_auc = evaluate(
        &input,
        &state.params,
        &split.test_pos,
        &split.test_neg,
        images,
    )?;
    Ok(TrainOutcome {
        state,
        last,
        history,
        report: Report {
            test_auc,
            best_epoch,
            seed: cfg.seed,
        },
    })
}
