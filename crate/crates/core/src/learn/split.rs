use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::Graph;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.85,
            val: 0.05,
            test: 0.10,
        }
    }
}

/// Edge split for link prediction. Validation and test carry as many
/// sampled non-edges as positives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train_pos: Vec<(usize, usize)>,
    pub val_pos: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub val_neg: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
    pub seed: u64,
}

pub const MIN_SPLIT_EDGES: usize = 20;

pub fn make_split(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<DataSplit> {
    let m = g.edge_count();
    if m < MIN_SPLIT_EDGES {
        return Err(invalid(format!(
            "need at least {MIN_SPLIT_EDGES} edges to split, graph has {m}"
        )));
    }
    let total = ratios.train + ratios.val + ratios.test;
    if ratios.val < 0.0 || ratios.test < 0.0 || ratios.train <= 0.0 || (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!(
            "split ratios {ratios:?} must be nonnegative and sum to 1"
        )));
    }
    let n_val = (m as f64 * ratios.val).round() as usize;
    let n_test = (m as f64 * ratios.test).round() as usize;
    let n = g.node_count();
    let non_edges = n * (n - 1) / 2 - m;
    if non_edges < n_val + n_test {
        return Err(invalid("graph too dense to sample evaluation non-edges"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges().to_vec();
    edges.shuffle(&mut rng);
    let val_pos = edges[..n_val].to_vec();
    let test_pos = edges[n_val..n_val + n_test].to_vec();
    let train_pos = edges[n_val + n_test..].to_vec();

    let mut taken = HashSet::new();
    let val_neg = sample_non_edges(g, n_val, &mut taken, &mut rng);
    let test_neg = sample_non_edges(g, n_test, &mut taken, &mut rng);
    Ok(DataSplit {
        train_pos,
        val_pos,
        test_pos,
        val_neg,
        test_neg,
        seed,
    })
}

/// Uniform non-edges `(u, v)`, `u < v`, avoiding `g`'s edges and anything
/// already in `taken`; the sampled pairs are added to `taken`.
/// The caller must ensure enough candidates exist.
pub fn sample_non_edges(
    g: &Graph,
    count: usize,
    taken: &mut HashSet<(usize, usize)>,
    rng: &mut impl Rng,
) -> Vec<(usize, usize)> {
    let n = g.node_count();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if g.has_edge(pair.0, pair.1) || !taken.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    out
}
