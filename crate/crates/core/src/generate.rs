//! Seeded random graph generators.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::Graph;

/// Stochastic block model with `communities` equal blocks of consecutive
/// node ids. Intra-block pairs are linked with probability `p`, inter-block
/// pairs with `q`. Node features are i.i.d. uniform in `[0, 1)`.
pub fn sbm_generate(
    n: usize,
    communities: usize,
    p: f64,
    q: f64,
    feature_dim: usize,
    seed: u64,
) -> Result<Graph> {
    if communities == 0 || n % communities != 0 {
        return Err(invalid(format!(
            "{communities} communities do not divide {n} nodes"
        )));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || q > p {
        return Err(invalid(format!("need 0 <= q <= p <= 1, got p={p}, q={q}")));
    }
    let block = n / communities;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let prob = if u / block == v / block { p } else { q };
            if rng.gen::<f64>() < prob {
                edges.push((u, v));
            }
        }
    }
    let mut g = Graph::new(n, edges)?;
    let features = Array2::from_shape_fn((n, feature_dim), |_| rng.gen::<f64>());
    g.set_features(features)?;
    Ok(g)
}

/// Community index of each node under [`sbm_generate`]'s layout.
pub fn sbm_communities(n: usize, communities: usize) -> Vec<usize> {
    let block = n / communities.max(1);
    (0..n).map(|v| v / block.max(1)).collect()
}

/// Erdős–Rényi G(n, p).
pub fn gnp_random(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

/// Uniform random graph with exactly `m` edges, G(n, m).
pub fn gnm_random(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(invalid(format!("{m} edges exceed the {pairs} node pairs")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, pairs, m).into_vec();
    chosen.sort_unstable();
    let edges = chosen.into_iter().map(|idx| unrank_pair(n, idx));
    Graph::new(n, edges)
}

// Maps 0..n(n-1)/2 onto pairs (u, v), u < v, row by row.
fn unrank_pair(n: usize, mut idx: usize) -> (usize, usize) {
    let mut u = 0;
    loop {
        let row = n - 1 - u;
        if idx < row {
            return (u, u + 1 + idx);
        }
        idx -= row;
        u += 1;
    }
}
