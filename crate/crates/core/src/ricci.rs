//! Ollivier-Ricci edge curvature with exact Wasserstein-1 transport.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::graph::{hop_distances, Graph};

const MASS_TOL: f64 = 1e-9;
const FLOW_EPS: f64 = 1e-15;

/// Probability measure on a finite node set.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<usize>,
    mass: Vec<f64>,
}

impl DiscreteMeasure {
    /// Masses must be nonnegative and sum to one (within 1e-9). Repeated
    /// nodes are merged.
    pub fn new(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, f64)> = entries.into_iter().collect();
        pairs.sort_by_key(|p| p.0);
        let mut support: Vec<usize> = Vec::with_capacity(pairs.len());
        let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
        for (node, m) in pairs {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(invalid(format!(
                    "mass {m} at node {node} is not a nonnegative number"
                )));
            }
            if support.last() == Some(&node) {
                *mass.last_mut().unwrap() += m;
            } else {
                support.push(node);
                mass.push(m);
            }
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { support, mass })
    }

    pub fn point(node: usize) -> Self {
        DiscreteMeasure {
            support: vec![node],
            mass: vec![1.0],
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }
}

/// Exact W1 between two measures under `cost(a, b)`.
pub fn wasserstein1(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    let table: Vec<Vec<f64>> = mu
        .support
        .iter()
        .map(|&a| nu.support.iter().map(|&b| cost(a, b)).collect())
        .collect();
    transport_cost(&mu.mass, &nu.mass, &table)
}

/// Minimum-cost transportation: ship `supply[i]` to meet `demand[j]` with
/// per-unit cost `cost[i][j]`. Solved by successive shortest augmenting
/// paths (Bellman-Ford on the residual network), exact up to rounding.
pub fn transport_cost(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<f64> {
    let (r, c) = (supply.len(), demand.len());
    let total_supply: f64 = supply.iter().sum();
    let total_demand: f64 = demand.iter().sum();
    if (total_supply - total_demand).abs() > MASS_TOL {
        return Err(invalid(format!(
            "supply {total_supply} and demand {total_demand} differ"
        )));
    }
    if cost.len() != r || cost.iter().any(|row| row.len() != c) {
        return Err(invalid("cost table shape does not match the measures"));
    }
    if let Some(x) = cost
        .iter()
        .flatten()
        .find(|x| !(**x >= 0.0 && x.is_finite()))
    {
        return Err(invalid(format!(
            "transport cost {x} is not a nonnegative number"
        )));
    }

    // residual network: flow[i][j] on i -> j, plus remaining supply/demand
    let mut flow = vec![vec![0.0; c]; r];
    let mut left_supply = supply.to_vec();
    let mut left_demand = demand.to_vec();
    // node ids: source = 0, supplies 1..=r, demands r+1..=r+c
    let nodes = r + c + 1;
    let max_rounds = 4 * (r + 1) * (c + 1) + 16;
    for _ in 0..max_rounds {
        let shipped_out: f64 = left_supply.iter().sum();
        if shipped_out <= MASS_TOL * 1e-3 {
            break;
        }
        let mut dist = vec![f64::INFINITY; nodes];
        let mut pred = vec![usize::MAX; nodes];
        dist[0] = 0.0;
        for i in 0..r {
            if left_supply[i] > FLOW_EPS {
                dist[1 + i] = 0.0;
                pred[1 + i] = 0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..r {
                let di = dist[1 + i];
                if di.is_finite() {
                    for j in 0..c {
                        let nd = di + cost[i][j];
                        if nd < dist[1 + r + j] - FLOW_EPS {
                            dist[1 + r + j] = nd;
                            pred[1 + r + j] = 1 + i;
                            changed = true;
                        }
                    }
                }
            }
            for j in 0..c {
                let dj = dist[1 + r + j];
                if dj.is_finite() {
                    for i in 0..r {
                        if flow[i][j] > FLOW_EPS {
                            let nd = dj - cost[i][j];
                            if nd < dist[1 + i] - FLOW_EPS {
                                dist[1 + i] = nd;
                                pred[1 + i] = 1 + r + j;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        // cheapest reachable demand node with demand left
        let target = (0..c)
            .filter(|&j| left_demand[j] > FLOW_EPS && dist[1 + r + j].is_finite())
            .min_by(|&a, &b| dist[1 + r + a].total_cmp(&dist[1 + r + b]));
        let Some(j_end) = target else {
            break;
        };
        // walk back to find the bottleneck
        let mut amount = left_demand[j_end];
        let mut node = 1 + r + j_end;
        while node != 0 {
            let p = pred[node];
            if p == 0 {
                amount = amount.min(left_supply[node - 1]);
            } else if node > r {
                // forward arc supply p -> demand node: uncapacitated
            } else {
                // backward arc demand p -> supply node cancels flow
                amount = amount.min(flow[node - 1][p - 1 - r]);
            }
            node = p;
        }
        let mut node = 1 + r + j_end;
        while node != 0 {
            let p = pred[node];
            if p == 0 {
                left_supply[node - 1] -= amount;
            } else if node > r {
                flow[p - 1][node - 1 - r] += amount;
            } else {
                flow[node - 1][p - 1 - r] -= amount;
            }
            node = p;
        }
        left_demand[j_end] -= amount;
    }
    let total = flow
        .iter()
        .zip(cost)
        .flat_map(|(frow, crow)| frow.iter().zip(crow).map(|(f, w)| f * w))
        .sum();
    Ok(total)
}

/// Lazy random-walk measure at `x`: `alpha` stays, the rest spreads
/// uniformly over the neighbors.
pub fn walk_measure(g: &Graph, x: usize, alpha: f64) -> DiscreteMeasure {
    let deg = g.degree(x);
    if deg == 0 {
        return DiscreteMeasure::point(x);
    }
    let share = (1.0 - alpha) / deg as f64;
    let mut support = vec![x];
    let mut mass = vec![alpha];
    for &(y, _) in g.neighbors(x) {
        support.push(y);
        mass.push(share);
    }
    DiscreteMeasure::new(support.into_iter().zip(mass)).expect("walk measure is normalized")
}

/// `kappa(x, y) = 1 - W1(m_x, m_y) / d(x, y)` for every edge, indexed by
/// edge id. Distances are hop counts.
pub fn ollivier_ricci(g: &Graph, alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(invalid(format!("idleness {alpha} outside [0, 1)")));
    }
    Ok(g.edges()
        .par_iter()
        .map(|&(x, y)| edge_curvature(g, x, y, alpha))
        .collect())
}

fn edge_curvature(g: &Graph, x: usize, y: usize, alpha: f64) -> f64 {
    let mx = walk_measure(g, x, alpha);
    let my = walk_measure(g, y, alpha);
    // supports sit within one hop of adjacent x, y: distances never exceed 3
    let rows: Vec<Vec<f64>> = mx
        .support()
        .iter()
        .map(|&a| {
            let d = hop_distances(g, a, 3);
            my.support().iter().map(|&b| d[b] as f64).collect()
        })
        .collect();
    let w1 = transport_cost(mx.masses(), my.masses(), &rows).expect("walk measures balance");
    1.0 - w1 / 1.0
}

/// Edge weights `1 + kappa`, with nonpositive results clamped.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciWeights {
    pub curvature: Vec<f64>,
    pub weights: Vec<f64>,
    /// How many weights were clamped to [`WEIGHT_FLOOR`].
    pub clamped: usize,
}

pub const WEIGHT_FLOOR: f64 = 1e-6;

pub fn weights_from_curvature(curvature: Vec<f64>) -> RicciWeights {
    let mut clamped = 0;
    let weights = curvature
        .iter()
        .map(|k| {
            let w = 1.0 + k;
            if w <= 0.0 {
                clamped += 1;
                WEIGHT_FLOOR
            } else {
                w
            }
        })
        .collect();
    RicciWeights {
        curvature,
        weights,
        clamped,
    }
}

pub fn ricci_edge_weights(g: &Graph, alpha: f64) -> Result<RicciWeights> {
    Ok(weights_from_curvature(ollivier_ricci(g, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Minimum cost over all vertices of the transportation polytope: every
    // vertex is the unique flow supported on some spanning tree of the
    // complete bipartite graph K(r, c).
    fn vertex_enumeration(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
        let (r, c) = (supply.len(), demand.len());
        let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
        let k = r + c - 1;
        let mut best = f64::INFINITY;
        let mut chosen = Vec::new();
        fn recurse(
            start: usize,
            k: usize,
            cells: &[(usize, usize)],
            chosen: &mut Vec<(usize, usize)>,
            f: &mut dyn FnMut(&[(usize, usize)]),
        ) {
            if chosen.len() == k {
                f(chosen);
                return;
            }
            for idx in start..cells.len() {
                chosen.push(cells[idx]);
                recurse(idx + 1, k, cells, chosen, f);
                chosen.pop();
            }
        }
        recurse(0, k, &cells, &mut chosen, &mut |basis| {
            let mut s = supply.to_vec();
            let mut d = demand.to_vec();
            let mut open: Vec<(usize, usize)> = basis.to_vec();
            let mut total = 0.0;
            while !open.is_empty() {
                // a row or column with exactly one open cell fixes that cell
                let leaf = open.iter().position(|&(i, j)| {
                    open.iter().filter(|x| x.0 == i).count() == 1
                        || open.iter().filter(|x| x.1 == j).count() == 1
                });
                let Some(pos) = leaf else { return };
                let (i, j) = open.swap_remove(pos);
                let row_leaf = open.iter().all(|x| x.0 != i);
                let amount = if row_leaf { s[i] } else { d[j] };
                if amount < -1e-12 {
                    return;
                }
                s[i] -= amount;
                d[j] -= amount;
                total += amount * cost[i][j];
            }
            if s.iter().chain(&d).all(|x| x.abs() < 1e-9) {
                best = best.min(total);
            }
        });
        best
    }

    fn random_measure(rng: &mut ChaCha8Rng, size: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..size).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let mu = DiscreteMeasure::new([(0, 0.25), (1, 0.5), (2, 0.25)]).unwrap();
        let w = wasserstein1(&mu, &mu, |a, b| (a as f64 - b as f64).abs()).unwrap();
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn point_masses() {
        let w = wasserstein1(
            &DiscreteMeasure::point(3),
            &DiscreteMeasure::point(7),
            |_, _| 2.5,
        )
        .unwrap();
        assert_eq!(w, 2.5);
    }

    #[test]
    fn rejects_unbalanced_and_bad_measures() {
        assert!(DiscreteMeasure::new([(0, 0.5), (1, 0.4)]).is_err());
        assert!(DiscreteMeasure::new([(0, 1.5), (1, -0.5)]).is_err());
        assert!(transport_cost(&[1.0], &[0.5, 0.4], &[vec![1.0, 1.0]]).is_err());
        assert!(transport_cost(&[1.0], &[1.0], &[vec![-1.0]]).is_err());
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let r = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=4);
            let supply = random_measure(&mut rng, r);
            let demand = random_measure(&mut rng, c);
            let cost: Vec<Vec<f64>> = (0..r)
                .map(|_| (0..c).map(|_| rng.gen_range(0.0..5.0)).collect())
                .collect();
            let got = transport_cost(&supply, &demand, &cost).unwrap();
            let want = vertex_enumeration(&supply, &demand, &cost);
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn symmetric_and_scales_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let a = random_measure(&mut rng, 4);
            let b = random_measure(&mut rng, 3);
            let cost: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..3).map(|_| rng.gen_range(0.0..2.0)).collect())
                .collect();
            let transposed: Vec<Vec<f64>> = (0..3)
                .map(|j| (0..4).map(|i| cost[i][j]).collect())
                .collect();
            let w = transport_cost(&a, &b, &cost).unwrap();
            let back = transport_cost(&b, &a, &transposed).unwrap();
            assert!((w - back).abs() < 1e-12);
            let scaled: Vec<Vec<f64>> = cost
                .iter()
                .map(|r| r.iter().map(|x| 3.0 * x).collect())
                .collect();
            assert!((transport_cost(&a, &b, &scaled).unwrap() - 3.0 * w).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_is_flat() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let k = ollivier_ricci(&g, 0.5).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-12);
        let w = ricci_edge_weights(&g, 0.5).unwrap();
        assert!((w.weights[0] - 2.0).abs() < 1e-12);
        assert_eq!(w.clamped, 0);
    }

    #[test]
    fn triangle_curvature_matches_enumeration() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let k = ollivier_ricci(&g, 0.5).unwrap();
        // m_0 = (1/2, 1/4, 1/4), m_1 = (1/4, 1/2, 1/4) on nodes 0, 1, 2
        let cost: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        let w1 = vertex_enumeration(&[0.5, 0.25, 0.25], &[0.25, 0.5, 0.25], &cost);
        assert!((w1 - 0.25).abs() < 1e-12);
        for kappa in k {
            assert!((kappa - (1.0 - w1)).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_bounded_and_symmetric() {
        let g = crate::generate::gnp_random(25, 0.2, 9).unwrap();
        let k = ollivier_ricci(&g, 0.5).unwrap();
        assert!(k.iter().all(|&x| x <= 1.0 + 1e-12));
        // reversing endpoints of each edge does not change curvature
        for (e, &(x, y)) in g.edges().iter().enumerate() {
            assert!((edge_curvature(&g, y, x, 0.5) - k[e]).abs() < 1e-12);
        }
        assert!(ollivier_ricci(&g, 1.0).is_err());
    }

    #[test]
    fn clamp_rule() {
        let w = weights_from_curvature(vec![0.0, -1.2, 0.5]);
        assert_eq!(w.weights, vec![1.0, WEIGHT_FLOOR, 1.5]);
        assert_eq!(w.clamped, 1);
    }
}
