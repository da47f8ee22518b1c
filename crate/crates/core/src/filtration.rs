//! Vertex filters and the ascending/descending simplex orders built from them.
//!
//! Edges inherit `max` of their endpoint values in the ascending (sublevel)
//! pass and `min` in the descending (superlevel) pass. Ties are broken
//! lexicographically so that both diagram algorithms consume the exact same
//! total order:
//!
//! * ascending nodes by `(f, id)`, ascending edges by
//!   `(f_asc, f of the other endpoint, id of the later endpoint, id of the earlier endpoint)`;
//! * descending nodes and edges by the mirror-image keys, decreasing;
//! * at equal filter value a node precedes an edge, so every edge follows
//!   both endpoints.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{shortest_distances, EnclosingSubgraph, Graph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexFilter {
    pub values: Vec<f64>,
}

impl VertexFilter {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFilter { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `f(w) = d(w, v1) + d(w, v2)` on the enclosing subgraph. Nodes that cannot
/// reach both targets get one more than the largest finite value.
pub fn distance_sum_filter(sub: &EnclosingSubgraph, use_weights: bool) -> VertexFilter {
    let (t1, t2) = sub.targets;
    let d1 = shortest_distances(&sub.graph, t1, use_weights).expect("target in subgraph");
    let d2 = shortest_distances(&sub.graph, t2, use_weights).expect("target in subgraph");
    let mut values: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();
    let max_finite = values
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(None, |acc: Option<f64>, x| {
            Some(acc.map_or(x, |m| m.max(x)))
        });
    let clamp = max_finite.unwrap_or(0.0) + 1.0;
    for x in values.iter_mut().filter(|x| !x.is_finite()) {
        *x = clamp;
    }
    VertexFilter { values }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Simplex {
    Node(usize),
    /// Index into [`FiltrationOrder::edges`].
    Edge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationOrder {
    edges: Vec<(usize, usize)>,
    node_values: Vec<f64>,
    edge_asc: Vec<f64>,
    edge_desc: Vec<f64>,
    ascending: Vec<Simplex>,
    descending: Vec<Simplex>,
    asc_node_pos: Vec<usize>,
    asc_edge_pos: Vec<usize>,
    desc_node_pos: Vec<usize>,
    desc_edge_pos: Vec<usize>,
}

// Sort key of a simplex; `primary` is its filter value in the pass.
struct Key {
    primary: f64,
    is_edge: bool,
    secondary: f64,
    first_id: usize,
    second_id: usize,
}

fn cmp_keys(a: &Key, b: &Key) -> Ordering {
    a.primary
        .total_cmp(&b.primary)
        .then(a.is_edge.cmp(&b.is_edge))
        .then(a.secondary.total_cmp(&b.secondary))
        .then(a.first_id.cmp(&b.first_id))
        .then(a.second_id.cmp(&b.second_id))
}

pub fn build_filtration(g: &Graph, f: &VertexFilter) -> Result<FiltrationOrder> {
    FiltrationOrder::new(g.node_count(), g.edges().to_vec(), f.values.clone())
}

impl FiltrationOrder {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, node_values: Vec<f64>) -> Result<Self> {
        if node_values.len() != n {
            return Err(invalid(format!(
                "filter has {} values for {n} nodes",
                node_values.len()
            )));
        }
        if let Some(x) = node_values.iter().find(|x| !x.is_finite()) {
            return Err(invalid(format!("filter value {x} is not finite")));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n || u == v) {
            return Err(invalid(format!("edge ({u},{v}) is invalid for {n} nodes")));
        }
        let f = &node_values;
        // (f, id) order decides which endpoint is "later"
        let later = |a: usize, b: usize| {
            if f[a].total_cmp(&f[b]).then(a.cmp(&b)) == Ordering::Greater {
                (a, b)
            } else {
                (b, a)
            }
        };
        let edge_asc: Vec<f64> = edges.iter().map(|&(u, v)| f[u].max(f[v])).collect();
        let edge_desc: Vec<f64> = edges.iter().map(|&(u, v)| f[u].min(f[v])).collect();

        let asc_key = |s: &Simplex| match *s {
            Simplex::Node(v) => Key {
                primary: f[v],
                is_edge: false,
                secondary: f[v],
                first_id: v,
                second_id: v,
            },
            Simplex::Edge(e) => {
                let (hi, lo) = later(edges[e].0, edges[e].1);
                Key {
                    primary: f[hi],
                    is_edge: true,
                    secondary: f[lo],
                    first_id: hi,
                    second_id: lo,
                }
            }
        };
        // Mirror image: negate values and reverse id comparisons, so an
        // increasing sort of the key yields the descending sequence.
        let desc_key = |s: &Simplex| match *s {
            Simplex::Node(v) => Key {
                primary: -f[v],
                is_edge: false,
                secondary: -f[v],
                first_id: usize::MAX - v,
                second_id: usize::MAX - v,
            },
            Simplex::Edge(e) => {
                let (hi, lo) = later(edges[e].0, edges[e].1);
                Key {
                    primary: -f[lo],
                    is_edge: true,
                    secondary: -f[hi],
                    first_id: usize::MAX - lo,
                    second_id: usize::MAX - hi,
                }
            }
        };

        let simplices: Vec<Simplex> = (0..n)
            .map(Simplex::Node)
            .chain((0..edges.len()).map(Simplex::Edge))
            .collect();
        let mut ascending = simplices.clone();
        ascending.sort_by(|a, b| cmp_keys(&asc_key(a), &asc_key(b)));
        let mut descending = simplices;
        descending.sort_by(|a, b| cmp_keys(&desc_key(a), &desc_key(b)));

        let positions = |seq: &[Simplex]| {
            let mut node_pos = vec![0; n];
            let mut edge_pos = vec![0; edges.len()];
            for (i, s) in seq.iter().enumerate() {
                match *s {
                    Simplex::Node(v) => node_pos[v] = i,
                    Simplex::Edge(e) => edge_pos[e] = i,
                }
            }
            (node_pos, edge_pos)
        };
        let (asc_node_pos, asc_edge_pos) = positions(&ascending);
        let (desc_node_pos, desc_edge_pos) = positions(&descending);

        Ok(FiltrationOrder {
            edges,
            node_values,
            edge_asc,
            edge_desc,
            ascending,
            descending,
            asc_node_pos,
            asc_edge_pos,
            desc_node_pos,
            desc_edge_pos,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_values.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Total number of simplices, nodes plus edges.
    pub fn len(&self) -> usize {
        self.ascending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ascending.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_value(&self, v: usize) -> f64 {
        self.node_values[v]
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    /// Edge value in the ascending pass, `max(f(u), f(v))`.
    pub fn f_asc(&self, e: usize) -> f64 {
        self.edge_asc[e]
    }

    /// Edge value in the descending pass, `min(f(u), f(v))`.
    pub fn f_desc(&self, e: usize) -> f64 {
        self.edge_desc[e]
    }

    pub fn ascending(&self) -> &[Simplex] {
        &self.ascending
    }

    pub fn descending(&self) -> &[Simplex] {
        &self.descending
    }

    pub fn asc_position(&self, s: Simplex) -> usize {
        match s {
            Simplex::Node(v) => self.asc_node_pos[v],
            Simplex::Edge(e) => self.asc_edge_pos[e],
        }
    }

    pub fn desc_position(&self, s: Simplex) -> usize {
        match s {
            Simplex::Node(v) => self.desc_node_pos[v],
            Simplex::Edge(e) => self.desc_edge_pos[e],
        }
    }

    /// Edge ids in ascending order.
    pub fn ascending_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.ascending.iter().filter_map(|s| match *s {
            Simplex::Edge(e) => Some(e),
            Simplex::Node(_) => None,
        })
    }

    /// Edge ids in descending order.
    pub fn descending_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.descending.iter().filter_map(|s| match *s {
            Simplex::Edge(e) => Some(e),
            Simplex::Node(_) => None,
        })
    }
}
