//! Undirected weighted graphs and the neighborhood queries the pairwise
//! features are built on.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{invalid, Error, Result};

/// An undirected simple graph on nodes `0..n`.
///
/// Edges are stored with `u < v`; the edge index is its position in
/// [`Graph::edges`]. Every edge carries a strictly positive weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
    features: Option<Array2<f64>>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a unit-weight graph. Rejects self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v, 1.0)?;
        }
        Ok(g)
    }

    pub fn with_weights(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            weights: Vec::new(),
            adjacency: vec![Vec::new(); n],
            index: HashMap::new(),
            features: None,
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<usize> {
        if u >= self.n || v >= self.n {
            return Err(invalid(format!(
                "edge ({u},{v}) has an endpoint outside 0..{}",
                self.n
            )));
        }
        if u == v {
            return Err(invalid(format!("self-loop at node {u}")));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(invalid(format!(
                "edge ({u},{v}) has non-positive weight {weight}"
            )));
        }
        let k = key(u, v);
        if self.index.contains_key(&k) {
            return Err(invalid(format!("duplicate edge ({},{})", k.0, k.1)));
        }
        let id = self.edges.len();
        self.edges.push(k);
        self.weights.push(weight);
        self.adjacency[u].push((v, id));
        self.adjacency[v].push((u, id));
        self.index.insert(k, id);
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    /// Neighbors of `v` paired with the connecting edge index.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.index.contains_key(&key(u, v))
    }

    pub fn features(&self) -> Option<&Array2<f64>> {
        self.features.as_ref()
    }

    pub fn set_features(&mut self, features: Array2<f64>) -> Result<()> {
        if features.nrows() != self.n {
            return Err(invalid(format!(
                "feature matrix has {} rows for {} nodes",
                features.nrows(),
                self.n
            )));
        }
        self.features = Some(features);
        Ok(())
    }

    /// Replaces every edge weight. `weights` is indexed by edge id.
    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.edges.len() {
            return Err(invalid("weight vector length differs from edge count"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("non-positive edge weight {w}")));
        }
        self.weights = weights;
        Ok(())
    }

    /// Copy of the graph without the listed edges (by endpoint pair).
    /// Node ids, features and the remaining weights are preserved.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Graph {
        let drop: std::collections::HashSet<(usize, usize)> =
            removed.iter().map(|&(u, v)| key(u, v)).collect();
        let mut g = Graph::empty(self.n);
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if !drop.contains(&(u, v)) {
                g.add_edge(u, v, self.weights[id])
                    .expect("edges of a valid graph");
            }
        }
        g.features = self.features.clone();
        g
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(invalid(format!("node {v} out of range 0..{}", self.n)))
        } else {
            Ok(())
        }
    }

    /// Parses the edge-list text format: one `u v [weight]` per line,
    /// `#` comments, and an optional `# nodes N` header fixing the node
    /// count (otherwise it is one past the largest id seen).
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut declared: Option<usize> = None;
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("nodes") {
                    let n = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or(Error::Parse {
                            line: lineno + 1,
                            message: "malformed `# nodes N` header".into(),
                        })?;
                    declared = Some(n);
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected `u v [weight]`, got {line:?}"),
                });
            }
            let parse_id = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad node id {s:?}"),
                })
            };
            let u = parse_id(fields[0])?;
            let v = parse_id(fields[1])?;
            let w = match fields.get(2) {
                Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad weight {s:?}"),
                })?,
                None => 1.0,
            };
            rows.push((lineno + 1, u, v, w));
        }
        let inferred = rows.iter().map(|r| r.1.max(r.2) + 1).max().unwrap_or(0);
        let n = match declared {
            Some(n) if n < inferred => {
                return Err(invalid(format!(
                    "header declares {n} nodes but ids reach {}",
                    inferred - 1
                )))
            }
            Some(n) => n,
            None => inferred,
        };
        let mut g = Graph::empty(n);
        for (line, u, v, w) in rows {
            g.add_edge(u, v, w).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(g)
    }

    /// Writes the edge-list format, always with a `# nodes N` header.
    /// Weights are written only when some edge is not unit-weight.
    pub fn to_edge_list(&self) -> String {
        let weighted = self.weights.iter().any(|&w| w != 1.0);
        let mut out = format!("# nodes {}\n", self.n);
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            if weighted {
                let _ = writeln!(out, "{u} {v} {}", self.weights[id]);
            } else {
                let _ = writeln!(out, "{u} {v}");
            }
        }
        out
    }
}

/// Parses a feature matrix given as CSV, one row per node.
pub fn parse_features_csv(text: &str) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("bad feature value: {e}"),
            })?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {w} columns, got {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), data)
        .map_err(|e| invalid(format!("feature matrix shape: {e}")))
}

pub fn features_to_csv(features: &Array2<f64>) -> String {
    let mut out = String::new();
    for row in features.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path distances; unreachable nodes are `+inf`.
/// With `use_weights` off every edge counts as one hop.
pub fn shortest_distances(g: &Graph, source: usize, use_weights: bool) -> Result<Vec<f64>> {
    g.check_node(source)?;
    let mut dist = vec![f64::INFINITY; g.n];
    dist[source] = 0.0;
    if !use_weights {
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &g.adjacency[x] {
                if dist[y].is_infinite() {
                    dist[y] = dist[x] + 1.0;
                    queue.push_back(y);
                }
            }
        }
        return Ok(dist);
    }
    let mut heap = BinaryHeap::from([HeapEntry(0.0, source)]);
    while let Some(HeapEntry(d, x)) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, e) in &g.adjacency[x] {
            let nd = d + g.weights[e];
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(HeapEntry(nd, y));
            }
        }
    }
    Ok(dist)
}

/// Hop distances from `source`, truncated: nodes further than `limit`
/// hops are left at `usize::MAX`.
pub(crate) fn hop_distances(g: &Graph, source: usize, limit: usize) -> Vec<usize> {
    hop_distances_avoiding(g, source, limit, None)
}

fn hop_distances_avoiding(
    g: &Graph,
    source: usize,
    limit: usize,
    skip: Option<usize>,
) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        if dist[x] == limit {
            continue;
        }
        for &(y, e) in &g.adjacency[x] {
            if dist[y] == usize::MAX && Some(e) != skip {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Nodes within `k` hops of `v`, ascending by id.
pub fn k_hop_set(g: &Graph, v: usize, k: usize) -> Result<Vec<usize>> {
    g.check_node(v)?;
    let dist = hop_distances(g, v, k);
    Ok((0..g.n).filter(|&w| dist[w] <= k).collect())
}

/// Induced subgraph on the intersection of the targets' k-hop balls.
#[derive(Clone, Debug)]
pub struct EnclosingSubgraph {
    pub graph: Graph,
    /// Local id to original id; ascending in the original ids.
    pub node_map: Vec<usize>,
    /// Local ids of the two targets.
    pub targets: (usize, usize),
    pub k: usize,
}

pub fn enclosing_subgraph(
    g: &Graph,
    v1: usize,
    v2: usize,
    k: usize,
    drop_target_edge: bool,
) -> Result<EnclosingSubgraph> {
    g.check_node(v1)?;
    g.check_node(v2)?;
    if v1 == v2 {
        return Err(invalid(format!("targets must differ, got {v1} twice")));
    }
    // A dropped edge is gone before the balls are grown, otherwise each
    // target's neighbors would enter the other's ball through it.
    let skip = if drop_target_edge {
        g.edge_id(v1, v2)
    } else {
        None
    };
    let d1 = hop_distances_avoiding(g, v1, k, skip);
    let d2 = hop_distances_avoiding(g, v2, k, skip);
    let mut local = vec![usize::MAX; g.n];
    let mut node_map = Vec::new();
    for w in 0..g.n {
        if d1[w] <= k && d2[w] <= k || w == v1 || w == v2 {
            local[w] = node_map.len();
            node_map.push(w);
        }
    }
    let mut sub = Graph::empty(node_map.len());
    for &x in &node_map {
        for &(y, e) in &g.adjacency[x] {
            if x < y && local[y] != usize::MAX {
                if drop_target_edge && key(x, y) == key(v1, v2) {
                    continue;
                }
                sub.add_edge(local[x], local[y], g.weights[e])
                    .expect("induced edges are valid");
            }
        }
    }
    Ok(EnclosingSubgraph {
        graph: sub,
        targets: (local[v1], local[v2]),
        node_map,
        k,
    })
}

/// Component label per node; labels are `0..c` in order of first appearance.
pub fn connected_components(g: &Graph) -> Vec<usize> {
    let mut label = vec![usize::MAX; g.n];
    let mut next = 0;
    for s in 0..g.n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &(y, _) in &g.adjacency[x] {
                if label[y] == usize::MAX {
                    label[y] = next;
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    label
}

pub fn component_count(g: &Graph) -> usize {
    connected_components(g)
        .into_iter()
        .max()
        .map_or(0, |m| m + 1)
}
