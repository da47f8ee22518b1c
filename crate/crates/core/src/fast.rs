//! Extended persistence without the boundary matrix.
//!
//! Dimension 0 comes from two union-find sweeps (ascending and descending)
//! under the elder rule. Loops come from a spanning forest: start from the
//! negative edges of the descending sweep, then for every positive
//! descending edge `e` take the unique forest cycle through `e`, report
//! `(max f_asc over the cycle, f_desc(e))`, and swap the cycle edge that is
//! latest in the ascending order out of the forest in favour of `e`.
//!
//! Cost is `O(|V|)` per positive edge, `O(|V||E|)` overall.

use crate::diagram::{DiagramOptions, PersistenceDiagram, PointKind};
use crate::filtration::{FiltrationOrder, Simplex};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Ascending,
    Descending,
}

/// Union-find whose roots remember the elder node of their component:
/// the node earliest in the sweep order.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    elder: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            elder: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Elder node of the component rooted at `root`.
    pub fn elder(&self, root: usize) -> usize {
        self.elder[root]
    }

    // Links two distinct roots by size; the merged root keeps `elder`.
    fn link(&mut self, a: usize, b: usize, elder: usize) {
        let (big, small) = if self.size[a] >= self.size[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        self.elder[big] = elder;
    }
}

/// A dimension-0 pair: `edge` kills the component whose elder is `node`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ComponentPair {
    pub node: usize,
    pub edge: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub pairs: Vec<ComponentPair>,
    /// Edges closing a cycle, in sweep order.
    pub positive: Vec<usize>,
    /// Edges merging two components, in sweep order.
    pub negative: Vec<usize>,
    /// Final union-find state, for component queries.
    pub components: UnionFind,
}

/// One union-find sweep over the edges in the given direction's order.
/// A merging edge kills the younger of the two components.
pub fn union_find_pass(ford: &FiltrationOrder, direction: Direction) -> SweepResult {
    let n = ford.node_count();
    let mut uf = UnionFind::new(n);
    let position = |v: usize| match direction {
        Direction::Ascending => ford.asc_position(Simplex::Node(v)),
        Direction::Descending => ford.desc_position(Simplex::Node(v)),
    };
    let edges: Vec<usize> = match direction {
        Direction::Ascending => ford.ascending_edges().collect(),
        Direction::Descending => ford.descending_edges().collect(),
    };
    let mut result = SweepResult {
        pairs: Vec::new(),
        positive: Vec::new(),
        negative: Vec::new(),
        components: UnionFind::new(0),
    };
    for e in edges {
        let (u, v) = ford.edges()[e];
        let (ru, rv) = (uf.find(u), uf.find(v));
        if ru == rv {
            result.positive.push(e);
            continue;
        }
        let (eu, ev) = (uf.elder(ru), uf.elder(rv));
        let (older, younger) = if position(eu) < position(ev) {
            (eu, ev)
        } else {
            (ev, eu)
        };
        result.pairs.push(ComponentPair {
            node: younger,
            edge: e,
        });
        result.negative.push(e);
        uf.link(ru, rv, older);
    }
    result.components = uf;
    result
}

/// Spanning forest stored as parent pointers; each tree node records the
/// edge to its parent.
#[derive(Clone, Debug)]
pub struct LoopTree {
    parent: Vec<Option<(usize, usize)>>,
    // scratch marks for cycle extraction
    mark: Vec<u32>,
    stamp: u32,
}

impl LoopTree {
    /// Roots every component of the forest formed by `tree_edges` on
    /// `n` nodes. `tree_edges` must be acyclic.
    pub fn new(n: usize, edges: &[(usize, usize)], tree_edges: &[usize]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &e in tree_edges {
            let (u, v) = edges[e];
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        let mut parent = vec![None; n];
        let mut visited = vec![false; n];
        let mut stack = Vec::new();
        for root in 0..n {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            stack.push(root);
            while let Some(x) = stack.pop() {
                for &(y, e) in &adjacency[x] {
                    if !visited[y] {
                        visited[y] = true;
                        parent[y] = Some((x, e));
                        stack.push(y);
                    }
                }
            }
        }
        LoopTree {
            parent,
            mark: vec![0; n],
            stamp: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Current tree edges, unordered.
    pub fn tree_edges(&self) -> Vec<usize> {
        self.parent.iter().flatten().map(|&(_, e)| e).collect()
    }

    /// Tree edges on the path between `u` and `v`, as `(child, edge)` with
    /// the `u`-side first. Panics if `u` and `v` lie in different trees.
    fn path(&mut self, u: usize, v: usize) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let mut x = u;
        self.mark[x] = self.stamp;
        while let Some((p, _)) = self.parent[x] {
            x = p;
            self.mark[x] = self.stamp;
        }
        let mut v_side = Vec::new();
        let mut y = v;
        while self.mark[y] != self.stamp {
            let Some((p, e)) = self.parent[y] else {
                panic!("positive edge ({u},{v}) joins two different trees of the loop forest");
            };
            v_side.push((y, e));
            y = p;
        }
        let meet = y;
        let mut u_side = Vec::new();
        let mut x = u;
        while x != meet {
            let (p, e) = self.parent[x].expect("meeting node is an ancestor of u");
            u_side.push((x, e));
            x = p;
        }
        (u_side, v_side)
    }

    // Removes the tree edge above `cut_child` and inserts (from, to) via
    // `edge`, where `from` lies in the subtree of `cut_child`: the path
    // from `from` up to `cut_child` has its parent pointers reversed.
    fn swap(&mut self, cut_child: usize, from: usize, to: usize, edge: usize) {
        let mut prev = (to, edge);
        let mut cur = from;
        loop {
            let old = self.parent[cur];
            self.parent[cur] = Some(prev);
            if cur == cut_child {
                break;
            }
            let (up, up_edge) = old.expect("cut edge lies above `from`");
            prev = (cur, up_edge);
            cur = up;
        }
    }

    /// Checks that parent pointers form a forest with one edge per non-root.
    pub fn is_valid_forest(&self) -> bool {
        let n = self.parent.len();
        let mut seen = std::collections::HashSet::new();
        for start in 0..n {
            if let Some((_, e)) = self.parent[start] {
                if !seen.insert(e) {
                    return false;
                }
            }
            let mut x = start;
            let mut steps = 0;
            while let Some((p, _)) = self.parent[x] {
                x = p;
                steps += 1;
                if steps > n {
                    return false;
                }
            }
        }
        true
    }
}

/// One loop found by the forest sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopRecord {
    /// Positive descending edge that closes the loop.
    pub closing_edge: usize,
    /// All edges of the loop, closing edge included.
    pub edges: Vec<usize>,
    /// Loop edge latest in the ascending order; the loop's birth.
    pub paired_edge: usize,
}

/// Diagram plus the intermediate state, for inspection and testing.
#[derive(Clone, Debug)]
pub struct FastTrace {
    pub diagram: PersistenceDiagram,
    pub ascending: SweepResult,
    pub descending: SweepResult,
    pub loops: Vec<LoopRecord>,
    /// Whether the forest stayed spanning and acyclic after every swap.
    /// Only checked when tracing is requested.
    pub forest_valid: bool,
}

pub fn fast_extended_diagram(ford: &FiltrationOrder, opts: DiagramOptions) -> PersistenceDiagram {
    run(ford, opts, false).diagram
}

/// Like [`fast_extended_diagram`] but also records every loop and checks the
/// forest after each swap.
pub fn fast_extended_diagram_traced(ford: &FiltrationOrder, opts: DiagramOptions) -> FastTrace {
    run(ford, opts, true)
}

fn run(ford: &FiltrationOrder, opts: DiagramOptions, trace: bool) -> FastTrace {
    let n = ford.node_count();
    let mut diagram = PersistenceDiagram::default();

    let ascending = union_find_pass(ford, Direction::Ascending);
    for p in &ascending.pairs {
        diagram.push(
            opts,
            PointKind::OrdinaryAscending,
            ford.node_value(p.node),
            ford.f_asc(p.edge),
        );
    }
    let mut descending = union_find_pass(ford, Direction::Descending);
    for p in &descending.pairs {
        diagram.push(
            opts,
            PointKind::RelativeDescending,
            ford.node_value(p.node),
            ford.f_desc(p.edge),
        );
    }

    // the ascending elder is the component minimum, the descending elder its maximum
    let mut asc_uf = ascending.components.clone();
    for v in 0..n {
        let root = asc_uf.find(v);
        if root == v {
            let lo = asc_uf.elder(root);
            let hi_root = descending.components.find(v);
            let hi = descending.components.elder(hi_root);
            diagram.push(
                opts,
                PointKind::Essential0,
                ford.node_value(lo),
                ford.node_value(hi),
            );
        }
    }

    let mut tree = LoopTree::new(n, ford.edges(), &descending.negative);
    let mut loops = Vec::new();
    let mut forest_valid = !trace || tree.is_valid_forest();
    let asc_pos = |e: usize| ford.asc_position(Simplex::Edge(e));
    for &e in &descending.positive {
        let (u, v) = ford.edges()[e];
        let (u_side, v_side) = tree.path(u, v);
        // latest in ascending order: the argmax of f_asc, ties broken by position
        let mut best: Option<(usize, usize, bool)> = None; // (edge, child, on u side)
        for (side, list) in [(true, &u_side), (false, &v_side)] {
            for &(child, edge) in list.iter() {
                if best.is_none_or(|(b, _, _)| asc_pos(edge) > asc_pos(b)) {
                    best = Some((edge, child, side));
                }
            }
        }
        let paired = match best {
            Some((edge, child, on_u_side)) if asc_pos(edge) > asc_pos(e) => {
                if on_u_side {
                    tree.swap(child, u, v, e);
                } else {
                    tree.swap(child, v, u, e);
                }
                edge
            }
            _ => e,
        };
        diagram.push(
            opts,
            PointKind::Extended1,
            ford.f_asc(paired),
            ford.f_desc(e),
        );
        if trace {
            let mut edges: Vec<usize> = u_side.iter().chain(&v_side).map(|&(_, x)| x).collect();
            edges.push(e);
            loops.push(LoopRecord {
                closing_edge: e,
                edges,
                paired_edge: paired,
            });
            forest_valid &=
                tree.is_valid_forest() && tree.tree_edges().len() == descending.negative.len();
        }
    }

    FastTrace {
        diagram,
        ascending,
        descending,
        loops,
        forest_valid,
    }
}
