//! Extended persistence by reducing the `2m x 2m` boundary matrix
//! `[[A, P], [0, D]]` over GF(2).
//!
//! Rows and columns `0..m` are the simplices in ascending order, rows and
//! columns `m..2m` the same simplices in descending order. `A` and `D` hold
//! node/edge incidences within each order; `P` links each descending
//! simplex to its ascending copy. This is the slow, obviously-correct route
//! and is kept as the oracle for [`crate::fast`].

use crate::diagram::{DiagramOptions, PersistenceDiagram, PointKind};
use crate::filtration::{FiltrationOrder, Simplex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionMatrix {
    m: usize,
    /// Sparse columns, each a sorted list of row indices.
    columns: Vec<Vec<usize>>,
    /// Simplex behind each row/column index.
    labels: Vec<Simplex>,
}

impl ReductionMatrix {
    /// Number of simplices; the matrix is `2m x 2m`.
    pub fn simplex_count(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        2 * self.m
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn label(&self, i: usize) -> Simplex {
        self.labels[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.columns[j].binary_search(&i).is_ok()
    }
}

pub fn build_reduction_matrix(ford: &FiltrationOrder) -> ReductionMatrix {
    let m = ford.len();
    let edges = ford.edges();
    let mut columns = Vec::with_capacity(2 * m);
    for &s in ford.ascending() {
        let col = match s {
            Simplex::Node(_) => Vec::new(),
            Simplex::Edge(e) => {
                let (u, v) = edges[e];
                sorted_pair(
                    ford.asc_position(Simplex::Node(u)),
                    ford.asc_position(Simplex::Node(v)),
                )
            }
        };
        columns.push(col);
    }
    for &s in ford.descending() {
        let mut col = vec![ford.asc_position(s)];
        if let Simplex::Edge(e) = s {
            let (u, v) = edges[e];
            col.extend(sorted_pair(
                m + ford.desc_position(Simplex::Node(u)),
                m + ford.desc_position(Simplex::Node(v)),
            ));
        }
        columns.push(col);
    }
    let labels = ford
        .ascending()
        .iter()
        .chain(ford.descending())
        .copied()
        .collect();
    ReductionMatrix { m, columns, labels }
}

fn sorted_pair(a: usize, b: usize) -> Vec<usize> {
    if a < b {
        vec![a, b]
    } else {
        vec![b, a]
    }
}

/// Symmetric difference of two sorted index lists, written into `target`.
fn add_column(target: &mut Vec<usize>, source: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Result of a column reduction: the reduced columns and `low` of each.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub columns: Vec<Vec<usize>>,
    /// `low(j)`, the largest row index of reduced column `j`; `None` for
    /// zero columns.
    pub lows: Vec<Option<usize>>,
}

impl Reduced {
    /// `(low(j), j)` for every non-zero column.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.lows
            .iter()
            .enumerate()
            .filter_map(|(j, low)| low.map(|i| (i, j)))
            .collect()
    }
}

/// Standard left-to-right reduction: while an earlier column shares the
/// current column's lowest one, add it.
pub fn reduce(matrix: &ReductionMatrix) -> Reduced {
    let size = matrix.size();
    let mut columns = matrix.columns.clone();
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; size];
    let mut scratch = Vec::new();
    for j in 0..size {
        reduce_column(&mut columns, j, &mut pivot_of_row, &mut scratch, |_| true);
    }
    finish(columns)
}

/// Same pairing reached in a different order: all ascending columns, then
/// every descending column until its `D` part is zero or has a fresh
/// pivot, then the remaining descending columns against the `A`/`P` rows.
pub fn reduce_phased(matrix: &ReductionMatrix) -> Reduced {
    let m = matrix.m;
    let mut columns = matrix.columns.clone();
    let mut pivot_of_row: Vec<Option<usize>> = vec![None; 2 * m];
    let mut scratch = Vec::new();
    for j in 0..m {
        reduce_column(&mut columns, j, &mut pivot_of_row, &mut scratch, |_| true);
    }
    for j in m..2 * m {
        reduce_column(&mut columns, j, &mut pivot_of_row, &mut scratch, |low| {
            low >= m
        });
    }
    for j in m..2 * m {
        if columns[j].last().is_some_and(|&low| low < m) {
            reduce_column(&mut columns, j, &mut pivot_of_row, &mut scratch, |_| true);
        }
    }
    finish(columns)
}

// Reduces column j while its low is claimed by an earlier column and
// `allowed(low)` holds; registers the final low as a pivot if it is free.
fn reduce_column(
    columns: &mut [Vec<usize>],
    j: usize,
    pivot_of_row: &mut [Option<usize>],
    scratch: &mut Vec<usize>,
    allowed: impl Fn(usize) -> bool,
) {
    while let Some(&low) = columns[j].last() {
        if !allowed(low) {
            return;
        }
        match pivot_of_row[low] {
            Some(k) if k != j => {
                let (left, right) = columns.split_at_mut(j);
                add_column(&mut right[0], &left[k], scratch);
            }
            _ => {
                pivot_of_row[low] = Some(j);
                return;
            }
        }
    }
}

fn finish(columns: Vec<Vec<usize>>) -> Reduced {
    let lows = columns.iter().map(|c| c.last().copied()).collect();
    Reduced { columns, lows }
}

/// Reads the extended diagram off the reduced matrix:
///
/// * pivot in `A` (node row, ascending edge column): ordinary point
///   `(f(node), f_asc(edge))`;
/// * pivot in `D`: relative point `(f(node), f_desc(edge))`;
/// * pivot in `P` with an edge row: loop `(f_asc(row edge), f_desc(column edge))`;
/// * pivot in `P` with a node row: essential point `(f(row node), f(column node))`,
///   i.e. `(min f, max f)` of one component.
pub fn diagram_from_reduction(
    ford: &FiltrationOrder,
    reduced: &Reduced,
    opts: DiagramOptions,
) -> PersistenceDiagram {
    let m = ford.len();
    let asc = ford.ascending();
    let desc = ford.descending();
    let mut diagram = PersistenceDiagram::default();
    for (row, col) in reduced.pairs() {
        match (row < m, col < m) {
            (true, true) => {
                let (Simplex::Node(v), Simplex::Edge(e)) = (asc[row], asc[col]) else {
                    unreachable!("A pivots pair a node row with an edge column");
                };
                diagram.push(
                    opts,
                    PointKind::OrdinaryAscending,
                    ford.node_value(v),
                    ford.f_asc(e),
                );
            }
            (false, false) => {
                let (Simplex::Node(v), Simplex::Edge(e)) = (desc[row - m], desc[col - m]) else {
                    unreachable!("D pivots pair a node row with an edge column");
                };
                diagram.push(
                    opts,
                    PointKind::RelativeDescending,
                    ford.node_value(v),
                    ford.f_desc(e),
                );
            }
            (true, false) => match (asc[row], desc[col - m]) {
                (Simplex::Edge(born), Simplex::Edge(killed)) => {
                    diagram.push(
                        opts,
                        PointKind::Extended1,
                        ford.f_asc(born),
                        ford.f_desc(killed),
                    );
                }
                (Simplex::Node(lo), Simplex::Node(hi)) => {
                    diagram.push(
                        opts,
                        PointKind::Essential0,
                        ford.node_value(lo),
                        ford.node_value(hi),
                    );
                }
                _ => unreachable!("P pivots pair simplices of the same dimension"),
            },
            (false, true) => unreachable!("the lower-left block is zero"),
        }
    }
    diagram
}

pub fn diagram_via_reduction(ford: &FiltrationOrder, opts: DiagramOptions) -> PersistenceDiagram {
    let matrix = build_reduction_matrix(ford);
    diagram_from_reduction(ford, &reduce(&matrix), opts)
}
