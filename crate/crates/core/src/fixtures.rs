//! Small hand-checked inputs shared by tests, benchmarks and the CLI.

use crate::filtration::VertexFilter;
use crate::graph::Graph;

/// The four-node, two-loop example graph: node `i` stands for `u_{i+1}`,
/// edges `u1u3, u2u3, u1u4, u2u4, u3u4`, and `f(u_i) = i`.
///
/// Its extended diagram is `{(2,3), (1,4)}` in dimension 0 and
/// `{(4,2), (4,1)}` in dimension 1.
pub fn worked_example() -> (Graph, VertexFilter) {
    let g = Graph::new(4, [(0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]).expect("static graph");
    (g, VertexFilter::new(vec![1.0, 2.0, 3.0, 4.0]))
}
