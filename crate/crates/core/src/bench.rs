//! Wall-clock comparison of the two diagram algorithms on identical inputs.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::DiagramOptions;
use crate::error::{invalid, Result};
use crate::fast::fast_extended_diagram;
use crate::filtration::{build_filtration, VertexFilter};
use crate::generate::gnm_random;
use crate::graph::Graph;
use crate::reduction::diagram_via_reduction;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub graph_id: usize,
    pub n: usize,
    pub m: usize,
    /// Mean seconds per diagram.
    pub t_reduction_s: f64,
    pub t_fast_s: f64,
    pub diagrams_match: bool,
}

impl BenchRow {
    /// Reduction time over fast time.
    pub fn ratio(&self) -> f64 {
        self.t_reduction_s / self.t_fast_s.max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn mean_ratio(&self) -> f64 {
        if self.rows.is_empty() {
            return f64::NAN;
        }
        self.rows.iter().map(BenchRow::ratio).sum::<f64>() / self.rows.len() as f64
    }

    /// Total reduction time over total fast time.
    pub fn aggregate_ratio(&self) -> f64 {
        let red: f64 = self.rows.iter().map(|r| r.t_reduction_s).sum();
        let fast: f64 = self.rows.iter().map(|r| r.t_fast_s).sum();
        red / fast.max(f64::MIN_POSITIVE)
    }

    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.diagrams_match)
    }

    /// `graph_id,n,m,t_reduction_s,t_fast_s,ratio`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("graph_id,n,m,t_reduction_s,t_fast_s,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{:.9},{:.4}",
                r.graph_id,
                r.n,
                r.m,
                r.t_reduction_s,
                r.t_fast_s,
                r.ratio()
            );
        }
        out
    }
}

/// `count` uniform random graphs with `n` nodes and `m` edges, each with
/// i.i.d. uniform node values in `[0, 1)`.
pub fn bench_workload(
    count: usize,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<(Graph, VertexFilter)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = gnm_random(n, m, rng.gen())?;
            let f = VertexFilter::new((0..n).map(|_| rng.gen::<f64>()).collect());
            Ok((g, f))
        })
        .collect()
}

/// Times both algorithms `repetitions` times per graph, filtration
/// construction excluded, and checks that their diagrams agree.
pub fn bench_compare(graphs: &[(Graph, VertexFilter)], repetitions: usize) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(invalid("repetitions must be at least 1"));
    }
    let opts = DiagramOptions::default();
    let mut rows = Vec::with_capacity(graphs.len());
    for (graph_id, (g, f)) in graphs.iter().enumerate() {
        let ford = build_filtration(g, f)?;
        let start = Instant::now();
        let mut slow = None;
        for _ in 0..repetitions {
            slow = Some(std::hint::black_box(diagram_via_reduction(&ford, opts)));
        }
        let t_reduction = start.elapsed().as_secs_f64() / repetitions as f64;
        let start = Instant::now();
        let mut quick = None;
        for _ in 0..repetitions {
            quick = Some(std::hint::black_box(fast_extended_diagram(&ford, opts)));
        }
        let t_fast = start.elapsed().as_secs_f64() / repetitions as f64;
        let (slow, quick) = (slow.unwrap(), quick.unwrap());
        rows.push(BenchRow {
            graph_id,
            n: g.node_count(),
            m: g.edge_count(),
            t_reduction_s: t_reduction,
            t_fast_s: t_fast,
            diagrams_match: slow.same_multiset(&quick),
        });
    }
    Ok(BenchReport { rows })
}
