//! Pairwise topological features: enclosing subgraph, distance-sum filter,
//! extended diagram, persistence image.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::{DiagramOptions, PersistenceDiagram};
use crate::error::{invalid, Result};
use crate::fast::fast_extended_diagram;
use crate::filtration::{build_filtration, distance_sum_filter, VertexFilter};
use crate::graph::{enclosing_subgraph, Graph};
use crate::image::{persistence_image, ImageSpec};
use crate::ricci::{ricci_edge_weights, RicciWeights};

/// Distance used inside the filter. The k-hop vicinity is always hop-based.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Hop,
    /// Weighted shortest paths over the graph's stored edge weights; see
    /// [`with_ricci_weights`].
    Ricci,
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hop" => Ok(Metric::Hop),
            "ricci" => Ok(Metric::Ricci),
            other => Err(invalid(format!(
                "unknown metric {other:?}, expected hop or ricci"
            ))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub k: usize,
    pub metric: Metric,
    /// Remove the edge between the targets, when present.
    pub drop_target_edge: bool,
    pub diagram: DiagramOptions,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            k: 2,
            metric: Metric::Hop,
            drop_target_edge: true,
            diagram: DiagramOptions::default(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairMeta {
    pub k: usize,
    pub metric: Metric,
    pub subgraph_nodes: usize,
    pub subgraph_edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDiagram {
    pub pair: (usize, usize),
    pub diagram: PersistenceDiagram,
    pub meta: PairMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFeature {
    pub pair: (usize, usize),
    pub diagram: PersistenceDiagram,
    pub image: Vec<f64>,
    pub meta: PairMeta,
}

/// Vicinity radius for `g`: 1 on dense graphs (mean degree at least 20),
/// 2 otherwise. With the hop metric and the target edge dropped, a 1-hop
/// vicinity holds only common neighbors, whose filter values all tie, so
/// sparse graphs need the second hop to see any structure.
pub fn auto_k(g: &Graph) -> usize {
    let n = g.node_count().max(1) as f64;
    if 2.0 * g.edge_count() as f64 / n >= 20.0 {
        1
    } else {
        2
    }
}

/// Copy of `g` whose edge weights are `1 + kappa` (clamped), the Ricci metric.
pub fn with_ricci_weights(g: &Graph, alpha: f64) -> Result<(Graph, RicciWeights)> {
    let weights = ricci_edge_weights(g, alpha)?;
    let mut weighted = g.clone();
    weighted.set_weights(weights.weights.clone())?;
    Ok((weighted, weights))
}

pub fn pair_diagram(g: &Graph, u: usize, v: usize, cfg: &PairConfig) -> Result<PairDiagram> {
    let sub = enclosing_subgraph(g, u, v, cfg.k, cfg.drop_target_edge)?;
    let meta = PairMeta {
        k: cfg.k,
        metric: cfg.metric,
        subgraph_nodes: sub.graph.node_count(),
        subgraph_edges: sub.graph.edge_count(),
    };
    if meta.subgraph_nodes <= 2 && meta.subgraph_edges == 0 {
        return Ok(PairDiagram {
            pair: (u, v),
            diagram: PersistenceDiagram::default(),
            meta,
        });
    }
    let f = distance_sum_filter(&sub, cfg.metric == Metric::Ricci);
    let ford = build_filtration(&sub.graph, &f)?;
    Ok(PairDiagram {
        pair: (u, v),
        diagram: fast_extended_diagram(&ford, cfg.diagram),
        meta,
    })
}

/// Diagram of a whole graph under an explicit vertex filter, bypassing the
/// subgraph and distance-sum stages.
pub fn diagram_for_filter(
    g: &Graph,
    f: &VertexFilter,
    opts: DiagramOptions,
) -> Result<PersistenceDiagram> {
    Ok(fast_extended_diagram(&build_filtration(g, f)?, opts))
}

pub fn pair_feature(
    g: &Graph,
    u: usize,
    v: usize,
    cfg: &PairConfig,
    spec: &ImageSpec,
) -> Result<PairFeature> {
    Ok(attach_image(pair_diagram(g, u, v, cfg)?, spec))
}

pub fn attach_image(pd: PairDiagram, spec: &ImageSpec) -> PairFeature {
    let image = if pd.diagram.is_empty() {
        vec![0.0; spec.len()]
    } else {
        persistence_image(&pd.diagram, spec)
    };
    PairFeature {
        pair: pd.pair,
        diagram: pd.diagram,
        image,
        meta: pd.meta,
    }
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// [`pair_diagram`] over many pairs on `workers` threads; output order
/// follows `pairs`.
pub fn batch_diagrams(
    g: &Graph,
    pairs: &[(usize, usize)],
    cfg: &PairConfig,
    workers: usize,
) -> Result<Vec<PairDiagram>> {
    in_pool(workers, || {
        pairs
            .par_iter()
            .map(|&(u, v)| pair_diagram(g, u, v, cfg))
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn batch_features(
    g: &Graph,
    pairs: &[(usize, usize)],
    cfg: &PairConfig,
    spec: &ImageSpec,
    workers: usize,
) -> Result<Vec<PairFeature>> {
    let diagrams = batch_diagrams(g, pairs, cfg, workers)?;
    in_pool(workers, || {
        diagrams
            .into_par_iter()
            .map(|pd| attach_image(pd, spec))
            .collect()
    })
}

/// `u v x1,x2,...` per feature.
pub fn feature_dump(features: &[PairFeature]) -> String {
    let mut out = String::new();
    for f in features {
        let values: Vec<String> = f.image.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{} {} {}", f.pair.0, f.pair.1, values.join(","));
    }
    out
}

/// One image per CSV row.
pub fn images_csv(features: &[PairFeature]) -> String {
    let mut out = String::new();
    for f in features {
        let values: Vec<String> = f.image.iter().map(|x| x.to_string()).collect();
        out.push_str(&values.join(","));
        out.push('\n');
    }
    out
}

/// Diagrams as JSON lines: `{"u":..,"v":..,"diagram":[..]}`.
pub fn diagrams_jsonl(features: &[PairFeature]) -> Result<String> {
    let mut out = String::new();
    for f in features {
        let record = serde_json::json!({ "u": f.pair.0, "v": f.pair.1, "diagram": f.diagram });
        out.push_str(&serde_json::to_string(&record)?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::sbm_generate;
    use crate::image::{Bounds, Transform};
    use crate::reduction::diagram_via_reduction;

    fn spec() -> ImageSpec {
        let b = Bounds {
            x_min: 0.0,
            x_max: 6.0,
            y_min: 0.0,
            y_max: 4.0,
        };
        ImageSpec::new(5, 5, 0.8, b, Transform::Absolute).unwrap()
    }

    #[test]
    fn disjoint_balls_give_zero_image() {
        let g = Graph::new(6, (1..6).map(|i| (i - 1, i))).unwrap();
        let f = pair_feature(&g, 0, 5, &PairConfig::default(), &spec()).unwrap();
        assert!(f.diagram.is_empty());
        assert_eq!(f.image, vec![0.0; 25]);
        assert_eq!(f.meta.subgraph_nodes, 2);
    }

    #[test]
    fn worked_example_through_explicit_filter() {
        let (g, f) = crate::fixtures::worked_example();
        let d = diagram_for_filter(&g, &f, DiagramOptions::default()).unwrap();
        assert_eq!(d.pairs(0), vec![(1.0, 4.0), (2.0, 3.0)]);
        assert_eq!(d.pairs(1), vec![(4.0, 1.0), (4.0, 2.0)]);
        let image = attach_image(
            PairDiagram {
                pair: (0, 1),
                diagram: d,
                meta: PairMeta {
                    k: 0,
                    metric: Metric::Hop,
                    subgraph_nodes: 4,
                    subgraph_edges: 5,
                },
            },
            &spec(),
        )
        .image;
        assert!(image.iter().any(|&x| x > 0.0));
    }

    #[test]
    fn rejects_equal_targets() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert!(pair_feature(&g, 1, 1, &PairConfig::default(), &spec()).is_err());
    }

    #[test]
    fn sbm_pairs_match_oracle_and_are_symmetric() {
        let g = sbm_generate(60, 3, 0.35, 0.05, 0, 21).unwrap();
        let cfg = PairConfig {
            k: 2,
            ..PairConfig::default()
        };
        for &(u, v) in g.edges().iter().step_by(7).take(12) {
            let a = pair_diagram(&g, u, v, &cfg).unwrap();
            let b = pair_diagram(&g, v, u, &cfg).unwrap();
            assert!(a.diagram.same_multiset(&b.diagram));

            let sub = enclosing_subgraph(&g, u, v, cfg.k, true).unwrap();
            let ford = build_filtration(&sub.graph, &distance_sum_filter(&sub, false)).unwrap();
            assert!(a
                .diagram
                .same_multiset(&diagram_via_reduction(&ford, cfg.diagram)));
        }
    }

    #[test]
    fn ricci_metric_uses_weights() {
        let g = sbm_generate(40, 2, 0.4, 0.05, 0, 2).unwrap();
        let (weighted, w) = with_ricci_weights(&g, 0.5).unwrap();
        assert_eq!(weighted.weights(), &w.weights[..]);
        let cfg = PairConfig {
            metric: Metric::Ricci,
            ..PairConfig::default()
        };
        let (u, v) = g.edges()[0];
        let d = pair_diagram(&weighted, u, v, &cfg).unwrap();
        assert_eq!(d.meta.metric, Metric::Ricci);
    }

    #[test]
    fn batch_is_order_preserving_and_worker_independent() {
        let g = sbm_generate(50, 5, 0.5, 0.05, 0, 4).unwrap();
        let pairs: Vec<(usize, usize)> = (0..40)
            .map(|i| (i, (i * 7 + 3) % 50))
            .filter(|p| p.0 != p.1)
            .collect();
        let cfg = PairConfig::default();
        let one = batch_features(&g, &pairs, &cfg, &spec(), 1).unwrap();
        let many = batch_features(&g, &pairs, &cfg, &spec(), 8).unwrap();
        assert_eq!(one, many);
        for (f, &(u, v)) in one.iter().zip(&pairs).step_by(4) {
            assert_eq!(f, &pair_feature(&g, u, v, &cfg, &spec()).unwrap());
        }
        assert!(batch_features(&g, &[], &cfg, &spec(), 4)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn auto_k_by_density() {
        assert_eq!(auto_k(&sbm_generate(100, 2, 0.1, 0.01, 0, 1).unwrap()), 2);
        assert_eq!(auto_k(&sbm_generate(100, 2, 0.8, 0.1, 0, 1).unwrap()), 1);
        assert_eq!(auto_k(&Graph::empty(0)), 2);
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("hop".parse::<Metric>().unwrap(), Metric::Hop);
        assert_eq!("ricci".parse::<Metric>().unwrap(), Metric::Ricci);
        assert!("euclid".parse::<Metric>().is_err());
    }
}
