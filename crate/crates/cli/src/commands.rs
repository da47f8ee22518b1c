use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use looptop::bench::{bench_compare, bench_workload};
use looptop::fast::fast_extended_diagram;
use looptop::filtration::distance_sum_filter;
use looptop::generate::sbm_generate;
use looptop::graph::{enclosing_subgraph, features_to_csv, parse_features_csv};
use looptop::image::{ImageSpec, Transform};
use looptop::learn::{history_csv, run_experiment, ExperimentConfig};
use looptop::pipeline::{
    attach_image, auto_k, batch_diagrams, diagrams_jsonl, feature_dump, images_csv,
    with_ricci_weights, Metric, PairConfig,
};
use looptop::reduction::diagram_via_reduction;
use looptop::ricci::ricci_edge_weights;
use looptop::{build_filtration, DiagramOptions, Graph, VertexFilter};

use crate::config::{parse_resolution, TrainFile};
use crate::output::OutputDir;
use crate::{BenchArgs, DiagramArgs, ImageArgs, PairArgs, RicciArgs, SbmArgs, TrainArgs};

fn parse_metric(text: &str) -> Result<Metric> {
    Ok(text.parse()?)
}

fn parse_transform(text: &str) -> Result<Transform> {
    match text {
        "absolute" => Ok(Transform::Absolute),
        "literal" => Ok(Transform::Literal),
        other => bail!("unknown transform {other:?}, expected absolute or literal"),
    }
}

/// Non-comment lines split on whitespace, with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            (
                i + 1,
                line.split('#')
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, fields)| !fields.is_empty())
}

fn parse_filter_values(text: &str) -> Result<Vec<f64>> {
    records(text)
        .map(|(line, fields)| match fields.as_slice() {
            [value] => value
                .parse::<f64>()
                .with_context(|| format!("filter line {line}: bad value")),
            _ => bail!("filter line {line}: expected one value"),
        })
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    records(text)
        .map(|(line, fields)| match fields.as_slice() {
            [u, v] => Ok((
                u.parse()
                    .with_context(|| format!("pairs line {line}: bad node id"))?,
                v.parse()
                    .with_context(|| format!("pairs line {line}: bad node id"))?,
            )),
            _ => bail!("pairs line {line}: expected `u v`"),
        })
        .collect()
}

/// The graph the filter runs on: Ricci-weighted when asked for.
fn metric_graph(g: Graph, metric: Metric, alpha: f64) -> Result<Graph> {
    Ok(match metric {
        Metric::Hop => g,
        Metric::Ricci => with_ricci_weights(&g, alpha)?.0,
    })
}

fn pair_config(args: &PairArgs, g: &Graph) -> Result<PairConfig> {
    Ok(PairConfig {
        k: args.k.unwrap_or_else(|| auto_k(g)),
        metric: parse_metric(&args.metric)?,
        drop_target_edge: !args.keep_target_edge,
        diagram: DiagramOptions {
            keep_zero_persistence: args.keep_zero,
        },
    })
}

pub fn sbm(a: &SbmArgs, seed: u64) -> Result<()> {
    let g = sbm_generate(a.n, a.communities, a.p, a.q, a.feature_dim, seed)?;
    let mut out = OutputDir::create(&a.out.out)?;
    out.write("graph.edges", g.to_edge_list())?;
    let features = g
        .features()
        .ok_or_else(|| anyhow!("generator returned no features"))?;
    out.write("features.csv", features_to_csv(features))?;
    println!("{} nodes, {} edges", g.node_count(), g.edge_count());
    out.finish("sbm", seed, a, json!({ "edges": g.edge_count() }))
}

pub fn diagram(a: &DiagramArgs, seed: u64) -> Result<()> {
    let (run_fast, run_reduction) = match a.algo.as_str() {
        "fast" => (true, false),
        "reduction" => (false, true),
        "both" => (true, true),
        other => bail!("unknown algorithm {other:?}, expected fast, reduction or both"),
    };
    let mut out = OutputDir::create(&a.out.out)?;
    let g = Graph::parse_edge_list(&out.input(&a.graph)?)?;
    let opts = DiagramOptions {
        keep_zero_persistence: a.pair.keep_zero,
    };
    let (ford, resolved) = match &a.filter {
        Some(path) => {
            let f = VertexFilter::new(parse_filter_values(&out.input(path)?)?);
            let ford = build_filtration(&g, &f)?;
            (
                ford,
                json!({ "mode": "filter", "algo": a.algo, "keep_zero": a.pair.keep_zero }),
            )
        }
        None => {
            let (u, v) = (
                a.u.expect("required by clap"),
                a.v.expect("required by clap"),
            );
            let cfg = pair_config(&a.pair, &g)?;
            let g = metric_graph(g, cfg.metric, a.pair.alpha)?;
            let sub = enclosing_subgraph(&g, u, v, cfg.k, cfg.drop_target_edge)?;
            let f = distance_sum_filter(&sub, cfg.metric == Metric::Ricci);
            let ford = build_filtration(&sub.graph, &f)?;
            let resolved = json!({
                "mode": "pair",
                "algo": a.algo,
                "pair": [u, v],
                "config": cfg,
                "alpha": a.pair.alpha,
                "subgraph_nodes": sub.node_map,
            });
            (ford, resolved)
        }
    };

    let fast = run_fast.then(|| fast_extended_diagram(&ford, opts));
    let reduction = run_reduction.then(|| diagram_via_reduction(&ford, opts));
    if let Some(d) = &fast {
        out.write("fast.json", d.to_json()? + "\n")?;
    }
    if let Some(d) = &reduction {
        out.write("reduction.json", d.to_json()? + "\n")?;
    }
    let verdict = match (&fast, &reduction) {
        (Some(x), Some(y)) => {
            let verdict = if x.same_multiset(y) {
                "match"
            } else {
                "mismatch"
            };
            out.write("verdict.txt", format!("{verdict}\n"))?;
            println!("{verdict}");
            Some(verdict)
        }
        _ => None,
    };
    out.finish("diagram", seed, a, resolved)?;
    if verdict == Some("mismatch") {
        bail!("fast and reduction diagrams differ");
    }
    Ok(())
}

pub fn image(a: &ImageArgs, seed: u64) -> Result<()> {
    let (rows, cols) = parse_resolution(&a.resolution)?;
    let transform = parse_transform(&a.transform)?;
    let mut out = OutputDir::create(&a.out.out)?;
    let g = Graph::parse_edge_list(&out.input(&a.graph)?)?;
    let pairs = match &a.pairs {
        Some(path) => parse_pairs(&out.input(path)?)?,
        None => g.edges().to_vec(),
    };
    let cfg = pair_config(&a.pair, &g)?;
    let g = metric_graph(g, cfg.metric, a.pair.alpha)?;
    let diagrams = batch_diagrams(&g, &pairs, &cfg, a.workers)?;
    let spec = ImageSpec::fit(diagrams.iter().map(|d| &d.diagram), rows, cols, transform)?;
    let features: Vec<_> = diagrams
        .into_iter()
        .map(|d| attach_image(d, &spec))
        .collect();

    out.write("images.csv", images_csv(&features))?;
    out.write("features.txt", feature_dump(&features))?;
    out.write("diagrams.jsonl", diagrams_jsonl(&features)?)?;
    out.write_json("spec.json", &spec)?;
    println!("{} pairs, image length {}", features.len(), spec.len());
    out.finish(
        "image",
        seed,
        a,
        json!({ "config": cfg, "alpha": a.pair.alpha, "spec": spec, "pairs": pairs.len() }),
    )
}

pub fn ricci(a: &RicciArgs, seed: u64) -> Result<()> {
    let mut out = OutputDir::create(&a.out.out)?;
    let g = Graph::parse_edge_list(&out.input(&a.graph)?)?;
    let w = ricci_edge_weights(&g, a.alpha)?;
    let mut text = String::new();
    for (&(u, v), kappa) in g.edges().iter().zip(&w.curvature) {
        text.push_str(&format!("{u} {v} {kappa}\n"));
    }
    out.write("curvature.txt", text)?;
    if w.clamped > 0 {
        eprintln!("warning: {} edge weights clamped to the floor", w.clamped);
    }
    println!("{} edges", g.edge_count());
    out.finish("ricci", seed, a, json!({ "clamped_weights": w.clamped }))
}

pub fn bench(a: &BenchArgs, seed: u64) -> Result<()> {
    let workload = bench_workload(a.graphs, a.n, a.m, seed)?;
    let report = bench_compare(&workload, a.repetitions)?;
    let mut out = OutputDir::create(&a.out.out)?;
    out.write("bench.csv", report.to_csv())?;
    println!(
        "mean ratio {:.3}, aggregate ratio {:.3}, diagrams match: {}",
        report.mean_ratio(),
        report.aggregate_ratio(),
        report.all_match()
    );
    out.finish("bench", seed, a, json!({ "graphs": report.rows.len() }))?;
    if !report.all_match() {
        bail!("fast and reduction diagrams differ on at least one graph");
    }
    Ok(())
}

pub fn train(a: &TrainArgs, seed: u64) -> Result<()> {
    let mut out = OutputDir::create(&a.out.out)?;
    let file = match &a.config {
        Some(path) => TrainFile::parse(&out.input(path)?)?,
        None => TrainFile::default(),
    };
    let mut g = Graph::parse_edge_list(&out.input(&a.graph)?)?;
    let x = parse_features_csv(&out.input(&a.features)?)?;
    g.set_features(x.clone())?;

    let mut cfg = ExperimentConfig::default();
    cfg.pair.k = a.k.or(file.k).unwrap_or_else(|| auto_k(&g));
    if let Some(m) = a.metric.as_deref().or(file.metric.as_deref()) {
        cfg.pair.metric = parse_metric(m)?;
    }
    if let Some(r) = &file.resolution {
        cfg.resolution = parse_resolution(r)?;
    }
    if let Some(t) = &file.transform {
        cfg.transform = parse_transform(t)?;
    }
    cfg.ricci_alpha = a.alpha.or(file.alpha).unwrap_or(cfg.ricci_alpha);
    cfg.workers = a.workers.or(file.workers).unwrap_or(cfg.workers);
    cfg.ablate_topology = a.ablate_topology || file.ablate_topology.unwrap_or(false);
    let t = &mut cfg.train;
    t.seed = seed;
    t.epochs = a.epochs.or(file.epochs).unwrap_or(t.epochs);
    t.lr = a.lr.or(file.lr).unwrap_or(t.lr);
    t.weight_decay = a
        .weight_decay
        .or(file.weight_decay)
        .unwrap_or(t.weight_decay);
    t.patience = a.patience.or(file.patience).unwrap_or(t.patience);
    t.hidden = file.hidden.unwrap_or(t.hidden);
    t.embed = file.embed.unwrap_or(t.embed);
    t.mlp_hidden = file.mlp_hidden.unwrap_or(t.mlp_hidden);

    let outcome = run_experiment(&g, &x, &cfg)?;
    out.write("history.csv", history_csv(&outcome.history))?;
    out.write_json("report.json", &outcome.report)?;
    out.write_json("split.json", &outcome.split)?;
    if let Some(spec) = &outcome.image_spec {
        out.write_json("spec.json", spec)?;
    }
    if outcome.clamped_weights > 0 {
        eprintln!(
            "warning: {} edge weights clamped to the floor",
            outcome.clamped_weights
        );
    }
    println!(
        "test_auc {:.4} at epoch {} ({} epochs run)",
        outcome.report.test_auc,
        outcome.report.best_epoch,
        outcome.history.len()
    );
    out.finish(
        "train",
        seed,
        a,
        json!({ "experiment": cfg, "image_pairs": outcome.image_pairs }),
    )
}
