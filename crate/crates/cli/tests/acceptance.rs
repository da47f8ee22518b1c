//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process fails if any criterion does.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use looptop::bench::{bench_compare, bench_workload};
use looptop::diagram::{PersistencePoint, PointKind};
use looptop::fast::fast_extended_diagram;
use looptop::fixtures::worked_example;
use looptop::generate::{gnp_random, sbm_generate};
use looptop::graph::component_count;
use looptop::image::{persistence_image, Bounds, ImageSpec, Transform};
use looptop::learn::{
    loss, loss_and_gradients, run_experiment, ExperimentConfig, GcnInput, ModelDims, Params,
    Sample, TrainConfig, TENSOR_NAMES,
};
use looptop::pipeline::{Metric, PairConfig};
use looptop::reduction::diagram_via_reduction;
use looptop::ricci::{wasserstein1, DiscreteMeasure};
use looptop::{build_filtration, DiagramOptions, Graph, PersistenceDiagram, VertexFilter};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn golden_worked_example() -> Outcome {
    let (g, f) = worked_example();
    let ford = build_filtration(&g, &f).unwrap();
    let opts = DiagramOptions::default();
    let want0 = vec![(1.0, 4.0), (2.0, 3.0)];
    let want1 = vec![(4.0, 1.0), (4.0, 2.0)];
    let mut ok = true;
    let mut seen = Vec::new();
    for (name, d) in [
        ("fast", fast_extended_diagram(&ford, opts)),
        ("reduction", diagram_via_reduction(&ford, opts)),
    ] {
        ok &= d.pairs(0) == want0 && d.pairs(1) == want1;
        seen.push(format!(
            "{name}: dim0 {:?} dim1 {:?}",
            d.pairs(0),
            d.pairs(1)
        ));
    }
    outcome(ok, seen.join("; "))
}

/// Random graphs for the equivalence and cycle-rank checks.
fn equivalence_corpus() -> Vec<(Graph, VertexFilter)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut corpus = Vec::new();
    for i in 0..600 {
        let p = [0.15, 0.3, 0.6][i % 3];
        let n = rng.gen_range(1..=25);
        let g = gnp_random(n, p, rng.gen()).unwrap();
        // distinct values: a shuffled set of distinct reals
        let mut values: Vec<f64> = (0..n)
            .map(|j| j as f64 * 0.5 + rng.gen_range(0.0..0.25))
            .collect();
        values.shuffle(&mut rng);
        corpus.push((g, VertexFilter::new(values)));
    }
    corpus
}

fn theorem_equivalence(corpus: &[(Graph, VertexFilter)]) -> Outcome {
    let opts = DiagramOptions::default();
    let mut mismatches = 0;
    let mut disconnected = 0;
    for (g, f) in corpus {
        if component_count(g) > 1 {
            disconnected += 1;
        }
        let ford = build_filtration(g, f).unwrap();
        if !fast_extended_diagram(&ford, opts).same_multiset(&diagram_via_reduction(&ford, opts)) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && corpus.len() >= 500 && disconnected > 0,
        format!(
            "{} graphs ({disconnected} disconnected), {mismatches} mismatches",
            corpus.len()
        ),
    )
}

fn cycle_rank(corpus: &[(Graph, VertexFilter)]) -> Outcome {
    let opts = DiagramOptions {
        keep_zero_persistence: true,
    };
    let mut bad = 0;
    for (g, f) in corpus {
        let ford = build_filtration(g, f).unwrap();
        let rank = g.edge_count() + component_count(g) - g.node_count();
        for d in [
            fast_extended_diagram(&ford, opts),
            diagram_via_reduction(&ford, opts),
        ] {
            if d.dim(1).count() != rank {
                bad += 1;
            }
        }
    }
    outcome(
        bad == 0,
        format!(
            "{} graphs, {bad} diagrams with the wrong loop count",
            corpus.len()
        ),
    )
}

fn speedup() -> Outcome {
    let workload = bench_workload(20, 300, 1500, 11).unwrap();
    let report = bench_compare(&workload, 3).unwrap();
    let mean = report.mean_ratio();
    outcome(
        mean >= 1.2 && report.all_match(),
        format!(
            "mean reduction/fast ratio {mean:.2} over {} graphs, diagrams match: {}",
            report.rows.len(),
            report.all_match()
        ),
    )
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-12)
}

fn gradients() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for config in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + config);
        let n = rng.gen_range(4..=12);
        let d = rng.gen_range(1..=8);
        let g = gnp_random(n, 0.35, rng.gen()).unwrap();
        let x = Array2::from_shape_simple_fn((n, d), || rng.gen_range(-1.0..1.0));
        let input = GcnInput::new(&g, &x).unwrap();
        let params = Params::init(&ModelDims::new(d, 25), &mut rng);
        let images: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..25).map(|_| rng.gen_range(0.0..0.3)).collect())
            .collect();
        let batch: Vec<Sample> = images
            .iter()
            .enumerate()
            .map(|(i, image)| {
                let u = rng.gen_range(0..n);
                let v = (u + rng.gen_range(1..n)) % n;
                Sample {
                    u,
                    v,
                    label: i % 2 == 1,
                    image,
                }
            })
            .collect();
        let (_, analytic) = loss_and_gradients(&input, &params, &batch);
        for (t, name) in TENSOR_NAMES.iter().enumerate() {
            let numeric: Vec<f64> = (0..analytic.tensors()[t].len())
                .map(|i| {
                    let mut plus = params.clone();
                    plus.tensors_mut()[t][i] += h;
                    let mut minus = params.clone();
                    minus.tensors_mut()[t][i] -= h;
                    (loss(&input, &plus, &batch) - loss(&input, &minus, &batch)) / (2.0 * h)
                })
                .collect();
            let err = relative_error(analytic.tensors()[t], &numeric);
            if err > worst {
                worst = err;
                worst_at = format!("config {config}, {name}");
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("10 configurations, worst per-tensor relative error {worst:.2e} ({worst_at})"),
    )
}

/// Minimum transport cost over the vertices of the transportation polytope:
/// every basis is a spanning tree of the complete bipartite graph, whose flow
/// is forced by peeling leaves.
fn transport_by_enumeration(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (r, c) = (supply.len(), demand.len());
    let cells: Vec<(usize, usize)> = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
    let basis = r + c - 1;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells.len()) {
        if mask.count_ones() as usize != basis {
            continue;
        }
        let chosen: Vec<(usize, usize)> = (0..cells.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| cells[k])
            .collect();
        let mut rest_s = supply.to_vec();
        let mut rest_d = demand.to_vec();
        let mut open = chosen;
        let mut total = 0.0;
        let mut feasible = true;
        while !open.is_empty() {
            // a row or column touched by one remaining cell fixes that cell's flow
            let row_deg = |i: usize| open.iter().filter(|c| c.0 == i).count();
            let col_deg = |j: usize| open.iter().filter(|c| c.1 == j).count();
            let leaf = open.iter().enumerate().find_map(|(k, &(i, j))| {
                if row_deg(i) == 1 {
                    Some((k, rest_s[i]))
                } else if col_deg(j) == 1 {
                    Some((k, rest_d[j]))
                } else {
                    None
                }
            });
            let Some((k, x)) = leaf else {
                feasible = false; // cycle: not a basis
                break;
            };
            let (i, j) = open.remove(k);
            if x < -1e-12 {
                feasible = false;
                break;
            }
            rest_s[i] -= x;
            rest_d[j] -= x;
            total += x * cost[i][j];
        }
        if !feasible || rest_s.iter().chain(&rest_d).any(|v| v.abs() > 1e-9) {
            continue;
        }
        best = best.min(total);
    }
    best
}

fn random_masses(size: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..size).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn wasserstein_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let instances = 150;
    for _ in 0..instances {
        let points: Vec<(f64, f64)> = (0..8)
            .map(|_| (rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)))
            .collect();
        let dist = |a: usize, b: usize| {
            ((points[a].0 - points[b].0).powi(2) + (points[a].1 - points[b].1).powi(2)).sqrt()
        };
        let mut nodes: Vec<usize> = (0..8).collect();
        nodes.shuffle(&mut rng);
        let (a, b) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let src: Vec<usize> = nodes[..a].to_vec();
        let dst: Vec<usize> = nodes[8 - b..].to_vec();
        let (ms, md) = (random_masses(a, &mut rng), random_masses(b, &mut rng));
        let mu = DiscreteMeasure::new(src.iter().copied().zip(ms)).unwrap();
        let nu = DiscreteMeasure::new(dst.iter().copied().zip(md)).unwrap();
        let got = wasserstein1(&mu, &nu, dist).unwrap();
        let table: Vec<Vec<f64>> = mu
            .support()
            .iter()
            .map(|&x| nu.support().iter().map(|&y| dist(x, y)).collect())
            .collect();
        let want = transport_by_enumeration(mu.masses(), nu.masses(), &table);
        worst = worst.max((got - want).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("{instances} instances, worst |difference| {worst:.2e}"),
    )
}

fn random_diagram(rng: &mut impl Rng) -> PersistenceDiagram {
    let kinds = [
        PointKind::OrdinaryAscending,
        PointKind::RelativeDescending,
        PointKind::Essential0,
        PointKind::Extended1,
    ];
    let size = rng.gen_range(0..12);
    PersistenceDiagram::new(
        (0..size)
            .map(|_| {
                let kind = kinds[rng.gen_range(0..4)];
                PersistencePoint::new(kind, rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0))
            })
            .collect(),
    )
}

fn image_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let bounds = Bounds {
        x_min: 0.0,
        x_max: 6.0,
        y_min: 0.0,
        y_max: 6.0,
    };
    let spec = ImageSpec::new(5, 5, 0.7, bounds, Transform::Absolute).unwrap();
    let diagrams: Vec<PersistenceDiagram> = (0..60).map(|_| random_diagram(&mut rng)).collect();
    let mut failures = BTreeMap::new();
    let empty = persistence_image(&PersistenceDiagram::default(), &spec);
    if empty.iter().any(|&v| v != 0.0) {
        *failures.entry("empty").or_insert(0) += 1;
    }
    for pair in diagrams.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let ia = persistence_image(a, &spec);
        if ia.iter().any(|&v| v < 0.0) {
            *failures.entry("nonnegativity").or_insert(0) += 1;
        }
        let ib = persistence_image(b, &spec);
        let iu = persistence_image(&a.union(b), &spec);
        if iu
            .iter()
            .zip(ia.iter().zip(&ib))
            .any(|(u, (x, y))| (u - x - y).abs() > 1e-9)
        {
            *failures.entry("additivity").or_insert(0) += 1;
        }
        let mut shuffled = a.points.clone();
        shuffled.shuffle(&mut rng);
        let is = persistence_image(&PersistenceDiagram::new(shuffled), &spec);
        if is.iter().zip(&ia).any(|(x, y)| (x - y).abs() > 1e-12) {
            *failures.entry("permutation").or_insert(0) += 1;
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} diagrams, failures {failures:?}", diagrams.len()),
    )
}

fn sbm_end_to_end() -> Outcome {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let (mut tlc, mut ablated) = (Vec::new(), Vec::new());
    for seed in 0..10u64 {
        let g = sbm_generate(250, 5, 0.25, 0.015, 32, seed).unwrap();
        let x = g.features().unwrap().clone();
        let mut cfg = ExperimentConfig {
            pair: PairConfig {
                k: 2,
                metric: Metric::Hop,
                ..PairConfig::default()
            },
            workers,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            ..ExperimentConfig::default()
        };
        tlc.push(run_experiment(&g, &x, &cfg).unwrap().report.test_auc);
        cfg.ablate_topology = true;
        ablated.push(run_experiment(&g, &x, &cfg).unwrap().report.test_auc);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (a, b) = (mean(&tlc), mean(&ablated));
    outcome(
        a > b && a >= 0.6 && b >= 0.6,
        format!(
            "mean test ROC-AUC with images {a:.4}, images zeroed {b:.4}, margin {:+.4}",
            a - b
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_looptop"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let graph = root.join("input/graph.edges");
    let features = root.join("input/features.csv");
    if !run_cli(
        &[
            "--seed", "3", "sbm", "--n", "60", "--c", "3", "--p", "0.3", "--q", "0.03", "--d", "8",
        ],
        &root.join("input"),
    ) {
        return outcome(false, "could not generate the input graph");
    }
    let (g, f) = (graph.to_str().unwrap(), features.to_str().unwrap());
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "sbm",
            vec![
                "--seed", "5", "sbm", "--n", "100", "--c", "4", "--p", "0.2", "--q", "0.02", "--d",
                "6",
            ],
        ),
        (
            "diagram",
            vec!["diagram", "--graph", g, "--u", "0", "--v", "1"],
        ),
        (
            "diagram-ricci",
            vec![
                "diagram", "--graph", g, "--u", "2", "--v", "7", "--metric", "ricci",
            ],
        ),
        ("image", vec!["image", "--graph", g, "--workers", "4"]),
        ("ricci", vec!["ricci", "--graph", g]),
        (
            "train",
            vec![
                "--seed",
                "9",
                "train",
                "--graph",
                g,
                "--features",
                f,
                "--epochs",
                "40",
            ],
        ),
    ];
    let mut differing = Vec::new();
    for (name, args) in &commands {
        let (a, b) = (
            root.join(format!("{name}-1")),
            root.join(format!("{name}-2")),
        );
        if !run_cli(args, &a) || !run_cli(args, &b) {
            differing.push(format!("{name} (failed to run)"));
        } else if dir_contents(&a) != dir_contents(&b) {
            differing.push(name.to_string());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} commands run twice, differing: {differing:?}",
            commands.len()
        ),
    )
}

fn main() {
    let started = Instant::now();
    let corpus = equivalence_corpus();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "1 golden worked example",
            Duration::from_secs(1),
            Box::new(golden_worked_example),
        ),
        (
            "2 fast equals reduction",
            Duration::from_secs(120),
            Box::new(|| theorem_equivalence(&corpus)),
        ),
        (
            "3 cycle rank",
            Duration::from_secs(120),
            Box::new(|| cycle_rank(&corpus)),
        ),
        ("4 speedup", Duration::from_secs(300), Box::new(speedup)),
        (
            "5 gradient check",
            Duration::from_secs(60),
            Box::new(gradients),
        ),
        (
            "6 wasserstein oracle",
            Duration::from_secs(30),
            Box::new(wasserstein_oracle),
        ),
        (
            "7 persistence image properties",
            Duration::from_secs(30),
            Box::new(image_properties),
        ),
        (
            "8 SBM link prediction",
            Duration::from_secs(1200),
            Box::new(sbm_end_to_end),
        ),
        (
            "9 determinism",
            Duration::from_secs(300),
            Box::new(determinism),
        ),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let pass = result.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
