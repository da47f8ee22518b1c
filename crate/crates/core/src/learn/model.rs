//! Two-layer GCN encoder and the topology-augmented Fermi-Dirac decoder,
//! with hand-derived gradients.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::Graph;

pub const LEAKY_SLOPE: f64 = 0.2;
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub input: usize,
    pub hidden: usize,
    pub embed: usize,
    pub image: usize,
    pub mlp_hidden: usize,
}

impl ModelDims {
    pub fn new(input: usize, image: usize) -> Self {
        ModelDims {
            input,
            hidden: 100,
            embed: 16,
            image,
            mlp_hidden: 64,
        }
    }

    pub fn decoder_input(&self) -> usize {
        self.embed + self.image
    }
}

/// Trainable tensors. The decoder MLP is `m1: (embed + image) x mlp_hidden`
/// with bias `b1`, then `m2` and scalar `b2` down to `dist`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub m1: Array2<f64>,
    pub b1: Array1<f64>,
    pub m2: Array1<f64>,
    pub b2: f64,
}

pub const TENSOR_NAMES: [&str; 6] = ["w1", "w2", "m1", "b1", "m2", "b2"];

impl Params {
    /// Glorot-uniform weights, zero biases.
    pub fn init(dims: &ModelDims, rng: &mut impl Rng) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-limit..limit))
        };
        let w1 = glorot(dims.input, dims.hidden);
        let w2 = glorot(dims.hidden, dims.embed);
        let m1 = glorot(dims.decoder_input(), dims.mlp_hidden);
        let m2 = glorot(dims.mlp_hidden, 1).remove_axis(Axis(1));
        Params {
            w1,
            w2,
            m1,
            b1: Array1::zeros(dims.mlp_hidden),
            m2,
            b2: 0.0,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Params {
            w1: Array2::zeros(self.w1.raw_dim()),
            w2: Array2::zeros(self.w2.raw_dim()),
            m1: Array2::zeros(self.m1.raw_dim()),
            b1: Array1::zeros(self.b1.len()),
            m2: Array1::zeros(self.m2.len()),
            b2: 0.0,
        }
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            input: self.w1.nrows(),
            hidden: self.w1.ncols(),
            embed: self.w2.ncols(),
            image: self.m1.nrows() - self.w2.ncols(),
            mlp_hidden: self.m1.ncols(),
        }
    }

    /// Flat views in [`TENSOR_NAMES`] order.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.m1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.m2.as_slice().expect("standard layout"),
            std::slice::from_ref(&self.b2),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.m1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.m2.as_slice_mut().expect("standard layout"),
            std::slice::from_mut(&mut self.b2),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// `D^-1/2 (A + I) D^-1/2` as sparse rows, `D` the row sums of `A + I`.
/// Edge weights are ignored.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency {
    rows: Vec<Vec<(usize, f64)>>,
}

impl NormalizedAdjacency {
    pub fn new(g: &Graph) -> Self {
        let deg: Vec<f64> = (0..g.node_count())
            .map(|i| 1.0 + g.degree(i) as f64)
            .collect();
        let rows = (0..g.node_count())
            .map(|i| {
                let mut row = vec![(i, 1.0 / deg[i])];
                row.extend(
                    g.neighbors(i)
                        .iter()
                        .map(|&(j, _)| (j, 1.0 / (deg[i] * deg[j]).sqrt())),
                );
                row.sort_by_key(|&(j, _)| j);
                row
            })
            .collect();
        NormalizedAdjacency { rows }
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// `Â x`. The matrix is symmetric, so this also serves for `Âᵀ x`.
    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(x.raw_dim());
        for (i, row) in self.rows.iter().enumerate() {
            let mut target = out.row_mut(i);
            for &(j, a) in row {
                target.scaled_add(a, &x.row(j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.rows.len();
        let mut out = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                out[[i, j]] = a;
            }
        }
        out
    }
}

/// Message-passing graph and features, with `ÂX` cached since it does not
/// depend on the parameters.
#[derive(Clone, Debug)]
pub struct GcnInput {
    adj: NormalizedAdjacency,
    ax: Array2<f64>,
}

impl GcnInput {
    pub fn new(g: &Graph, x: &Array2<f64>) -> Result<Self> {
        if x.nrows() != g.node_count() {
            return Err(invalid(format!(
                "feature matrix has {} rows for {} nodes",
                x.nrows(),
                g.node_count()
            )));
        }
        let adj = NormalizedAdjacency::new(g);
        let ax = adj.apply(&x.as_standard_layout().to_owned());
        Ok(GcnInput { adj, ax })
    }

    pub fn feature_dim(&self) -> usize {
        self.ax.ncols()
    }

    pub fn node_count(&self) -> usize {
        self.ax.nrows()
    }
}

/// Forward activations kept for the backward pass; `h` is the embedding.
#[derive(Clone, Debug)]
pub struct Embedding {
    z1: Array2<f64>,
    ah1: Array2<f64>,
    pub h: Array2<f64>,
}

pub fn gcn_forward(input: &GcnInput, params: &Params) -> Embedding {
    let z1 = input.ax.dot(&params.w1);
    let h1 = z1.mapv(|v| v.max(0.0));
    let ah1 = input.adj.apply(&h1);
    let h = ah1.dot(&params.w2);
    Embedding { z1, ah1, h }
}

/// Node embeddings of `g` under `params`.
pub fn embed(g: &Graph, x: &Array2<f64>, params: &Params) -> Result<Array2<f64>> {
    let input = GcnInput::new(g, x)?;
    if input.feature_dim() != params.w1.nrows() {
        return Err(invalid(format!(
            "features have {} columns, model expects {}",
            input.feature_dim(),
            params.w1.nrows()
        )));
    }
    Ok(gcn_forward(&input, params).h)
}

pub fn fermi_dirac(dist: f64) -> f64 {
    1.0 / ((dist - 2.0).exp() + 1.0)
}

struct DecoderTrace {
    feature: Vec<f64>,
    pre: Vec<f64>,
    dist: f64,
}

fn leaky(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        LEAKY_SLOPE * v
    }
}

fn decoder_forward(
    params: &Params,
    hu: ArrayView1<f64>,
    hv: ArrayView1<f64>,
    image: &[f64],
) -> DecoderTrace {
    let mut feature: Vec<f64> = hu
        .iter()
        .zip(hv.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .collect();
    feature.extend_from_slice(image);
    let mut pre = params.b1.to_vec();
    for (i, &f) in feature.iter().enumerate() {
        if f != 0.0 {
            for (p, &w) in pre.iter_mut().zip(params.m1.row(i)) {
                *p += f * w;
            }
        }
    }
    let dist = params.b2
        + pre
            .iter()
            .zip(&params.m2)
            .map(|(&a, &w)| leaky(a) * w)
            .sum::<f64>();
    DecoderTrace { feature, pre, dist }
}

/// The MLP's raw scalar output for a pair.
pub fn decoder_distance(
    hu: ArrayView1<f64>,
    hv: ArrayView1<f64>,
    image: &[f64],
    params: &Params,
) -> f64 {
    decoder_forward(params, hu, hv, image).dist
}

/// Link probability `1 / (exp(dist - 2) + 1)`.
pub fn decode(hu: ArrayView1<f64>, hv: ArrayView1<f64>, image: &[f64], params: &Params) -> f64 {
    fermi_dirac(decoder_distance(hu, hv, image, params))
}

#[derive(Copy, Clone, Debug)]
pub struct Sample<'a> {
    pub u: usize,
    pub v: usize,
    pub label: bool,
    pub image: &'a [f64],
}

pub fn bce(p: f64, label: bool) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if label {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

fn check_batch(input: &GcnInput, params: &Params, batch: &[Sample]) {
    let dims = params.dims();
    assert_eq!(
        input.feature_dim(),
        dims.input,
        "feature width does not match the model"
    );
    for s in batch {
        assert!(
            s.u < input.node_count() && s.v < input.node_count(),
            "sample node out of range"
        );
        assert_eq!(
            s.image.len(),
            dims.image,
            "image length does not match the model"
        );
    }
}

/// Mean binary cross-entropy of `batch`.
pub fn loss(input: &GcnInput, params: &Params, batch: &[Sample]) -> f64 {
    check_batch(input, params, batch);
    let emb = gcn_forward(input, params);
    batch
        .iter()
        .map(|s| {
            bce(
                decode(emb.h.row(s.u), emb.h.row(s.v), s.image, params),
                s.label,
            )
        })
        .sum::<f64>()
        / batch.len().max(1) as f64
}

/// Mean binary cross-entropy and its exact gradient with respect to every
/// parameter. Images are constants.
pub fn loss_and_gradients(input: &GcnInput, params: &Params, batch: &[Sample]) -> (f64, Params) {
    check_batch(input, params, batch);
    let dims = params.dims();
    let emb = gcn_forward(input, params);
    let mut grad = params.zeros_like();
    let mut dh = Array2::<f64>::zeros(emb.h.raw_dim());
    let scale = 1.0 / batch.len().max(1) as f64;
    let mut total = 0.0;
    let mut dpre = vec![0.0; dims.mlp_hidden];

    for s in batch {
        let (hu, hv) = (emb.h.row(s.u), emb.h.row(s.v));
        let trace = decoder_forward(params, hu, hv, s.image);
        let p = fermi_dirac(trace.dist);
        total += bce(p, s.label);
        if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&p) {
            continue;
        }
        // p = sigmoid(2 - dist), so dL/d(dist) = y - p
        let y = if s.label { 1.0 } else { 0.0 };
        let g_dist = (y - p) * scale;

        grad.b2 += g_dist;
        for j in 0..dims.mlp_hidden {
            let a = trace.pre[j];
            grad.m2[j] += g_dist * leaky(a);
            dpre[j] = g_dist * params.m2[j] * if a > 0.0 { 1.0 } else { LEAKY_SLOPE };
            grad.b1[j] += dpre[j];
        }
        for (i, &f) in trace.feature.iter().enumerate() {
            if f != 0.0 {
                for (g, &d) in grad.m1.row_mut(i).iter_mut().zip(&dpre) {
                    *g += f * d;
                }
            }
        }
        for k in 0..dims.embed {
            let dfeat: f64 = params
                .m1
                .row(k)
                .iter()
                .zip(&dpre)
                .map(|(&w, &d)| w * d)
                .sum();
            let diff = hu[k] - hv[k];
            let g = 2.0 * diff * dfeat;
            dh[[s.u, k]] += g;
            dh[[s.v, k]] -= g;
        }
    }

    grad.w2 = emb.ah1.t().dot(&dh);
    let mut dz1 = input.adj.apply(&dh.dot(&params.w2.t()));
    dz1.zip_mut_with(&emb.z1, |d, &z| {
        if z <= 0.0 {
            *d = 0.0;
        }
    });
    grad.w1 = input.ax.t().dot(&dz1);
    (total * scale, grad)
}

/// Adam with coupled L2 weight decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Params,
    pub v: Params,
}

impl Adam {
    pub fn new(params: &Params) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn update(&mut self, params: &mut Params, grad: &Params, lr: f64, weight_decay: f64) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let grads = grad.tensors();
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads)
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for i in 0..p.len() {
                let gi = g[i] + weight_decay * p[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
    }
}

/// Link predictor parameters together with the optimizer moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub params: Params,
    pub optimizer: Adam,
}

impl ModelState {
    pub fn new(dims: &ModelDims, rng: &mut impl Rng) -> Self {
        let params = Params::init(dims, rng);
        let optimizer = Adam::new(&params);
        ModelState { params, optimizer }
    }
}
