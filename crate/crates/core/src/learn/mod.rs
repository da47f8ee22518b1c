//! Link prediction with a GCN encoder and a decoder that sees per-pair
//! persistence images.

mod auc;
mod experiment;
mod model;
mod split;
mod train;

pub use auc::roc_auc;
pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutcome};
pub use model::{
    bce, decode, decoder_distance, embed, fermi_dirac, gcn_forward, loss, loss_and_gradients, Adam,
    Embedding, GcnInput, ModelDims, ModelState, NormalizedAdjacency, Params, Sample, LEAKY_SLOPE,
    PROB_CLAMP, TENSOR_NAMES,
};
pub use split::{make_split, sample_non_edges, DataSplit, SplitRatios, MIN_SPLIT_EDGES};
pub use train::{
    history_csv, negative_schedule, score_pairs, train, training_graph, EpochMetrics,
    ImageProvider, PairImages, Report, TrainConfig, TrainOutcome, ZeroImages,
};
