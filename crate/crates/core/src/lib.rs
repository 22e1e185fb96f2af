//! Connectionist bi-directional RNN (C-BRNN) relation classification with
//! layer-wise prefix scoring (LISA) and saliency pattern extraction.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file fix it to `f64`, which is what the
//! CLI, the model file and the gradient checks use.

pub mod cbrnn;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod interpret;
mod linalg;
mod scalar;

pub use linalg::Matrix;
pub use scalar::Scalar;

pub use cbrnn::{
    evaluate, forward_pass, gradient_check, loss_gradients, predict, ranking_loss, sgd_step, train, Activation,
    EpochMetrics, EvalReport, LossConfig, ModelError, Prediction, RankingLoss, TrainConfig,
};
pub use corpus::{
    build_vocabulary, encode_sentence, generate_synthetic, import_semeval, parse_corpus, parse_marked_sentence,
    CorpusError, CorpusSplit, LabeledSentence, SyntheticConfig, Vocabulary,
};
pub use embeddings::{compose_ngram_inputs, init_random, load_pretrained_text, EmbeddingError};
pub use interpret::{
    export_hidden_states, extract_pattern, extract_patterns, mine_patterns, prefix_curve, InterpretError, PrefixScorer,
};

/// Model parameters in 64-bit arithmetic.
pub type CbrnnParams = cbrnn::CbrnnParams<f64>;
/// Per-sentence forward activations in 64-bit arithmetic.
pub type ForwardCache = cbrnn::ForwardCache<f64>;
/// Parameter gradients in 64-bit arithmetic.
pub type Gradients = cbrnn::Gradients<f64>;
/// A trained classifier in 64-bit arithmetic.
pub type TrainedModel = cbrnn::TrainedModel<f64>;
pub type EmbeddingTable = embeddings::EmbeddingTable<f64>;
pub type NgramInputSequence = embeddings::NgramInputSequence<f64>;
pub type PrefixScoreCurve = interpret::PrefixScoreCurve<f64>;
pub type SaliencyPattern = interpret::SaliencyPattern<f64>;
pub type PatternTable = interpret::PatternTable<f64>;
pub type HiddenStateRow = interpret::HiddenStateRow<f64>;
