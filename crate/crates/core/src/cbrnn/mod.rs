//! Connectionist bi-directional RNN with a pairwise ranking objective.
//!
//! Three tanh recurrences share the input sequence `x_1 … x_n`:
//!
//! ```text
//! h_f[t]  = tanh(x_t       · U_f + h_f[t-1]  · W_f)
//! h_b[t]  = tanh(x_{n-t+1} · U_b + h_b[t-1]  · W_b)
//! h_bi[t] = tanh(h_f[t] + h_b[t] + h_bi[t-1] · W_bi)
//! ```
//!
//! with zero initial states. The backward chain reads the sentence from its
//! last word, so after `t` steps it has consumed `x_n … x_{n-t+1}`. Class
//! scores are `h_bi[n] · W_hy + b_y`.

mod backward;
mod eval;
mod forward;
mod gradcheck;
mod loss;
mod model_file;
mod optim;
mod params;
mod train;

use thiserror::Error;

use crate::corpus::CorpusError;
use crate::embeddings::EmbeddingError;

pub use backward::loss_gradients;
pub use eval::{evaluate, score_predictions, ClassMetrics, EvalReport};
pub use forward::{forward_pass, softmax, ForwardCache};
pub use gradcheck::{compare_with_finite_differences, gradient_check, relative_error};
pub use loss::{ranking_loss, LossConfig, RankingLoss};
pub use optim::sgd_step;
pub use params::{Activation, CbrnnParams, Gradients};
pub use train::{
    predict, train, train_with_embeddings, EpochMetrics, Prediction, TrainConfig, TrainOutcome, TrainedModel,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ranking loss needs at least two classes")]
    SingleClass,
    #[error("class index {index} out of range for {classes} classes")]
    InvalidLabel { index: usize, classes: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("forward cache was not produced by these parameters")]
    StaleCache,
    #[error("empty input sequence")]
    EmptySequence,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("model file line {line}: {message}")]
    ModelFile { line: usize, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
