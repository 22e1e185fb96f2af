use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{forward_pass, loss_gradients, ranking_loss, sgd_step, CbrnnParams, ForwardCache, LossConfig, ModelError};
use crate::corpus::{build_vocabulary, validate_markers, CorpusSplit, LabeledSentence, Vocabulary};
use crate::embeddings::{check_window, compose_ngram_inputs, init_random, EmbeddingTable};
use crate::Scalar;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// N-gram window size N (odd).
    pub window: usize,
    /// Hidden size D.
    pub hidden: usize,
    /// Embedding dimension d.
    pub embed_dim: usize,
    pub min_count: usize,
    pub clip_norm: f64,
    pub shuffle: bool,
    pub trainable_embeddings: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 50,
            seed: 1,
            window: 3,
            hidden: 64,
            embed_dim: 50,
            min_count: 1,
            clip_norm: 5.0,
            shuffle: true,
            trainable_embeddings: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::ConfigInvalid(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return bad("clip norm must be positive");
        }
        if self.hidden == 0 || self.embed_dim == 0 {
            return bad("hidden size and embedding dimension must be positive");
        }
        if self.min_count == 0 {
            return bad("min_count must be at least 1");
        }
        check_window(self.window)?;
        Ok(())
    }
}

/// A classifier ready for prediction and interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    pub config: TrainConfig,
    pub loss: LossConfig,
    pub labels: Vec<String>,
    pub vocab: Vocabulary,
    pub params: CbrnnParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub label_index: usize,
    pub label: String,
    pub probs: Vec<T>,
}

/// Per-epoch training log entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// `None` when the split has no dev sentences.
    pub dev_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: TrainedModel<T>,
    pub history: Vec<EpochMetrics>,
    /// Epoch whose parameters were kept (0 = initialization).
    pub best_epoch: usize,
}

fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl<T: Scalar> TrainedModel<T> {
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        self.vocab.encode(tokens)
    }

    /// Forward run over a full token sequence, without marker validation.
    pub fn forward_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Result<ForwardCache<T>, ModelError> {
        self.forward_ids(&self.encode(tokens))
    }

    pub fn forward_ids(&self, ids: &[usize]) -> Result<ForwardCache<T>, ModelError> {
        if ids.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        let x = compose_ngram_inputs(ids, &self.params.embeddings, self.params.window)?;
        forward_pass(&self.params, &x)
    }

    /// Classifies a marked token sequence.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Prediction<T>, ModelError> {
        validate_markers(tokens)?;
        let cache = self.forward_tokens(tokens)?;
        Ok(self.prediction_from_probs(cache.probs))
    }

    pub(crate) fn prediction_from_probs(&self, probs: Vec<T>) -> Prediction<T> {
        let label_index = argmax(&probs);
        Prediction {
            label_index,
            label: self.labels[label_index].clone(),
            probs,
        }
    }
}

/// Classifies one sentence; the label is the argmax of the probabilities
/// (ties → lowest class index).
pub fn predict<T: Scalar>(m: &TrainedModel<T>, s: &LabeledSentence) -> Result<Prediction<T>, ModelError> {
    m.predict(&s.tokens)
}

fn accuracy<T: Scalar>(m: &TrainedModel<T>, encoded: &[(Vec<usize>, usize)]) -> Result<f64, ModelError> {
    let mut correct = 0usize;
    for (ids, y) in encoded {
        let cache = m.forward_ids(ids)?;
        if argmax(&cache.probs) == *y {
            correct += 1;
        }
    }
    Ok(correct as f64 / encoded.len() as f64)
}

fn encode_all(
    sentences: &[LabeledSentence],
    vocab: &Vocabulary,
    labels: &[String],
) -> Result<Vec<(Vec<usize>, usize)>, ModelError> {
    sentences
        .iter()
        .map(|s| {
            let y = labels
                .iter()
                .position(|l| *l == s.label)
                .ok_or_else(|| ModelError::UnknownLabel(s.label.clone()))?;
            Ok((vocab.encode(&s.tokens), y))
        })
        .collect()
}

/// Trains from randomly initialised embeddings.
pub fn train<T: Scalar>(
    split: &CorpusSplit,
    cfg: &TrainConfig,
    lcfg: &LossConfig,
) -> Result<TrainOutcome<T>, ModelError> {
    if split.train.is_empty() {
        return Err(ModelError::EmptyTrainSet);
    }
    cfg.validate()?;
    let vocab = build_vocabulary(&split.train, cfg.min_count)?;
    let embeddings = init_random(&vocab, cfg.embed_dim, cfg.seed)?;
    train_with_embeddings(split, vocab, embeddings, cfg, lcfg)
}

/// Per-example SGD over the (seeded) shuffled training set. After each epoch
/// the dev accuracy is measured; the returned model is the snapshot with the
/// best dev accuracy, later epochs winning ties. Without dev data the last
/// epoch is kept.
pub fn train_with_embeddings<T: Scalar>(
    split: &CorpusSplit,
    vocab: Vocabulary,
    mut embeddings: EmbeddingTable<T>,
    cfg: &TrainConfig,
    lcfg: &LossConfig,
) -> Result<TrainOutcome<T>, ModelError> {
    if split.train.is_empty() {
        return Err(ModelError::EmptyTrainSet);
    }
    cfg.validate()?;
    lcfg.validate()?;
    if split.label_set.len() < 2 {
        return Err(ModelError::SingleClass);
    }
    if embeddings.vocab_size() != vocab.len() || embeddings.dim() != cfg.embed_dim {
        return Err(ModelError::ShapeMismatch(format!(
            "embedding table is {:?}, expected ({}, {})",
            embeddings.matrix.shape(),
            vocab.len(),
            cfg.embed_dim
        )));
    }
    embeddings.trainable = cfg.trainable_embeddings;
    let labels = split.label_set.clone();
    let train_set = encode_all(&split.train, &vocab, &labels)?;
    let dev_set = encode_all(&split.dev, &vocab, &labels)?;

    let params = CbrnnParams::init_random(
        embeddings,
        cfg.window,
        cfg.hidden,
        labels.len(),
        cfg.seed.wrapping_add(1),
    );
    let mut model = TrainedModel {
        config: cfg.clone(),
        loss: *lcfg,
        labels,
        vocab,
        params,
    };
    let mut best = model.params.clone();
    let mut best_epoch = 0;
    let mut best_acc = f64::NEG_INFINITY;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for &i in &order {
            let (ids, y) = &train_set[i];
            let cache = model.forward_ids(ids)?;
            total += ranking_loss(&cache.scores, *y, lcfg)?.loss.to_f64_lossy();
            let grads = loss_gradients(&model.params, &cache, *y, lcfg)?;
            sgd_step(&mut model.params, &grads, cfg.learning_rate, cfg.clip_norm)?;
        }
        if !model.params.is_finite() {
            return Err(ModelError::ConfigInvalid(format!(
                "parameters diverged in epoch {epoch}"
            )));
        }
        let dev_accuracy = if dev_set.is_empty() {
            None
        } else {
            Some(accuracy(&model, &dev_set)?)
        };
        history.push(EpochMetrics {
            epoch,
            train_loss: total / train_set.len() as f64,
            dev_accuracy,
        });
        let acc = dev_accuracy.unwrap_or(0.0);
        if acc >= best_acc {
            best_acc = acc;
            best = model.params.clone();
            best_epoch = epoch;
        }
    }
    model.params = best;
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
    })
}
