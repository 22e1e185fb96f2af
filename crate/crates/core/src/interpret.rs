//! Layer-wise prefix scoring and saliency pattern extraction.
//!
//! A prefix curve scores every prefix `S≤k` of a sentence with an
//! independent forward run. Pattern extraction walks the same prefixes and
//! returns the last N-gram window of the first prefix whose probability for
//! the target relation reaches the threshold τ.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::cbrnn::{forward_pass, ModelError, TrainedModel};
use crate::corpus::{validate_markers, CorpusError, LabeledSentence, PAD_TOKEN};
use crate::embeddings::{check_window, compose_prefix_inputs, ngram_windows, EmbeddingError};
use crate::Scalar;

/// Default threshold τ.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Error)]
pub enum InterpretError {
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Anything that can score sentence prefixes.
pub trait PrefixScorer<T: Scalar> {
    /// Class labels, in probability-vector order.
    fn labels(&self) -> &[String];

    /// Class probabilities for the length-`k` prefix of `tokens`
    /// (`1 ≤ k ≤ tokens.len()`). With `lookahead` the prefix is the first
    /// `k` N-gram windows of the full sentence, otherwise the windows are
    /// recomputed on the truncated prefix.
    fn prefix_probabilities(&self, tokens: &[String], k: usize, lookahead: bool) -> Result<Vec<T>, InterpretError>;

    fn relation_index(&self, relation: &str) -> Result<usize, InterpretError> {
        self.labels()
            .iter()
            .position(|l| l == relation)
            .ok_or_else(|| InterpretError::UnknownRelation(relation.to_owned()))
    }
}

impl<T: Scalar> PrefixScorer<T> for TrainedModel<T> {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn prefix_probabilities(&self, tokens: &[String], k: usize, lookahead: bool) -> Result<Vec<T>, InterpretError> {
        let ids = self.encode(tokens);
        let x = compose_prefix_inputs(&ids, k, &self.params.embeddings, self.params.window, lookahead)?;
        Ok(forward_pass(&self.params, &x)?.probs)
    }
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

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub k: usize,
    /// The word `w_k` that ends the prefix.
    pub last_token: String,
    pub prob_target: T,
    pub predicted_label: String,
    pub prob_predicted: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixScoreCurve<T> {
    pub sentence_id: String,
    pub relation: String,
    pub points: Vec<CurvePoint<T>>,
}

/// Scores every prefix of `s` for `relation`.
pub fn prefix_curve<T: Scalar, M: PrefixScorer<T> + ?Sized>(
    m: &M,
    s: &LabeledSentence,
    relation: &str,
    lookahead: bool,
) -> Result<PrefixScoreCurve<T>, InterpretError> {
    let target = m.relation_index(relation)?;
    validate_markers(&s.tokens)?;
    let mut points = Vec::with_capacity(s.len());
    for k in 1..=s.len() {
        let probs = m.prefix_probabilities(&s.tokens, k, lookahead)?;
        let best = argmax(&probs);
        points.push(CurvePoint {
            k,
            last_token: s.tokens[k - 1].clone(),
            prob_target: probs[target],
            predicted_label: m.labels()[best].clone(),
            prob_predicted: probs[best],
        });
    }
    Ok(PrefixScoreCurve {
        sentence_id: s.id.clone(),
        relation: relation.to_owned(),
        points,
    })
}

/// The N-gram behind the first threshold crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyPattern<T> {
    pub relation: String,
    /// `N` tokens; positions outside the sentence read `__PAD__`.
    pub ngram: Vec<String>,
    /// 1-based length of the first prefix reaching τ.
    pub crossing_index: usize,
    pub score: T,
    pub sentence_id: String,
}

fn check_tau(tau: f64) -> Result<(), InterpretError> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(InterpretError::InvalidThreshold(tau))
    }
}

/// Window of `ngram` tokens ending the length-`k` prefix, composed the same
/// way as the scored input windows.
pub fn last_window(tokens: &[String], k: usize, ngram: usize, lookahead: bool) -> Vec<String> {
    let pad = PAD_TOKEN.to_owned();
    let mut windows = if lookahead {
        ngram_windows(tokens, ngram, pad)
    } else {
        ngram_windows(&tokens[..k], ngram, pad)
    };
    windows.swap_remove(k - 1)
}

/// Returns the last N-gram of the first prefix `S≤k` with
/// `P(relation | S≤k) ≥ tau`, or `None` if no prefix reaches `tau`.
///
/// `ngram` sets the reported window width; it normally equals the model's
/// input window, in which case the pattern is exactly the last window fed to
/// the network.
pub fn extract_pattern<T: Scalar, M: PrefixScorer<T> + ?Sized>(
    m: &M,
    s: &LabeledSentence,
    relation: &str,
    tau: f64,
    ngram: usize,
    lookahead: bool,
) -> Result<Option<SaliencyPattern<T>>, InterpretError> {
    check_tau(tau)?;
    check_window(ngram)?;
    let target = m.relation_index(relation)?;
    validate_markers(&s.tokens)?;
    let tau_t = T::from_f64_lossy(tau);
    for k in 1..=s.len() {
        let score = m.prefix_probabilities(&s.tokens, k, lookahead)?[target];
        if score >= tau_t {
            return Ok(Some(SaliencyPattern {
                relation: relation.to_owned(),
                ngram: last_window(&s.tokens, k, ngram, lookahead),
                crossing_index: k,
                score,
                sentence_id: s.id.clone(),
            }));
        }
    }
    Ok(None)
}

/// Outcome of pattern extraction for one sentence of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SentencePattern<T> {
    pub sentence_id: String,
    pub relation: String,
    /// Whether the full sentence is classified as its gold relation.
    pub correct: bool,
    pub pattern: Option<SaliencyPattern<T>>,
}

/// Runs [`extract_pattern`] with the gold label of every sentence. Sentences
/// whose label the scorer does not know are skipped; with `only_correct`,
/// misclassified sentences are reported without a pattern.
pub fn extract_patterns<T: Scalar, M: PrefixScorer<T> + ?Sized>(
    m: &M,
    sentences: &[LabeledSentence],
    tau: f64,
    ngram: usize,
    only_correct: bool,
    lookahead: bool,
) -> Result<Vec<SentencePattern<T>>, InterpretError> {
    check_tau(tau)?;
    check_window(ngram)?;
    let mut out = Vec::with_capacity(sentences.len());
    for s in sentences {
        let Ok(gold) = m.relation_index(&s.label) else { continue };
        validate_markers(&s.tokens)?;
        let full = m.prefix_probabilities(&s.tokens, s.len(), lookahead)?;
        let correct = argmax(&full) == gold;
        let pattern = if only_correct && !correct {
            None
        } else {
            extract_pattern(m, s, &s.label, tau, ngram, lookahead)?
        };
        out.push(SentencePattern {
            sentence_id: s.id.clone(),
            relation: s.label.clone(),
            correct,
            pattern,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternEntry<T> {
    pub ngram: Vec<String>,
    pub support: usize,
    pub mean_score: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationPatterns<T> {
    pub relation: String,
    pub entries: Vec<PatternEntry<T>>,
}

/// Aggregated patterns per relation, relations in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable<T> {
    pub tau: f64,
    pub ngram: usize,
    pub relations: Vec<RelationPatterns<T>>,
}

impl<T: Scalar> PatternTable<T> {
    /// Groups identical N-grams per relation. Entries are ordered by support
    /// (descending), mean score (descending), then N-gram text.
    pub fn from_patterns(labels: &[String], patterns: &[SentencePattern<T>], tau: f64, ngram: usize) -> Self {
        let mut groups: HashMap<(&str, &[String]), Vec<T>> = HashMap::new();
        for p in patterns.iter().filter_map(|sp| sp.pattern.as_ref()) {
            groups
                .entry((p.relation.as_str(), p.ngram.as_slice()))
                .or_default()
                .push(p.score);
        }
        let mut relations = Vec::new();
        for label in labels {
            let mut entries: Vec<PatternEntry<T>> = groups
                .iter_mut()
                .filter(|((rel, _), _)| rel == label)
                .map(|((_, ngram), scores)| {
                    // summing in sorted order keeps the mean independent of input order
                    scores.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                    let total: T = scores.iter().copied().sum();
                    PatternEntry {
                        ngram: ngram.to_vec(),
                        support: scores.len(),
                        mean_score: total / T::from_usize(scores.len()).expect("count fits"),
                    }
                })
                .collect();
            if entries.is_empty() {
                continue;
            }
            entries.sort_by(|a, b| {
                b.support
                    .cmp(&a.support)
                    .then_with(|| b.mean_score.partial_cmp(&a.mean_score).unwrap_or(Ordering::Equal))
                    .then_with(|| a.ngram.cmp(&b.ngram))
            });
            relations.push(RelationPatterns {
                relation: label.clone(),
                entries,
            });
        }
        PatternTable { tau, ngram, relations }
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// `relation<TAB>ngram<TAB>support<TAB>mean_score`, one line per entry.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for rel in &self.relations {
            for e in &rel.entries {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    rel.relation,
                    e.ngram.join(" "),
                    e.support,
                    e.mean_score
                )?;
            }
        }
        Ok(())
    }
}

/// Extracts patterns for a corpus (gold relation per sentence) and
/// aggregates them into a [`PatternTable`].
pub fn mine_patterns<T: Scalar, M: PrefixScorer<T> + ?Sized>(
    m: &M,
    sentences: &[LabeledSentence],
    tau: f64,
    ngram: usize,
    only_correct: bool,
    lookahead: bool,
) -> Result<PatternTable<T>, InterpretError> {
    let patterns = extract_patterns(m, sentences, tau, ngram, only_correct, lookahead)?;
    Ok(PatternTable::from_patterns(m.labels(), &patterns, tau, ngram))
}

impl<T: Scalar> PrefixScoreCurve<T> {
    /// CSV with header `k,token,prob_target,predicted_label,prob_predicted`.
    /// Probabilities use the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["k", "token", "prob_target", "predicted_label", "prob_predicted"])?;
        for p in &self.points {
            out.write_record([
                p.k.to_string(),
                p.last_token.clone(),
                p.prob_target.to_string(),
                p.predicted_label.clone(),
                p.prob_predicted.to_string(),
            ])?;
        }
        out.flush()
    }
}

/// Gold label and final combined hidden state of one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateRow<T> {
    pub label: String,
    pub vector: Vec<T>,
}

/// `h_bi` after the last word of each full sentence.
pub fn export_hidden_states<T: Scalar>(
    m: &TrainedModel<T>,
    sentences: &[LabeledSentence],
) -> Result<Vec<HiddenStateRow<T>>, InterpretError> {
    sentences
        .iter()
        .map(|s| {
            let cache = m.forward_tokens(&s.tokens)?;
            Ok(HiddenStateRow {
                label: s.label.clone(),
                vector: cache.final_hidden().to_vec(),
            })
        })
        .collect()
}

/// `label<TAB>v1<TAB>…<TAB>vD` with 9 significant digits.
pub fn write_hidden_tsv<T: Scalar, W: Write>(rows: &[HiddenStateRow<T>], mut w: W) -> io::Result<()> {
    for row in rows {
        write!(w, "{}", row.label)?;
        for v in &row.vector {
            write!(w, "\t{v:.8e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
