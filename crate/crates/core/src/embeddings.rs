//! Word vectors and N-gram window composition.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{Vocabulary, PAD_ID};
use crate::{Matrix, Scalar};

const INIT_RANGE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed embedding line {0}")]
    MalformedLine(usize),
    #[error("N-gram window must be odd, got {0}")]
    EvenWindow(usize),
    #[error("embedding dimension must be at least 1")]
    ZeroDimension,
    #[error("empty token sequence")]
    EmptySequence,
    #[error("token id {0} outside the embedding table")]
    IdOutOfRange(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `|V| × d` embedding matrix. Row `PAD_ID` is zero and never updated.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub matrix: Matrix<T>,
    pub trainable: bool,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row(&self, id: usize) -> &[T] {
        self.matrix.row(id)
    }
}

/// Uniform `[-0.1, 0.1]` vectors from a seeded ChaCha8 stream, row-major,
/// with the PADDING row zeroed afterwards.
pub fn init_random<T: Scalar>(v: &Vocabulary, d: usize, seed: u64) -> Result<EmbeddingTable<T>, EmbeddingError> {
    if d == 0 {
        return Err(EmbeddingError::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = Matrix::from_fn(v.len(), d, |_, _| {
        T::from_f64_lossy(rng.gen_range(-INIT_RANGE..=INIT_RANGE))
    });
    matrix.row_mut(PAD_ID).fill(T::zero());
    Ok(EmbeddingTable {
        matrix,
        trainable: true,
    })
}

/// Loads word2vec-style text vectors (`word v1 … vd`, optional `count dim`
/// header). Vocabulary tokens absent from the file keep the seeded random
/// vector that [`init_random`] gives them under `fallback_seed`.
pub fn load_pretrained_text<T: Scalar>(
    path: impl AsRef<Path>,
    v: &Vocabulary,
    d: usize,
    fallback_seed: u64,
) -> Result<EmbeddingTable<T>, EmbeddingError> {
    let text = fs::read_to_string(path)?;
    parse_pretrained_text(&text, v, d, fallback_seed)
}

pub fn parse_pretrained_text<T: Scalar>(
    text: &str,
    v: &Vocabulary,
    d: usize,
    fallback_seed: u64,
) -> Result<EmbeddingTable<T>, EmbeddingError> {
    let mut table = init_random::<T>(v, d, fallback_seed)?;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 {
            if let (Ok(_), Ok(dim)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                if dim != d {
                    return Err(EmbeddingError::DimensionMismatch {
                        expected: d,
                        found: dim,
                    });
                }
                continue;
            }
        }
        if fields.len() < 2 {
            return Err(EmbeddingError::MalformedLine(lineno));
        }
        if fields.len() - 1 != d {
            return Err(EmbeddingError::DimensionMismatch {
                expected: d,
                found: fields.len() - 1,
            });
        }
        let Some(id) = v.id(fields[0]) else { continue };
        if id == PAD_ID {
            continue;
        }
        let mut row = Vec::with_capacity(d);
        for f in &fields[1..] {
            let x: f64 = f.parse().map_err(|_| EmbeddingError::MalformedLine(lineno))?;
            if !x.is_finite() {
                return Err(EmbeddingError::MalformedLine(lineno));
            }
            row.push(T::from_f64_lossy(x));
        }
        table.matrix.row_mut(id).copy_from_slice(&row);
    }
    Ok(table)
}

/// Windows of `window` consecutive items centred on each position, with
/// `pad` substituted beyond either end. Output length equals `items.len()`.
pub fn ngram_windows<I: Clone>(items: &[I], window: usize, pad: I) -> Vec<Vec<I>> {
    let half = window / 2;
    let n = items.len();
    (0..n)
        .map(|k| {
            (0..window)
                .map(|j| {
                    (k + j)
                        .checked_sub(half)
                        .filter(|&idx| idx < n)
                        .map_or_else(|| pad.clone(), |idx| items[idx].clone())
                })
                .collect()
        })
        .collect()
}

/// Per-position inputs to the network: each vector is the concatenation of
/// `window` embedding rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramInputSequence<T> {
    pub vectors: Vec<Vec<T>>,
    /// Token ids behind each vector, `PAD_ID` outside the sentence.
    pub window_ids: Vec<Vec<usize>>,
    pub window: usize,
}

impl<T: Scalar> NgramInputSequence<T> {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Builds the sequence from precomputed id windows.
    pub fn from_windows(window_ids: Vec<Vec<usize>>, table: &EmbeddingTable<T>) -> Result<Self, EmbeddingError> {
        let window = window_ids.first().map_or(0, Vec::len);
        let mut vectors = Vec::with_capacity(window_ids.len());
        for ids in &window_ids {
            let mut v = Vec::with_capacity(ids.len() * table.dim());
            for &id in ids {
                if id >= table.vocab_size() {
                    return Err(EmbeddingError::IdOutOfRange(id));
                }
                v.extend_from_slice(table.row(id));
            }
            vectors.push(v);
        }
        Ok(NgramInputSequence {
            vectors,
            window_ids,
            window,
        })
    }
}

pub fn check_window(window: usize) -> Result<(), EmbeddingError> {
    if window.is_multiple_of(2) {
        return Err(EmbeddingError::EvenWindow(window));
    }
    Ok(())
}

/// Composes the N-gram input sequence of a token-id sequence.
pub fn compose_ngram_inputs<T: Scalar>(
    ids: &[usize],
    table: &EmbeddingTable<T>,
    window: usize,
) -> Result<NgramInputSequence<T>, EmbeddingError> {
    check_window(window)?;
    if ids.is_empty() {
        return Err(EmbeddingError::EmptySequence);
    }
    NgramInputSequence::from_windows(ngram_windows(ids, window, PAD_ID), table)
}

/// Inputs for the length-`k` prefix of `ids`. With `lookahead`, the windows
/// are the first `k` windows of the full sequence (so the last one can see
/// `ids[k]`); without it, they are recomputed on the truncated prefix and end
/// in PADDING.
pub fn compose_prefix_inputs<T: Scalar>(
    ids: &[usize],
    k: usize,
    table: &EmbeddingTable<T>,
    window: usize,
    lookahead: bool,
) -> Result<NgramInputSequence<T>, EmbeddingError> {
    check_window(window)?;
    if k == 0 || ids.is_empty() {
        return Err(EmbeddingError::EmptySequence);
    }
    let k = k.min(ids.len());
    let windows = if lookahead {
        let mut w = ngram_windows(ids, window, PAD_ID);
        w.truncate(k);
        w
    } else {
        ngram_windows(&ids[..k], window, PAD_ID)
    };
    NgramInputSequence::from_windows(windows, table)
}
