use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::embeddings::EmbeddingTable;
use crate::{Matrix, Scalar};

/// Hidden-layer nonlinearity. Only tanh is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        (name == "tanh").then_some(Activation::Tanh)
    }
}

/// All trainable weights. Input matrices are `(window·d) × D`, recurrent
/// matrices `D × D`, the output layer `D × C`.
#[derive(Debug, Clone, PartialEq)]
pub struct CbrnnParams<T> {
    pub window: usize,
    pub embeddings: EmbeddingTable<T>,
    pub u_f: Matrix<T>,
    pub u_b: Matrix<T>,
    pub w_f: Matrix<T>,
    pub w_b: Matrix<T>,
    pub w_bi: Matrix<T>,
    pub w_hy: Matrix<T>,
    pub b_y: Vec<T>,
    pub activation: Activation,
}

/// Names of the dense tensors, in the order used by `dense()` and the model file.
pub(crate) const DENSE_NAMES: [&str; 7] = ["u_f", "u_b", "w_f", "w_b", "w_bi", "w_hy", "b_y"];

impl<T: Scalar> CbrnnParams<T> {
    /// All-zero weights around the given embedding table.
    pub fn zeros(embeddings: EmbeddingTable<T>, window: usize, hidden: usize, classes: usize) -> Self {
        let input = window * embeddings.dim();
        CbrnnParams {
            window,
            embeddings,
            u_f: Matrix::zeros(input, hidden),
            u_b: Matrix::zeros(input, hidden),
            w_f: Matrix::zeros(hidden, hidden),
            w_b: Matrix::zeros(hidden, hidden),
            w_bi: Matrix::zeros(hidden, hidden),
            w_hy: Matrix::zeros(hidden, classes),
            b_y: vec![T::zero(); classes],
            activation: Activation::Tanh,
        }
    }

    /// Uniform `±1/√fan_in` weights, zero output bias.
    pub fn init_random(embeddings: EmbeddingTable<T>, window: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut p = Self::zeros(embeddings, window, hidden, classes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |m: &mut Matrix<T>| {
            let bound = 1.0 / (m.rows() as f64).sqrt();
            for v in m.as_mut_slice() {
                *v = T::from_f64_lossy(rng.gen_range(-bound..=bound));
            }
        };
        fill(&mut p.u_f);
        fill(&mut p.u_b);
        fill(&mut p.w_f);
        fill(&mut p.w_b);
        fill(&mut p.w_bi);
        fill(&mut p.w_hy);
        p
    }

    pub fn input_dim(&self) -> usize {
        self.window * self.embeddings.dim()
    }

    pub fn hidden(&self) -> usize {
        self.w_f.rows()
    }

    pub fn classes(&self) -> usize {
        self.b_y.len()
    }

    pub fn check_shapes(&self) -> Result<(), ModelError> {
        let (i, h, c) = (self.input_dim(), self.hidden(), self.classes());
        let expect = [
            ("u_f", self.u_f.shape(), (i, h)),
            ("u_b", self.u_b.shape(), (i, h)),
            ("w_f", self.w_f.shape(), (h, h)),
            ("w_b", self.w_b.shape(), (h, h)),
            ("w_bi", self.w_bi.shape(), (h, h)),
            ("w_hy", self.w_hy.shape(), (h, c)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(ModelError::ShapeMismatch(format!(
                    "{name} is {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.dense().iter().all(|t| t.iter().all(|v| v.is_finite())) && self.embeddings.matrix.is_finite()
    }

    pub(crate) fn dense(&self) -> [&[T]; 7] {
        [
            self.u_f.as_slice(),
            self.u_b.as_slice(),
            self.w_f.as_slice(),
            self.w_b.as_slice(),
            self.w_bi.as_slice(),
            self.w_hy.as_slice(),
            &self.b_y,
        ]
    }

    pub(crate) fn dense_mut(&mut self) -> [&mut [T]; 7] {
        [
            self.u_f.as_mut_slice(),
            self.u_b.as_mut_slice(),
            self.w_f.as_mut_slice(),
            self.w_b.as_mut_slice(),
            self.w_bi.as_mut_slice(),
            self.w_hy.as_mut_slice(),
            &mut self.b_y,
        ]
    }
}

/// Gradient of the loss with respect to every parameter. Embedding rows are
/// sparse: only rows that appeared in an input window are present, and the
/// PADDING row never is.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub u_f: Matrix<T>,
    pub u_b: Matrix<T>,
    pub w_f: Matrix<T>,
    pub w_b: Matrix<T>,
    pub w_bi: Matrix<T>,
    pub w_hy: Matrix<T>,
    pub b_y: Vec<T>,
    pub embeddings: BTreeMap<usize, Vec<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros_like(p: &CbrnnParams<T>) -> Self {
        let z = |m: &Matrix<T>| Matrix::zeros(m.rows(), m.cols());
        Gradients {
            u_f: z(&p.u_f),
            u_b: z(&p.u_b),
            w_f: z(&p.w_f),
            w_b: z(&p.w_b),
            w_bi: z(&p.w_bi),
            w_hy: z(&p.w_hy),
            b_y: vec![T::zero(); p.b_y.len()],
            embeddings: BTreeMap::new(),
        }
    }

    pub(crate) fn dense(&self) -> [&[T]; 7] {
        [
            self.u_f.as_slice(),
            self.u_b.as_slice(),
            self.w_f.as_slice(),
            self.w_b.as_slice(),
            self.w_bi.as_slice(),
            self.w_hy.as_slice(),
            &self.b_y,
        ]
    }

    /// Embedding gradient for row `id`, zero when the row was not touched.
    pub fn embedding_row(&self, id: usize, dim: usize) -> Vec<T> {
        self.embeddings
            .get(&id)
            .cloned()
            .unwrap_or_else(|| vec![T::zero(); dim])
    }

    /// Euclidean norm over every gradient entry.
    pub fn global_norm(&self) -> T {
        let dense: T = self.dense().iter().flat_map(|t| t.iter()).map(|&g| g * g).sum();
        let sparse: T = self.embeddings.values().flatten().map(|&g| g * g).sum();
        (dense + sparse).sqrt()
    }
}
