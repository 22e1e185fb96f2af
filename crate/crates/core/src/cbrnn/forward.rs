use super::{CbrnnParams, ModelError};
use crate::embeddings::NgramInputSequence;
use crate::{Matrix, Scalar};

/// Activations of one forward run. Each state list has `n + 1` rows; row 0
/// is the zero initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache<T> {
    pub inputs: NgramInputSequence<T>,
    pub h_f: Vec<Vec<T>>,
    pub h_b: Vec<Vec<T>>,
    pub h_bi: Vec<Vec<T>>,
    pub scores: Vec<T>,
    pub probs: Vec<T>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Combined state after the last step.
    pub fn final_hidden(&self) -> &[T] {
        &self.h_bi[self.h_bi.len() - 1]
    }
}

/// `tanh(x · U + h_prev · W)`
pub(crate) fn directional_step<T: Scalar>(u: &Matrix<T>, w: &Matrix<T>, x: &[T], h_prev: &[T]) -> Vec<T> {
    let mut a = u.vec_mul(x);
    w.accumulate_vec_mul(h_prev, &mut a);
    a.iter_mut().for_each(|v| *v = v.tanh());
    a
}

/// `tanh(h_f + h_b + h_prev · W_bi)`
pub(crate) fn combined_step<T: Scalar>(w_bi: &Matrix<T>, h_f: &[T], h_b: &[T], h_prev: &[T]) -> Vec<T> {
    let mut a: Vec<T> = h_f.iter().zip(h_b).map(|(&f, &b)| f + b).collect();
    w_bi.accumulate_vec_mul(h_prev, &mut a);
    a.iter_mut().for_each(|v| *v = v.tanh());
    a
}

/// `h · W_hy + b_y`
pub(crate) fn output_scores<T: Scalar>(p: &CbrnnParams<T>, h: &[T]) -> Vec<T> {
    let mut s = p.w_hy.vec_mul(h);
    for (v, &b) in s.iter_mut().zip(&p.b_y) {
        *v += b;
    }
    s
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(scores: &[T]) -> Vec<T> {
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = scores.iter().map(|&s| (s - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn forward_pass<T: Scalar>(p: &CbrnnParams<T>, x: &NgramInputSequence<T>) -> Result<ForwardCache<T>, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptySequence);
    }
    p.check_shapes()?;
    let input_dim = p.input_dim();
    if let Some(bad) = x.vectors.iter().find(|v| v.len() != input_dim) {
        return Err(ModelError::ShapeMismatch(format!(
            "input vector has length {}, expected {input_dim}",
            bad.len()
        )));
    }
    let n = x.len();
    let hidden = p.hidden();
    let zero = vec![T::zero(); hidden];

    let mut h_f = Vec::with_capacity(n + 1);
    h_f.push(zero.clone());
    for t in 1..=n {
        let h = directional_step(&p.u_f, &p.w_f, &x.vectors[t - 1], &h_f[t - 1]);
        h_f.push(h);
    }
    let mut h_b = Vec::with_capacity(n + 1);
    h_b.push(zero.clone());
    for t in 1..=n {
        let h = directional_step(&p.u_b, &p.w_b, &x.vectors[n - t], &h_b[t - 1]);
        h_b.push(h);
    }
    let mut h_bi = Vec::with_capacity(n + 1);
    h_bi.push(zero);
    for t in 1..=n {
        let h = combined_step(&p.w_bi, &h_f[t], &h_b[t], &h_bi[t - 1]);
        h_bi.push(h);
    }
    let scores = output_scores(p, &h_bi[n]);
    let probs = softmax(&scores);
    Ok(ForwardCache {
        inputs: x.clone(),
        h_f,
        h_b,
        h_bi,
        scores,
        probs,
    })
}
