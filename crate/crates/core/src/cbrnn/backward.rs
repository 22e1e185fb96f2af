use super::forward::{combined_step, directional_step, output_scores};
use super::loss::score_gradient;
use super::{CbrnnParams, ForwardCache, Gradients, LossConfig, ModelError};
use crate::corpus::PAD_ID;
use crate::embeddings::NgramInputSequence;
use crate::{Matrix, Scalar};

/// Recomputes the inputs and the last step of every chain from `p` and
/// requires bit-equality with the cache.
fn verify_cache<T: Scalar>(p: &CbrnnParams<T>, cache: &ForwardCache<T>) -> Result<(), ModelError> {
    let n = cache.len();
    let hidden = p.hidden();
    let rows_ok = |h: &Vec<Vec<T>>| h.len() == n + 1 && h.iter().all(|r| r.len() == hidden);
    if n == 0
        || !rows_ok(&cache.h_f)
        || !rows_ok(&cache.h_b)
        || !rows_ok(&cache.h_bi)
        || cache.scores.len() != p.classes()
        || cache.inputs.window != p.window
    {
        return Err(ModelError::StaleCache);
    }
    let recomposed = NgramInputSequence::from_windows(cache.inputs.window_ids.clone(), &p.embeddings)
        .map_err(|_| ModelError::StaleCache)?;
    if recomposed.vectors != cache.inputs.vectors {
        return Err(ModelError::StaleCache);
    }
    let x = &cache.inputs.vectors;
    let consistent = directional_step(&p.u_f, &p.w_f, &x[n - 1], &cache.h_f[n - 1]) == cache.h_f[n]
        && directional_step(&p.u_b, &p.w_b, &x[0], &cache.h_b[n - 1]) == cache.h_b[n]
        && combined_step(&p.w_bi, &cache.h_f[n], &cache.h_b[n], &cache.h_bi[n - 1]) == cache.h_bi[n]
        && output_scores(p, &cache.h_bi[n]) == cache.scores;
    if consistent {
        Ok(())
    } else {
        Err(ModelError::StaleCache)
    }
}

/// Backpropagates one directional chain. `grad_h[t]` is the loss gradient
/// arriving at state `t` from the combined chain; `input_index(t)` maps step
/// `t` to its input vector.
#[allow(clippy::too_many_arguments)]
fn backprop_chain<T: Scalar>(
    u: &Matrix<T>,
    w: &Matrix<T>,
    states: &[Vec<T>],
    grad_h: &[Vec<T>],
    inputs: &[Vec<T>],
    input_index: impl Fn(usize) -> usize,
    d_u: &mut Matrix<T>,
    d_w: &mut Matrix<T>,
    d_inputs: &mut [Vec<T>],
) {
    let n = states.len() - 1;
    let mut carry = vec![T::zero(); w.rows()];
    for t in (1..=n).rev() {
        let delta: Vec<T> = states[t]
            .iter()
            .zip(&grad_h[t])
            .zip(&carry)
            .map(|((&h, &g), &c)| (g + c) * (T::one() - h * h))
            .collect();
        let xi = input_index(t);
        d_u.accumulate_outer(&inputs[xi], &delta);
        d_w.accumulate_outer(&states[t - 1], &delta);
        u.accumulate_mul_transposed(&delta, &mut d_inputs[xi]);
        carry.iter_mut().for_each(|c| *c = T::zero());
        w.accumulate_mul_transposed(&delta, &mut carry);
    }
}

/// Exact gradients of the ranking loss by backpropagation through time.
///
/// The score gradient flows into `h_bi[n]`, back along the combined chain,
/// then into both directional chains at every step, and finally into the
/// embedding rows named by the input windows (when trainable).
pub fn loss_gradients<T: Scalar>(
    p: &CbrnnParams<T>,
    cache: &ForwardCache<T>,
    y_plus: usize,
    cfg: &LossConfig,
) -> Result<Gradients<T>, ModelError> {
    verify_cache(p, cache)?;
    let d_scores = score_gradient(&cache.scores, y_plus, cfg)?;
    let n = cache.len();
    let hidden = p.hidden();
    let mut g = Gradients::zeros_like(p);

    g.b_y.copy_from_slice(&d_scores);
    g.w_hy.accumulate_outer(&cache.h_bi[n], &d_scores);
    let mut d_hbi = vec![T::zero(); hidden];
    p.w_hy.accumulate_mul_transposed(&d_scores, &mut d_hbi);

    // combined chain; its pre-activation gradient feeds h_f[t] and h_b[t]
    let mut to_states = vec![vec![T::zero(); hidden]; n + 1];
    for t in (1..=n).rev() {
        let delta: Vec<T> = cache.h_bi[t]
            .iter()
            .zip(&d_hbi)
            .map(|(&h, &gr)| gr * (T::one() - h * h))
            .collect();
        g.w_bi.accumulate_outer(&cache.h_bi[t - 1], &delta);
        d_hbi.iter_mut().for_each(|v| *v = T::zero());
        p.w_bi.accumulate_mul_transposed(&delta, &mut d_hbi);
        to_states[t] = delta;
    }

    let x = &cache.inputs.vectors;
    let mut d_inputs = vec![vec![T::zero(); p.input_dim()]; n];
    backprop_chain(
        &p.u_f,
        &p.w_f,
        &cache.h_f,
        &to_states,
        x,
        |t| t - 1,
        &mut g.u_f,
        &mut g.w_f,
        &mut d_inputs,
    );
    backprop_chain(
        &p.u_b,
        &p.w_b,
        &cache.h_b,
        &to_states,
        x,
        |t| n - t,
        &mut g.u_b,
        &mut g.w_b,
        &mut d_inputs,
    );

    if p.embeddings.trainable {
        let d = p.embeddings.dim();
        for (ids, dx) in cache.inputs.window_ids.iter().zip(&d_inputs) {
            for (slot, &id) in ids.iter().enumerate() {
                if id == PAD_ID {
                    continue;
                }
                let row = g.embeddings.entry(id).or_insert_with(|| vec![T::zero(); d]);
                for (r, &v) in row.iter_mut().zip(&dx[slot * d..(slot + 1) * d]) {
                    *r += v;
                }
            }
        }
    }
    Ok(g)
}
