use super::{CbrnnParams, Gradients, ModelError};
use crate::corpus::PAD_ID;
use crate::Scalar;

/// Plain SGD with global-norm clipping: if `‖g‖ > clip_norm` the whole
/// gradient is rescaled to norm `clip_norm`, then `θ ← θ − lr·g`. Frozen
/// embeddings and the PADDING row are left alone.
pub fn sgd_step<T: Scalar>(
    p: &mut CbrnnParams<T>,
    grads: &Gradients<T>,
    learning_rate: f64,
    clip_norm: f64,
) -> Result<(), ModelError> {
    if learning_rate.is_nan() || learning_rate < 0.0 {
        return Err(ModelError::ConfigInvalid("learning rate must be non-negative".into()));
    }
    if clip_norm.is_nan() || clip_norm <= 0.0 {
        return Err(ModelError::ConfigInvalid("clip norm must be positive".into()));
    }
    let norm = grads.global_norm().to_f64_lossy();
    let scale = if norm > clip_norm { clip_norm / norm } else { 1.0 };
    let step = T::from_f64_lossy(learning_rate * scale);
    if step == T::zero() {
        return Ok(());
    }
    for (param, grad) in p.dense_mut().into_iter().zip(grads.dense()) {
        for (w, &g) in param.iter_mut().zip(grad) {
            *w -= step * g;
        }
    }
    if p.embeddings.trainable {
        for (&id, grad) in &grads.embeddings {
            if id == PAD_ID {
                continue;
            }
            for (w, &g) in p.embeddings.matrix.row_mut(id).iter_mut().zip(grad) {
                *w -= step * g;
            }
        }
    }
    Ok(())
}
