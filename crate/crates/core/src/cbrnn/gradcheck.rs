use super::{forward_pass, loss_gradients, ranking_loss, CbrnnParams, Gradients, LossConfig, ModelError};
use crate::corpus::PAD_ID;
use crate::embeddings::compose_ngram_inputs;
use crate::Scalar;

/// `|a − n| / max(1e-8, |a| + |n|)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

fn loss_at<T: Scalar>(p: &CbrnnParams<T>, ids: &[usize], y_plus: usize, cfg: &LossConfig) -> Result<f64, ModelError> {
    let x = compose_ngram_inputs(ids, &p.embeddings, p.window)?;
    let cache = forward_pass(p, &x)?;
    Ok(ranking_loss(&cache.scores, y_plus, cfg)?.loss.to_f64_lossy())
}

fn central_difference<T: Scalar>(
    work: &mut CbrnnParams<T>,
    get: &dyn Fn(&mut CbrnnParams<T>) -> &mut T,
    ids: &[usize],
    y_plus: usize,
    cfg: &LossConfig,
    eps: f64,
) -> Result<f64, ModelError> {
    let h = T::from_f64_lossy(eps);
    let orig = *get(work);
    *get(work) = orig + h;
    let plus = loss_at(work, ids, y_plus, cfg)?;
    *get(work) = orig - h;
    let minus = loss_at(work, ids, y_plus, cfg)?;
    *get(work) = orig;
    Ok((plus - minus) / (2.0 * eps))
}

/// Largest relative error between `analytic` and central finite differences
/// over every parameter coordinate (every non-PADDING embedding row too, when
/// embeddings are trainable).
pub fn compare_with_finite_differences<T: Scalar>(
    p: &CbrnnParams<T>,
    ids: &[usize],
    y_plus: usize,
    cfg: &LossConfig,
    eps: f64,
    analytic: &Gradients<T>,
) -> Result<f64, ModelError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ModelError::ConfigInvalid(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let mut work = p.clone();
    let mut worst = 0.0f64;
    let central = |work: &mut CbrnnParams<T>, get: &dyn Fn(&mut CbrnnParams<T>) -> &mut T| {
        central_difference(work, get, ids, y_plus, cfg, eps)
    };

    for (k, grad) in analytic.dense().iter().enumerate() {
        for i in 0..grad.len() {
            let numeric = central(&mut work, &|q| {
                &mut q.dense_mut().into_iter().nth(k).expect("dense tensor")[i]
            })?;
            worst = worst.max(relative_error(grad[i].to_f64_lossy(), numeric));
        }
    }
    if p.embeddings.trainable {
        let d = p.embeddings.dim();
        for id in (0..p.embeddings.vocab_size()).filter(|&id| id != PAD_ID) {
            let row = analytic.embedding_row(id, d);
            for (j, &a) in row.iter().enumerate() {
                let numeric = central(&mut work, &|q| &mut q.embeddings.matrix.row_mut(id)[j])?;
                worst = worst.max(relative_error(a.to_f64_lossy(), numeric));
            }
        }
    }
    Ok(worst)
}

/// Checks [`loss_gradients`] on one example against central differences
/// with step `eps`; returns the maximum relative error.
pub fn gradient_check<T: Scalar>(
    p: &CbrnnParams<T>,
    ids: &[usize],
    y_plus: usize,
    cfg: &LossConfig,
    eps: f64,
) -> Result<f64, ModelError> {
    let x = compose_ngram_inputs(ids, &p.embeddings, p.window)?;
    let cache = forward_pass(p, &x)?;
    let analytic = loss_gradients(p, &cache, y_plus, cfg)?;
    compare_with_finite_differences(p, ids, y_plus, cfg, eps, &analytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, parse_marked_sentence};
    use crate::embeddings::init_random;

    fn small_model(seed: u64) -> CbrnnParams<f64> {
        let s = parse_marked_sentence("r\t<e1> a </e1> b <e2> c </e2>").unwrap();
        let v = build_vocabulary(&[s], 1).unwrap();
        let mut emb = init_random::<f64>(&v, 2, seed).unwrap();
        // larger embeddings than the default init so every path carries signal
        emb.matrix.as_mut_slice().iter_mut().for_each(|x| *x *= 8.0);
        let mut p = CbrnnParams::init_random(emb, 3, 3, 3, seed + 1);
        p.b_y = vec![0.2, -0.3, 0.1];
        p
    }

    #[test]
    fn seeded_small_model_passes() {
        // D=3, d=2, N=3, n=4, C=3, seed 42
        let p = small_model(42);
        let err = gradient_check(&p, &[2, 6, 3, 7], 1, &LossConfig::default(), 1e-5).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn zeroed_analytic_gradients_fail() {
        let p = small_model(42);
        let zeros = Gradients::zeros_like(&p);
        let err = compare_with_finite_differences(&p, &[2, 6, 3, 7], 1, &LossConfig::default(), 1e-5, &zeros).unwrap();
        assert!((err - 1.0).abs() < 1e-9, "{err}");
    }

    #[test]
    fn zero_step_is_rejected() {
        let p = small_model(1);
        assert!(gradient_check(&p, &[2, 6, 3, 7], 0, &LossConfig::default(), 0.0).is_err());
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert!((relative_error(1.0, 0.0) - 1.0).abs() < 1e-15);
    }
}
