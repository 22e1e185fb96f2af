use super::ModelError;
use crate::Scalar;

/// Ranking-loss hyperparameters: scale `gamma`, positive margin `m_plus`,
/// negative margin `m_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub gamma: f64,
    pub m_plus: f64,
    pub m_minus: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            gamma: 2.0,
            m_plus: 2.5,
            m_minus: 0.5,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::ConfigInvalid("gamma must be positive".into()));
        }
        if self.m_plus.partial_cmp(&self.m_minus) != Some(std::cmp::Ordering::Greater)
            || !self.m_plus.is_finite()
            || !self.m_minus.is_finite()
        {
            return Err(ModelError::ConfigInvalid("m_plus must exceed m_minus".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankingLoss<T> {
    pub loss: T,
    /// Highest-scoring class other than the gold one (ties → lowest index).
    pub c_minus: usize,
}

/// `log(1 + exp(z))` without overflow.
fn softplus<T: Scalar>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

fn best_competitor<T: Scalar>(scores: &[T], y_plus: usize) -> usize {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if i != y_plus && best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best.expect("at least two classes")
}

fn check_label<T>(scores: &[T], y_plus: usize) -> Result<(), ModelError> {
    if scores.len() < 2 {
        return Err(ModelError::SingleClass);
    }
    if y_plus >= scores.len() {
        return Err(ModelError::InvalidLabel {
            index: y_plus,
            classes: scores.len(),
        });
    }
    Ok(())
}

/// `log(1+exp(γ(m⁺ − s_y))) + log(1+exp(γ(m⁻ + s_c)))` where `c` is the best
/// competing class.
pub fn ranking_loss<T: Scalar>(scores: &[T], y_plus: usize, cfg: &LossConfig) -> Result<RankingLoss<T>, ModelError> {
    check_label(scores, y_plus)?;
    let c_minus = best_competitor(scores, y_plus);
    let (g, mp, mm) = constants::<T>(cfg);
    let loss = softplus(g * (mp - scores[y_plus])) + softplus(g * (mm + scores[c_minus]));
    Ok(RankingLoss { loss, c_minus })
}

/// ∂loss/∂scores: `−γσ(γ(m⁺−s_y))` at the gold class, `+γσ(γ(m⁻+s_c))` at
/// the competitor, zero elsewhere.
pub(crate) fn score_gradient<T: Scalar>(scores: &[T], y_plus: usize, cfg: &LossConfig) -> Result<Vec<T>, ModelError> {
    check_label(scores, y_plus)?;
    let c_minus = best_competitor(scores, y_plus);
    let (g, mp, mm) = constants::<T>(cfg);
    let mut grad = vec![T::zero(); scores.len()];
    grad[y_plus] = -g * sigmoid(g * (mp - scores[y_plus]));
    grad[c_minus] = g * sigmoid(g * (mm + scores[c_minus]));
    Ok(grad)
}

fn constants<T: Scalar>(cfg: &LossConfig) -> (T, T, T) {
    (
        T::from_f64_lossy(cfg.gamma),
        T::from_f64_lossy(cfg.m_plus),
        T::from_f64_lossy(cfg.m_minus),
    )
}
