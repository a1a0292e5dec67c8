//! Mean–variance messages and the Onsager-corrected extrinsic update.
//!
//! Every module of the receiver consumes and produces a [`GaussianMessage`]:
//! a pseudo-observation `r = x + sqrt(v) n` with an isotropic variance `v`.
//! A module's estimate is summarised as a [`PosteriorSummary`] whose Onsager
//! coefficient `alpha = v_post / v_in` drives [`extrinsic`].

use crate::error::{Error, Result};

/// Default clipping margin for Onsager coefficients.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Smallest variance a forwarded posterior may carry.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Isotropic Gaussian pseudo-observation `(mean, variance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMessage {
    mean: Vec<f64>,
    variance: f64,
}

impl GaussianMessage {
    pub fn new(mean: Vec<f64>, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::InvalidVariance(variance));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("message mean"));
        }
        Ok(Self { mean, variance })
    }

    /// Message with zero mean and the given variance.
    pub fn uninformative(len: usize, variance: f64) -> Result<Self> {
        Self::new(vec![0.0; len], variance)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, f64) {
        (self.mean, self.variance)
    }
}

/// Posterior estimate of a module together with its Onsager coefficient.
///
/// `alpha` is the clipped coefficient used by [`extrinsic`]; `raw_alpha` is
/// the unclipped ratio `variance / input_variance` kept for traces.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    pub variance: f64,
    pub alpha: f64,
    pub raw_alpha: f64,
}

impl PosteriorSummary {
    /// Builds a summary from the averaged posterior variance using the
    /// variance-ratio form of the Onsager coefficient.
    pub fn from_variance_ratio(
        mean: Vec<f64>,
        variance: f64,
        input_variance: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(input_variance.is_finite() && input_variance > 0.0) {
            return Err(Error::InvalidVariance(input_variance));
        }
        Self::with_alpha(mean, variance, variance / input_variance, epsilon)
    }

    /// Builds a summary from an explicitly computed raw coefficient.
    pub fn with_alpha(mean: Vec<f64>, variance: f64, raw_alpha: f64, epsilon: f64) -> Result<Self> {
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidVariance(variance));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("posterior mean"));
        }
        let alpha = clip_alpha(raw_alpha, epsilon)?;
        Ok(Self {
            mean,
            variance,
            alpha,
            raw_alpha,
        })
    }

    /// The posterior forwarded as a message, as done by the ablation without
    /// extrinsic subtraction. `floor` keeps the variance strictly positive.
    pub fn as_message(&self, floor: f64) -> Result<GaussianMessage> {
        GaussianMessage::new(self.mean.clone(), self.variance.max(floor))
    }
}

/// Clamps an Onsager coefficient into `[epsilon, 1 - epsilon]`.
pub fn clip_alpha(alpha: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "clipping epsilon {epsilon} must lie in (0, 0.5)"
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("Onsager coefficient"));
    }
    Ok(alpha.clamp(epsilon, 1.0 - epsilon))
}

/// Coefficient expressed through the scalar Fisher information `J` of the
/// conditional score: `alpha = 1 - (v_in / N) J`. Equivalent to the
/// variance ratio; the receiver itself always uses the variance ratio.
pub fn alpha_from_fisher(input_variance: f64, dim: usize, fisher_information: f64) -> f64 {
    1.0 - input_variance / dim as f64 * fisher_information
}

/// Onsager-corrected extrinsic message:
/// `mean = (x_post - alpha r_in) / (1 - alpha)`, `variance = alpha / (1 - alpha) v_in`.
pub fn extrinsic(input: &GaussianMessage, posterior: &PosteriorSummary) -> Result<GaussianMessage> {
    let alpha = posterior.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if input.len() != posterior.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: input.len(),
            found: posterior.mean.len(),
        });
    }
    let gain = 1.0 / (1.0 - alpha);
    let mean = posterior
        .mean
        .iter()
        .zip(input.mean())
        .map(|(&x, &r)| (x - alpha * r) * gain)
        .collect();
    GaussianMessage::new(mean, alpha * gain * input.variance())
}

/// Precision-weighted product of two Gaussian messages.
pub fn combine(a: &GaussianMessage, b: &GaussianMessage) -> Result<GaussianMessage> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (pa, pb) = (1.0 / a.variance(), 1.0 / b.variance());
    let variance = 1.0 / (pa + pb);
    let mean = a
        .mean()
        .iter()
        .zip(b.mean())
        .map(|(&ma, &mb)| variance * (ma * pa + mb * pb))
        .collect();
    GaussianMessage::new(mean, variance)
}
