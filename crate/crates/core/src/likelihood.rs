//! Likelihood module: posterior moments of the latent `w` under the cavity
//! message `N(w; r, v)` and the observation `y = f(w) + z`, `z ~ N(0, sigma^2)`.
//!
//! For a component-wise `f` the moments factorise over components. Each scalar
//! integral is evaluated by Gauss–Hermite quadrature, first centred on the
//! cavity `w = r + sqrt(2 v) t` and then re-centred on the resulting posterior,
//! with the sums accumulated in the log domain. The identity map uses the
//! conjugate-Gaussian closed form.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::messages::{extrinsic, GaussianMessage, PosteriorSummary};
use crate::quadrature::{gh_rule, QuadratureRule, MAX_ORDER};

pub const DEFAULT_QUADRATURE_ORDER: usize = 50;

/// Component-wise channel nonlinearity.
#[derive(Clone, Copy)]
pub enum Nonlinearity {
    Identity,
    Tanh,
    /// Any other scalar map applied component-wise.
    Custom { name: &'static str, f: fn(f64) -> f64 },
}

impl Nonlinearity {
    #[inline]
    pub fn apply(&self, w: f64) -> f64 {
        match self {
            Nonlinearity::Identity => w,
            Nonlinearity::Tanh => w.tanh(),
            Nonlinearity::Custom { f, .. } => f(w),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Nonlinearity::Identity => "id",
            Nonlinearity::Tanh => "tanh",
            Nonlinearity::Custom { name, .. } => name,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Nonlinearity::Identity)
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for Nonlinearity {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl std::str::FromStr for Nonlinearity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(Nonlinearity::Identity),
            "tanh" => Ok(Nonlinearity::Tanh),
            other => Err(Error::InvalidArgument(format!("unknown nonlinearity '{other}'"))),
        }
    }
}

/// Observation model `p(y | w) = N(y; f(w), sigma^2)` plus the quadrature
/// rule used to evaluate its moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    nonlinearity: Nonlinearity,
    noise_variance: f64,
    rule: Arc<QuadratureRule>,
}

impl ChannelSpec {
    pub fn new(nonlinearity: Nonlinearity, noise_variance: f64, quadrature_order: usize) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidVariance(noise_variance));
        }
        Ok(Self {
            nonlinearity,
            noise_variance,
            rule: Arc::new(gh_rule(quadrature_order)?),
        })
    }

    /// Channel at `snr_db` with `SNR = 1 / sigma^2`.
    pub fn from_snr_db(nonlinearity: Nonlinearity, snr_db: f64, quadrature_order: usize) -> Result<Self> {
        Self::new(nonlinearity, 10f64.powf(-snr_db / 10.0), quadrature_order)
    }

    /// Same nonlinearity and rule, different noise level.
    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::InvalidVariance(noise_variance));
        }
        Ok(Self {
            noise_variance,
            ..self.clone()
        })
    }

    /// Same noise level and rule, different nonlinearity.
    pub fn with_nonlinearity(&self, nonlinearity: Nonlinearity) -> Self {
        Self {
            nonlinearity,
            ..self.clone()
        }
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn snr(&self) -> f64 {
        1.0 / self.noise_variance
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }
}

/// First and second posterior moments of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMoments {
    pub m1: f64,
    pub m2: f64,
    /// Set when the quadrature normaliser vanished and the cavity moments
    /// `(r, r^2 + v)` were returned instead.
    pub fallback: bool,
}

impl ScalarMoments {
    pub fn variance(&self) -> f64 {
        (self.m2 - self.m1 * self.m1).max(0.0)
    }
}

/// Posterior moments of `w` given the cavity `N(w; r, v)` and observation `y`.
pub fn scalar_moments(r: f64, v: f64, y: f64, spec: &ChannelSpec) -> ScalarMoments {
    let s2 = spec.noise_variance;
    if spec.nonlinearity.is_identity() {
        let m1 = (r * s2 + y * v) / (v + s2);
        let var = v * s2 / (v + s2);
        return ScalarMoments {
            m1,
            m2: var + m1 * m1,
            fallback: false,
        };
    }
    match tilted(r, v, y, spec) {
        Some(t) => ScalarMoments {
            m1: t.mean,
            m2: t.var + t.mean * t.mean,
            fallback: false,
        },
        None => ScalarMoments {
            m1: r,
            m2: r * r + v,
            fallback: true,
        },
    }
}

/// `log ∫ N(w; r, v) N(y; f(w), sigma^2) dw`, the log normaliser of the
/// tilted density (closed form for identity). `None` when it underflows.
pub fn log_normalizer(r: f64, v: f64, y: f64, spec: &ChannelSpec) -> Option<f64> {
    let s2 = spec.noise_variance;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    if spec.nonlinearity.is_identity() {
        let t = v + s2;
        return Some(-0.5 * (ln_2pi + t.ln()) - (y - r) * (y - r) / (2.0 * t));
    }
    tilted(r, v, y, spec).map(|t| t.log_z - 0.5 * (ln_2pi + s2.ln()))
}

struct Tilted {
    /// `log ∫ N(w; r, v) exp(-(y - f(w))^2 / (2 sigma^2)) dw`
    log_z: f64,
    mean: f64,
    var: f64,
}

/// Quadrature for the tilted density `N(w; r, v) L(w)`.
///
/// A first pass uses the rule centred on the cavity, `w = r + sqrt(2v) t`.
/// A second pass re-centres the rule on the first-pass posterior mean and
/// scales it by the first-pass posterior spread (capped at the cavity
/// spread), so the nodes concentrate where the likelihood is sharp.
fn tilted(r: f64, v: f64, y: f64, spec: &ChannelSpec) -> Option<Tilted> {
    let rule = spec.rule();
    let inv_two_s2 = 0.5 / spec.noise_variance;
    let f = spec.nonlinearity;
    let log_lik = |w: f64| {
        let d = y - f.apply(w);
        -d * d * inv_two_s2
    };
    let pi_ln = std::f64::consts::PI.ln();

    let cavity_scale = (2.0 * v).sqrt();
    let first = weighted_moments(rule, |t| {
        let w = r + cavity_scale * t;
        (w, log_lik(w))
    })?;
    // ∫ N(w; r, v) L(w) dw = pi^(-1/2) sum_j omega_j L(w_j)
    let first = Tilted {
        log_z: first.log_z - 0.5 * pi_ln,
        ..first
    };

    let spread = first.var.min(v).sqrt();
    if !(spread > 0.0) || !spread.is_finite() {
        return Some(first);
    }
    // ∫ g(w) dw = sqrt(2) s ∫ g(mu + sqrt(2) s t) e^{t^2} e^{-t^2} dt
    let centre = first.mean;
    let scale = std::f64::consts::SQRT_2 * spread;
    let log_cavity_norm = -0.5 * ((2.0 * std::f64::consts::PI).ln() + v.ln());
    let second = weighted_moments(rule, |t| {
        let w = centre + scale * t;
        let dr = w - r;
        (w, t * t - dr * dr / (2.0 * v) + log_lik(w))
    })?;
    Some(Tilted {
        log_z: second.log_z + scale.ln() + log_cavity_norm,
        ..second
    })
}

/// Log-domain accumulation of `sum_j omega_j exp(g_j)` and the weighted
/// mean and variance of the node positions.
fn weighted_moments<F>(rule: &QuadratureRule, node: F) -> Option<Tilted>
where
    F: Fn(f64) -> (f64, f64),
{
    let order = rule.order();
    let mut pos = [0.0f64; MAX_ORDER];
    let mut logp = [0.0f64; MAX_ORDER];
    let mut max_log = f64::NEG_INFINITY;
    for (j, (&t, &lw)) in rule.nodes().iter().zip(rule.log_weights()).enumerate() {
        let (w, g) = node(t);
        pos[j] = w;
        logp[j] = lw + g;
        if logp[j] > max_log {
            max_log = logp[j];
        }
    }
    if !max_log.is_finite() {
        return None;
    }
    let (mut z, mut s1) = (0.0, 0.0);
    for j in 0..order {
        let p = (logp[j] - max_log).exp();
        logp[j] = p;
        z += p;
        s1 += p * pos[j];
    }
    if !(z.is_finite() && z > 0.0) {
        return None;
    }
    let mean = s1 / z;
    let var = (0..order)
        .map(|j| logp[j] * (pos[j] - mean) * (pos[j] - mean))
        .sum::<f64>()
        / z;
    if !(mean.is_finite() && var.is_finite()) {
        return None;
    }
    Some(Tilted {
        log_z: max_log + z.ln(),
        mean,
        var: var.max(0.0),
    })
}

/// Output of [`likelihood_step`].
#[derive(Debug, Clone)]
pub struct LikelihoodOutput {
    pub extrinsic: GaussianMessage,
    pub posterior: PosteriorSummary,
    /// Number of components that fell back to the cavity moments.
    pub fallbacks: usize,
}

/// Posterior of `w` and the extrinsic message returned to the coupling module.
///
/// For the identity map the extrinsic message is exactly `(y, sigma^2)`,
/// independent of the input.
pub fn likelihood_step(
    rw: &GaussianMessage,
    y: &[f64],
    spec: &ChannelSpec,
    epsilon: f64,
) -> Result<LikelihoodOutput> {
    if rw.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: rw.len(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("observation"));
    }
    let v = rw.variance();
    let mut mean = Vec::with_capacity(y.len());
    let mut var_sum = 0.0;
    let mut fallbacks = 0;
    for (&r, &yi) in rw.mean().iter().zip(y) {
        let m = scalar_moments(r, v, yi, spec);
        fallbacks += usize::from(m.fallback);
        var_sum += m.variance();
        mean.push(m.m1);
    }
    let post_var = if y.is_empty() { 0.0 } else { var_sum / y.len() as f64 };
    let posterior = PosteriorSummary::from_variance_ratio(mean, post_var, v, epsilon)?;
    let extrinsic = if spec.nonlinearity.is_identity() {
        GaussianMessage::new(y.to_vec(), spec.noise_variance)?
    } else {
        extrinsic(rw, &posterior)?
    };
    Ok(LikelihoodOutput {
        extrinsic,
        posterior,
        fallbacks,
    })
}
