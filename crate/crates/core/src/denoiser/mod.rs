//! LDPC prior module: sum-product decoding used as a soft-in soft-out
//! denoiser for BPSK symbols (bit 0 ↔ +1).

mod alist;
mod bp;
pub mod builtin;
mod code;
mod peg;

pub use alist::{parse_alist, read_alist, to_alist};
pub use bp::{bp_decode, clamp_llr, hard_decision, BpConfig, BpOutput, LLR_MAX, TANH_CLAMP};
pub use code::LdpcCode;
pub use peg::peg_regular;

use crate::error::{Error, Result};
use crate::messages::{extrinsic, GaussianMessage, PosteriorSummary, VARIANCE_FLOOR};

/// Channel LLRs of a pseudo-observation: `2 r / v`, saturated at `LLR_MAX`.
pub fn llr_from_pseudo(rx: &GaussianMessage) -> Vec<f64> {
    let scale = 2.0 / rx.variance();
    rx.mean().iter().map(|&r| clamp_llr(scale * r)).collect()
}

/// BPSK soft symbols `tanh(L / 2)` and their mean variance `1 - x^2`.
pub fn soft_symbols(llr: &[f64]) -> (Vec<f64>, f64) {
    let mean: Vec<f64> = llr.iter().map(|&l| (0.5 * l).tanh()).collect();
    let var = if mean.is_empty() {
        0.0
    } else {
        mean.iter().map(|m| 1.0 - m * m).sum::<f64>() / mean.len() as f64
    };
    (mean, var.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserOutput {
    pub ext: GaussianMessage,
    pub posterior: PosteriorSummary,
    pub llr_in: Vec<f64>,
    pub llr_app: Vec<f64>,
}

fn decode(rx: &GaussianMessage, code: &LdpcCode, bp: &BpConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if rx.len() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            found: rx.len(),
        });
    }
    let llr_in = llr_from_pseudo(rx);
    let app = bp_decode(code, &llr_in, bp).llr;
    if app.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("a-posteriori LLR"));
    }
    Ok((llr_in, app))
}

/// Decodes the pseudo-observation and returns the Onsager-corrected
/// extrinsic message, with `alpha = v_post / v_in`.
pub fn denoiser_step(
    rx: &GaussianMessage,
    code: &LdpcCode,
    bp: &BpConfig,
    epsilon: f64,
) -> Result<DenoiserOutput> {
    let (llr_in, llr_app) = decode(rx, code, bp)?;
    let (mean, var) = soft_symbols(&llr_app);
    let posterior = PosteriorSummary::from_variance_ratio(mean, var, rx.variance(), epsilon)?;
    let ext = extrinsic(rx, &posterior)?;
    Ok(DenoiserOutput {
        ext,
        posterior,
        llr_in,
        llr_app,
    })
}

/// Turbo-style variant: `L_ext = L_app - L_in` mapped back to a Gaussian
/// message by its Bernoulli moments. The returned posterior is the one
/// implied by `L_app`; its alpha is informational only.
pub fn denoiser_step_llr_subtraction(
    rx: &GaussianMessage,
    code: &LdpcCode,
    bp: &BpConfig,
    epsilon: f64,
) -> Result<DenoiserOutput> {
    let (llr_in, llr_app) = decode(rx, code, bp)?;
    let l_ext: Vec<f64> = llr_app.iter().zip(&llr_in).map(|(a, i)| a - i).collect();
    let (ext_mean, ext_var) = soft_symbols(&l_ext);
    let ext = GaussianMessage::new(ext_mean, ext_var.max(VARIANCE_FLOOR))?;
    let (mean, var) = soft_symbols(&llr_app);
    let posterior = PosteriorSummary::from_variance_ratio(mean, var, rx.variance(), epsilon)?;
    Ok(DenoiserOutput {
        ext,
        posterior,
        llr_in,
        llr_app,
    })
}
