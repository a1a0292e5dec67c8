//! Outer iteration schedule: coupling first, then the denoiser and the
//! likelihood module on the coupling's outputs.

use std::fmt;
use std::str::FromStr;

use crate::channel::{Realization, TrialScenario};
use crate::coupling::coupling_posterior;
use crate::denoiser::{denoiser_step, denoiser_step_llr_subtraction, BpConfig, DenoiserOutput};
use crate::error::{Error, Result};
use crate::likelihood::{likelihood_step, ChannelSpec, Nonlinearity};
use crate::messages::{extrinsic, GaussianMessage, DEFAULT_EPSILON, VARIANCE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmVariant {
    /// All three modules exchange Onsager-corrected extrinsics.
    ScVamp3,
    /// The likelihood module is replaced by the linear-channel message `(y, σ²)`.
    ScVamp2Mismatched,
    /// Every module forwards its posterior instead of an extrinsic.
    NoOnsager,
    /// The decoder passes `L_app - L_in` instead of a variance-ratio extrinsic.
    LlrTurbo,
}

impl AlgorithmVariant {
    pub const ALL: [AlgorithmVariant; 4] = [
        AlgorithmVariant::ScVamp3,
        AlgorithmVariant::ScVamp2Mismatched,
        AlgorithmVariant::NoOnsager,
        AlgorithmVariant::LlrTurbo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmVariant::ScVamp3 => "scvamp3",
            AlgorithmVariant::ScVamp2Mismatched => "scvamp2-mismatched",
            AlgorithmVariant::NoOnsager => "no-onsager",
            AlgorithmVariant::LlrTurbo => "llr-turbo",
        }
    }
}

impl fmt::Display for AlgorithmVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .or(match key.as_str() {
                "scvamp" | "sc-vamp" => Some(AlgorithmVariant::ScVamp3),
                "scvamp2" | "mismatched" => Some(AlgorithmVariant::ScVamp2Mismatched),
                "llr" | "turbo" => Some(AlgorithmVariant::LlrTurbo),
                _ => None,
            })
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown variant {s:?}; expected one of scvamp3, scvamp2-mismatched, no-onsager, llr-turbo"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub outer_iterations: usize,
    pub bp: BpConfig,
    pub epsilon: f64,
    /// Stop once the decision is a codeword and unchanged for two iterations.
    pub early_stop: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            outer_iterations: 20,
            bp: BpConfig::default(),
            epsilon: DEFAULT_EPSILON,
            early_stop: false,
        }
    }
}

/// Raw (unclipped) Onsager coefficients of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTriplet {
    pub coupling_x: f64,
    pub likelihood: f64,
    pub denoiser: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `(1/N) |x_hat - x|^2` with `x_hat` the decoder's posterior mean.
    pub mse: f64,
    /// Variances of the messages entering the next coupling step.
    pub v_x: f64,
    pub v_w: f64,
    pub alpha: AlphaTriplet,
    pub alpha_clipped: AlphaTriplet,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn mse(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mse).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub hard_bits: Vec<u8>,
    /// Errors against the transmitted codeword; `n` when the run diverged.
    pub bit_errors: usize,
    pub converged_iteration: Option<usize>,
    pub diverged: bool,
    pub trace: IterationTrace,
}

/// What a single outer iteration produced.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// Message the decoder received from the coupling module.
    pub denoiser_input: GaussianMessage,
    pub denoiser: DenoiserOutput,
    /// Message the likelihood module received from the coupling module.
    pub likelihood_input: GaussianMessage,
    /// Message the likelihood module sent back towards the coupling.
    pub to_coupling_w: GaussianMessage,
    pub alpha: AlphaTriplet,
    pub alpha_clipped: AlphaTriplet,
}

/// Receiver state between outer iterations.
#[derive(Debug, Clone)]
pub struct Receiver<'a> {
    variant: AlgorithmVariant,
    scenario: &'a TrialScenario,
    likelihood_spec: ChannelSpec,
    y: &'a [f64],
    config: RunConfig,
    rx: GaussianMessage,
    rw: GaussianMessage,
}

impl<'a> Receiver<'a> {
    /// Starts from `(r_x, v_x) = (0, 1)` and `(r_w, v_w) = (y, σ²)`.
    pub fn new(
        variant: AlgorithmVariant,
        scenario: &'a TrialScenario,
        y: &'a [f64],
        config: RunConfig,
    ) -> Result<Self> {
        if y.len() != scenario.h.rows() {
            return Err(Error::DimensionMismatch {
                expected: scenario.h.rows(),
                found: y.len(),
            });
        }
        if config.outer_iterations == 0 || config.bp.iterations == 0 {
            return Err(Error::InvalidArgument("iteration counts must be at least 1".into()));
        }
        let likelihood_spec = match variant {
            AlgorithmVariant::ScVamp2Mismatched => scenario.spec.with_nonlinearity(Nonlinearity::Identity),
            _ => scenario.spec.clone(),
        };
        Ok(Self {
            variant,
            scenario,
            likelihood_spec,
            y,
            config,
            rx: GaussianMessage::uninformative(scenario.code.n(), 1.0)?,
            rw: GaussianMessage::new(y.to_vec(), scenario.spec.noise_variance())?,
        })
    }

    pub fn rx(&self) -> &GaussianMessage {
        &self.rx
    }

    pub fn rw(&self) -> &GaussianMessage {
        &self.rw
    }

    /// One outer iteration. The denoiser and the likelihood module both read
    /// only the coupling's outputs, so their order does not matter.
    pub fn step(&mut self) -> Result<StepOutput> {
        let eps = self.config.epsilon;
        let forward_posteriors = self.variant == AlgorithmVariant::NoOnsager;
        let post = coupling_posterior(&self.rx, &self.rw, &self.scenario.h, eps)?;
        let (to_x, to_w) = if forward_posteriors {
            (post.x.as_message(VARIANCE_FLOOR)?, post.w.as_message(VARIANCE_FLOOR)?)
        } else {
            (extrinsic(&self.rx, &post.x)?, extrinsic(&self.rw, &post.w)?)
        };

        let code = &self.scenario.code;
        let dec = match self.variant {
            AlgorithmVariant::LlrTurbo => denoiser_step_llr_subtraction(&to_x, code, &self.config.bp, eps)?,
            _ => denoiser_step(&to_x, code, &self.config.bp, eps)?,
        };
        let lik = likelihood_step(&to_w, self.y, &self.likelihood_spec, eps)?;

        let (next_x, next_w) = if forward_posteriors {
            (dec.posterior.as_message(VARIANCE_FLOOR)?, lik.posterior.as_message(VARIANCE_FLOOR)?)
        } else {
            (dec.ext.clone(), lik.extrinsic)
        };
        let alpha = AlphaTriplet {
            coupling_x: post.x.raw_alpha,
            likelihood: lik.posterior.raw_alpha,
            denoiser: dec.posterior.raw_alpha,
        };
        let alpha_clipped = AlphaTriplet {
            coupling_x: post.x.alpha,
            likelihood: lik.posterior.alpha,
            denoiser: dec.posterior.alpha,
        };
        self.rx = next_x;
        self.rw = next_w;
        Ok(StepOutput {
            denoiser_input: to_x,
            denoiser: dec,
            likelihood_input: to_w,
            to_coupling_w: self.rw.clone(),
            alpha,
            alpha_clipped,
        })
    }
}

/// Sign of the posterior mean, zero counted as +1 (bit 0).
pub fn hard_decision(mean: &[f64]) -> Vec<u8> {
    mean.iter().map(|&m| u8::from(m < 0.0)).collect()
}

fn mse(estimate: &[f64], truth: &[f64]) -> f64 {
    estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / truth.len() as f64
}

/// Runs the receiver for one trial. A non-finite or otherwise invalid
/// message aborts the run and scores the whole frame as wrong.
pub fn run(
    variant: AlgorithmVariant,
    scenario: &TrialScenario,
    realization: &Realization,
    config: &RunConfig,
) -> Result<DecodeResult> {
    let y = &realization.transmission.y;
    let mut receiver = Receiver::new(variant, scenario, y, *config)?;
    let n = scenario.code.n();
    let mut trace = IterationTrace::default();
    let mut hard_bits = vec![0u8; n];
    let mut previous: Option<Vec<u8>> = None;
    let mut converged_iteration = None;
    for t in 1..=config.outer_iterations {
        let out = match receiver.step() {
            Ok(out) => out,
            Err(_) => {
                return Ok(DecodeResult {
                    hard_bits,
                    bit_errors: n,
                    converged_iteration: None,
                    diverged: true,
                    trace,
                })
            }
        };
        let mean = &out.denoiser.posterior.mean;
        trace.records.push(IterationRecord {
            mse: mse(mean, &realization.x),
            v_x: receiver.rx().variance(),
            v_w: receiver.rw().variance(),
            alpha: out.alpha,
            alpha_clipped: out.alpha_clipped,
        });
        hard_bits = hard_decision(mean);
        if converged_iteration.is_none()
            && previous.as_ref() == Some(&hard_bits)
            && scenario.code.is_codeword(&hard_bits)
        {
            converged_iteration = Some(t);
            if config.early_stop {
                break;
            }
        }
        previous = Some(hard_bits.clone());
    }
    let bit_errors = hard_bits
        .iter()
        .zip(&realization.codeword)
        .filter(|(a, b)| a != b)
        .count();
    Ok(DecodeResult {
        hard_bits,
        bit_errors,
        converged_iteration,
        diverged: false,
        trace,
    })
}

pub fn run_scvamp3(scenario: &TrialScenario, realization: &Realization, config: &RunConfig) -> Result<DecodeResult> {
    run(AlgorithmVariant::ScVamp3, scenario, realization, config)
}

pub fn run_scvamp2_mismatched(
    scenario: &TrialScenario,
    realization: &Realization,
    config: &RunConfig,
) -> Result<DecodeResult> {
    run(AlgorithmVariant::ScVamp2Mismatched, scenario, realization, config)
}

pub fn run_no_onsager(scenario: &TrialScenario, realization: &Realization, config: &RunConfig) -> Result<DecodeResult> {
    run(AlgorithmVariant::NoOnsager, scenario, realization, config)
}

pub fn run_llr_turbo(scenario: &TrialScenario, realization: &Realization, config: &RunConfig) -> Result<DecodeResult> {
    run(AlgorithmVariant::LlrTurbo, scenario, realization, config)
}
