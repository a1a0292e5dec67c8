//! Command-line front end for the experiment harness.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{error::ErrorKind, CommandFactory, Parser, ValueEnum};

use crate::channel::HMode;
use crate::denoiser::builtin::load_code;
use crate::error::Result;
use crate::experiment::{
    ber_csv, ber_sweep, mse_trace_csv, mse_trace_experiment, parse_snr_list, parse_variants, write_atomic,
    ErrorUnit, SweepConfig, DEFAULT_TRACE_TRIALS, DESK_MAX_SEEDS, DESK_MIN_ERRORS, FULL_MAX_SEEDS,
    FULL_MIN_ERRORS,
};
use crate::likelihood::{Nonlinearity, DEFAULT_QUADRATURE_ORDER};
use crate::runner::AlgorithmVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Ber,
    MseTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// min_errors=100, max_seeds=500
    Desk,
    /// min_errors=500, max_seeds=2000
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct VariantList(pub Vec<AlgorithmVariant>);

fn snr_arg(s: &str) -> std::result::Result<SnrList, String> {
    parse_snr_list(s).map(SnrList).map_err(|e| e.to_string())
}

fn variants_arg(s: &str) -> std::result::Result<VariantList, String> {
    parse_variants(s).map(VariantList).map_err(|e| e.to_string())
}

fn parse_from_str<T: std::str::FromStr<Err = crate::Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

/// BER sweeps and MSE traces for the three-module receiver.
#[derive(Debug, Parser)]
#[command(name = "scvamp", version)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "ber")]
    pub experiment: Experiment,
    /// SNR points in dB: a list `4,5,6` or an inclusive range `a:b:step`.
    #[arg(long = "snr-db", value_parser = snr_arg, allow_hyphen_values = true)]
    pub snr_db: SnrList,
    /// Comma-separated: scvamp3, scvamp2-mismatched, no-onsager, llr-turbo.
    #[arg(long, value_parser = variants_arg, default_value = "scvamp3,scvamp2-mismatched,no-onsager,llr-turbo")]
    pub variant: VariantList,
    /// Alist path or builtin:r12-n{128,256,512,1056,2304}.
    #[arg(long)]
    pub code: String,
    /// iid:MxN or blockdiag:B; defaults to a square i.i.d. matrix.
    #[arg(long = "h", value_parser = parse_from_str::<HMode>)]
    pub h_mode: Option<HMode>,
    #[arg(long, value_parser = parse_from_str::<Nonlinearity>, default_value = "id")]
    pub nonlinearity: Nonlinearity,
    #[arg(long = "outer-iters", default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub outer_iters: u64,
    #[arg(long = "bp-iters", default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub bp_iters: u64,
    /// Scale of the adaptive-seeding defaults.
    #[arg(long, value_enum, default_value = "full")]
    pub preset: Preset,
    #[arg(long = "min-errors", value_parser = clap::value_parser!(u64).range(1..))]
    pub min_errors: Option<u64>,
    #[arg(long = "max-seeds", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_seeds: Option<u64>,
    #[arg(long = "error-unit", value_parser = parse_from_str::<ErrorUnit>, default_value = "bit")]
    pub error_unit: ErrorUnit,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Trials in mse-trace mode.
    #[arg(long, default_value_t = DEFAULT_TRACE_TRIALS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long = "quadrature-order", default_value_t = DEFAULT_QUADRATURE_ORDER)]
    pub quadrature_order: usize,
    /// Stop a trial once its decision is a stable codeword.
    #[arg(long = "early-stop")]
    pub early_stop: bool,
    /// Omit the timestamp comment line.
    #[arg(long)]
    pub deterministic: bool,
    /// Capacity annotation echoed into the CSV comments.
    #[arg(long = "capacity-db", allow_hyphen_values = true)]
    pub capacity_db: Option<f64>,
    /// Add a column fingerprinting the channel realizations of each row.
    #[arg(long = "debug-hash")]
    pub debug_hash: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: SweepConfig,
    pub out: Option<PathBuf>,
}

/// Parses arguments (including the program name). Errors carry clap's
/// usage text and exit code 2.
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let usage = |msg: &str| Cli::command().error(ErrorKind::ValueValidation, msg);
    let snr_db = cli.snr_db.0;
    if cli.experiment == Experiment::MseTrace && snr_db.len() != 1 {
        return Err(usage("--experiment mse-trace takes exactly one --snr-db value"));
    }
    let variants = cli.variant.0;
    let (min_default, max_default) = match cli.preset {
        Preset::Desk => (DESK_MIN_ERRORS, DESK_MAX_SEEDS),
        Preset::Full => (FULL_MIN_ERRORS, FULL_MAX_SEEDS),
    };
    let config = SweepConfig {
        snr_db,
        variants,
        code: cli.code,
        h_mode: cli.h_mode,
        nonlinearity: cli.nonlinearity,
        outer_iterations: cli.outer_iters as usize,
        bp_iterations: cli.bp_iters as usize,
        min_errors: cli.min_errors.unwrap_or(min_default),
        max_seeds: cli.max_seeds.unwrap_or(max_default),
        error_unit: cli.error_unit,
        master_seed: cli.seed,
        workers: cli.workers,
        quadrature_order: cli.quadrature_order,
        early_stop: cli.early_stop,
        trials: cli.trials as usize,
        deterministic: cli.deterministic,
        capacity_db: cli.capacity_db,
        debug_hash: cli.debug_hash,
    };
    config.validate().map_err(|e| usage(&e.to_string()))?;
    Ok(Invocation {
        experiment: cli.experiment,
        config,
        out: cli.out,
    })
}

/// Runs a parsed invocation and returns the CSV text it produced.
pub fn execute(inv: &Invocation) -> Result<String> {
    let code = Arc::new(load_code(&inv.config.code)?);
    let csv = match inv.experiment {
        Experiment::Ber => {
            let points = ber_sweep(&inv.config, code.clone())?;
            ber_csv(&inv.config, &code, &points)?
        }
        Experiment::MseTrace => {
            let rows = mse_trace_experiment(&inv.config, code)?;
            mse_trace_csv(&inv.config, &rows)?
        }
    };
    match &inv.out {
        Some(path) => write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Invocation, clap::Error> {
        parse_cli(std::iter::once("scvamp").chain(args.iter().copied()))
    }

    #[test]
    fn range_and_variants() {
        let inv = parse(&["--code", "builtin:r12-n128", "--snr-db", "4:8:0.5", "--variant", "scvamp3,no-onsager"])
            .unwrap();
        assert_eq!(inv.config.snr_db.len(), 9);
        assert_eq!(inv.config.variants.len(), 2);
        assert_eq!(inv.config.min_errors, FULL_MIN_ERRORS);
    }

    #[test]
    fn missing_code_is_usage_error() {
        let err = parse(&["--snr-db", "5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--code"));
    }

    #[test]
    fn malformed_inputs_are_usage_errors() {
        for args in [
            &["--code", "x", "--snr-db", "4:8"][..],
            &["--code", "x", "--snr-db", "5", "--variant", "vamp"],
            &["--code", "x", "--snr-db", "5", "--h", "dense"],
            &["--code", "x", "--snr-db", "5", "--bogus"],
            &["--code", "x", "--snr-db", "5", "--min-errors", "0"],
            &["--code", "x", "--snr-db", "5,6", "--experiment", "mse-trace"],
            &["--code", "x"],
        ] {
            assert_eq!(parse(args).unwrap_err().exit_code(), 2, "{args:?}");
        }
    }

    #[test]
    fn preset_and_overrides() {
        let inv = parse(&["--code", "x", "--snr-db", "5", "--preset", "desk", "--max-seeds", "7"]).unwrap();
        assert_eq!((inv.config.min_errors, inv.config.max_seeds), (DESK_MIN_ERRORS, 7));
        let inv = parse(&["--code", "x", "--snr-db", "-2,0", "--h", "blockdiag:32", "--nonlinearity", "tanh"]).unwrap();
        assert_eq!(inv.config.snr_db, vec![-2.0, 0.0]);
        assert_eq!(inv.config.h_mode, Some(HMode::BlockDiagonal { block: 32 }));
        assert_eq!(inv.config.nonlinearity, Nonlinearity::Tanh);
    }
}
