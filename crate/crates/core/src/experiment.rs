//! Monte Carlo harness: BER sweeps with adaptive seeding and MSE traces.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::channel::{HMode, TrialScenario};
use crate::denoiser::{BpConfig, LdpcCode};
use crate::error::{Error, Result};
use crate::likelihood::{ChannelSpec, Nonlinearity, DEFAULT_QUADRATURE_ORDER};
use crate::runner::{run, AlgorithmVariant, RunConfig};

pub const FULL_MIN_ERRORS: u64 = 500;
pub const FULL_MAX_SEEDS: u64 = 2000;
pub const DESK_MIN_ERRORS: u64 = 100;
pub const DESK_MAX_SEEDS: u64 = 500;
pub const DEFAULT_TRACE_TRIALS: usize = 50;

/// Seeds handed to the worker pool at once. Fixed, so the set of simulated
/// seeds never depends on the number of workers.
const SEED_BATCH: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorUnit {
    #[default]
    Bit,
    Frame,
}

impl FromStr for ErrorUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit" => Ok(ErrorUnit::Bit),
            "frame" => Ok(ErrorUnit::Frame),
            _ => Err(Error::InvalidArgument(format!("error unit must be bit or frame, got {s:?}"))),
        }
    }
}

impl fmt::Display for ErrorUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorUnit::Bit => "bit",
            ErrorUnit::Frame => "frame",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub snr_db: Vec<f64>,
    pub variants: Vec<AlgorithmVariant>,
    /// `builtin:<id>` or a path to an alist file.
    pub code: String,
    /// `None` means a square i.i.d. matrix matching the code length.
    pub h_mode: Option<HMode>,
    pub nonlinearity: Nonlinearity,
    pub outer_iterations: usize,
    pub bp_iterations: usize,
    pub min_errors: u64,
    pub max_seeds: u64,
    pub error_unit: ErrorUnit,
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub quadrature_order: usize,
    pub early_stop: bool,
    /// Trials per variant in MSE-trace mode.
    pub trials: usize,
    /// Leave out the timestamp comment so outputs are byte-comparable.
    pub deterministic: bool,
    /// Echoed into the CSV header comments when set; never computed.
    pub capacity_db: Option<f64>,
    /// Adds a column fingerprinting the channel realizations behind each row.
    pub debug_hash: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![6.0],
            variants: vec![AlgorithmVariant::ScVamp3],
            code: "builtin:r12-n128".into(),
            h_mode: None,
            nonlinearity: Nonlinearity::Identity,
            outer_iterations: 20,
            bp_iterations: 20,
            min_errors: FULL_MIN_ERRORS,
            max_seeds: FULL_MAX_SEEDS,
            error_unit: ErrorUnit::Bit,
            master_seed: 0,
            workers: 0,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            early_stop: false,
            trials: DEFAULT_TRACE_TRIALS,
            deterministic: false,
            capacity_db: None,
            debug_hash: false,
        }
    }
}

impl SweepConfig {
    pub fn desk_scale(mut self) -> Self {
        self.min_errors = DESK_MIN_ERRORS;
        self.max_seeds = DESK_MAX_SEEDS;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("the SNR list must be non-empty and finite");
        }
        if self.variants.is_empty() {
            return bad("at least one variant is required");
        }
        if (1..self.variants.len()).any(|i| self.variants[..i].contains(&self.variants[i])) {
            return bad("variants must not repeat");
        }
        if self.min_errors == 0 || self.max_seeds == 0 {
            return bad("min_errors and max_seeds must be at least 1");
        }
        if self.outer_iterations == 0 || self.bp_iterations == 0 {
            return bad("iteration counts must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        Ok(())
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            outer_iterations: self.outer_iterations,
            bp: BpConfig {
                iterations: self.bp_iterations,
                early_stop: false,
            },
            early_stop: self.early_stop,
            ..RunConfig::default()
        }
    }

    pub fn resolved_h_mode(&self, code: &LdpcCode) -> HMode {
        self.h_mode.unwrap_or(HMode::Iid {
            rows: code.n(),
            cols: code.n(),
        })
    }

    fn spec(&self, snr_db: f64) -> Result<ChannelSpec> {
        ChannelSpec::from_snr_db(self.nonlinearity, snr_db, self.quadrature_order)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
    }
}

/// Parses `4,5,6.5` or an inclusive range `a:b:step`.
pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("malformed SNR list {s:?}; use a,b,c or start:stop:step"));
    let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(bad());
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step <= 0.0 || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        // Rounded so 4 + 3 * 0.5 prints as 5.5 rather than 5.499999...
        Ok((0..count).map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9).collect())
    } else {
        let values = s.split(',').map(num).collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(bad());
        }
        Ok(values)
    }
}

pub fn parse_variants(s: &str) -> Result<Vec<AlgorithmVariant>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let v: AlgorithmVariant = part.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Wilson score interval for `k` successes in `n` trials at normal quantile `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub variant: AlgorithmVariant,
    pub bit_errors: u64,
    pub bits: u64,
    pub frame_errors: u64,
    pub frames: u64,
    pub diverged: u64,
    /// FNV-1a fold of the realization digests of the counted frames.
    pub realization_hash: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    pub fn ber_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits, z)
    }

    fn counted_errors(&self, unit: ErrorUnit) -> u64 {
        match unit {
            ErrorUnit::Bit => self.bit_errors,
            ErrorUnit::Frame => self.frame_errors,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct FrameOutcome {
    bit_errors: u64,
    diverged: bool,
}

fn fold_hash(acc: u64, digest: u64) -> u64 {
    let mut h = crate::channel::Fnv1a::default();
    h.write(&acc.to_le_bytes());
    h.write(&digest.to_le_bytes());
    h.finish()
}

/// Runs every requested variant on the shared realization of one seed.
fn simulate_seed(
    code: &Arc<LdpcCode>,
    h_mode: HMode,
    spec: &ChannelSpec,
    seed: u64,
    variants: &[AlgorithmVariant],
    run_config: &RunConfig,
) -> Result<(u64, Vec<FrameOutcome>)> {
    let scenario = TrialScenario::draw(code.clone(), h_mode, spec.clone(), seed)?;
    let realization = scenario.realize()?;
    let digest = realization.digest(&scenario.h);
    let outcomes = variants
        .iter()
        .map(|&v| {
            run(v, &scenario, &realization, run_config).map(|r| FrameOutcome {
                bit_errors: r.bit_errors as u64,
                diverged: r.diverged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((digest, outcomes))
}

/// Adaptive-seeding BER sweep. At each SNR the seeds `master_seed + i` are
/// simulated in order for all still-active variants on shared realizations;
/// a variant stops once it has `min_errors` errors or `max_seeds` frames.
/// Results are identical for any worker count.
pub fn ber_sweep(config: &SweepConfig, code: Arc<LdpcCode>) -> Result<Vec<BerPoint>> {
    config.validate()?;
    let h_mode = config.resolved_h_mode(&code);
    let run_config = config.run_config();
    let n = code.n() as u64;
    let pool = config.pool()?;
    let mut points = Vec::with_capacity(config.snr_db.len() * config.variants.len());
    for &snr_db in &config.snr_db {
        let spec = config.spec(snr_db)?;
        let mut rows: Vec<BerPoint> = config
            .variants
            .iter()
            .map(|&variant| BerPoint {
                snr_db,
                variant,
                bit_errors: 0,
                bits: 0,
                frame_errors: 0,
                frames: 0,
                diverged: 0,
                realization_hash: crate::channel::Fnv1a::default().finish(),
            })
            .collect();
        let mut active: Vec<bool> = vec![true; rows.len()];
        let mut next = 0u64;
        while next < config.max_seeds && active.iter().any(|&a| a) {
            let end = (next + SEED_BATCH).min(config.max_seeds);
            let live: Vec<AlgorithmVariant> = rows
                .iter()
                .zip(&active)
                .filter(|(_, &a)| a)
                .map(|(r, _)| r.variant)
                .collect();
            let batch: Vec<(u64, Vec<FrameOutcome>)> = pool.install(|| {
                (next..end)
                    .into_par_iter()
                    .map(|i| {
                        let seed = config.master_seed.wrapping_add(i);
                        simulate_seed(&code, h_mode, &spec, seed, &live, &run_config)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            for (digest, outcomes) in batch {
                let mut k = 0;
                for (row, is_active) in rows.iter_mut().zip(active.iter_mut()) {
                    if !live.contains(&row.variant) {
                        continue;
                    }
                    let o = outcomes[k];
                    k += 1;
                    if !*is_active {
                        continue;
                    }
                    row.frames += 1;
                    row.bits += n;
                    row.bit_errors += o.bit_errors;
                    row.frame_errors += u64::from(o.bit_errors > 0);
                    row.diverged += u64::from(o.diverged);
                    row.realization_hash = fold_hash(row.realization_hash, digest);
                    if row.counted_errors(config.error_unit) >= config.min_errors {
                        *is_active = false;
                    }
                }
            }
            next = end;
        }
        points.extend(rows);
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MseTraceRow {
    /// 0 is the initialization `x_hat = 0`.
    pub iteration: usize,
    pub variant: AlgorithmVariant,
    pub mean_mse: f64,
    pub median_mse: f64,
    pub trials: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Mean and median MSE per outer iteration over `config.trials` shared
/// realizations at the single SNR in `config.snr_db`. A trial that diverges
/// or stops early keeps its last MSE for the remaining iterations.
pub fn mse_trace_experiment(config: &SweepConfig, code: Arc<LdpcCode>) -> Result<Vec<MseTraceRow>> {
    config.validate()?;
    let [snr_db] = config.snr_db.as_slice() else {
        return Err(Error::InvalidArgument("an MSE trace needs exactly one SNR".into()));
    };
    let h_mode = config.resolved_h_mode(&code);
    let spec = config.spec(*snr_db)?;
    let run_config = config.run_config();
    let t_max = config.outer_iterations;
    let pool = config.pool()?;
    // traces[trial][variant][iteration]
    let traces: Vec<Vec<Vec<f64>>> = pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| {
                let seed = config.master_seed.wrapping_add(i);
                let scenario = TrialScenario::draw(code.clone(), h_mode, spec.clone(), seed)?;
                let realization = scenario.realize()?;
                let initial = realization.x.iter().map(|x| x * x).sum::<f64>() / realization.x.len() as f64;
                config
                    .variants
                    .iter()
                    .map(|&v| {
                        let res = run(v, &scenario, &realization, &run_config)?;
                        let mut mse = Vec::with_capacity(t_max + 1);
                        mse.push(initial);
                        mse.extend(res.trace.mse());
                        let last = *mse.last().unwrap();
                        mse.resize(t_max + 1, last);
                        Ok(mse)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::with_capacity(config.variants.len() * (t_max + 1));
    for (vi, &variant) in config.variants.iter().enumerate() {
        for t in 0..=t_max {
            let mut values: Vec<f64> = traces.iter().map(|tr| tr[vi][t]).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            rows.push(MseTraceRow {
                iteration: t,
                variant,
                mean_mse: mean,
                median_mse: median(&mut values),
                trials: values.len(),
            });
        }
    }
    Ok(rows)
}

fn header_comments(config: &SweepConfig, mode: &str) -> String {
    let mut out = String::new();
    if !config.deterministic {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        out.push_str(&format!("# generated_unix={secs}\n"));
    }
    out.push_str(&format!(
        "# experiment={mode} outer_iters={} bp_iters={} min_errors={} max_seeds={} error_unit={} quadrature_order={}\n",
        config.outer_iterations,
        config.bp_iterations,
        config.min_errors,
        config.max_seeds,
        config.error_unit,
        config.quadrature_order
    ));
    if let Some(c) = config.capacity_db {
        out.push_str(&format!("# capacity_db={c}\n"));
    }
    out
}

fn csv_body<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let run = || -> csv::Result<Vec<u8>> {
        w.write_record(header)?;
        fill(&mut w)?;
        w.into_inner().map_err(|e| e.into_error().into())
    };
    let bytes = run().map_err(|e| Error::InvalidArgument(format!("CSV encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(format!("CSV encoding: {e}")))
}

pub fn ber_csv(config: &SweepConfig, code: &LdpcCode, points: &[BerPoint]) -> Result<String> {
    let mut header = vec![
        "snr_db", "variant", "code", "n", "k", "h_mode", "nonlinearity", "frames", "bits", "bit_errors",
        "frame_errors", "diverged", "ber", "fer", "seed_base",
    ];
    if config.debug_hash {
        header.push("realization_hash");
    }
    let h_mode = config.resolved_h_mode(code).to_string();
    let body = csv_body(&header, |w| {
        for p in points {
            let mut rec = vec![
                p.snr_db.to_string(),
                p.variant.to_string(),
                config.code.clone(),
                code.n().to_string(),
                code.k().to_string(),
                h_mode.clone(),
                config.nonlinearity.name().to_string(),
                p.frames.to_string(),
                p.bits.to_string(),
                p.bit_errors.to_string(),
                p.frame_errors.to_string(),
                p.diverged.to_string(),
                p.ber().to_string(),
                p.fer().to_string(),
                config.master_seed.to_string(),
            ];
            if config.debug_hash {
                rec.push(format!("{:016x}", p.realization_hash));
            }
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    Ok(header_comments(config, "ber") + &body)
}

pub fn mse_trace_csv(config: &SweepConfig, rows: &[MseTraceRow]) -> Result<String> {
    let header = ["iteration", "variant", "mean_mse", "median_mse", "trials"];
    let body = csv_body(&header, |w| {
        for r in rows {
            w.write_record([
                r.iteration.to_string(),
                r.variant.to_string(),
                r.mean_mse.to_string(),
                r.median_mse.to_string(),
                r.trials.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(header_comments(config, "mse-trace") + &body)
}

/// Writes through a sibling temporary file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let file_err = |source| Error::File {
        path: path.to_path_buf(),
        source,
    };
    std::fs::write(&tmp, contents).map_err(file_err)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        file_err(e)
    })
}
