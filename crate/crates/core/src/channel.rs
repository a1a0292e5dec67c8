//! Forward model `y = f(Hx) + z` with reproducible random streams.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::coupling::MixingMatrix;
use crate::denoiser::LdpcCode;
use crate::error::{Error, Result};
use crate::likelihood::ChannelSpec;

pub const STREAM_H: &str = "H";
pub const STREAM_BITS: &str = "bits";
pub const STREAM_NOISE: &str = "noise";

/// 64-bit FNV-1a, used for stream labels and realization digests because
/// its output is fixed across platforms and toolchains.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn write_f64s(&mut self, values: &[f64]) {
        for v in values {
            self.write(&v.to_bits().to_le_bytes());
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// Independent generator for one named purpose under a trial seed.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Fnv1a::default();
    h.write(label.as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h.finish());
    rng
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> DMatrix<f64> {
    let sd = variance.sqrt();
    // Row-major draw order, so a matrix is a prefix of any wider draw.
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            sd * g
        })
        .collect();
    DMatrix::from_row_slice(rows, cols, &values)
}

/// `M x N` matrix with i.i.d. `N(0, 1/M)` entries.
pub fn gen_h_iid<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<MixingMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
    }
    MixingMatrix::precompute(gaussian_matrix(m, n, 1.0 / m as f64, rng))
}

/// One `B x B` block with `N(0, 1/B)` entries repeated along the diagonal.
pub fn gen_h_blockdiag<R: Rng + ?Sized>(block: usize, repeats: usize, rng: &mut R) -> Result<MixingMatrix> {
    if block == 0 || repeats == 0 {
        return Err(Error::InvalidArgument("block size and repeats must be positive".into()));
    }
    MixingMatrix::block_diagonal(gaussian_matrix(block, block, 1.0 / block as f64, rng), repeats)
}

/// How the mixing matrix is drawn for a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HMode {
    Iid { rows: usize, cols: usize },
    BlockDiagonal { block: usize },
}

impl HMode {
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<MixingMatrix> {
        match *self {
            HMode::Iid { rows, cols } => {
                if cols != n {
                    return Err(Error::InvalidArgument(format!(
                        "matrix has {cols} columns but the code length is {n}"
                    )));
                }
                gen_h_iid(rows, cols, rng)
            }
            HMode::BlockDiagonal { block } => {
                if block == 0 || !n.is_multiple_of(block) {
                    return Err(Error::InvalidArgument(format!(
                        "code length {n} is not a multiple of block size {block}"
                    )));
                }
                gen_h_blockdiag(block, n / block, rng)
            }
        }
    }
}

impl fmt::Display for HMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HMode::Iid { rows, cols } => write!(f, "iid:{rows}x{cols}"),
            HMode::BlockDiagonal { block } => write!(f, "blockdiag:{block}"),
        }
    }
}

impl FromStr for HMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected iid:MxN or blockdiag:B, got {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let positive = |t: &str| t.trim().parse::<usize>().ok().filter(|&v| v > 0).ok_or_else(bad);
        match kind {
            "iid" => {
                let (m, n) = rest.split_once(['x', 'X']).ok_or_else(bad)?;
                Ok(HMode::Iid {
                    rows: positive(m)?,
                    cols: positive(n)?,
                })
            }
            "blockdiag" => Ok(HMode::BlockDiagonal { block: positive(rest)? }),
            _ => Err(bad()),
        }
    }
}

/// Bit 0 maps to +1, bit 1 to -1.
pub fn bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| if b & 1 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Sign demapper; zero goes to bit 0.
pub fn demap(x: &[f64]) -> Vec<u8> {
    x.iter().map(|&v| u8::from(v < 0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
}

/// `y = f(Hx) + z` with `z ~ N(0, sigma^2 I)` drawn from `rng`.
pub fn transmit<R: Rng + ?Sized>(x: &[f64], h: &MixingMatrix, spec: &ChannelSpec, rng: &mut R) -> Result<Transmission> {
    if x.len() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.cols(),
            found: x.len(),
        });
    }
    let w = h.apply(x);
    let noise = Normal::new(0.0, spec.noise_variance().sqrt())
        .map_err(|e| Error::InvalidArgument(format!("noise distribution: {e}")))?;
    let z: Vec<f64> = (0..w.len()).map(|_| noise.sample(rng)).collect();
    let f = spec.nonlinearity();
    let y = w.iter().zip(&z).map(|(&wi, &zi)| f.apply(wi) + zi).collect();
    Ok(Transmission { w, z, y })
}

/// Everything that defines one Monte Carlo trial apart from the algorithm.
#[derive(Debug, Clone)]
pub struct TrialScenario {
    pub code: Arc<LdpcCode>,
    pub h: Arc<MixingMatrix>,
    pub spec: ChannelSpec,
    pub seed: u64,
}

/// Transmitted data of a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub info: Vec<u8>,
    pub codeword: Vec<u8>,
    pub x: Vec<f64>,
    pub transmission: Transmission,
}

impl TrialScenario {
    /// Draws `H` from the seed's `"H"` stream.
    pub fn draw(code: Arc<LdpcCode>, h_mode: HMode, spec: ChannelSpec, seed: u64) -> Result<Self> {
        let h = h_mode.draw(code.n(), &mut substream(seed, STREAM_H))?;
        Self::with_matrix(code, Arc::new(h), spec, seed)
    }

    pub fn with_matrix(code: Arc<LdpcCode>, h: Arc<MixingMatrix>, spec: ChannelSpec, seed: u64) -> Result<Self> {
        if h.cols() != code.n() {
            return Err(Error::DimensionMismatch {
                expected: code.n(),
                found: h.cols(),
            });
        }
        Ok(Self { code, h, spec, seed })
    }

    pub fn snr(&self) -> f64 {
        self.spec.snr()
    }

    /// Random information bits (`"bits"` stream), encoded, mapped and sent
    /// through the channel with noise from the `"noise"` stream.
    pub fn realize(&self) -> Result<Realization> {
        let mut bit_rng = substream(self.seed, STREAM_BITS);
        let info: Vec<u8> = (0..self.code.k()).map(|_| u8::from(bit_rng.random::<bool>())).collect();
        let codeword = self.code.encode(&info)?;
        let x = bpsk(&codeword);
        let transmission = transmit(&x, &self.h, &self.spec, &mut substream(self.seed, STREAM_NOISE))?;
        Ok(Realization {
            info,
            codeword,
            x,
            transmission,
        })
    }
}

impl Realization {
    /// Fingerprint of `(H, x, z)`; equal digests mean the same channel use.
    pub fn digest(&self, h: &MixingMatrix) -> u64 {
        let mut hasher = Fnv1a::default();
        hasher.write_f64s(h.entries().as_slice());
        hasher.write_f64s(&self.x);
        hasher.write_f64s(&self.transmission.z);
        hasher.finish()
    }
}
