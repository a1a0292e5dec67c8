//! Coupling module: joint LMMSE estimate of `(x, w)` under `w = H x`.
//!
//! With incoming messages `(r_x, v_x)` and `(r_w, v_w)` the posterior of `x`
//! is Gaussian with covariance `Σ = (I / v_x + HᵀH / v_w)⁻¹`. Everything is
//! evaluated in the eigenbasis `HᵀH = U Λ Uᵀ`, computed once per matrix, so a
//! step costs a few matrix–vector products and no inversion.

use std::borrow::Cow;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::messages::{extrinsic, GaussianMessage, PosteriorSummary};

/// Layout of the channel matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Dense,
    /// `repeats` copies of one square `block_size × block_size` block on the diagonal.
    BlockDiagonal { block_size: usize, repeats: usize },
}

/// Channel matrix with its cached eigendecomposition of `HᵀH`.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    rows: usize,
    cols: usize,
    structure: Structure,
    /// The full matrix when dense, the repeated block otherwise.
    matrix: DMatrix<f64>,
    /// Eigenvalues of `HᵀH` (of the block, for block-diagonal matrices).
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, columns matching `eigenvalues`.
    eigenvectors: DMatrix<f64>,
}

impl MixingMatrix {
    /// Eigendecomposes `HᵀH` of a dense matrix.
    pub fn precompute(h: DMatrix<f64>) -> Result<Self> {
        let (eigenvalues, eigenvectors) = gram_eigen(&h)?;
        Ok(Self {
            rows: h.nrows(),
            cols: h.ncols(),
            structure: Structure::Dense,
            matrix: h,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Block-diagonal matrix built from `repeats` copies of a square block;
    /// only the block is decomposed.
    pub fn block_diagonal(block: DMatrix<f64>, repeats: usize) -> Result<Self> {
        if !block.is_square() || block.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "diagonal block must be square and non-empty, got {}x{}",
                block.nrows(),
                block.ncols()
            )));
        }
        if repeats == 0 {
            return Err(Error::InvalidArgument("block repeat count must be positive".into()));
        }
        let b = block.nrows();
        let (eigenvalues, eigenvectors) = gram_eigen(&block)?;
        Ok(Self {
            rows: b * repeats,
            cols: b * repeats,
            structure: Structure::BlockDiagonal {
                block_size: b,
                repeats,
            },
            matrix: block,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Full `M × N` matrix; materialised for block-diagonal layouts.
    pub fn entries(&self) -> Cow<'_, DMatrix<f64>> {
        match self.structure {
            Structure::Dense => Cow::Borrowed(&self.matrix),
            Structure::BlockDiagonal { block_size, repeats } => {
                let mut full = DMatrix::zeros(self.rows, self.cols);
                for k in 0..repeats {
                    full.view_mut((k * block_size, k * block_size), (block_size, block_size))
                        .copy_from(&self.matrix);
                }
                Cow::Owned(full)
            }
        }
    }

    /// All `N` eigenvalues of `HᵀH`, block eigenvalues repeated per block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.structure {
            Structure::Dense => self.eigenvalues.clone(),
            Structure::BlockDiagonal { repeats, .. } => {
                let mut all = Vec::with_capacity(self.cols);
                for _ in 0..repeats {
                    all.extend_from_slice(&self.eigenvalues);
                }
                all
            }
        }
    }

    /// Eigenvalues actually stored (the block's, for block-diagonal matrices).
    pub fn stored_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors actually stored (`N × N`, or `B × B` for block-diagonal).
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.blockwise(x, self.rows, |blk, seg| &self.matrix * blk_vec(seg, blk))
    }

    /// `Hᵀ w`.
    pub fn apply_transpose(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.rows);
        self.blockwise(w, self.cols, |blk, seg| self.matrix.tr_mul(&blk_vec(seg, blk)))
    }

    /// `U f(Λ) Uᵀ b` for a spectral weight `d` given per stored eigenvalue.
    fn spectral_apply(&self, b: &[f64], d: &[f64]) -> Vec<f64> {
        self.blockwise(b, self.cols, |blk, seg| {
            let mut coeff = self.eigenvectors.tr_mul(&blk_vec(seg, blk));
            for (c, &di) in coeff.iter_mut().zip(d) {
                *c *= di;
            }
            &self.eigenvectors * coeff
        })
    }

    fn blockwise<F>(&self, input: &[f64], out_len: usize, op: F) -> Vec<f64>
    where
        F: Fn(usize, &[f64]) -> DVector<f64>,
    {
        match self.structure {
            Structure::Dense => op(input.len(), input).as_slice().to_vec(),
            Structure::BlockDiagonal { block_size, .. } => {
                let mut out = Vec::with_capacity(out_len);
                for seg in input.chunks(block_size) {
                    out.extend_from_slice(op(block_size, seg).as_slice());
                }
                out
            }
        }
    }

    /// Plain-text dump: header `"M N"`, then one row of entries per line.
    pub fn to_text(&self) -> String {
        let h = self.entries();
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:e}", h[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parses [`MixingMatrix::to_text`] output as a dense matrix.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: &str| Error::MatrixFile {
            line,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(hl, "header must be two integers")))
            .collect::<Result<_>>()?;
        let [m, n] = dims[..] else {
            return Err(err(hl, "header must be two integers"));
        };
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| err(hl + i + 1, "missing matrix row"))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(ln, "invalid number")))
                .collect::<Result<_>>()?;
            if row.len() != n {
                return Err(err(ln, &format!("expected {n} entries, found {}", row.len())));
            }
            data.extend(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing data after last row"));
        }
        Self::precompute(DMatrix::from_row_slice(m, n, &data))
    }
}

fn blk_vec(seg: &[f64], len: usize) -> DVector<f64> {
    debug_assert_eq!(seg.len(), len);
    DVector::from_column_slice(seg)
}

/// Symmetric eigendecomposition of `HᵀH` with round-off negatives clamped.
fn gram_eigen(h: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("channel matrix"));
    }
    let gram = h.tr_mul(h);
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let values = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok((values, eig.eigenvectors))
}

/// Posterior summaries of both sides of the coupling.
#[derive(Debug, Clone)]
pub struct CouplingPosterior {
    pub x: PosteriorSummary,
    pub w: PosteriorSummary,
}

/// LMMSE posterior of `(x, w = H x)` given the two incoming messages.
pub fn coupling_posterior(
    rx: &GaussianMessage,
    rw: &GaussianMessage,
    h: &MixingMatrix,
    epsilon: f64,
) -> Result<CouplingPosterior> {
    if rx.len() != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: h.cols(),
            found: rx.len(),
        });
    }
    if rw.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: rw.len(),
        });
    }
    let (vx, vw) = (rx.variance(), rw.variance());
    let (n, m) = (h.cols() as f64, h.rows() as f64);

    // Per-eigenvalue posterior variance σ²(λ) = v_x v_w / (v_w + v_x λ).
    let lambdas = h.stored_eigenvalues();
    let sigma2: Vec<f64> = lambdas.iter().map(|&l| vx * vw / (vw + vx * l)).collect();
    let blocks = (h.cols() / lambdas.len().max(1)) as f64;
    let stored = lambdas.len() as f64;

    let htw = h.apply_transpose(rw.mean());
    let b: Vec<f64> = rx
        .mean()
        .iter()
        .zip(&htw)
        .map(|(&r, &t)| r / vx + t / vw)
        .collect();
    let x_mean = h.spectral_apply(&b, &sigma2);
    let w_mean = h.apply(&x_mean);

    let x_var = sigma2.iter().sum::<f64>() * blocks / n;
    let alpha_x = if stored == 0.0 {
        1.0
    } else {
        lambdas.iter().map(|&l| vw / (vw + vx * l)).sum::<f64>() / stored
    };
    let w_var = if m == 0.0 {
        0.0
    } else {
        lambdas.iter().zip(&sigma2).map(|(&l, &s)| l * s).sum::<f64>() * blocks / m
    };

    let x = PosteriorSummary::with_alpha(x_mean, x_var, alpha_x, epsilon)?;
    let w = PosteriorSummary::from_variance_ratio(w_mean, w_var, vw, epsilon)?;
    Ok(CouplingPosterior { x, w })
}

/// Output of [`coupling_step`].
#[derive(Debug, Clone)]
pub struct CouplingOutput {
    /// Extrinsic message towards the denoiser (x side).
    pub ext_x: GaussianMessage,
    /// Extrinsic message towards the likelihood module (w side).
    pub ext_w: GaussianMessage,
    pub posterior: CouplingPosterior,
}

pub fn coupling_step(
    rx: &GaussianMessage,
    rw: &GaussianMessage,
    h: &MixingMatrix,
    epsilon: f64,
) -> Result<CouplingOutput> {
    let posterior = coupling_posterior(rx, rw, h, epsilon)?;
    let ext_x = extrinsic(rx, &posterior.x)?;
    let ext_w = extrinsic(rw, &posterior.w)?;
    Ok(CouplingOutput {
        ext_x,
        ext_w,
        posterior,
    })
}
