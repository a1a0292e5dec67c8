//! Brute-force oracles shared by the integration tests. Nothing here goes
//! through the eigenbasis, the quadrature rule or the message-passing code
//! it is compared against.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use scvamp::denoiser::{denoiser_step, BpConfig, LdpcCode};
use scvamp::messages::{GaussianMessage, DEFAULT_EPSILON};

pub fn random_matrix<R: Rng>(m: usize, n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vec<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// LMMSE posterior of `x` and `w = H x` by explicit matrix inversion.
#[derive(Debug, Clone)]
pub struct DenseCoupling {
    pub x_mean: Vec<f64>,
    pub x_var: f64,
    pub alpha_x: f64,
    pub w_mean: Vec<f64>,
    pub w_var: f64,
    pub alpha_w: f64,
}

pub fn dense_coupling(rx: &[f64], vx: f64, rw: &[f64], vw: f64, h: &DMatrix<f64>) -> DenseCoupling {
    let (m, n) = h.shape();
    let precision = DMatrix::identity(n, n) / vx + h.transpose() * h / vw;
    let sigma = precision.try_inverse().expect("posterior precision is positive definite");
    let b = DVector::from_column_slice(rx) / vx + h.transpose() * DVector::from_column_slice(rw) / vw;
    let x = &sigma * b;
    let w = h * &x;
    let x_var = sigma.trace() / n as f64;
    let w_var = (h * &sigma * h.transpose()).trace() / m as f64;
    DenseCoupling {
        x_mean: x.as_slice().to_vec(),
        x_var,
        alpha_x: x_var / vx,
        w_mean: w.as_slice().to_vec(),
        w_var,
        alpha_w: w_var / vw,
    }
}

/// `log N(rw; H rx, vw I + vx H H^T)`, the normaliser of the coupling's
/// tilted density as a function of both incoming means.
pub fn dense_coupling_log_z(rx: &[f64], vx: f64, rw: &[f64], vw: f64, h: &DMatrix<f64>) -> f64 {
    let m = h.nrows();
    let cov = DMatrix::identity(m, m) * vw + h * h.transpose() * vx;
    let chol = cov.cholesky().expect("covariance is positive definite");
    let d = DVector::from_column_slice(rw) - h * DVector::from_column_slice(rx);
    let quad = d.dot(&chol.solve(&d));
    let log_det: f64 = chol.l().diagonal().iter().map(|l| 2.0 * l.ln()).sum();
    -0.5 * (quad + log_det + m as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Dense trapezoid over `w in [r - 10 sqrt(v), r + 10 sqrt(v)]` for
/// `N(w; r, v) N(y; tanh w, s2)`, with the exponent shifted by its maximum.
pub fn trapezoid_moments(r: f64, v: f64, y: f64, s2: f64, points: usize) -> (f64, f64) {
    let (a, b) = (r - 10.0 * v.sqrt(), r + 10.0 * v.sqrt());
    let h = (b - a) / (points - 1) as f64;
    let log_f = |w: f64| -(w - r) * (w - r) / (2.0 * v) - (y - w.tanh()).powi(2) / (2.0 * s2);
    let max = (0..points)
        .map(|i| log_f(a + h * i as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut s1, mut s2m) = (0.0, 0.0, 0.0);
    for i in 0..points {
        let w = a + h * i as f64;
        let c = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
        let p = c * (log_f(w) - max).exp();
        z += p;
        s1 += p * w;
        s2m += p * w * w;
    }
    (s1 / z, s2m / z)
}

/// Exact bitwise `E[x_i]` (BPSK, bit 0 -> +1) over all codewords, with
/// channel LLRs `L = log P(bit 0) / P(bit 1)`.
pub fn exhaustive_soft_bits(code: &LdpcCode, llr: &[f64]) -> Vec<f64> {
    let n = code.n();
    assert!(n <= 20);
    let mut num = vec![0.0; n];
    let mut den = 0.0;
    for word in 0u32..(1 << n) {
        let bits: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
        if !code.is_codeword(&bits) {
            continue;
        }
        let log_p: f64 = bits
            .iter()
            .zip(llr)
            .map(|(&b, &l)| if b == 0 { 0.5 * l } else { -0.5 * l })
            .sum();
        let p = log_p.exp();
        den += p;
        for (acc, &b) in num.iter_mut().zip(&bits) {
            *acc += if b == 0 { p } else { -p };
        }
    }
    num.iter().map(|s| s / den).collect()
}

/// Per-iteration state of the two-module reference receiver.
#[derive(Debug, Clone)]
pub struct ReferenceIteration {
    pub mse: f64,
    pub v_x: f64,
    pub posterior_mean: Vec<f64>,
}

/// Two-module receiver for `y = H x + z`: dense LMMSE against the fixed
/// observation message `(y, sigma^2)` and the LDPC denoiser, exchanging
/// Onsager-corrected extrinsics written out by hand.
pub fn two_module_reference(
    h: &DMatrix<f64>,
    y: &[f64],
    s2: f64,
    code: &LdpcCode,
    x_true: &[f64],
    iterations: usize,
) -> Vec<ReferenceIteration> {
    let n = h.ncols();
    let clip = |a: f64| a.clamp(DEFAULT_EPSILON, 1.0 - DEFAULT_EPSILON);
    let (mut r, mut v) = (vec![0.0; n], 1.0);
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let post = dense_coupling(&r, v, y, s2, h);
        let a = clip(post.alpha_x);
        let r_b: Vec<f64> = post
            .x_mean
            .iter()
            .zip(&r)
            .map(|(x, ri)| (x - a * ri) / (1.0 - a))
            .collect();
        let v_b = a / (1.0 - a) * v;
        let msg = GaussianMessage::new(r_b, v_b).unwrap();
        let dec = denoiser_step(&msg, code, &BpConfig::default(), DEFAULT_EPSILON).unwrap();
        let a = clip(dec.posterior.variance / v_b);
        r = dec
            .posterior
            .mean
            .iter()
            .zip(msg.mean())
            .map(|(x, ri)| (x - a * ri) / (1.0 - a))
            .collect();
        v = a / (1.0 - a) * v_b;
        let mse = dec
            .posterior
            .mean
            .iter()
            .zip(x_true)
            .map(|(e, t)| (e - t) * (e - t))
            .sum::<f64>()
            / n as f64;
        out.push(ReferenceIteration {
            mse,
            v_x: v,
            posterior_mean: dec.posterior.mean,
        });
    }
    out
}
