//! Module outputs against brute-force references.

mod common;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dense_coupling, exhaustive_soft_bits, random_matrix, random_vec, trapezoid_moments};
use scvamp::channel::{HMode, TrialScenario};
use scvamp::coupling::{coupling_step, MixingMatrix};
use scvamp::denoiser::{bp_decode, builtin::builtin, denoiser_step, BpConfig, LdpcCode};
use scvamp::likelihood::{likelihood_step, ChannelSpec, Nonlinearity};
use scvamp::messages::{GaussianMessage, DEFAULT_EPSILON};
use scvamp::runner::{run, AlgorithmVariant, RunConfig};

fn extrinsic_by_hand(x: &[f64], var: f64, r: &[f64], v: f64) -> (Vec<f64>, f64) {
    let a = (var / v).clamp(DEFAULT_EPSILON, 1.0 - DEFAULT_EPSILON);
    let mean = x.iter().zip(r).map(|(x, r)| (x - a * r) / (1.0 - a)).collect();
    (mean, a / (1.0 - a) * v)
}

#[test]
fn coupling_extrinsics_match_dense_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let (m, n) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let h = random_matrix(m, n, &mut rng);
        let (vx, vw) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        let (rx, rw) = (random_vec(n, 1.0, &mut rng), random_vec(m, 1.0, &mut rng));
        let oracle = dense_coupling(&rx, vx, &rw, vw, &h);
        let out = coupling_step(
            &GaussianMessage::new(rx.clone(), vx).unwrap(),
            &GaussianMessage::new(rw.clone(), vw).unwrap(),
            &MixingMatrix::precompute(h).unwrap(),
            DEFAULT_EPSILON,
        )
        .unwrap();
        let (ex, evx) = extrinsic_by_hand(&oracle.x_mean, oracle.x_var, &rx, vx);
        let (ew, evw) = extrinsic_by_hand(&oracle.w_mean, oracle.w_var, &rw, vw);
        // Extrinsic means divide by 1 - alpha, which is as small as 1e-6.
        let tol = |e: f64| 1e-9 * (1.0 + e.abs());
        for (a, b) in out.ext_x.mean().iter().zip(&ex).chain(out.ext_w.mean().iter().zip(&ew)) {
            assert!((a - b).abs() <= tol(*b), "{a} vs {b}");
        }
        assert!((out.ext_x.variance() - evx).abs() <= tol(evx));
        assert!((out.ext_w.variance() - evw).abs() <= tol(evw));
    }
}

#[test]
fn tanh_likelihood_extrinsic_matches_dense_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s2 = 0.2;
    let v = 0.2;
    let spec = ChannelSpec::new(Nonlinearity::Tanh, s2, 50).unwrap();
    let r = random_vec(8, 1.5, &mut rng);
    let y: Vec<f64> = r.iter().map(|w| w.tanh() + rng.random_range(-0.5..0.5)).collect();
    let out = likelihood_step(&GaussianMessage::new(r.clone(), v).unwrap(), &y, &spec, DEFAULT_EPSILON).unwrap();

    let moments: Vec<(f64, f64)> = r.iter().zip(&y).map(|(&r, &y)| trapezoid_moments(r, v, y, s2, 400_001)).collect();
    let mean: Vec<f64> = moments.iter().map(|m| m.0).collect();
    let var = moments.iter().map(|m| m.1 - m.0 * m.0).sum::<f64>() / 8.0;
    let (ext, ext_var) = extrinsic_by_hand(&mean, var, &r, v);
    for (a, b) in out.extrinsic.mean().iter().zip(&ext) {
        assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
    }
    assert!((out.extrinsic.variance() - ext_var).abs() <= 1e-8 * ext_var);
}

#[test]
fn bp_is_exact_on_trees() {
    // Two checks sharing one variable: a tree, so BP converges to the
    // exact bitwise marginals.
    let code = LdpcCode::from_checks(5, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let llr: Vec<f64> = (0..5).map(|_| rng.random_range(-5.0..5.0)).collect();
        let soft: Vec<f64> = bp_decode(&code, &llr, &BpConfig::default())
            .llr
            .iter()
            .map(|l| (0.5 * l).tanh())
            .collect();
        for (a, b) in soft.iter().zip(exhaustive_soft_bits(&code, &llr)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn hamming_bp_agrees_with_map_at_high_reliability() {
    let code = LdpcCode::from_checks(
        7,
        vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let info: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
        let word = code.encode(&info).unwrap();
        // One weakly flipped position on an otherwise reliable word.
        let mut llr: Vec<f64> = word.iter().map(|&b| if b == 0 { 6.0 } else { -6.0 }).collect();
        let flip = rng.random_range(0..7);
        llr[flip] = -0.3 * llr[flip].signum();
        let map: Vec<u8> = exhaustive_soft_bits(&code, &llr).iter().map(|&m| u8::from(m < 0.0)).collect();
        let bp = scvamp::denoiser::hard_decision(&bp_decode(&code, &llr, &BpConfig::default()).llr);
        assert_eq!(map, word);
        assert_eq!(bp, map);
    }
}

#[test]
fn uncoded_denoiser_is_scalar_bpsk_posterior() {
    let code = LdpcCode::uncoded(6).unwrap();
    let r = vec![-1.3, -0.2, 0.0, 0.4, 0.9, 2.5];
    let v = 0.8;
    let out = denoiser_step(&GaussianMessage::new(r.clone(), v).unwrap(), &code, &BpConfig::default(), DEFAULT_EPSILON)
        .unwrap();
    let var = r.iter().map(|&ri| 1.0 - (ri / v).tanh().powi(2)).sum::<f64>() / 6.0;
    assert!((out.posterior.variance - var).abs() < 1e-14);
    let (ext, ext_var) = extrinsic_by_hand(&out.posterior.mean, var, &r, v);
    assert!(out.ext.mean().iter().zip(&ext).all(|(a, b)| (a - b).abs() < 1e-12));
    assert!((out.ext.variance() - ext_var).abs() < 1e-12);
}

#[test]
fn mismatched_variant_sees_linear_observation_message() {
    // The mismatched receiver assumes y = H x + z, which is exact here.
    let code = Arc::new(builtin("r12-n128").unwrap());
    let spec = ChannelSpec::from_snr_db(Nonlinearity::Identity, 5.0, 50).unwrap();
    let scenario = TrialScenario::draw(code, HMode::BlockDiagonal { block: 32 }, spec, 3).unwrap();
    let real = scenario.realize().unwrap();
    let config = RunConfig::default();
    let a = run(AlgorithmVariant::ScVamp3, &scenario, &real, &config).unwrap();
    let b = run(AlgorithmVariant::ScVamp2Mismatched, &scenario, &real, &config).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.hard_bits, b.hard_bits);
}
