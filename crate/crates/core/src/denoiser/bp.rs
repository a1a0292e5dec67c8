use super::LdpcCode;

/// Saturation applied to channel LLRs.
pub const LLR_MAX: f64 = 30.0;
/// Check-node clamp `|tanh(L/2)| <= 1 - TANH_CLAMP`, which keeps every check
/// message below `2 atanh(1 - 1e-12) ≈ 28.3`.
pub const TANH_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpConfig {
    pub iterations: usize,
    /// Stop as soon as the hard decisions satisfy every check.
    pub early_stop: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        Self {
            iterations: 20,
            early_stop: false,
        }
    }
}

impl BpConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    /// A-posteriori LLRs `L_in + sum of incoming check messages`.
    pub llr: Vec<f64>,
    pub iterations: usize,
}

pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_MAX, LLR_MAX)
}

/// Hard decision with the convention `L >= 0 -> bit 0`.
pub fn hard_decision(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}

/// Flooding sum-product decoding. Input LLRs are clamped to `±LLR_MAX`; no
/// state survives between calls.
pub fn bp_decode(code: &LdpcCode, llr_in: &[f64], config: &BpConfig) -> BpOutput {
    assert_eq!(llr_in.len(), code.n(), "LLR length must match the code");
    let input: Vec<f64> = llr_in.iter().map(|&l| clamp_llr(l)).collect();
    let checks = code.checks();
    let mut offsets = Vec::with_capacity(checks.len() + 1);
    offsets.push(0);
    for c in checks {
        offsets.push(offsets.last().unwrap() + c.len());
    }
    let edge_var: Vec<usize> = checks.iter().flatten().copied().collect();
    let edges = edge_var.len();

    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| input[v]).collect();
    let mut c2v = vec![0.0; edges];
    let mut app = input.clone();
    let mut scratch = Vec::new();
    let mut done = 0;
    for _ in 0..config.iterations {
        for c in 0..checks.len() {
            let (lo, hi) = (offsets[c], offsets[c + 1]);
            check_update(&v2c[lo..hi], &mut c2v[lo..hi], &mut scratch);
        }
        app.copy_from_slice(&input);
        for (e, &v) in edge_var.iter().enumerate() {
            app[v] += c2v[e];
        }
        for (e, &v) in edge_var.iter().enumerate() {
            v2c[e] = app[v] - c2v[e];
        }
        done += 1;
        if config.early_stop && code.is_codeword(&hard_decision(&app)) {
            break;
        }
    }
    BpOutput {
        llr: app,
        iterations: done,
    }
}

/// Tanh rule with prefix and suffix products so every outgoing message
/// excludes its own edge without dividing.
fn check_update(incoming: &[f64], outgoing: &mut [f64], suffix: &mut Vec<f64>) {
    let bound = 1.0 - TANH_CLAMP;
    let t = |l: f64| (0.5 * l).tanh().clamp(-bound, bound);
    let d = incoming.len();
    suffix.clear();
    suffix.resize(d + 1, 1.0);
    for i in (0..d).rev() {
        suffix[i] = suffix[i + 1] * t(incoming[i]);
    }
    let mut prefix = 1.0;
    for i in 0..d {
        let p = (prefix * suffix[i + 1]).clamp(-bound, bound);
        outgoing[i] = 2.0 * p.atanh();
        prefix *= t(incoming[i]);
    }
}
