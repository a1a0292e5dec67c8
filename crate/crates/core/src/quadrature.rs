//! Gauss–Hermite rules for integrals against the weight `exp(-t^2)`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 200;

/// Nodes and weights of a `Q`-point Gauss–Hermite rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `sum_j w_j g(t_j)`, approximating `∫ g(t) exp(-t^2) dt`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }
}

/// Builds the `order`-point rule. Roots of the Jacobi matrix (Golub–Welsch)
/// seed a Newton polish on the orthonormal Hermite recurrence, which also
/// yields weights with full relative accuracy in the tails.
pub fn gh_rule(order: usize) -> Result<QuadratureRule> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {order} outside [{MIN_ORDER}, {MAX_ORDER}]"
        )));
    }
    let n = order;
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen("Jacobi matrix eigensolver did not converge".into()))?;
    let mut seeds: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    seeds.sort_by(f64::total_cmp);

    // Polish the non-negative half and mirror it.
    let half = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..half {
        let mut z = seeds[n - 1 - i].abs();
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
        } else {
            for _ in 0..20 {
                let (p, dp) = hermite_orthonormal(n, z);
                let step = p / dp;
                z -= step;
                if step.abs() <= 4.0 * f64::EPSILON * z.abs().max(1.0) {
                    break;
                }
            }
        }
        let (_, dp) = hermite_orthonormal(n, z);
        let weight = 2.0 / (dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if x.windows(2).any(|p| p[0] >= p[1]) || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Eigen(format!("Gauss-Hermite rule of order {order} is degenerate")));
    }
    let log_weights = w.iter().map(|v| v.ln()).collect();
    Ok(QuadratureRule {
        nodes: x,
        weights: w,
        log_weights,
    })
}

/// Orthonormal Hermite polynomial of degree `n` at `z` and its derivative,
/// scaled so that `2 / dp^2` is the Gauss–Hermite weight.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64) {
    const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}
