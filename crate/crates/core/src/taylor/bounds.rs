//! Scalar majorants for the Taylor coefficients.
//!
//! With `a = ‖A‖` and `b = ‖B‖` the operator polynomials generating the
//! coefficients obey `‖P_n‖ ≤ p_n`, where `p_0 = 1`, `p_1 = a` and
//! `p_{n+1} = a·p_n + n·b·p_{n-1}`. Hence `‖ψ_n‖ ≤ (p_n / n!)·‖ψ_0‖`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSequence {
    pub a: f64,
    pub b: f64,
    /// `values[n] = p_n / n!`
    pub values: Vec<f64>,
}

impl BoundSequence {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }
}

/// `p_n / n!` for `n = 0..=n_max` via the scaled recurrence
/// `q_{n+1} = (a·q_n + b·q_{n-1}) / (n + 1)`.
pub fn coefficient_bound_recurrence(a: f64, b: f64, n_max: usize) -> BoundSequence {
    let mut values = Vec::with_capacity(n_max + 1);
    values.push(1.0);
    if n_max >= 1 {
        values.push(a);
    }
    for n in 1..n_max {
        let next = (a * values[n] + b * values[n - 1]) / (n + 1) as f64;
        values.push(next);
    }
    BoundSequence { a, b, values }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Closed form `Σ_{k=0}^{⌊n/2⌋} a^{n-2k} b^k / (k! (n-2k)! 2^k)`.
///
/// The first term `aⁿ/n!` is formed in log space; later terms follow from
/// the ratio `t_{k+1}/t_k = (b / 2a²)·(n-2k)(n-2k-1)/(k+1)`.
pub fn coefficient_bound_closed(a: f64, b: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let ratio = b / (2.0 * a * a);
    let mut term = (n as f64 * a.ln() - ln_factorial(n)).exp();
    let mut sum = term;
    for k in 0..n / 2 {
        let m = (n - 2 * k) as f64;
        term *= ratio * m * (m - 1.0) / (k + 1) as f64;
        sum += term;
    }
    sum
}

/// Right-hand side of the root estimate
/// `(p_n/n!)^{1/n} ≤ a·(1 + b/2a²)^{1/2} / (⌊n/3⌋!)^{1/n}`.
pub fn decay_envelope(a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 1, "envelope is defined for n ≥ 1");
    let lnf = ln_factorial(n / 3) / n as f64;
    a * (1.0 + b / (2.0 * a * a)).sqrt() * (-lnf).exp()
}

/// Smallest `n ≥ 1` with `‖ψ_n‖^{1/n} ≤ eps`, the root-test stopping index.
pub fn root_test_index(norms: &[f64], eps: f64) -> Option<usize> {
    norms
        .iter()
        .enumerate()
        .skip(1)
        .find(|(n, &v)| v.powf(1.0 / *n as f64) <= eps)
        .map(|(n, _)| n)
}
