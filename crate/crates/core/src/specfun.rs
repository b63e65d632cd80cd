//! Special functions used by the closed forms: log-factorials, Jacobi
//! polynomials with arbitrary real parameters and normalized Hermite-Gauss
//! functions.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const TABLE_LEN: usize = 1024;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0_f64;
        table.push(0.0);
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            table.push(acc);
        }
        table
    })
}

/// `ln(k!)` for a machine index. Exact running sum below 1024, Stirling
/// series above.
pub(crate) fn ln_fact(k: usize) -> f64 {
    if k < TABLE_LEN {
        return log_factorial_table()[k];
    }
    let x = k as f64 + 1.0;
    // ln Gamma(x) for x > 1000: the series converges to full precision with three terms.
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Natural logarithm of `k!`.
pub fn log_factorial(k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::Domain(format!("log_factorial of negative integer {k}")));
    }
    Ok(ln_fact(k as usize))
}

/// Degree and parameters of a Jacobi polynomial `P_n^{(alpha, beta)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub degree: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(degree: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::Domain(format!(
                "Jacobi parameters must be finite (alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(Self { degree, alpha, beta })
    }
}

/// Generalized binomial coefficient `C(r, k)` for real `r`, as a falling
/// product. Zero whenever `r` is a nonnegative integer smaller than `k`.
pub(crate) fn gen_binomial(r: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 1..=k {
        acc *= (r - (k - i) as f64) / i as f64;
    }
    acc
}

/// Jacobi polynomial by the explicit finite sum
///
/// ```text
/// P_n^{(a,b)}(x) = sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)
/// ```
///
/// which is a polynomial identity in `a` and `b` and therefore stays valid for
/// negative integer parameters, where the three-term recurrence breaks down.
pub fn jacobi(params: JacobiParams, x: f64) -> f64 {
    let JacobiParams { degree: n, alpha, beta } = params;
    if n == 0 {
        return 1.0;
    }
    let lower = 0.5 * (x - 1.0);
    let upper = 0.5 * (x + 1.0);
    let nf = n as f64;
    let mut sum = 0.0;
    for s in 0..=n {
        let c = gen_binomial(nf + alpha, n - s) * gen_binomial(nf + beta, s);
        if c == 0.0 {
            continue;
        }
        sum += c * lower.powi(s as i32) * upper.powi((n - s) as i32);
    }
    sum
}

/// Normalized Hermite-Gauss function
/// `psi_n(x) = (2^n n! sqrt(pi))^(-1/2) exp(-x^2/2) H_n(x)`, built with the
/// upward recurrence on the normalized functions so `H_n` never overflows.
pub fn hermite_gauss(n: usize, x: f64) -> f64 {
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 0 {
        return psi0;
    }
    let mut prev = psi0;
    let mut cur = std::f64::consts::SQRT_2 * x * psi0;
    for k in 1..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}
