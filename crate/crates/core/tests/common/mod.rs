//! Independent reference implementations used only by the tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Jx rebuilt from the angular-momentum ladder: `<m+1|Jx|m> = sqrt(j(j+1) - m(m+1)) / 2`.
pub fn jx_dense(n: usize) -> DMatrix<f64> {
    let j = (n as f64 - 1.0) / 2.0;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        let m = i as f64 - j;
        let c = (j * (j + 1.0) - m * (m + 1.0)).sqrt() / 2.0;
        h[(i, i + 1)] = c;
        h[(i + 1, i)] = c;
    }
    h
}

/// `exp(a)` by scaling and squaring with a Taylor series.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm: f64 = (0..n)
        .map(|r| (0..n).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scaled = a.map(|x| x / 2f64.powi(s));
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|x| x.norm()).fold(0.0, f64::max) < 1e-20 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i z h)` for a real symmetric generator.
pub fn propagator(h: &DMatrix<f64>, z: f64) -> DMatrix<C64> {
    expm(&h.map(|x| C64::new(0.0, -z * x)))
}

/// Integrate `dE/dz = -i h E` from 0 to `z` with an adaptive Dormand-Prince 5(4) pair.
pub fn rk45(h: &DMatrix<f64>, z: f64, e0: &[C64], tol: f64) -> Vec<C64> {
    let hc = h.map(|x| C64::new(x, 0.0));
    let f = |v: &[C64]| -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&hc * x).iter().map(|y| C64::new(y.im, -y.re)).collect()
    };
    let axpy = |base: &[C64], terms: &[(f64, &Vec<C64>)], step: f64| -> Vec<C64> {
        let mut out = base.to_vec();
        for (c, k) in terms {
            for (o, kv) in out.iter_mut().zip(k.iter()) {
                *o += kv * (step * c);
            }
        }
        out
    };
    let dir = z.signum();
    let mut t = 0.0;
    let mut step = 1e-3 * dir;
    let mut y = e0.to_vec();
    while (z - t) * dir > 0.0 {
        if (t + step - z) * dir > 0.0 {
            step = z - t;
        }
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &[(1.0 / 5.0, &k1)], step));
        let k3 = f(&axpy(&y, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)], step));
        let k4 = f(&axpy(
            &y,
            &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)],
            step,
        ));
        let k5 = f(&axpy(
            &y,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
            step,
        ));
        let k6 = f(&axpy(
            &y,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
            step,
        ));
        let y5 = axpy(
            &y,
            &[
                (35.0 / 384.0, &k1),
                (500.0 / 1113.0, &k3),
                (125.0 / 192.0, &k4),
                (-2187.0 / 6784.0, &k5),
                (11.0 / 84.0, &k6),
            ],
            step,
        );
        let k7 = f(&y5);
        let y4 = axpy(
            &y,
            &[
                (5179.0 / 57600.0, &k1),
                (7571.0 / 16695.0, &k3),
                (393.0 / 640.0, &k4),
                (-92097.0 / 339200.0, &k5),
                (187.0 / 2100.0, &k6),
                (1.0 / 40.0, &k7),
            ],
            step,
        );
        let err = y5.iter().zip(&y4).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if err <= tol {
            t += step;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
        };
        step *= factor;
    }
    y
}

/// Occupation-number basis of two bosons on `n` sites.
pub struct TwoBosonSpace {
    pub n: usize,
    pub states: Vec<Vec<u8>>,
}

impl TwoBosonSpace {
    pub fn new(n: usize) -> Self {
        let mut states = Vec::new();
        for k in 0..n {
            for l in k..n {
                let mut occ = vec![0u8; n];
                occ[k] += 1;
                occ[l] += 1;
                states.push(occ);
            }
        }
        Self { n, states }
    }

    pub fn index(&self, occ: &[u8]) -> usize {
        self.states.iter().position(|s| s == occ).expect("state in basis")
    }

    pub fn pair(&self, k: usize, l: usize) -> usize {
        let mut occ = vec![0u8; self.n];
        occ[k] += 1;
        occ[l] += 1;
        self.index(&occ)
    }

    /// Second quantized `sum_{p,q} h_{pq} a_p^dag a_q` restricted to two bosons.
    pub fn hamiltonian(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.states.len();
        let mut out = DMatrix::zeros(d, d);
        for (col, occ) in self.states.iter().enumerate() {
            for q in 0..self.n {
                if occ[q] == 0 {
                    continue;
                }
                for p in 0..self.n {
                    if h[(p, q)] == 0.0 {
                        continue;
                    }
                    let mut next = occ.clone();
                    let mut amp = (next[q] as f64).sqrt();
                    next[q] -= 1;
                    next[p] += 1;
                    amp *= (next[p] as f64).sqrt();
                    out[(self.index(&next), col)] += h[(p, q)] * amp;
                }
            }
        }
        out
    }

    /// `<a_k^dag a_l^dag a_l a_k>` and `<n_k>` of a two-boson state.
    pub fn observables(&self, psi: &[C64]) -> (DMatrix<f64>, Vec<f64>) {
        let mut gamma = DMatrix::zeros(self.n, self.n);
        let mut density = vec![0.0; self.n];
        for (s, occ) in self.states.iter().enumerate() {
            let p = psi[s].norm_sqr();
            for k in 0..self.n {
                density[k] += occ[k] as f64 * p;
                for l in 0..self.n {
                    let nk = occ[k] as f64;
                    let nl = occ[l] as f64;
                    let v = if k == l { nk * (nk - 1.0) } else { nk * nl };
                    gamma[(k, l)] += v * p;
                }
            }
        }
        (gamma, density)
    }
}

/// Brute-force two-photon evolution. `entangled` selects
/// `(|2_a> + |2_b>)/sqrt2` instead of `|1_a 1_b>`.
pub fn fock_evolve(n: usize, a: usize, b: usize, entangled: bool, z: f64) -> (DMatrix<f64>, Vec<f64>) {
    let space = TwoBosonSpace::new(n);
    let h2 = space.hamiltonian(&jx_dense(n));
    let u = propagator(&h2, z);
    let mut psi0 = nalgebra::DVector::<C64>::zeros(space.states.len());
    if entangled {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        psi0[space.pair(a, a)] = C64::new(r, 0.0);
        psi0[space.pair(b, b)] = C64::new(r, 0.0);
    } else {
        psi0[space.pair(a, b)] = C64::new(1.0, 0.0);
    }
    let psi = u * psi0;
    space.observables(psi.as_slice())
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// Natural log of a big integer without overflow.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rising factorial `(x)_k` of an integer.
fn pochhammer(x: i64, k: u32) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x + i))
}

/// Jacobi polynomial with integer parameters at the rational point `p/q`,
/// in exact arithmetic, from the expansion around `x = 1`:
/// `P_n = (1/n!) sum_m C(n,m) (a+b+n+1)_m (a+m+1)_{n-m} ((x-1)/2)^m`.
/// Denominators are cleared by `(2q)^n` so the sum runs over integers.
pub fn jacobi_exact(n: u32, a: i64, b: i64, p: i64, q: i64) -> BigRational {
    let mut sum = BigInt::zero();
    let mut binom = BigInt::one();
    for m in 0..=n {
        let t = pochhammer(a + b + n as i64 + 1, m) * pochhammer(a + m as i64 + 1, n - m);
        sum += &binom * t * BigInt::from(p - q).pow(m) * BigInt::from(2 * q).pow(n - m);
        binom = binom * BigInt::from(n - m) / BigInt::from(m + 1);
    }
    let den = BigInt::from(factorial(n as u64)) * BigInt::from(2 * q).pow(n);
    BigRational::new(sum, den)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Continuous FrFT of `exp(-(x-shift)^2 / 2w^2)` at `u` by direct quadrature
/// of the kernel `sqrt((1 - i cot a)/2pi) exp(i (cot a (x^2+u^2)/2 - x u / sin a))`.
/// The branch of the root is the one continuous from `a = 0+` on `(-pi, pi)`.
pub fn frft_quadrature(width: f64, shift: f64, alpha: f64, u: f64) -> C64 {
    let (s, c) = alpha.sin_cos();
    let cot = c / s;
    let pre = (C64::new(1.0, -cot) / (2.0 * std::f64::consts::PI)).sqrt();
    let lo = shift - 12.0 * width;
    let hi = shift + 12.0 * width;
    let steps = 40_000;
    let dx = (hi - lo) / steps as f64;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=steps {
        let x = lo + k as f64 * dx;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        let g = (-(x - shift).powi(2) / (2.0 * width * width)).exp();
        let phase = 0.5 * cot * (x * x + u * u) - x * u / s;
        acc += C64::from_polar(w * g, phase);
    }
    pre * acc * dx
}

/// `exp(-i z Jx)` for spin 1 written out by hand.
pub fn spin_one_propagator(z: f64) -> DMatrix<C64> {
    let (s, c) = z.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let a = C64::new((1.0 + c) / 2.0, 0.0);
    let b = C64::new(0.0, -s * r);
    let d = C64::new(-(1.0 - c) / 2.0, 0.0);
    DMatrix::from_row_slice(3, 3, &[a, b, d, b, C64::new(c, 0.0), b, d, b, a])
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `sum_s |C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)|`, the scale of
/// the rounding error of the finite-sum Jacobi evaluation.
pub fn jacobi_term_magnitude(n: u32, a: i64, b: i64, x: f64) -> f64 {
    let binom = |r: i64, k: u32| -> f64 { (0..k as i64).map(|i| (r - i) as f64 / (i + 1) as f64).product::<f64>() };
    let lo = ((x - 1.0) / 2.0).abs();
    let hi = ((x + 1.0) / 2.0).abs();
    (0..=n)
        .map(|s| {
            (binom(n as i64 + a, n - s) * binom(n as i64 + b, s)).abs() * lo.powi(s as i32) * hi.powi((n - s) as i32)
        })
        .sum()
}
