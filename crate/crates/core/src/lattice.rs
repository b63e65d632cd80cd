//! Jx coupling matrices and their spectral decomposition.
//!
//! Sites carry two labels: the machine index `i = 0..N-1` and the physical
//! label `m = i - j`, which is a half-integer when `N` is even. The same map
//! is used for eigenmodes, whose column `c` holds the eigenvalue `c - j`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::specfun::{jacobi, ln_fact, JacobiParams};

/// Lattice size and coupling scale. `kappa0` is in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    size: usize,
    kappa0: f64,
}

impl LatticeSpec {
    pub fn new(size: usize, kappa0: f64) -> Result<Self> {
        if size < 2 {
            return usage(format!("lattice needs at least 2 sites, got {size}"));
        }
        if !(kappa0.is_finite() && kappa0 > 0.0) {
            return usage(format!("kappa0 must be positive and finite, got {kappa0}"));
        }
        Ok(Self { size, kappa0 })
    }

    /// Lattice of `size` sites with unit coupling scale.
    pub fn with_size(size: usize) -> Result<Self> {
        Self::new(size, 1.0)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    /// `2j = N - 1`.
    pub fn two_j(&self) -> usize {
        self.size - 1
    }

    /// Spin label `j = (N - 1) / 2`.
    pub fn j(&self) -> f64 {
        self.two_j() as f64 / 2.0
    }

    /// `gamma = j (j + 1) = (N^2 - 1) / 4`.
    pub fn gamma(&self) -> f64 {
        let n = self.size as f64;
        (n * n - 1.0) / 4.0
    }

    /// Physical label of site index `i`.
    pub fn label(&self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    pub fn labels(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(|i| self.label(i))
    }

    /// Site index of a physical label, which must be one of `-j, -j+1, ..., j`.
    pub fn index_of(&self, label: f64) -> Result<usize> {
        let offset = label + self.j();
        let rounded = offset.round();
        if !offset.is_finite() || (offset - rounded).abs() > 1e-9 || rounded < 0.0 {
            return usage(format!(
                "site label {label} is not on the lattice (labels run from {} to {} in unit steps)",
                -self.j(),
                self.j()
            ));
        }
        let index = rounded as usize;
        if index >= self.size {
            return usage(format!(
                "site label {label} is outside the lattice (|m| <= {})",
                self.j()
            ));
        }
        Ok(index)
    }

    /// Propagation length in cm at which transform order `z` is reached.
    pub fn physical_length(&self, z: f64) -> f64 {
        z / self.kappa0
    }

    /// Transform order reached after `length_cm` of propagation.
    pub fn order_at_length(&self, length_cm: f64) -> f64 {
        length_cm * self.kappa0
    }
}

/// Symmetric tridiagonal Jx matrix with zero diagonal, in units of `kappa0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JxMatrix {
    spec: LatticeSpec,
    offdiag: Vec<f64>,
}

impl JxMatrix {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.size()
    }

    /// Coupling between sites `i` and `i + 1`.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, &c) in self.offdiag.iter().enumerate() {
            m[(i, i + 1)] = c;
            m[(i + 1, i)] = c;
        }
        m
    }

    /// `Jx * v` for a real vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (i, &c) in self.offdiag.iter().enumerate() {
            out[i] += c * v[i + 1];
            out[i + 1] += c * v[i];
        }
        out
    }
}

/// Couplings `c_i = sqrt(j(j+1) - m(m+1)) / 2` with `m = i - j`.
pub fn build_jx(spec: &LatticeSpec) -> JxMatrix {
    let two_j = spec.two_j() as f64;
    // j(j+1) - m(m+1) = (j - m)(j + m + 1) = (2j - i)(i + 1), exact in integers.
    let offdiag = (0..spec.two_j())
        .map(|i| 0.5 * ((two_j - i as f64) * (i as f64 + 1.0)).sqrt())
        .collect();
    JxMatrix { spec: *spec, offdiag }
}

/// The equidistant ladder `-j, -j+1, ..., j`.
pub fn exact_eigenvalues(spec: &LatticeSpec) -> Vec<f64> {
    spec.labels().collect()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (as columns).
///
/// Column `c` is the mode with eigenvalue closest to `c - j`; every column
/// has a positive component at the first site `m = -j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    spec: LatticeSpec,
    eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralBasis {
    /// Basis assembled from the closed-form eigenvectors.
    pub fn analytic(spec: &LatticeSpec) -> Self {
        let n = spec.size();
        let mut vectors = DMatrix::zeros(n, n);
        for col in 0..n {
            let v = analytic_column(spec, col);
            vectors.set_column(col, &DVector::from_vec(v));
        }
        Self {
            spec: *spec,
            eigenvalues: exact_eigenvalues(spec),
            vectors,
        }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.size()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector matrix, `vectors[(n, m)] = u_n^{(m)}`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Component of mode `mode` on site `site` (both machine indices).
    pub fn component(&self, site: usize, mode: usize) -> f64 {
        self.vectors[(site, mode)]
    }

    pub fn column(&self, mode: usize) -> Vec<f64> {
        self.vectors.column(mode).iter().copied().collect()
    }

    /// Largest entry of `|U^T U - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.vectors.transpose() * &self.vectors;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }
}

/// Raw closed-form eigenvector for mode index `col`, before normalization:
///
/// ```text
/// u_n^{(m)} = 2^n sqrt((j+n)!(j-n)! / ((j+m)!(j-m)!)) P_{j+n}^{(m-n, -m-n)}(0)
/// ```
fn analytic_column_raw(spec: &LatticeSpec, col: usize) -> Vec<f64> {
    let two_j = spec.two_j();
    let j = spec.j();
    let mode_norm = ln_fact(col) + ln_fact(two_j - col);
    (0..spec.size())
        .map(|site| {
            let n = site as f64 - j;
            let log_scale = n * std::f64::consts::LN_2 + 0.5 * (ln_fact(site) + ln_fact(two_j - site) - mode_norm);
            let params = JacobiParams {
                degree: site,
                alpha: col as f64 - site as f64,
                beta: two_j as f64 - col as f64 - site as f64,
            };
            log_scale.exp() * jacobi(params, 0.0)
        })
        .collect()
}

fn analytic_column(spec: &LatticeSpec, col: usize) -> Vec<f64> {
    let mut v = analytic_column_raw(spec, col);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    if v[0] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Closed-form eigenvector for eigenvalue `m` (a label in `-j..j`), unit norm,
/// first component positive.
pub fn analytic_eigenvector(spec: &LatticeSpec, m: f64) -> Result<Vec<f64>> {
    let col = spec.index_of(m)?;
    Ok(analytic_column(spec, col))
}

/// Fix the sign of an eigenvector of `jx` so that its first component is
/// positive. Far from the band centre the edge component can sink below
/// rounding noise; the sign is then read off the first component that is
/// resolved, using the edge-started recurrence (which is stable while the
/// components grow away from the edge).
fn orient(v: &mut [f64], jx: &JxMatrix, beta: f64) {
    let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let threshold = peak * 1e-6;
    let anchor = v.iter().position(|x| x.abs() >= threshold).unwrap_or(0);
    let c = jx.offdiag();
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    for i in 0..anchor {
        let back = if i > 0 { c[i - 1] * prev } else { 0.0 };
        let next = (beta * cur - back) / c[i];
        prev = cur;
        cur = next;
    }
    if (cur >= 0.0) != (v[anchor] >= 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of the Jx matrix with a dense symmetric solver.
pub fn numeric_basis(jx: &JxMatrix) -> Result<SpectralBasis> {
    let n = jx.dim();
    let dense = jx.to_dense();
    let eig = dense.clone().try_symmetric_eigen(1e-15, 10_000).ok_or_else(|| {
        Error::Numeric(format!(
            "symmetric eigensolver did not converge for N = {n} (max coupling {:.6e}, spectral radius bound {:.6e})",
            jx.offdiag().iter().fold(0.0_f64, |a, &c| a.max(c)),
            2.0 * jx.offdiag().iter().fold(0.0_f64, |a, &c| a.max(c)),
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let beta = eig.eigenvalues[src];
        let mut v: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        orient(&mut v, jx, beta);
        let image = jx.apply(&v);
        let residual = image
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - beta * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual > 1e-10 * (1.0 + n as f64) {
            return Err(Error::Numeric(format!(
                "eigenpair {col} of N = {n} has residual {residual:.3e}"
            )));
        }
        eigenvalues.push(beta);
        vectors.set_column(col, &DVector::from_vec(v));
    }
    Ok(SpectralBasis {
        spec: *jx.spec(),
        eigenvalues,
        vectors,
    })
}

/// Normalization constant of the closed-form eigenvectors, fitted against the
/// numeric solver on the top mode (`m = j`). Its fitted value is 1: the
/// printed eigenvectors are already unit vectors.
pub const ANALYTIC_NORMALIZATION: f64 = 1.0;

/// Outcome of comparing the closed-form eigenvectors with the numeric solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconciliation {
    /// Constant `c` minimizing `|numeric - c * raw|` on the top mode.
    pub fitted_constant: f64,
    /// Largest componentwise deviation over all modes after applying
    /// [`ANALYTIC_NORMALIZATION`] to the raw closed form.
    pub max_deviation: f64,
}

pub fn reconcile_analytic(spec: &LatticeSpec) -> Result<Reconciliation> {
    let numeric = numeric_basis(&build_jx(spec))?;
    let top = spec.two_j();
    let raw = analytic_column_raw(spec, top);
    let target = numeric.column(top);
    let dot: f64 = raw.iter().zip(&target).map(|(a, b)| a * b).sum();
    let raw_sq: f64 = raw.iter().map(|a| a * a).sum();
    let fitted_constant = dot / raw_sq;

    let mut max_deviation = 0.0_f64;
    for col in 0..spec.size() {
        let raw = analytic_column_raw(spec, col);
        for (site, r) in raw.iter().enumerate() {
            let d = (ANALYTIC_NORMALIZATION * r - numeric.component(site, col)).abs();
            max_deviation = max_deviation.max(d);
        }
    }
    Ok(Reconciliation {
        fitted_constant,
        max_deviation,
    })
}
