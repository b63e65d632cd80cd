//! The transform engine: Green functions, propagation of classical fields,
//! input synthesis and intensity scans.
//!
//! Evolution follows `i dE/dZ = Jx E`, so `E(Z) = exp(-i Z Jx) E(0)` and every
//! mode picks up the phase `exp(-i beta Z)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::lattice::{build_jx, numeric_basis, LatticeSpec, SpectralBasis};
use crate::specfun::{jacobi, ln_fact, JacobiParams};
use crate::C64;

/// Complex mode amplitudes over the lattice sites, indexed `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    amplitudes: Vec<C64>,
}

impl Field {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return usage("field amplitudes must be finite");
        }
        Ok(Self { amplitudes })
    }

    /// Unit excitation of site index `site`.
    pub fn site(size: usize, site: usize) -> Result<Self> {
        if site >= size {
            return usage(format!("site index {site} out of range for {size} sites"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); size];
        amplitudes[site] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Rescaled to unit L2 norm. Fails on the zero field.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return usage("cannot normalize the zero field");
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(self)
    }
}

/// Transfer matrix `G(Z)`; entry `(p, q)` is the amplitude at site `p` for a
/// unit excitation of site `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenMatrix {
    order: f64,
    entries: DMatrix<C64>,
}

impl GreenMatrix {
    pub fn from_entries(order: f64, entries: DMatrix<C64>) -> Self {
        Self { order, entries }
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, p: usize, q: usize) -> C64 {
        self.entries[(p, q)]
    }

    pub fn apply(&self, field: &Field) -> Result<Field> {
        check_dim(self.dim(), field)?;
        let out = (0..self.dim())
            .map(|p| {
                field
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(q, a)| self.entries[(p, q)] * a)
                    .sum()
            })
            .collect();
        Field::new(out)
    }

    /// Largest entry of `|G^dagger G - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.entries.adjoint() * &self.entries;
        (gram - DMatrix::<C64>::identity(n, n))
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()))
    }
}

fn check_dim(n: usize, field: &Field) -> Result<()> {
    if field.len() != n {
        return usage(format!("field has {} sites but the lattice has {n}", field.len()));
    }
    Ok(())
}

/// `(-i)^k` for any integer `k`.
pub(crate) fn neg_i_pow(k: isize) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// Spectral Green function `G_{p,q}(Z) = sum_r u_q^{(r)} u_p^{(r)} exp(-i beta_r Z)`.
pub fn green_spectral(basis: &SpectralBasis, z: f64) -> GreenMatrix {
    let n = basis.dim();
    let phases: Vec<C64> = basis
        .eigenvalues()
        .iter()
        .map(|&b| C64::from_polar(1.0, -b * z))
        .collect();
    let u = basis.vectors();
    let entries = DMatrix::from_fn(n, n, |p, q| (0..n).map(|r| phases[r] * (u[(q, r)] * u[(p, r)])).sum());
    GreenMatrix { order: z, entries }
}

/// Below this magnitude of `sin(Z/2)` or `cos(Z/2)`, a negative power of it in
/// the closed form is replaced by the spectral sum.
pub const SINGULAR_TOLERANCE: f64 = 1e-3;

/// Closed-form entry for site indices, `None` at the singular points.
fn closed_entry(spec: &LatticeSpec, p: usize, q: usize, z: f64) -> Option<C64> {
    let two_j = spec.two_j() as isize;
    let sin_exp = q as isize - p as isize;
    let cos_exp = two_j - q as isize - p as isize;
    let (s, c) = (0.5 * z).sin_cos();
    if (sin_exp < 0 && s.abs() < SINGULAR_TOLERANCE) || (cos_exp < 0 && c.abs() < SINGULAR_TOLERANCE) {
        return None;
    }
    let two_j = spec.two_j();
    let scale = (0.5 * (ln_fact(p) + ln_fact(two_j - p) - ln_fact(q) - ln_fact(two_j - q))).exp();
    let params = JacobiParams {
        degree: p,
        alpha: sin_exp as f64,
        beta: cos_exp as f64,
    };
    let value = scale * s.powi(sin_exp as i32) * c.powi(cos_exp as i32) * jacobi(params, z.cos());
    Some(neg_i_pow(sin_exp) * value)
}

fn spectral_entry(basis: &SpectralBasis, p: usize, q: usize, z: f64) -> C64 {
    basis
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(r, &b)| C64::from_polar(basis.component(q, r) * basis.component(p, r), -b * z))
        .sum()
}

/// Closed-form Green function
///
/// ```text
/// G_{p,q}(Z) = (-i)^{q-p} sqrt((j+p)!(j-p)! / ((j+q)!(j-q)!))
///              sin(Z/2)^{q-p} cos(Z/2)^{-q-p} P_{j+p}^{(q-p, -q-p)}(cos Z)
/// ```
///
/// for site labels `p`, `q`. Near the points where a negative power of a
/// vanishing sine or cosine appears (see [`SINGULAR_TOLERANCE`]) the value is
/// taken from the spectral sum instead.
pub fn green_closed(spec: &LatticeSpec, p: f64, q: f64, z: f64) -> Result<C64> {
    let (ip, iq) = (spec.index_of(p)?, spec.index_of(q)?);
    if !z.is_finite() {
        return usage(format!("transform order must be finite, got {z}"));
    }
    match closed_entry(spec, ip, iq, z) {
        Some(v) => Ok(v),
        None => {
            let basis = numeric_basis(&build_jx(spec))?;
            Ok(spectral_entry(&basis, ip, iq, z))
        }
    }
}

/// Whole closed-form Green matrix; the eigenbasis for fallback entries is
/// built at most once.
pub fn green_closed_matrix(spec: &LatticeSpec, z: f64) -> Result<GreenMatrix> {
    if !z.is_finite() {
        return usage(format!("transform order must be finite, got {z}"));
    }
    let n = spec.size();
    let mut fallback: Option<SpectralBasis> = None;
    let mut entries = DMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            entries[(p, q)] = match closed_entry(spec, p, q, z) {
                Some(v) => v,
                None => {
                    if fallback.is_none() {
                        fallback = Some(numeric_basis(&build_jx(spec))?);
                    }
                    spectral_entry(fallback.as_ref().unwrap(), p, q, z)
                }
            };
        }
    }
    Ok(GreenMatrix { order: z, entries })
}

/// Green function at the Fourier plane, `G_{p,q}(pi/2) = (-i)^{q-p} u_p^{(q)}`,
/// for site labels `p`, `q`.
pub fn green_quarter(basis: &SpectralBasis, p: f64, q: f64) -> Result<C64> {
    let spec = basis.spec();
    let (ip, iq) = (spec.index_of(p)?, spec.index_of(q)?);
    Ok(neg_i_pow(iq as isize - ip as isize) * basis.component(ip, iq))
}

/// Evolve `field` to transform order `z`.
pub fn propagate(field: &Field, basis: &SpectralBasis, z: f64) -> Result<Field> {
    let n = basis.dim();
    check_dim(n, field)?;
    if !z.is_finite() {
        return usage(format!("transform order must be finite, got {z}"));
    }
    let u = basis.vectors();
    let amps = field.amplitudes();
    let coeffs: Vec<C64> = (0..n)
        .map(|r| {
            let c: C64 = (0..n).map(|k| amps[k] * u[(k, r)]).sum();
            c * C64::from_polar(1.0, -basis.eigenvalues()[r] * z)
        })
        .collect();
    let out = (0..n).map(|k| (0..n).map(|r| coeffs[r] * u[(k, r)]).sum()).collect();
    Field::new(out)
}

/// Discrete fractional Fourier transform of the given order. Order `pi/2` is
/// the Fourier plane; the family is additive in the order.
pub fn dfrft(field: &Field, basis: &SpectralBasis, order: f64) -> Result<Field> {
    propagate(field, basis, order)
}

/// Launch profile for classical experiments. Centers and sites are labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputProfile {
    /// Gaussian with intensity FWHM `fwhm` (in sites), times `exp(i ramp m)`.
    Gaussian {
        center: f64,
        fwhm: f64,
        #[serde(default)]
        phase_ramp: f64,
    },
    /// `width` consecutive sites of equal amplitude centered on `center`.
    Tophat {
        center: f64,
        width: usize,
        #[serde(default)]
        phase_ramp: f64,
    },
    SingleSite {
        site: f64,
    },
    Custom {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl InputProfile {
    pub fn phase_ramp(&self) -> f64 {
        match self {
            Self::Gaussian { phase_ramp, .. } | Self::Tophat { phase_ramp, .. } => *phase_ramp,
            _ => 0.0,
        }
    }

    /// The same profile with its phase ramp removed.
    pub fn without_ramp(&self) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::Gaussian { phase_ramp, .. } | Self::Tophat { phase_ramp, .. } => *phase_ramp = 0.0,
            _ => {}
        }
        out
    }
}

/// Sites covered by a top-hat of `width` sites centered on label `center`.
fn tophat_support(spec: &LatticeSpec, center: f64, width: usize) -> Result<Vec<usize>> {
    if width == 0 {
        return usage("top-hat width must be at least one site");
    }
    let first = center - (width as f64 - 1.0) / 2.0;
    let start = spec.index_of(first).map_err(|_| {
        Error::Usage(format!(
            "top-hat of width {width} centered at {center} does not fit the lattice (labels {}..{})",
            -spec.j(),
            spec.j()
        ))
    })?;
    if start + width > spec.size() {
        return usage(format!(
            "top-hat of width {width} centered at {center} runs past the lattice edge {}",
            spec.j()
        ));
    }
    Ok((start..start + width).collect())
}

/// Build a normalized input field from a profile description.
pub fn make_input(spec: &LatticeSpec, profile: &InputProfile) -> Result<Field> {
    let n = spec.size();
    let ramp = |ramp: f64, i: usize| C64::from_polar(1.0, ramp * spec.label(i));
    let amps: Vec<C64> = match profile {
        InputProfile::Gaussian {
            center,
            fwhm,
            phase_ramp,
        } => {
            if !(fwhm.is_finite() && *fwhm > 0.0) {
                return usage(format!("gaussian FWHM must be positive, got {fwhm}"));
            }
            if !(center.is_finite() && center.abs() <= spec.j()) {
                return usage(format!(
                    "gaussian center {center} lies outside the lattice (|m| <= {})",
                    spec.j()
                ));
            }
            let k = 4.0 * std::f64::consts::LN_2 / (2.0 * fwhm * fwhm);
            (0..n)
                .map(|i| {
                    let d = spec.label(i) - center;
                    ramp(*phase_ramp, i) * (-d * d * k).exp()
                })
                .collect()
        }
        InputProfile::Tophat {
            center,
            width,
            phase_ramp,
        } => {
            let support = tophat_support(spec, *center, *width)?;
            (0..n)
                .map(|i| {
                    if support.contains(&i) {
                        ramp(*phase_ramp, i)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        InputProfile::SingleSite { site } => {
            return Field::site(n, spec.index_of(*site)?);
        }
        InputProfile::Custom { re, im } => {
            if re.len() != n || !(im.is_empty() || im.len() == n) {
                return usage(format!(
                    "custom profile needs {n} real parts and 0 or {n} imaginary parts, got {} and {}",
                    re.len(),
                    im.len()
                ));
            }
            re.iter()
                .enumerate()
                .map(|(i, &r)| C64::new(r, im.get(i).copied().unwrap_or(0.0)))
                .collect()
        }
    };
    Field::new(amps)?.normalized()
}

/// Site intensities `|E_n(Z)|^2` for each order on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub z: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

pub fn zscan(field: &Field, basis: &SpectralBasis, z_grid: &[f64]) -> Result<IntensityMap> {
    let rows = z_grid
        .iter()
        .map(|&z| propagate(field, basis, z).map(|f| f.intensities()))
        .collect::<Result<Vec<_>>>()?;
    Ok(IntensityMap {
        z: z_grid.to_vec(),
        rows,
    })
}

/// Continuous fractional Fourier transform of `exp(-(x - shift)^2 / (2 width^2))`
/// at angle `order`, sampled on `x_grid`.
///
/// Uses the kernel
/// `sqrt((1 - i cot a) / 2 pi) exp(i cot(a) (x^2 + u^2) / 2 - i u x / sin a)`,
/// whose eigenvalue on the n-th Hermite-Gauss mode is `exp(-i n a)`; the
/// Gaussian integral is done in closed form. The order is reduced modulo
/// `2 pi`; multiples of `2 pi` return the input.
pub fn continuous_frft_gaussian(width: f64, shift: f64, order: f64, x_grid: &[f64]) -> Result<Vec<C64>> {
    if !(width.is_finite() && width > 0.0) {
        return usage(format!("gaussian width must be positive, got {width}"));
    }
    if !(shift.is_finite() && order.is_finite()) {
        return usage("shift and order must be finite");
    }
    let tau = 2.0 * std::f64::consts::PI;
    // Reduce into (-pi, pi], the range where exp(i alpha / 2) is the
    // principal root in the prefactor.
    let mut alpha = order.rem_euclid(tau);
    if alpha > std::f64::consts::PI {
        alpha -= tau;
    }
    let sin_a = alpha.sin();
    let input = |x: f64| C64::new((-(x - shift).powi(2) / (2.0 * width * width)).exp(), 0.0);
    if sin_a.abs() < 1e-12 {
        if alpha.abs() < 1.0 {
            return Ok(x_grid.iter().map(|&x| input(x)).collect());
        }
        return Err(Error::Domain(format!(
            "the fractional Fourier kernel degenerates at order {order} (an odd multiple of pi); \
             the exact limit there is the parity map f(x) -> f(-x)"
        )));
    }
    let cot = alpha.cos() / sin_a;
    let csc = 1.0 / sin_a;
    let i = C64::new(0.0, 1.0);
    let sgn = if sin_a > 0.0 { 1.0 } else { -1.0 };
    let prefactor =
        C64::from_polar(1.0, -(std::f64::consts::FRAC_PI_4 * sgn - alpha / 2.0)) / (sin_a.abs() * tau).sqrt();

    // Integrand exp(-A x^2 + B x + C) integrates to sqrt(pi / A) exp(B^2 / 4A + C).
    let a = C64::new(0.5 / (width * width), -0.5 * cot);
    let root = (C64::new(std::f64::consts::PI, 0.0) / a).sqrt();
    let c = -shift * shift / (2.0 * width * width);
    Ok(x_grid
        .iter()
        .map(|&u| {
            let b = C64::new(shift / (width * width), -csc * u);
            let chirp = (i * (0.5 * cot * u * u)).exp();
            prefactor * chirp * root * (b * b / (4.0 * a) + c).exp()
        })
        .collect())
}

/// Intensity-weighted mean site label.
pub fn intensity_centroid(spec: &LatticeSpec, intensities: &[f64]) -> f64 {
    let total: f64 = intensities.iter().sum();
    intensities
        .iter()
        .enumerate()
        .map(|(i, w)| w * spec.label(i))
        .sum::<f64>()
        / total
}

/// Intensity-weighted variance of the site label, in sites^2.
pub fn intensity_variance(spec: &LatticeSpec, intensities: &[f64]) -> f64 {
    let total: f64 = intensities.iter().sum();
    let mean = intensity_centroid(spec, intensities);
    intensities
        .iter()
        .enumerate()
        .map(|(i, w)| w * (spec.label(i) - mean).powi(2))
        .sum::<f64>()
        / total
}

/// Best match of one intensity profile against integer translates of another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftMatch {
    /// L2 distance between the two profiles (each normalized to unit sum)
    /// at the best shift.
    pub distance: f64,
    /// Translation in sites applied to the reference profile.
    pub shift: isize,
}

/// Smallest L2 distance between `profile` and `reference` translated by any
/// whole number of sites (vacated sites read as zero).
pub fn min_shift_distance(profile: &[f64], reference: &[f64]) -> Result<ShiftMatch> {
    let n = profile.len();
    if reference.len() != n || n == 0 {
        return usage("profiles must have the same nonzero length");
    }
    let sa: f64 = profile.iter().sum();
    let sb: f64 = reference.iter().sum();
    if sa <= 0.0 || sb <= 0.0 {
        return usage("profiles must carry positive total intensity");
    }
    let mut best = ShiftMatch {
        distance: f64::INFINITY,
        shift: 0,
    };
    for shift in -(n as isize - 1)..(n as isize) {
        let d2: f64 = (0..n)
            .map(|i| {
                let src = i as isize - shift;
                let b = if (0..n as isize).contains(&src) {
                    reference[src as usize] / sb
                } else {
                    0.0
                };
                (profile[i] / sa - b).powi(2)
            })
            .sum();
        if d2.sqrt() < best.distance {
            best = ShiftMatch {
                distance: d2.sqrt(),
                shift,
            };
        }
    }
    Ok(best)
}
