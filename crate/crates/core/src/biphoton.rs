//! Two-photon interference on top of the single-photon transfer matrix.
//!
//! For a single-photon unitary `G`, a separable pair `a_m^dag a_n^dag |0>` and a
//! path-entangled pair `(a_m^dag^2 + a_n^dag^2) |0> / 2` produce coincidence
//! maps
//!
//! ```text
//! separable: Gamma_{k,l} = |G_{k,m} G_{l,n} + G_{k,n} G_{l,m}|^2
//! entangled: Gamma_{k,l} = |G_{k,m} G_{l,m} + G_{k,n} G_{l,n}|^2
//! ```
//!
//! with `Gamma_{k,l} = <a_k^dag a_l^dag a_l a_k>`, diagonal included. Both maps
//! sum to 2 and have marginals `sum_l Gamma_{k,l} = I_k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::lattice::{LatticeSpec, SpectralBasis};
use crate::specfun::{jacobi, ln_fact, JacobiParams};
use crate::transform::{green_spectral, GreenMatrix};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPhotonKind {
    Separable,
    PathEntangled,
}

/// Two photons prepared on two distinct sites (machine indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoPhotonInput {
    kind: TwoPhotonKind,
    first: usize,
    second: usize,
}

impl TwoPhotonInput {
    /// Input on the sites with labels `m` and `n`.
    pub fn new(spec: &LatticeSpec, kind: TwoPhotonKind, m: f64, n: f64) -> Result<Self> {
        Self::from_indices(spec.size(), kind, spec.index_of(m)?, spec.index_of(n)?)
    }

    pub fn from_indices(size: usize, kind: TwoPhotonKind, first: usize, second: usize) -> Result<Self> {
        if first >= size || second >= size {
            return usage(format!(
                "preparation sites ({first}, {second}) outside a lattice of {size} sites"
            ));
        }
        if first == second {
            return usage("the two preparation sites must differ");
        }
        Ok(Self { kind, first, second })
    }

    pub fn kind(&self) -> TwoPhotonKind {
        self.kind
    }

    pub fn sites(&self) -> (usize, usize) {
        (self.first, self.second)
    }
}

/// Symmetric matrix of two-fold coincidence probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    gamma: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn from_matrix(gamma: DMatrix<f64>) -> Self {
        Self { gamma }
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.gamma[(k, l)]
    }

    pub fn total(&self) -> f64 {
        self.gamma.sum()
    }

    pub fn max(&self) -> f64 {
        self.gamma.max()
    }

    /// Row sums `sum_l Gamma_{k,l}`.
    pub fn marginals(&self) -> Vec<f64> {
        self.gamma.row_iter().map(|r| r.sum()).collect()
    }
}

/// Mean photon number per output site.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDensity {
    pub intensities: Vec<f64>,
}

impl PhotonDensity {
    pub fn total(&self) -> f64 {
        self.intensities.iter().sum()
    }
}

fn check_green(green: &GreenMatrix, input: &TwoPhotonInput) -> Result<()> {
    let (m, n) = input.sites();
    if m >= green.dim() || n >= green.dim() {
        return usage(format!(
            "preparation sites ({m}, {n}) outside a {0}x{0} transfer matrix",
            green.dim()
        ));
    }
    Ok(())
}

/// Coincidence map behind an arbitrary single-photon transfer matrix.
pub fn correlation_from_green(green: &GreenMatrix, input: &TwoPhotonInput) -> Result<CorrelationMatrix> {
    check_green(green, input)?;
    let (m, n) = input.sites();
    let dim = green.dim();
    let g = green.entries();
    let mut gamma = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        for l in k..dim {
            let amp: C64 = match input.kind() {
                TwoPhotonKind::Separable => g[(k, m)] * g[(l, n)] + g[(k, n)] * g[(l, m)],
                TwoPhotonKind::PathEntangled => g[(k, m)] * g[(l, m)] + g[(k, n)] * g[(l, n)],
            };
            let v = amp.norm_sqr();
            gamma[(k, l)] = v;
            gamma[(l, k)] = v;
        }
    }
    Ok(CorrelationMatrix { gamma })
}

/// Coincidence map at transform order `z`.
pub fn correlation(basis: &SpectralBasis, input: &TwoPhotonInput, z: f64) -> Result<CorrelationMatrix> {
    correlation_from_green(&green_spectral(basis, z), input)
}

/// `I_k = |G_{k,m}|^2 + |G_{k,n}|^2`, the same for both input kinds.
pub fn photon_density_from_green(green: &GreenMatrix, input: &TwoPhotonInput) -> Result<PhotonDensity> {
    check_green(green, input)?;
    let (m, n) = input.sites();
    let intensities = (0..green.dim())
        .map(|k| green.get(k, m).norm_sqr() + green.get(k, n).norm_sqr())
        .collect();
    Ok(PhotonDensity { intensities })
}

pub fn photon_density(basis: &SpectralBasis, input: &TwoPhotonInput, z: f64) -> Result<PhotonDensity> {
    photon_density_from_green(&green_spectral(basis, z), input)
}

/// A separable pair sent through a balanced coupler bunches (Hong-Ou-Mandel)
/// into the path-entangled state on the same two sites.
pub fn apply_beamsplitter(input: &TwoPhotonInput) -> Result<TwoPhotonInput> {
    if input.kind() != TwoPhotonKind::Separable {
        return usage("beam-splitter preparation needs a separable input pair");
    }
    Ok(TwoPhotonInput {
        kind: TwoPhotonKind::PathEntangled,
        ..*input
    })
}

/// Single-photon matrix of a 50:50 directional coupler joining sites `a` and
/// `b`, identity elsewhere: `a^dag -> (a^dag + i b^dag)/sqrt2`.
pub fn coupler_unitary(size: usize, a: usize, b: usize) -> Result<DMatrix<C64>> {
    if a >= size || b >= size || a == b {
        return usage(format!("coupler ports ({a}, {b}) invalid for {size} sites"));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = DMatrix::<C64>::identity(size, size);
    u[(a, a)] = C64::new(r, 0.0);
    u[(b, b)] = C64::new(r, 0.0);
    u[(a, b)] = C64::new(0.0, r);
    u[(b, a)] = C64::new(0.0, r);
    Ok(u)
}

/// Closed-form coincidence probability for the outermost separable pair
/// `a_j^dag a_{-j}^dag |0>` at the Fourier plane, for site labels `k`, `l`:
///
/// ```text
/// Gamma_{k,l} = 4^{k+l+1} (j+k)!(j-k)!(j+l)!(j-l)!
///               ( P_{j+k}^{(j-k, -j-k)}(0) P_{j+l}^{(-j-l, j-l)}(0) / (N-1)! )^2
/// ```
///
/// for `k + l` odd and zero otherwise.
pub fn outer_pair_closed_form(spec: &LatticeSpec, k: f64, l: f64) -> Result<f64> {
    let (ik, il) = (spec.index_of(k)?, spec.index_of(l)?);
    let two_j = spec.two_j();
    // k + l = ik + il - 2j
    let sum = ik as isize + il as isize - two_j as isize;
    if sum.rem_euclid(2) == 0 {
        return Ok(0.0);
    }
    let pk = jacobi(
        JacobiParams {
            degree: ik,
            alpha: (two_j - ik) as f64,
            beta: -(ik as f64),
        },
        0.0,
    );
    let pl = jacobi(
        JacobiParams {
            degree: il,
            alpha: -(il as f64),
            beta: (two_j - il) as f64,
        },
        0.0,
    );
    let prod = pk * pl;
    if prod == 0.0 {
        return Ok(0.0);
    }
    let log = (sum + 1) as f64 * 4f64.ln()
        + ln_fact(ik)
        + ln_fact(two_j - ik)
        + ln_fact(il)
        + ln_fact(two_j - il)
        + 2.0 * (prod.abs().ln() - ln_fact(two_j));
    Ok(log.exp())
}

/// Result of matching the printed closed form against the eigenvector
/// expression `|u_k^{(j)} u_l^{(-j)} + u_k^{(-j)} u_l^{(j)}|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterPairCalibration {
    /// Factor multiplying the closed form, fitted on its largest entry.
    pub constant: f64,
    /// Largest `|constant * closed - direct|` over entries with `k + l` odd.
    pub max_residual: f64,
    /// Largest direct value on entries where the closed form is zero.
    pub max_direct_on_zero_set: f64,
}

pub fn calibrate_outer_pair(basis: &SpectralBasis) -> Result<OuterPairCalibration> {
    let spec = basis.spec();
    let n = spec.size();
    let (top, bottom) = (n - 1, 0);
    let direct = |k: usize, l: usize| {
        let v =
            basis.component(k, top) * basis.component(l, bottom) + basis.component(k, bottom) * basis.component(l, top);
        v * v
    };
    let mut closed = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            closed[(k, l)] = outer_pair_closed_form(spec, spec.label(k), spec.label(l))?;
        }
    }
    let (kmax, lmax) = closed.iamax_full();
    if closed[(kmax, lmax)] == 0.0 {
        return Err(Error::Numeric(
            "closed form vanishes everywhere; cannot calibrate".into(),
        ));
    }
    let constant = direct(kmax, lmax) / closed[(kmax, lmax)];
    let mut max_residual = 0.0_f64;
    let mut max_direct_on_zero_set = 0.0_f64;
    for k in 0..n {
        for l in 0..n {
            let odd = (k + l + spec.two_j()) % 2 == 1;
            if odd {
                max_residual = max_residual.max((constant * closed[(k, l)] - direct(k, l)).abs());
            } else {
                max_direct_on_zero_set = max_direct_on_zero_set.max(direct(k, l));
            }
        }
    }
    Ok(OuterPairCalibration {
        constant,
        max_residual,
        max_direct_on_zero_set,
    })
}

/// Which parity of `k + l` (site labels) is forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuppressionRule {
    OddSuppressed,
    EvenSuppressed,
}

/// Parity of `k + l` that vanishes at the Fourier plane for a pair on the
/// mirror-symmetric sites `m = -n`; `None` for any other pair.
///
/// Path-entangled pairs lose odd sums. Separable pairs lose even sums when
/// `m - n` is odd and odd sums when it is even.
pub fn expected_suppression(spec: &LatticeSpec, input: &TwoPhotonInput) -> Option<SuppressionRule> {
    let (a, b) = input.sites();
    if a + b != spec.two_j() {
        return None;
    }
    Some(match input.kind() {
        TwoPhotonKind::PathEntangled => SuppressionRule::OddSuppressed,
        TwoPhotonKind::Separable if a.abs_diff(b) % 2 == 1 => SuppressionRule::EvenSuppressed,
        TwoPhotonKind::Separable => SuppressionRule::OddSuppressed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuppressionReport {
    pub rule: SuppressionRule,
    pub max_suppressed: f64,
    pub max_allowed: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Largest suppressed versus largest allowed entry; passes when their ratio
/// is below `1e-12`.
pub fn suppression_report(gamma: &CorrelationMatrix, rule: SuppressionRule) -> SuppressionReport {
    let n = gamma.dim();
    let two_j = n.saturating_sub(1);
    let (mut max_suppressed, mut max_allowed) = (0.0_f64, 0.0_f64);
    for k in 0..n {
        for l in 0..n {
            // k + l in labels is ik + il - 2j.
            let odd = (k + l + two_j) % 2 == 1;
            let suppressed = match rule {
                SuppressionRule::OddSuppressed => odd,
                SuppressionRule::EvenSuppressed => !odd,
            };
            let v = gamma.get(k, l).abs();
            if suppressed {
                max_suppressed = max_suppressed.max(v);
            } else {
                max_allowed = max_allowed.max(v);
            }
        }
    }
    let ratio = if max_suppressed == 0.0 {
        0.0
    } else if max_allowed == 0.0 {
        f64::INFINITY
    } else {
        max_suppressed / max_allowed
    };
    SuppressionReport {
        rule,
        max_suppressed,
        max_allowed,
        ratio,
        pass: ratio < 1e-12,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationReport {
    /// Frobenius distance between the entangled map and the rotated separable map.
    pub distance: f64,
    pub pass: bool,
}

/// The separable map turned by 90 degrees: `R_{k,l} = Gamma_{l,-k}`.
pub fn rotate_quarter_turn(gamma: &CorrelationMatrix) -> CorrelationMatrix {
    let n = gamma.dim();
    CorrelationMatrix {
        gamma: DMatrix::from_fn(n, n, |k, l| gamma.get(l, n - 1 - k)),
    }
}

/// Compare an entangled map with the quarter-turn of a separable one.
pub fn rotation_comparison(sep: &CorrelationMatrix, ent: &CorrelationMatrix) -> Result<RotationReport> {
    if sep.dim() != ent.dim() {
        return usage(format!("maps differ in size ({} vs {})", sep.dim(), ent.dim()));
    }
    let rotated = rotate_quarter_turn(sep);
    let distance = (rotated.gamma() - ent.gamma()).norm();
    Ok(RotationReport {
        distance,
        pass: distance < 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_jx, numeric_basis};
    use std::f64::consts::FRAC_PI_2;

    fn setup(n: usize) -> (LatticeSpec, SpectralBasis) {
        let s = LatticeSpec::with_size(n).unwrap();
        (s, numeric_basis(&build_jx(&s)).unwrap())
    }

    #[test]
    fn separable_at_zero_is_the_input() {
        let (s, b) = setup(6);
        let input = TwoPhotonInput::new(&s, TwoPhotonKind::Separable, -1.5, 0.5).unwrap();
        let g = correlation(&b, &input, 0.0).unwrap();
        for k in 0..6 {
            for l in 0..6 {
                let want = if (k, l) == (1, 3) || (k, l) == (3, 1) { 1.0 } else { 0.0 };
                assert!((g.get(k, l) - want).abs() < 1e-14);
            }
        }
        assert!((g.total() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identical_sites_rejected() {
        let s = LatticeSpec::with_size(4).unwrap();
        assert!(matches!(
            TwoPhotonInput::new(&s, TwoPhotonKind::Separable, 0.5, 0.5),
            Err(Error::Usage(_))
        ));
        assert!(TwoPhotonInput::new(&s, TwoPhotonKind::Separable, 0.5, 2.5).is_err());
    }

    #[test]
    fn outermost_pair_suppression() {
        let (s, b) = setup(8);
        let sep = TwoPhotonInput::new(&s, TwoPhotonKind::Separable, -3.5, 3.5).unwrap();
        let ent = apply_beamsplitter(&sep).unwrap();
        let gs = correlation(&b, &sep, FRAC_PI_2).unwrap();
        let ge = correlation(&b, &ent, FRAC_PI_2).unwrap();
        assert!(suppression_report(&gs, SuppressionRule::EvenSuppressed).pass);
        assert!(!suppression_report(&gs, SuppressionRule::OddSuppressed).pass);
        assert!(suppression_report(&ge, SuppressionRule::OddSuppressed).pass);
        assert!(rotation_comparison(&gs, &ge).unwrap().pass);
    }

    #[test]
    fn density_and_marginals() {
        let (s, b) = setup(7);
        for kind in [TwoPhotonKind::Separable, TwoPhotonKind::PathEntangled] {
            let input = TwoPhotonInput::new(&s, kind, -2.0, 1.0).unwrap();
            for z in [0.0, 0.4, FRAC_PI_2, 2.9] {
                let g = correlation(&b, &input, z).unwrap();
                let d = photon_density(&b, &input, z).unwrap();
                assert!((d.total() - 2.0).abs() < 1e-12);
                assert!((g.total() - 2.0).abs() < 1e-10);
                for (a, c) in g.marginals().iter().zip(&d.intensities) {
                    assert!((a - c).abs() < 1e-12);
                }
            }
        }
        let input = TwoPhotonInput::new(&s, TwoPhotonKind::Separable, -2.0, 1.0).unwrap();
        let d = photon_density(&b, &input, 0.0).unwrap();
        assert!((d.intensities[1] - 1.0).abs() < 1e-14 && (d.intensities[4] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn beamsplitter_rejects_entangled() {
        let s = LatticeSpec::with_size(4).unwrap();
        let e = TwoPhotonInput::new(&s, TwoPhotonKind::PathEntangled, -1.5, 1.5).unwrap();
        assert!(apply_beamsplitter(&e).is_err());
    }

    #[test]
    fn coupler_bunches_photons() {
        // A separable pair through the coupler alone has no coincidences
        // between its two ports.
        let u = coupler_unitary(5, 1, 3).unwrap();
        let sep = TwoPhotonInput::from_indices(5, TwoPhotonKind::Separable, 1, 3).unwrap();
        let g = correlation_from_green(&GreenMatrix::from_entries(0.0, u), &sep).unwrap();
        assert!(g.get(1, 3).abs() < 1e-15);
        assert!((g.get(1, 1) - 1.0).abs() < 1e-15 && (g.get(3, 3) - 1.0).abs() < 1e-15);
        assert!(coupler_unitary(5, 2, 2).is_err());
    }

    #[test]
    fn outer_pair_form_zero_on_even_and_symmetric() {
        let s = LatticeSpec::with_size(8).unwrap();
        let labels: Vec<f64> = s.labels().collect();
        for &k in &labels {
            for &l in &labels {
                let v = outer_pair_closed_form(&s, k, l).unwrap();
                if ((k + l) as i64).rem_euclid(2) == 0 {
                    assert_eq!(v, 0.0);
                }
                assert!((v - outer_pair_closed_form(&s, l, k).unwrap()).abs() <= 1e-15 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn outer_pair_form_calibrates_to_one() {
        for n in [4, 8] {
            let (_, b) = setup(n);
            let c = calibrate_outer_pair(&b).unwrap();
            assert!((c.constant - 1.0).abs() < 1e-12, "N = {n}: {}", c.constant);
            assert!(c.max_residual < 1e-10);
            assert!(c.max_direct_on_zero_set < 1e-28);
        }
    }

    #[test]
    fn suppression_report_on_zero_matrix() {
        let r = suppression_report(
            &CorrelationMatrix::from_matrix(DMatrix::zeros(4, 4)),
            SuppressionRule::OddSuppressed,
        );
        assert_eq!(r.ratio, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn rotation_shape_mismatch() {
        let a = CorrelationMatrix::from_matrix(DMatrix::zeros(3, 3));
        let b = CorrelationMatrix::from_matrix(DMatrix::zeros(4, 4));
        assert!(rotation_comparison(&a, &b).is_err());
    }

    #[test]
    fn mirror_pairs_follow_the_parity_rule() {
        for n in 3..=9 {
            let (spec, basis) = setup(n);
            for a in 0..n {
                for b in (a + 1)..n {
                    for kind in [TwoPhotonKind::Separable, TwoPhotonKind::PathEntangled] {
                        let input = TwoPhotonInput::from_indices(n, kind, a, b).unwrap();
                        let gamma = correlation(&basis, &input, FRAC_PI_2).unwrap();
                        match expected_suppression(&spec, &input) {
                            Some(rule) => assert!(suppression_report(&gamma, rule).ratio < 1e-14),
                            None => assert!(a + b != n - 1),
                        }
                    }
                }
            }
        }
    }
}
