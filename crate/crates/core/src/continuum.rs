//! Continuum-limit checks: central Jx eigenvectors against sampled
//! Hermite-Gauss modes, and the eigenrelation of the discrete transform.
//!
//! Oscillator level `n` corresponds to the Jx eigenvalue `beta = j - n`, and
//! site `m` samples the oscillator at `x = m / gamma^{1/4}`.

use serde::Serialize;

use crate::error::{usage, Result};
use crate::lattice::{build_jx, numeric_basis, LatticeSpec, SpectralBasis};
use crate::specfun::hermite_gauss;
use crate::transform::{propagate, Field};
use crate::C64;

/// One (lattice size, oscillator level) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumProbe {
    spec: LatticeSpec,
    level: usize,
}

impl ContinuumProbe {
    pub fn new(size: usize, level: usize) -> Result<Self> {
        let spec = LatticeSpec::with_size(size)?;
        if level >= size {
            return usage(format!("oscillator level {level} needs more than {size} sites"));
        }
        Ok(Self { spec, level })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `gamma^{1/4}`, the number of sites per unit of oscillator length.
    pub fn scale(&self) -> f64 {
        self.spec.gamma().powf(0.25)
    }

    pub fn grid(&self) -> Vec<f64> {
        let s = self.scale();
        self.spec.labels().map(|m| m / s).collect()
    }

    /// Sampled Hermite-Gauss mode, renormalized on the grid.
    pub fn target(&self) -> Vec<f64> {
        let mut h: Vec<f64> = self.grid().into_iter().map(|x| hermite_gauss(self.level, x)).collect();
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        h.iter_mut().for_each(|v| *v /= norm);
        h
    }
}

fn overlap_in(basis: &SpectralBasis, probe: &ContinuumProbe) -> f64 {
    let mode = basis.dim() - 1 - probe.level();
    probe
        .target()
        .iter()
        .enumerate()
        .map(|(i, h)| h * basis.component(i, mode))
        .sum::<f64>()
        .abs()
}

/// `|<v, h>|` between the Jx eigenvector at `beta = j - level` and the
/// sampled oscillator mode of that level.
pub fn continuum_overlap(probe: &ContinuumProbe) -> Result<f64> {
    let basis = numeric_basis(&build_jx(probe.spec()))?;
    Ok(overlap_in(&basis, probe))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub size: usize,
    pub level: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn get(&self, size: usize, level: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.size == size && r.level == level)
            .map(|r| r.overlap)
    }

    /// Overlaps of one level, ordered by lattice size.
    pub fn column(&self, level: usize) -> Vec<(usize, f64)> {
        let mut col: Vec<(usize, f64)> = self
            .rows
            .iter()
            .filter(|r| r.level == level)
            .map(|r| (r.size, r.overlap))
            .collect();
        col.sort_by_key(|c| c.0);
        col
    }

    /// Whether every level's overlap is non-decreasing in `N`, allowing drops
    /// up to `slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let mut levels: Vec<usize> = self.rows.iter().map(|r| r.level).collect();
        levels.sort_unstable();
        levels.dedup();
        levels
            .into_iter()
            .all(|lv| self.column(lv).windows(2).all(|w| w[1].1 >= w[0].1 - slack))
    }
}

/// Overlap for every (level, N) pair, rows ordered by N then level.
pub fn convergence_study(levels: &[usize], sizes: &[usize]) -> Result<ConvergenceTable> {
    if let (Some(&top), Some(&smallest)) = (levels.iter().max(), sizes.iter().min()) {
        if top >= smallest {
            return usage(format!("level {top} needs every lattice larger than {smallest} sites"));
        }
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows = Vec::with_capacity(levels.len() * sizes.len());
    for &size in &sizes {
        let spec = LatticeSpec::with_size(size)?;
        let basis = numeric_basis(&build_jx(&spec))?;
        for &level in levels {
            let probe = ContinuumProbe::new(size, level)?;
            rows.push(ConvergenceRow {
                size,
                level,
                overlap: overlap_in(&basis, &probe),
            });
        }
    }
    Ok(ConvergenceTable { rows })
}

/// `|| G(Z) u^{(m)} - exp(-i beta_m Z) u^{(m)} ||` for the mode with label `m`.
pub fn eigenrelation_residual(basis: &SpectralBasis, m: f64, z: f64) -> Result<f64> {
    let col = basis.spec().index_of(m)?;
    let u = basis.column(col);
    let field = Field::new(u.iter().map(|&x| C64::new(x, 0.0)).collect())?;
    let out = propagate(&field, basis, z)?;
    let phase = C64::from_polar(1.0, -basis.eigenvalues()[col] * z);
    Ok(out
        .amplitudes()
        .iter()
        .zip(&u)
        .map(|(a, &x)| (a - phase * x).norm_sqr())
        .sum::<f64>()
        .sqrt())
}
