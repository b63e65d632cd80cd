//! Batch front end: `dfrft <command> --config <file>`.

pub mod config;
pub mod output;
pub mod presets;

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Parser;
use serde::Serialize;

use crate::biphoton::{
    apply_beamsplitter, correlation_from_green, expected_suppression, photon_density_from_green, rotation_comparison,
    suppression_report, RotationReport, SuppressionReport, TwoPhotonInput, TwoPhotonKind,
};
use crate::continuum::convergence_study;
use crate::lattice::{build_jx, numeric_basis, LatticeSpec, SpectralBasis};
use crate::transform::{
    continuous_frft_gaussian, green_spectral, intensity_centroid, intensity_variance, make_input, min_shift_distance,
    propagate, zscan, InputProfile, ShiftMatch,
};
use crate::{Error, C64};

pub use config::{parse_config, CommandKind, Format, RunConfig};
use config::{BiphotonPayload, ContinuumPayload, Payload, TransformPayload};
use output::{fmt_f64, write_report, CsvTable, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) | Self::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(_) => Self::Numeric(e.to_string()),
            Error::Domain(_) | Error::Usage(_) => Self::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dfrft",
    version,
    about = "Discrete fractional Fourier transform in Jx waveguide lattices"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: CommandKind,
    /// JSON run configuration.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Output file (JSON) or directory (CSV). JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Built-in configuration, used instead of --config.
    #[arg(long)]
    pub preset: Option<String>,
}

/// Propagation length in cm reaching transform order `z`.
pub fn physical_length(spec: &LatticeSpec, z: f64) -> f64 {
    spec.physical_length(z)
}

/// Load the configuration selected by the arguments.
pub fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(name)) => presets::preset(name)
            .ok_or_else(|| {
                let names: Vec<&str> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!("unknown preset {name:?}; known presets: {}", names.join(", ")))
            })?
            .to_string(),
        (None, None) => return Err(CliError::Config("pass --config <file> or --preset <name>".into())),
    };
    let cfg = parse_config(&text)?;
    if cfg.command != args.command {
        return Err(CliError::Config(format!(
            "config is for \"{}\" but the command line asked for \"{}\"",
            cfg.command.name(),
            args.command.name()
        )));
    }
    Ok(cfg)
}

/// Compute the report of a validated run.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match &cfg.payload {
        Payload::Lattice => cmd_lattice(cfg),
        Payload::Transform(p) => cmd_transform(cfg, p),
        Payload::Biphoton(p) => cmd_biphoton(cfg, p),
        Payload::Continuum(p) => cmd_continuum(p),
    }
}

pub fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let report = execute(&cfg)?;
    let format = args.format.unwrap_or(cfg.format);
    let path = args.out.as_deref().or(cfg.output_path.as_deref());
    write_report(&report, format, path)
}

#[derive(Serialize)]
struct LatticeInfo {
    #[serde(rename = "N")]
    size: usize,
    j: f64,
    kappa0: f64,
    gamma: f64,
    fourier_plane_cm: f64,
}

impl LatticeInfo {
    fn of(spec: &LatticeSpec) -> Self {
        Self {
            size: spec.size(),
            j: spec.j(),
            kappa0: spec.kappa0(),
            gamma: spec.gamma(),
            fourier_plane_cm: physical_length(spec, PI / 2.0),
        }
    }
}

fn basis_of(spec: &LatticeSpec) -> Result<SpectralBasis, CliError> {
    Ok(numeric_basis(&build_jx(spec))?)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

#[derive(Serialize)]
struct Coupling {
    i: usize,
    m: f64,
    coupling: f64,
}

#[derive(Serialize)]
struct LatticeDoc {
    command: &'static str,
    lattice: LatticeInfo,
    couplings: Vec<Coupling>,
    eigenvalues: Vec<f64>,
    /// Row = site (ascending label), column = mode (ascending eigenvalue).
    eigenvectors: Vec<Vec<f64>>,
}

fn cmd_lattice(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = *cfg.lattice()?;
    let jx = build_jx(&spec);
    let basis = numeric_basis(&jx)?;
    let n = spec.size();

    let couplings: Vec<Coupling> = jx
        .offdiag()
        .iter()
        .enumerate()
        .map(|(i, &c)| Coupling {
            i,
            m: spec.label(i),
            coupling: c,
        })
        .collect();
    let eigenvectors: Vec<Vec<f64>> = (0..n)
        .map(|s| (0..n).map(|c| basis.component(s, c)).collect())
        .collect();

    let mut t_coup = CsvTable::new("couplings", &["i", "m", "coupling"]);
    for c in &couplings {
        t_coup.push(vec![c.i.to_string(), f(c.m), f(c.coupling)]);
    }
    let mut t_eig = CsvTable::new("eigenvalues", &["mode", "beta"]);
    for (c, &b) in basis.eigenvalues().iter().enumerate() {
        t_eig.push(vec![c.to_string(), f(b)]);
    }
    let mut t_vec = CsvTable::new("eigenvectors", &["i", "m", "mode", "beta", "value"]);
    for (s, row) in eigenvectors.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            t_vec.push(vec![
                s.to_string(),
                f(spec.label(s)),
                c.to_string(),
                f(basis.eigenvalues()[c]),
                f(v),
            ]);
        }
    }

    let doc = LatticeDoc {
        command: "lattice",
        lattice: LatticeInfo::of(&spec),
        couplings,
        eigenvalues: basis.eigenvalues().to_vec(),
        eigenvectors,
    };
    Report::new(&doc, vec![t_coup, t_eig, t_vec])
}

#[derive(Serialize)]
struct ComplexColumns {
    re: Vec<f64>,
    im: Vec<f64>,
    intensity: Vec<f64>,
}

impl ComplexColumns {
    fn of(amps: &[C64]) -> Self {
        Self {
            re: amps.iter().map(|a| a.re).collect(),
            im: amps.iter().map(|a| a.im).collect(),
            intensity: amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }
}

#[derive(Serialize)]
struct TransformSnapshot {
    z: f64,
    z_cm: f64,
    field: ComplexColumns,
    norm: f64,
    centroid: f64,
    variance: f64,
    variance_ratio: f64,
    overlay: Option<ComplexColumns>,
    displacement: Option<ShiftMatch>,
}

#[derive(Serialize)]
struct TransformDoc {
    command: &'static str,
    lattice: LatticeInfo,
    profile: InputProfile,
    overlay_scale: Option<f64>,
    input: ComplexColumns,
    snapshots: Vec<TransformSnapshot>,
}

/// Continuous transform of the Gaussian launch profile at order `-z`, sampled
/// at `x = m / scale` and carrying the global phase `exp(-i j z)` so it can be
/// compared with the lattice output amplitude by amplitude.
fn overlay_amplitudes(spec: &LatticeSpec, profile: &InputProfile, scale: f64, z: f64) -> Result<Vec<C64>, CliError> {
    let InputProfile::Gaussian { center, fwhm, .. } = profile else {
        unreachable!("checked by the caller")
    };
    let width = fwhm / (4.0 * std::f64::consts::LN_2).sqrt() / scale;
    let shift = center / scale;
    let grid: Vec<f64> = spec.labels().map(|m| m / scale).collect();
    let order = -z;
    let raw = match continuous_frft_gaussian(width, shift, order, &grid) {
        Ok(v) => v,
        // At odd multiples of pi the transform is the parity map.
        Err(Error::Domain(_)) => continuous_frft_gaussian(width, -shift, 0.0, &grid)?,
        Err(e) => return Err(e.into()),
    };
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let phase = C64::from_polar(1.0, -spec.j() * z);
    Ok(raw.into_iter().map(|a| phase * a / norm).collect())
}

fn cmd_transform(cfg: &RunConfig, payload: &TransformPayload) -> Result<Report, CliError> {
    let spec = *cfg.lattice()?;
    let profile = &payload.profile;
    let overlay_scale = match &payload.overlay {
        None => None,
        Some(o) => {
            if !matches!(profile, InputProfile::Gaussian { phase_ramp, .. } if *phase_ramp == 0.0) {
                return Err(CliError::Config(
                    "payload.overlay: the continuous overlay needs a gaussian profile without phase ramp".into(),
                ));
            }
            Some(o.scale.unwrap_or_else(|| spec.gamma().powf(0.25)))
        }
    };
    let basis = basis_of(&spec)?;
    let input = make_input(&spec, profile)?;
    let reference = if profile.phase_ramp() != 0.0 {
        Some(make_input(&spec, &profile.without_ramp())?)
    } else {
        None
    };
    let input_variance = intensity_variance(&spec, &input.intensities());

    let mut snapshots = Vec::with_capacity(cfg.z_values.len());
    for &z in &cfg.z_values {
        let out = propagate(&input, &basis, z)?;
        let intens = out.intensities();
        let variance = intensity_variance(&spec, &intens);
        let overlay = match overlay_scale {
            Some(s) => Some(ComplexColumns::of(&overlay_amplitudes(&spec, profile, s, z)?)),
            None => None,
        };
        let displacement = match &reference {
            Some(r) => Some(min_shift_distance(&intens, &propagate(r, &basis, z)?.intensities())?),
            None => None,
        };
        snapshots.push(TransformSnapshot {
            z,
            z_cm: physical_length(&spec, z),
            field: ComplexColumns::of(out.amplitudes()),
            norm: out.norm(),
            centroid: intensity_centroid(&spec, &intens),
            variance,
            variance_ratio: variance / input_variance,
            overlay,
            displacement,
        });
    }

    let mut header = vec!["z", "z_cm", "i", "m", "re", "im", "intensity"];
    if overlay_scale.is_some() {
        header.extend(["overlay_re", "overlay_im", "overlay_intensity"]);
    }
    let mut t_fields = CsvTable::new("fields", &header);
    let mut t_summary = CsvTable::new(
        "summary",
        &[
            "z",
            "z_cm",
            "norm",
            "centroid",
            "variance",
            "variance_ratio",
            "displacement_distance",
            "displacement_shift",
        ],
    );
    for s in &snapshots {
        for i in 0..spec.size() {
            let mut row = vec![
                f(s.z),
                f(s.z_cm),
                i.to_string(),
                f(spec.label(i)),
                f(s.field.re[i]),
                f(s.field.im[i]),
                f(s.field.intensity[i]),
            ];
            if let Some(o) = &s.overlay {
                row.extend([f(o.re[i]), f(o.im[i]), f(o.intensity[i])]);
            }
            t_fields.push(row);
        }
        let (dd, ds) = match s.displacement {
            Some(d) => (f(d.distance), d.shift.to_string()),
            None => (String::new(), String::new()),
        };
        t_summary.push(vec![
            f(s.z),
            f(s.z_cm),
            f(s.norm),
            f(s.centroid),
            f(s.variance),
            f(s.variance_ratio),
            dd,
            ds,
        ]);
    }
    let map = zscan(&input, &basis, &cfg.z_values)?;
    let labels: Vec<String> = spec.labels().map(|m| format!("m={}", f(m))).collect();
    let mut scan_header = vec!["z"];
    scan_header.extend(labels.iter().map(String::as_str));
    let mut t_scan = CsvTable::new("zscan", &scan_header);
    for (z, row) in map.z.iter().zip(&map.rows) {
        t_scan.push(std::iter::once(f(*z)).chain(row.iter().map(|&v| f(v))).collect());
    }

    let doc = TransformDoc {
        command: "transform",
        lattice: LatticeInfo::of(&spec),
        profile: profile.clone(),
        overlay_scale,
        input: ComplexColumns::of(input.amplitudes()),
        snapshots,
    };
    Report::new(&doc, vec![t_fields, t_summary, t_scan])
}

#[derive(Serialize)]
struct PairInfo {
    kind: TwoPhotonKind,
    sites: [f64; 2],
    beamsplitter: bool,
    /// State that enters the lattice.
    launched: TwoPhotonKind,
}

#[derive(Serialize)]
struct BiphotonSnapshot {
    z: f64,
    z_cm: f64,
    /// Dense coincidence map, rows and columns in ascending site label.
    correlation: Vec<Vec<f64>>,
    total: f64,
    density: Vec<f64>,
    suppression: Option<SuppressionReport>,
    rotation: Option<RotationReport>,
}

#[derive(Serialize)]
struct BiphotonDoc {
    command: &'static str,
    lattice: LatticeInfo,
    input: PairInfo,
    snapshots: Vec<BiphotonSnapshot>,
}

fn cmd_biphoton(cfg: &RunConfig, payload: &BiphotonPayload) -> Result<Report, CliError> {
    let spec = *cfg.lattice()?;
    let [m, n] = payload.sites;
    let prepared = TwoPhotonInput::new(&spec, payload.kind, m, n)?;
    let launched = if payload.beamsplitter {
        apply_beamsplitter(&prepared)?
    } else {
        prepared
    };
    let mirror = expected_suppression(&spec, &launched);
    let (a, b) = launched.sites();
    let sep = TwoPhotonInput::from_indices(spec.size(), TwoPhotonKind::Separable, a, b)?;
    let ent = TwoPhotonInput::from_indices(spec.size(), TwoPhotonKind::PathEntangled, a, b)?;
    let basis = basis_of(&spec)?;
    let dim = spec.size();

    let mut snapshots = Vec::with_capacity(cfg.z_values.len());
    for &z in &cfg.z_values {
        let green = green_spectral(&basis, z);
        let gamma = correlation_from_green(&green, &launched)?;
        let density = photon_density_from_green(&green, &launched)?;
        let rotation = if mirror.is_some() {
            let g_sep = correlation_from_green(&green, &sep)?;
            let g_ent = correlation_from_green(&green, &ent)?;
            Some(rotation_comparison(&g_sep, &g_ent)?)
        } else {
            None
        };
        snapshots.push(BiphotonSnapshot {
            z,
            z_cm: physical_length(&spec, z),
            correlation: (0..dim).map(|k| (0..dim).map(|l| gamma.get(k, l)).collect()).collect(),
            total: gamma.total(),
            density: density.intensities,
            suppression: mirror.map(|rule| suppression_report(&gamma, rule)),
            rotation,
        });
    }

    let mut t_long = CsvTable::new("correlation", &["z", "k", "l", "gamma"]);
    let labels: Vec<String> = spec.labels().map(|m| format!("l={}", f(m))).collect();
    let mut dense_header = vec!["z", "k"];
    dense_header.extend(labels.iter().map(String::as_str));
    let mut t_dense = CsvTable::new("correlation_matrix", &dense_header);
    let mut t_density = CsvTable::new("density", &["z", "m", "intensity"]);
    let mut t_supp = CsvTable::new(
        "suppression",
        &[
            "z",
            "rule",
            "max_suppressed",
            "max_allowed",
            "ratio",
            "pass",
            "rotation_distance",
            "rotation_pass",
        ],
    );
    for s in &snapshots {
        for k in 0..dim {
            for l in 0..dim {
                t_long.push(vec![f(s.z), f(spec.label(k)), f(spec.label(l)), f(s.correlation[k][l])]);
            }
            t_dense.push(
                [f(s.z), f(spec.label(k))]
                    .into_iter()
                    .chain(s.correlation[k].iter().map(|&v| f(v)))
                    .collect(),
            );
            t_density.push(vec![f(s.z), f(spec.label(k)), f(s.density[k])]);
        }
        if let (Some(sr), Some(rr)) = (&s.suppression, &s.rotation) {
            let rule = serde_json::to_value(sr.rule)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            t_supp.push(vec![
                f(s.z),
                rule,
                f(sr.max_suppressed),
                f(sr.max_allowed),
                f(sr.ratio),
                sr.pass.to_string(),
                f(rr.distance),
                rr.pass.to_string(),
            ]);
        }
    }

    let doc = BiphotonDoc {
        command: "biphoton",
        lattice: LatticeInfo::of(&spec),
        input: PairInfo {
            kind: payload.kind,
            sites: payload.sites,
            beamsplitter: payload.beamsplitter,
            launched: launched.kind(),
        },
        snapshots,
    };
    Report::new(&doc, vec![t_long, t_dense, t_density, t_supp])
}

#[derive(Serialize)]
struct ContinuumDoc {
    command: &'static str,
    levels: Vec<usize>,
    n_values: Vec<usize>,
    monotone: bool,
    rows: Vec<crate::continuum::ConvergenceRow>,
}

/// Drops smaller than this count as ties in the per-level monotonicity flag.
const MONOTONE_SLACK: f64 = 1e-12;

fn cmd_continuum(payload: &ContinuumPayload) -> Result<Report, CliError> {
    let table = convergence_study(&payload.levels, &payload.n_values)?;
    let mut t = CsvTable::new("convergence", &["N", "level", "overlap"]);
    for r in &table.rows {
        t.push(vec![r.size.to_string(), r.level.to_string(), f(r.overlap)]);
    }
    let doc = ContinuumDoc {
        command: "continuum",
        levels: payload.levels.clone(),
        n_values: payload.n_values.clone(),
        monotone: table.is_monotone(MONOTONE_SLACK),
        rows: table.rows,
    };
    Report::new(&doc, vec![t])
}
