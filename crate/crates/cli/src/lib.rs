//! Pipeline behind the `qwdecay` binary: validate a walk config, build the
//! walk, compute its spectrum against the essential arcs, detect discrete
//! eigenvalues and certify their decay, or sweep the commutator bounds.
//!
//! Every run ends in one of four [`Outcome`]s.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qwdecay_core::certify::{bounds_sweep, certify, shell_norms, BoundsGrid, CertifyOptions, DecayCertificate};
use qwdecay_core::lattice::LatticeBox;
use qwdecay_core::linalg::NormOptions;
use qwdecay_core::spectrum::{
    eigendecompose, essential_arcs, select_discrete, spectral_table, stability_shift, DetectedEigenpair, EssentialArcs,
    SpectrumResult,
};
use qwdecay_core::walk::{build_walk, CoinReport, WalkOperator};
use qwdecay_core::{Error, Execution};
use serde::Serialize;

pub use config::{load_config, ConfigError, Overrides, ValidatedConfig, WalkConfigFile, WalkPoint};

/// Size increase of the box for the truncation-stability rerun.
pub const STABILITY_GROWTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success = 0,
    Invalid = 2,
    NoDiscrete = 3,
    CertificationFailed = 4,
}

impl Outcome {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Collapses a run result onto the exit-code contract: errors exit 2.
pub fn exit_outcome(result: Result<Outcome, RunError>) -> Outcome {
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Outcome::Invalid
    })
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Spectrum, arcs and detections for one walk at one box size.
pub struct PointAnalysis {
    pub point: WalkPoint,
    pub op: WalkOperator,
    pub spectrum: SpectrumResult,
    pub arcs: EssentialArcs,
    /// `(d(lambda), core mass)` per eigenvalue.
    pub gap_mass: Vec<(f64, f64)>,
    pub detected: Vec<DetectedEigenpair>,
}

pub fn analyse_point(
    cfg: &ValidatedConfig,
    point: &WalkPoint,
    side: usize,
    exec: Execution,
) -> Result<PointAnalysis, Error> {
    let lattice = Arc::new(LatticeBox::new(cfg.file.d, side)?);
    let op = build_walk(&lattice, &point.params, &cfg.coin)?;
    let spectrum = eigendecompose(&op)?;
    let arcs = essential_arcs(&point.params, cfg.coin.phi(), side, cfg.refinement, exec)?;
    let gap_mass = spectral_table(&spectrum, &arcs, &lattice, &cfg.criteria, exec)?;
    let detected = select_discrete(&spectrum, &gap_mass, &cfg.criteria);
    Ok(PointAnalysis { point: point.clone(), op, spectrum, arcs, gap_mass, detected })
}

#[derive(Debug, Clone, Serialize)]
pub struct Detection {
    pub index: usize,
    pub lambda: [f64; 2],
    pub gap: f64,
    pub core_mass: f64,
    /// Distance to the nearest detection in the enlarged box.
    pub stability_shift: Option<f64>,
    pub stable: bool,
    pub certificate: Option<DecayCertificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointReport {
    pub label: String,
    pub q_magnitude: Option<f64>,
    pub side: usize,
    pub stability_side: usize,
    pub refinement: usize,
    pub arc_resolution: f64,
    pub detections: Vec<Detection>,
}

impl PointReport {
    pub fn outcome(&self) -> Outcome {
        let stable: Vec<&Detection> = self.detections.iter().filter(|d| d.stable).collect();
        if stable.iter().any(|d| d.certificate.as_ref().is_some_and(|c| c.passed)) {
            Outcome::Success
        } else if stable.is_empty() {
            Outcome::NoDiscrete
        } else {
            Outcome::CertificationFailed
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub side: usize,
    pub seed: u64,
    pub delta_fraction: f64,
    pub coin_report: CoinReport,
    pub points: Vec<PointReport>,
}

impl CertifyReport {
    pub fn outcome(&self) -> Outcome {
        let outcomes: Vec<Outcome> = self.points.iter().map(PointReport::outcome).collect();
        if outcomes.contains(&Outcome::Success) {
            Outcome::Success
        } else if outcomes.contains(&Outcome::CertificationFailed) {
            Outcome::CertificationFailed
        } else {
            Outcome::NoDiscrete
        }
    }
}

pub struct CertifiedPoint {
    pub analysis: PointAnalysis,
    pub report: PointReport,
}

/// Detection, stability rerun at `L + 4` and certification for one walk.
pub fn certify_point(cfg: &ValidatedConfig, point: &WalkPoint, exec: Execution) -> Result<CertifiedPoint, Error> {
    let side = cfg.side();
    let analysis = analyse_point(cfg, point, side, exec)?;
    let larger = if analysis.detected.is_empty() {
        Vec::new()
    } else {
        analyse_point(cfg, point, side + STABILITY_GROWTH, exec)?.detected
    };
    let options = CertifyOptions { fraction: cfg.delta_fraction, seed: cfg.seed, ..CertifyOptions::default() };
    let mut detections = Vec::new();
    for p in &analysis.detected {
        let shift = stability_shift(p.value(), &larger);
        let stable = shift.is_some_and(|s| s <= cfg.criteria.stability_tol);
        let (certificate, error) = if stable {
            let psi = analysis.spectrum.wavefunction(p.index, analysis.op.lattice())?;
            match certify(&analysis.op, p.value(), &psi, &analysis.arcs, &options, exec) {
                Ok(c) => (Some(c), None),
                Err(e @ (Error::Hypothesis { .. } | Error::PropagationExceeded { .. })) => return Err(e),
                Err(e) => (None, Some(e.to_string())),
            }
        } else {
            (None, None)
        };
        detections.push(Detection {
            index: p.index,
            lambda: p.lambda,
            gap: p.gap,
            core_mass: p.core_mass,
            stability_shift: shift,
            stable,
            certificate,
            error,
        });
    }
    let report = PointReport {
        label: point.label.clone(),
        q_magnitude: point.q_magnitude,
        side,
        stability_side: side + STABILITY_GROWTH,
        refinement: cfg.refinement,
        arc_resolution: analysis.arcs.resolution,
        detections,
    };
    Ok(CertifiedPoint { analysis, report })
}

fn point_dir(cfg: &ValidatedConfig, out: &Path, point: &WalkPoint) -> std::io::Result<PathBuf> {
    let dir = if cfg.file.scan.is_some() { out.join(&point.label) } else { out.to_path_buf() };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_point(dir: &Path, a: &PointAnalysis) -> std::io::Result<()> {
    report::write_spectrum(&dir.join("spectrum.csv"), &a.spectrum, &a.gap_mass)?;
    report::write_arcs(&dir.join("arcs.csv"), &a.arcs)
}

pub fn run_validate(cfg: &ValidatedConfig) -> Outcome {
    println!("{}", serde_json::to_string_pretty(&cfg.report).unwrap_or_default());
    if config::is_defect_free(&cfg.coin) {
        println!("omega equals phi: no defect, coin conditions not enforced");
    }
    println!(
        "config valid: d={} L={} points={}",
        cfg.file.d,
        cfg.side(),
        cfg.file.scan.as_ref().map_or(1, |s| s.q_magnitudes.len())
    );
    Outcome::Success
}

/// Writes `spectrum.csv` and `arcs.csv` per walk. Exit 3 when nothing is
/// detected anywhere.
pub fn run_spectrum(cfg: &ValidatedConfig, out: &Path, exec: Execution) -> Result<Outcome, RunError> {
    let points = cfg.points()?;
    let results = exec.map(&points, |p| analyse_point(cfg, p, cfg.side(), exec));
    let mut outcome = Outcome::NoDiscrete;
    let mut first_err = None;
    for (point, res) in points.iter().zip(results) {
        match res {
            Ok(a) => {
                write_point(&point_dir(cfg, out, point)?, &a)?;
                for d in &a.detected {
                    println!(
                        "{}: lambda = {:.9} {:+.9}i  d = {:.6}  core mass = {:.6}",
                        point.label, d.lambda[0], d.lambda[1], d.gap, d.core_mass
                    );
                }
                if a.detected.is_empty() {
                    println!("{}: no discrete spectrum detected at this truncation", point.label);
                } else {
                    outcome = Outcome::Success;
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", point.label);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(outcome),
    }
}

/// Full pipeline. Exit 0 with at least one passing certificate, 3 when no
/// stable discrete eigenvalue is found, 4 when certification fails.
/// Outputs of successful points are written even if another point errors.
pub fn run_certify(cfg: &ValidatedConfig, out: &Path, exec: Execution) -> Result<Outcome, RunError> {
    let points = cfg.points()?;
    let results = exec.map(&points, |p| certify_point(cfg, p, exec));
    fs::create_dir_all(out)?;
    let mut reports = Vec::new();
    let mut first_err = None;
    for (point, res) in points.iter().zip(results) {
        match res {
            Ok(c) => {
                let dir = point_dir(cfg, out, point)?;
                write_point(&dir, &c.analysis)?;
                for d in c.report.detections.iter().filter(|d| d.stable) {
                    let psi = c.analysis.spectrum.wavefunction(d.index, c.analysis.op.lattice())?;
                    let shells = shell_norms(&psi, c.analysis.op.lattice(), c.analysis.op.b())?;
                    report::write_shells(&dir.join(format!("shells_{}.csv", d.index)), &shells)?;
                }
                print_point(&c.report);
                reports.push(c.report);
            }
            Err(e) => {
                eprintln!("{}: {e}", point.label);
                first_err.get_or_insert(e);
            }
        }
    }
    let report = CertifyReport {
        side: cfg.side(),
        seed: cfg.seed,
        delta_fraction: cfg.delta_fraction,
        coin_report: cfg.report.clone(),
        points: reports,
    };
    report::write_json(&out.join("certificates.json"), &report)?;
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(report.outcome()),
    }
}

fn print_point(r: &PointReport) {
    if r.detections.is_empty() {
        println!("{}: no discrete spectrum detected at this truncation", r.label);
    }
    for d in &r.detections {
        let status = match (&d.certificate, d.stable) {
            (_, false) => "unstable under L -> L+4".to_string(),
            (Some(c), _) if c.passed => format!("certified at delta = {:.6}", c.delta_used),
            (Some(c), _) => format!("certification failed: {}", c.failed_checks.join(", ")),
            (None, _) => format!("certification error: {}", d.error.as_deref().unwrap_or("unknown")),
        };
        println!("{}: lambda = {:.9} {:+.9}i  d = {:.6}  {status}", r.label, d.lambda[0], d.lambda[1], d.gap);
    }
}

/// Commutator bound sweep on the base walk of `cfg`.
pub fn run_bounds(cfg: &ValidatedConfig, out: &Path, exec: Execution) -> Result<Outcome, RunError> {
    let lattice = Arc::new(LatticeBox::new(cfg.file.d, cfg.side())?);
    let op = build_walk(&lattice, &cfg.params, &cfg.coin)?;
    run_bounds_on(&op, out, exec)
}

/// Re-verifies `op` before sweeping, so a corrupted operator is refused
/// (exit 2) rather than swept. Exit 4 on any bound violation.
pub fn run_bounds_on(op: &WalkOperator, out: &Path, exec: Execution) -> Result<Outcome, RunError> {
    op.verify()?;
    let rows = bounds_sweep(op, op.b(), &BoundsGrid::default(), &NormOptions::default(), exec)?;
    fs::create_dir_all(out)?;
    report::write_bounds(&out.join("bounds.csv"), &rows)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!("bounds: {} checks, {failed} violations", rows.len());
    Ok(if failed == 0 { Outcome::Success } else { Outcome::CertificationFailed })
}
