//! Spectra of truncated walks, essential-spectrum arcs sampled from the bulk
//! Bloch symbol, the gap distance `d(lambda)` and discrete-eigenvalue
//! detection.

use std::cmp::Ordering;
use std::f64::consts::PI;

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::{LatticeBox, WaveFunction};
use crate::linalg;
use crate::walk::{bloch_symbol, ShiftParams, WalkOperator};

/// `| |lambda| - 1 |` tolerated for eigenvalues and arc samples.
pub const UNIT_CIRCLE_TOL: f64 = 1e-10;

/// Largest accepted eigenpair residual `|U v - lambda v|`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Components below this magnitude are skipped when fixing eigenvector phases.
const PHASE_TOL: f64 = 1e-8;

/// Complete orthonormal eigendecomposition of a truncated walk.
///
/// Eigenvalues are sorted by principal argument; each eigenvector has its
/// first component of magnitude above `1e-8` made real and positive.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<c64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: Mat<c64>,
    pub residuals: Vec<f64>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<c64> {
        self.eigenvectors.col(i).iter().copied().collect()
    }

    pub fn wavefunction(&self, i: usize, lattice: &LatticeBox) -> Result<WaveFunction> {
        WaveFunction::new(lattice, self.eigenvector(i))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_modulus_error(&self) -> f64 {
        self.eigenvalues.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition through the Schur form.
///
/// The general eigensolver returns `V = Z X` with `Z` the Schur vectors and
/// `X` unit upper triangular in Schur order, so a thin QR of `V` recovers
/// `Z` up to column phases. For a normal matrix the Schur form is diagonal
/// and the columns of `Z` are orthonormal eigenvectors, including inside
/// degenerate eigenspaces where `V` itself need not be orthogonal.
pub fn eigendecompose(op: &WalkOperator) -> Result<SpectrumResult> {
    let dense = op.to_dense();
    let n = dense.nrows();
    if n == 0 {
        return Ok(SpectrumResult { eigenvalues: Vec::new(), eigenvectors: Mat::zeros(0, 0), residuals: Vec::new() });
    }
    let evd = dense.eigen().map_err(|e| Error::Eigensolver(format!("{e:?} (dimension {n})")))?;
    let schur_vectors = evd.U().qr().compute_thin_Q();
    drop(evd);

    let matrix = op.matrix();
    let mut pairs: Vec<(c64, Vec<c64>, f64)> = (0..n)
        .map(|i| {
            let mut v: Vec<c64> = schur_vectors.col(i).iter().copied().collect();
            fix_phase(&mut v);
            let uv = matrix.apply(&v);
            let lambda = linalg::inner(&v, &uv);
            let residual = uv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
            (lambda, v, residual)
        })
        .collect();
    pairs.sort_by(|a, b| compare_pairs((a.0, &a.1), (b.0, &b.1)));

    let mut eigenvectors = Mat::<c64>::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (j, (lambda, v, res)) in pairs.into_iter().enumerate() {
        for (i, a) in v.into_iter().enumerate() {
            eigenvectors[(i, j)] = a;
        }
        eigenvalues.push(lambda);
        residuals.push(res);
    }
    let result = SpectrumResult { eigenvalues, eigenvectors, residuals };
    let (modulus, residual) = (result.max_modulus_error(), result.max_residual());
    if !(modulus <= UNIT_CIRCLE_TOL && residual <= RESIDUAL_TOL) {
        return Err(Error::Eigensolver(format!(
            "decomposition out of tolerance: max ||lambda|-1| = {modulus:e}, max residual = {residual:e}, \
             max |U^*U - I| = {:e}",
            op.unitarity_deviation()
        )));
    }
    Ok(result)
}

/// Makes the first component above `1e-8` in magnitude real and positive.
pub fn fix_phase(v: &mut [c64]) {
    if let Some(i) = v.iter().position(|a| a.norm() > PHASE_TOL) {
        let modulus = v[i].norm();
        let phase = v[i].conj() / modulus;
        v.iter_mut().for_each(|a| *a *= phase);
        v[i] = c64::new(modulus, 0.0);
    }
}

fn compare_pairs(a: (c64, &[c64]), b: (c64, &[c64])) -> Ordering {
    a.0.arg().total_cmp(&b.0.arg()).then_with(|| {
        for (x, y) in a.1.iter().zip(b.1) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

/// Momentum grid: `M = side * refinement` points per axis at `2 pi m / M`,
/// covering `[-pi, pi)`. The exact lattice momenta `2 pi m / side` are the
/// sub-grid `m = refinement * m'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub dim: usize,
    pub side: usize,
    pub refinement: usize,
}

impl GridSpec {
    pub fn points_per_axis(&self) -> usize {
        self.side * self.refinement
    }

    pub fn axis_momenta(&self) -> Vec<f64> {
        let m = self.points_per_axis() as i64;
        let lo = -(m / 2);
        (lo..lo + m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    /// Momentum vector for flat grid index `index` (axis 0 slowest).
    pub fn momentum(&self, axis: &[f64], mut index: usize) -> Vec<f64> {
        let m = axis.len();
        let mut k = vec![0.0; self.dim];
        for slot in k.iter_mut().rev() {
            *slot = axis[index % m];
            index /= m;
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcSample {
    pub k: Vec<f64>,
    pub branch: usize,
    pub mu: [f64; 2],
}

impl ArcSample {
    pub fn value(&self) -> c64 {
        c64::new(self.mu[0], self.mu[1])
    }
}

/// Sampled essential spectrum of the defect-free bulk walk.
#[derive(Debug, Clone)]
pub struct EssentialArcs {
    /// Samples in grid order, branches sorted by argument within each `k`.
    pub samples: Vec<ArcSample>,
    pub grid: GridSpec,
    /// Upper bound on the distance from any point of the continuum arcs to
    /// the nearest sample: `max_j |q_j| * pi / M`.
    pub resolution: f64,
    by_angle: Vec<(f64, c64)>,
}

impl EssentialArcs {
    pub fn from_points(points: Vec<c64>, grid: GridSpec, resolution: f64) -> Self {
        let samples = points
            .into_iter()
            .enumerate()
            .map(|(i, z)| ArcSample { k: Vec::new(), branch: i, mu: [z.re, z.im] })
            .collect();
        Self::assemble(samples, grid, resolution)
    }

    fn assemble(samples: Vec<ArcSample>, grid: GridSpec, resolution: f64) -> Self {
        let mut by_angle: Vec<(f64, c64)> = samples.iter().map(|s| (s.value().arg(), s.value())).collect();
        by_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { samples, grid, resolution, by_angle }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = c64> + '_ {
        self.samples.iter().map(ArcSample::value)
    }
}

/// Eigenvalues of the bulk symbol over the refined momentum grid.
pub fn essential_arcs(
    params: &ShiftParams,
    phi: &[c64],
    side: usize,
    refinement: usize,
    exec: Execution,
) -> Result<EssentialArcs> {
    if refinement == 0 || side == 0 {
        return Err(Error::InvalidArgument("grid needs side >= 1 and refinement >= 1".into()));
    }
    let grid = GridSpec { dim: params.dim(), side, refinement };
    let axis = grid.axis_momenta();
    let per_k: Vec<Result<Vec<ArcSample>>> = exec.map_range(grid.num_points(), |idx| {
        let k = grid.momentum(&axis, idx);
        let symbol = bloch_symbol(params, phi, &k)?;
        let mut ev = symbol.eigenvalues()?;
        ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        Ok(ev
            .into_iter()
            .enumerate()
            .map(|(branch, mu)| ArcSample { k: k.clone(), branch, mu: [mu.re, mu.im] })
            .collect())
    });
    let mut samples = Vec::with_capacity(grid.num_points() * 2 * params.dim());
    for chunk in per_k {
        samples.extend(chunk?);
    }
    let qmax = params.q().iter().map(|q| q.norm()).fold(0.0, f64::max);
    let resolution = qmax * PI / grid.points_per_axis() as f64;
    Ok(EssentialArcs::assemble(samples, grid, resolution))
}

fn check_on_circle(lambda: c64) -> Result<()> {
    if !((lambda.norm() - 1.0).abs() <= UNIT_CIRCLE_TOL) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} is not on the unit circle")));
    }
    Ok(())
}

/// `d(lambda) = min_mu |lambda - mu|` over the arc samples.
///
/// Searches outward from the nearest sample by argument and stops once the
/// chord length for the angular offset exceeds the best distance found.
pub fn gap_distance(lambda: c64, arcs: &EssentialArcs) -> Result<f64> {
    check_on_circle(lambda)?;
    let pts = &arcs.by_angle;
    let n = pts.len();
    if n == 0 {
        return Err(Error::EmptyArcs);
    }
    let theta = lambda.arg();
    let start = pts.partition_point(|p| p.0 < theta) % n;
    let mut best = f64::INFINITY;
    // slack for samples and lambda sitting slightly off the circle
    let slack = 2.0 * UNIT_CIRCLE_TOL + (lambda.norm() - 1.0).abs();
    for dir in [1isize, -1] {
        for step in 0..n {
            let idx = (start as isize + dir * step as isize).rem_euclid(n as isize) as usize;
            let (phi, mu) = pts[idx];
            let mut gap = (phi - theta).abs();
            if gap > PI {
                gap = 2.0 * PI - gap;
            }
            if 2.0 * (gap / 2.0).sin() - slack > best {
                break;
            }
            best = best.min((lambda - mu).norm());
        }
    }
    Ok(best)
}

/// Brute-force `d(lambda)` over every sample.
pub fn gap_distance_exhaustive(lambda: c64, arcs: &EssentialArcs) -> Result<f64> {
    check_on_circle(lambda)?;
    arcs.points().map(|mu| (lambda - mu).norm()).min_by(f64::total_cmp).ok_or(Error::EmptyArcs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionCriteria {
    pub gap_min: f64,
    pub mass_min: f64,
    /// Radius of the core region; `None` means `L / 4`.
    pub core_radius: Option<f64>,
    pub stability_tol: f64,
}

impl Default for DetectionCriteria {
    fn default() -> Self {
        Self { gap_min: 0.05, mass_min: 0.9, core_radius: None, stability_tol: 1e-4 }
    }
}

impl DetectionCriteria {
    pub fn core_radius_for(&self, lattice: &LatticeBox) -> f64 {
        self.core_radius.unwrap_or(lattice.side() as f64 / 4.0)
    }
}

/// Fraction of `|v|^2` on sites with `|x| <= radius`.
pub fn core_mass(v: &[c64], lattice: &LatticeBox, radius: f64) -> f64 {
    let k = lattice.internal_dim();
    let mut inside = 0.0;
    let mut total = 0.0;
    for (site, block) in v.chunks(k).enumerate() {
        let w: f64 = block.iter().map(|a| a.norm_sqr()).sum();
        total += w;
        if lattice.radius(site) <= radius {
            inside += w;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedEigenpair {
    pub index: usize,
    pub lambda: [f64; 2],
    pub gap: f64,
    pub core_mass: f64,
}

impl DetectedEigenpair {
    pub fn value(&self) -> c64 {
        c64::new(self.lambda[0], self.lambda[1])
    }
}

/// Per-eigenvalue gap distance and core mass.
pub fn spectral_table(
    spectrum: &SpectrumResult,
    arcs: &EssentialArcs,
    lattice: &LatticeBox,
    criteria: &DetectionCriteria,
    exec: Execution,
) -> Result<Vec<(f64, f64)>> {
    let radius = criteria.core_radius_for(lattice);
    exec.map_range(spectrum.len(), |i| {
        let gap = gap_distance(spectrum.eigenvalues[i], arcs)?;
        let mass = core_mass(&spectrum.eigenvector(i), lattice, radius);
        Ok((gap, mass))
    })
    .into_iter()
    .collect()
}

/// Eigenpairs that clear the gap threshold and are localized in the core.
/// An empty result means no discrete spectrum was detected at this
/// truncation.
pub fn detect_discrete(
    spectrum: &SpectrumResult,
    arcs: &EssentialArcs,
    lattice: &LatticeBox,
    criteria: &DetectionCriteria,
    exec: Execution,
) -> Result<Vec<DetectedEigenpair>> {
    let table = spectral_table(spectrum, arcs, lattice, criteria, exec)?;
    Ok(select_discrete(spectrum, &table, criteria))
}

/// Applies the gap and core-mass thresholds to a precomputed
/// [`spectral_table`].
pub fn select_discrete(
    spectrum: &SpectrumResult,
    table: &[(f64, f64)],
    criteria: &DetectionCriteria,
) -> Vec<DetectedEigenpair> {
    table
        .iter()
        .enumerate()
        .filter(|(_, (gap, mass))| *gap > criteria.gap_min && *mass > criteria.mass_min)
        .map(|(index, &(gap, core_mass))| {
            let z = spectrum.eigenvalues[index];
            DetectedEigenpair { index, lambda: [z.re, z.im], gap, core_mass }
        })
        .collect()
}

/// Distance from `lambda` to the nearest detection at a larger truncation.
pub fn stability_shift(lambda: c64, larger: &[DetectedEigenpair]) -> Option<f64> {
    larger.iter().map(|p| (p.value() - lambda).norm()).min_by(f64::total_cmp)
}
