//! Decay certification for eigenpairs isolated from the essential spectrum,
//! plus executable checks of the quantitative bounds behind it: the gap
//! lower bound for vectors supported far out, the cutoff commutator bound
//! and the `2 sinh(delta b)` bound for commutators with exponential weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use faer::c64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lattice::{
    ceil_b, exp_weight, lambda_weight, lambda_weight_truncated, shell_index, shell_projector, tail_projector,
    DiagonalWeight, LatticeBox, WaveFunction, DEFAULT_EXP_CAP,
};
use crate::linalg::{self, operator_norm, NormOptions, SparseMatrix};
use crate::spectrum::{gap_distance, EssentialArcs};
use crate::walk::{WalkOperator, COUPLING_CUTOFF};

pub use crate::walk::propagation_bound;

/// Additive slack on every norm bound.
pub const BOUND_TOL: f64 = 1e-9;

/// Shells at or below this norm are ignored by the decay fit.
pub const SHELL_FLOOR: f64 = 1e-14;

pub const MIN_FIT_SHELLS: usize = 4;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellNorm {
    pub n: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub norm: f64,
}

fn require_normalized(psi: &WaveFunction) -> Result<()> {
    let n = psi.norm();
    if !((n - 1.0).abs() <= NORM_TOL) {
        return Err(Error::InvalidArgument(format!("wave function must be normalized, |psi| = {n}")));
    }
    Ok(())
}

/// `s_n = |E(B_n) psi|` for `n = 1..=ceil(max|x| / b)`.
pub fn shell_norms(psi: &WaveFunction, lattice: &LatticeBox, b: f64) -> Result<Vec<ShellNorm>> {
    require_normalized(psi)?;
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("b must be positive, got {b}")));
    }
    let count = shell_index(lattice.max_radius(), b);
    let mut sq = vec![0.0; count];
    for site in 0..lattice.num_sites() {
        sq[shell_index(lattice.radius(site), b) - 1] += psi.site_norm_sqr(site);
    }
    Ok(sq
        .into_iter()
        .enumerate()
        .map(|(i, s)| ShellNorm { n: i + 1, r_lo: i as f64 * b, r_hi: (i + 1) as f64 * b, norm: s.sqrt() })
        .collect())
}

/// `asinh(d / 2) / b`, the supremum of admissible `delta`.
pub fn delta_max(d_lambda: f64, b: f64) -> Result<f64> {
    if !(d_lambda > 0.0) {
        return Err(Error::NotIsolated(d_lambda));
    }
    if !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("b must be positive, got {b}")));
    }
    Ok((d_lambda / 2.0).asinh() / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    pub shells_used: usize,
}

/// Least-squares slope of `ln s_n` against `n b` over shells lying inside
/// `window`; the rate is minus the slope. `b` is read off the shells.
pub fn fit_decay_rate(shells: &[ShellNorm], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.r_lo >= window.0 - 1e-12 && s.r_hi <= window.1 + 1e-12 && s.norm > SHELL_FLOOR)
        .map(|s| (s.r_hi, s.norm.ln()))
        .collect();
    if pts.len() < MIN_FIT_SHELLS {
        return Err(Error::TooFewShells { needed: MIN_FIT_SHELLS, found: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy <= f64::EPSILON * m * my.abs().max(1.0) { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(DecayFit { rate: -slope, r_squared, shells_used: pts.len() })
}

fn check_exponent(delta: f64, lattice: &LatticeBox, cap: f64) -> Result<()> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be >= 0, got {delta}")));
    }
    let value = delta * lattice.max_radius();
    if value > cap {
        return Err(Error::Overflow { value, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summability {
    /// `|e^{delta |Q|} psi|^2`.
    pub total: f64,
    /// Share of `total` from the outermost shell.
    pub tail_ratio: f64,
}

/// Evaluates `|e^{delta |Q|} psi|^2` with shells taken at width `b`.
/// Large exponents are rescaled so the ratio stays finite.
pub fn exp_summability(psi: &WaveFunction, delta: f64, lattice: &LatticeBox, b: f64, cap: f64) -> Result<Summability> {
    check_exponent(delta, lattice, cap)?;
    let outer = shell_index(lattice.max_radius(), b);
    // only rescale when the squared weights could overflow
    let shift = (2.0 * delta * lattice.max_radius() - 600.0).max(0.0);
    let mut scaled = 0.0;
    let mut tail = 0.0;
    for site in 0..lattice.num_sites() {
        let r = lattice.radius(site);
        let t = (2.0 * delta * r - shift).exp() * psi.site_norm_sqr(site);
        scaled += t;
        if shell_index(r, b) == outer {
            tail += t;
        }
    }
    let tail_ratio = if scaled > 0.0 { tail / scaled } else { 0.0 };
    Ok(Summability { total: scaled * shift.exp(), tail_ratio })
}

/// `C_delta = max_x e^{delta |x|} |psi(x)|`.
pub fn pointwise_constant(psi: &WaveFunction, delta: f64, lattice: &LatticeBox, cap: f64) -> Result<f64> {
    check_exponent(delta, lattice, cap)?;
    Ok((0..lattice.num_sites())
        .map(|site| (delta * lattice.radius(site)).exp() * psi.site_norm_sqr(site).sqrt())
        .fold(0.0, f64::max))
}

/// Sites where `|psi(x)| > C e^{-delta |x|}` beyond rounding.
pub fn pointwise_violations(psi: &WaveFunction, delta: f64, c_delta: f64, lattice: &LatticeBox) -> Vec<usize> {
    (0..lattice.num_sites())
        .filter(|&site| {
            let bound = c_delta * (-delta * lattice.radius(site)).exp();
            psi.site_norm_sqr(site).sqrt() > bound * (1.0 + 1e-12)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTrial {
    pub r: f64,
    pub trials: usize,
    /// Smallest `|U f - lambda f| / |f|` over the trials.
    pub min_ratio: f64,
    /// `d(lambda) - epsilon`.
    pub threshold: f64,
    pub failures: usize,
    pub passed: bool,
}

fn check_gap_args(op: &WalkOperator, r: f64) -> Result<()> {
    let limit = op.lattice().max_radius() - 2.0;
    if !(r >= 0.0 && r < limit) {
        return Err(Error::InvalidArgument(format!("gap check needs 0 <= R < max|x| - 2 = {limit}, got R = {r}")));
    }
    Ok(())
}

fn gap_trials(op: &WalkOperator, lambda: c64, threshold: f64, r: f64, trials: usize, seed: u64) -> GapTrial {
    let lattice = op.lattice();
    let k = lattice.internal_dim();
    let support: Vec<usize> = (0..lattice.num_sites()).filter(|&s| lattice.radius(s) >= r).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r.to_bits());
    let mut f = vec![c64::new(0.0, 0.0); op.dim()];
    let mut min_ratio = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..trials {
        for &site in &support {
            for a in &mut f[site * k..(site + 1) * k] {
                *a = c64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            }
        }
        let uf = op.matrix().apply(&f);
        let num: f64 = uf.iter().zip(&f).map(|(u, x)| (u - lambda * x).norm_sqr()).sum::<f64>().sqrt();
        let ratio = num / linalg::norm(&f);
        min_ratio = min_ratio.min(ratio);
        if ratio < threshold {
            failures += 1;
        }
    }
    GapTrial { r, trials, min_ratio, threshold, failures, passed: failures == 0 }
}

/// Samples `trials` seeded Gaussian vectors supported on `|x| >= R` and
/// tests `|U f - lambda f| >= (d(lambda) - epsilon) |f|`.
#[allow(clippy::too_many_arguments)]
pub fn check_gap_lower_bound(
    op: &WalkOperator,
    lambda: c64,
    arcs: &EssentialArcs,
    r: f64,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<GapTrial> {
    check_gap_args(op, r)?;
    let d = gap_distance(lambda, arcs)?;
    Ok(gap_trials(op, lambda, d - epsilon, r, trials, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapScan {
    pub epsilon: f64,
    pub seed: u64,
    pub rows: Vec<GapTrial>,
    /// Smallest scanned `R` from which every larger scanned radius passes.
    pub r_star: Option<f64>,
}

/// Default radii for the gap scan: `0, 1, ...` below `max|x| - 2`.
pub fn default_gap_radii(lattice: &LatticeBox) -> Vec<f64> {
    let limit = lattice.max_radius() - 2.0;
    (0..).map(|r| r as f64).take_while(|&r| r < limit).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn scan_gap_lower_bound(
    op: &WalkOperator,
    lambda: c64,
    d_lambda: f64,
    radii: &[f64],
    epsilon: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<GapScan> {
    for &r in radii {
        check_gap_args(op, r)?;
    }
    let rows = exec.map(radii, |&r| gap_trials(op, lambda, d_lambda - epsilon, r, trials, seed));
    let mut order: Vec<&GapTrial> = rows.iter().collect();
    order.sort_by(|a, b| a.r.total_cmp(&b.r));
    let mut r_star = None;
    for row in order.iter().rev() {
        if !row.passed {
            break;
        }
        r_star = Some(row.r);
    }
    Ok(GapScan { epsilon, seed, rows, r_star })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    CutoffCommutator,
    ExpCommutator,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::CutoffCommutator => "cutoff_commutator",
            BoundKind::ExpCommutator => "exp_commutator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub check: BoundKind,
    pub delta: f64,
    /// `N` for the exponential commutator, `R` for the cutoff commutator.
    pub parameter: f64,
    pub measured: f64,
    pub bound: f64,
    /// Cutoff check only: whether the commutator lives on the two
    /// transition blocks.
    pub support_ok: Option<bool>,
    pub passed: bool,
}

fn diagonal(weight: &DiagonalWeight, k: usize) -> SparseMatrix {
    let n = weight.len() * k;
    let triplets = (0..n).map(|i| (i, i, c64::new(weight.entry(i, k), 0.0)));
    SparseMatrix::from_triplets(n, n, triplets)
}

fn commutator(u: &SparseMatrix, d: &SparseMatrix) -> SparseMatrix {
    u.mul(d).sub(&d.mul(u))
}

/// `|e^{Lambda} [U, E([R, inf))]|` against `e^{delta ceil_b(R+b)} + e^{delta ceil_b(R)}`,
/// plus the support check: every nonzero entry couples `[R, R+b)` with
/// `[R-b, R)`.
pub fn check_cutoff_commutator(
    op: &WalkOperator,
    delta: f64,
    b: f64,
    r: f64,
    norm: &NormOptions,
) -> Result<BoundCheck> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff radius must be positive, got {r}")));
    }
    let lattice = op.lattice();
    let k = lattice.internal_dim();
    let weight = exp_weight(&lambda_weight(lattice, delta, b)?, 1.0, DEFAULT_EXP_CAP)?;
    let e = diagonal(&tail_projector(lattice, r)?, k);
    let comm = commutator(op.matrix(), &e);

    let outer = shell_projector(lattice, r, r + b)?;
    let inner = shell_projector(lattice, (r - b).max(0.0), r)?;
    let support_ok = comm.iter().filter(|(_, _, v)| v.norm() > COUPLING_CUTOFF).all(|(i, j, _)| {
        let (x, y) = (i / k, j / k);
        (outer.value(x) == 1.0 && inner.value(y) == 1.0) || (inner.value(x) == 1.0 && outer.value(y) == 1.0)
    });

    let weighted = diagonal(&weight, k).mul(&comm);
    let measured = operator_norm(&weighted, norm)?;
    let bound = (delta * ceil_b(r + b, b)?).exp() + (delta * ceil_b(r, b)?).exp();
    Ok(BoundCheck {
        check: BoundKind::CutoffCommutator,
        delta,
        parameter: r,
        measured,
        bound,
        support_ok: Some(support_ok),
        passed: support_ok && measured <= bound + BOUND_TOL,
    })
}

/// `|[U, e^{Lambda_N}] e^{-Lambda_N}|` against `2 sinh(delta b)`.
pub fn check_exp_commutator(op: &WalkOperator, delta: f64, b: f64, n: usize, norm: &NormOptions) -> Result<BoundCheck> {
    let lattice = op.lattice();
    let k = lattice.internal_dim();
    let lam = lambda_weight_truncated(lattice, delta, b, n)?;
    let w = diagonal(&exp_weight(&lam, 1.0, DEFAULT_EXP_CAP)?, k);
    let w_inv = diagonal(&exp_weight(&lam, -1.0, DEFAULT_EXP_CAP)?, k);
    let m = commutator(op.matrix(), &w).mul(&w_inv);
    let measured = operator_norm(&m, norm)?;
    let bound = 2.0 * (delta * b).sinh();
    Ok(BoundCheck {
        check: BoundKind::ExpCommutator,
        delta,
        parameter: n as f64,
        measured,
        bound,
        support_ok: None,
        passed: measured <= bound + BOUND_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsGrid {
    pub deltas: Vec<f64>,
    pub cutoffs: Vec<usize>,
    pub radii: Vec<f64>,
}

impl Default for BoundsGrid {
    /// `delta` in `{0, 0.05, ..., 0.5}`, `N` in `1..=8`, `R` in `2..=8`.
    fn default() -> Self {
        Self {
            deltas: (0..=10).map(|i| i as f64 * 0.05).collect(),
            cutoffs: (1..=8).collect(),
            radii: (2..=8).map(f64::from).collect(),
        }
    }
}

/// Runs both commutator checks over the grid. Rows come out exponential
/// checks first, each block in `(delta, parameter)` order.
pub fn bounds_sweep(
    op: &WalkOperator,
    b: f64,
    grid: &BoundsGrid,
    norm: &NormOptions,
    exec: Execution,
) -> Result<Vec<BoundCheck>> {
    let mut jobs: Vec<(BoundKind, f64, f64)> = Vec::new();
    for &delta in &grid.deltas {
        for &n in &grid.cutoffs {
            jobs.push((BoundKind::ExpCommutator, delta, n as f64));
        }
    }
    for &delta in &grid.deltas {
        for &r in &grid.radii {
            jobs.push((BoundKind::CutoffCommutator, delta, r));
        }
    }
    exec.map(&jobs, |&(kind, delta, p)| match kind {
        BoundKind::ExpCommutator => check_exp_commutator(op, delta, b, p as usize, norm),
        BoundKind::CutoffCommutator => check_cutoff_commutator(op, delta, b, p, norm),
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneSurrogate {
    pub r: f64,
    /// `|e^{Lambda_N} E([R, inf)) psi|` for `N = 1, 2, ...`.
    pub norms: Vec<f64>,
    pub bound: f64,
    pub nondecreasing: bool,
    pub bounded: bool,
}

impl MonotoneSurrogate {
    pub fn passed(&self) -> bool {
        self.nondecreasing && self.bounded
    }
}

/// Tracks `|e^{Lambda_N} E(R) psi|` up to the cutoff beyond which
/// `Lambda_N = Lambda` on the box, against
/// `2 (e^{delta ceil_b(R+b)} + e^{delta ceil_b(R)}) |psi| / (d - 2 sinh(delta b))`.
pub fn monotone_surrogate(
    psi: &WaveFunction,
    lattice: &LatticeBox,
    delta: f64,
    b: f64,
    d_lambda: f64,
    r: f64,
) -> Result<MonotoneSurrogate> {
    let margin = d_lambda - 2.0 * (delta * b).sinh();
    if !(margin > 0.0) {
        return Err(Error::Hypothesis { lhs: 2.0 * (delta * b).sinh(), d_lambda });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("surrogate radius must be positive, got {r}")));
    }
    let tail = psi.weighted(&tail_projector(lattice, r)?);
    let n_top = shell_index(lattice.max_radius(), b);
    let mut norms = Vec::with_capacity(n_top);
    for n in 1..=n_top {
        let w = exp_weight(&lambda_weight_truncated(lattice, delta, b, n)?, 1.0, DEFAULT_EXP_CAP)?;
        norms.push(tail.weighted(&w).norm());
    }
    let nondecreasing = norms.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-12));
    let bound = 2.0 * ((delta * ceil_b(r + b, b)?).exp() + (delta * ceil_b(r, b)?).exp()) * psi.norm() / margin;
    let bounded = norms.iter().all(|&v| v <= bound);
    Ok(MonotoneSurrogate { r, norms, bound, nondecreasing, bounded })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyOptions {
    /// `delta_used = fraction * delta_max`; must lie in `(0, 1)`.
    pub fraction: f64,
    pub rate_slack: f64,
    /// First shell of the fit window.
    pub fit_first_shell: usize,
    /// Number of outermost shells left out of the fit.
    pub fit_trim_outer: usize,
    pub tail_tol: f64,
    pub trials: usize,
    pub seed: u64,
    /// `None` means `(d - 2 sinh(delta b)) / 2`.
    pub epsilon: Option<f64>,
    /// `None` means [`default_gap_radii`].
    pub gap_radii: Option<Vec<f64>>,
    pub cutoff_radii: Vec<f64>,
    pub exp_cutoffs: Vec<usize>,
    pub exp_cap: f64,
    #[serde(skip)]
    pub norm: NormOptions,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            fraction: 0.9,
            rate_slack: 0.05,
            fit_first_shell: 3,
            fit_trim_outer: 2,
            tail_tol: 1e-6,
            trials: 200,
            seed: 0,
            epsilon: None,
            gap_radii: None,
            cutoff_radii: (2..=8).map(f64::from).collect(),
            exp_cutoffs: (1..=8).collect(),
            exp_cap: DEFAULT_EXP_CAP,
            norm: NormOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaChecks {
    pub gap_lower_bound: GapScan,
    pub cutoff_commutator: Vec<BoundCheck>,
    pub exp_commutator: Vec<BoundCheck>,
    pub monotone: Option<MonotoneSurrogate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub lambda: [f64; 2],
    pub residual: f64,
    pub d_lambda: f64,
    /// `d_lambda` minus the arc sampling resolution.
    pub d_lambda_lower: f64,
    pub b: f64,
    pub delta_max: f64,
    pub delta_used: f64,
    pub fitted_rate: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub fit_window: (f64, f64),
    pub fit_shells: usize,
    pub summability_total: f64,
    pub summability_tail_ratio: f64,
    pub pointwise_c_delta: f64,
    pub pointwise_violations: usize,
    pub lemma_checks: LemmaChecks,
    pub truncation_l: usize,
    pub failed_checks: Vec<String>,
    pub passed: bool,
}

/// Certifies exponential decay of `psi` at `delta_used = fraction * delta_max`.
///
/// Refuses (with an error) operators that propagate further than their
/// declared `b`, fractions outside `(0, 1)` and any choice violating
/// `2 sinh(delta b) < d(lambda)`. Failing sub-checks do not error; they are
/// listed in `failed_checks`.
pub fn certify(
    op: &WalkOperator,
    lambda: c64,
    psi: &WaveFunction,
    arcs: &EssentialArcs,
    options: &CertifyOptions,
    exec: Execution,
) -> Result<DecayCertificate> {
    let lattice = op.lattice();
    let b = op.b();
    let measured = op.propagation_bound();
    if measured > b + 1e-12 {
        return Err(Error::PropagationExceeded { measured, declared: b });
    }
    require_normalized(psi)?;
    let d = gap_distance(lambda, arcs)?;
    let dmax = delta_max(d, b)?;
    let delta = options.fraction * dmax;
    let lhs = 2.0 * (delta * b).sinh();
    if !(options.fraction > 0.0 && options.fraction < 1.0) || !(lhs < d) {
        return Err(Error::Hypothesis { lhs, d_lambda: d });
    }
    let residual = {
        let u_psi = op.matrix().apply(psi.amplitudes());
        u_psi.iter().zip(psi.amplitudes()).map(|(u, x)| (u - lambda * x).norm_sqr()).sum::<f64>().sqrt()
    };
    let mut failed = Vec::new();
    let d_lower = d - arcs.resolution;
    if !(lhs < d_lower) {
        failed.push("hypothesis_with_arc_resolution".to_string());
    }

    let shells = shell_norms(psi, lattice, b)?;
    let window = (
        (options.fit_first_shell.max(1) - 1) as f64 * b,
        shells.len().saturating_sub(options.fit_trim_outer) as f64 * b,
    );
    let (fitted_rate, fit_r_squared, fit_shells) = match fit_decay_rate(&shells, window) {
        Ok(fit) => {
            if fit.rate < dmax - options.rate_slack {
                failed.push("fitted_rate".to_string());
            }
            (Some(fit.rate), Some(fit.r_squared), fit.shells_used)
        }
        // too few shells above the floor: nothing left to decay
        Err(Error::TooFewShells { found, .. }) => (None, None, found),
        Err(e) => return Err(e),
    };

    let sum = exp_summability(psi, delta, lattice, b, options.exp_cap)?;
    if sum.tail_ratio > options.tail_tol {
        failed.push("exp_summability".to_string());
    }
    let c_delta = pointwise_constant(psi, delta, lattice, options.exp_cap)?;
    let violations = pointwise_violations(psi, delta, c_delta, lattice).len();
    if violations > 0 {
        failed.push("pointwise_bound".to_string());
    }

    let epsilon = options.epsilon.unwrap_or((d - lhs) / 2.0);
    let radii = options.gap_radii.clone().unwrap_or_else(|| default_gap_radii(lattice));
    let gap = scan_gap_lower_bound(op, lambda, d, &radii, epsilon, options.trials, options.seed, exec)?;
    match gap.r_star {
        Some(r) if r < lattice.side() as f64 / 2.0 => {}
        _ => failed.push("gap_lower_bound".to_string()),
    }

    let cutoff: Vec<BoundCheck> = exec
        .map(&options.cutoff_radii, |&r| check_cutoff_commutator(op, delta, b, r, &options.norm))
        .into_iter()
        .collect::<Result<_>>()?;
    if cutoff.iter().any(|c| !c.passed) {
        failed.push("cutoff_commutator".to_string());
    }
    let exp: Vec<BoundCheck> = exec
        .map(&options.exp_cutoffs, |&n| check_exp_commutator(op, delta, b, n, &options.norm))
        .into_iter()
        .collect::<Result<_>>()?;
    if exp.iter().any(|c| !c.passed) {
        failed.push("exp_commutator".to_string());
    }

    let monotone = match gap.r_star {
        Some(r) => Some(monotone_surrogate(psi, lattice, delta, b, d, r.max(b))?),
        None => None,
    };
    if monotone.as_ref().is_some_and(|m| !m.passed()) {
        failed.push("monotone_surrogate".to_string());
    }

    Ok(DecayCertificate {
        lambda: [lambda.re, lambda.im],
        residual,
        d_lambda: d,
        d_lambda_lower: d_lower,
        b,
        delta_max: dmax,
        delta_used: delta,
        fitted_rate,
        fit_r_squared,
        fit_window: window,
        fit_shells,
        summability_total: sum.total,
        summability_tail_ratio: sum.tail_ratio,
        pointwise_c_delta: c_delta,
        pointwise_violations: violations,
        lemma_checks: LemmaChecks { gap_lower_bound: gap, cutoff_commutator: cutoff, exp_commutator: exp, monotone },
        truncation_l: lattice.side(),
        passed: failed.is_empty(),
        failed_checks: failed,
    })
}
