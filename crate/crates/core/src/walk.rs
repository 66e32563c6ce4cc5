//! The split-leg shift `S`, the defect coin `C` and the walk `U = S C` on
//! the truncated lattice, plus the Bloch symbol of the defect-free bulk.

use std::sync::Arc;

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeBox;
use crate::linalg::SparseMatrix;

/// Tolerance for the algebraic identities (unitarity, involution, `D`).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Entries at or below this magnitude do not count as couplings.
pub const COUPLING_CUTOFF: f64 = 1e-13;

const NONZERO_TOL: f64 = 1e-12;

/// Shift parameters `(p, q)` with `p_j^2 + |q_j|^2 = 1` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftParams {
    p: Vec<f64>,
    q: Vec<c64>,
}

impl ShiftParams {
    pub fn new(p: Vec<f64>, q: Vec<c64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
        }
        if p.is_empty() {
            return Err(Error::InvalidArgument("shift parameters need d >= 1".into()));
        }
        for (j, (pj, qj)) in p.iter().zip(&q).enumerate() {
            let value = pj * pj + qj.norm_sqr();
            if !((value - 1.0).abs() <= ALGEBRA_TOL) {
                return Err(Error::ShiftConstraint { axis: j + 1, value });
            }
        }
        Ok(Self { p, q })
    }

    /// Parameters with `q = 0` and the given signs on `p`.
    pub fn diagonal(p_signs: &[f64]) -> Result<Self> {
        Self::new(p_signs.to_vec(), vec![c64::new(0.0, 0.0); p_signs.len()])
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[c64] {
        &self.q
    }

    /// Whether `p_l q_l != 0`, i.e. `(p, q)` lies in `D_l` (axis `l` is 0-based).
    pub fn in_d_l(&self, l: usize) -> bool {
        (self.p[l] * self.q[l]).norm() > NONZERO_TOL
    }

    /// All 0-based axes `l` with `(p, q)` in `D_l`.
    pub fn d_l_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&l| self.in_d_l(l)).collect()
    }
}

/// Bulk and defect coin vectors. `C_1 = 2|Phi><Phi| - 1` away from the
/// origin and `C_0 = 2|Omega><Omega| - 1` at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinSpec {
    phi: Vec<c64>,
    omega: Vec<c64>,
}

impl CoinSpec {
    pub fn new(phi: Vec<c64>, omega: Vec<c64>) -> Result<Self> {
        if phi.len() != omega.len() {
            return Err(Error::DimensionMismatch { expected: phi.len(), got: omega.len() });
        }
        if phi.is_empty() || !phi.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("coin vectors need length 2d, got {}", phi.len())));
        }
        for (name, v) in [("Phi", &phi), ("Omega", &omega)] {
            let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= ALGEBRA_TOL) {
                return Err(Error::CoinNormalization { name, norm });
            }
        }
        Ok(Self { phi, omega })
    }

    /// Defect-free coin: `Omega = Phi`.
    pub fn uniform(phi: Vec<c64>) -> Result<Self> {
        Self::new(phi.clone(), phi)
    }

    pub fn dim(&self) -> usize {
        self.phi.len() / 2
    }

    pub fn phi(&self) -> &[c64] {
        &self.phi
    }

    pub fn omega(&self) -> &[c64] {
        &self.omega
    }

    pub fn bulk_coin(&self) -> Mat<c64> {
        reflection(&self.phi)
    }

    pub fn defect_coin(&self) -> Mat<c64> {
        reflection(&self.omega)
    }
}

/// `2|v><v| - 1`.
pub fn reflection(v: &[c64]) -> Mat<c64> {
    let n = v.len();
    Mat::from_fn(n, n, |i, j| {
        let outer = v[i] * v[j].conj() * 2.0;
        if i == j {
            outer - c64::new(1.0, 0.0)
        } else {
            outer
        }
    })
}

/// Values entering the coin assumptions, for a sign vector `p0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoinReport {
    /// `Phi_j1 Omega_j2 + Phi_j2 Omega_j1` per leg `j`.
    pub cross_terms: Vec<[f64; 2]>,
    /// `<Phi_l, sigma_+ Omega_l> = conj(Phi_l1) Omega_l2` per leg `l`.
    pub sigma_plus_terms: Vec<[f64; 2]>,
    /// 1-based legs where the `sigma_+` overlap is nonzero.
    pub valid_l: Vec<usize>,
    pub p0: Vec<f64>,
    pub a_omega: f64,
    pub a_phi: f64,
    pub failures: Vec<String>,
}

impl CoinReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `sum_j p_j <v_j, sigma_3 v_j>`.
pub fn sigma3_average(v: &[c64], p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(j, pj)| pj * (v[2 * j].norm_sqr() - v[2 * j + 1].norm_sqr())).sum()
}

/// Evaluates every coin condition without failing on violations.
pub fn coin_report(spec: &CoinSpec, p0: &[f64]) -> Result<CoinReport> {
    let d = spec.dim();
    if d < 2 {
        return Err(Error::CoinAssumption("coin conditions are incompatible in one dimension (need d >= 2)".into()));
    }
    if p0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: p0.len() });
    }
    if p0.iter().any(|&s| s != 1.0 && s != -1.0) {
        return Err(Error::InvalidArgument(format!("p0 must lie in {{-1, 1}}^d, got {p0:?}")));
    }
    let (phi, omega) = (spec.phi(), spec.omega());
    let mut failures = Vec::new();
    let mut cross_terms = Vec::with_capacity(d);
    let mut sigma_plus_terms = Vec::with_capacity(d);
    let mut valid_l = Vec::new();
    for j in 0..d {
        let cross = phi[2 * j] * omega[2 * j + 1] + phi[2 * j + 1] * omega[2 * j];
        if cross.norm() <= NONZERO_TOL {
            failures.push(format!("cross-term condition fails at j={}: Phi_j1 Omega_j2 + Phi_j2 Omega_j1 = 0", j + 1));
        }
        cross_terms.push([cross.re, cross.im]);
        let sp = phi[2 * j].conj() * omega[2 * j + 1];
        if sp.norm() > NONZERO_TOL {
            valid_l.push(j + 1);
        }
        sigma_plus_terms.push([sp.re, sp.im]);
    }
    if valid_l.is_empty() {
        failures.push("sigma_+ condition fails: <Phi_l, sigma_+ Omega_l> = 0 for every l".into());
    }
    let a_omega = sigma3_average(omega, p0);
    let a_phi = sigma3_average(phi, p0);
    if (a_omega - a_phi).abs() <= NONZERO_TOL {
        failures.push(format!("bias condition fails: a_Omega(p0) = a_Phi(p0) = {a_phi}"));
    }
    Ok(CoinReport { cross_terms, sigma_plus_terms, valid_l, p0: p0.to_vec(), a_omega, a_phi, failures })
}

/// Like [`coin_report`] but fails on the first violated condition.
pub fn validate_coin_spec(spec: &CoinSpec, p0: &[f64]) -> Result<CoinReport> {
    let report = coin_report(spec, p0)?;
    match report.failures.first() {
        Some(f) => Err(Error::CoinAssumption(f.clone())),
        None => Ok(report),
    }
}

/// Largest `| |x| - |y| |` over couplings `<x|M|y>` with magnitude above
/// [`COUPLING_CUTOFF`]. Wraparound couplings are measured in centered
/// coordinates.
pub fn propagation_bound(matrix: &SparseMatrix, lattice: &LatticeBox) -> f64 {
    let k = lattice.internal_dim();
    matrix
        .iter()
        .filter(|(_, _, v)| v.norm() > COUPLING_CUTOFF)
        .map(|(i, j, _)| (lattice.radius(i / k) - lattice.radius(j / k)).abs())
        .fold(0.0, f64::max)
}

/// A unitary on the truncated space with its declared propagation constant.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    lattice: Arc<LatticeBox>,
    matrix: SparseMatrix,
    b: f64,
}

impl WalkOperator {
    /// Checks unitarity and that the matrix propagates by at most `b`.
    pub fn new(lattice: Arc<LatticeBox>, matrix: SparseMatrix, b: f64) -> Result<Self> {
        let op = Self::new_unchecked(lattice, matrix, b)?;
        op.verify()?;
        Ok(op)
    }

    /// Skips the unitarity and propagation checks; shapes are still checked.
    pub fn new_unchecked(lattice: Arc<LatticeBox>, matrix: SparseMatrix, b: f64) -> Result<Self> {
        let n = lattice.hilbert_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        if !(b >= 0.0) {
            return Err(Error::InvalidArgument(format!("propagation constant must be >= 0, got {b}")));
        }
        Ok(Self { lattice, matrix, b })
    }

    pub fn verify(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if !(deviation <= ALGEBRA_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        let measured = self.propagation_bound();
        if measured > self.b + ALGEBRA_TOL {
            return Err(Error::PropagationExceeded { measured, declared: self.b });
        }
        Ok(())
    }

    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> &Arc<LatticeBox> {
        &self.lattice
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        self.matrix.to_dense()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        self.matrix.unitarity_deviation()
    }

    pub fn propagation_bound(&self) -> f64 {
        propagation_bound(&self.matrix, &self.lattice)
    }

    /// `self * rhs` with propagation constant `b_self + b_rhs`.
    pub fn compose(&self, rhs: &WalkOperator) -> Result<WalkOperator> {
        if self.lattice != rhs.lattice {
            return Err(Error::InvalidArgument("operators live on different boxes".into()));
        }
        Ok(Self { lattice: self.lattice.clone(), matrix: self.matrix.mul(&rhs.matrix), b: self.b + rhs.b })
    }

    /// Replaces the matrix, keeping box and `b`. No checks are run.
    pub fn with_matrix_unchecked(&self, matrix: SparseMatrix) -> WalkOperator {
        Self { lattice: self.lattice.clone(), matrix, b: self.b }
    }
}

/// `S = S_1 (+) ... (+) S_d` with periodic wraparound.
pub fn build_shift(lattice: &Arc<LatticeBox>, params: &ShiftParams) -> Result<WalkOperator> {
    let d = lattice.dim();
    if params.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: params.dim() });
    }
    let k = lattice.internal_dim();
    let mut triplets = Vec::with_capacity(4 * lattice.hilbert_dim());
    for site in 0..lattice.num_sites() {
        for j in 0..d {
            let (p, q) = (params.p()[j], params.q()[j]);
            let upper = site * k + 2 * j;
            let lower = upper + 1;
            let fwd = lattice.neighbor(site, j, 1);
            let back = lattice.neighbor(site, j, -1);
            // (S f)_{j1}(x) = p f_{j1}(x) + q f_{j2}(x + e_j)
            triplets.push((upper, upper, c64::new(p, 0.0)));
            triplets.push((upper, fwd * k + 2 * j + 1, q));
            // (S f)_{j2}(x) = conj(q) f_{j1}(x - e_j) - p f_{j2}(x)
            triplets.push((lower, back * k + 2 * j, q.conj()));
            triplets.push((lower, lower, c64::new(-p, 0.0)));
        }
    }
    let matrix = SparseMatrix::from_triplets(lattice.hilbert_dim(), lattice.hilbert_dim(), triplets);
    WalkOperator::new_unchecked(lattice.clone(), matrix, 1.0)
}

/// Site-wise coin with `C_0` at the origin and `C_1` elsewhere.
pub fn build_coin(lattice: &Arc<LatticeBox>, spec: &CoinSpec) -> Result<WalkOperator> {
    let k = lattice.internal_dim();
    if spec.dim() != lattice.dim() {
        return Err(Error::DimensionMismatch { expected: k, got: spec.phi().len() });
    }
    let bulk = spec.bulk_coin();
    let defect = spec.defect_coin();
    let origin = lattice.origin();
    let mut triplets = Vec::with_capacity(k * lattice.hilbert_dim());
    for site in 0..lattice.num_sites() {
        let block = if site == origin { &defect } else { &bulk };
        let start = site * k;
        for r in 0..k {
            for c in 0..k {
                triplets.push((start + r, start + c, block[(r, c)]));
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(lattice.hilbert_dim(), lattice.hilbert_dim(), triplets);
    WalkOperator::new_unchecked(lattice.clone(), matrix, 0.0)
}

/// Factor order of the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Composition {
    /// `U = S C` (coin first).
    #[default]
    ShiftCoin,
    /// `U = C S`.
    CoinShift,
}

/// `U = S C` with `b = 1`.
pub fn build_walk(lattice: &Arc<LatticeBox>, params: &ShiftParams, spec: &CoinSpec) -> Result<WalkOperator> {
    build_walk_ordered(lattice, params, spec, Composition::ShiftCoin)
}

pub fn build_walk_ordered(
    lattice: &Arc<LatticeBox>,
    params: &ShiftParams,
    spec: &CoinSpec,
    order: Composition,
) -> Result<WalkOperator> {
    let shift = build_shift(lattice, params)?;
    let coin = build_coin(lattice, spec)?;
    let product = match order {
        Composition::ShiftCoin => shift.compose(&coin)?,
        Composition::CoinShift => coin.compose(&shift)?,
    };
    WalkOperator::new(lattice.clone(), product.matrix, 1.0)
}

/// Pure translation `(T f)(x) = f(x + e_axis)` on every internal component.
pub fn build_translation(lattice: &Arc<LatticeBox>, axis: usize) -> Result<WalkOperator> {
    if axis >= lattice.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let k = lattice.internal_dim();
    let triplets = (0..lattice.num_sites()).flat_map(|site| {
        let target = lattice.neighbor(site, axis, 1);
        (0..k).map(move |c| (site * k + c, target * k + c, c64::new(1.0, 0.0)))
    });
    let matrix = SparseMatrix::from_triplets(lattice.hilbert_dim(), lattice.hilbert_dim(), triplets);
    WalkOperator::new(lattice.clone(), matrix, 1.0)
}

/// Momentum-space matrix `S^(k) C_1` of the translation-invariant bulk.
#[derive(Debug, Clone)]
pub struct BlochSymbol {
    pub k: Vec<f64>,
    pub matrix: Mat<c64>,
}

impl BlochSymbol {
    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        self.matrix.eigenvalues().map_err(|e| Error::Eigensolver(format!("Bloch symbol: {e:?}")))
    }
}

pub fn shift_symbol(params: &ShiftParams, k: &[f64]) -> Mat<c64> {
    let d = params.dim();
    let mut s = Mat::<c64>::zeros(2 * d, 2 * d);
    for j in 0..d {
        let (p, q) = (params.p()[j], params.q()[j]);
        let phase = c64::from_polar(1.0, k[j]);
        s[(2 * j, 2 * j)] = c64::new(p, 0.0);
        s[(2 * j, 2 * j + 1)] = q * phase;
        s[(2 * j + 1, 2 * j)] = q.conj() * phase.conj();
        s[(2 * j + 1, 2 * j + 1)] = c64::new(-p, 0.0);
    }
    s
}

/// Bloch symbol at momentum `k` in `[-pi, pi)^d`.
pub fn bloch_symbol(params: &ShiftParams, phi: &[c64], k: &[f64]) -> Result<BlochSymbol> {
    let d = params.dim();
    if k.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: k.len() });
    }
    if phi.len() != 2 * d {
        return Err(Error::DimensionMismatch { expected: 2 * d, got: phi.len() });
    }
    let pi = std::f64::consts::PI;
    if let Some(bad) = k.iter().find(|&&kj| !(-pi..pi).contains(&kj)) {
        return Err(Error::InvalidArgument(format!("momentum {bad} outside [-pi, pi)")));
    }
    let matrix = shift_symbol(params, k) * reflection(phi);
    Ok(BlochSymbol { k: k.to_vec(), matrix })
}

/// `max |(M^* M - I)_{ij}|` for a small dense matrix.
pub fn dense_unitarity_deviation(m: &Mat<c64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn canonical_coin() -> CoinSpec {
        CoinSpec::new(vec![r(0.5); 4], vec![r(0.7f64.sqrt()), r(0.1f64.sqrt()), r(0.1f64.sqrt()), r(0.1f64.sqrt())])
            .unwrap()
    }

    #[test]
    fn shift_param_examples() {
        let s = ShiftParams::new(vec![1.0, 1.0], vec![r(0.0), r(0.0)]).unwrap();
        assert!(s.d_l_axes().is_empty());
        let s = ShiftParams::new(vec![0.8, 1.0], vec![r(0.6), r(0.0)]).unwrap();
        assert_eq!(s.d_l_axes(), vec![0]);
        match ShiftParams::new(vec![0.5, 0.0], vec![r(0.5), r(1.0)]) {
            Err(Error::ShiftConstraint { axis, .. }) => assert_eq!(axis, 1),
            other => panic!("expected constraint failure, got {other:?}"),
        }
    }

    #[test]
    fn coin_report_examples() {
        let rep = validate_coin_spec(&canonical_coin(), &[1.0, 1.0]).unwrap();
        assert!((rep.a_phi - 0.0).abs() < 1e-15);
        assert!((rep.a_omega - 0.6).abs() < 1e-12);
        assert_eq!(rep.valid_l, vec![1, 2]);

        let same = CoinSpec::uniform(vec![r(0.5); 4]).unwrap();
        let rep = coin_report(&same, &[1.0, 1.0]).unwrap();
        assert!(rep.failures.iter().any(|f| f.contains("bias condition")));
        assert!(validate_coin_spec(&same, &[1.0, 1.0]).is_err());

        let bad = CoinSpec::new(vec![r(0.5); 4], vec![r(1.0), r(0.0), r(0.0), r(0.0)]).unwrap();
        let rep = coin_report(&bad, &[1.0, 1.0]).unwrap();
        // the cross term vanishes on leg 2 only; sigma_+ overlaps vanish on both legs
        assert_eq!(rep.cross_terms[0], [0.5, 0.0]);
        assert_eq!(rep.cross_terms[1], [0.0, 0.0]);
        assert!(rep.failures[0].contains("cross-term") && rep.failures[0].contains("j=2"), "{:?}", rep.failures);
        assert!(rep.failures.iter().all(|f| !f.contains("j=1")));
        assert!(rep.failures.iter().any(|f| f.contains("sigma_+ condition")));
        assert!((rep.a_omega - 1.0).abs() < 1e-15);

        let one_d = CoinSpec::new(vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]).unwrap();
        assert!(coin_report(&one_d, &[1.0]).is_err());
        assert!(matches!(
            CoinSpec::new(vec![r(1.0); 4], vec![r(0.5); 4]),
            Err(Error::CoinNormalization { name: "Phi", .. })
        ));
    }

    #[test]
    fn one_dimensional_shift_by_hand() {
        // d = 1, L = 3, p = 0, q = 1. Sites -1, 0, 1 at indices 0, 1, 2;
        // components (f_1, f_2) at 2s, 2s+1.
        // (S f)_1(x) = f_2(x+1), (S f)_2(x) = f_1(x-1).
        let lat = Arc::new(LatticeBox::new(1, 3).unwrap());
        let params = ShiftParams::new(vec![0.0], vec![r(1.0)]).unwrap();
        let s = build_shift(&lat, &params).unwrap().to_dense();
        let mut expected = Mat::<c64>::zeros(6, 6);
        for (row, col) in [(0, 3), (2, 5), (4, 1), (1, 4), (3, 0), (5, 2)] {
            expected[(row, col)] = r(1.0);
        }
        assert_eq!(s, expected);
        let sq = &s * &s;
        assert_eq!(sq, Mat::<c64>::identity(6, 6));
    }

    #[test]
    fn diagonal_shift_when_q_vanishes() {
        let lat = Arc::new(LatticeBox::new(2, 3).unwrap());
        let params = ShiftParams::diagonal(&[1.0, -1.0]).unwrap();
        let s = build_shift(&lat, &params).unwrap();
        for (i, j, v) in s.matrix().iter() {
            assert_eq!(i, j);
            let expect = [1.0, -1.0, -1.0, 1.0][i % 4];
            assert_eq!(v, r(expect));
        }
        assert_eq!(s.matrix().nnz(), lat.hilbert_dim());
    }

    #[test]
    fn coin_blocks_are_reflections() {
        let spec = canonical_coin();
        for m in [spec.bulk_coin(), spec.defect_coin()] {
            let adj = m.adjoint().to_owned();
            assert!((&adj - &m).norm_max() < 1e-15);
            assert!((&m * &m - Mat::<c64>::identity(4, 4)).norm_max() < 1e-12);
            let mut ev: Vec<f64> = m.eigenvalues().unwrap().iter().map(|z| z.re).collect();
            ev.sort_by(f64::total_cmp);
            for (e, t) in ev.iter().zip([-1.0, -1.0, -1.0, 1.0]) {
                assert!((e - t).abs() < 1e-12);
            }
        }
        let lat = Arc::new(LatticeBox::new(2, 5).unwrap());
        let c = build_coin(&lat, &spec).unwrap();
        assert!(c.matrix().mul(c.matrix()).sub(&SparseMatrix::identity(100)).max_abs() < 1e-12);
        assert_eq!(c.propagation_bound(), 0.0);

        let uniform = build_coin(&lat, &CoinSpec::uniform(vec![r(0.5); 4]).unwrap()).unwrap();
        for site in 0..lat.num_sites() {
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(uniform.matrix().get(4 * site + a, 4 * site + b), spec.bulk_coin()[(a, b)]);
                }
            }
        }
    }

    #[test]
    fn walk_is_unitary_and_propagates_by_one() {
        let lat = Arc::new(LatticeBox::new(2, 7).unwrap());
        let params = ShiftParams::new(vec![0.6, -0.8], vec![c64::new(0.0, 0.8), c64::new(0.36, 0.48)]).unwrap();
        let u = build_walk(&lat, &params, &canonical_coin()).unwrap();
        assert!(u.unitarity_deviation() <= 1e-12);
        assert!(u.propagation_bound() <= 1.0 + 1e-12);
        assert_eq!(u.b(), 1.0);
    }

    #[test]
    fn translation_squared_propagates_by_two() {
        let lat = Arc::new(LatticeBox::new(2, 7).unwrap());
        let t = build_translation(&lat, 0).unwrap();
        let t2 = t.compose(&t).unwrap();
        assert_eq!(t2.b(), 2.0);
        assert!((t2.propagation_bound() - 2.0).abs() < 1e-15);
        assert!(t2.verify().is_ok());
        let claimed_one = WalkOperator::new(lat.clone(), t2.matrix().clone(), 1.0);
        assert!(matches!(claimed_one, Err(Error::PropagationExceeded { .. })));
    }

    #[test]
    fn defect_only_touches_the_origin_block() {
        let lat = Arc::new(LatticeBox::new(2, 7).unwrap());
        let params = ShiftParams::new(vec![0.6, 0.8], vec![r(0.8), r(0.6)]).unwrap();
        let bulk = build_walk(&lat, &params, &CoinSpec::uniform(vec![r(0.5); 4]).unwrap()).unwrap();
        let defect = build_walk(&lat, &params, &canonical_coin()).unwrap();
        let diff = defect.matrix().sub(bulk.matrix());
        let origin = lat.origin();
        for (_, j, v) in diff.iter() {
            if v.norm() > 1e-15 {
                assert_eq!(j / 4, origin);
            }
        }
    }

    #[test]
    fn symbol_examples() {
        let phi = vec![r(0.5); 4];
        let flat = ShiftParams::diagonal(&[1.0, 1.0]).unwrap();
        let a = bloch_symbol(&flat, &phi, &[0.3, -1.0]).unwrap();
        let b = bloch_symbol(&flat, &phi, &[-2.0, 2.5]).unwrap();
        assert!((&a.matrix - &b.matrix).norm_max() == 0.0);

        let params = ShiftParams::new(vec![0.6, 0.0], vec![c64::new(0.0, 0.8), r(1.0)]).unwrap();
        for k in [[0.0, 0.0], [1.0, -3.0], [-3.1, 3.1]] {
            let s = bloch_symbol(&params, &phi, &k).unwrap();
            assert!(dense_unitarity_deviation(&s.matrix) <= 1e-12);
        }
        assert!(bloch_symbol(&params, &phi, &[std::f64::consts::PI, 0.0]).is_err());
    }
}
