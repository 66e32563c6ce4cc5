mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use qwdecay_core::certify::*;
use qwdecay_core::lattice::{LatticeBox, WaveFunction, DEFAULT_EXP_CAP};
use qwdecay_core::linalg::{NormOptions, SparseMatrix};
use qwdecay_core::spectrum::{
    detect_discrete, eigendecompose, essential_arcs, DetectionCriteria, EssentialArcs, GridSpec,
};
use qwdecay_core::walk::{build_translation, build_walk, CoinSpec, ShiftParams, WalkOperator};
use qwdecay_core::{c64, Error, Execution};

fn uniform_psi(lattice: &LatticeBox) -> WaveFunction {
    let a = re(1.0 / (lattice.hilbert_dim() as f64).sqrt());
    WaveFunction::new(lattice, vec![a; lattice.hilbert_dim()]).unwrap()
}

fn origin_psi(lattice: &LatticeBox) -> WaveFunction {
    WaveFunction::delta(lattice, lattice.origin(), 0)
}

fn isolated_from(points: &[c64]) -> EssentialArcs {
    EssentialArcs::from_points(points.to_vec(), GridSpec { dim: 2, side: 1, refinement: 1 }, 0.0)
}

#[test]
fn shell_norms_of_point_mass_and_uniform_state() {
    let lattice = LatticeBox::new(2, 9).unwrap();
    let s = shell_norms(&origin_psi(&lattice), &lattice, 1.0).unwrap();
    assert_eq!(s.len(), 6);
    assert_eq!(s[0].norm, 1.0);
    assert!(s[1..].iter().all(|x| x.norm == 0.0));

    // sites with (n-1)^2 <= x^2 + y^2 < n^2, counted in integers
    let s = shell_norms(&uniform_psi(&lattice), &lattice, 1.0).unwrap();
    let mut total = 0.0;
    for shell in &s {
        let n = shell.n as i64;
        let count = (-4i64..=4)
            .flat_map(|x| (-4i64..=4).map(move |y| x * x + y * y))
            .filter(|&r2| (n - 1) * (n - 1) <= r2 && r2 < n * n)
            .count();
        assert!((shell.norm.powi(2) - count as f64 / 81.0).abs() < 1e-14, "shell {n}");
        total += shell.norm.powi(2);
    }
    assert!((total - 1.0).abs() < 1e-12);
    assert!(shell_norms(&uniform_psi(&lattice).scaled(2.0), &lattice, 1.0).is_err());
}

#[test]
fn summability_and_pointwise_constant_examples() {
    let lattice = LatticeBox::new(2, 11).unwrap();
    let psi = origin_psi(&lattice);
    for delta in [0.0, 0.4, 3.0] {
        let s = exp_summability(&psi, delta, &lattice, 1.0, DEFAULT_EXP_CAP).unwrap();
        assert_eq!((s.total, s.tail_ratio), (1.0, 0.0));
        assert_eq!(pointwise_constant(&psi, delta, &lattice, DEFAULT_EXP_CAP).unwrap(), 1.0);
    }
    let flat = exp_summability(&uniform_psi(&lattice), 5.0, &lattice, 1.0, DEFAULT_EXP_CAP).unwrap();
    assert!(flat.tail_ratio > 0.5);
    assert!(matches!(exp_summability(&psi, 100.0, &lattice, 1.0, DEFAULT_EXP_CAP), Err(Error::Overflow { .. })));

    let s = eigendecompose(&canonical_walk(11, 0.2)).unwrap();
    let psi = s.wavefunction(0, &lattice).unwrap();
    let c = pointwise_constant(&psi, 0.3, &lattice, DEFAULT_EXP_CAP).unwrap();
    assert!(pointwise_violations(&psi, 0.3, c, &lattice).is_empty());
    let tight = (0..lattice.num_sites())
        .map(|x| (psi.site_norm_sqr(x).sqrt() - c * (-0.3 * lattice.radius(x)).exp()).abs())
        .fold(f64::INFINITY, f64::min);
    assert!(tight <= 1e-15 * c);
    let doubled = WaveFunction::new(&lattice, psi.amplitudes().iter().map(|a| a * 2.0).collect()).unwrap();
    assert_eq!(pointwise_constant(&doubled, 0.3, &lattice, DEFAULT_EXP_CAP).unwrap(), 2.0 * c);
}

#[test]
fn propagation_bounds() {
    let lattice = Arc::new(LatticeBox::new(2, 9).unwrap());
    let id = SparseMatrix::identity(lattice.hilbert_dim());
    assert_eq!(propagation_bound(&id, &lattice), 0.0);
    assert!(canonical_walk(9, 0.3).propagation_bound() <= 1.0);

    let t = build_translation(&lattice, 0).unwrap();
    let t2 = t.matrix().mul(t.matrix());
    assert_eq!(propagation_bound(&t2, &lattice), 2.0);
    assert!(matches!(WalkOperator::new(lattice.clone(), t2.clone(), 1.0), Err(Error::PropagationExceeded { .. })));

    // the certifier refuses b = 1 for it and accepts b = 2
    let psi = origin_psi(&lattice);
    let arcs = isolated_from(&[re(-1.0)]);
    let lying = WalkOperator::new_unchecked(lattice.clone(), t2.clone(), 1.0).unwrap();
    let err = certify(&lying, re(1.0), &psi, &arcs, &CertifyOptions::default(), Execution::Sequential);
    assert!(matches!(err, Err(Error::PropagationExceeded { .. })));
    let honest = WalkOperator::new(lattice, t2, 2.0).unwrap();
    let cert = certify(&honest, re(1.0), &psi, &arcs, &CertifyOptions::default(), Execution::Sequential).unwrap();
    assert_eq!(cert.b, 2.0);
    assert_eq!(cert.delta_max, delta_max(2.0, 1.0).unwrap() / 2.0);
}

#[test]
fn gap_ratio_of_a_far_eigenvector_is_the_eigenvalue_distance() {
    // with q = 0 every site carries its own 4x4 block; take a block
    // eigenvector at a far site
    let lattice = Arc::new(LatticeBox::new(2, 9).unwrap());
    let op = build_walk(&lattice, &ShiftParams::diagonal(&[1.0, 1.0]).unwrap(), &canonical_coin()).unwrap();
    let s = eigendecompose(&op).unwrap();
    let far = (0..s.len())
        .find(|&i| {
            let v = s.eigenvector(i);
            v.chunks(4).enumerate().all(|(site, b)| lattice.radius(site) >= 4.0 || b.iter().all(|a| a.norm() < 1e-12))
        })
        .unwrap();
    let mu = s.eigenvalues[far];
    let lambda = c64::from_polar(1.0, mu.arg() + 1.0);
    let f = s.eigenvector(far);
    let uf = op.matrix().apply(&f);
    let ratio = uf.iter().zip(&f).map(|(u, x)| (u - lambda * x).norm_sqr()).sum::<f64>().sqrt();
    assert!((ratio - (mu - lambda).norm()).abs() < 1e-12);
}

#[test]
fn gap_trials_are_seeded() {
    let op = canonical_walk(11, 0.1);
    let arcs = essential_arcs(&axis1_params(0.1), &uniform_phi(), 11, 2, Execution::Sequential).unwrap();
    let lambda = c64::new(0.6, 0.8);
    let a = check_gap_lower_bound(&op, lambda, &arcs, 3.0, 0.1, 200, 7).unwrap();
    let b = check_gap_lower_bound(&op, lambda, &arcs, 3.0, 0.1, 200, 7).unwrap();
    let c = check_gap_lower_bound(&op, lambda, &arcs, 3.0, 0.1, 200, 8).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.min_ratio.to_bits(), b.min_ratio.to_bits());
    assert_ne!(a.min_ratio, c.min_ratio);
    assert_eq!(a.trials, 200);
    assert!(check_gap_lower_bound(&op, lambda, &arcs, 6.0, 0.1, 10, 7).is_err());
}

#[test]
fn cutoff_commutator_examples() {
    let norm = NormOptions::default();
    let op = canonical_walk(21, 0.05);
    let c = check_cutoff_commutator(&op, 0.3, 1.0, 5.0, &norm).unwrap();
    assert!((c.bound - (1.8f64.exp() + 1.5f64.exp())).abs() < 1e-12);
    assert!(c.passed && c.support_ok == Some(true));
    assert!(c.measured > 0.0);

    let c = check_cutoff_commutator(&op, 0.0, 1.0, 4.0, &norm).unwrap();
    assert_eq!(c.bound, 2.0);
    assert!(c.measured <= 2.0);

    // radii on a 3x3 box are 0, 1, sqrt 2: nothing in [2, 4)
    let small = canonical_walk(3, 0.5);
    let c = check_cutoff_commutator(&small, 0.3, 1.0, 3.0, &norm).unwrap();
    assert_eq!(c.measured, 0.0);
}

#[test]
fn corrupted_support_is_detected() {
    // a coupling across three shells breaks the two-block structure
    let good = canonical_walk(9, 0.3);
    let lattice = good.lattice();
    let (x, y) = (lattice.origin(), lattice.site_index(&[3, 0]).unwrap());
    let mut triplets: Vec<_> = good.matrix().iter().collect();
    triplets.push((x * 4, y * 4, re(0.1)));
    let bad = good.with_matrix_unchecked(SparseMatrix::from_triplets(good.dim(), good.dim(), triplets));
    let c = check_cutoff_commutator(&bad, 0.3, 1.0, 2.0, &NormOptions::default()).unwrap();
    assert_eq!(c.support_ok, Some(false));
    assert!(!c.passed);
}

#[test]
fn exp_commutator_examples() {
    let norm = NormOptions::default();
    let op = canonical_walk(21, 0.05);
    assert_eq!(check_exp_commutator(&op, 0.0, 1.0, 5, &norm).unwrap().measured, 0.0);
    assert_eq!(check_exp_commutator(&op, 0.4, 1.0, 1, &norm).unwrap().measured, 0.0);
    for n in 2..=8 {
        let c = check_exp_commutator(&op, 0.3, 1.0, n, &norm).unwrap();
        assert!((c.bound - 0.6090405868943).abs() < 1e-12);
        assert!(c.passed && c.measured > 0.0);
    }
}

#[test]
fn monotone_surrogate_on_detected_pair() {
    let op = canonical_walk(11, 0.2);
    let s = eigendecompose(&op).unwrap();
    let arcs = essential_arcs(&axis1_params(0.2), &uniform_phi(), 11, 2, Execution::Parallel).unwrap();
    let found = detect_discrete(&s, &arcs, op.lattice(), &DetectionCriteria::default(), Execution::Parallel).unwrap();
    let p = &found[0];
    let psi = s.wavefunction(p.index, op.lattice()).unwrap();
    let delta = 0.9 * delta_max(p.gap, 1.0).unwrap();
    for r in [1.0, 2.0, 4.0] {
        let m = monotone_surrogate(&psi, op.lattice(), delta, 1.0, p.gap, r).unwrap();
        assert!(m.passed(), "{m:?}");
        assert_eq!(m.norms.len(), 8);
    }
    assert!(matches!(monotone_surrogate(&psi, op.lattice(), 2.0, 1.0, p.gap, 1.0), Err(Error::Hypothesis { .. })));
}

#[test]
fn point_mass_under_reflection_certifies_trivially() {
    let lattice = Arc::new(LatticeBox::new(2, 7).unwrap());
    let minus_id = SparseMatrix::identity(lattice.hilbert_dim()).scale(re(-1.0));
    let op = WalkOperator::new(lattice.clone(), minus_id, 1.0).unwrap();
    let arcs = isolated_from(&[re(-1.0)]);
    let cert =
        certify(&op, re(1.0), &origin_psi(&lattice), &arcs, &CertifyOptions::default(), Execution::Parallel).unwrap();
    assert!(cert.passed, "{:?}", cert.failed_checks);
    assert_eq!(cert.fitted_rate, None);
    assert_eq!(cert.summability_tail_ratio, 0.0);
    assert_eq!(cert.pointwise_c_delta, 1.0);
    assert_eq!(cert.d_lambda, 2.0);
    assert!(2.0 * (cert.delta_used * cert.b).sinh() < cert.d_lambda);
}

#[test]
fn hypothesis_is_enforced() {
    let lattice = Arc::new(LatticeBox::new(2, 7).unwrap());
    let op = WalkOperator::new(lattice.clone(), SparseMatrix::identity(lattice.hilbert_dim()), 1.0).unwrap();
    let arcs = isolated_from(&[c64::from_polar(1.0, PI / 2.0)]);
    for fraction in [1.0, 1.5] {
        let options = CertifyOptions { fraction, ..CertifyOptions::default() };
        let err = certify(&op, re(1.0), &origin_psi(&lattice), &arcs, &options, Execution::Sequential);
        assert!(matches!(err, Err(Error::Hypothesis { .. })), "{fraction}");
    }
    let on_arc = isolated_from(&[re(1.0)]);
    let err = certify(&op, re(1.0), &origin_psi(&lattice), &on_arc, &CertifyOptions::default(), Execution::Sequential);
    assert!(matches!(err, Err(Error::NotIsolated(_))));
}

#[test]
fn canonical_pair_certifies_on_a_small_box() {
    let op = canonical_walk(11, 0.1);
    let s = eigendecompose(&op).unwrap();
    let arcs = essential_arcs(&axis1_params(0.1), &uniform_phi(), 11, 4, Execution::Parallel).unwrap();
    let found = detect_discrete(&s, &arcs, op.lattice(), &DetectionCriteria::default(), Execution::Parallel).unwrap();
    assert_eq!(found.len(), 2);
    for p in &found {
        let psi = s.wavefunction(p.index, op.lattice()).unwrap();
        let cert = certify(&op, p.value(), &psi, &arcs, &CertifyOptions::default(), Execution::Parallel).unwrap();
        assert!(cert.passed, "{:?}", cert.failed_checks);
        assert!(cert.fitted_rate.unwrap() >= cert.delta_max - 0.05);
        assert!(cert.summability_tail_ratio <= 1e-6);
        for site in 0..op.lattice().num_sites() {
            let bound = cert.pointwise_c_delta * (-cert.delta_used * op.lattice().radius(site)).exp();
            assert!(psi.site_norm_sqr(site).sqrt() <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn uniform_coin_walk_has_no_certificate_input() {
    let lattice = Arc::new(LatticeBox::new(2, 9).unwrap());
    let coin = CoinSpec::uniform(uniform_phi()).unwrap();
    let op = build_walk(&lattice, &axis1_params(0.1), &coin).unwrap();
    let s = eigendecompose(&op).unwrap();
    let arcs = essential_arcs(&axis1_params(0.1), &uniform_phi(), 9, 2, Execution::Parallel).unwrap();
    assert!(detect_discrete(&s, &arcs, &lattice, &DetectionCriteria::default(), Execution::Parallel)
        .unwrap()
        .is_empty());
}
