#![allow(dead_code)]

use std::sync::Arc;

use qwdecay_core::c64;
use qwdecay_core::lattice::LatticeBox;
use qwdecay_core::walk::{build_walk, CoinSpec, ShiftParams, WalkOperator};

pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

pub fn uniform_phi() -> Vec<c64> {
    vec![re(0.5); 4]
}

pub fn canonical_omega() -> Vec<c64> {
    vec![re(0.7f64.sqrt()), re(0.1f64.sqrt()), re(0.1f64.sqrt()), re(0.1f64.sqrt())]
}

pub fn canonical_coin() -> CoinSpec {
    CoinSpec::new(uniform_phi(), canonical_omega()).unwrap()
}

/// `q` on axis 1, diagonal shift on axis 2.
pub fn axis1_params(q: f64) -> ShiftParams {
    ShiftParams::new(vec![(1.0 - q * q).sqrt(), 1.0], vec![re(q), re(0.0)]).unwrap()
}

pub fn canonical_walk(side: usize, q: f64) -> WalkOperator {
    let lattice = Arc::new(LatticeBox::new(2, side).unwrap());
    build_walk(&lattice, &axis1_params(q), &canonical_coin()).unwrap()
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// equally sized point sets.
pub fn multiset_distance(a: &[c64], b: &[c64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for z in a {
        let (j, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(dist);
    }
    worst
}
