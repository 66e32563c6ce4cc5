mod common;

use common::*;
use qwdecay_core::c64;
use qwdecay_core::certify::{bounds_sweep, scan_gap_lower_bound, BoundsGrid};
use qwdecay_core::linalg::NormOptions;
use qwdecay_core::spectrum::essential_arcs;
use qwdecay_core::Execution;

#[test]
fn parallel_and_sequential_runs_agree_bitwise() {
    let op = canonical_walk(9, 0.2);
    let norm = NormOptions::default();
    let grid = BoundsGrid::default();
    let par = bounds_sweep(&op, 1.0, &grid, &norm, Execution::Parallel).unwrap();
    let seq = bounds_sweep(&op, 1.0, &grid, &norm, Execution::Sequential).unwrap();
    assert_eq!(par, seq);
    assert_eq!(par.len(), 11 * 8 + 11 * 7);

    let params = axis1_params(0.2);
    let a = essential_arcs(&params, &uniform_phi(), 9, 3, Execution::Parallel).unwrap();
    let b = essential_arcs(&params, &uniform_phi(), 9, 3, Execution::Sequential).unwrap();
    assert_eq!(a.samples, b.samples);

    let radii = [0.0, 1.0, 2.0, 3.0];
    let lambda = c64::new(0.6, 0.8);
    let a = scan_gap_lower_bound(&op, lambda, 0.5, &radii, 0.1, 50, 3, Execution::Parallel).unwrap();
    let b = scan_gap_lower_bound(&op, lambda, 0.5, &radii, 0.1, 50, 3, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}
