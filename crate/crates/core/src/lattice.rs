//! Truncated lattice geometry and the diagonal weights built from the
//! position modulus `|Q|`.
//!
//! The box is a centered periodic torus with an odd number of sites per
//! axis. Coordinates run over `-(L-1)/2 ..= (L-1)/2`, so a wraparound step
//! maps `+h` to `-h` on one axis and leaves `|x|` unchanged. Every site
//! carries `2d` internal components stored contiguously, leg by leg:
//! `(f_11, f_12, ..., f_d1, f_d2)`.

use faer::c64;

use crate::error::{Error, Result};

/// Largest natural-log exponent accepted by [`exp_weight`].
pub const DEFAULT_EXP_CAP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBox {
    dim: usize,
    side: usize,
    coords: Vec<i64>,
    radii: Vec<f64>,
}

impl LatticeBox {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        if side < 3 || side.is_multiple_of(2) {
            return Err(Error::InvalidLattice(format!("side length must be odd and >= 3, got {side}")));
        }
        let num_sites = side.checked_pow(dim as u32).ok_or_else(|| Error::InvalidLattice("box too large".into()))?;
        let half = (side / 2) as i64;
        let mut coords = Vec::with_capacity(num_sites * dim);
        let mut radii = Vec::with_capacity(num_sites);
        for site in 0..num_sites {
            let mut rem = site;
            let start = coords.len();
            coords.resize(start + dim, 0);
            // axis 0 is the slowest-varying digit
            for axis in (0..dim).rev() {
                coords[start + axis] = (rem % side) as i64 - half;
                rem /= side;
            }
            let r2: i64 = coords[start..].iter().map(|c| c * c).sum();
            radii.push((r2 as f64).sqrt());
        }
        Ok(Self { dim, side, coords, radii })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn half_width(&self) -> i64 {
        (self.side / 2) as i64
    }

    pub fn num_sites(&self) -> usize {
        self.radii.len()
    }

    /// Internal (coin) dimension `2d`.
    pub fn internal_dim(&self) -> usize {
        2 * self.dim
    }

    /// Total Hilbert space dimension `2d * L^d`.
    pub fn hilbert_dim(&self) -> usize {
        self.internal_dim() * self.num_sites()
    }

    pub fn coords(&self, site: usize) -> &[i64] {
        &self.coords[site * self.dim..(site + 1) * self.dim]
    }

    /// Euclidean norm of the centered coordinates.
    pub fn radius(&self, site: usize) -> f64 {
        self.radii[site]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    pub fn origin(&self) -> usize {
        self.num_sites() / 2
    }

    /// Site index of a centered coordinate tuple, `None` when out of the box.
    pub fn site_index(&self, coords: &[i64]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        let half = self.half_width();
        let mut index = 0usize;
        for &c in coords {
            if c < -half || c > half {
                return None;
            }
            index = index * self.side + (c + half) as usize;
        }
        Some(index)
    }

    /// Periodic neighbour `x + step * e_axis`.
    pub fn neighbor(&self, site: usize, axis: usize, step: i64) -> usize {
        let stride = self.side.pow((self.dim - 1 - axis) as u32);
        let digit = (site / stride) % self.side;
        let moved = (digit as i64 + step).rem_euclid(self.side as i64) as usize;
        site - digit * stride + moved * stride
    }

    /// Index of the first amplitude of `site` in a flat state vector.
    pub fn block_start(&self, site: usize) -> usize {
        site * self.internal_dim()
    }
}

/// A state on the truncated lattice, blocked per site.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    internal_dim: usize,
    amplitudes: Vec<c64>,
}

impl WaveFunction {
    pub fn new(lattice: &LatticeBox, amplitudes: Vec<c64>) -> Result<Self> {
        if amplitudes.len() != lattice.hilbert_dim() {
            return Err(Error::DimensionMismatch { expected: lattice.hilbert_dim(), got: amplitudes.len() });
        }
        Ok(Self { internal_dim: lattice.internal_dim(), amplitudes })
    }

    pub fn zeros(lattice: &LatticeBox) -> Self {
        Self { internal_dim: lattice.internal_dim(), amplitudes: vec![c64::new(0.0, 0.0); lattice.hilbert_dim()] }
    }

    /// Unit vector on internal component `component` of `site`.
    pub fn delta(lattice: &LatticeBox, site: usize, component: usize) -> Self {
        let mut psi = Self::zeros(lattice);
        psi.amplitudes[lattice.block_start(site) + component] = c64::new(1.0, 0.0);
        psi
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [c64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    pub fn num_sites(&self) -> usize {
        self.amplitudes.len() / self.internal_dim
    }

    pub fn site_block(&self, site: usize) -> &[c64] {
        &self.amplitudes[site * self.internal_dim..(site + 1) * self.internal_dim]
    }

    /// `|psi(x)|^2` summed over the internal components of `site`.
    pub fn site_norm_sqr(&self, site: usize) -> f64 {
        self.site_block(site).iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { internal_dim: self.internal_dim, amplitudes: self.amplitudes.iter().map(|a| a * factor).collect() }
    }

    /// Applies a diagonal weight site by site.
    pub fn weighted(&self, weight: &DiagonalWeight) -> Self {
        let d = self.internal_dim;
        let amplitudes = self.amplitudes.iter().enumerate().map(|(i, a)| a * weight.values[i / d]).collect();
        Self { internal_dim: d, amplitudes }
    }
}

/// A real diagonal operator that is constant on the internal space of each
/// site.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWeight {
    values: Vec<f64>,
}

impl DiagonalWeight {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn identity(lattice: &LatticeBox) -> Self {
        Self { values: vec![1.0; lattice.num_sites()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, site: usize) -> f64 {
        self.values[site]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_projection(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn product(&self, other: &DiagonalWeight) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    pub fn sum(&self, other: &DiagonalWeight) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    /// Value on the `k`-th row/column of the full `2d L^d` space.
    pub fn entry(&self, index: usize, internal_dim: usize) -> f64 {
        self.values[index / internal_dim]
    }
}

/// `E_{|Q|}([r1, r2))`. Use `f64::INFINITY` for an unbounded upper edge.
pub fn shell_projector(lattice: &LatticeBox, r1: f64, r2: f64) -> Result<DiagonalWeight> {
    if !(r1 >= 0.0) || !(r2 > r1) {
        return Err(Error::InvalidArgument(format!("shell needs 0 <= R1 < R2, got [{r1}, {r2})")));
    }
    Ok(DiagonalWeight { values: lattice.radii().iter().map(|&r| if r >= r1 && r < r2 { 1.0 } else { 0.0 }).collect() })
}

/// `E_{|Q|}([r, inf))`.
pub fn tail_projector(lattice: &LatticeBox, r: f64) -> Result<DiagonalWeight> {
    shell_projector(lattice, r.max(0.0), f64::INFINITY)
}

/// Smallest positive multiple of `b` that is at least `x`.
pub fn ceil_b(x: f64, b: f64) -> Result<f64> {
    if !(x > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument(format!("ceil_b needs x > 0 and b > 0, got x={x}, b={b}")));
    }
    let mut n = (x / b).ceil().max(1.0);
    while n > 1.0 && x <= (n - 1.0) * b {
        n -= 1.0;
    }
    while x > n * b {
        n += 1.0;
    }
    Ok(n * b)
}

/// The `n >= 1` with `r` in `B_n = [(n-1)b, nb)`.
pub fn shell_index(r: f64, b: f64) -> usize {
    debug_assert!(r >= 0.0 && b > 0.0);
    let mut n = (r / b).floor() + 1.0;
    while n > 1.0 && r < (n - 1.0) * b {
        n -= 1.0;
    }
    while r >= n * b {
        n += 1.0;
    }
    n as usize
}

fn check_step_args(delta: f64, b: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() || !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step weights need delta >= 0 and b > 0, got delta={delta}, b={b}"
        )));
    }
    Ok(())
}

/// Step weight `Lambda(|x|) = delta * n * b` for `|x|` in `B_n`.
pub fn lambda_weight(lattice: &LatticeBox, delta: f64, b: f64) -> Result<DiagonalWeight> {
    check_step_args(delta, b)?;
    Ok(DiagonalWeight { values: lattice.radii().iter().map(|&r| delta * shell_index(r, b) as f64 * b).collect() })
}

/// `Lambda_N`: equal to `Lambda` below `N b`, constant `delta N b` beyond.
pub fn lambda_weight_truncated(lattice: &LatticeBox, delta: f64, b: f64, n: usize) -> Result<DiagonalWeight> {
    check_step_args(delta, b)?;
    if n == 0 {
        return Err(Error::InvalidArgument("cutoff N must be >= 1".into()));
    }
    Ok(DiagonalWeight {
        values: lattice.radii().iter().map(|&r| delta * shell_index(r, b).min(n) as f64 * b).collect(),
    })
}

/// `exp(sign * w)` pointwise. Rejects weights whose magnitude exceeds `cap`.
pub fn exp_weight(w: &DiagonalWeight, sign: f64, cap: f64) -> Result<DiagonalWeight> {
    let worst = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if worst > cap {
        return Err(Error::Overflow { value: worst, cap });
    }
    Ok(DiagonalWeight { values: w.values.iter().map(|v| (sign * v).exp()).collect() })
}
