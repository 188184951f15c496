//! Periodic grids, ℂ²-valued fields, Pauli algebra and the boundary matrix.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::geometry::{DomainSpec, Region};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

// ---------------------------------------------------------------------------
// 2×2 matrices
// ---------------------------------------------------------------------------

/// A 2×2 complex matrix, row-major `m[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues of a Hermitian 2×2 matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let m = &self.0;
        let (a, d) = (m[0][0].re, m[1][1].re);
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + m[0][1].norm_sqr()).sqrt();
        [mean - rad, mean + rad]
    }

    /// Spectral norm of a Hermitian 2×2 matrix.
    pub fn hermitian_norm(&self) -> f64 {
        let [lo, hi] = self.hermitian_eigenvalues();
        lo.abs().max(hi.abs())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Mat2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

/// The three Pauli matrices.
#[derive(Clone, Copy, Debug)]
pub struct PauliTriple {
    pub s1: Mat2,
    pub s2: Mat2,
    pub s3: Mat2,
}

pub const SIGMA1: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
pub const SIGMA2: Mat2 = Mat2([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]]);
pub const SIGMA3: Mat2 = Mat2([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);

impl PauliTriple {
    pub fn standard() -> Self {
        Self { s1: SIGMA1, s2: SIGMA2, s3: SIGMA3 }
    }

    pub fn as_array(&self) -> [Mat2; 3] {
        [self.s1, self.s2, self.s3]
    }

    /// max over j,k of ‖σ_jσ_k + σ_kσ_j − 2δ_jk I‖_max.
    pub fn anticommutator_defect(&self) -> f64 {
        let s = self.as_array();
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let delta = if j == k { Mat2::IDENTITY.scale(C64::new(2.0, 0.0)) } else { Mat2::ZERO };
                worst = worst.max((s[j] * s[k] + s[k] * s[j] - delta).max_abs());
            }
        }
        worst
    }
}

/// σ·v for a real 2-vector.
pub fn sigma_dot(v: [f64; 2]) -> Mat2 {
    SIGMA1.scale(C64::new(v[0], 0.0)) + SIGMA2.scale(C64::new(v[1], 0.0))
}

fn check_unit(n: [f64; 2]) -> Result<()> {
    let len = n[0].hypot(n[1]);
    if !len.is_finite() || (len - 1.0).abs() > 1e-12 {
        return Err(Error::Geometry(format!("normal ({}, {}) is not a unit vector (|n| = {len})", n[0], n[1])));
    }
    Ok(())
}

/// Boundary matrix B = −iσ₃ σ·n for a unit normal `n`.
pub fn boundary_matrix(n: [f64; 2]) -> Result<Mat2> {
    check_unit(n)?;
    Ok((SIGMA3 * sigma_dot(n)).scale(-I))
}

/// The eigenprojections P± = (1 ± B)/2 of the boundary matrix.
pub fn projections(n: [f64; 2]) -> Result<(Mat2, Mat2)> {
    let b = boundary_matrix(n)?;
    let half = C64::new(0.5, 0.0);
    Ok(((Mat2::IDENTITY + b).scale(half), (Mat2::IDENTITY - b).scale(half)))
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on the torus [−L, L)², with an odd number of
/// cell-centred points per side so that the momentum set is symmetric.
///
/// Site `(ix, iy)` has flat index `iy·n + ix` and coordinates
/// `x_i = (i − (n−1)/2)·h`; the origin is always a grid point.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    half_length: f64,
    plans: Arc<FftPlans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("half_length", &self.half_length).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGrid(format!("points per side must be odd and >= 3, got {n}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!("half length must be positive, got {half_length}")));
        }
        let mut planner = FftPlanner::new();
        let plans = FftPlans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) };
        Ok(Self { n, half_length, plans: Arc::new(plans) })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Grid spacing h = 2L/n.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.n * self.n
    }

    /// Coordinate of index `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - ((self.n - 1) / 2) as f64) * self.spacing()
    }

    #[inline]
    pub fn point(&self, site: usize) -> [f64; 2] {
        [self.coord(site % self.n), self.coord(site / self.n)]
    }

    /// Signed frequency index of FFT bin `j`: 0, 1, …, (n−1)/2, −(n−1)/2, …, −1.
    #[inline]
    pub fn frequency(&self, j: usize) -> i64 {
        let half = (self.n - 1) / 2;
        if j <= half {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Momentum of FFT bin `j`, k = π·j'/L.
    #[inline]
    pub fn momentum(&self, j: usize) -> f64 {
        std::f64::consts::PI * self.frequency(j) as f64 / self.half_length
    }

    /// All momenta (kx, ky) of the grid, in FFT ordering.
    pub fn momenta(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.sites());
        for jy in 0..self.n {
            for jx in 0..self.n {
                out.push([self.momentum(jx), self.momentum(jy)]);
            }
        }
        out
    }

    /// In-place unnormalized 2D FFT of a scalar array in site ordering.
    /// Phases relative to the cell-centred origin are not applied; every
    /// use in the crate is either phase-free (Parseval) or a multiplier
    /// followed by the inverse transform, where they cancel.
    ///
    /// Output layout of the forward transform is *transposed*: entry
    /// `jx·n + jy` holds momentum `(k(jx), k(jy))`.  The inverse transform
    /// expects that layout.
    pub(crate) fn fft2(&self, data: &mut [C64], scratch: &mut Vec<C64>, inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let plan = if inverse { &self.plans.inverse } else { &self.plans.forward };
        let need = plan.get_inplace_scratch_len();
        if scratch.len() < need.max(n * n) {
            scratch.resize(need.max(n * n), ZERO);
        }
        let mut tmp = vec![ZERO; n * n];
        plan.process_with_scratch(data, &mut scratch[..need]);
        transpose::transpose(data, &mut tmp, n, n);
        plan.process_with_scratch(&mut tmp, &mut scratch[..need]);
        data.copy_from_slice(&tmp);
    }
}

// ---------------------------------------------------------------------------
// SpinorField
// ---------------------------------------------------------------------------

/// A ℂ²-valued field on a [`Grid`].  Values are stored interleaved,
/// `[φ₀(site 0), φ₁(site 0), φ₀(site 1), …]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    values: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), values: vec![ZERO; 2 * grid.sites()] }
    }

    /// Wraps an interleaved coefficient vector.
    pub fn from_vec(grid: &Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * grid.sites() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                2 * grid.sites(),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidGrid("field contains non-finite values".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Samples a closed-form spinor at every grid point.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 2]) -> [C64; 2]) -> Self {
        let mut values = Vec::with_capacity(2 * grid.sites());
        for site in 0..grid.sites() {
            let v = f(grid.point(site));
            values.extend_from_slice(&v);
        }
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &Grid, v: [C64; 2]) -> Self {
        Self::from_fn(grid, |_| v)
    }

    /// Field with independent uniform entries in the unit square of ℂ.
    pub fn random(grid: &Grid, rng: &mut impl Rng) -> Self {
        let values = (0..2 * grid.sites())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Self { grid: grid.clone(), values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn at(&self, site: usize) -> [C64; 2] {
        [self.values[2 * site], self.values[2 * site + 1]]
    }

    #[inline]
    pub fn set(&mut self, site: usize, v: [C64; 2]) {
        self.values[2 * site] = v[0];
        self.values[2 * site + 1] = v[1];
    }

    /// Extracts component `c` (0 or 1) as a contiguous scalar array.
    pub fn component(&self, c: usize) -> Vec<C64> {
        self.values.iter().skip(c).step_by(2).copied().collect()
    }

    pub fn scale(&self, s: C64) -> SpinorField {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|z| z * s).collect() }
    }

    /// `self + alpha·other`.
    pub fn add_scaled(&self, alpha: C64, other: &SpinorField) -> Result<SpinorField> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn norm_sqr(&self) -> f64 {
        let h = self.grid.spacing();
        h * h * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest pointwise deviation.
    pub fn max_abs_diff(&self, other: &SpinorField) -> Result<f64> {
        same_grid(self, other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Fourier coefficients of both components, in the transposed layout
    /// used by [`Grid::fft2`].
    pub fn to_momentum(&self) -> [Vec<C64>; 2] {
        let mut scratch = Vec::new();
        let mut out = [self.component(0), self.component(1)];
        for c in out.iter_mut() {
            self.grid.fft2(c, &mut scratch, false);
        }
        out
    }
}

/// Trigonometric interpolant of a grid field: evaluates the field and its
/// gradient at arbitrary points, exactly reproducing band-limited data.
#[derive(Clone, Debug)]
pub struct FourierInterpolant {
    grid: Grid,
    /// Normalized coefficients c[jx·n + jy] of both components.
    coeffs: [Vec<C64>; 2],
}

impl FourierInterpolant {
    pub fn new(f: &SpinorField) -> Self {
        let scale = 1.0 / f.grid.sites() as f64;
        let mut coeffs = f.to_momentum();
        for c in coeffs.iter_mut() {
            c.iter_mut().for_each(|z| *z *= scale);
        }
        Self { grid: f.grid.clone(), coeffs }
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        let d = t - self.grid.coord(0);
        (0..self.grid.n).map(|j| C64::from_polar(1.0, self.grid.momentum(j) * d)).collect()
    }

    /// Value and gradient (∂₁φ, ∂₂φ) at `x`.
    pub fn evaluate(&self, x: [f64; 2]) -> ([C64; 2], [[C64; 2]; 2]) {
        let n = self.grid.n;
        let (ex, ey) = (self.phases(x[0]), self.phases(x[1]));
        let mut val = [ZERO; 2];
        let mut grad = [[ZERO; 2]; 2];
        for jx in 0..n {
            let kx = self.grid.momentum(jx);
            for c in 0..2 {
                let row = &self.coeffs[c][jx * n..(jx + 1) * n];
                let mut s = ZERO;
                let mut sy = ZERO;
                for (jy, (&a, &e)) in row.iter().zip(&ey).enumerate() {
                    let t = a * e;
                    s += t;
                    sy += t * self.grid.momentum(jy);
                }
                val[c] += s * ex[jx];
                grad[0][c] += s * ex[jx] * I * kx;
                grad[1][c] += sy * ex[jx] * I;
            }
        }
        (val, grad)
    }

    pub fn value(&self, x: [f64; 2]) -> [C64; 2] {
        self.evaluate(x).0
    }
}

/// Spectral gradient (∂₁f, ∂₂f) of a field, each as an interleaved vector.
pub fn spectral_gradient(f: &SpinorField) -> [Vec<C64>; 2] {
    let grid = &f.grid;
    let n = grid.n;
    let scale = 1.0 / grid.sites() as f64;
    let hat = f.to_momentum();
    let mut scratch = Vec::new();
    let mut out = [vec![ZERO; 2 * grid.sites()], vec![ZERO; 2 * grid.sites()]];
    for (d, o) in out.iter_mut().enumerate() {
        for (c, hc) in hat.iter().enumerate() {
            let mut a = hc.clone();
            for jx in 0..n {
                for jy in 0..n {
                    let k = if d == 0 { grid.momentum(jx) } else { grid.momentum(jy) };
                    a[jx * n + jy] *= I * k * scale;
                }
            }
            grid.fft2(&mut a, &mut scratch, true);
            for (site, v) in a.into_iter().enumerate() {
                o[2 * site + c] = v;
            }
        }
    }
    out
}

fn same_grid(a: &SpinorField, b: &SpinorField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// ⟨f, g⟩ = h² Σ_sites (f, g)_{ℂ²}, antilinear in the first argument.
pub fn inner_product(f: &SpinorField, g: &SpinorField) -> Result<Complex64> {
    same_grid(f, g)?;
    let h = f.grid.spacing();
    Ok(crate::linalg::dot_conj(&f.values, &g.values) * (h * h))
}

/// Momentum-space inner product h²/n² Σ_k (f̂(k), ĝ(k)); equals
/// [`inner_product`] by Parseval.
pub fn momentum_inner_product(f: &SpinorField, g: &SpinorField) -> Result<Complex64> {
    same_grid(f, g)?;
    let (fh, gh) = (f.to_momentum(), g.to_momentum());
    let h = f.grid.spacing();
    let n2 = f.grid.sites() as f64;
    let s = crate::linalg::dot_conj(&fh[0], &gh[0]) + crate::linalg::dot_conj(&fh[1], &gh[1]);
    Ok(s * (h * h / n2))
}

/// Splits `f` into its Ω and Ω^c parts: returns `f·1_part`.
pub fn restrict(f: &SpinorField, domain: &DomainSpec, part: Region) -> SpinorField {
    let mask = domain.region_mask(&f.grid);
    let mut out = f.clone();
    for (site, r) in mask.iter().enumerate() {
        if *r != part {
            out.set(site, [ZERO, ZERO]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_anticommutation() {
        assert!(PauliTriple::standard().anticommutator_defect() <= 1e-15);
    }

    #[test]
    fn boundary_matrix_axes() {
        assert_eq!(boundary_matrix([1.0, 0.0]).unwrap(), SIGMA2);
        assert_eq!(boundary_matrix([0.0, 1.0]).unwrap(), SIGMA1.scale(C64::new(-1.0, 0.0)));
        assert!(boundary_matrix([1.0, 1.0]).is_err());
    }

    #[test]
    fn projections_axis() {
        let (pp, pm) = projections([1.0, 0.0]).unwrap();
        let expected = (Mat2::IDENTITY + SIGMA2).scale(C64::new(0.5, 0.0));
        assert!((pp - expected).max_abs() < 1e-16);
        assert!((pp + pm - Mat2::IDENTITY).max_abs() < 1e-16);
        assert!((pp.trace() - ONE).norm() < 1e-15);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(1, 1.0).is_err());
        assert!(Grid::new(9, 0.0).is_err());
        let g = Grid::new(9, 1.0).unwrap();
        assert_eq!(g.coord(4), 0.0);
        assert!((g.momentum(1) + g.momentum(8)).abs() < 1e-15);
    }

    #[test]
    fn constant_inner_product_is_area() {
        let g = Grid::new(11, 1.0).unwrap();
        let f = SpinorField::constant(&g, [ONE, ZERO]);
        let ip = inner_product(&f, &f).unwrap();
        assert!((ip.re - 4.0).abs() < 1e-12 && ip.im.abs() < 1e-15);
        let e2 = SpinorField::constant(&g, [ZERO, ONE]);
        assert_eq!(inner_product(&f, &e2).unwrap(), ZERO);
    }
}
