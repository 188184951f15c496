//! The disk model of the infinite-mass operator, reduced to one angular
//! channel.
//!
//! With φ = (f(r)e^{inθ}, i·g(r)e^{i(n+1)θ}) the eigenvalue equation of
//! −iσ·∇ on the disk becomes
//!
//! ```text
//! E f =  g' + (n+1) g / r
//! E g = −f' +   n   f / r
//! ```
//!
//! and P₋ tr φ = 0 turns into g(R) = f(R) (g(R) = −f(R) for P₊).
//!
//! The system is discretized by finite volumes on a staggered grid: f at
//! r_j = j·h (j = 0..M, with f₀ kept only for n = 0 where f(0) ≠ 0) and g
//! at r_{q+½}.  Interleaving the unknowns gives a real symmetric
//! tridiagonal matrix after symmetric scaling by the cell volumes ∫ r dr,
//! so eigenvalues are found by Sturm bisection.  The scheme is second order
//! for n ≤ 0; channels n ≥ 1 are obtained from the mirror channel −(n+1),
//! whose spectrum is the negative of channel n's.

use crate::{Error, Result};

/// Which boundary projection is annihilated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// P₋ tr φ = 0: the infinite-mass condition for positive mass outside.
    Minus,
    /// P₊ tr φ = 0: the condition obtained with the sign of the mass flipped.
    Plus,
}

impl BoundaryCondition {
    /// s in the endpoint relation g(R) = s·f(R).
    pub fn sign(self) -> f64 {
        match self {
            BoundaryCondition::Minus => 1.0,
            BoundaryCondition::Plus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            BoundaryCondition::Minus => BoundaryCondition::Plus,
            BoundaryCondition::Plus => BoundaryCondition::Minus,
        }
    }
}

/// One angular channel of the disk problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialChannel {
    pub n: i32,
    pub radius: f64,
    pub points: usize,
    pub bc: BoundaryCondition,
}

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Radial unknown: which component and at which radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialUnknown {
    F { r: f64 },
    G { r: f64 },
}

/// Discretized channel: the symmetric matrix A = W^{-1/2} K W^{-1/2}, the
/// layout of its unknowns and the cell volumes W.
#[derive(Clone, Debug)]
pub struct RadialMatrix {
    pub channel: RadialChannel,
    pub matrix: SymTridiagonal,
    pub layout: Vec<RadialUnknown>,
    pub weights: Vec<f64>,
    /// The matrix belongs to the mirror channel −(n+1) and is negated.
    pub mirrored: bool,
}

impl SymTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn negated(&self) -> Self {
        Self { diag: self.diag.iter().map(|d| -d).collect(), off: self.off.iter().map(|e| -e).collect() }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let scale = self.gershgorin().1.abs().max(self.gershgorin().0.abs()).max(1.0);
        let tiny = f64::EPSILON * scale * 1e-3;
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1e-12;
        hi += 1e-12;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// All eigenvalues in [a, b), ascending.
    pub fn eigenvalues_in(&self, a: f64, b: f64) -> Vec<f64> {
        let (lo, hi) = (self.count_below(a), self.count_below(b));
        (lo..hi).map(|k| self.eigenvalue(k)).collect()
    }

    /// Normalized eigenvector for a (converged) eigenvalue by inverse
    /// iteration with a pivoted tridiagonal solver.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let shift = lambda + 1e-13 * lambda.abs().max(1.0);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            v = solve_shifted(self, shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

/// Solves (A − σ) x = b with Gaussian elimination and partial pivoting.
fn solve_shifted(a: &SymTridiagonal, sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    // Rows kept as (sub, diag, sup, sup2) after pivoting.
    let mut dl: Vec<f64> = a.off.clone();
    let mut d: Vec<f64> = a.diag.iter().map(|x| x - sigma).collect();
    let mut du: Vec<f64> = a.off.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = 1e-300;
            }
            let l = dl[i] / d[i];
            d[i + 1] -= l * du[i];
            x[i + 1] -= l * x[i];
            dl[i] = 0.0;
        } else {
            let l = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - l * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -l;
            }
            du[i] = tmp;
            x.swap(i, i + 1);
            x[i + 1] -= l * x[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = 1e-300;
    }
    x[n - 1] /= d[n - 1];
    if n >= 2 {
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

impl RadialChannel {
    pub fn new(n: i32, radius: f64, points: usize, bc: BoundaryCondition) -> Result<Self> {
        if points < 64 {
            return Err(Error::Operator(format!("radial grid needs at least 64 points, got {points}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Operator(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self { n, radius, points, bc })
    }

    /// Eigenvalues in [a, b), ascending.
    pub fn eigenvalues_in(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        Ok(radial_channel_matrix(self)?.matrix.eigenvalues_in(a, b))
    }
}

/// Builds the discretized channel (see the module documentation).  For
/// n ≥ 1 the returned matrix is the negated matrix of channel −(n+1).
pub fn radial_channel_matrix(ch: &RadialChannel) -> Result<RadialMatrix> {
    let ch = RadialChannel::new(ch.n, ch.radius, ch.points, ch.bc)?;
    if ch.n >= 1 {
        let mirror = RadialChannel { n: -(ch.n + 1), ..ch };
        let base = build_nonpositive(&mirror);
        return Ok(RadialMatrix { channel: ch, matrix: base.matrix.negated(), layout: base.layout, weights: base.weights, mirrored: true });
    }
    Ok(build_nonpositive(&ch))
}

fn build_nonpositive(ch: &RadialChannel) -> RadialMatrix {
    let m = ch.points;
    let r_big = ch.radius;
    let h = r_big / m as f64;
    let n = ch.n as f64;
    let keep_origin = ch.n == 0;
    let mut layout = Vec::with_capacity(2 * m + 1);
    let mut weights = Vec::with_capacity(2 * m + 1);
    if keep_origin {
        layout.push(RadialUnknown::F { r: 0.0 });
        weights.push(h * h / 8.0);
    }
    for q in 0..m {
        let rg = (q as f64 + 0.5) * h;
        layout.push(RadialUnknown::G { r: rg });
        weights.push(rg * h);
        let rf = (q + 1) as f64 * h;
        layout.push(RadialUnknown::F { r: rf });
        weights.push(if q + 1 == m { r_big * h / 2.0 - h * h / 8.0 } else { rf * h });
    }
    let dim = layout.len();
    let mut diag = vec![0.0; dim];
    let mut off = vec![0.0; dim - 1];
    // Couplings between neighbours (f_q, g_q) and (g_q, f_{q+1}).
    for i in 0..dim - 1 {
        let k = match (layout[i], layout[i + 1]) {
            (RadialUnknown::F { .. }, RadialUnknown::G { r }) => r + n * h / 2.0,
            (RadialUnknown::G { r }, RadialUnknown::F { .. }) => -r + n * h / 2.0,
            _ => unreachable!("unknowns alternate"),
        };
        off[i] = k / (weights[i] * weights[i + 1]).sqrt();
    }
    diag[dim - 1] = ch.bc.sign() * r_big / weights[dim - 1];
    RadialMatrix { channel: *ch, matrix: SymTridiagonal { diag, off }, layout, weights, mirrored: false }
}

impl RadialMatrix {
    /// Splits a symmetric-scaled eigenvector into physical samples
    /// (r, f) and (r, g) of the discretized channel (the mirror channel if
    /// [`Self::mirrored`]).
    pub fn profiles(&self, y: &[f64]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let mut f = vec![];
        let mut g = vec![];
        for ((u, w), yi) in self.layout.iter().zip(&self.weights).zip(y) {
            let x = yi / w.sqrt();
            match *u {
                RadialUnknown::F { r } => f.push((r, x)),
                RadialUnknown::G { r } => g.push((r, x)),
            }
        }
        (f, g)
    }

    /// |g(R) − s·f(R)| relative to max(|f|, |g|) for an eigenvector, with
    /// g(R) extrapolated by a cubic through the last four half points.
    pub fn boundary_mismatch(&self, y: &[f64]) -> f64 {
        let (f, g) = self.profiles(y);
        let k = g.len();
        let (g1, g2, g3, g4) = (g[k - 1].1, g[k - 2].1, g[k - 3].1, g[k - 4].1);
        // Nodes at R − h/2, R − 3h/2, ... ; Lagrange weights at R.
        let g_r = (35.0 * g1 - 35.0 * g2 + 21.0 * g3 - 5.0 * g4) / 16.0;
        let f_r = f.last().expect("f has a boundary node").1;
        let scale = f.iter().chain(&g).fold(0.0f64, |m, p| m.max(p.1.abs()));
        (g_r - self.channel.bc.sign() * f_r).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let c0 = radial_channel_matrix(&RadialChannel::new(0, 1.0, 64, BoundaryCondition::Minus).unwrap()).unwrap();
        assert_eq!(c0.matrix.dim(), 129);
        let c1 = radial_channel_matrix(&RadialChannel::new(-1, 1.0, 64, BoundaryCondition::Minus).unwrap()).unwrap();
        assert_eq!(c1.matrix.dim(), 128);
        assert!(RadialChannel::new(0, 1.0, 32, BoundaryCondition::Minus).is_err());
    }

    #[test]
    fn sturm_matches_dense() {
        let t = SymTridiagonal { diag: vec![2.0, -1.0, 0.5, 3.0], off: vec![1.0, 0.3, -0.7] };
        let c = crate::linalg::CMatrix::from_fn(4, 4, |i, j| {
            let v = if i == j { t.diag[i] } else if i + 1 == j { t.off[i] } else if j + 1 == i { t.off[j] } else { 0.0 };
            crate::C64::new(v, 0.0)
        });
        let (w, _) = crate::linalg::jacobi_eigh(&c);
        for (k, &lam) in w.iter().enumerate() {
            assert!((t.eigenvalue(k) - lam).abs() < 1e-13);
            let v = t.eigenvector(lam);
            let av = t.matvec(&v);
            let r: f64 = av.iter().zip(&v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
            assert!(r < 1e-10);
        }
    }

    #[test]
    fn first_root_close_to_bessel_condition() {
        let ch = RadialChannel::new(0, 1.0, 512, BoundaryCondition::Minus).unwrap();
        let ev = ch.eigenvalues_in(1.0, 2.0).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0] - 1.434695650819565).abs() < 1e-5);
    }
}
