//! Spectral projections by the Riesz formula
//! 𝟙_{(a,b)}(H) = −(1/2πi)∮ (H − z)^{-1} dz
//! on a rectangle around the window, Gauss–Legendre on each edge.

use std::f64::consts::PI;

use super::Spectrum;
use crate::identities::gauss_legendre;
use crate::linalg::LinearMap;
use crate::{Error, Result, C64};

/// Real interval (a, b) with a < b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralWindow {
    pub a: f64,
    pub b: f64,
}

impl SpectralWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("spectral window needs finite a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    /// Open-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

/// Rectangular contour through a and b, at distance ν above and below the
/// real axis, with `order` Gauss nodes per edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    pub window: SpectralWindow,
    pub offset: f64,
    pub order: usize,
}

impl ContourSpec {
    pub fn new(window: SpectralWindow, offset: f64, order: usize) -> Result<Self> {
        if !(offset > 0.0 && offset.is_finite()) {
            return Err(Error::Config(format!("contour offset must be positive, got {offset}")));
        }
        if order < 8 {
            return Err(Error::Config(format!("contour quadrature order must be at least 8, got {order}")));
        }
        Ok(Self { window, offset, order })
    }

    /// Quadrature nodes z_j and weights w_j with 𝟙_{(a,b)}(H) ≈ Σ w_j (H − z_j)^{-1}.
    pub fn nodes(&self) -> Vec<(C64, C64)> {
        let (a, b, nu) = (self.window.a, self.window.b, self.offset);
        let corners = [C64::new(a, -nu), C64::new(b, -nu), C64::new(b, nu), C64::new(a, nu), C64::new(a, -nu)];
        let rule = gauss_legendre(self.order);
        // −1/(2πi) = i/(2π).
        let pref = C64::new(0.0, 1.0 / (2.0 * PI));
        let mut out = Vec::with_capacity(4 * self.order);
        for e in 0..4 {
            let (z0, z1) = (corners[e], corners[e + 1]);
            let mid = (z0 + z1) * 0.5;
            let half = (z1 - z0) * 0.5;
            for &(t, wt) in &rule {
                out.push((mid + half * t, pref * half * wt));
            }
        }
        out
    }
}

/// Something that can apply (H − z)^{-1}.
pub trait ResolventSolver: Sync {
    fn dim(&self) -> usize;

    /// (H − z)^{-1} rhs.
    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>>;

    /// f(H)·x when the solver knows the spectral decomposition of H.
    fn apply_function(&self, _f: &dyn Fn(f64) -> C64, _x: &[C64]) -> Option<Vec<C64>> {
        None
    }

    /// Eigenvalues of H when known.
    fn eigenvalues(&self) -> Option<Vec<f64>> {
        None
    }
}

impl ResolventSolver for Spectrum {
    fn dim(&self) -> usize {
        Spectrum::dim(self)
    }

    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        Ok(Spectrum::apply_function(self, |l| 1.0 / (C64::new(l, 0.0) - z), rhs))
    }

    fn apply_function(&self, f: &dyn Fn(f64) -> C64, x: &[C64]) -> Option<Vec<C64>> {
        Some(Spectrum::apply_function(self, f, x))
    }

    fn eigenvalues(&self) -> Option<Vec<f64>> {
        Some(Spectrum::eigenvalues(self))
    }
}

/// The quadrature approximation P = Σ w_j R(z_j) of a Riesz projection, as
/// a matrix-free operator.
pub struct RieszProjection<'a> {
    solver: &'a dyn ResolventSolver,
    contour: ContourSpec,
    nodes: Vec<(C64, C64)>,
}

impl<'a> RieszProjection<'a> {
    pub fn new(solver: &'a dyn ResolventSolver, contour: ContourSpec) -> Self {
        Self { solver, contour, nodes: contour.nodes() }
    }

    pub fn contour(&self) -> &ContourSpec {
        &self.contour
    }

    /// Scalar filter f_Q(λ) = Σ w_j/(λ − z_j); P = f_Q(H).
    pub fn filter(&self, lambda: f64) -> C64 {
        filter_value(&self.nodes, lambda)
    }

    /// trace P: Σ f_Q(λ) over the spectrum when it is known, otherwise
    /// Σ_i ⟨e_i, P e_i⟩ (one application per basis vector).
    pub fn trace(&self) -> Result<C64> {
        if let Some(ev) = self.solver.eigenvalues() {
            return Ok(ev.iter().map(|&l| self.filter(l)).sum());
        }
        let n = self.solver.dim();
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut t = C64::new(0.0, 0.0);
        for i in 0..n {
            e[i] = C64::new(1.0, 0.0);
            t += self.apply(&e)?[i];
            e[i] = C64::new(0.0, 0.0);
        }
        Ok(t)
    }

    fn apply_nodes(&self, x: &[C64], adjoint: bool) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        for &(z, w) in &self.nodes {
            let (z, w) = if adjoint { (z.conj(), w.conj()) } else { (z, w) };
            let y = self.solver.solve(z, x).map_err(|e| match e {
                Error::ResolventSolve { residual, .. } => Error::ResolventSolve { z, residual },
                other => other,
            })?;
            for (o, yi) in out.iter_mut().zip(y) {
                *o += w * yi;
            }
        }
        Ok(out)
    }
}

fn filter_value(nodes: &[(C64, C64)], lambda: f64) -> C64 {
    nodes.iter().map(|&(z, w)| w / (C64::new(lambda, 0.0) - z)).sum()
}

impl LinearMap for RieszProjection<'_> {
    fn dim(&self) -> usize {
        self.solver.dim()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let nodes = &self.nodes;
        match self.solver.apply_function(&|l| filter_value(nodes, l), x) {
            Some(y) => Ok(y),
            None => self.apply_nodes(x, false),
        }
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        let nodes = &self.nodes;
        match self.solver.apply_function(&|l| filter_value(nodes, l).conj(), x) {
            Some(y) => Ok(y),
            None => self.apply_nodes(x, true),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_is_indicator() {
        let c = ContourSpec::new(SpectralWindow::new(-1.0, 1.0).unwrap(), 0.5, 64).unwrap();
        let p = RieszProjection::new(&NoSolver, c);
        assert!((p.filter(0.0) - 1.0).norm() < 1e-10);
        assert!((p.filter(0.3) - 1.0).norm() < 1e-10);
        assert!(p.filter(3.0).norm() < 1e-10);
        assert!(p.filter(-2.5).norm() < 1e-10);
    }

    struct NoSolver;

    impl ResolventSolver for NoSolver {
        fn dim(&self) -> usize {
            0
        }
        fn solve(&self, _: C64, _: &[C64]) -> Result<Vec<C64>> {
            unreachable!()
        }
    }

    #[test]
    fn invalid_contours() {
        let w = SpectralWindow::new(0.0, 1.0).unwrap();
        assert!(ContourSpec::new(w, 0.0, 16).is_err());
        assert!(ContourSpec::new(w, 0.1, 4).is_err());
        assert!(SpectralWindow::new(1.0, 1.0).is_err());
    }
}
