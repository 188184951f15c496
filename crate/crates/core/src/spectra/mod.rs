//! Eigenvalue machinery: dense solvers (full and symmetry-reduced), the
//! windowed Krylov solver, the disk oracle, Riesz projections and rate
//! fitting.

pub mod fit;
pub mod oracle;
pub mod riesz;
pub mod window;

use std::sync::Arc;

use crate::linalg::{hermitian_eig, symmetric_eig, CMatrix, RMatrix};
use crate::operators::symmetry::SymmetryReduction;
use crate::operators::{assemble_dense, OperatorSpec};
use crate::spinor::{Grid, SpinorField};
use crate::{Error, Result, C64};

pub use fit::{fit_rate, RateFit};
pub use oracle::{disk_oracle_eigs, pair_nearest, OracleEigenvalue, Pairing};
pub use riesz::{ContourSpec, ResolventSolver, RieszProjection, SpectralWindow};
pub use window::{window_eig, window_eig_all, window_eig_op, WindowOptions};

/// Eigenpairs with their verified residuals ‖Hv − λv‖ (v normalized).
#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// ℓ²-normalized coefficient vectors, if requested.
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub residuals: Vec<f64>,
}

impl EigenResult {
    /// Eigenvectors as fields normalized in the grid L² norm.
    pub fn fields(&self, grid: &Grid) -> Result<Vec<SpinorField>> {
        let vs = self.eigenvectors.as_ref().ok_or_else(|| Error::Operator("eigenvectors were not computed".into()))?;
        let h = grid.spacing();
        vs.iter()
            .map(|v| SpinorField::from_vec(grid, v.iter().map(|z| z / h).collect()))
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Full Hermitian eigendecomposition with residual verification
/// (‖Hv − λv‖ ≤ 1e−10·‖H‖ for every pair).
pub fn dense_eig(h: &CMatrix, cap: usize) -> Result<EigenResult> {
    if h.rows() > cap {
        return Err(Error::DenseCapExceeded { size: h.rows(), cap });
    }
    let dev = h.hermitian_deviation();
    if dev > 1e-10 {
        return Err(Error::NonHermitian { deviation: dev });
    }
    let (w, v) = hermitian_eig(h)?;
    let hv = h.mul(&v);
    let norm = w.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut residuals = Vec::with_capacity(w.len());
    for (k, &lam) in w.iter().enumerate() {
        let r: f64 = hv.col(k).iter().zip(v.col(k)).map(|(a, b)| (a - b * lam).norm_sqr()).sum::<f64>().sqrt();
        residuals.push(r);
    }
    let worst = residuals.iter().fold(0.0f64, |a, &b| a.max(b));
    if worst > 1e-10 * norm {
        return Err(Error::EigenNonConvergence { shift: f64::NAN, residual: worst });
    }
    let vectors = (0..v.cols()).map(|k| v.col(k).to_vec()).collect();
    Ok(EigenResult { eigenvalues: w, eigenvectors: Some(vectors), residuals })
}

/// Dense spectrum of a symmetric operator, stored per symmetry sector.
///
/// Built by [`SectorSolver::solve`]; every sector block is diagonalized as a
/// real symmetric matrix and residuals are verified.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    reduction: Arc<SymmetryReduction>,
    sectors: Vec<(Vec<f64>, RMatrix)>,
    max_residual: f64,
}

/// Caches the kinetic sector blocks so that many masses can be solved on
/// one grid.
#[derive(Clone, Debug)]
pub struct SectorSolver {
    reduction: Arc<SymmetryReduction>,
    kinetic: Vec<RMatrix>,
}

impl SectorSolver {
    pub fn new(grid: &Grid) -> Result<Self> {
        let reduction = Arc::new(SymmetryReduction::new(grid));
        let kinetic = (0..4).map(|q| reduction.kinetic_block(q)).collect::<Result<Vec<_>>>()?;
        Ok(Self { reduction, kinetic })
    }

    pub fn reduction(&self) -> &SymmetryReduction {
        &self.reduction
    }

    /// Whether `spec` is compatible with the symmetry reduction.
    pub fn supports(&self, spec: &OperatorSpec) -> bool {
        self.reduction.applies_to(spec)
    }

    /// Diagonalizes every sector of `spec`.
    pub fn solve(&self, spec: &OperatorSpec) -> Result<SectorSpectrum> {
        if !self.supports(spec) {
            return Err(Error::Operator("operator is not rotation/reflection symmetric on this grid".into()));
        }
        let mut sectors = Vec::with_capacity(4);
        let mut max_residual = 0.0f64;
        let norm = spec.norm_bound();
        for q in 0..4 {
            let local = self.reduction.local_block(q, spec)?;
            let mut block = self.kinetic[q].clone();
            for (b, l) in block.as_mut_slice().iter_mut().zip(local.as_slice()) {
                *b += l;
            }
            let (w, v) = symmetric_eig(&block)?;
            let av = block.mul(&v);
            for (k, &lam) in w.iter().enumerate() {
                let r: f64 = av.col(k).iter().zip(v.col(k)).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
                max_residual = max_residual.max(r);
            }
            sectors.push((w, v));
        }
        if max_residual > 1e-10 * norm {
            return Err(Error::EigenNonConvergence { shift: f64::NAN, residual: max_residual });
        }
        Ok(SectorSpectrum { reduction: self.reduction.clone(), sectors, max_residual })
    }
}

/// Location of an eigenpair inside a [`SectorSpectrum`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorEigen {
    pub value: f64,
    pub sector: usize,
    pub index: usize,
}

impl SectorSpectrum {
    pub fn dim(&self) -> usize {
        self.sectors.iter().map(|s| s.0.len()).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.sectors.iter().flat_map(|s| s.0.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Eigenpairs with a < λ < b, ascending (ties broken by sector).
    pub fn in_window(&self, a: f64, b: f64) -> Vec<SectorEigen> {
        let mut out = vec![];
        for (q, (w, _)) in self.sectors.iter().enumerate() {
            for (i, &value) in w.iter().enumerate() {
                if value > a && value < b {
                    out.push(SectorEigen { value, sector: q, index: i });
                }
            }
        }
        out.sort_by(|x, y| x.value.total_cmp(&y.value).then(x.sector.cmp(&y.sector)));
        out
    }

    /// Normalized eigenvector as an interleaved coefficient vector.
    pub fn eigenvector(&self, e: &SectorEigen) -> Vec<C64> {
        let v = &self.sectors[e.sector].1;
        self.reduction.lift_real(e.sector, v.col(e.index))
    }

    /// f(H)x with f applied to every eigenvalue.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        for (q, (w, v)) in self.sectors.iter().enumerate() {
            let c = self.reduction.project(q, x);
            let mut d = v.tmul_complex(&c);
            for (di, &lam) in d.iter_mut().zip(w) {
                *di *= f(lam);
            }
            let back = v.mul_complex(&d);
            for (o, y) in out.iter_mut().zip(self.reduction.lift(q, &back)) {
                *o += y;
            }
        }
        out
    }

    /// Σ f(λ) over the whole spectrum (trace of f(H)).
    pub fn trace_function(&self, f: impl Fn(f64) -> C64) -> C64 {
        self.sectors.iter().flat_map(|s| s.0.iter()).map(|&l| f(l)).sum()
    }
}

/// Hermitian operator with a known full eigendecomposition, for small
/// unsymmetric problems.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl DenseSpectrum {
    pub fn new(h: &CMatrix, cap: usize) -> Result<Self> {
        let r = dense_eig(h, cap)?;
        let n = r.eigenvalues.len();
        let cols = r.eigenvectors.expect("dense_eig returns vectors");
        let mut data = Vec::with_capacity(n * n);
        for c in cols {
            data.extend(c);
        }
        Ok(Self { values: r.eigenvalues, vectors: CMatrix::from_col_major(n, n, data) })
    }

    pub fn apply_function(&self, f: impl Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
        let mut c = self.vectors.adjoint_matvec(x);
        for (ci, &l) in c.iter_mut().zip(&self.values) {
            *ci *= f(l);
        }
        self.vectors.matvec(&c)
    }
}

/// Either dense representation of a Hermitian operator's spectrum.
#[derive(Clone, Debug)]
pub enum Spectrum {
    Sectors(SectorSpectrum),
    Dense(DenseSpectrum),
}

impl Spectrum {
    pub fn apply_function(&self, f: impl Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
        match self {
            Spectrum::Sectors(s) => s.apply_function(f, x),
            Spectrum::Dense(d) => d.apply_function(f, x),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            Spectrum::Sectors(s) => s.eigenvalues(),
            Spectrum::Dense(d) => d.values.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Spectrum::Sectors(s) => s.dim(),
            Spectrum::Dense(d) => d.values.len(),
        }
    }

    /// Eigenpairs with a < λ < b: (value, normalized vector).
    pub fn window_pairs(&self, a: f64, b: f64) -> Vec<(f64, Vec<C64>)> {
        match self {
            Spectrum::Sectors(s) => s.in_window(a, b).iter().map(|e| (e.value, s.eigenvector(e))).collect(),
            Spectrum::Dense(d) => d
                .values
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > a && l < b)
                .map(|(k, &l)| (l, d.vectors.col(k).to_vec()))
                .collect(),
        }
    }
}

/// Full spectrum of H: symmetry-reduced when `sectors` applies to `spec`,
/// otherwise a dense eigendecomposition limited by `cap`.
pub fn full_spectrum(spec: &OperatorSpec, sectors: Option<&SectorSolver>, cap: usize) -> Result<Spectrum> {
    if let Some(s) = sectors {
        if s.reduction().grid() == spec.grid() && s.supports(spec) {
            return Ok(Spectrum::Sectors(s.solve(spec)?));
        }
    }
    Ok(Spectrum::Dense(DenseSpectrum::new(&assemble_dense(spec, cap)?, cap)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::operators::assemble_dense;

    #[test]
    fn dense_eig_rejects_non_hermitian() {
        let a = CMatrix::from_col_major(2, 2, vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(dense_eig(&a, 10), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let d = [3.0, -2.0, 0.5];
        let a = CMatrix::from_fn(3, 3, |i, j| if i == j { C64::new(d[i], 0.0) } else { C64::new(0.0, 0.0) });
        assert_eq!(dense_eig(&a, 10).unwrap().eigenvalues, vec![-2.0, 0.5, 3.0]);
    }

    #[test]
    fn sectors_reproduce_full_spectrum() {
        let g = Grid::new(9, 2.0).unwrap();
        let spec = OperatorSpec::new(g.clone(), DomainSpec::Disk { center: [0.0, 0.0], radius: 1.1 }, 6.0, None).unwrap();
        let full = dense_eig(&assemble_dense(&spec, 8192).unwrap(), 8192).unwrap().eigenvalues;
        let sec = SectorSolver::new(&g).unwrap().solve(&spec).unwrap().eigenvalues();
        assert_eq!(full.len(), sec.len());
        for (a, b) in full.iter().zip(&sec) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}
