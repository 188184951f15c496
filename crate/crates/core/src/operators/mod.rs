//! Discrete Hamiltonians on the torus grid.
//!
//! T = −iσ·∇ acts pseudospectrally: both components are Fourier
//! transformed, multiplied by the symbol
//!
//! ```text
//! σ·k = [ 0          kx − i ky ]
//!       [ kx + i ky  0         ]
//! ```
//!
//! and transformed back.  On the symmetric momentum set of an odd grid this
//! is an exactly Hermitian, doubling-free discretization.  The mass term
//! m·1_{Ω^c}σ₃ and the potential V act pointwise in real space.

pub mod bessel;
pub mod radial;
pub mod symmetry;

use std::sync::Arc;

use crate::geometry::{DomainSpec, Region};
use crate::linalg::{CMatrix, LinearMap};
use crate::spinor::{Grid, Mat2, SpinorField, SIGMA1, SIGMA2, SIGMA3};
use crate::{Error, Result, C64};

/// Default limit on the dense matrix dimension 2n².
pub const DEFAULT_DENSE_CAP: usize = 8192;

/// A smooth bounded scalar profile v(x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// amplitude · exp(−|x|²/width²), centred at the origin.
    Gaussian { amplitude: f64, width: f64 },
}

impl Profile {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match *self {
            Profile::Constant(v) => v,
            Profile::Gaussian { amplitude, width } => amplitude * (-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Constant(v) => v.is_finite(),
            Profile::Gaussian { amplitude, width } => amplitude.is_finite() && width.is_finite() && width > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Operator(format!("invalid potential profile {self:?}")))
        }
    }
}

/// Bounded Hermitian matrix potential V(x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialSpec {
    /// v(x)·I
    Scalar(Profile),
    /// v(x)·σ₃
    Sigma3(Profile),
    /// v₀(x)·I + v₁(x)σ₁ + v₂(x)σ₂ + v₃(x)σ₃
    Hermitian { identity: Profile, sigma1: Profile, sigma2: Profile, sigma3: Profile },
}

impl PotentialSpec {
    pub fn matrix_at(&self, x: [f64; 2]) -> Mat2 {
        let r = |v: f64| C64::new(v, 0.0);
        match self {
            PotentialSpec::Scalar(p) => Mat2::IDENTITY.scale(r(p.value(x))),
            PotentialSpec::Sigma3(p) => SIGMA3.scale(r(p.value(x))),
            PotentialSpec::Hermitian { identity, sigma1, sigma2, sigma3 } => {
                Mat2::IDENTITY.scale(r(identity.value(x)))
                    + SIGMA1.scale(r(sigma1.value(x)))
                    + SIGMA2.scale(r(sigma2.value(x)))
                    + SIGMA3.scale(r(sigma3.value(x)))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Scalar(p) | PotentialSpec::Sigma3(p) => p.validate(),
            PotentialSpec::Hermitian { identity, sigma1, sigma2, sigma3 } => {
                identity.validate()?;
                sigma1.validate()?;
                sigma2.validate()?;
                sigma3.validate()
            }
        }
    }
}

/// A fully determined discrete Hamiltonian H = T + m·1_{Ω^c}σ₃ + V.
///
/// Construction validates the inputs and samples the exterior mask and the
/// potential once; the spec is immutable and cheap to clone afterwards.
#[derive(Clone, Debug)]
pub struct OperatorSpec {
    grid: Grid,
    domain: DomainSpec,
    mass: f64,
    potential: Option<PotentialSpec>,
    exterior: Arc<Vec<bool>>,
    potential_samples: Option<Arc<Vec<Mat2>>>,
    potential_sup_complement: f64,
}

impl OperatorSpec {
    pub fn new(grid: Grid, domain: DomainSpec, mass: f64, potential: Option<PotentialSpec>) -> Result<Self> {
        domain.validate(grid.half_length())?;
        if !mass.is_finite() {
            return Err(Error::Operator(format!("mass must be finite, got {mass}")));
        }
        let exterior: Vec<bool> = domain.region_mask(&grid).into_iter().map(|r| r == Region::Complement).collect();
        let mut sup = 0.0f64;
        let samples = match &potential {
            None => None,
            Some(v) => {
                v.validate()?;
                let s: Vec<Mat2> = (0..grid.sites()).map(|site| v.matrix_at(grid.point(site))).collect();
                for (m, &ext) in s.iter().zip(&exterior) {
                    let dev = (*m - m.adjoint()).max_abs();
                    if dev > 1e-14 {
                        return Err(Error::NonHermitian { deviation: dev });
                    }
                    if ext {
                        sup = sup.max(m.hermitian_norm());
                    }
                }
                Some(Arc::new(s))
            }
        };
        Ok(Self {
            grid,
            domain,
            mass,
            potential,
            exterior: Arc::new(exterior),
            potential_samples: samples,
            potential_sup_complement: sup,
        })
    }

    /// Same geometry and potential, different mass.
    pub fn with_mass(&self, mass: f64) -> Self {
        Self { mass, ..self.clone() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn potential(&self) -> Option<&PotentialSpec> {
        self.potential.as_ref()
    }

    /// Dimension 2n² of the discrete space.
    pub fn dim(&self) -> usize {
        2 * self.grid.sites()
    }

    /// `true` at sites of Ω^c.
    pub fn exterior_mask(&self) -> &[bool] {
        &self.exterior
    }

    /// ‖V‖_{L∞(Ω^c)} over the grid sites (0 without a potential).
    pub fn potential_sup_complement(&self) -> f64 {
        self.potential_sup_complement
    }

    /// V at a grid site, if a potential is present.
    pub fn potential_at(&self, site: usize) -> Option<Mat2> {
        self.potential_samples.as_ref().map(|s| s[site])
    }

    /// Upper bound on ‖H‖: √2·k_max + |m| + sup|V|.
    pub fn norm_bound(&self) -> f64 {
        let kmax = std::f64::consts::PI * ((self.grid.n() - 1) / 2) as f64 / self.grid.half_length();
        let vmax = self
            .potential_samples
            .as_ref()
            .map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.hermitian_norm())))
            .unwrap_or(0.0);
        std::f64::consts::SQRT_2 * kmax + self.mass.abs() + vmax
    }

    /// H x on an interleaved coefficient vector.
    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = apply_t_vec(&self.grid, x);
        self.add_local_terms(x, &mut y);
        y
    }

    fn add_local_terms(&self, x: &[C64], y: &mut [C64]) {
        let m = self.mass;
        if m != 0.0 {
            for (site, &ext) in self.exterior.iter().enumerate() {
                if ext {
                    y[2 * site] += x[2 * site] * m;
                    y[2 * site + 1] -= x[2 * site + 1] * m;
                }
            }
        }
        if let Some(v) = &self.potential_samples {
            for (site, mat) in v.iter().enumerate() {
                let w = mat.apply([x[2 * site], x[2 * site + 1]]);
                y[2 * site] += w[0];
                y[2 * site + 1] += w[1];
            }
        }
    }
}

impl LinearMap for OperatorSpec {
    fn dim(&self) -> usize {
        OperatorSpec::dim(self)
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_vec(x))
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_vec(x))
    }
}

/// T x for an interleaved coefficient vector on `grid`.
pub(crate) fn apply_t_vec(grid: &Grid, x: &[C64]) -> Vec<C64> {
    let n = grid.n();
    let sites = grid.sites();
    let mut a: Vec<C64> = x.iter().step_by(2).copied().collect();
    let mut b: Vec<C64> = x.iter().skip(1).step_by(2).copied().collect();
    let mut scratch = Vec::new();
    grid.fft2(&mut a, &mut scratch, false);
    grid.fft2(&mut b, &mut scratch, false);
    let k: Vec<f64> = (0..n).map(|j| grid.momentum(j)).collect();
    let scale = 1.0 / sites as f64;
    // Transposed layout: index jx·n + jy.
    for jx in 0..n {
        for jy in 0..n {
            let idx = jx * n + jy;
            let (kx, ky) = (k[jx], k[jy]);
            let (ua, ub) = (a[idx], b[idx]);
            a[idx] = C64::new(kx, -ky) * ub * scale;
            b[idx] = C64::new(kx, ky) * ua * scale;
        }
    }
    grid.fft2(&mut a, &mut scratch, true);
    grid.fft2(&mut b, &mut scratch, true);
    let mut y = Vec::with_capacity(2 * sites);
    for (u, v) in a.into_iter().zip(b) {
        y.push(u);
        y.push(v);
    }
    y
}

/// T f = −iσ·∇ f, pseudospectrally.
pub fn apply_t(f: &SpinorField) -> SpinorField {
    let y = apply_t_vec(f.grid(), f.as_slice());
    SpinorField::from_vec(f.grid(), y).expect("T preserves the grid")
}

/// H f = T f + m·1_{Ω^c}σ₃ f + V f.
pub fn apply_h(spec: &OperatorSpec, f: &SpinorField) -> Result<SpinorField> {
    if f.grid() != spec.grid() {
        return Err(Error::GridMismatch);
    }
    SpinorField::from_vec(spec.grid(), spec.apply_vec(f.as_slice()))
}

/// Dense Hermitian matrix of H, refused above `cap` rows.
///
/// T is translation invariant on the torus, so only the two columns at
/// site 0 are computed by FFT; all others are periodic shifts of them.
pub fn assemble_dense(spec: &OperatorSpec, cap: usize) -> Result<CMatrix> {
    let dim = spec.dim();
    if dim > cap {
        return Err(Error::DenseCapExceeded { size: dim, cap });
    }
    let grid = spec.grid();
    let n = grid.n();
    let mut kernels = Vec::with_capacity(2);
    for c in 0..2 {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[c] = C64::new(1.0, 0.0);
        kernels.push(apply_t_vec(grid, &e));
    }
    let mut a = CMatrix::zeros(dim, dim);
    for sy in 0..n {
        for sx in 0..n {
            let site = sy * n + sx;
            for c in 0..2 {
                let col = a.col_mut(2 * site + c);
                let kern = &kernels[c];
                for ty in 0..n {
                    let ky = (ty + n - sy) % n;
                    for tx in 0..n {
                        let kx = (tx + n - sx) % n;
                        let src = 2 * (ky * n + kx);
                        let dst = 2 * (ty * n + tx);
                        col[dst] = kern[src];
                        col[dst + 1] = kern[src + 1];
                    }
                }
            }
        }
    }
    let m = spec.mass();
    for (site, &ext) in spec.exterior_mask().iter().enumerate() {
        if ext && m != 0.0 {
            let (i, j) = (2 * site, 2 * site + 1);
            a.set(i, i, a.get(i, i) + m);
            a.set(j, j, a.get(j, j) - m);
        }
        if let Some(v) = spec.potential_at(site) {
            for r in 0..2 {
                for c in 0..2 {
                    let (i, j) = (2 * site + r, 2 * site + c);
                    a.set(i, j, a.get(i, j) + v.0[r][c]);
                }
            }
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::inner_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn disk_spec(n: usize, m: f64) -> OperatorSpec {
        let g = Grid::new(n, 2.0).unwrap();
        OperatorSpec::new(g, DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, m, None).unwrap()
    }

    #[test]
    fn constant_spinor_is_annihilated() {
        let g = Grid::new(9, 1.0).unwrap();
        let f = SpinorField::constant(&g, [C64::new(1.0, 2.0), C64::new(-0.5, 0.0)]);
        assert!(apply_t(&f).as_slice().iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn plane_wave_is_eigenfunction_of_symbol() {
        let g = Grid::new(15, 1.5).unwrap();
        let (jx, jy) = (3i64, -2i64);
        let k = [std::f64::consts::PI * jx as f64 / 1.5, std::f64::consts::PI * jy as f64 / 1.5];
        let f = SpinorField::from_fn(&g, |x| {
            let ph = C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            [ph, C64::new(0.0, 0.0)]
        });
        let tf = apply_t(&f);
        for site in 0..g.sites() {
            let x = g.point(site);
            let ph = C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            let v = tf.at(site);
            assert!(v[0].norm() < 1e-12);
            assert!((v[1] - ph * C64::new(k[0], k[1])).norm() < 1e-11);
        }
    }

    #[test]
    fn full_plane_equals_t() {
        let g = Grid::new(11, 1.0).unwrap();
        let spec = OperatorSpec::new(g.clone(), DomainSpec::FullPlane, 7.0, None).unwrap();
        let f = SpinorField::random(&g, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(apply_h(&spec, &f).unwrap(), apply_t(&f));
    }

    #[test]
    fn h_is_hermitian_on_random_fields() {
        let spec = disk_spec(21, 12.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpinorField::random(spec.grid(), &mut rng);
        let g = SpinorField::random(spec.grid(), &mut rng);
        let lhs = inner_product(&apply_h(&spec, &f).unwrap(), &g).unwrap();
        let rhs = inner_product(&f, &apply_h(&spec, &g).unwrap()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
    }

    #[test]
    fn dense_matches_apply() {
        let g = Grid::new(9, 1.5).unwrap();
        let v = PotentialSpec::Hermitian {
            identity: Profile::Gaussian { amplitude: 0.3, width: 0.7 },
            sigma1: Profile::Constant(0.1),
            sigma2: Profile::Gaussian { amplitude: -0.2, width: 1.0 },
            sigma3: Profile::Constant(0.05),
        };
        let spec = OperatorSpec::new(g.clone(), DomainSpec::Disk { center: [0.1, 0.0], radius: 0.8 }, 4.0, Some(v)).unwrap();
        let a = assemble_dense(&spec, DEFAULT_DENSE_CAP).unwrap();
        assert!(a.hermitian_deviation() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let f = SpinorField::random(&g, &mut rng);
            let d = a.matvec(f.as_slice());
            let h = spec.apply_vec(f.as_slice());
            let err: f64 = d.iter().zip(&h).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= 1e-11 * crate::linalg::norm2(f.as_slice()));
        }
    }

    #[test]
    fn zero_mass_disk_equals_full_plane() {
        let g = Grid::new(9, 1.5).unwrap();
        let a = assemble_dense(&OperatorSpec::new(g.clone(), DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, 0.0, None).unwrap(), 8192).unwrap();
        let b = assemble_dense(&OperatorSpec::new(g, DomainSpec::FullPlane, 0.0, None).unwrap(), 8192).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dense_cap_enforced() {
        let spec = disk_spec(65, 1.0);
        assert!(matches!(assemble_dense(&spec, DEFAULT_DENSE_CAP), Err(Error::DenseCapExceeded { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Grid::new(9, 1.0).unwrap();
        assert!(OperatorSpec::new(g.clone(), DomainSpec::Disk { center: [0.0, 0.0], radius: 1.5 }, 1.0, None).is_err());
        assert!(OperatorSpec::new(g.clone(), DomainSpec::FullPlane, f64::NAN, None).is_err());
        let bad = PotentialSpec::Scalar(Profile::Gaussian { amplitude: 1.0, width: -1.0 });
        assert!(OperatorSpec::new(g, DomainSpec::FullPlane, 1.0, Some(bad)).is_err());
    }
}
