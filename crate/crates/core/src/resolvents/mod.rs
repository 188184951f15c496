//! Shifted solves (H − z)u = f, operator-norm estimates of resolvent
//! differences and the resolvent studies.

mod gmres;
mod norm;
mod study;

use std::collections::HashMap;
use std::sync::Mutex;

pub use gmres::{gmres, GmresOutcome};
pub use norm::{op_norm_diff, Difference, NormEstimate, ResolventMap};
pub(crate) use study::spectra_for;
pub use study::{
    convergence_resolvent_study, gap_from_pairs, gap_probe, resolvent_identity_check, GapReport, GapState, IdentityCheck, ResolventStudy,
    StudyOptions,
};

use crate::linalg::{norm2, LinearMap, LuFactor};
use crate::operators::{assemble_dense, OperatorSpec, DEFAULT_DENSE_CAP};
use crate::spectra::ResolventSolver;
use crate::spinor::SpinorField;
use crate::{Error, Result, C64};

/// The set {|Im ξ| ≥ μ₀, |Re ξ| ≤ ρ}, sampled at its corners.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripSpec {
    pub mu0: f64,
    pub rho: f64,
}

impl StripSpec {
    pub fn new(mu0: f64, rho: f64) -> Result<Self> {
        if !(mu0 > 0.0 && mu0.is_finite()) {
            return Err(Error::Config(format!("strip needs μ₀ > 0, got {mu0}")));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("strip needs ρ ≥ 0, got {rho}")));
        }
        Ok(Self { mu0, rho })
    }

    /// ±iμ₀ and ±ρ ± iμ₀ (duplicates removed when ρ = 0), in a fixed order.
    pub fn samples(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, self.mu0), C64::new(0.0, -self.mu0)];
        if self.rho > 0.0 {
            for re in [self.rho, -self.rho] {
                for im in [self.mu0, -self.mu0] {
                    out.push(C64::new(re, im));
                }
            }
        }
        out
    }

    pub fn contains(&self, z: C64) -> bool {
        z.im.abs() >= self.mu0 && z.re.abs() <= self.rho
    }
}

/// One shifted problem (H − z)u = f.
#[derive(Clone, Debug)]
pub struct ResolventProbe {
    pub spec: OperatorSpec,
    pub z: C64,
    /// Required ‖(H − z)u − f‖/‖f‖.
    pub tol: f64,
    /// Krylov iteration cap.
    pub max_iter: usize,
    /// Dense factorization is used up to this dimension.
    pub dense_cap: usize,
}

impl ResolventProbe {
    pub fn new(spec: OperatorSpec, z: C64) -> Self {
        Self { spec, z, tol: 1e-10, max_iter: 5000, dense_cap: DEFAULT_DENSE_CAP }
    }
}

/// Solves (H − z)u = rhs with a verified residual: LU below the dense cap,
/// restarted GMRES otherwise.
pub fn solve_resolvent(probe: &ResolventProbe, rhs: &SpinorField) -> Result<SpinorField> {
    if rhs.grid() != probe.spec.grid() {
        return Err(Error::GridMismatch);
    }
    let u = if probe.spec.dim() <= probe.dense_cap {
        DenseResolvent::new(&probe.spec, probe.dense_cap)?.solve(probe.z, rhs.as_slice())?
    } else {
        KrylovResolvent { op: &probe.spec, tol: probe.tol, max_iter: probe.max_iter }.solve(probe.z, rhs.as_slice())?
    };
    check_residual(&probe.spec, probe.z, rhs.as_slice(), &u, probe.tol)?;
    SpinorField::from_vec(rhs.grid(), u)
}

/// ‖(H − z)u − f‖/‖f‖ ≤ tol, or a solve error carrying the residual.
pub fn check_residual(op: &dyn LinearMap, z: C64, rhs: &[C64], u: &[C64], tol: f64) -> Result<f64> {
    let mut r = op.apply(u)?;
    for ((ri, ui), fi) in r.iter_mut().zip(u).zip(rhs) {
        *ri = *ri - z * ui - fi;
    }
    let scale = norm2(rhs);
    let rel = if scale > 0.0 { norm2(&r) / scale } else { norm2(&r) };
    if rel > tol {
        return Err(Error::ResolventSolve { z, residual: rel });
    }
    Ok(rel)
}

/// Dense LU factorizations of H − z, cached per z.
pub struct DenseResolvent {
    h: crate::linalg::CMatrix,
    cache: Mutex<HashMap<(u64, u64), std::sync::Arc<LuFactor>>>,
}

impl DenseResolvent {
    pub fn new(spec: &OperatorSpec, cap: usize) -> Result<Self> {
        Ok(Self { h: assemble_dense(spec, cap)?, cache: Mutex::new(HashMap::new()) })
    }

    fn factor(&self, z: C64) -> Result<std::sync::Arc<LuFactor>> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let mut a = self.h.clone();
        for i in 0..a.rows() {
            let d = a.get(i, i);
            a.set(i, i, d - z);
        }
        let f = std::sync::Arc::new(LuFactor::new(a)?);
        self.cache.lock().expect("cache lock").insert(key, f.clone());
        Ok(f)
    }
}

impl ResolventSolver for DenseResolvent {
    fn dim(&self) -> usize {
        self.h.rows()
    }

    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let f = self.factor(z)?;
        let mut u = rhs.to_vec();
        f.solve_in_place(&mut u)?;
        Ok(u)
    }
}

/// Matrix-free shifted solves by restarted GMRES.
pub struct KrylovResolvent<'a> {
    pub op: &'a dyn LinearMap,
    pub tol: f64,
    pub max_iter: usize,
}

impl ResolventSolver for KrylovResolvent<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn solve(&self, z: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let out = gmres(self.op, z, rhs, self.tol, self.max_iter, 60)?;
        if !out.converged {
            return Err(Error::ResolventSolve { z, residual: out.residual });
        }
        Ok(out.solution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::spinor::Grid;

    #[test]
    fn strip_samples() {
        let s = StripSpec::new(1.0, 2.0).unwrap();
        let pts = s.samples();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|&z| s.contains(z)));
        assert_eq!(StripSpec::new(0.5, 0.0).unwrap().samples().len(), 2);
        assert!(StripSpec::new(0.0, 1.0).is_err());
    }

    #[test]
    fn plane_wave_resolvent_empty_domain() {
        let g = Grid::new(9, 1.5).unwrap();
        let m = 2.0;
        let spec = OperatorSpec::new(g.clone(), DomainSpec::Empty, m, None).unwrap();
        let (jx, jy) = (2usize, 7usize);
        let k = [g.momentum(jx), g.momentum(jy)];
        let amp = [C64::new(0.3, 0.1), C64::new(-0.5, 0.2)];
        let rhs = SpinorField::from_fn(&g, |x| {
            let e = C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            [amp[0] * e, amp[1] * e]
        });
        let z = C64::new(0.0, 1.0);
        let u = solve_resolvent(&ResolventProbe::new(spec, z), &rhs).unwrap();
        // (σ·k + mσ₃ − z)^{-1} amp by hand.
        let a = [[C64::new(m, 0.0) - z, C64::new(k[0], -k[1])], [C64::new(k[0], k[1]), C64::new(-m, 0.0) - z]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let sol = [(a[1][1] * amp[0] - a[0][1] * amp[1]) / det, (a[0][0] * amp[1] - a[1][0] * amp[0]) / det];
        let expect = SpinorField::from_fn(&g, |x| {
            let e = C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]);
            [sol[0] * e, sol[1] * e]
        });
        assert!(u.max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn krylov_and_dense_agree() {
        let g = Grid::new(11, 2.0).unwrap();
        let spec = OperatorSpec::new(g.clone(), DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }, 5.0, None).unwrap();
        let rhs = SpinorField::random(&g, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3));
        let z = C64::new(0.4, 0.8);
        let dense = solve_resolvent(&ResolventProbe::new(spec.clone(), z), &rhs).unwrap();
        let mut probe = ResolventProbe::new(spec, z);
        probe.dense_cap = 0;
        let krylov = solve_resolvent(&probe, &rhs).unwrap();
        assert!(dense.max_abs_diff(&krylov).unwrap() < 1e-8);
        // Self-adjointness bound ‖u‖ ≤ ‖f‖/|Im z|.
        assert!(dense.norm() <= rhs.norm() / z.im * (1.0 + 1e-12));
    }
}
