//! Quadrature checks of the boundary identities on closed-form spinors.
//!
//! * partial integration: ⟨Tφ, ψ⟩_Ω = ⟨φ, Tψ⟩_Ω − ⟨tr φ, σ₃B tr ψ⟩_{∂Ω};
//! * energy identity on D_Ω: ‖Tφ‖²_Ω = ‖∇φ‖²_Ω + ½⟨tr φ, κ tr φ⟩_{∂Ω};
//! * probes of the a-priori lower bound of ‖H_mφ‖² and of the trace
//!   inequality ‖tr φ‖² ≤ ε‖∇φ‖² + C_ε‖φ‖².
//!
//! Identities are evaluated on [`TestSpinor`]s with exact derivatives, so
//! that only quadrature error remains.

mod probes;
mod quadrature;
mod test_spinor;

pub use probes::{apriori_bound_probe, apriori_margins, band_limited_field, constant_trace_ratio, trace_inequality_probe, AprioriReport, AprioriTerms, TraceRow};
pub use quadrature::{gauss_legendre, DiskQuadrature};
pub use test_spinor::{Monomial, TestSpinor};

use crate::geometry::{BoundaryMesh, DomainSpec};
use crate::operators::radial::BoundaryCondition;
use crate::spinor::{boundary_matrix, projections, SIGMA3};
use crate::{Error, Result, C64};

/// Boundary condition violation above which the energy identity refuses a
/// spinor.
pub const BC_LIMIT: f64 = 1e-8;

fn disk_of(domain: &DomainSpec) -> Result<([f64; 2], f64)> {
    match *domain {
        DomainSpec::Disk { center, radius } => Ok((center, radius)),
        _ => Err(Error::Geometry("boundary identities are evaluated on disk domains only".into())),
    }
}

/// Boundary mesh used at quadrature order `order`: 2·order equispaced
/// nodes (trapezoidal rule, spectrally accurate on a circle).
fn boundary_for(domain: &DomainSpec, order: usize) -> Result<BoundaryMesh> {
    domain.boundary_mesh((2 * order).max(16))
}

fn cdot(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// The three terms of the partial-integration identity and their mismatch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialIntegrationTerms {
    pub lhs: C64,
    pub volume: C64,
    pub boundary: C64,
    pub residual: f64,
}

/// |⟨Tφ,ψ⟩_Ω − ⟨φ,Tψ⟩_Ω + ⟨tr φ, σ₃B tr ψ⟩_{∂Ω}| by quadrature of `order`.
pub fn partial_integration_terms(phi: &TestSpinor, psi: &TestSpinor, domain: &DomainSpec, order: usize) -> Result<PartialIntegrationTerms> {
    let (center, radius) = disk_of(domain)?;
    let quad = DiskQuadrature::new(center, radius, order);
    let mut lhs = C64::new(0.0, 0.0);
    let mut volume = C64::new(0.0, 0.0);
    for (x, w) in quad.iter() {
        let (p, tp) = (phi.value(x), phi.dirac(x));
        let (q, tq) = (psi.value(x), psi.dirac(x));
        lhs += cdot(tp, q) * w;
        volume += cdot(p, tq) * w;
    }
    let mesh = boundary_for(domain, order)?;
    let mut boundary = C64::new(0.0, 0.0);
    for ((x, n), w) in mesh.nodes.iter().zip(&mesh.normals).zip(&mesh.weights) {
        let m = SIGMA3 * boundary_matrix(*n)?;
        boundary += cdot(phi.value(*x), m.apply(psi.value(*x))) * *w;
    }
    let residual = (lhs - volume + boundary).norm();
    Ok(PartialIntegrationTerms { lhs, volume, boundary, residual })
}

/// Mismatch of the partial-integration identity.
pub fn partial_integration_residual(phi: &TestSpinor, psi: &TestSpinor, domain: &DomainSpec, order: usize) -> Result<f64> {
    Ok(partial_integration_terms(phi, psi, domain, order)?.residual)
}

/// The three terms of the energy identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyTerms {
    /// ‖Tφ‖²_Ω.
    pub dirac: f64,
    /// ‖∇φ‖²_Ω.
    pub gradient: f64,
    /// ½⟨tr φ, κ tr φ⟩ with the curvature sign used.
    pub curvature: f64,
    pub residual: f64,
    /// max_j |P₋ tr φ(s_j)| / max|tr φ|.
    pub bc_violation: f64,
}

/// Largest relative violation of P_∓ tr φ = 0 on the mesh.
pub fn boundary_violation(phi: &TestSpinor, mesh: &BoundaryMesh, bc: BoundaryCondition) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, n) in mesh.nodes.iter().zip(&mesh.normals) {
        let v = phi.value(*x);
        let (pp, pm) = projections(*n)?;
        let p = match bc {
            BoundaryCondition::Minus => pm,
            BoundaryCondition::Plus => pp,
        };
        let r = p.apply(v);
        worst = worst.max((r[0].norm_sqr() + r[1].norm_sqr()).sqrt());
        scale = scale.max((v[0].norm_sqr() + v[1].norm_sqr()).sqrt());
    }
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// Evaluates the energy identity for φ ∈ D_Ω; `curvature_sign` = −1 flips
/// the sign of κ (the sign-convention sentinel).
///
/// Spinors violating P₋ tr φ = 0 by more than [`BC_LIMIT`] are rejected.
pub fn energy_identity_terms(phi: &TestSpinor, domain: &DomainSpec, order: usize, curvature_sign: f64) -> Result<EnergyTerms> {
    let (center, radius) = disk_of(domain)?;
    let mesh = boundary_for(domain, order)?;
    let bc_violation = boundary_violation(phi, &mesh, BoundaryCondition::Minus)?;
    if bc_violation > BC_LIMIT {
        return Err(Error::BoundaryCondition { violation: bc_violation, limit: BC_LIMIT });
    }
    let quad = DiskQuadrature::new(center, radius, order);
    let (mut dirac, mut gradient) = (0.0, 0.0);
    for (x, w) in quad.iter() {
        let t = phi.dirac(x);
        dirac += w * (t[0].norm_sqr() + t[1].norm_sqr());
        let g = phi.gradient(x);
        gradient += w * g.iter().flat_map(|d| d.iter()).map(|z| z.norm_sqr()).sum::<f64>();
    }
    let mut curvature = 0.0;
    for ((x, k), w) in mesh.nodes.iter().zip(&mesh.curvature).zip(&mesh.weights) {
        let v = phi.value(*x);
        curvature += 0.5 * curvature_sign * k * w * (v[0].norm_sqr() + v[1].norm_sqr());
    }
    let residual = (dirac - gradient - curvature).abs();
    Ok(EnergyTerms { dirac, gradient, curvature, residual, bc_violation })
}

/// |‖Tφ‖² − ‖∇φ‖² − ½⟨tr φ, κ tr φ⟩| at quadrature `order`.
pub fn energy_identity_residual(phi: &TestSpinor, domain: &DomainSpec, order: usize) -> Result<f64> {
    Ok(energy_identity_terms(phi, domain, order, 1.0)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_disk() -> DomainSpec {
        DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    #[test]
    fn constant_spinors_have_vanishing_terms() {
        let c = TestSpinor::Constant([C64::new(1.0, 0.0), C64::new(0.3, -0.2)]);
        let t = partial_integration_terms(&c, &c, &unit_disk(), 32).unwrap();
        assert!(t.lhs.norm() < 1e-14 && t.volume.norm() < 1e-14);
        assert!(t.boundary.norm() < 1e-13);
    }

    #[test]
    fn bessel_mode_energy_identity_and_sentinel() {
        let phi = TestSpinor::disk_mode(0, [0.0, 0.0], 1.0, BoundaryCondition::Minus, 0).unwrap();
        let good = energy_identity_terms(&phi, &unit_disk(), 64, 1.0).unwrap();
        assert!(good.residual < 1e-9, "{good:?}");
        let bad = energy_identity_terms(&phi, &unit_disk(), 64, -1.0).unwrap();
        assert!(bad.residual > 10.0 * good.residual.max(1e-12));
    }

    #[test]
    fn boundary_condition_is_enforced() {
        let phi = TestSpinor::Constant([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(energy_identity_residual(&phi, &unit_disk(), 16), Err(Error::BoundaryCondition { .. })));
    }
}
