//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function has a plain-Rust twin (`*_impl`) returning
//! `Result<_, String>` so it can be tested natively; the exports only map
//! errors into JavaScript exceptions.

use infmass::geometry::DomainSpec;
use infmass::operators::radial::BoundaryCondition;
use infmass::operators::OperatorSpec;
use infmass::spectra::oracle::MAX_CHANNEL;
use infmass::spectra::{disk_oracle_eigs, full_spectrum, SectorSolver, SpectralWindow};
use infmass::spinor::{boundary_matrix, projections, Grid, Mat2, PauliTriple};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; the dense sector solve grows like n⁶.
pub const MAX_DEMO_N: usize = 31;

fn condition(plus: bool) -> BoundaryCondition {
    if plus {
        BoundaryCondition::Plus
    } else {
        BoundaryCondition::Minus
    }
}

/// Infinite-mass disk eigenvalues in (a, b), flattened as
/// `[energy₀, channel₀, energy₁, channel₁, …]`.
pub fn disk_eigenvalues_impl(radius: f64, a: f64, b: f64, plus: bool) -> Result<Vec<f64>, String> {
    if !(radius > 0.0) {
        return Err(format!("radius must be positive, got {radius}"));
    }
    if a.abs().max(b.abs()) * radius > (MAX_CHANNEL - 8) as f64 {
        return Err("window too wide for the channel range".into());
    }
    let w = SpectralWindow::new(a, b).map_err(|e| e.to_string())?;
    let eigs = disk_oracle_eigs(radius, -MAX_CHANNEL..=MAX_CHANNEL, &w, condition(plus)).map_err(|e| e.to_string())?;
    Ok(eigs.into_iter().flat_map(|e| [e.energy, e.channel as f64]).collect())
}

#[wasm_bindgen]
pub fn disk_eigenvalues(radius: f64, a: f64, b: f64, plus: bool) -> Result<Vec<f64>, JsError> {
    disk_eigenvalues_impl(radius, a, b, plus).map_err(|e| JsError::new(&e))
}

/// Algebraic defects at the boundary point with outward normal
/// (cos θ, sin θ):
/// `[anticommutator, ‖B²−1‖, ‖B−B*‖, ‖P₊²−P₊‖, ‖P₊P₋‖, ‖P₊+P₋−1‖, tr P₊]`.
pub fn boundary_defects_impl(theta: f64) -> Result<Vec<f64>, String> {
    let n = [theta.cos(), theta.sin()];
    let b = boundary_matrix(n).map_err(|e| e.to_string())?;
    let (pp, pm) = projections(n).map_err(|e| e.to_string())?;
    Ok(vec![
        PauliTriple::standard().anticommutator_defect(),
        (b * b - Mat2::IDENTITY).max_abs(),
        (b - b.adjoint()).max_abs(),
        (pp * pp - pp).max_abs(),
        (pp * pm).max_abs(),
        (pp + pm - Mat2::IDENTITY).max_abs(),
        pp.trace().re,
    ])
}

#[wasm_bindgen]
pub fn boundary_defects(theta: f64) -> Result<Vec<f64>, JsError> {
    boundary_defects_impl(theta).map_err(|e| JsError::new(&e))
}

/// Eigenvalues in (a, b) of the discretized operator on an n×n grid over
/// [−L, L]² with mass `mass` outside the disk of radius `radius` at the
/// origin.
pub fn grid_eigenvalues_impl(n: usize, half_length: f64, radius: f64, mass: f64, a: f64, b: f64) -> Result<Vec<f64>, String> {
    if n > MAX_DEMO_N {
        return Err(format!("grid size {n} exceeds the demo limit {MAX_DEMO_N}"));
    }
    let grid = Grid::new(n, half_length).map_err(|e| e.to_string())?;
    let domain = DomainSpec::Disk { center: [0.0, 0.0], radius };
    let spec = OperatorSpec::new(grid.clone(), domain, mass, None).map_err(|e| e.to_string())?;
    let sectors = SectorSolver::new(&grid).map_err(|e| e.to_string())?;
    let spectrum = full_spectrum(&spec, Some(&sectors), 2 * n * n).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = spectrum.eigenvalues().into_iter().filter(|&l| l > a && l < b).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[wasm_bindgen]
pub fn grid_eigenvalues(n: usize, half_length: f64, radius: f64, mass: f64, a: f64, b: f64) -> Result<Vec<f64>, JsError> {
    grid_eigenvalues_impl(n, half_length, radius, mass, a, b).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_lowest_positive_eigenvalue() {
        let v = disk_eigenvalues_impl(1.0, 1.0, 2.2, false).unwrap();
        assert_eq!(v.len(), 2);
        assert!((v[0] - 1.434695650819565).abs() < 1e-10);
    }

    #[test]
    fn boundary_defects_vanish() {
        for k in 0..16 {
            let d = boundary_defects_impl(0.4 * k as f64).unwrap();
            assert!(d[..6].iter().all(|&x| x < 1e-15), "{d:?}");
            assert!((d[6] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn small_grid_tracks_the_disk() {
        let v = grid_eigenvalues_impl(15, 2.0, 1.0, 10.0, 0.5, 2.2).unwrap();
        assert!(!v.is_empty());
        // Coarse grid and finite mass: only closeness, not accuracy.
        assert!(v.iter().any(|&l| (l - 1.434695650819565).abs() < 0.6), "{v:?}");
    }

    #[test]
    fn rejects_large_grids() {
        assert!(grid_eigenvalues_impl(MAX_DEMO_N + 2, 2.0, 1.0, 10.0, 0.5, 2.2).is_err());
    }
}
