//! Property tests for the algebraic and numerical invariants.

use infmass::geometry::DomainSpec;
use infmass::operators::radial::BoundaryCondition;
use infmass::operators::{assemble_dense, OperatorSpec};
use infmass::spectra::oracle::{channel_residual, channel_roots};
use infmass::spectra::{dense_eig, fit_rate, pair_nearest, SpectralWindow};
use infmass::spinor::{boundary_matrix, projections, Grid, Mat2, PauliTriple, SIGMA3};
use infmass::study::{StudyConfig, StudyKind};
use infmass::C64;
use proptest::prelude::*;

const ALGEBRA_TOL: f64 = 1e-14;

fn normal(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// ±√(|k|²+m²) on an odd n×n periodic grid of side 2L, computed directly
/// from the Fourier frequencies −(n−1)/2 … (n−1)/2.
fn free_dispersion(n: usize, half_length: f64, m: f64) -> Vec<f64> {
    let half = (n as i64 - 1) / 2;
    let dk = std::f64::consts::PI / half_length;
    let mut out = vec![];
    for a in -half..=half {
        for b in -half..=half {
            let e = ((a * a + b * b) as f64 * dk * dk + m * m).sqrt();
            out.push(e);
            out.push(-e);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_matrix_is_a_hermitian_involution(theta in 0.0..std::f64::consts::TAU) {
        let b = boundary_matrix(normal(theta)).unwrap();
        prop_assert!((b * b - Mat2::IDENTITY).max_abs() < ALGEBRA_TOL);
        prop_assert!((b - b.adjoint()).max_abs() < ALGEBRA_TOL);
        prop_assert!((b * SIGMA3 + SIGMA3 * b).max_abs() < ALGEBRA_TOL);
    }

    #[test]
    fn boundary_projections_split_the_identity(theta in 0.0..std::f64::consts::TAU) {
        let (p, q) = projections(normal(theta)).unwrap();
        prop_assert!((p * p - p).max_abs() < ALGEBRA_TOL);
        prop_assert!((q * q - q).max_abs() < ALGEBRA_TOL);
        prop_assert!((p * q).max_abs() < ALGEBRA_TOL);
        prop_assert!((p + q - Mat2::IDENTITY).max_abs() < ALGEBRA_TOL);
        prop_assert!((SIGMA3 * q - p * SIGMA3).max_abs() < ALGEBRA_TOL);
        prop_assert!((p.trace() - C64::new(1.0, 0.0)).norm() < ALGEBRA_TOL);
    }

    #[test]
    fn non_unit_normals_are_rejected(theta in 0.0..std::f64::consts::TAU, s in 0.5..0.999f64) {
        let n = normal(theta);
        prop_assert!(boundary_matrix([s * n[0], s * n[1]]).is_err());
    }

    #[test]
    fn power_laws_are_fitted_exactly(p in -2.0..-0.1f64, c in 0.01..100.0f64, m0 in 1.0..20.0f64) {
        let ms: Vec<f64> = (0..5).map(|k| m0 * 2f64.powi(k)).collect();
        let es: Vec<f64> = ms.iter().map(|m| c * m.powf(p)).collect();
        let fit = fit_rate(&ms, &es).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(fit.residual < 1e-10);
    }

    #[test]
    fn pairing_a_permutation_with_itself_is_exact(mut xs in prop::collection::vec(-10.0..10.0f64, 1..12), shift in 0usize..12) {
        let mut ys = xs.clone();
        ys.rotate_left(shift % xs.len());
        let p = pair_nearest(&xs, &ys);
        prop_assert_eq!(p.pairs.len(), xs.len());
        prop_assert!(p.max_error(&xs, &ys) == 0.0);
        xs.push(100.0);
        let p = pair_nearest(&xs, &ys);
        prop_assert_eq!(p.unpaired_computed, vec![xs.len() - 1]);
    }

    #[test]
    fn oracle_roots_solve_the_channel_condition(radius in 0.5..2.0f64, n in -3i32..=3, plus in any::<bool>()) {
        let bc = if plus { BoundaryCondition::Plus } else { BoundaryCondition::Minus };
        let w = SpectralWindow::new(0.05, 8.0).unwrap();
        for e in channel_roots(n, radius, &w, bc).unwrap() {
            prop_assert!(channel_residual(n, e, radius, bc).unwrap().abs() < 1e-10, "n={n} E={e}");
        }
    }

    #[test]
    fn flipped_condition_mirrors_the_channel(radius in 0.5..2.0f64, n in -3i32..=3) {
        // J_k(−x) = (−1)^k J_k(x): channel n under P₊ has the negated
        // spectrum of the same channel under P₋.
        let pos = SpectralWindow::new(0.05, 8.0).unwrap();
        let neg = SpectralWindow::new(-8.0, -0.05).unwrap();
        let plus = channel_roots(n, radius, &pos, BoundaryCondition::Plus).unwrap();
        let mut minus: Vec<f64> = channel_roots(n, radius, &neg, BoundaryCondition::Minus).unwrap().iter().map(|e| -e).collect();
        minus.sort_by(f64::total_cmp);
        prop_assert_eq!(plus.len(), minus.len());
        for (a, b) in plus.iter().zip(&minus) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn massive_plane_spectrum_is_the_free_dispersion(m in 0.5..20.0f64, half_length in 1.0..4.0f64) {
        let n = 7;
        let spec = OperatorSpec::new(Grid::new(n, half_length).unwrap(), DomainSpec::Empty, m, None).unwrap();
        let eig = dense_eig(&assemble_dense(&spec, 1000).unwrap(), 1000).unwrap();
        let expected = free_dispersion(n, half_length, m);
        prop_assert_eq!(eig.eigenvalues.len(), expected.len());
        for (a, b) in eig.eigenvalues.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn configs_round_trip_through_canonical_text(
        kind in 0usize..6,
        seed in any::<u64>(),
        n in (4usize..40).prop_map(|k| 2 * k + 1),
        m0 in 8.0..40.0f64,
        count in 1usize..6,
        radius in 0.3..1.0f64,
    ) {
        let kind = StudyKind::ALL[kind];
        let mut text = format!(
            "study.kind = {kind}\nstudy.seed = {seed}\ndomain.shape = disk\ndomain.radius = {radius}\n"
        );
        let sections = kind.sections();
        if sections.contains(&"grid") {
            text += &format!("grid.n = {n}\ngrid.half_length = 2\n");
        }
        if sections.contains(&"mass") {
            text += &format!("mass.m0 = {m0}\nmass.count = {count}\n");
        }
        if sections.contains(&"window") {
            text += "window.a = 1.0\nwindow.b = 2.2\n";
        }
        if sections.contains(&"strip") {
            text += "strip.mu0 = 1\nstrip.rho = 0.5\n";
        }
        if sections.contains(&"contour") {
            text += "contour.nu = 0.5\ncontour.q = 64\n";
        }
        let c = StudyConfig::parse(&text).unwrap();
        let again = StudyConfig::parse(&c.to_text()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.hash(), c.hash());
    }
}

#[test]
fn pauli_matrices_anticommute() {
    assert!(PauliTriple::standard().anticommutator_defect() < ALGEBRA_TOL);
}
