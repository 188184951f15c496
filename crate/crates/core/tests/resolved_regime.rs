//! Eigenvalue convergence where the grid resolves the mass boundary layer
//! (m·h ≲ 1.3 on the standard n = 127 grid): the rate must be visible
//! there even though the standard schedule m = 10 … 160 is floor-limited.

use infmass::study::{run_eigenvalue_convergence, StudyConfig, Verdict};

const CONFIG: &str = "\
study.kind = eigenvalue-convergence
study.id = resolved-regime
domain.shape = disk
domain.radius = 1
grid.n = 127
grid.half_length = 2
mass.m0 = 5
mass.count = 4
window.a = 1.0
window.b = 2.2
floor.refine = false
";

#[test]
fn lowest_disk_eigenvalue_converges_at_least_like_inverse_root_mass() {
    let config = StudyConfig::parse(CONFIG).unwrap();
    let report = run_eigenvalue_convergence(&config).unwrap();
    let errors: Vec<f64> = report.rows.iter().map(|r| r.error).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert_eq!(report.verdict, Verdict::Pass, "slope {} errors {errors:?}", report.slope);
    assert!(report.slope <= -0.45);
}
