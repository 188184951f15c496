//! Study orchestration: configuration, runners, reports and their files.

pub mod config;
pub mod emit;
pub mod report;
pub mod run;

pub use config::{DomainConfig, MassSchedule, PotentialConfig, StudyConfig, StudyKind};
pub use emit::{config_from_txt, emit_outputs, render_csv, render_svg, render_txt};
pub use report::{ConvergenceReport, ErrorRow, Provenance, Verdict};
pub use run::{
    check_preconditions, identity_residuals, oracle_in_window, run_eigenvalue_convergence, run_gap_scan, run_identity_suite,
    run_potential_convergence, run_projection_convergence, run_resolvent_convergence, run_study, IdentityResiduals,
};
