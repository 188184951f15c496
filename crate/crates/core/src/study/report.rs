use std::fmt;

use super::config::StudyConfig;
use crate::spectra::fit_rate;

/// Outcome of a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Too few points above the discretization floor to fit a rate.
    Inconclusive,
}

impl Verdict {
    /// Process exit code of `study run`.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive (floor-limited)",
        })
    }
}

/// One row of a report: the error observed at mass m (or, for the
/// identity suite, at quadrature order m).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub m: f64,
    pub error: f64,
    pub included_in_fit: bool,
}

/// (config hash, seed, version) plus the canonical configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub config_text: String,
}

impl Provenance {
    pub fn of(config: &StudyConfig) -> Self {
        Self { config_hash: config.hash(), seed: config.seed, version: env!("CARGO_PKG_VERSION").to_string(), config_text: config.to_text() }
    }
}

/// Per-study record of errors, fitted rate, floor and verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub id: String,
    pub rows: Vec<ErrorRow>,
    /// NaN when no fit was possible.
    pub slope: f64,
    pub intercept: f64,
    pub fit_residual: f64,
    pub slope_cap: f64,
    /// m-independent error level; points within 3× of it are not fitted.
    pub floor: f64,
    pub verdict: Verdict,
    /// Free-form diagnostics, in a fixed order (written to report.txt).
    pub notes: Vec<(String, String)>,
    /// Failures that override the slope test.
    pub failures: Vec<String>,
    pub provenance: Provenance,
}

/// Points with error ≤ FLOOR_MULTIPLE·floor are not fitted.
pub const FLOOR_MULTIPLE: f64 = 3.0;
/// A pass needs at least this many fitted points.
pub const MIN_FIT_POINTS: usize = 4;

impl ConvergenceReport {
    /// Fits the rows above the floor and applies the verdict rules: any
    /// recorded failure → fail; fewer than [`MIN_FIT_POINTS`] points above
    /// the floor → inconclusive; otherwise pass iff slope ≤ cap.
    pub fn build(config: &StudyConfig, ms: &[f64], errors: &[f64], floor: f64, notes: Vec<(String, String)>, failures: Vec<String>) -> Self {
        let cut = FLOOR_MULTIPLE * floor;
        let mut rows: Vec<ErrorRow> = ms
            .iter()
            .zip(errors)
            .map(|(&m, &error)| ErrorRow { m, error, included_in_fit: error.is_finite() && error > 0.0 && error > cut })
            .collect();
        let used: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].included_in_fit).collect();
        let fit = if used.len() >= MIN_FIT_POINTS {
            let xs: Vec<f64> = used.iter().map(|&i| rows[i].m).collect();
            let ys: Vec<f64> = used.iter().map(|&i| rows[i].error).collect();
            fit_rate(&xs, &ys).ok()
        } else {
            None
        };
        if fit.is_none() {
            // Rows only count as fitted if a fit happened.
            rows.iter_mut().for_each(|r| r.included_in_fit = false);
        }
        let (slope, intercept, fit_residual) = fit.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.slope, f.intercept, f.residual));
        let verdict = if !failures.is_empty() {
            Verdict::Fail
        } else if fit.is_none() {
            Verdict::Inconclusive
        } else if slope <= config.slope_cap {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            id: config.id.clone(),
            rows,
            slope,
            intercept,
            fit_residual,
            slope_cap: config.slope_cap,
            floor,
            verdict,
            notes,
            failures,
            provenance: Provenance::of(config),
        }
    }

    /// A report whose verdict is decided by checks rather than a fit (the
    /// identity suite and the gap scan).
    pub fn checked(config: &StudyConfig, rows: Vec<ErrorRow>, floor: f64, notes: Vec<(String, String)>, failures: Vec<String>) -> Self {
        let verdict = if failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
        Self {
            id: config.id.clone(),
            rows,
            slope: f64::NAN,
            intercept: f64::NAN,
            fit_residual: f64::NAN,
            slope_cap: config.slope_cap,
            floor,
            verdict,
            notes,
            failures,
            provenance: Provenance::of(config),
        }
    }

    pub fn fitted_points(&self) -> usize {
        self.rows.iter().filter(|r| r.included_in_fit).count()
    }

    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let c = StudyConfig::default();
        let ms: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
        let e: Vec<f64> = ms.iter().map(|m| 1.0 / m.sqrt()).collect();
        let r = ConvergenceReport::build(&c, &ms, &e, 0.0, vec![], vec![]);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.slope + 0.5).abs() < 1e-12);
        // Floor swallowing two points leaves three: inconclusive.
        let r = ConvergenceReport::build(&c, &ms, &e, 0.12 / 3.0, vec![], vec![]);
        assert_eq!(r.fitted_points(), 0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let flat: Vec<f64> = ms.iter().map(|m| m.powf(-0.3)).collect();
        assert_eq!(ConvergenceReport::build(&c, &ms, &flat, 0.0, vec![], vec![]).verdict, Verdict::Fail);
        assert_eq!(ConvergenceReport::build(&c, &ms, &e, 0.0, vec![], vec!["x".into()]).verdict, Verdict::Fail);
        assert_eq!(ConvergenceReport::build(&c, &ms[..1], &e[..1], 0.0, vec![], vec![]).verdict, Verdict::Inconclusive);
    }
}
