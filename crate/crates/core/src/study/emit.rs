//! report.csv / report.svg / report.txt.
//!
//! All three files are rendered in memory first and then moved into place,
//! so a failing study never leaves partial output behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::StudyConfig;
use super::report::ConvergenceReport;
use crate::{Error, Result};

pub const CSV_NAME: &str = "report.csv";
pub const SVG_NAME: &str = "report.svg";
pub const TXT_NAME: &str = "report.txt";

const CONFIG_MARKER: &str = "[config]";

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn at(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// CSV with header m, error, floor, included_in_fit, slope.
pub fn render_csv(report: &ConvergenceReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["m", "error", "floor", "included_in_fit", "slope"]).map_err(io)?;
    for r in &report.rows {
        w.write_record([format!("{:?}", r.m), format!("{:?}", r.error), format!("{:?}", report.floor), r.included_in_fit.to_string(), format!("{:?}", report.slope)])
            .map_err(io)?;
    }
    w.into_inner().map_err(io)
}

/// Verdict, fit, diagnostics and the provenance block.
pub fn render_txt(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "study: {}", report.id);
    let _ = writeln!(s, "verdict: {}", report.verdict);
    let _ = writeln!(s, "slope: {:?} ± {:?} (cap {:?})", report.slope, report.fit_residual, report.slope_cap);
    let _ = writeln!(s, "intercept: {:?}", report.intercept);
    let _ = writeln!(s, "floor: {:?}", report.floor);
    let _ = writeln!(s, "points above floor: {}", report.fitted_points());
    for (k, v) in &report.notes {
        let _ = writeln!(s, "note {k}: {v}");
    }
    for f in &report.failures {
        let _ = writeln!(s, "failure: {f}");
    }
    let p = &report.provenance;
    let _ = writeln!(s, "[provenance]");
    let _ = writeln!(s, "config_hash: {}", p.config_hash);
    let _ = writeln!(s, "seed: {}", p.seed);
    let _ = writeln!(s, "version: {}", p.version);
    let _ = writeln!(s, "{CONFIG_MARKER}");
    s.push_str(&p.config_text);
    s
}

/// Recovers the configuration embedded in a report.txt.
pub fn config_from_txt(text: &str) -> Result<StudyConfig> {
    let (_, cfg) = text.split_once(&format!("{CONFIG_MARKER}\n")).ok_or_else(|| Error::Config("report has no configuration block".into()))?;
    StudyConfig::parse(cfg)
}

/// Log-log scatter of the errors with the fitted line and the floor.
pub fn render_svg(report: &ConvergenceReport) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let pts: Vec<(f64, f64)> = report.rows.iter().filter(|r| r.m > 0.0 && r.error > 0.0 && r.error.is_finite()).map(|r| (r.m.log10(), r.error.log10())).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if report.floor > 0.0 {
        ys.push(report.floor.log10());
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo))
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{pad}" y="24">{} — {}</text>"#, report.id, report.verdict);
    let _ = writeln!(
        s,
        r#"<path d="M{pad:.1},{:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        pad,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">log10 m</text>"#, w / 2.0, h - 20.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">log10 error</text>"#, h / 2.0, h / 2.0);
    for (x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(*x), sy(*y));
    }
    if report.slope.is_finite() {
        let line = |x: f64| report.slope * x + report.intercept * std::f64::consts::LOG10_E;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="darkorange"/><text x="{:.1}" y="44">slope {:.4}</text>"#,
            sx(x0),
            sy(line(x0)),
            sx(x1),
            sy(line(x1)),
            pad,
            report.slope
        );
    }
    if report.floor > 0.0 {
        let fy = sy(report.floor.log10());
        let _ = writeln!(s, r#"<line x1="{pad}" y1="{fy:.2}" x2="{:.1}" y2="{fy:.2}" stroke="gray" stroke-dasharray="6 4"/><text x="{:.1}" y="{:.2}" fill="gray">floor</text>"#, w - pad, w - pad - 30.0, fy - 4.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes the three report files into `dir` (created if needed).  Files are
/// staged under temporary names and renamed once all of them are written.
pub fn emit_outputs(report: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let contents: [(&str, Vec<u8>); 3] =
        [(CSV_NAME, render_csv(report)?), (SVG_NAME, render_svg(report).into_bytes()), (TXT_NAME, render_txt(report).into_bytes())];
    fs::create_dir_all(dir).map_err(|e| at(dir, e))?;
    let mut staged = vec![];
    for (name, bytes) in &contents {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(at(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, fin) in &staged {
        fs::rename(tmp, fin).map_err(|e| at(fin, e))?;
    }
    Ok(staged.into_iter().map(|(_, f)| f).collect())
}
