//! Domains Ω ⊂ torus cell, boundary meshes and tubular-coordinate checks.
//!
//! Conventions: the signed distance is negative inside Ω; normals on a
//! [`BoundaryMesh`] point out of Ω; the tangent is t = (−n₂, n₁) and the
//! curvature κ is defined by (t·∇)t = −κn, so a disk has κ = 1/R.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::spinor::Grid;
use crate::{Error, Result};

/// Which side of ∂Ω a point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// Ω, where the mass term vanishes.
    Omega,
    /// Ω^c, where the mass term acts.
    Complement,
}

/// Geometry of Ω.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Ω is a disk.
    Disk { center: [f64; 2], radius: f64 },
    /// Ω^c is one ball of the given radius per torus cell, centred at the
    /// cell origin; Ω is the periodic perforated plane.
    PeriodicHoles { radius: f64 },
    /// Ω is the whole torus (no mass anywhere).
    FullPlane,
    /// Ω is empty (mass everywhere).
    Empty,
    /// Ω = {x₁ < a·cos(2πx₂/P)}: an unbounded deformed half-plane.  Only
    /// available for geometry checks; it cannot be put on the torus.
    DeformedHalfSpace { amplitude: f64, period: f64 },
}

/// Boundary quadrature: nodes, arc-length weights, outward normals and
/// curvature, all with respect to one orientation (Ω by default).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
}

/// Point, outward normal and curvature of ∂Ω at one arc-length position.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint {
    pub point: [f64; 2],
    pub normal: [f64; 2],
    pub curvature: f64,
}

impl DomainSpec {
    /// Checks that the domain fits the torus cell [−L, L)².
    pub fn validate(&self, half_length: f64) -> Result<()> {
        let l = half_length;
        match *self {
            DomainSpec::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Geometry(format!("disk radius must be positive, got {radius}")));
                }
                if center[0].abs() + radius >= l || center[1].abs() + radius >= l {
                    return Err(Error::Geometry(format!(
                        "disk (center {:?}, R = {radius}) does not lie strictly inside the torus cell of half length {l}",
                        center
                    )));
                }
            }
            DomainSpec::PeriodicHoles { radius } => {
                if !(radius > 0.0 && radius < l) {
                    return Err(Error::Geometry(format!("hole radius must lie in (0, {l}), got {radius}")));
                }
            }
            DomainSpec::FullPlane | DomainSpec::Empty => {}
            DomainSpec::DeformedHalfSpace { .. } => {
                return Err(Error::Geometry("the deformed half-space is unbounded and cannot be discretized on the torus".into()));
            }
        }
        Ok(())
    }

    /// Whether the domain can be hosted by the torus discretization.
    pub fn is_discretizable(&self) -> bool {
        !matches!(self, DomainSpec::DeformedHalfSpace { .. })
    }

    pub fn has_boundary(&self) -> bool {
        !matches!(self, DomainSpec::FullPlane | DomainSpec::Empty)
    }

    /// Signed distance to ∂Ω, negative inside Ω.  For the deformed
    /// half-space this is the horizontal offset x₁ − f(x₂), which has the
    /// right sign but is not a metric distance.
    pub fn signed_distance(&self, x: [f64; 2]) -> f64 {
        match *self {
            DomainSpec::Disk { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) - radius,
            DomainSpec::PeriodicHoles { radius } => radius - x[0].hypot(x[1]),
            DomainSpec::FullPlane => f64::NEG_INFINITY,
            DomainSpec::Empty => f64::INFINITY,
            DomainSpec::DeformedHalfSpace { amplitude, period } => x[0] - amplitude * (2.0 * PI * x[1] / period).cos(),
        }
    }

    /// Classifies `x`; points within `tie` of ∂Ω count as Ω.
    pub fn region(&self, x: [f64; 2], tie: f64) -> Region {
        if self.signed_distance(x) <= tie {
            Region::Omega
        } else {
            Region::Complement
        }
    }

    /// Indicator with the grid tie-break 1e−9·h.
    pub fn indicator(&self, x: [f64; 2], spacing: f64) -> Region {
        self.region(x, 1e-9 * spacing)
    }

    /// Region of every grid site.
    pub fn region_mask(&self, grid: &Grid) -> Vec<Region> {
        let h = grid.spacing();
        (0..grid.sites()).map(|s| self.indicator(grid.point(s), h)).collect()
    }

    /// Length of ∂Ω (one period for the deformed half-space).
    pub fn boundary_length(&self) -> Result<f64> {
        match *self {
            DomainSpec::Disk { radius, .. } | DomainSpec::PeriodicHoles { radius } => Ok(2.0 * PI * radius),
            DomainSpec::DeformedHalfSpace { amplitude, period } => Ok(graph_arc_length(amplitude, period, period)),
            DomainSpec::FullPlane | DomainSpec::Empty => Err(no_boundary()),
        }
    }

    /// ∂Ω at arc-length position `s` (periodic in the boundary length).
    pub fn boundary_at(&self, s: f64) -> Result<BoundaryPoint> {
        match *self {
            DomainSpec::Disk { center, radius } => {
                let th = s / radius;
                let (sn, cs) = th.sin_cos();
                Ok(BoundaryPoint {
                    point: [center[0] + radius * cs, center[1] + radius * sn],
                    normal: [cs, sn],
                    curvature: 1.0 / radius,
                })
            }
            DomainSpec::PeriodicHoles { radius } => {
                // Traversed clockwise so that t = (−n₂, n₁) with n pointing into the hole.
                let th = -s / radius;
                let (sn, cs) = th.sin_cos();
                Ok(BoundaryPoint { point: [radius * cs, radius * sn], normal: [-cs, -sn], curvature: -1.0 / radius })
            }
            DomainSpec::DeformedHalfSpace { amplitude, period } => {
                let y = graph_position_at(amplitude, period, s);
                let k = 2.0 * PI / period;
                let f = amplitude * (k * y).cos();
                let fp = -amplitude * k * (k * y).sin();
                let fpp = -amplitude * k * k * (k * y).cos();
                let w = (1.0 + fp * fp).sqrt();
                Ok(BoundaryPoint { point: [f, y], normal: [1.0 / w, -fp / w], curvature: -fpp / (w * w * w) })
            }
            DomainSpec::FullPlane | DomainSpec::Empty => Err(no_boundary()),
        }
    }

    /// Equal-arc-length boundary mesh with `count` nodes.
    pub fn boundary_mesh(&self, count: usize) -> Result<BoundaryMesh> {
        if !self.has_boundary() {
            return Err(no_boundary());
        }
        if count < 16 {
            return Err(Error::Geometry(format!("boundary mesh needs at least 16 nodes, got {count}")));
        }
        let length = self.boundary_length()?;
        let ds = length / count as f64;
        let mut mesh = BoundaryMesh { nodes: vec![], weights: vec![ds; count], normals: vec![], curvature: vec![] };
        for j in 0..count {
            let p = self.boundary_at(j as f64 * ds)?;
            mesh.nodes.push(p.point);
            mesh.normals.push(p.normal);
            mesh.curvature.push(p.curvature);
        }
        Ok(mesh)
    }
}

fn no_boundary() -> Error {
    Error::Geometry("domain has no boundary".into())
}

/// 16-point Gauss–Legendre rule on [−1, 1], used for arc lengths.
fn gauss16() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| crate::identities::gauss_legendre(16))
}

/// Arc length of x₁ = a·cos(2πy/P) for y ∈ [−P/2, −P/2 + y_span].
fn graph_arc_length(a: f64, p: f64, y_span: f64) -> f64 {
    let k = 2.0 * PI / p;
    let panels = 64;
    let y0 = -0.5 * p;
    let dy = y_span / panels as f64;
    let mut total = 0.0;
    for q in 0..panels {
        let lo = y0 + q as f64 * dy;
        for &(x, w) in gauss16() {
            let y = lo + 0.5 * dy * (x + 1.0);
            let fp = a * k * (k * y).sin();
            total += 0.5 * dy * w * (1.0 + fp * fp).sqrt();
        }
    }
    total
}

/// Inverts the arc-length map of the cosine graph by Newton's method.
fn graph_position_at(a: f64, p: f64, s: f64) -> f64 {
    let total = graph_arc_length(a, p, p);
    let wraps = (s / total).floor();
    let s = s - wraps * total;
    let k = 2.0 * PI / p;
    let mut span = s / total * p;
    for _ in 0..50 {
        let g = graph_arc_length(a, p, span) - s;
        let y = -0.5 * p + span;
        let fp = a * k * (k * y).sin();
        let step = g / (1.0 + fp * fp).sqrt();
        span -= step;
        if step.abs() < 1e-14 * p {
            break;
        }
    }
    -0.5 * p + span + wraps * p
}

impl BoundaryMesh {
    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// ∮ n ds — vanishes for a closed curve.
    pub fn normal_integral(&self) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for (n, w) in self.normals.iter().zip(&self.weights) {
            acc[0] += w * n[0];
            acc[1] += w * n[1];
        }
        acc
    }

    /// The same mesh seen from Ω^c: normals flipped, curvature negated.
    pub fn complement(&self) -> BoundaryMesh {
        BoundaryMesh {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            normals: self.normals.iter().map(|n| [-n[0], -n[1]]).collect(),
            curvature: self.curvature.iter().map(|k| -k).collect(),
        }
    }

    /// Tangents t = (−n₂, n₁).
    pub fn tangents(&self) -> Vec<[f64; 2]> {
        self.normals.iter().map(|n| [-n[1], n[0]]).collect()
    }
}

/// Result of the tubular-neighbourhood check Ψ(t, s) = s − t·n(s).
#[derive(Clone, Debug)]
pub struct TubularReport {
    pub delta0: f64,
    /// Smallest and largest sampled |det J_Ψ|.
    pub det_min: f64,
    pub det_max: f64,
    /// Tightest C₀ with C₀ ≥ |det J_Ψ| ≥ C₀⁻¹ on the samples; any larger
    /// value satisfies the strict inequalities.
    pub c0: f64,
    /// Smallest distance between images of distinct samples.
    pub min_separation: f64,
    pub injective: bool,
    /// max |signed distance| of Ψ(0, s) — the boundary is reproduced.
    pub boundary_defect: f64,
    /// Samples with t > 0 mapped outside Ω or t < 0 mapped into Ω.
    pub orientation_violations: usize,
    pub violations: Vec<String>,
    /// Sampled (t, arc length, |det J_Ψ|) triples.
    pub jacobian_samples: Vec<(f64, f64, f64)>,
}

impl TubularReport {
    /// Whether all sampled items of the hypothesis hold.
    pub fn holds(&self) -> bool {
        self.injective && self.orientation_violations == 0 && self.boundary_defect < 1e-9 && self.det_min > 0.0
    }

    /// Whether `c0` satisfies C₀ > |det J| > 1/C₀ on every sample.
    pub fn admits(&self, c0: f64) -> bool {
        c0 > self.det_max && self.det_min > 1.0 / c0
    }
}

/// Samples Ψ on `samples` values of t ∈ (−δ₀, δ₀) (midpoints) and
/// 4·`samples` boundary positions, with Jacobians by central differences.
/// Violations are reported, never raised.
pub fn tubular_check(domain: &DomainSpec, delta0: f64, samples: usize) -> Result<TubularReport> {
    if !(delta0 > 0.0) || samples < 2 {
        return Err(Error::Geometry("tubular check needs δ₀ > 0 and at least 2 samples".into()));
    }
    let length = domain.boundary_length()?;
    let ns = 4 * samples;
    let dt = 2.0 * delta0 / samples as f64;
    let ds = length / ns as f64;
    let psi = |t: f64, s: f64| -> Result<[f64; 2]> {
        let b = domain.boundary_at(s)?;
        Ok([b.point[0] - t * b.normal[0], b.point[1] - t * b.normal[1]])
    };
    let eps = 1e-5 * delta0.min(length);
    let mut report = TubularReport {
        delta0,
        det_min: f64::INFINITY,
        det_max: 0.0,
        c0: 0.0,
        min_separation: f64::INFINITY,
        injective: true,
        boundary_defect: 0.0,
        orientation_violations: 0,
        violations: vec![],
        jacobian_samples: vec![],
    };
    let mut images = Vec::with_capacity(samples * ns);
    for i in 0..samples {
        let t = -delta0 + (i as f64 + 0.5) * dt;
        for j in 0..ns {
            let s = j as f64 * ds;
            let p = psi(t, s)?;
            let (pt1, pt0) = (psi(t + eps, s)?, psi(t - eps, s)?);
            let (ps1, ps0) = (psi(t, s + eps)?, psi(t, s - eps)?);
            let jt = [(pt1[0] - pt0[0]) / (2.0 * eps), (pt1[1] - pt0[1]) / (2.0 * eps)];
            let js = [(ps1[0] - ps0[0]) / (2.0 * eps), (ps1[1] - ps0[1]) / (2.0 * eps)];
            let det = (jt[0] * js[1] - jt[1] * js[0]).abs();
            report.det_min = report.det_min.min(det);
            report.det_max = report.det_max.max(det);
            report.jacobian_samples.push((t, s, det));
            let inside = domain.signed_distance(p) < 0.0;
            if inside != (t > 0.0) {
                report.orientation_violations += 1;
                if report.violations.len() < 16 {
                    report.violations.push(format!("orientation: Ψ({t:.4}, {s:.4}) on the wrong side"));
                }
            }
            images.push(((i, j), p));
        }
    }
    for j in 0..ns {
        let p = psi(0.0, j as f64 * ds)?;
        report.boundary_defect = report.boundary_defect.max(domain.signed_distance(p).abs());
    }
    // Injectivity: bucket the images on a lattice of the collision radius.
    let radius = 0.1 * dt.min(ds);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (idx, (_, p)) in images.iter().enumerate() {
        let key = ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
        buckets.entry(key).or_default().push(idx);
    }
    for (idx, (label, p)) in images.iter().enumerate() {
        let key = ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = buckets.get(&(key.0 + dx, key.1 + dy)) {
                    for &other in list {
                        if other <= idx {
                            continue;
                        }
                        let q = images[other].1;
                        let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                        report.min_separation = report.min_separation.min(d);
                        if d < radius {
                            report.injective = false;
                            if report.violations.len() < 16 {
                                report.violations.push(format!(
                                    "injectivity: samples {:?} and {:?} map within {d:.3e}",
                                    label, images[other].0
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    report.c0 = report.det_max.max(1.0 / report.det_min);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_indicator() {
        let d = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        assert_eq!(d.indicator([0.0, 0.0], 0.1), Region::Omega);
        assert_eq!(d.indicator([2.0, 0.0], 0.1), Region::Complement);
        assert_eq!(d.indicator([1.0, 0.0], 0.1), Region::Omega);
        assert_eq!(DomainSpec::FullPlane.indicator([5.0, 5.0], 0.1), Region::Omega);
        assert_eq!(DomainSpec::Empty.indicator([0.0, 0.0], 0.1), Region::Complement);
    }

    #[test]
    fn validation() {
        assert!(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }.validate(2.0).is_ok());
        assert!(DomainSpec::Disk { center: [1.5, 0.0], radius: 1.0 }.validate(2.0).is_err());
        assert!(DomainSpec::PeriodicHoles { radius: 2.5 }.validate(2.0).is_err());
        assert!(DomainSpec::DeformedHalfSpace { amplitude: 0.2, period: 3.0 }.validate(2.0).is_err());
    }

    #[test]
    fn meshless_domains_rejected() {
        assert!(DomainSpec::FullPlane.boundary_mesh(32).is_err());
        assert!(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }.boundary_mesh(8).is_err());
    }

    #[test]
    fn hole_curvature_is_negative() {
        let mesh = DomainSpec::PeriodicHoles { radius: 0.5 }.boundary_mesh(32).unwrap();
        assert!(mesh.curvature.iter().all(|&k| (k + 2.0).abs() < 1e-14));
        // Normals point into the hole, i.e. towards the origin.
        for (p, n) in mesh.nodes.iter().zip(&mesh.normals) {
            assert!(p[0] * n[0] + p[1] * n[1] < 0.0);
        }
    }

    #[test]
    fn deformed_half_space_mesh_is_equal_arc() {
        let d = DomainSpec::DeformedHalfSpace { amplitude: 0.3, period: 2.0 };
        let len = d.boundary_length().unwrap();
        assert!(len > 2.0);
        let mesh = d.boundary_mesh(64).unwrap();
        for w in mesh.nodes.windows(2) {
            let chord = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
            assert!((chord - len / 64.0).abs() < 2e-3 * len / 64.0);
        }
        assert!(!d.is_discretizable());
    }
}
