use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{disk_of, DiskQuadrature, Monomial, TestSpinor};
use crate::geometry::{BoundaryMesh, DomainSpec, Region};
use crate::operators::{apply_h, OperatorSpec};
use crate::spinor::{projections, spectral_gradient, FourierInterpolant, Grid, SpinorField};
use crate::{Error, Result, C64};

/// Terms of the a-priori lower bound for one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AprioriTerms {
    /// ‖H_mφ‖².
    pub lhs: f64,
    /// ‖∇φ‖²_Ω.
    pub gradient: f64,
    /// ‖P₋ tr_Ω φ‖²_{∂Ω}.
    pub p_minus_trace: f64,
    /// ‖tr_Ω φ‖²_{∂Ω}.
    pub trace: f64,
}

impl AprioriTerms {
    /// LHS − (‖∇φ‖²_Ω + m‖P₋ tr φ‖² − c‖tr φ‖²).
    pub fn margin(&self, m: f64, c: f64) -> f64 {
        self.lhs - (self.gradient + m * self.p_minus_trace - c * self.trace)
    }

    /// Smallest c ≥ 0 with a non-negative margin.
    pub fn required_c(&self, m: f64) -> f64 {
        if self.trace <= 0.0 {
            return 0.0;
        }
        ((self.gradient + m * self.p_minus_trace - self.lhs) / self.trace).max(0.0)
    }
}

/// Summary of [`apriori_bound_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct AprioriReport {
    pub mass: f64,
    pub c: f64,
    pub terms: Vec<AprioriTerms>,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Smallest c for which every margin is non-negative.
    pub c_empirical: f64,
}

/// Evaluates the terms of the a-priori bound for a grid field.  Gradients
/// are spectral, Ω-integrals use the grid mask and traces are Fourier
/// interpolated at the boundary nodes.
pub fn apriori_margins(spec: &OperatorSpec, phi: &SpinorField, mesh: &BoundaryMesh) -> Result<AprioriTerms> {
    let grid = spec.grid();
    let h2 = grid.spacing().powi(2);
    let lhs = apply_h(spec, phi)?.norm_sqr();
    let grad = spectral_gradient(phi);
    let mask = spec.domain().region_mask(grid);
    let mut gradient = 0.0;
    for (site, r) in mask.iter().enumerate() {
        if *r == Region::Omega {
            for d in &grad {
                gradient += d[2 * site].norm_sqr() + d[2 * site + 1].norm_sqr();
            }
        }
    }
    gradient *= h2;
    let interp = FourierInterpolant::new(phi);
    let (mut p_minus_trace, mut trace) = (0.0, 0.0);
    for ((x, n), w) in mesh.nodes.iter().zip(&mesh.normals).zip(&mesh.weights) {
        let v = interp.value(*x);
        let (_, pm) = projections(*n)?;
        let p = pm.apply(v);
        p_minus_trace += w * (p[0].norm_sqr() + p[1].norm_sqr());
        trace += w * (v[0].norm_sqr() + v[1].norm_sqr());
    }
    Ok(AprioriTerms { lhs, gradient, p_minus_trace, trace })
}

/// Random band-limited field with Fourier modes |j_x|, |j_y| ≤ `band`.
pub fn band_limited_field(grid: &Grid, band: usize, rng: &mut impl Rng) -> SpinorField {
    let n = grid.n();
    let band = band.min((n - 1) / 2) as i64;
    let bin = |f: i64| if f >= 0 { f as usize } else { (n as i64 + f) as usize };
    let mut comps = [vec![C64::new(0.0, 0.0); n * n], vec![C64::new(0.0, 0.0); n * n]];
    for comp in comps.iter_mut() {
        for fx in -band..=band {
            for fy in -band..=band {
                let decay = 1.0 / (1.0 + (fx * fx + fy * fy) as f64);
                comp[bin(fx) * n + bin(fy)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay;
            }
        }
    }
    let mut scratch = Vec::new();
    for comp in comps.iter_mut() {
        grid.fft2(comp, &mut scratch, true);
    }
    let values = comps[0].iter().zip(&comps[1]).flat_map(|(a, b)| [*a, *b]).collect();
    SpinorField::from_vec(grid, values).expect("finite band-limited data")
}

/// Margins of ‖H_mφ‖² ≥ ‖∇φ‖²_Ω + m‖P₋ tr φ‖² − c‖tr φ‖² over `trials`
/// random band-limited fields.  A diagnostic: the constant c is reported,
/// not judged.
pub fn apriori_bound_probe(domain: &DomainSpec, grid: &Grid, m: f64, c: f64, trials: usize, seed: u64) -> Result<AprioriReport> {
    if !(m > 1.0) {
        return Err(Error::Config(format!("the a-priori probe needs m > 1, got {m}")));
    }
    let spec = OperatorSpec::new(grid.clone(), domain.clone(), m, None)?;
    let mesh = domain.boundary_mesh(256)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let phi = band_limited_field(grid, 6, &mut rng);
        terms.push(apriori_margins(&spec, &phi, &mesh)?);
    }
    Ok(report_from_terms(m, c, terms))
}

pub(crate) fn report_from_terms(m: f64, c: f64, terms: Vec<AprioriTerms>) -> AprioriReport {
    let margins: Vec<f64> = terms.iter().map(|t| t.margin(m, c)).collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let c_empirical = terms.iter().map(|t| t.required_c(m)).fold(0.0, f64::max);
    AprioriReport { mass: m, c, terms, margins, min_margin, c_empirical }
}

/// One row of [`trace_inequality_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub epsilon: f64,
    /// Smallest C with ‖tr φ‖² ≤ ε‖∇φ‖² + C‖φ‖² on the training family.
    pub c_epsilon: f64,
    /// Fraction of a fresh family of the same size satisfying it.
    pub holdout_fraction: f64,
}

struct TraceSample {
    trace: f64,
    gradient: f64,
    norm: f64,
}

fn random_spinor(radius: f64, rng: &mut ChaCha8Rng) -> TestSpinor {
    let r = 0.8 * radius * rng.random::<f64>().sqrt();
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    let width = radius * rng.random_range(0.2..1.5);
    let mut comp = || {
        let mut v = vec![];
        for px in 0..=2u32 {
            for py in 0..=(2 - px) {
                v.push(Monomial { coefficient: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), px, py });
            }
        }
        v
    };
    let components = [comp(), comp()];
    TestSpinor::PolyGaussian { center: [r * th.cos(), r * th.sin()], width: Some(width), components }
}

fn trace_sample(phi: &TestSpinor, quad: &DiskQuadrature, mesh: &BoundaryMesh) -> TraceSample {
    let (mut gradient, mut norm, mut trace) = (0.0, 0.0, 0.0);
    for (x, w) in quad.iter() {
        let v = phi.value(x);
        norm += w * (v[0].norm_sqr() + v[1].norm_sqr());
        gradient += w * phi.gradient(x).iter().flat_map(|d| d.iter()).map(|z| z.norm_sqr()).sum::<f64>();
    }
    for (x, w) in mesh.nodes.iter().zip(&mesh.weights) {
        let v = phi.value(*x);
        trace += w * (v[0].norm_sqr() + v[1].norm_sqr());
    }
    TraceSample { trace, gradient, norm }
}

/// Empirical trace-inequality constants C_ε on a random family of smooth
/// spinors on a disk, validated on a fresh family of equal size.
pub fn trace_inequality_probe(domain: &DomainSpec, epsilons: &[f64], family: usize, seed: u64) -> Result<Vec<TraceRow>> {
    let (center, radius) = disk_of(domain)?;
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Config("trace-inequality ε values must be positive".into()));
    }
    let quad = DiskQuadrature::new(center, radius, 48);
    let mesh = domain.boundary_mesh(96)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |count: usize| -> Vec<TraceSample> {
        (0..count)
            .map(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(master.random());
                let mut phi = random_spinor(radius, &mut rng);
                if let TestSpinor::PolyGaussian { center: c, .. } = &mut phi {
                    c[0] += center[0];
                    c[1] += center[1];
                }
                trace_sample(&phi, &quad, &mesh)
            })
            .collect()
    };
    let train = draw(family);
    let holdout = draw(family);
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let c_epsilon = train.iter().map(|s| ((s.trace - eps * s.gradient) / s.norm).max(0.0)).fold(0.0, f64::max);
            let ok = holdout.iter().filter(|s| s.trace <= eps * s.gradient + c_epsilon * s.norm + 1e-12 * s.trace).count();
            TraceRow { epsilon: eps, c_epsilon, holdout_fraction: ok as f64 / family.max(1) as f64 }
        })
        .collect())
}

/// C_ε for a single constant spinor: ‖tr φ‖²/‖φ‖² = 2/R on a disk.
pub fn constant_trace_ratio(domain: &DomainSpec) -> Result<f64> {
    let (center, radius) = disk_of(domain)?;
    let phi = TestSpinor::Constant([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let s = trace_sample(&phi, &DiskQuadrature::new(center, radius, 16), &domain.boundary_mesh(64)?);
    Ok(s.trace / s.norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_spinor_ratio_is_two_on_unit_disk() {
        let d = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        assert!((constant_trace_ratio(&d).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_probe_holds_out() {
        let d = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        let rows = trace_inequality_probe(&d, &[0.1, 1.0], 200, 7).unwrap();
        assert!(rows[0].c_epsilon >= rows[1].c_epsilon);
        for r in rows {
            assert!(r.holdout_fraction >= 0.9, "{r:?}");
        }
    }

    #[test]
    fn apriori_margins_phase_invariant() {
        let g = Grid::new(31, 2.0).unwrap();
        let d = DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 };
        let spec = OperatorSpec::new(g.clone(), d.clone(), 20.0, None).unwrap();
        let mesh = d.boundary_mesh(128).unwrap();
        let phi = band_limited_field(&g, 4, &mut ChaCha8Rng::seed_from_u64(1));
        let a = apriori_margins(&spec, &phi, &mesh).unwrap();
        let b = apriori_margins(&spec, &phi.scale(C64::from_polar(1.0, 0.7)), &mesh).unwrap();
        assert!((a.margin(20.0, 1.0) - b.margin(20.0, 1.0)).abs() <= 1e-10 * a.lhs);
    }
}
