use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{op_norm_diff, DenseResolvent, KrylovResolvent, NormEstimate, ResolventMap, StripSpec};
use crate::geometry::{DomainSpec, Region};
use crate::identities::band_limited_field;
use crate::linalg::dot_conj;
use crate::operators::{OperatorSpec, PotentialSpec, Profile};
use crate::parallel::ordered_map;
use crate::spectra::{full_spectrum, window_eig_all, ResolventSolver, SectorSolver, SpectralWindow, Spectrum, WindowOptions};
use crate::spinor::{projections, FourierInterpolant, Grid, SpinorField, SIGMA3};
use crate::{Error, Result, C64};

/// Knobs shared by the resolvent studies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyOptions {
    pub power_iterations: usize,
    pub seed: u64,
    pub workers: usize,
    pub dense_cap: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self { power_iterations: 300, seed: 1, workers: 1, dense_cap: crate::operators::DEFAULT_DENSE_CAP }
    }
}

/// D(m, ξ) = ‖R_m(ξ) − R_{M_ref}(ξ)‖ on the strip corners.
#[derive(Clone, Debug)]
pub struct ResolventStudy {
    pub masses: Vec<f64>,
    pub reference_mass: f64,
    pub samples: Vec<C64>,
    /// `estimates[i][j]` for mass i and sample j.
    pub estimates: Vec<Vec<NormEstimate>>,
    /// sup over samples, per mass.
    pub sup: Vec<f64>,
    /// 1/√M_ref: accuracy of the surrogate as a stand-in for the limit.
    pub floor: f64,
}

impl ResolventStudy {
    pub fn all_converged(&self) -> bool {
        self.estimates.iter().flatten().all(|e| e.converged)
    }
}

/// Spectra of H_m for each mass, symmetry-reduced when possible.
pub(crate) fn spectra_for(base: &OperatorSpec, masses: &[f64], opts: &StudyOptions) -> Result<Vec<Spectrum>> {
    let sectors = SectorSolver::new(base.grid())?;
    let sectors = if sectors.supports(base) { Some(sectors) } else { None };
    ordered_map(masses.to_vec(), opts.workers, |m| full_spectrum(&base.with_mass(m), sectors.as_ref(), opts.dense_cap)).into_iter().collect()
}

/// Runs the resolvent convergence study: for each m in `masses` and each
/// strip corner ξ, the operator norm of R_m(ξ) − R_{M_ref}(ξ) with
/// M_ref = `ref_factor`·max(m).
pub fn convergence_resolvent_study(
    domain: &DomainSpec,
    grid: &Grid,
    potential: Option<PotentialSpec>,
    strip: &StripSpec,
    masses: &[f64],
    ref_factor: f64,
    opts: &StudyOptions,
) -> Result<ResolventStudy> {
    if masses.is_empty() {
        return Err(Error::Config("empty mass schedule".into()));
    }
    if !(ref_factor >= 16.0) {
        return Err(Error::Config(format!("reference-mass factor must be at least 16, got {ref_factor}")));
    }
    let m_max = masses.iter().copied().fold(f64::MIN, f64::max);
    let reference_mass = ref_factor * m_max;
    let base = OperatorSpec::new(grid.clone(), domain.clone(), reference_mass, potential)?;
    let mut all = masses.to_vec();
    all.push(reference_mass);
    let spectra = spectra_for(&base, &all, opts)?;
    let (reference, spectra) = spectra.split_last().expect("reference spectrum present");
    let samples = strip.samples();
    let cells: Vec<(usize, usize)> = (0..masses.len()).flat_map(|i| (0..samples.len()).map(move |j| (i, j))).collect();
    let results = ordered_map(cells, opts.workers, |(i, j)| {
        let a = ResolventMap { solver: &spectra[i], z: samples[j] };
        let b = ResolventMap { solver: reference, z: samples[j] };
        op_norm_diff(&a, &b, opts.power_iterations, opts.seed ^ ((i as u64) << 32 | j as u64))
    });
    let mut estimates = vec![Vec::with_capacity(samples.len()); masses.len()];
    let mut it = results.into_iter();
    for row in estimates.iter_mut() {
        for _ in 0..samples.len() {
            row.push(it.next().expect("one result per cell")?);
        }
    }
    let sup = estimates.iter().map(|r| r.iter().map(|e| e.value).fold(0.0, f64::max)).collect();
    Ok(ResolventStudy { masses: masses.to_vec(), reference_mass, samples, estimates, sup, floor: 1.0 / reference_mass.sqrt() })
}

/// A window eigenpair and the share of its norm on Ω^c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapState {
    pub energy: f64,
    pub complement_fraction: f64,
}

/// Eigenvalues of H_m in a window and their localization.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub mass: f64,
    pub window: SpectralWindow,
    pub states: Vec<GapState>,
}

impl GapReport {
    /// States carrying more than half their norm in Ω^c.
    pub fn spurious(&self) -> Vec<GapState> {
        self.states.iter().copied().filter(|s| s.complement_fraction > 0.5).collect()
    }

    pub fn spurious_count(&self) -> usize {
        self.spurious().len()
    }

    pub fn max_complement_fraction(&self) -> f64 {
        self.states.iter().map(|s| s.complement_fraction).fold(0.0, f64::max)
    }
}

/// Builds a [`GapReport`] from already computed eigenpairs.
pub fn gap_from_pairs(spec: &OperatorSpec, window: &SpectralWindow, pairs: &[(f64, Vec<C64>)]) -> GapReport {
    let mask = spec.exterior_mask();
    let states = pairs
        .iter()
        .filter(|(e, _)| window.contains(*e))
        .map(|(energy, v)| {
            let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let outside: f64 = mask.iter().enumerate().filter(|(_, &ext)| ext).map(|(s, _)| v[2 * s].norm_sqr() + v[2 * s + 1].norm_sqr()).sum();
            GapState { energy: *energy, complement_fraction: if total > 0.0 { outside / total } else { 0.0 } }
        })
        .collect();
    GapReport { mass: spec.mass(), window: *window, states }
}

/// Eigenvalues of H_m in `window` ⊂ (−m/2, m/2) with the share of their
/// norm on Ω^c.
pub fn gap_probe(spec: &OperatorSpec, window: &SpectralWindow, opts: &WindowOptions) -> Result<GapReport> {
    let half = 0.5 * spec.mass().abs();
    if window.a < -half || window.b > half {
        return Err(Error::Config(format!("gap window ({}, {}) must lie inside (−m/2, m/2) = ({}, {half})", window.a, window.b, -half)));
    }
    let res = window_eig_all(spec, window, opts)?;
    let vecs = res.eigenvectors.unwrap_or_default();
    let pairs: Vec<(f64, Vec<C64>)> = res.eigenvalues.into_iter().zip(vecs).collect();
    Ok(gap_from_pairs(spec, window, &pairs))
}

/// Outcome of [`resolvent_identity_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityCheck {
    /// max over trials of |⟨f,R_m g⟩ − ⟨f,(R_Ω ⊕ R^{(m)}_{Ω^c})g⟩ − boundary terms|.
    pub max_residual: f64,
    /// Largest magnitude of the sum of the two boundary terms.
    pub max_boundary: f64,
    /// Largest |⟨f, R_m g⟩|, for scale.
    pub max_lhs: f64,
}

fn solver_for<'a>(spec: &'a OperatorSpec, cap: usize) -> Result<Box<dyn ResolventSolver + 'a>> {
    if spec.dim() <= cap.min(4096) {
        Ok(Box::new(DenseResolvent::new(spec, cap)?))
    } else {
        Ok(Box::new(KrylovResolvent { op: spec, tol: 1e-10, max_iter: 20_000 }))
    }
}

/// Checks the resolvent identity
/// ⟨f, R_m g⟩ = ⟨f, (R_Ω ⊕ R^{(m)}_{Ω^c}) g⟩ + ⟨P₋ tr ψ, σ₃ tr φ⟩ + ⟨P₊ tr ψ, σ₃ tr φ̃⟩
/// with ψ = R_m(z̄)f, φ = R_Ω(z)h, φ̃ = R^{(m)}_{Ω^c}(z)h̃.
///
/// R_Ω is represented by the reference-mass surrogate (mass `m_ref` on
/// Ω^c) and R^{(m)}_{Ω^c} by the operator with mass m on Ω^c and `m_ref`
/// on Ω; traces are Fourier interpolated on the boundary mesh.  Only
/// disks centred at the origin are supported (the Ω-massive operator is
/// expressed through the periodic-holes geometry).
pub fn resolvent_identity_check(domain: &DomainSpec, grid: &Grid, m: f64, m_ref: f64, z: C64, trials: usize, seed: u64) -> Result<IdentityCheck> {
    let DomainSpec::Disk { center, radius } = *domain else {
        return Err(Error::Geometry("the resolvent identity check needs a disk domain".into()));
    };
    if center != [0.0, 0.0] {
        return Err(Error::Geometry("the resolvent identity check needs a disk centred at the origin".into()));
    }
    let cap = crate::operators::DEFAULT_DENSE_CAP;
    let h_m = OperatorSpec::new(grid.clone(), domain.clone(), m, None)?;
    let h_omega = OperatorSpec::new(grid.clone(), domain.clone(), m_ref, None)?;
    let h_comp = OperatorSpec::new(grid.clone(), DomainSpec::PeriodicHoles { radius }, m_ref - m, Some(PotentialSpec::Sigma3(Profile::Constant(m))))?;
    let (s_m, s_omega, s_comp) = (solver_for(&h_m, cap)?, solver_for(&h_omega, cap)?, solver_for(&h_comp, cap)?);
    let mask = domain.region_mask(grid);
    let mesh = domain.boundary_mesh(256)?;
    let h2 = grid.spacing().powi(2);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IdentityCheck { max_residual: 0.0, max_boundary: 0.0, max_lhs: 0.0 };
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(master.random());
        let f = band_limited_field(grid, 5, &mut rng);
        let g = band_limited_field(grid, 5, &mut rng);
        let split = |v: &SpinorField, part: Region| -> Vec<C64> {
            let mut x = v.as_slice().to_vec();
            for (s, r) in mask.iter().enumerate() {
                if *r != part {
                    x[2 * s] = C64::new(0.0, 0.0);
                    x[2 * s + 1] = C64::new(0.0, 0.0);
                }
            }
            x
        };
        let (h, ht) = (split(&g, Region::Omega), split(&g, Region::Complement));
        let lhs = dot_conj(f.as_slice(), &s_m.solve(z, g.as_slice())?) * h2;
        let psi = SpinorField::from_vec(grid, s_m.solve(z.conj(), f.as_slice())?)?;
        let phi = SpinorField::from_vec(grid, s_omega.solve(z, &h)?)?;
        let phit = SpinorField::from_vec(grid, s_comp.solve(z, &ht)?)?;
        let mut combined = split(&phi, Region::Omega);
        for (c, p) in combined.iter_mut().zip(split(&phit, Region::Complement)) {
            *c += p;
        }
        let volume = dot_conj(f.as_slice(), &combined) * h2;
        let (ip, iphi, iphit) = (FourierInterpolant::new(&psi), FourierInterpolant::new(&phi), FourierInterpolant::new(&phit));
        let mut boundary = C64::new(0.0, 0.0);
        for ((x, n), w) in mesh.nodes.iter().zip(&mesh.normals).zip(&mesh.weights) {
            let (pp, pm) = projections(*n)?;
            let tp = ip.value(*x);
            let a = pm.apply(tp);
            let b = pp.apply(tp);
            let s1 = SIGMA3.apply(iphi.value(*x));
            let s2 = SIGMA3.apply(iphit.value(*x));
            boundary += (a[0].conj() * s1[0] + a[1].conj() * s1[1] + b[0].conj() * s2[0] + b[1].conj() * s2[1]) * *w;
        }
        out.max_residual = out.max_residual.max((lhs - volume - boundary).norm());
        out.max_boundary = out.max_boundary.max(boundary.norm());
        out.max_lhs = out.max_lhs.max(lhs.norm());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_domain_has_no_window_states() {
        let g = Grid::new(9, 2.0).unwrap();
        let spec = OperatorSpec::new(g, DomainSpec::Empty, 8.0, None).unwrap();
        let w = SpectralWindow::new(-4.0, 4.0).unwrap();
        let r = gap_probe(&spec, &w, &WindowOptions::default()).unwrap();
        assert!(r.states.is_empty());
    }

    #[test]
    fn empty_domain_resolvent_norm_at_zero() {
        // ‖R_m(0)‖ = 1/m when the whole plane is massive.
        let g = Grid::new(9, 2.0).unwrap();
        let spec = OperatorSpec::new(g, DomainSpec::Empty, 3.0, None).unwrap();
        let sp = full_spectrum(&spec, None, 8192).unwrap();
        let norm = sp.eigenvalues().iter().map(|l| 1.0 / l.abs()).fold(0.0, f64::max);
        assert!((norm - 1.0 / 3.0).abs() < 1e-10);
    }
}
