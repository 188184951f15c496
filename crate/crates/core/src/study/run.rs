//! Runners for the study kinds.

use crate::geometry::DomainSpec;
use crate::identities::{
    apriori_bound_probe, energy_identity_terms, partial_integration_residual, trace_inequality_probe, Monomial, TestSpinor,
};
use crate::operators::radial::BoundaryCondition;
use crate::operators::OperatorSpec;
use crate::parallel::ordered_map;
use crate::resolvents::{convergence_resolvent_study, gap_from_pairs, op_norm_diff, spectra_for, StudyOptions};
use crate::spectra::oracle::MAX_CHANNEL;
use crate::spectra::{
    disk_oracle_eigs, full_spectrum, pair_nearest, window_eig_all, ContourSpec, RieszProjection, SectorSolver, SpectralWindow, WindowOptions,
};
use crate::spinor::Grid;
use crate::{Error, Result, C64};

use super::config::{StudyConfig, StudyKind};
use super::report::{ConvergenceReport, ErrorRow};

/// Grids up to this size are diagonalized sector by sector; larger ones go
/// through the Krylov window solver.
pub const SECTOR_DENSE_MAX_N: usize = 71;
/// Required accuracy of the Riesz projections under Q-doubling.
pub const Q_DOUBLING_LIMIT: f64 = 1e-8;
/// Identity-suite residual limit at the configured quadrature order.
pub const IDENTITY_LIMIT: f64 = 1e-7;
/// Below this level the order-doubling ratio is not judged.
pub const IDENTITY_FLOOR: f64 = 1e-9;

type Pairs = Vec<(f64, Vec<C64>)>;

/// Runs the study selected by `config.kind`.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    match config.kind {
        StudyKind::EigenvalueConvergence => run_eigenvalue_convergence(config),
        StudyKind::ResolventConvergence => run_resolvent_convergence(config),
        StudyKind::ProjectionConvergence => run_projection_convergence(config),
        StudyKind::PotentialConvergence => run_potential_convergence(config),
        StudyKind::IdentitySuite => run_identity_suite(config),
        StudyKind::GapScan => run_gap_scan(config),
    }
}

/// Checks that need the oracle or the operator but no spectral solve:
/// grid/domain compatibility and the window margin.
pub fn check_preconditions(config: &StudyConfig) -> Result<()> {
    config.validate()?;
    if let Some(window) = needs_window(config) {
        if let Some((_, radius)) = config.domain.disk() {
            oracle_in_window(radius, &window, config.mass.limit_condition(), config.window_margin)?;
        }
    }
    if config.kind == StudyKind::GapScan {
        let w = config.spectral_window()?;
        if w.a.abs().max(w.b.abs()) >= 0.5 * config.mass.m0 {
            return Err(Error::Config(format!("gap-scan window must lie inside (−m₀/2, m₀/2) = (−{h}, {h})", h = 0.5 * config.mass.m0)));
        }
    }
    if config.kind != StudyKind::EigenvalueConvergence && config.kind != StudyKind::GapScan && config.mass.sign != 1.0 {
        return Err(Error::Config(format!("mass.sign = -1 is only supported by eigenvalue and gap studies, not {}", config.kind)));
    }
    Ok(())
}

fn needs_window(config: &StudyConfig) -> Option<SpectralWindow> {
    match config.kind {
        StudyKind::EigenvalueConvergence | StudyKind::ProjectionConvergence => config.spectral_window().ok(),
        _ => None,
    }
}

/// Oracle eigenvalues in `window`, after checking that no oracle value lies
/// within `margin` of an endpoint.
pub fn oracle_in_window(radius: f64, window: &SpectralWindow, bc: BoundaryCondition, margin: f64) -> Result<Vec<f64>> {
    if window.a.abs().max(window.b.abs()) * radius + margin * radius > (MAX_CHANNEL - 8) as f64 {
        return Err(Error::Config(format!("window ({}, {}) reaches beyond the oracle's channel range", window.a, window.b)));
    }
    let padded = SpectralWindow::new(window.a - margin.max(1e-3), window.b + margin.max(1e-3))?;
    let all = disk_oracle_eigs(radius, -MAX_CHANNEL..=MAX_CHANNEL, &padded, bc)?;
    if let Some(e) = all.iter().find(|e| (e.energy - window.a).abs() < margin || (e.energy - window.b).abs() < margin) {
        return Err(Error::Config(format!(
            "oracle eigenvalue {} (channel {}) is within the margin {margin} of the window ({}, {})",
            e.energy, e.channel, window.a, window.b
        )));
    }
    Ok(all.into_iter().map(|e| e.energy).filter(|&e| window.contains(e)).collect())
}

fn options(config: &StudyConfig) -> StudyOptions {
    StudyOptions { power_iterations: config.power_iterations, seed: config.seed, workers: config.workers, dense_cap: config.dense_cap }
}

fn window_options(config: &StudyConfig) -> WindowOptions {
    WindowOptions { seed: config.seed, ..WindowOptions::default() }
}

/// Eigenpairs of each operator inside `window`: sector-wise dense
/// diagonalization on small symmetric grids, Krylov otherwise.
fn window_pairs_for(specs: Vec<OperatorSpec>, window: &SpectralWindow, config: &StudyConfig) -> Result<Vec<Pairs>> {
    let Some(first) = specs.first() else {
        return Ok(vec![]);
    };
    let sectors = if first.grid().n() <= SECTOR_DENSE_MAX_N { Some(SectorSolver::new(first.grid())?) } else { None };
    let opts = window_options(config);
    ordered_map(specs, config.workers, |spec| -> Result<Pairs> {
        match &sectors {
            Some(s) if s.supports(&spec) => Ok(full_spectrum(&spec, Some(s), config.dense_cap)?.window_pairs(window.a, window.b)),
            _ => {
                let r = window_eig_all(&spec, window, &opts)?;
                Ok(r.eigenvalues.into_iter().zip(r.eigenvectors.unwrap_or_default()).collect())
            }
        }
    })
    .into_iter()
    .collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Window eigenvalues of H_{±m} against the disk oracle; the discretization
/// floor is the eigenvalue shift of the largest m between grids n and 2n+1.
pub fn run_eigenvalue_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let (_, radius) = config.domain.disk().ok_or_else(|| Error::Config("eigenvalue studies need a disk".into()))?;
    let window = config.spectral_window()?;
    let bc = config.mass.limit_condition();
    let oracle = oracle_in_window(radius, &window, bc, config.window_margin)?;
    let grid = config.grid()?;
    let domain = config.domain.to_spec();
    let masses = config.mass.masses();
    let sign = config.mass.sign;
    let specs = masses.iter().map(|&m| OperatorSpec::new(grid.clone(), domain.clone(), sign * m, None)).collect::<Result<Vec<_>>>()?;
    let pairs = window_pairs_for(specs.clone(), &window, config)?;

    let mut notes = vec![("oracle".to_string(), fmt_list(&oracle))];
    let mut failures = vec![];
    let mut errors = vec![];
    for (i, (spec, p)) in specs.iter().zip(&pairs).enumerate() {
        let computed: Vec<f64> = p.iter().map(|x| x.0).collect();
        let pairing = pair_nearest(&computed, &oracle);
        errors.push(if pairing.pairs.is_empty() { f64::NAN } else { pairing.max_error(&computed, &oracle) });
        let extra: Pairs = pairing.unpaired_computed.iter().map(|&k| p[k].clone()).collect();
        let gap = gap_from_pairs(spec, &window, &extra);
        notes.push((format!("m={:?}", masses[i]), format!("eigenvalues [{}] unpaired {} spurious {}", fmt_list(&computed), extra.len(), gap.spurious_count())));
        if i + 1 == masses.len() {
            for s in gap.spurious() {
                failures.push(format!("spurious state at m={:?}: E={:?}, exterior fraction {:.3}", masses[i], s.energy, s.complement_fraction));
            }
            for &k in &pairing.unpaired_oracle {
                failures.push(format!("oracle eigenvalue {:?} has no partner at m={:?}", oracle[k], masses[i]));
            }
        }
    }
    let floor = if config.floor_refine {
        let m = *masses.last().expect("non-empty schedule");
        let fine = Grid::new(2 * grid.n() + 1, grid.half_length())?;
        let spec = OperatorSpec::new(fine, domain, sign * m, None)?;
        let fine_pairs = window_pairs_for(vec![spec], &window, config)?.remove(0);
        let coarse: Vec<f64> = pairs.last().expect("non-empty").iter().map(|x| x.0).collect();
        let finer: Vec<f64> = fine_pairs.iter().map(|x| x.0).collect();
        notes.push(("refined grid eigenvalues".into(), fmt_list(&finer)));
        let pr = pair_nearest(&coarse, &finer);
        // Nothing to compare: the floor is unknown, not zero.
        if pr.pairs.is_empty() { f64::NAN } else { pr.max_error(&coarse, &finer) }
    } else {
        0.0
    };
    Ok(ConvergenceReport::build(config, &masses, &errors, floor, notes, failures))
}

/// D(m) = sup over strip corners of ‖R_m(ξ) − R_{M_ref}(ξ)‖.
pub fn run_resolvent_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let study = convergence_resolvent_study(
        &config.domain.to_spec(),
        &config.grid()?,
        config.potential.to_spec(),
        &config.strip_spec()?,
        &config.mass.masses(),
        config.mass.ref_factor,
        &options(config),
    )?;
    let mut notes = vec![("reference mass".to_string(), format!("{:?}", study.reference_mass))];
    for (m, row) in study.masses.iter().zip(&study.estimates) {
        let cells: Vec<String> = study.samples.iter().zip(row).map(|(z, e)| format!("{z}:{:?}{}", e.value, if e.converged { "" } else { "(lower bound)" })).collect();
        notes.push((format!("m={m:?}"), cells.join(" ")));
    }
    // Monotonicity self-check up to twice the floor.
    let mono = study.sup.windows(2).all(|w| w[0] >= w[1] - 2.0 * study.floor);
    notes.push(("monotone up to floor".into(), mono.to_string()));
    notes.push(("all power iterations converged".into(), study.all_converged().to_string()));
    Ok(ConvergenceReport::build(config, &study.masses, &study.sup, study.floor, notes, vec![]))
}

/// ‖P_m − P_{M_ref}‖ for the Riesz projections of the window, with rank and
/// quadrature checks.
pub fn run_projection_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let (_, radius) = config.domain.disk().ok_or_else(|| Error::Config("projection studies need a disk".into()))?;
    let window = config.spectral_window()?;
    let oracle = oracle_in_window(radius, &window, BoundaryCondition::Minus, config.window_margin)?;
    let contour = config.contour()?;
    let doubled = ContourSpec::new(window, contour.offset, 2 * contour.order)?;
    let masses = config.mass.masses();
    let reference = config.mass.reference();
    let base = OperatorSpec::new(config.grid()?, config.domain.to_spec(), reference, None)?;
    let mut all = masses.clone();
    all.push(reference);
    let opts = options(config);
    let spectra = spectra_for(&base, &all, &opts)?;
    let (ref_spectrum, spectra) = spectra.split_last().expect("reference spectrum present");
    let p_ref = RieszProjection::new(ref_spectrum, contour);

    let mut notes = vec![("oracle count".to_string(), oracle.len().to_string()), ("reference mass".into(), format!("{reference:?}"))];
    let mut failures = vec![];
    let mut ranks = vec![];
    let cells: Vec<usize> = (0..masses.len()).collect();
    let results = ordered_map(cells, config.workers, |i| -> Result<(f64, f64, f64, bool)> {
        let p = RieszProjection::new(&spectra[i], contour);
        let p2 = RieszProjection::new(&spectra[i], doubled);
        let trace = p.trace()?.re;
        let err = op_norm_diff(&p, &p_ref, config.power_iterations, config.seed ^ i as u64)?;
        let q = op_norm_diff(&p, &p2, config.power_iterations, config.seed ^ (i as u64) << 16)?;
        Ok((trace, err.value, q.value, err.converged))
    });
    let mut errors = vec![];
    let mut q_worst = 0.0f64;
    for (m, r) in masses.iter().zip(results) {
        let (trace, err, q, converged) = r?;
        ranks.push(trace.round() as i64);
        errors.push(err);
        q_worst = q_worst.max(q);
        notes.push((format!("m={m:?}"), format!("trace {trace:?} Q-doubling change {q:?}{}", if converged { "" } else { " (norm is a lower bound)" })));
    }
    let q_ref = op_norm_diff(&p_ref, &RieszProjection::new(ref_spectrum, doubled), config.power_iterations, config.seed)?.value;
    q_worst = q_worst.max(q_ref);
    let target = oracle.len() as i64;
    let threshold = (0..masses.len()).find(|&i| ranks[i..].iter().all(|&r| r == target));
    notes.push(("rank threshold".into(), threshold.map_or("none".to_string(), |i| format!("{:?}", masses[i]))));
    notes.push(("max Q-doubling change".into(), format!("{q_worst:?}")));
    if ranks.last() != Some(&target) {
        failures.push(format!("rank {} at the largest mass differs from the oracle count {target}", ranks.last().copied().unwrap_or(-1)));
    }
    if q_worst > Q_DOUBLING_LIMIT {
        failures.push(format!("Q-doubling changes a projection by {q_worst:e} > {Q_DOUBLING_LIMIT:e}"));
    }
    Ok(ConvergenceReport::build(config, &masses, &errors, 1.0 / reference.sqrt(), notes, failures))
}

/// Window eigenvalues of H_m + V against those of H_{M_ref} + V on the same
/// grid (no closed form exists with a potential).
pub fn run_potential_convergence(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let window = config.spectral_window()?;
    let grid = config.grid()?;
    let domain = config.domain.to_spec();
    let potential = config.potential.to_spec();
    let masses = config.mass.masses();
    let reference = config.mass.reference();
    let mut all = masses.clone();
    all.push(reference);
    let specs = all.iter().map(|&m| OperatorSpec::new(grid.clone(), domain.clone(), m, potential)).collect::<Result<Vec<_>>>()?;
    let mut pairs = window_pairs_for(specs.clone(), &window, config)?;
    let ref_pairs = pairs.pop().expect("reference present");
    let ref_values: Vec<f64> = ref_pairs.iter().map(|x| x.0).collect();
    let mut notes = vec![
        ("reference mass".to_string(), format!("{reference:?}")),
        ("reference eigenvalues".into(), fmt_list(&ref_values)),
        ("potential sup".into(), format!("{:?}", specs[0].potential_sup_complement())),
    ];
    let mut errors = vec![];
    let mut failures = vec![];
    for (i, p) in pairs.iter().enumerate() {
        let computed: Vec<f64> = p.iter().map(|x| x.0).collect();
        let pairing = pair_nearest(&computed, &ref_values);
        errors.push(if pairing.pairs.is_empty() { f64::NAN } else { pairing.max_error(&computed, &ref_values) });
        let extra: Pairs = pairing.unpaired_computed.iter().map(|&k| p[k].clone()).collect();
        let gap = gap_from_pairs(&specs[i], &window, &extra);
        notes.push((format!("m={:?}", masses[i]), format!("eigenvalues [{}] spurious {}", fmt_list(&computed), gap.spurious_count())));
        if i + 1 == masses.len() && gap.spurious_count() > 0 {
            failures.push(format!("{} spurious window states at m={:?}", gap.spurious_count(), masses[i]));
        }
    }
    Ok(ConvergenceReport::build(config, &masses, &errors, 1.0 / reference.sqrt(), notes, failures))
}

/// Ω^c-localized window eigenvalues across the mass schedule; passes when
/// none remain at the two largest masses.
pub fn run_gap_scan(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let window = config.spectral_window()?;
    let grid = config.grid()?;
    let domain = config.domain.to_spec();
    let masses = config.mass.masses();
    let specs = masses.iter().map(|&m| OperatorSpec::new(grid.clone(), domain.clone(), config.mass.sign * m, None)).collect::<Result<Vec<_>>>()?;
    let pairs = window_pairs_for(specs.clone(), &window, config)?;
    let mut rows = vec![];
    let mut notes = vec![];
    let mut failures = vec![];
    for (i, (spec, p)) in specs.iter().zip(&pairs).enumerate() {
        let gap = gap_from_pairs(spec, &window, p);
        rows.push(ErrorRow { m: masses[i], error: gap.max_complement_fraction(), included_in_fit: false });
        notes.push((format!("m={:?}", masses[i]), format!("{} window states, {} spurious", gap.states.len(), gap.spurious_count())));
        if i + 2 >= masses.len() {
            for s in gap.spurious() {
                failures.push(format!("Ω^c-localized state at m={:?}: E={:?}, exterior fraction {:.3}", masses[i], s.energy, s.complement_fraction));
            }
        }
    }
    Ok(ConvergenceReport::checked(config, rows, 0.0, notes, failures))
}

/// Smooth test spinors for the partial-integration identity.
fn polynomial_pair(center: [f64; 2], radius: f64) -> (TestSpinor, TestSpinor) {
    let mono = |re: f64, im: f64, px: u32, py: u32| Monomial { coefficient: C64::new(re, im), px, py };
    let off = [center[0] + 0.2 * radius, center[1] - 0.1 * radius];
    let phi = TestSpinor::PolyGaussian {
        center: off,
        width: Some(0.9 * radius),
        components: [vec![mono(1.0, 0.0, 0, 0), mono(0.3, -0.2, 1, 0), mono(0.0, 0.5, 1, 1)], vec![mono(-0.4, 0.1, 0, 1), mono(0.2, 0.2, 2, 0)]],
    };
    let psi = TestSpinor::PolyGaussian {
        center,
        width: Some(1.3 * radius),
        components: [vec![mono(0.5, 0.5, 0, 2), mono(-1.0, 0.0, 1, 0)], vec![mono(1.0, -0.3, 0, 0), mono(0.1, 0.4, 1, 1)]],
    };
    (phi, psi)
}

/// Residuals of the partial-integration and energy identities at one
/// quadrature order; the energy identity is evaluated on disk modes.
pub struct IdentityResiduals {
    pub order: usize,
    pub partial_integration: f64,
    pub energy: f64,
    /// Energy residual with the curvature sign flipped.
    pub sentinel: f64,
}

pub fn identity_residuals(domain: &DomainSpec, order: usize) -> Result<IdentityResiduals> {
    let DomainSpec::Disk { center, radius } = *domain else {
        return Err(Error::Geometry("the identity suite needs a disk".into()));
    };
    let (phi, psi) = polynomial_pair(center, radius);
    let partial_integration = partial_integration_residual(&phi, &psi, domain, order)?;
    let mut energy = 0.0f64;
    let mut sentinel = f64::INFINITY;
    for (n, index) in [(0, 0), (1, 0), (-2, 0), (0, 1)] {
        let mode = TestSpinor::disk_mode(n, center, radius, BoundaryCondition::Minus, index)?;
        energy = energy.max(energy_identity_terms(&mode, domain, order, 1.0)?.residual);
        sentinel = sentinel.min(energy_identity_terms(&mode, domain, order, -1.0)?.residual);
    }
    Ok(IdentityResiduals { order, partial_integration, energy, sentinel })
}

/// Identity residuals under order doubling up to `quadrature.order`, plus
/// the trace-inequality and a-priori probes as diagnostics.
pub fn run_identity_suite(config: &StudyConfig) -> Result<ConvergenceReport> {
    check_preconditions(config)?;
    let domain = config.domain.to_spec();
    let top = config.quadrature_order;
    let mut orders = vec![top];
    while orders[0] / 2 >= 8 {
        orders.insert(0, orders[0] / 2);
    }
    let res = orders.iter().map(|&q| identity_residuals(&domain, q)).collect::<Result<Vec<_>>>()?;
    let mut notes = vec![];
    let mut failures = vec![];
    let mut rows = vec![];
    for r in &res {
        rows.push(ErrorRow { m: r.order as f64, error: r.partial_integration.max(r.energy), included_in_fit: false });
        notes.push((format!("order {}", r.order), format!("partial integration {:e}, energy {:e}, sentinel {:e}", r.partial_integration, r.energy, r.sentinel)));
    }
    let last = res.last().expect("at least one order");
    if last.partial_integration > IDENTITY_LIMIT || last.energy > IDENTITY_LIMIT {
        failures.push(format!("residuals at order {} exceed {IDENTITY_LIMIT:e}", last.order));
    }
    for w in res.windows(2) {
        for (name, a, b) in [("partial integration", w[0].partial_integration, w[1].partial_integration), ("energy", w[0].energy, w[1].energy)] {
            if a > IDENTITY_FLOOR && b > a / 2.0 {
                failures.push(format!("{name} residual does not halve from order {} to {} ({a:e} → {b:e})", w[0].order, w[1].order));
            }
        }
    }
    if !(last.sentinel >= 10.0 * last.energy.max(1e-300)) {
        failures.push(format!("curvature-sign sentinel {:e} is not 10× the residual {:e}", last.sentinel, last.energy));
    }
    if let DomainSpec::Disk { radius, .. } = domain {
        for row in trace_inequality_probe(&domain, &[0.1, 0.5, 1.0], 64, config.seed)? {
            notes.push((format!("trace C_ε ε={:?}", row.epsilon), format!("{:?} (holdout {:?})", row.c_epsilon, row.holdout_fraction)));
        }
        let grid = Grid::new(31, (2.0 * radius).max(1.5 * radius + 0.5))?;
        let ap = apriori_bound_probe(&domain, &grid, 20.0, 0.0, 4, config.seed)?;
        notes.push(("a-priori empirical c (m=20, n=31)".into(), format!("{:?}", ap.c_empirical)));
    }
    Ok(ConvergenceReport::checked(config, rows, IDENTITY_FLOOR, notes, failures))
}
