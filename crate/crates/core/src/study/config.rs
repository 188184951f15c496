//! Flat `key = value` study configuration.
//!
//! Every key has a dotted section prefix (`grid.n`, `strip.mu0`, …).  Unknown
//! keys, duplicate keys and keys that do not apply to the selected study
//! kind are hard errors.  [`StudyConfig::to_text`] writes the canonical form,
//! which parses back to an equal configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::geometry::DomainSpec;
use crate::operators::radial::BoundaryCondition;
use crate::operators::{PotentialSpec, Profile};
use crate::resolvents::StripSpec;
use crate::spectra::{ContourSpec, SpectralWindow};
use crate::spinor::Grid;
use crate::{Error, Result};

/// The studies the runner knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StudyKind {
    EigenvalueConvergence,
    ResolventConvergence,
    ProjectionConvergence,
    PotentialConvergence,
    IdentitySuite,
    GapScan,
}

impl StudyKind {
    pub const ALL: [StudyKind; 6] = [
        StudyKind::EigenvalueConvergence,
        StudyKind::ResolventConvergence,
        StudyKind::ProjectionConvergence,
        StudyKind::PotentialConvergence,
        StudyKind::IdentitySuite,
        StudyKind::GapScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::EigenvalueConvergence => "eigenvalue-convergence",
            StudyKind::ResolventConvergence => "resolvent-convergence",
            StudyKind::ProjectionConvergence => "projection-convergence",
            StudyKind::PotentialConvergence => "potential-convergence",
            StudyKind::IdentitySuite => "identity-suite",
            StudyKind::GapScan => "gap-scan",
        }
    }

    /// Sections whose keys are meaningful for this kind (beyond `study`).
    pub fn sections(self) -> &'static [&'static str] {
        match self {
            StudyKind::EigenvalueConvergence => &["domain", "grid", "mass", "window", "floor", "solver"],
            StudyKind::ResolventConvergence => &["domain", "grid", "mass", "strip", "potential", "solver"],
            StudyKind::ProjectionConvergence => &["domain", "grid", "mass", "window", "contour", "solver"],
            StudyKind::PotentialConvergence => &["domain", "grid", "mass", "window", "potential", "solver"],
            StudyKind::IdentitySuite => &["domain", "quadrature"],
            StudyKind::GapScan => &["domain", "grid", "mass", "window", "solver"],
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown study kind '{s}'")))
    }
}

/// Ω as given in a configuration file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainConfig {
    Disk { center: [f64; 2], radius: f64 },
    Holes { radius: f64 },
    Empty,
    Plane,
}

impl DomainConfig {
    pub fn to_spec(&self) -> DomainSpec {
        match *self {
            DomainConfig::Disk { center, radius } => DomainSpec::Disk { center, radius },
            DomainConfig::Holes { radius } => DomainSpec::PeriodicHoles { radius },
            DomainConfig::Empty => DomainSpec::Empty,
            DomainConfig::Plane => DomainSpec::FullPlane,
        }
    }

    pub fn disk(&self) -> Option<([f64; 2], f64)> {
        match *self {
            DomainConfig::Disk { center, radius } => Some((center, radius)),
            _ => None,
        }
    }
}

/// Potential descriptor: `none`, or `scalar`/`sigma3` with a constant or
/// Gaussian profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PotentialConfig {
    None,
    Scalar(Profile),
    Sigma3(Profile),
}

impl PotentialConfig {
    pub fn to_spec(&self) -> Option<PotentialSpec> {
        match *self {
            PotentialConfig::None => None,
            PotentialConfig::Scalar(p) => Some(PotentialSpec::Scalar(p)),
            PotentialConfig::Sigma3(p) => Some(PotentialSpec::Sigma3(p)),
        }
    }
}

/// Geometric mass schedule m₀, m₀q, …, m₀q^{count−1}, multiplied by `sign`
/// (sign −1 runs H_{−m}, whose limit carries the P₊ condition).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassSchedule {
    pub m0: f64,
    pub factor: f64,
    pub count: usize,
    pub sign: f64,
    /// M_ref = ref_factor · max m.
    pub ref_factor: f64,
}

impl MassSchedule {
    /// The (positive) masses of the schedule.
    pub fn masses(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.m0 * self.factor.powi(i as i32)).collect()
    }

    pub fn max(&self) -> f64 {
        self.m0 * self.factor.powi(self.count as i32 - 1)
    }

    pub fn reference(&self) -> f64 {
        self.ref_factor * self.max()
    }

    /// Boundary condition of the m → ∞ limit for this sign.
    pub fn limit_condition(&self) -> BoundaryCondition {
        if self.sign > 0.0 {
            BoundaryCondition::Minus
        } else {
            BoundaryCondition::Plus
        }
    }
}

/// A parsed, validated study configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub id: String,
    pub seed: u64,
    pub slope_cap: f64,
    pub output: String,
    pub domain: DomainConfig,
    pub grid_n: usize,
    pub half_length: f64,
    pub mass: MassSchedule,
    pub window: (f64, f64),
    /// Minimal distance between window endpoints and oracle eigenvalues.
    pub window_margin: f64,
    pub strip: (f64, f64),
    pub contour_offset: f64,
    pub contour_order: usize,
    pub potential: PotentialConfig,
    /// Estimate the discretization floor on the 2n+1 grid.
    pub floor_refine: bool,
    pub quadrature_order: usize,
    pub workers: usize,
    pub dense_cap: usize,
    pub power_iterations: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            kind: StudyKind::EigenvalueConvergence,
            id: "eigenvalue-convergence".into(),
            seed: 1,
            slope_cap: -0.45,
            output: "out".into(),
            domain: DomainConfig::Disk { center: [0.0, 0.0], radius: 1.0 },
            grid_n: 127,
            half_length: 2.0,
            mass: MassSchedule { m0: 10.0, factor: 2.0, count: 5, sign: 1.0, ref_factor: 64.0 },
            window: (1.0, 2.2),
            window_margin: 0.05,
            strip: (1.0, 1.0),
            contour_offset: 0.05,
            contour_order: 32,
            potential: PotentialConfig::None,
            floor_refine: true,
            quadrature_order: 128,
            workers: 1,
            dense_cap: crate::operators::DEFAULT_DENSE_CAP,
            power_iterations: 300,
        }
    }
}

type Entries = BTreeMap<String, (usize, String)>;

fn take<T: FromStr>(entries: &mut Entries, key: &str) -> Result<Option<T>> {
    match entries.remove(key) {
        None => Ok(None),
        Some((line, raw)) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Config(format!("line {line}: cannot parse value '{raw}' of {key}"))),
    }
}

fn take_or<T: FromStr>(entries: &mut Entries, key: &str, default: T) -> Result<T> {
    Ok(take(entries, key)?.unwrap_or(default))
}

fn require<T: FromStr>(entries: &mut Entries, key: &str) -> Result<T> {
    take(entries, key)?.ok_or_else(|| Error::Config(format!("missing required key {key}")))
}

fn parse_bool(entries: &mut Entries, key: &str, default: bool) -> Result<bool> {
    match entries.remove(key) {
        None => Ok(default),
        Some((_, v)) if v == "true" => Ok(true),
        Some((_, v)) if v == "false" => Ok(false),
        Some((line, v)) => Err(Error::Config(format!("line {line}: {key} must be true or false, got '{v}'"))),
    }
}

fn parse_profile(entries: &mut Entries) -> Result<Profile> {
    let shape: String = take_or(entries, "potential.profile", "constant".to_string())?;
    let amplitude: f64 = require(entries, "potential.amplitude")?;
    match shape.as_str() {
        "constant" => Ok(Profile::Constant(amplitude)),
        "gaussian" => Ok(Profile::Gaussian { amplitude, width: require(entries, "potential.width")? }),
        other => Err(Error::Config(format!("unknown potential profile '{other}'"))),
    }
}

impl StudyConfig {
    /// Parses configuration text.  `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Entries::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !k.contains('.') || k.starts_with('.') || k.ends_with('.') {
                return Err(Error::Config(format!("line {}: key '{k}' lacks a section prefix", i + 1)));
            }
            if entries.insert(k.to_string(), (i + 1, v.to_string())).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {k}", i + 1)));
            }
        }
        let kind: StudyKind = require::<String>(&mut entries, "study.kind")?.parse()?;
        for (k, (line, _)) in &entries {
            let section = k.split('.').next().unwrap_or("");
            if section != "study" && !kind.sections().contains(&section) {
                return Err(Error::Config(format!("line {line}: key {k} does not apply to {kind} studies")));
            }
        }
        let d = StudyConfig::default();
        let mut c = StudyConfig { kind, id: kind.name().to_string(), ..d.clone() };
        c.id = take_or(&mut entries, "study.id", c.id)?;
        c.seed = take_or(&mut entries, "study.seed", d.seed)?;
        c.slope_cap = take_or(&mut entries, "study.slope_cap", d.slope_cap)?;
        c.output = take_or(&mut entries, "study.output", d.output)?;
        c.workers = take_or(&mut entries, "study.workers", d.workers)?;

        let shape: String = require(&mut entries, "domain.shape")?;
        c.domain = match shape.as_str() {
            "disk" => DomainConfig::Disk {
                center: [take_or(&mut entries, "domain.center_x", 0.0)?, take_or(&mut entries, "domain.center_y", 0.0)?],
                radius: require(&mut entries, "domain.radius")?,
            },
            "holes" => DomainConfig::Holes { radius: require(&mut entries, "domain.radius")? },
            "empty" => DomainConfig::Empty,
            "plane" => DomainConfig::Plane,
            other => return Err(Error::Config(format!("unknown domain shape '{other}'"))),
        };

        let needs = |s: &str| kind.sections().contains(&s);
        if needs("grid") {
            c.grid_n = require(&mut entries, "grid.n")?;
            c.half_length = require(&mut entries, "grid.half_length")?;
        }
        if needs("mass") {
            c.mass = MassSchedule {
                m0: require(&mut entries, "mass.m0")?,
                factor: take_or(&mut entries, "mass.factor", d.mass.factor)?,
                count: require(&mut entries, "mass.count")?,
                sign: take_or(&mut entries, "mass.sign", d.mass.sign)?,
                ref_factor: take_or(&mut entries, "mass.ref_factor", d.mass.ref_factor)?,
            };
        }
        if needs("window") {
            c.window = (require(&mut entries, "window.a")?, require(&mut entries, "window.b")?);
            c.window_margin = take_or(&mut entries, "window.margin", d.window_margin)?;
        }
        if needs("strip") {
            c.strip = (require(&mut entries, "strip.mu0")?, require(&mut entries, "strip.rho")?);
        }
        if needs("contour") {
            c.contour_offset = require(&mut entries, "contour.nu")?;
            c.contour_order = require(&mut entries, "contour.q")?;
        }
        if needs("potential") {
            let pk: String = take_or(&mut entries, "potential.kind", "none".to_string())?;
            c.potential = match pk.as_str() {
                "none" => PotentialConfig::None,
                "scalar" => PotentialConfig::Scalar(parse_profile(&mut entries)?),
                "sigma3" => PotentialConfig::Sigma3(parse_profile(&mut entries)?),
                other => return Err(Error::Config(format!("unknown potential kind '{other}'"))),
            };
        }
        if needs("floor") {
            c.floor_refine = parse_bool(&mut entries, "floor.refine", d.floor_refine)?;
        }
        if needs("quadrature") {
            c.quadrature_order = take_or(&mut entries, "quadrature.order", d.quadrature_order)?;
        }
        if needs("solver") {
            c.dense_cap = take_or(&mut entries, "solver.dense_cap", d.dense_cap)?;
            c.power_iterations = take_or(&mut entries, "solver.power_iterations", d.power_iterations)?;
        }
        if let Some((k, (line, _))) = entries.into_iter().next() {
            return Err(Error::Config(format!("line {line}: unknown key {k}")));
        }
        c.validate()?;
        Ok(c)
    }

    /// Precondition checks that do not need any spectral computation.
    pub fn validate(&self) -> Result<()> {
        let needs = |s: &str| self.kind.sections().contains(&s);
        if self.id.is_empty() || self.id.chars().any(|ch| ch.is_whitespace() || ch == '#') {
            return Err(Error::Config(format!("study.id '{}' must be non-empty without spaces or '#'", self.id)));
        }
        if !self.slope_cap.is_finite() {
            return Err(Error::Config("study.slope_cap must be finite".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("study.workers must be at least 1".into()));
        }
        if self.output.is_empty() || self.output.contains('#') {
            return Err(Error::Config("study.output must be a non-empty path without '#'".into()));
        }
        if needs("grid") {
            let grid = self.grid()?;
            self.domain.to_spec().validate(grid.half_length())?;
        }
        if needs("mass") {
            let m = &self.mass;
            if !(m.m0 > 0.0 && m.m0.is_finite()) || m.count == 0 {
                return Err(Error::Config("mass schedule needs m0 > 0 and count ≥ 1".into()));
            }
            if m.count > 1 && !(m.factor > 1.0 && m.factor.is_finite()) {
                return Err(Error::Config(format!("mass schedule must be strictly increasing (factor {} ≤ 1)", m.factor)));
            }
            if m.sign != 1.0 && m.sign != -1.0 {
                return Err(Error::Config(format!("mass.sign must be 1 or -1, got {}", m.sign)));
            }
            if !(m.ref_factor >= 16.0) {
                return Err(Error::Config(format!("mass.ref_factor must be at least 16, got {}", m.ref_factor)));
            }
        }
        if needs("window") {
            let w = self.spectral_window()?;
            if !(self.window_margin >= 0.0) {
                return Err(Error::Config("window.margin must be non-negative".into()));
            }
            // Inside the free-mass gap for every mass of the schedule.
            if needs("mass") && w.a.abs().max(w.b.abs()) >= self.mass.m0 {
                return Err(Error::Config(format!("window ({}, {}) is not inside the mass gap (−{m}, {m})", w.a, w.b, m = self.mass.m0)));
            }
        }
        if needs("strip") {
            StripSpec::new(self.strip.0, self.strip.1)?;
        }
        if needs("contour") {
            self.contour()?;
        }
        if needs("quadrature") && self.quadrature_order < 8 {
            return Err(Error::Config("quadrature.order must be at least 8".into()));
        }
        if matches!(self.kind, StudyKind::EigenvalueConvergence | StudyKind::ProjectionConvergence | StudyKind::IdentitySuite)
            && self.domain.disk().is_none()
        {
            return Err(Error::Config(format!("{} studies need a disk domain (closed-form oracle)", self.kind)));
        }
        if let PotentialConfig::Scalar(p) | PotentialConfig::Sigma3(p) = self.potential {
            let ok = match p {
                Profile::Constant(a) => a.is_finite(),
                Profile::Gaussian { amplitude, width } => amplitude.is_finite() && width > 0.0,
            };
            if !ok {
                return Err(Error::Config("potential must be bounded (finite amplitude, positive width)".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n, self.half_length).map_err(|e| Error::Config(format!("grid: {e}")))
    }

    pub fn spectral_window(&self) -> Result<SpectralWindow> {
        SpectralWindow::new(self.window.0, self.window.1)
    }

    pub fn strip_spec(&self) -> Result<StripSpec> {
        StripSpec::new(self.strip.0, self.strip.1)
    }

    pub fn contour(&self) -> Result<ContourSpec> {
        ContourSpec::new(self.spectral_window()?, self.contour_offset, self.contour_order)
    }

    /// Canonical text: only the keys meaningful for the study kind, in a
    /// fixed order, floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = vec![
            format!("study.kind = {}", self.kind),
            format!("study.id = {}", self.id),
            format!("study.seed = {}", self.seed),
            format!("study.slope_cap = {:?}", self.slope_cap),
            format!("study.output = {}", self.output),
            format!("study.workers = {}", self.workers),
        ];
        match self.domain {
            DomainConfig::Disk { center, radius } => {
                out.push("domain.shape = disk".into());
                out.push(format!("domain.center_x = {:?}", center[0]));
                out.push(format!("domain.center_y = {:?}", center[1]));
                out.push(format!("domain.radius = {radius:?}"));
            }
            DomainConfig::Holes { radius } => {
                out.push("domain.shape = holes".into());
                out.push(format!("domain.radius = {radius:?}"));
            }
            DomainConfig::Empty => out.push("domain.shape = empty".into()),
            DomainConfig::Plane => out.push("domain.shape = plane".into()),
        }
        let needs = |s: &str| self.kind.sections().contains(&s);
        if needs("grid") {
            out.push(format!("grid.n = {}", self.grid_n));
            out.push(format!("grid.half_length = {:?}", self.half_length));
        }
        if needs("mass") {
            let m = &self.mass;
            out.push(format!("mass.m0 = {:?}", m.m0));
            out.push(format!("mass.factor = {:?}", m.factor));
            out.push(format!("mass.count = {}", m.count));
            out.push(format!("mass.sign = {:?}", m.sign));
            out.push(format!("mass.ref_factor = {:?}", m.ref_factor));
        }
        if needs("window") {
            out.push(format!("window.a = {:?}", self.window.0));
            out.push(format!("window.b = {:?}", self.window.1));
            out.push(format!("window.margin = {:?}", self.window_margin));
        }
        if needs("strip") {
            out.push(format!("strip.mu0 = {:?}", self.strip.0));
            out.push(format!("strip.rho = {:?}", self.strip.1));
        }
        if needs("contour") {
            out.push(format!("contour.nu = {:?}", self.contour_offset));
            out.push(format!("contour.q = {}", self.contour_order));
        }
        if needs("potential") {
            let (kind, profile) = match self.potential {
                PotentialConfig::None => ("none", None),
                PotentialConfig::Scalar(p) => ("scalar", Some(p)),
                PotentialConfig::Sigma3(p) => ("sigma3", Some(p)),
            };
            out.push(format!("potential.kind = {kind}"));
            match profile {
                None => {}
                Some(Profile::Constant(a)) => {
                    out.push("potential.profile = constant".into());
                    out.push(format!("potential.amplitude = {a:?}"));
                }
                Some(Profile::Gaussian { amplitude, width }) => {
                    out.push("potential.profile = gaussian".into());
                    out.push(format!("potential.amplitude = {amplitude:?}"));
                    out.push(format!("potential.width = {width:?}"));
                }
            }
        }
        if needs("floor") {
            out.push(format!("floor.refine = {}", self.floor_refine));
        }
        if needs("quadrature") {
            out.push(format!("quadrature.order = {}", self.quadrature_order));
        }
        if needs("solver") {
            out.push(format!("solver.dense_cap = {}", self.dense_cap));
            out.push(format!("solver.power_iterations = {}", self.power_iterations));
        }
        let mut s = out.join("\n");
        s.push('\n');
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STANDARD: &str = "\
study.kind = eigenvalue-convergence
domain.shape = disk   # unit disk
domain.radius = 1
grid.n = 127
grid.half_length = 2
mass.m0 = 10
mass.count = 5
window.a = 1.0
window.b = 2.2
";

    #[test]
    fn parses_standard_config_with_defaults() {
        let c = StudyConfig::parse(STANDARD).unwrap();
        assert_eq!(c.kind, StudyKind::EigenvalueConvergence);
        assert_eq!(c.mass.masses(), vec![10.0, 20.0, 40.0, 80.0, 160.0]);
        assert_eq!(c.mass.reference(), 10240.0);
        assert_eq!(c.slope_cap, -0.45);
        assert_eq!(c.id, "eigenvalue-convergence");
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = StudyConfig::parse(STANDARD).unwrap();
        let again = StudyConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn unknown_and_foreign_keys_are_errors() {
        assert!(StudyConfig::parse(&format!("{STANDARD}grid.nn = 3\n")).is_err());
        assert!(StudyConfig::parse(&format!("{STANDARD}strip.mu0 = 1\n")).is_err());
        assert!(StudyConfig::parse(&format!("{STANDARD}grid.n = 63\n")).is_err());
        assert!(StudyConfig::parse("study.kind = nonsense\n").is_err());
    }

    #[test]
    fn missing_strip_mu0_is_an_error() {
        let text = "study.kind = resolvent-convergence\ndomain.shape = disk\ndomain.radius = 1\ngrid.n = 63\ngrid.half_length = 2\nmass.m0 = 10\nmass.count = 5\nstrip.rho = 1\n";
        let err = StudyConfig::parse(text).unwrap_err();
        assert!(err.to_string().contains("strip.mu0"), "{err}");
    }

    #[test]
    fn schedule_must_increase_and_window_sit_in_gap() {
        assert!(StudyConfig::parse(&STANDARD.replace("mass.m0 = 10", "mass.m0 = 10\nmass.factor = 1")).is_err());
        assert!(StudyConfig::parse(&STANDARD.replace("mass.m0 = 10", "mass.m0 = 2")).is_err());
    }
}
