//! Exact spectrum of the infinite-mass disk.
//!
//! In channel n the eigenfunctions are (J_n(Er)e^{inθ}, i·J_{n+1}(Er)e^{i(n+1)θ})
//! and the boundary relation g(R) = s·f(R) becomes
//!
//! ```text
//! J_n(ER) = s·J_{n+1}(ER),     s = +1 for P₋, −1 for P₊.
//! ```
//!
//! Roots are bracketed on a step of at most π/(4R), refined by bisection and
//! cross-checked against the radial finite-volume solver.

use std::ops::RangeInclusive;

use super::SpectralWindow;
use crate::operators::bessel::{bessel_j_int, bessel_j_int_scaled};
use crate::operators::radial::{BoundaryCondition, RadialChannel};
use crate::{Error, Result};

/// Largest supported |n|.
pub const MAX_CHANNEL: i32 = 40;

/// Radial resolution of the cross-check.
pub const CROSS_CHECK_POINTS: usize = 512;

/// An eigenvalue of the disk with its angular channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEigenvalue {
    pub energy: f64,
    pub channel: i32,
}

/// Order of vanishing of the channel function at E = 0, removed so that
/// the trivial root does not appear.
fn vanishing_order(n: i32) -> u32 {
    n.unsigned_abs().min((n + 1).unsigned_abs())
}

/// (J_n(x) − s·J_{n+1}(x)) / x^p with p the common order of vanishing.
pub fn channel_function(n: i32, x: f64, bc: BoundaryCondition) -> Result<f64> {
    let p = vanishing_order(n);
    Ok(bessel_j_int_scaled(n, x, p)? - bc.sign() * bessel_j_int_scaled(n + 1, x, p)?)
}

/// Unscaled residual J_n(ER) − s·J_{n+1}(ER).
pub fn channel_residual(n: i32, energy: f64, radius: f64, bc: BoundaryCondition) -> Result<f64> {
    let x = energy * radius;
    Ok(bessel_j_int(n, x)? - bc.sign() * bessel_j_int(n + 1, x)?)
}

/// Roots of the channel condition with a < E < b, ascending, without the
/// radial cross-check.
pub fn channel_roots(n: i32, radius: f64, window: &SpectralWindow, bc: BoundaryCondition) -> Result<Vec<f64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Oracle(format!("disk radius must be positive, got {radius}")));
    }
    let step_max = std::f64::consts::PI / (4.0 * radius);
    let span = window.b - window.a;
    let steps = (span / step_max).ceil().max(1.0) as usize;
    let step = span / steps as f64;
    let f = |e: f64| channel_function(n, e * radius, bc);
    let mut roots = vec![];
    let mut e0 = window.a;
    let mut f0 = f(e0)?;
    for i in 1..=steps {
        let e1 = if i == steps { window.b } else { window.a + i as f64 * step };
        let f1 = f(e1)?;
        if f0 == 0.0 {
            if e0 > window.a {
                roots.push(e0);
            }
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, e0, e1, f0)?);
        }
        e0 = e1;
        f0 = f1;
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Radial-solver tolerance used by the cross-check: the scheme is second
/// order with an error constant growing like (ER)².
pub fn cross_check_tolerance(energy: f64, radius: f64, points: usize) -> f64 {
    let x = energy * radius;
    (1.0 + x * x) / (radius * (points * points) as f64)
}

/// Eigenvalues of the infinite-mass disk of radius `radius` in `window`
/// for every channel in `channels`, sorted by energy (ties by channel).
///
/// Each channel's roots are compared with the radial solver at
/// [`CROSS_CHECK_POINTS`]: the counts must agree and every root must have a
/// radial partner within [`cross_check_tolerance`].
pub fn disk_oracle_eigs(radius: f64, channels: RangeInclusive<i32>, window: &SpectralWindow, bc: BoundaryCondition) -> Result<Vec<OracleEigenvalue>> {
    if channels.start().abs() > MAX_CHANNEL || channels.end().abs() > MAX_CHANNEL {
        return Err(Error::Oracle(format!("channels must satisfy |n| ≤ {MAX_CHANNEL}")));
    }
    let mut out = vec![];
    for n in channels {
        let roots = channel_roots(n, radius, window, bc)?;
        cross_check(n, radius, window, bc, &roots)?;
        out.extend(roots.into_iter().map(|energy| OracleEigenvalue { energy, channel: n }));
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.channel.cmp(&b.channel)));
    Ok(out)
}

fn cross_check(n: i32, radius: f64, window: &SpectralWindow, bc: BoundaryCondition, roots: &[f64]) -> Result<()> {
    let ch = RadialChannel::new(n, radius, CROSS_CHECK_POINTS, bc)?;
    let edge = cross_check_tolerance(window.a.abs().max(window.b.abs()), radius, CROSS_CHECK_POINTS);
    let outer = ch.eigenvalues_in(window.a - edge, window.b + edge)?;
    let inner = outer.iter().filter(|&&e| e > window.a + edge && e < window.b - edge).count();
    if roots.len() < inner || roots.len() > outer.len() {
        return Err(Error::Oracle(format!(
            "channel {n}: {} bracketed roots but the radial solver finds between {inner} and {} eigenvalues",
            roots.len(),
            outer.len()
        )));
    }
    for &e in roots {
        let tol = cross_check_tolerance(e, radius, CROSS_CHECK_POINTS);
        let nearest = outer.iter().map(|r| (r - e).abs()).fold(f64::INFINITY, f64::min);
        if nearest > tol {
            return Err(Error::Oracle(format!("channel {n}: root {e} has no radial partner within {tol:e} (nearest {nearest:e})")));
        }
    }
    Ok(())
}

/// Nearest-neighbour pairing of computed eigenvalues with oracle values.
#[derive(Clone, Debug, PartialEq)]
pub struct Pairing {
    /// (computed index, oracle index).
    pub pairs: Vec<(usize, usize)>,
    /// Computed eigenvalues without a partner.
    pub unpaired_computed: Vec<usize>,
    /// Oracle eigenvalues without a partner.
    pub unpaired_oracle: Vec<usize>,
}

impl Pairing {
    pub fn max_error(&self, computed: &[f64], oracle: &[f64]) -> f64 {
        self.pairs.iter().map(|&(i, j)| (computed[i] - oracle[j]).abs()).fold(0.0, f64::max)
    }
}

/// Pairs each oracle value with the nearest computed value, closest pairs
/// first, so that every value is used at most once.
pub fn pair_nearest(computed: &[f64], oracle: &[f64]) -> Pairing {
    let mut cand: Vec<(f64, usize, usize)> = vec![];
    for (i, c) in computed.iter().enumerate() {
        for (j, o) in oracle.iter().enumerate() {
            cand.push(((c - o).abs(), i, j));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_c = vec![false; computed.len()];
    let mut used_o = vec![false; oracle.len()];
    let mut pairs = vec![];
    for (_, i, j) in cand {
        if !used_c[i] && !used_o[j] {
            used_c[i] = true;
            used_o[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort();
    Pairing {
        pairs,
        unpaired_computed: (0..computed.len()).filter(|&i| !used_c[i]).collect(),
        unpaired_oracle: (0..oracle.len()).filter(|&j| !used_o[j]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64, b: f64) -> SpectralWindow {
        SpectralWindow::new(a, b).unwrap()
    }

    #[test]
    fn first_root_channel_zero() {
        let r = channel_roots(0, 1.0, &w(0.5, 2.0), BoundaryCondition::Minus).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.434695650819565).abs() < 1e-11);
        assert!(channel_residual(0, r[0], 1.0, BoundaryCondition::Minus).unwrap().abs() < 1e-10);
    }

    #[test]
    fn no_trivial_root_at_zero() {
        for n in -4..=4 {
            let r = channel_roots(n, 1.0, &w(-0.5, 0.5), BoundaryCondition::Minus).unwrap();
            assert!(r.is_empty(), "channel {n}: {r:?}");
        }
    }

    #[test]
    fn standard_window_holds_one_eigenvalue() {
        let ev = disk_oracle_eigs(1.0, -40..=40, &w(1.0, 2.2), BoundaryCondition::Minus).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].channel, 0);
    }

    #[test]
    fn pairing_is_unique() {
        let p = pair_nearest(&[1.0, 1.2, 3.0], &[1.05, 2.9]);
        assert_eq!(p.pairs, vec![(0, 0), (2, 1)]);
        assert_eq!(p.unpaired_computed, vec![1]);
    }
}
