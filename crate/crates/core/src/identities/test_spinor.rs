use crate::operators::bessel::bessel_j_int;
use crate::operators::radial::BoundaryCondition;
use crate::spectra::oracle::channel_roots;
use crate::spectra::SpectralWindow;
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// coefficient · (x − x₀)^px · (y − y₀)^py.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: C64,
    pub px: u32,
    pub py: u32,
}

/// A closed-form spinor with exact first derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum TestSpinor {
    Constant([C64; 2]),
    /// Polynomial components times exp(−|x − x₀|²/w²) (no envelope when
    /// `width` is `None`).
    PolyGaussian { center: [f64; 2], width: Option<f64>, components: [Vec<Monomial>; 2] },
    /// Disk eigenfunction (J_n(Er)e^{inθ}, i·J_{n+1}(Er)e^{i(n+1)θ}) around
    /// `center`, with T φ = E φ inside the disk.
    BesselMode { center: [f64; 2], n: i32, energy: f64 },
}

impl TestSpinor {
    /// The `index`-th positive eigenfunction of channel `n` on the disk,
    /// at the exact root of the channel condition for `bc`.
    pub fn disk_mode(n: i32, center: [f64; 2], radius: f64, bc: BoundaryCondition, index: usize) -> Result<Self> {
        let top = (index as f64 + n.abs() as f64 + 4.0) * std::f64::consts::PI / radius;
        let roots = channel_roots(n, radius, &SpectralWindow::new(1e-9, top)?, bc)?;
        let energy = *roots.get(index).ok_or_else(|| Error::Oracle(format!("channel {n} has no root number {index} below {top}")))?;
        Ok(TestSpinor::BesselMode { center, n, energy })
    }

    /// Value at `x`.
    pub fn value(&self, x: [f64; 2]) -> [C64; 2] {
        match self {
            TestSpinor::Constant(v) => *v,
            TestSpinor::PolyGaussian { center, width, components } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let env = envelope(*width, dx, dy);
                [poly(&components[0], dx, dy) * env, poly(&components[1], dx, dy) * env]
            }
            TestSpinor::BesselMode { center, n, energy } => {
                let (r, th) = polar(x, *center);
                let f = bessel_j_int(*n, energy * r).unwrap_or(f64::NAN);
                let g = bessel_j_int(n + 1, energy * r).unwrap_or(f64::NAN);
                [C64::from_polar(f, *n as f64 * th), I * C64::from_polar(g, (n + 1) as f64 * th)]
            }
        }
    }

    /// Gradient: `[∂₁φ, ∂₂φ]`, each a spinor.
    pub fn gradient(&self, x: [f64; 2]) -> [[C64; 2]; 2] {
        match self {
            TestSpinor::Constant(_) => [[ZERO; 2]; 2],
            TestSpinor::PolyGaussian { center, width, components } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let env = envelope(*width, dx, dy);
                let (ex, ey) = match width {
                    Some(w) => (-2.0 * dx / (w * w), -2.0 * dy / (w * w)),
                    None => (0.0, 0.0),
                };
                let mut out = [[ZERO; 2]; 2];
                for c in 0..2 {
                    let p = poly(&components[c], dx, dy);
                    let (px, py) = poly_grad(&components[c], dx, dy);
                    out[0][c] = (px + p * ex) * env;
                    out[1][c] = (py + p * ey) * env;
                }
                out
            }
            TestSpinor::BesselMode { center, n, energy } => {
                let (r, th) = polar(x, *center);
                let (sn, cs) = th.sin_cos();
                let e = *energy;
                let j = |k: i32| bessel_j_int(k, e * r).unwrap_or(f64::NAN);
                // Component c = a(r)·e^{iνθ}; ∂₁ = cos θ ∂_r − sin θ/r ∂_θ, ∂₂ = sin θ ∂_r + cos θ/r ∂_θ.
                let parts = [(*n, C64::new(1.0, 0.0)), (n + 1, I)];
                let mut out = [[ZERO; 2]; 2];
                for (c, &(nu, pre)) in parts.iter().enumerate() {
                    let a = j(nu);
                    let da = 0.5 * e * (j(nu - 1) - j(nu + 1));
                    let phase = C64::from_polar(1.0, nu as f64 * th);
                    // a/r·iν, written via the recurrence to stay finite at r = 0.
                    let a_over_r = 0.5 * e * (j(nu - 1) + j(nu + 1)) / nu.max(1) as f64;
                    let a_over_r = if nu == 0 { 0.0 } else if r > 1e-8 { a / r } else { a_over_r };
                    let dth = I * nu as f64 * a_over_r;
                    out[0][c] = pre * phase * (cs * da - sn * dth);
                    out[1][c] = pre * phase * (sn * da + cs * dth);
                }
                out
            }
        }
    }

    /// T φ = −i(σ₁∂₁ + σ₂∂₂)φ.
    pub fn dirac(&self, x: [f64; 2]) -> [C64; 2] {
        let g = self.gradient(x);
        [-I * g[0][1] - g[1][1], -I * g[0][0] + g[1][0]]
    }

    /// Largest deviation between the closed-form gradient and central
    /// differences with step `eps` at the given points.
    pub fn gradient_defect(&self, points: &[[f64; 2]], eps: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in points {
            let g = self.gradient(x);
            for d in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[d] += eps;
                xm[d] -= eps;
                let (vp, vm) = (self.value(xp), self.value(xm));
                for c in 0..2 {
                    let fd = (vp[c] - vm[c]) / (2.0 * eps);
                    worst = worst.max((fd - g[d][c]).norm());
                }
            }
        }
        worst
    }

    /// Multiplies the spinor by a constant.
    pub fn scaled(&self, s: C64) -> TestSpinor {
        match self {
            TestSpinor::Constant(v) => TestSpinor::Constant([v[0] * s, v[1] * s]),
            TestSpinor::PolyGaussian { center, width, components } => TestSpinor::PolyGaussian {
                center: *center,
                width: *width,
                components: components.clone().map(|c| c.into_iter().map(|m| Monomial { coefficient: m.coefficient * s, ..m }).collect()),
            },
            TestSpinor::BesselMode { .. } => panic!("Bessel modes are kept unnormalized"),
        }
    }
}

fn polar(x: [f64; 2], c: [f64; 2]) -> (f64, f64) {
    let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
    (dx.hypot(dy), dy.atan2(dx))
}

fn envelope(width: Option<f64>, dx: f64, dy: f64) -> f64 {
    match width {
        Some(w) => (-(dx * dx + dy * dy) / (w * w)).exp(),
        None => 1.0,
    }
}

fn poly(ms: &[Monomial], dx: f64, dy: f64) -> C64 {
    ms.iter().map(|m| m.coefficient * dx.powi(m.px as i32) * dy.powi(m.py as i32)).sum()
}

fn poly_grad(ms: &[Monomial], dx: f64, dy: f64) -> (C64, C64) {
    let mut gx = ZERO;
    let mut gy = ZERO;
    for m in ms {
        if m.px > 0 {
            gx += m.coefficient * m.px as f64 * dx.powi(m.px as i32 - 1) * dy.powi(m.py as i32);
        }
        if m.py > 0 {
            gy += m.coefficient * m.py as f64 * dx.powi(m.px as i32) * dy.powi(m.py as i32 - 1);
        }
    }
    (gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_points() -> Vec<[f64; 2]> {
        (0..20).map(|i| [0.7 * (i as f64 * 0.9).cos() * (0.2 + 0.04 * i as f64), 0.6 * (i as f64 * 1.7).sin()]).collect()
    }

    #[test]
    fn analytic_gradients_match_differences() {
        let pg = TestSpinor::PolyGaussian {
            center: [0.1, -0.2],
            width: Some(0.6),
            components: [
                vec![Monomial { coefficient: C64::new(1.0, 0.5), px: 2, py: 1 }, Monomial { coefficient: C64::new(-0.3, 0.0), px: 0, py: 0 }],
                vec![Monomial { coefficient: C64::new(0.0, 2.0), px: 1, py: 3 }],
            ],
        };
        assert!(pg.gradient_defect(&sample_points(), 1e-5) < 1e-6);
        for n in [-2, -1, 0, 1, 3] {
            let b = TestSpinor::disk_mode(n, [0.0, 0.0], 1.0, BoundaryCondition::Minus, 0).unwrap();
            assert!(b.gradient_defect(&sample_points(), 1e-5) < 1e-6, "channel {n}");
        }
    }

    #[test]
    fn bessel_mode_is_an_eigenfunction() {
        let b = TestSpinor::disk_mode(1, [0.0, 0.0], 1.0, BoundaryCondition::Minus, 0).unwrap();
        let TestSpinor::BesselMode { energy, .. } = b else { unreachable!() };
        for x in sample_points() {
            let (v, t) = (b.value(x), b.dirac(x));
            for c in 0..2 {
                assert!((t[c] - v[c] * energy).norm() < 1e-12);
            }
        }
    }
}
