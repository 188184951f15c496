use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1], ascending nodes.
pub fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    assert!(q >= 1, "quadrature order must be positive");
    let mut out = vec![(0.0, 0.0); q];
    let m = (q + 1) / 2;
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_q.
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[q - 1 - i] = (x, w);
    }
    if q % 2 == 1 {
        let (_, d) = legendre(q, 0.0);
        out[q / 2] = (0.0, 2.0 / (d * d));
    }
    out
}

/// P_q(x) and P_q'(x) by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Polar tensor rule on a disk: `order` Gauss–Legendre nodes in r (with
/// the Jacobian r folded into the weights) times 2·`order` equispaced
/// angles.
#[derive(Clone, Debug)]
pub struct DiskQuadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl DiskQuadrature {
    pub fn new(center: [f64; 2], radius: f64, order: usize) -> Self {
        let rule = gauss_legendre(order);
        let na = 2 * order;
        let dth = 2.0 * PI / na as f64;
        let mut points = Vec::with_capacity(order * na);
        let mut weights = Vec::with_capacity(order * na);
        for &(t, w) in &rule {
            let r = 0.5 * radius * (t + 1.0);
            let wr = 0.5 * radius * w * r * dth;
            for a in 0..na {
                let (s, c) = (a as f64 * dth).sin_cos();
                points.push([center[0] + r * c, center[1] + r * s]);
                weights.push(wr);
            }
        }
        Self { points, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for q in [1, 2, 5, 16, 64, 128] {
            let rule = gauss_legendre(q);
            let sum: f64 = rule.iter().map(|p| p.1).sum();
            assert!((sum - 2.0).abs() < 1e-13, "q={q}");
            let deg = 2 * q - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let val: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
            assert!((val - exact).abs() < 1e-13);
            let even = 2 * (q - 1);
            let val: f64 = rule.iter().map(|&(x, w)| w * x.powi(even as i32)).sum();
            assert!((val - 2.0 / (even as f64 + 1.0)).abs() < 1e-13, "q={q}");
        }
    }

    #[test]
    fn disk_area_and_moment() {
        let d = DiskQuadrature::new([0.5, -0.25], 2.0, 12);
        let area: f64 = d.weights.iter().sum();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        // ∫ |x − c|² = πR⁴/2.
        let m: f64 = d.iter().map(|(x, w)| w * ((x[0] - 0.5).powi(2) + (x[1] + 0.25).powi(2))).sum();
        assert!((m - 8.0 * PI).abs() < 1e-11);
    }
}
