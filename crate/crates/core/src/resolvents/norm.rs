use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{norm2, LinearMap};
use crate::spectra::ResolventSolver;
use crate::{Error, Result, C64};

/// Power-iteration estimate of a largest singular value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Relative change stayed below 1e−6 over the last five iterations.
    /// Without it the value is only a lower bound.
    pub converged: bool,
    pub iterations: usize,
}

/// A − B as a linear map.
pub struct Difference<'a> {
    pub a: &'a dyn LinearMap,
    pub b: &'a dyn LinearMap,
}

impl LinearMap for Difference<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = self.a.apply(x)?;
        for (yi, bi) in y.iter_mut().zip(self.b.apply(x)?) {
            *yi -= bi;
        }
        Ok(y)
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = self.a.apply_adjoint(x)?;
        for (yi, bi) in y.iter_mut().zip(self.b.apply_adjoint(x)?) {
            *yi -= bi;
        }
        Ok(y)
    }
}

/// (H − z)^{-1} of a self-adjoint H as a linear map; the adjoint is the
/// resolvent at z̄.
pub struct ResolventMap<'a> {
    pub solver: &'a dyn ResolventSolver,
    pub z: C64,
}

impl LinearMap for ResolventMap<'_> {
    fn dim(&self) -> usize {
        self.solver.dim()
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let z = self.z;
        match self.solver.apply_function(&|l| 1.0 / (C64::new(l, 0.0) - z), x) {
            Some(y) => Ok(y),
            None => self.solver.solve(z, x),
        }
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        let z = self.z.conj();
        match self.solver.apply_function(&|l| 1.0 / (C64::new(l, 0.0) - z), x) {
            Some(y) => Ok(y),
            None => self.solver.solve(z, x),
        }
    }
}

/// ‖A − B‖ by power iteration on (A − B)†(A − B) from a seeded random
/// start, at most `iterations` steps.
pub fn op_norm_diff(a: &dyn LinearMap, b: &dyn LinearMap, iterations: usize, seed: u64) -> Result<NormEstimate> {
    if a.dim() != b.dim() {
        return Err(Error::Operator(format!("operators act on spaces of dimension {} and {}", a.dim(), b.dim())));
    }
    let d = Difference { a, b };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<C64> = (0..a.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let n0 = norm2(&x);
    x.iter_mut().for_each(|v| *v /= n0);
    let mut value = 0.0f64;
    let mut calm = 0;
    for it in 1..=iterations {
        let y = d.apply(&x)?;
        let sigma = norm2(&y);
        if sigma == 0.0 {
            return Ok(NormEstimate { value: 0.0, converged: true, iterations: it });
        }
        let w = d.apply_adjoint(&y)?;
        let wn = norm2(&w);
        let change = (sigma - value).abs() / sigma;
        value = sigma;
        calm = if change < 1e-6 { calm + 1 } else { 0 };
        if calm >= 5 {
            return Ok(NormEstimate { value, converged: true, iterations: it });
        }
        if wn == 0.0 {
            return Ok(NormEstimate { value, converged: true, iterations: it });
        }
        x = w.into_iter().map(|v| v / wn).collect();
    }
    Ok(NormEstimate { value, converged: false, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    #[test]
    fn identical_and_rank_one() {
        let n = 12;
        let a = CMatrix::from_fn(n, n, |i, j| C64::new((i * j) as f64 * 0.01, i as f64 - j as f64));
        let est = op_norm_diff(&a, &a, 50, 1).unwrap();
        assert!(est.value <= 1e-12 && est.converged);
        let w: Vec<C64> = (0..n).map(|i| C64::new(1.0 + i as f64 * 0.1, -0.3)).collect();
        let b = CMatrix::from_fn(n, n, |i, j| a.get(i, j) + w[i] * w[j].conj());
        let est = op_norm_diff(&b, &a, 200, 1).unwrap();
        let w2: f64 = w.iter().map(|v| v.norm_sqr()).sum();
        assert!((est.value - w2).abs() < 1e-10 * w2);
    }
}
