use crate::linalg::{axpy, dot_conj, norm2, LinearMap};
use crate::{Result, C64};

/// Result of [`gmres`].
#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub solution: Vec<C64>,
    /// Explicit relative residual ‖(A − z)x − b‖/‖b‖ of `solution`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Restarted GMRES(`restart`) for (A − z)x = b with zero initial guess.
/// Convergence is declared on the explicitly recomputed residual.
pub fn gmres(op: &dyn LinearMap, z: C64, b: &[C64], tol: f64, max_iter: usize, restart: usize) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm2(b);
    let zero = C64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { solution: x, residual: 0.0, iterations: 0, converged: true });
    }
    let shifted = |v: &[C64]| -> Result<Vec<C64>> {
        let mut y = op.apply(v)?;
        axpy(-z, v, &mut y);
        Ok(y)
    };
    let mut iterations = 0;
    let mut residual;
    loop {
        let ax = shifted(&x)?;
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        residual = beta / bnorm;
        if residual <= tol || iterations >= max_iter {
            break;
        }
        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns after Givens rotations.
        let mut hcols: Vec<Vec<C64>> = vec![];
        let mut rotations: Vec<(f64, C64)> = vec![];
        let mut g = vec![C64::new(beta, 0.0)];
        for _ in 0..restart {
            iterations += 1;
            let mut w = shifted(basis.last().expect("non-empty basis"))?;
            let mut h = Vec::with_capacity(basis.len() + 1);
            for v in &basis {
                let c = dot_conj(v, &w);
                axpy(-c, v, &mut w);
                h.push(c);
            }
            // Second pass for stability.
            for (v, hc) in basis.iter().zip(h.iter_mut()) {
                let c = dot_conj(v, &w);
                axpy(-c, v, &mut w);
                *hc += c;
            }
            let hn = norm2(&w);
            h.push(C64::new(hn, 0.0));
            for (k, &(c, s)) in rotations.iter().enumerate() {
                let (a, bb) = (h[k], h[k + 1]);
                h[k] = a * c + s * bb;
                h[k + 1] = -s.conj() * a + bb * c;
            }
            let (a, bb) = (h[h.len() - 2], h[h.len() - 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 { (1.0, zero) } else if a.norm() == 0.0 { (0.0, C64::new(1.0, 0.0)) } else {
                let c = a.norm() / denom;
                (c, (a / a.norm()) * bb.conj() / denom)
            };
            let last = h.len() - 2;
            h[last] = a * c + s * bb;
            h[last + 1] = zero;
            let gk = g[last];
            g[last] = gk * c;
            g.push(-s.conj() * gk);
            rotations.push((c, s));
            h.pop();
            hcols.push(h);
            let est = g.last().expect("non-empty").norm() / bnorm;
            if hn == 0.0 || est <= 0.5 * tol || iterations >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // Back substitution on the triangular system.
        let k = hcols.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= hcols[j][i] * y[j];
            }
            y[i] = s / hcols[i][i];
        }
        for (v, yi) in basis.iter().zip(&y) {
            axpy(*yi, v, &mut x);
        }
    }
    Ok(GmresOutcome { solution: x, residual, iterations, converged: residual <= tol })
}
