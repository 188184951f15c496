//! Cyclic Jacobi eigensolvers for small dense Hermitian and real symmetric
//! matrices.  Used for the projected problems inside the Krylov solver and
//! as the backend-free fallback.

use super::{CMatrix, RMatrix};
use crate::C64;

const MAX_SWEEPS: usize = 100;

/// Eigen decomposition of a Hermitian matrix by complex cyclic Jacobi.
/// Returns ascending eigenvalues and the eigenvectors as columns.
pub fn jacobi_eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for j in 0..n {
            for i in 0..j {
                off += a.get(i, j).norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let zeta = (a.get(q, q).re - a.get(p, p).re) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = D R with D = diag(1, conj(phase)), R = [[c, s], [-s, c]].
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = phase.conj() * (-s);
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let (xp, xq) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, xp * gpp + xq * gqp);
                    a.set(k, q, xp * gpq + xq * gqq);
                }
                for k in 0..n {
                    let (xp, xq) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, gpp.conj() * xp + gqp.conj() * xq);
                    a.set(q, k, gpq.conj() * xp + gqq.conj() * xq);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                for k in 0..n {
                    let (xp, xq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, xp * gpp + xq * gqp);
                    v.set(k, q, xp * gpq + xq * gqq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let w = order.iter().map(|&i| a.get(i, i).re).collect();
    let vs = CMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    (w, vs)
}

/// Real symmetric variant of [`jacobi_eigh`].
pub fn jacobi_eigh_real(a: &RMatrix) -> (Vec<f64>, RMatrix) {
    let c = CMatrix::from_fn(a.rows(), a.cols(), |i, j| C64::new(a.get(i, j), 0.0));
    let (w, v) = jacobi_eigh(&c);
    // With real input every rotation is real, so the vectors are real.
    (w, RMatrix::from_fn(v.rows(), v.cols(), |i, j| v.get(i, j).re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_sorted() {
        let a = CMatrix::from_fn(4, 4, |i, j| if i == j { C64::new([3.0, -1.0, 2.0, 0.5][i], 0.0) } else { C64::new(0.0, 0.0) });
        let (w, _) = jacobi_eigh(&a);
        assert_eq!(w, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_eigenvalues() {
        let a = CMatrix::from_col_major(2, 2, vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0)]);
        let (w, v) = jacobi_eigh(&a);
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
        let av = a.matvec(v.col(1));
        for (x, y) in av.iter().zip(v.col(1)) {
            assert!((x - y).norm() < 1e-14);
        }
    }
}
