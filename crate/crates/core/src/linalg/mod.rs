//! Small dense linear-algebra layer.
//!
//! Matrices are stored column-major so that they can be handed to LAPACK
//! without copies.  With the `lapack` feature the heavy kernels (eigen
//! decompositions, LU, matrix products) go to the system OpenBLAS; without
//! it, pure-Rust fallbacks are used, which are adequate for the small
//! operators of the browser demo and for unit tests.

#[cfg(feature = "lapack")]
mod lapack;
mod jacobi;

pub use jacobi::{jacobi_eigh, jacobi_eigh_real};

use crate::{Error, Result, C64};

/// A linear map on ℂ^N given by its action (and that of its adjoint).
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>>;
    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>>;
}

impl LinearMap for CMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.rows, self.cols, "LinearMap needs a square matrix");
        self.rows
    }

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok(self.matvec(x))
    }

    fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok(self.adjoint_matvec(x))
    }
}

/// Dense complex matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Dense real matrix, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

macro_rules! dense_common {
    ($ty:ident, $scalar:ty, $zero:expr) => {
        impl $ty {
            pub fn zeros(rows: usize, cols: usize) -> Self {
                Self { rows, cols, data: vec![$zero; rows * cols] }
            }

            /// Builds a matrix from a column-major buffer.
            pub fn from_col_major(rows: usize, cols: usize, data: Vec<$scalar>) -> Self {
                assert_eq!(data.len(), rows * cols, "buffer length does not match shape");
                Self { rows, cols, data }
            }

            pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> $scalar) -> Self {
                let mut data = Vec::with_capacity(rows * cols);
                for j in 0..cols {
                    for i in 0..rows {
                        data.push(f(i, j));
                    }
                }
                Self { rows, cols, data }
            }

            #[inline]
            pub fn rows(&self) -> usize {
                self.rows
            }

            #[inline]
            pub fn cols(&self) -> usize {
                self.cols
            }

            #[inline]
            pub fn get(&self, i: usize, j: usize) -> $scalar {
                self.data[i + j * self.rows]
            }

            #[inline]
            pub fn set(&mut self, i: usize, j: usize, v: $scalar) {
                self.data[i + j * self.rows] = v;
            }

            #[inline]
            pub fn col(&self, j: usize) -> &[$scalar] {
                &self.data[j * self.rows..(j + 1) * self.rows]
            }

            #[inline]
            pub fn col_mut(&mut self, j: usize) -> &mut [$scalar] {
                let r = self.rows;
                &mut self.data[j * r..(j + 1) * r]
            }

            pub fn as_slice(&self) -> &[$scalar] {
                &self.data
            }

            pub fn as_mut_slice(&mut self) -> &mut [$scalar] {
                &mut self.data
            }

            pub fn into_vec(self) -> Vec<$scalar> {
                self.data
            }

            /// Keeps the first `k` columns.
            pub fn truncate_cols(&mut self, k: usize) {
                assert!(k <= self.cols);
                self.data.truncate(k * self.rows);
                self.cols = k;
            }
        }
    };
}

dense_common!(CMatrix, C64, C64::new(0.0, 0.0));
dense_common!(RMatrix, f64, 0.0);

impl CMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == C64::new(0.0, 0.0) {
                continue;
            }
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// `y = A† x`.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot_conj(self.col(j), x)).collect()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..=j {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        #[cfg(feature = "lapack")]
        {
            lapack::zgemm(self, other)
        }
        #[cfg(not(feature = "lapack"))]
        {
            let mut out = CMatrix::zeros(self.rows, other.cols);
            for j in 0..other.cols {
                for k in 0..self.cols {
                    let b = other.get(k, j);
                    let (a, c) = (self.col(k), out.col_mut(j));
                    for (ci, &ai) in c.iter_mut().zip(a) {
                        *ci += ai * b;
                    }
                }
            }
            out
        }
    }

    /// 1-norm bound on the spectral norm (max column sum), cheap and safe.
    pub fn norm_bound(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl RMatrix {
    /// `Y = A X` for a complex vector, using the real/imaginary split.
    pub fn mul_complex(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let yr = self.gemv(&re, false);
        let yi = self.gemv(&im, false);
        yr.into_iter().zip(yi).map(|(a, b)| C64::new(a, b)).collect()
    }

    /// `Y = Aᵀ X` for a complex vector.
    pub fn tmul_complex(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let yr = self.gemv(&re, true);
        let yi = self.gemv(&im, true);
        yr.into_iter().zip(yi).map(|(a, b)| C64::new(a, b)).collect()
    }

    /// Real matrix-vector product, optionally with the transpose.
    pub fn gemv(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        #[cfg(feature = "lapack")]
        {
            lapack::dgemv(self, x, transpose)
        }
        #[cfg(not(feature = "lapack"))]
        {
            if transpose {
                (0..self.cols).map(|j| self.col(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
            } else {
                let mut y = vec![0.0; self.rows];
                for (j, &xj) in x.iter().enumerate() {
                    for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                        *yi += a * xj;
                    }
                }
                y
            }
        }
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, other.rows);
        #[cfg(feature = "lapack")]
        {
            lapack::dgemm(self, other)
        }
        #[cfg(not(feature = "lapack"))]
        {
            let mut out = RMatrix::zeros(self.rows, other.cols);
            for j in 0..other.cols {
                for k in 0..self.cols {
                    let b = other.get(k, j);
                    let a = self.col(k).to_vec();
                    for (ci, ai) in out.col_mut(j).iter_mut().zip(a) {
                        *ci += ai * b;
                    }
                }
            }
            out
        }
    }

    pub fn symmetric_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..j {
                dev = dev.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        dev
    }
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Euclidean norm of a complex vector.
#[inline]
pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha x`.
#[inline]
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigen decomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn hermitian_eig(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if a.rows() != a.cols() {
        return Err(Error::Operator("eigen decomposition needs a square matrix".into()));
    }
    #[cfg(feature = "lapack")]
    {
        lapack::zheevd(a)
    }
    #[cfg(not(feature = "lapack"))]
    {
        Ok(jacobi_eigh(a))
    }
}

/// Eigen decomposition of a real symmetric matrix.
pub fn symmetric_eig(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    if a.rows() != a.cols() {
        return Err(Error::Operator("eigen decomposition needs a square matrix".into()));
    }
    #[cfg(feature = "lapack")]
    {
        lapack::dsyevd(a)
    }
    #[cfg(not(feature = "lapack"))]
    {
        Ok(jacobi_eigh_real(a))
    }
}

/// LU factorization with partial pivoting of a square complex matrix.
#[derive(Clone, Debug)]
pub struct LuFactor {
    lu: CMatrix,
    pivots: Vec<i32>,
}

impl LuFactor {
    pub fn new(a: CMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::Operator("LU needs a square matrix".into()));
        }
        #[cfg(feature = "lapack")]
        {
            lapack::zgetrf(a)
        }
        #[cfg(not(feature = "lapack"))]
        {
            Self::factor_fallback(a)
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<()> {
        assert_eq!(b.len(), self.dim());
        #[cfg(feature = "lapack")]
        {
            lapack::zgetrs(&self.lu, &self.pivots, b)
        }
        #[cfg(not(feature = "lapack"))]
        {
            let n = self.dim();
            for (i, &p) in self.pivots.iter().enumerate() {
                b.swap(i, p as usize);
            }
            for j in 0..n {
                let bj = b[j];
                for i in j + 1..n {
                    b[i] -= self.lu.get(i, j) * bj;
                }
            }
            for j in (0..n).rev() {
                b[j] /= self.lu.get(j, j);
                let bj = b[j];
                for i in 0..j {
                    b[i] -= self.lu.get(i, j) * bj;
                }
            }
            Ok(())
        }
    }

    #[cfg(not(feature = "lapack"))]
    fn factor_fallback(mut a: CMatrix) -> Result<Self> {
        let n = a.rows();
        let mut pivots = vec![0i32; n];
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a.get(i, k).norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return Err(Error::Lapack { routine: "lu", info: k as i32 + 1 });
            }
            pivots[k] = p as i32;
            if p != k {
                for j in 0..n {
                    let t = a.get(k, j);
                    a.set(k, j, a.get(p, j));
                    a.set(p, j, t);
                }
            }
            let d = a.get(k, k);
            for i in k + 1..n {
                let l = a.get(i, k) / d;
                a.set(i, k, l);
            }
            for j in k + 1..n {
                let akj = a.get(k, j);
                if akj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in k + 1..n {
                    let v = a.get(i, j) - a.get(i, k) * akj;
                    a.set(i, j, v);
                }
            }
        }
        Ok(Self { lu: a, pivots })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |i, j| {
            C64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i * 5 + j * 2) % 7) as f64 - 3.0)
        });
        let ah = a.adjoint();
        CMatrix::from_fn(n, n, |i, j| a.get(i, j) + ah.get(i, j))
    }

    #[test]
    fn hermitian_eig_reconstructs() {
        let a = test_matrix(12);
        let (w, v) = hermitian_eig(&a).unwrap();
        for (k, &lam) in w.iter().enumerate() {
            let av = a.matvec(v.col(k));
            let r: f64 = av.iter().zip(v.col(k)).map(|(x, y)| (x - y * lam).norm_sqr()).sum();
            assert!(r.sqrt() < 1e-10 * a.max_abs().max(1.0));
        }
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn jacobi_agrees_with_backend() {
        let a = test_matrix(9);
        let (w1, _) = hermitian_eig(&a).unwrap();
        let (w2, _) = jacobi_eigh(&a);
        for (x, y) in w1.iter().zip(&w2) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn lu_solves() {
        let n = 10;
        let a = CMatrix::from_fn(n, n, |i, j| C64::new(if i == j { 4.0 } else { 0.3 }, (i as f64 - j as f64) * 0.1));
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut b = a.matvec(&x);
        LuFactor::new(a).unwrap().solve_in_place(&mut b).unwrap();
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn real_products_match_naive() {
        let a = RMatrix::from_fn(5, 4, |i, j| (i * 4 + j) as f64 * 0.5 - 3.0);
        let x: Vec<C64> = (0..4).map(|i| C64::new(i as f64, -(i as f64))).collect();
        let y = a.mul_complex(&x);
        for i in 0..5 {
            let e: C64 = (0..4).map(|j| x[j] * a.get(i, j)).sum();
            assert!((y[i] - e).norm() < 1e-12);
        }
        let z: Vec<C64> = (0..5).map(|i| C64::new(1.0, i as f64)).collect();
        let yt = a.tmul_complex(&z);
        for j in 0..4 {
            let e: C64 = (0..5).map(|i| z[i] * a.get(i, j)).sum();
            assert!((yt[j] - e).norm() < 1e-12);
        }
    }
}
