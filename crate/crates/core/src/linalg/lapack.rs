//! Thin FFI wrappers over LAPACK/CBLAS (OpenBLAS).

use super::{CMatrix, LuFactor, RMatrix};
use crate::{Error, Result, C64};
use cblas_sys::{CblasColMajor, CblasNoTrans, CblasTrans};

fn dim_i32(n: usize) -> i32 {
    i32::try_from(n).expect("matrix dimension exceeds LAPACK integer range")
}

pub(super) fn zheevd(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.rows();
    let mut v = a.clone();
    let mut w = vec![0.0; n];
    if n == 0 {
        return Ok((w, v));
    }
    let nn = dim_i32(n);
    let mut info = 0;
    let mut wq = [C64::new(0.0, 0.0)];
    let mut rq = [0.0f64];
    let mut iq = [0i32];
    let query = -1;
    unsafe {
        lapack_sys::zheevd_(
            c"V".as_ptr(), c"L".as_ptr(), &nn, v.as_mut_slice().as_mut_ptr() as _, &nn, w.as_mut_ptr(),
            wq.as_mut_ptr() as _, &query, rq.as_mut_ptr(), &query, iq.as_mut_ptr(), &query, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    let (lwork, lrwork, liwork) = (wq[0].re as i32, rq[0] as i32, iq[0]);
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    let mut rwork = vec![0.0; lrwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::zheevd_(
            c"V".as_ptr(), c"L".as_ptr(), &nn, v.as_mut_slice().as_mut_ptr() as _, &nn, w.as_mut_ptr(),
            work.as_mut_ptr() as _, &lwork, rwork.as_mut_ptr(), &lrwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zheevd", info });
    }
    Ok((w, v))
}

pub(super) fn dsyevd(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let n = a.rows();
    let mut v = a.clone();
    let mut w = vec![0.0; n];
    if n == 0 {
        return Ok((w, v));
    }
    let nn = dim_i32(n);
    let mut info = 0;
    let mut wq = [0.0f64];
    let mut iq = [0i32];
    let query = -1;
    unsafe {
        lapack_sys::dsyevd_(
            c"V".as_ptr(), c"L".as_ptr(), &nn, v.as_mut_slice().as_mut_ptr(), &nn, w.as_mut_ptr(),
            wq.as_mut_ptr(), &query, iq.as_mut_ptr(), &query, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    let (lwork, liwork) = (wq[0] as i32, iq[0]);
    let mut work = vec![0.0; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        lapack_sys::dsyevd_(
            c"V".as_ptr(), c"L".as_ptr(), &nn, v.as_mut_slice().as_mut_ptr(), &nn, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    Ok((w, v))
}

pub(super) fn zgetrf(mut a: CMatrix) -> Result<LuFactor> {
    let n = a.rows();
    let nn = dim_i32(n);
    let mut pivots = vec![0i32; n];
    let mut info = 0;
    if n > 0 {
        unsafe {
            lapack_sys::zgetrf_(&nn, &nn, a.as_mut_slice().as_mut_ptr() as _, &nn, pivots.as_mut_ptr(), &mut info);
        }
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgetrf", info });
    }
    Ok(LuFactor { lu: a, pivots })
}

pub(super) fn zgetrs(lu: &CMatrix, pivots: &[i32], b: &mut [C64]) -> Result<()> {
    let nn = dim_i32(lu.rows());
    if nn == 0 {
        return Ok(());
    }
    let nrhs = 1;
    let mut info = 0;
    unsafe {
        lapack_sys::zgetrs_(
            c"N".as_ptr(), &nn, &nrhs, lu.as_slice().as_ptr() as _, &nn, pivots.as_ptr(),
            b.as_mut_ptr() as _, &nn, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgetrs", info });
    }
    Ok(())
}

pub(super) fn zgemm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.rows(), b.cols());
    if c.as_slice().is_empty() || a.cols() == 0 {
        return c;
    }
    let one = [1.0f64, 0.0];
    let zero = [0.0f64, 0.0];
    unsafe {
        cblas_sys::cblas_zgemm(
            CblasColMajor, CblasNoTrans, CblasNoTrans,
            dim_i32(a.rows()), dim_i32(b.cols()), dim_i32(a.cols()),
            &one, a.as_slice().as_ptr() as _, dim_i32(a.rows()),
            b.as_slice().as_ptr() as _, dim_i32(b.rows()),
            &zero, c.as_mut_slice().as_mut_ptr() as _, dim_i32(a.rows()),
        );
    }
    c
}

pub(super) fn dgemm(a: &RMatrix, b: &RMatrix) -> RMatrix {
    let mut c = RMatrix::zeros(a.rows(), b.cols());
    if c.as_slice().is_empty() || a.cols() == 0 {
        return c;
    }
    unsafe {
        cblas_sys::cblas_dgemm(
            CblasColMajor, CblasNoTrans, CblasNoTrans,
            dim_i32(a.rows()), dim_i32(b.cols()), dim_i32(a.cols()),
            1.0, a.as_slice().as_ptr(), dim_i32(a.rows()),
            b.as_slice().as_ptr(), dim_i32(b.rows()),
            0.0, c.as_mut_slice().as_mut_ptr(), dim_i32(a.rows()),
        );
    }
    c
}

pub(super) fn dgemv(a: &RMatrix, x: &[f64], transpose: bool) -> Vec<f64> {
    let out_len = if transpose { a.cols() } else { a.rows() };
    let mut y = vec![0.0; out_len];
    if out_len == 0 || x.is_empty() {
        return y;
    }
    unsafe {
        cblas_sys::cblas_dgemv(
            CblasColMajor, if transpose { CblasTrans } else { CblasNoTrans },
            dim_i32(a.rows()), dim_i32(a.cols()), 1.0, a.as_slice().as_ptr(), dim_i32(a.rows()),
            x.as_ptr(), 1, 0.0, y.as_mut_ptr(), 1,
        );
    }
    y
}
