//! Bessel functions of the first kind and integer order.
//!
//! Power series for small arguments, Miller's downward recurrence
//! normalized by J₀ + 2ΣJ₂ₖ = 1 otherwise.

use crate::{Error, Result};

/// Largest supported argument.
pub const MAX_ARGUMENT: f64 = 1e4;

const SERIES_LIMIT: f64 = 4.0;

/// J_n(x) for n ≥ 0 and 0 ≤ x ≤ 1e4.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::BesselRange { x });
    }
    Ok(jn_nonneg(n, x))
}

/// J_n(x) for any integer order and real argument with |x| ≤ 1e4, using
/// J₋ₙ = (−1)ⁿJₙ and Jₙ(−x) = (−1)ⁿJₙ(x).
pub fn bessel_j_int(n: i32, x: f64) -> Result<f64> {
    let order = n.unsigned_abs();
    let value = bessel_j(order, x.abs())?;
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * value)
}

/// J_n(x)/x^p for 0 ≤ p ≤ |n|, accurate near x = 0 where the quotient
/// has a finite limit.
pub fn bessel_j_int_scaled(n: i32, x: f64, p: u32) -> Result<f64> {
    let order = n.unsigned_abs();
    assert!(p <= order, "scaling power exceeds the order of vanishing");
    if x.abs() > MAX_ARGUMENT || !x.is_finite() {
        return Err(Error::BesselRange { x });
    }
    if x.abs() >= 1.0 {
        return Ok(bessel_j_int(n, x)? / x.powi(p as i32));
    }
    // Series in x with the first p powers removed; x may be negative.
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    let half = 0.5 * x;
    let mut t = 0.5f64.powi(p as i32) * half.powi((order - p) as i32);
    for k in 1..=order {
        t /= k as f64;
    }
    Ok(sign * series_sum(t, half, order))
}

fn series_sum(first: f64, half: f64, order: u32) -> f64 {
    let q = half * half;
    let mut t = first;
    let mut sum = t;
    let mut k = 0.0f64;
    loop {
        k += 1.0;
        t *= -q / (k * (k + order as f64));
        sum += t;
        if t.abs() <= 1e-17 * sum.abs() || t == 0.0 {
            break;
        }
    }
    sum
}

fn jn_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        let half = 0.5 * x;
        let mut t = 1.0;
        for k in 1..=n {
            t *= half / k as f64;
            if t == 0.0 {
                return 0.0;
            }
        }
        return series_sum(t, half, n);
    }
    miller(n, x)
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as u64;
    start += start % 2;
    let mut jp1 = 0.0f64;
    let mut j = 1e-30f64;
    let mut norm = 0.0f64;
    let mut result = 0.0f64;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        let order = k - 1;
        if order == n as u64 {
            result = j;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    norm += j;
    result / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn range_errors() {
        assert!(bessel_j(0, -1.0).is_err());
        assert!(bessel_j(0, 2e4).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
    }

    #[test]
    fn symmetries() {
        let a = bessel_j_int(3, 2.5).unwrap();
        assert_eq!(bessel_j_int(-3, 2.5).unwrap(), -a);
        assert_eq!(bessel_j_int(3, -2.5).unwrap(), -a);
        assert_eq!(bessel_j_int(-3, -2.5).unwrap(), a);
    }

    #[test]
    fn scaled_matches_quotient() {
        for &x in &[0.3, -0.7, 0.99, 1.5, -3.0] {
            let direct = bessel_j_int(-2, x).unwrap() / x;
            assert!((bessel_j_int_scaled(-2, x, 1).unwrap() - direct).abs() < 1e-14);
        }
        assert!((bessel_j_int_scaled(2, 0.0, 2).unwrap() - 0.125).abs() < 1e-16);
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for n in 0..6 {
            let a = jn_nonneg(n, SERIES_LIMIT);
            let b = miller(n, SERIES_LIMIT);
            assert!((a - b).abs() < 1e-13, "n={n}: {a} vs {b}");
        }
    }
}
