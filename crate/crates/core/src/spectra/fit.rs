//! Least-squares fit of log(error) against log(m).

use crate::{Error, Result};

/// Outcome of [`fit_rate`].
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Indices of the input points used in the fit.
    pub used: Vec<usize>,
    /// Indices excluded because their error was not positive and finite.
    pub excluded: Vec<usize>,
}

/// Fits log err = slope·log m + intercept.  Non-positive or non-finite
/// errors are excluded (and reported); at least four usable points are
/// required.
pub fn fit_rate(ms: &[f64], errs: &[f64]) -> Result<RateFit> {
    if ms.len() != errs.len() {
        return Err(Error::Fit(format!("{} masses but {} errors", ms.len(), errs.len())));
    }
    let mut used = vec![];
    let mut excluded = vec![];
    for (i, (&m, &e)) in ms.iter().zip(errs).enumerate() {
        if m > 0.0 && m.is_finite() && e > 0.0 && e.is_finite() {
            used.push(i);
        } else {
            excluded.push(i);
        }
    }
    if used.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 positive points, have {}", used.len())));
    }
    let xs: Vec<f64> = used.iter().map(|&i| ms[i].ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&i| errs[i].ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all masses coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / k).sqrt();
    Ok(RateFit { slope, intercept, residual, used, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let ms: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
        let e: Vec<f64> = ms.iter().map(|m| 3.0 / m.sqrt()).collect();
        let f = fit_rate(&ms, &e).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && f.residual < 1e-12);
        let e: Vec<f64> = ms.iter().map(|m| 2.0 / m).collect();
        assert!((fit_rate(&ms, &e).unwrap().slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_errors_are_excluded() {
        let ms = [1.0, 2.0, 4.0, 8.0, 16.0];
        let e = [1.0, 0.5, 0.25, 0.0, 0.0625];
        let f = fit_rate(&ms, &e).unwrap();
        assert_eq!(f.excluded, vec![3]);
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!(fit_rate(&ms[..3], &e[..3]).is_err());
    }
}
