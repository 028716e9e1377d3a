//! Finite-difference eigenvalues of the periodic second difference against
//! the exact circle spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use super::TorsionError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub length: f64,
    pub grid: usize,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `λ²h²/12` plus eigensolver roundoff.
    pub bounds: Vec<f64>,
    pub within_bounds: bool,
    pub ordered: bool,
}

/// First `⌊N/4⌋` nonzero eigenvalues, with multiplicity.
pub fn fd_spectrum_crosscheck(length: f64, n: usize) -> Result<CrosscheckReport, TorsionError> {
    if n < 8 {
        return Err(TorsionError::InvalidArgument(format!("grid size {n} < 8")));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(TorsionError::InvalidArgument(
            "length must be positive".into(),
        ));
    }
    let h = length / n as f64;
    let inv = 1.0 / (h * h);
    let lap = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * inv
        } else if (i + 1) % n == j || (j + 1) % n == i {
            -inv
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = lap.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let take = n / 4;
    let approx: Vec<f64> = ev[1..=take].to_vec();
    let exact: Vec<f64> = (0..take)
        .map(|i| (2.0 * PI * (i / 2 + 1) as f64 / length).powi(2))
        .collect();
    let roundoff = 1e-12 * 4.0 * inv;
    let mut cmp = compare_spectra(&exact, &approx, |l| l * l * h * h / 12.0 + roundoff);
    cmp.length = length;
    cmp.grid = n;
    Ok(cmp)
}

/// Residuals `exact − approx` against a per-eigenvalue bound.
pub fn compare_spectra(
    exact: &[f64],
    approx: &[f64],
    bound: impl Fn(f64) -> f64,
) -> CrosscheckReport {
    let residuals: Vec<f64> = exact.iter().zip(approx).map(|(e, a)| e - a).collect();
    let bounds: Vec<f64> = exact.iter().map(|&e| bound(e)).collect();
    let within_bounds = residuals.iter().zip(&bounds).all(|(r, b)| r.abs() <= *b);
    let ordered = approx.windows(2).all(|w| w[0] <= w[1] + 1e-9 * w[1].abs());
    CrosscheckReport {
        length: f64::NAN,
        grid: exact.len(),
        exact: exact.to_vec(),
        approx: approx.to_vec(),
        residuals,
        bounds,
        within_bounds,
        ordered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_grid_matches() {
        let r = fd_spectrum_crosscheck(2.0 * PI, 256).unwrap();
        assert_eq!(r.exact.len(), 64);
        assert!(r.residuals[0].abs() < 1e-3);
        assert!(r.within_bounds && r.ordered);
    }

    #[test]
    fn coarse_grid_ordered() {
        let r = fd_spectrum_crosscheck(1.0, 8).unwrap();
        assert!(r.ordered && r.within_bounds);
        assert!(fd_spectrum_crosscheck(1.0, 7).is_err());
    }

    #[test]
    fn self_comparison() {
        let v = vec![1.0, 1.0, 4.0];
        let r = compare_spectra(&v, &v, |_| 0.0);
        assert!(r.residuals.iter().all(|x| *x == 0.0) && r.within_bounds);
    }
}
