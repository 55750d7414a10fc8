//! Empirical spectra and the Kolmogorov-Smirnov distance to a CDF.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::svd::svd;

/// Eigenvalues of `(1/cols) A A^T`, ascending, including the zeros when
/// `A` has more rows than columns.
pub fn wishart_spectrum(a: &Matrix) -> Result<Vec<f64>> {
    let (rows, cols) = a.shape();
    let s = svd(a)?;
    let mut eig: Vec<f64> = s
        .singular_values
        .iter()
        .map(|x| x * x / cols as f64)
        .collect();
    eig.resize(rows, 0.0);
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `sup_x |F_n(x) - F(x)|` for the empirical distribution of `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // Group ties so jumps of the empirical CDF are handled at once.
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d
            .max((cdf(x) - at).abs())
            .max((cdf(x.next_down()) - below).abs());
        i = j;
    }
    d
}
