//! Desk-scale empirical checks: preimages, membership, box counting, fibers and coverings.

pub mod boxcount;
pub mod covering;
pub mod fiber;
pub mod liouville;
pub mod preimages;

pub use preimages::{count_preimages, enumerate_preimages, membership_by_preimages, torus_norm, wn_membership, PreimageSet};

use crate::error::{Error, Result};

/// Ordinary least squares `y = slope x + intercept`; returns `(slope, intercept, rms residual)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let k = xs.len();
    if k < 2 || ys.len() != k {
        return Err(Error::InsufficientResolution("a fit needs at least two points".into()));
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientResolution("fit abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok((slope, intercept, libm::sqrt(rss / k as f64)))
}
