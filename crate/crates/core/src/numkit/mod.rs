//! Small dense linear algebra, Gaussian sampling and streaming moments.

mod matrix;
mod rng;
mod streaming;

pub use matrix::{cholesky, spd_inverse, Matrix, PsdMatrix, CLAMP_TOL};
pub use rng::{derive_seed, RngStream};
pub use streaming::{Normalization, StreamingCovariance};

/// Draws `mean + L·z` with `z` standard normal, writing into `out`.
pub fn mvn_sample_into(mean: &[f64], chol: &Matrix, rng: &mut RngStream, z: &mut [f64], out: &mut [f64]) {
    let d = mean.len();
    debug_assert_eq!(chol.dim(), d);
    for zi in z.iter_mut() {
        *zi = rng.standard_normal();
    }
    for i in 0..d {
        let row = chol.row(i);
        let mut s = mean[i];
        for j in 0..=i {
            s += row[j] * z[j];
        }
        out[i] = s;
    }
}

/// One multivariate normal draw with lower Cholesky factor `chol`.
pub fn mvn_sample(mean: &[f64], chol: &Matrix, rng: &mut RngStream) -> crate::Result<Vec<f64>> {
    if chol.dim() != mean.len() {
        return Err(crate::Error::DimensionMismatch {
            expected: mean.len(),
            got: chol.dim(),
        });
    }
    let mut z = vec![0.0; mean.len()];
    let mut out = vec![0.0; mean.len()];
    mvn_sample_into(mean, chol, rng, &mut z, &mut out);
    Ok(out)
}
