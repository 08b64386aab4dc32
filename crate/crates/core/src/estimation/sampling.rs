//! Heavy-tailed samplers with Pareto(α) margins or Student-t radii.
//!
//! Rows are generated in fixed-size blocks, each from its own random stream,
//! so the output is identical for any number of worker threads.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Open01, StandardNormal, StudentT};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::cloud::SampleCloud;
use crate::estimation::rng::stream_rng;
use crate::models::CovarianceMatrix;

const BLOCK_ROWS: usize = 16_384;

fn fill_blocks<F>(n: usize, d: usize, seed: u64, op: &str, fill_row: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let mut data = vec![0.0; n * d];
    data.par_chunks_mut(BLOCK_ROWS * d).enumerate().for_each(|(b, chunk)| {
        let mut rng = stream_rng(seed, op, b as u64);
        for row in chunk.chunks_exact_mut(d) {
            fill_row(&mut rng, row);
        }
    });
    data
}

fn check_common(alpha: f64, d: usize, n: usize) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if d == 0 || n == 0 {
        return Err(Error::invalid("sample dimension and size must be positive"));
    }
    Ok(())
}

/// Positive stable variable with Laplace transform `exp(-t^a)`, `0 < a < 1`
/// (Kanter's representation).
fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let theta = PI * u;
    let w: f64 = rng.sample(Exp1);
    let left = (a * theta).sin() / theta.sin().powf(1.0 / a);
    let right = (((1.0 - a) * theta).sin() / w).powf((1.0 - a) / a);
    left * right
}

/// Pareto quantile from a survival probability `v ∈ (0, 1]`.
#[inline]
fn pareto_from_survival(v: f64, alpha: f64) -> f64 {
    v.max(f64::MIN_POSITIVE).powf(-1.0 / alpha)
}

/// Gumbel(θ) copula with `P{X_i > t} = t^{-α}` for `t ≥ 1`.
///
/// Marshall–Olkin construction: given a positive stable mixing variable `S`
/// with index `1/θ`, the survival probabilities `1 − U_i = 1 − exp(−(E_i/S)^{1/θ})`
/// with i.i.d. unit exponentials `E_i` have a Gumbel copula.
pub fn sample_gumbel_pareto(theta: f64, alpha: f64, d: usize, n: usize, seed: u64) -> Result<SampleCloud> {
    if !(theta.is_finite() && theta >= 1.0) {
        return Err(Error::invalid(format!("Gumbel theta must be >= 1, got {theta}")));
    }
    check_common(alpha, d, n)?;
    let a = 1.0 / theta;
    let data = fill_blocks(n, d, seed, "sample_gumbel_pareto", |rng, row| {
        let s = if theta == 1.0 { 1.0 } else { positive_stable(a, rng) };
        for x in row.iter_mut() {
            let e: f64 = rng.sample(Exp1);
            let survival = -(-(e / s).powf(a)).exp_m1();
            *x = pareto_from_survival(survival, alpha);
        }
    });
    SampleCloud::new(data, d, format!("gumbel_pareto(theta={theta}, alpha={alpha})"), seed)
}

/// Independent Pareto(α) components.
pub fn sample_independent_pareto(alpha: f64, d: usize, n: usize, seed: u64) -> Result<SampleCloud> {
    check_common(alpha, d, n)?;
    let data = fill_blocks(n, d, seed, "sample_independent_pareto", |rng, row| {
        for x in row.iter_mut() {
            *x = pareto_from_survival(rng.sample(Open01), alpha);
        }
    });
    SampleCloud::new(data, d, format!("independent_pareto(alpha={alpha})"), seed)
}

/// All components equal to one Pareto(α) draw.
pub fn sample_comonotone_pareto(alpha: f64, d: usize, n: usize, seed: u64) -> Result<SampleCloud> {
    check_common(alpha, d, n)?;
    let data = fill_blocks(n, d, seed, "sample_comonotone_pareto", |rng, row| {
        let x = pareto_from_survival(rng.sample(Open01), alpha);
        row.fill(x);
    });
    SampleCloud::new(data, d, format!("comonotone_pareto(alpha={alpha})"), seed)
}

/// Symmetric square root of a positive semidefinite matrix.
pub fn symmetric_sqrt(c: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(c.matrix().clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * max.max(1.0) {
        return Err(Error::invalid(format!(
            "covariance matrix is not positive semidefinite (eigenvalue {min})"
        )));
    }
    let roots =
        DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Elliptical rows `R·A·U` with `R = |T|`, `T ~ Student-t(α)`, `U` uniform on
/// the Euclidean unit sphere and `A` the symmetric square root of `C`.
pub fn sample_elliptical_t(c: &CovarianceMatrix, alpha: f64, n: usize, seed: u64) -> Result<SampleCloud> {
    let d = c.dim();
    check_common(alpha, d, n)?;
    let a = symmetric_sqrt(c)?;
    let t = StudentT::new(alpha).map_err(|e| Error::invalid(format!("Student-t: {e}")))?;
    let data = fill_blocks(n, d, seed, "sample_elliptical_t", |rng, row| {
        let r = t.sample(rng).abs();
        let mut g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        while norm == 0.0 {
            g = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        for (i, x) in row.iter_mut().enumerate() {
            *x = r * (0..d).map(|j| a[(i, j)] * g[j]).sum::<f64>() / norm;
        }
    });
    SampleCloud::new(data, d, format!("elliptical_t(alpha={alpha})"), seed)
}
