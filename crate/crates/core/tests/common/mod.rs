#![allow(dead_code)]

use aplorder::{Portfolio, SpectralMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the unit simplex (normalized exponentials).
pub fn simplex_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Point of the 1-norm unit sphere with random signs.
pub fn sphere_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    simplex_point(rng, d).into_iter().map(|x| if rng.random::<bool>() { x } else { -x }).collect()
}

/// Random discrete measure on the simplex with unit first moments in every
/// coordinate, built by rescaling coordinates of random atoms.
pub fn random_canonical(rng: &mut ChaCha8Rng, d: usize, max_atoms: usize) -> SpectralMeasure {
    let n = rng.random_range(1..=max_atoms);
    let mut atoms: Vec<(Vec<f64>, f64)> =
        (0..n).map(|_| (simplex_point(rng, d), rng.random_range(0.1..2.0))).collect();
    // every coordinate needs mass, so add the vertices with small weights
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        atoms.push((e, rng.random_range(0.01..0.5)));
    }
    let moments: Vec<f64> = (0..d).map(|i| atoms.iter().map(|(s, w)| w * s[i]).sum()).collect();
    let pairs = atoms
        .into_iter()
        .map(|(s, w)| {
            let u: Vec<f64> = s.iter().zip(&moments).map(|(x, m)| x / m).collect();
            let norm: f64 = u.iter().sum();
            (u.iter().map(|x| x / norm).collect(), w * norm)
        })
        .collect();
    SpectralMeasure::discrete(pairs).unwrap()
}

/// Random probability measure (possibly signed directions) whose
/// `∫|s_i|^α dΨ` agree across coordinates.
pub fn random_balanced(rng: &mut ChaCha8Rng, d: usize, alpha: f64, signed: bool) -> SpectralMeasure {
    let n = rng.random_range(2..=10);
    let mut atoms: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|_| {
            let s = if signed { sphere_point(rng, d) } else { simplex_point(rng, d) };
            (s, rng.random_range(0.1..1.0))
        })
        .collect();
    let nu: Vec<f64> = (0..d).map(|i| atoms.iter().map(|(s, w)| w * s[i].abs().powf(alpha)).sum()).collect();
    // push forward under s -> v∘s with v_i = ν_i^{-1/α}, weights times ‖v∘s‖^α
    for (s, w) in atoms.iter_mut() {
        let u: Vec<f64> = s.iter().zip(&nu).map(|(x, m)| x * m.powf(-1.0 / alpha)).collect();
        let norm: f64 = u.iter().map(|x| x.abs()).sum();
        *s = u.iter().map(|x| x / norm).collect();
        *w *= norm.powf(alpha);
    }
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    SpectralMeasure::discrete(atoms.into_iter().map(|(s, w)| (s, w / total)).collect()).unwrap()
}

pub fn sum_pow(xi: &Portfolio, alpha: f64) -> f64 {
    xi.weights().iter().map(|x| x.powf(alpha)).sum()
}

/// Kendall's tau of two columns with a standard error from `blocks`
/// disjoint blocks of equal size.
pub fn kendall_tau_blocks(x: &[f64], y: &[f64], blocks: usize) -> (f64, f64) {
    let size = x.len() / blocks;
    let taus: Vec<f64> = (0..blocks)
        .map(|b| {
            let (xs, ys) = (&x[b * size..(b + 1) * size], &y[b * size..(b + 1) * size]);
            let mut s = 0i64;
            for i in 0..size {
                for j in i + 1..size {
                    let p = (xs[i] - xs[j]) * (ys[i] - ys[j]);
                    s += if p > 0.0 {
                        1
                    } else if p < 0.0 {
                        -1
                    } else {
                        0
                    };
                }
            }
            s as f64 / (size * (size - 1) / 2) as f64
        })
        .collect();
    let m = taus.iter().sum::<f64>() / blocks as f64;
    let var = taus.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (blocks - 1) as f64;
    (m, (var / blocks as f64).sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Monte Carlo estimate of `(ξᵀC̃ξ)^{α/2} / 2` as
/// `E[(ξᵀLU)_+^α] / (2 E[(e1ᵀLU)_+^α])` with `U` uniform on the circle and
/// `L` the Cholesky factor of the correlation matrix. Returns value and SE.
pub fn elliptical_mc(rho: f64, alpha: f64, x1: &[f64], n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut r = rng(seed);
    let l21 = rho;
    let l22 = (1.0 - rho * rho).sqrt();
    let k = x1.len();
    let mut num = vec![Vec::with_capacity(n); k];
    let mut den = Vec::with_capacity(n);
    for _ in 0..n {
        let phi = r.random::<f64>() * std::f64::consts::TAU;
        let (u1, u2) = (phi.cos(), phi.sin());
        let (z1, z2) = (u1, l21 * u1 + l22 * u2);
        den.push(z1.max(0.0).powf(alpha));
        for (j, &a) in x1.iter().enumerate() {
            num[j].push((a * z1 + (1.0 - a) * z2).max(0.0).powf(alpha));
        }
    }
    let (md, _) = mean_se(&den);
    num.iter()
        .map(|nv| {
            let (mn, _) = mean_se(nv);
            let ratio = mn / md;
            // delta method for a ratio of means on shared draws
            let resid: Vec<f64> = nv.iter().zip(&den).map(|(a, b)| a - ratio * b).collect();
            let (_, se_resid) = mean_se(&resid);
            (ratio / 2.0, se_resid / md / 2.0)
        })
        .collect()
}
