//! Portfolio grids on the unit simplex.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::estimation::rng::stream_rng;
use crate::spectral::Portfolio;

/// `n` evenly spaced portfolios `(t, 1 - t)` with `t = 0, 1/(n-1), ..., 1`.
pub fn bivariate_grid(n: usize) -> Result<Vec<Portfolio>> {
    if n < 2 {
        return Err(Error::invalid(format!("grid size must be at least 2, got {n}")));
    }
    let last = (n - 1) as f64;
    (0..n).map(|i| Portfolio::bivariate(i as f64 / last)).collect()
}

/// All portfolios `k / m` with `k` a nonnegative integer vector summing to `m`.
pub fn simplex_lattice(d: usize, m: usize) -> Result<Vec<Portfolio>> {
    if d == 0 || m == 0 {
        return Err(Error::invalid("lattice needs d >= 1 and step count m >= 1"));
    }
    let mut out = Vec::new();
    let mut k = vec![0usize; d];
    fill_lattice(&mut k, 0, m, m, &mut out)?;
    Ok(out)
}

fn fill_lattice(
    k: &mut [usize],
    pos: usize,
    remaining: usize,
    m: usize,
    out: &mut Vec<Portfolio>,
) -> Result<()> {
    if pos == k.len() - 1 {
        k[pos] = remaining;
        let weights = k.iter().map(|&c| c as f64 / m as f64).collect();
        out.push(Portfolio::new(weights)?);
        return Ok(());
    }
    for c in (0..=remaining).rev() {
        k[pos] = c;
        fill_lattice(k, pos + 1, remaining - c, m, out)?;
    }
    Ok(())
}

/// `n` portfolios in dimension `d`: the vertices, the uniform portfolio, then
/// seeded flat-Dirichlet draws.
pub fn random_simplex_grid(d: usize, n: usize, seed: u64) -> Result<Vec<Portfolio>> {
    if d == 0 || n < d + 1 {
        return Err(Error::invalid(format!("random simplex grid needs at least d + 1 = {} points", d + 1)));
    }
    let mut out: Vec<Portfolio> = (0..d).map(|i| Portfolio::unit(d, i)).collect::<Result<_>>()?;
    out.push(Portfolio::uniform(d)?);
    let mut rng = stream_rng(seed, "random_simplex_grid", 0);
    while out.len() < n {
        let e: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        out.push(Portfolio::normalized(e)?);
    }
    Ok(out)
}
