//! Tail estimators on sample clouds.
//!
//! Bootstrap standard errors are half the distance between the 15.87% and
//! 84.13% percentiles of the replicates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::canonicalize::canonicalize_discrete;
use crate::error::{check_dim, Error, Result};
use crate::estimation::cloud::{dot, SampleCloud};
use crate::estimation::rng::stream_rng;
use crate::quadrature::QuadConfig;
use crate::spectral::{
    g_value, pos_pow, Atom, Direction, DiscreteMeasure, EmpiricalMeasure, Portfolio, SpectralMeasure,
    TailIndex,
};

pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

/// `⌊√n⌋`, at least 1.
pub fn default_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("k must satisfy 1 <= k < n = {n}, got {k}")));
    }
    Ok(())
}

/// Mean shifted by the first value, so that constant data are reproduced exactly.
fn mean(values: &[f64]) -> f64 {
    match values.first() {
        None => f64::NAN,
        Some(&c) => c + values.iter().map(|v| v - c).sum::<f64>() / values.len() as f64,
    }
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile standard error of bootstrap replicates; non-finite replicates are dropped.
fn percentile_se(mut reps: Vec<f64>) -> f64 {
    reps.retain(|v| v.is_finite());
    if reps.len() < 2 {
        return f64::NAN;
    }
    reps.sort_by(f64::total_cmp);
    (quantile_sorted(&reps, 0.841_344_746) - quantile_sorted(&reps, 0.158_655_254)) / 2.0
}

/// Indices of the `m` largest values in decreasing order; ties broken by index.
fn top_indices(values: &[f64], m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let cmp = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    if m < idx.len() {
        idx.select_nth_unstable_by(m - 1, cmp);
        idx.truncate(m);
    }
    idx.sort_by(cmp);
    idx
}

/// The rows with the largest 1-norms, and a bootstrap for statistics of them.
///
/// A bootstrap resample only matters through its `k + 1` largest rows. With
/// `m` the size of the retained top set, the number of draws that land in it
/// is `Binomial(n, m/n)` and those draws are uniform on it, so a replicate
/// costs `O(m log m)` instead of `O(n)` whenever more than `k` draws land there.
struct TailSample<'a> {
    cloud: &'a SampleCloud,
    norms: Vec<f64>,
    top: Vec<usize>,
    k: usize,
}

impl<'a> TailSample<'a> {
    fn new(cloud: &'a SampleCloud, k: usize) -> Result<Self> {
        check_k(k, cloud.n())?;
        let norms = cloud.norms();
        let m = (3 * k + 100).min(cloud.n()).max(k + 1);
        let top = top_indices(&norms, m);
        if norms[top[k - 1]] <= 0.0 {
            return Err(Error::invalid("fewer than k rows have a nonzero norm"));
        }
        Ok(Self { cloud, norms, top, k })
    }

    /// Top-k row indices and the threshold `R_(k+1)`.
    fn point(&self) -> (Vec<usize>, f64) {
        (self.top[..self.k].to_vec(), self.norms[self.top[self.k]])
    }

    fn resample(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
        let n = self.cloud.n();
        let m = self.top.len();
        let landed = if m == n {
            n as u64
        } else {
            Binomial::new(n as u64, m as f64 / n as f64).expect("valid binomial parameters").sample(rng)
        };
        if landed as usize > self.k {
            let mut pos: Vec<usize> = (0..landed).map(|_| rng.random_range(0..m)).collect();
            pos.sort_unstable();
            let rows = pos[..self.k].iter().map(|&p| self.top[p]).collect();
            (rows, self.norms[self.top[pos[self.k]]])
        } else {
            let draws: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let dn: Vec<f64> = draws.iter().map(|&i| self.norms[i]).collect();
            let order = top_indices(&dn, self.k + 1);
            let rows = order[..self.k].iter().map(|&j| draws[j]).collect();
            (rows, dn[order[self.k]])
        }
    }

    fn bootstrap<F>(&self, op: &str, stat: F) -> Vec<f64>
    where
        F: Fn(&[usize], f64) -> f64,
    {
        let mut rng = stream_rng(self.cloud.seed(), op, 0);
        (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let (rows, thr) = self.resample(&mut rng);
                stat(&rows, thr)
            })
            .collect()
    }

    fn exceed_count(&self, rows: &[usize], thr: f64, xi: &[f64]) -> usize {
        rows.iter().filter(|&&i| dot(xi, self.cloud.row(i)) > thr).count()
    }
}

/// `γ̂_ξ = (1/k)·#{i : ξᵀX_i > R_(k+1)}` with `R_(k+1)` the `(k+1)`-th largest
/// 1-norm, so that exactly the top `k` rows lie above the threshold.
pub fn empirical_gamma(cloud: &SampleCloud, xi: &Portfolio, k: usize) -> Result<Estimate> {
    check_dim(cloud.d(), xi.dim())?;
    let tail = TailSample::new(cloud, k)?;
    let w = xi.weights();
    let (rows, thr) = tail.point();
    let value = tail.exceed_count(&rows, thr, w) as f64 / k as f64;
    let reps =
        tail.bootstrap("empirical_gamma", |rows, thr| tail.exceed_count(rows, thr, w) as f64 / k as f64);
    Ok(Estimate { value, se: percentile_se(reps) })
}

/// `γ̂_ξ / γ̂_{e1}`, bootstrapped on shared resamples.
pub fn empirical_gamma_ratio(cloud: &SampleCloud, xi: &Portfolio, k: usize) -> Result<Estimate> {
    check_dim(cloud.d(), xi.dim())?;
    let tail = TailSample::new(cloud, k)?;
    let w = xi.weights();
    let e1 = Portfolio::unit(cloud.d(), 0)?;
    let ratio = |rows: &[usize], thr: f64| {
        let den = tail.exceed_count(rows, thr, e1.weights());
        if den == 0 {
            f64::NAN
        } else {
            tail.exceed_count(rows, thr, w) as f64 / den as f64
        }
    };
    let (rows, thr) = tail.point();
    let value = ratio(&rows, thr);
    if !value.is_finite() {
        return Err(Error::invalid("no top-k row exceeds the threshold in the first coordinate"));
    }
    let reps = tail.bootstrap("empirical_gamma_ratio", ratio);
    Ok(Estimate { value, se: percentile_se(reps) })
}

fn directions_of(cloud: &SampleCloud, rows: &[usize]) -> Result<Vec<Direction>> {
    rows.iter().map(|&i| Direction::new(cloud.row(i).to_vec())).collect()
}

/// Angular parts of the `k` rows with the largest 1-norms, equally weighted
/// with total mass 1.
pub fn empirical_spectral(cloud: &SampleCloud, k: usize) -> Result<SpectralMeasure> {
    let tail = TailSample::new(cloud, k)?;
    let (rows, _) = tail.point();
    Ok(SpectralMeasure::Empirical(EmpiricalMeasure::new(directions_of(cloud, &rows)?, 1.0)?))
}

/// Curve of the canonicalized empirical spectral measure at each portfolio,
/// with bootstrap standard errors.
pub fn empirical_curve(
    cloud: &SampleCloud,
    alpha: TailIndex,
    k: usize,
    grid: &[Portfolio],
) -> Result<Vec<Estimate>> {
    for xi in grid {
        check_dim(cloud.d(), xi.dim())?;
    }
    let tail = TailSample::new(cloud, k)?;
    let quad = QuadConfig::default();
    let evaluate = |rows: &[usize]| -> Result<Vec<f64>> {
        let atoms = directions_of(cloud, rows)?
            .into_iter()
            .map(|direction| Atom { direction, weight: 1.0 / k as f64 })
            .collect();
        let measure = SpectralMeasure::Discrete(DiscreteMeasure::new(atoms)?);
        let canonical = canonicalize_discrete(&measure, alpha)?;
        grid.iter()
            .map(|xi| canonical.integrate(|s| g_value(xi.weights(), alpha.value(), s), &quad))
            .collect()
    };
    let (rows, _) = tail.point();
    let values = evaluate(&rows)?;
    let mut rng = stream_rng(cloud.seed(), "empirical_curve", 0);
    let mut reps = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); grid.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let (rows, _) = tail.resample(&mut rng);
        // a degenerate resample (one margin without mass) contributes no replicate
        if let Ok(vals) = evaluate(&rows) {
            for (r, v) in reps.iter_mut().zip(vals) {
                r.push(v);
            }
        }
    }
    Ok(values.into_iter().zip(reps).map(|(value, r)| Estimate { value, se: percentile_se(r) }).collect())
}

/// Hill estimate of `1/α` from the `k` largest values: mean of `ln(X_(i)/X_(k+1))`.
pub fn hill_estimator(values: &[f64], k: usize) -> Result<Estimate> {
    check_k(k, values.len())?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("Hill estimator needs finite data"));
    }
    let top = top_indices(values, k + 1);
    let thr = values[top[k]];
    if thr <= 0.0 {
        return Err(Error::invalid("Hill threshold must be positive"));
    }
    let logs: Vec<f64> = top[..k].iter().map(|&i| (values[i] / thr).ln()).collect();
    let value = logs.iter().sum::<f64>() / k as f64;
    Ok(Estimate { value, se: value / (k as f64).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRatioPoint {
    pub level: f64,
    pub threshold: f64,
    pub exceed_x: usize,
    pub exceed_y: usize,
    /// `P̂{ξᵀX > t} / P̂{ξᵀY ≥ t}`; `None` when no `Y` loss reaches the threshold.
    pub ratio: Option<f64>,
    /// Delta-method standard error; `None` when either exceedance set is empty.
    pub se: Option<f64>,
}

impl TailRatioPoint {
    /// Undefined ratio or standard error at this level.
    pub fn flagged(&self) -> bool {
        self.ratio.is_none() || self.se.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRatioSeries {
    pub xi: Portfolio,
    pub points: Vec<TailRatioPoint>,
}

/// Exceedance-probability ratios of `ξᵀX` against `ξᵀY` at the `levels`
/// quantiles of the `Y` losses.
pub fn tail_ratio_series(
    x: &SampleCloud,
    y: &SampleCloud,
    xi: &Portfolio,
    levels: &[f64],
) -> Result<TailRatioSeries> {
    check_dim(x.d(), y.d())?;
    if levels.is_empty() {
        return Err(Error::invalid("no quantile levels given"));
    }
    if levels.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(Error::invalid("quantile levels must lie in (0, 1)"));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("quantile levels must be strictly increasing"));
    }
    let mut lx = x.losses(xi)?;
    let mut ly = y.losses(xi)?;
    lx.sort_by(f64::total_cmp);
    ly.sort_by(f64::total_cmp);
    let (nx, ny) = (lx.len() as f64, ly.len() as f64);
    let points = levels
        .iter()
        .map(|&q| {
            let idx = ((q * ny).ceil() as usize).clamp(1, ly.len()) - 1;
            let t = ly[idx];
            let cx = lx.len() - lx.partition_point(|&v| v <= t);
            let cy = ly.len() - ly.partition_point(|&v| v <= t);
            let (px, py) = (cx as f64 / nx, cy as f64 / ny);
            let ratio = (cy > 0).then(|| px / py);
            let se = match ratio {
                Some(r) if cx > 0 => Some(r * ((1.0 - px) / cx as f64 + (1.0 - py) / cy as f64).sqrt()),
                _ => None,
            };
            TailRatioPoint { level: q, threshold: t, exceed_x: cx, exceed_y: cy, ratio, se }
        })
        .collect();
    Ok(TailRatioSeries { xi: xi.clone(), points })
}

/// A moment `E[(V)_+^α]` given either by a sample of `V` or analytically.
#[derive(Debug, Clone, Copy)]
pub enum MomentSource<'a> {
    Sample(&'a [f64]),
    /// The value of `E[(V)_+^α]` itself.
    Analytic(f64),
}

impl MomentSource<'_> {
    /// Moment and the standard error of its estimate.
    fn moment(&self, alpha: f64) -> Result<(f64, f64)> {
        match *self {
            MomentSource::Analytic(m) => {
                if m.is_finite() && m >= 0.0 {
                    Ok((m, 0.0))
                } else {
                    Err(Error::invalid("analytic moment must be finite and nonnegative"))
                }
            }
            MomentSource::Sample(v) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("moment sample must be non-empty and finite"));
                }
                let p: Vec<f64> = v.iter().map(|&x| pos_pow(x, alpha)).collect();
                let m = mean(&p);
                let n = p.len() as f64;
                let var = if p.len() > 1 {
                    p.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                Ok((m, (var / n).sqrt()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreimanRatio {
    pub value: f64,
    /// Delta-method standard error, zero for two analytic moments.
    pub se: f64,
}

/// `E[(V_1)_+^α] / E[(V_2)_+^α]`, the tail ratio of `R·V_1` to `R·V_2` for a
/// regularly varying `R` independent of the `V_i`.
pub fn breiman_ratio(v1: MomentSource<'_>, v2: MomentSource<'_>, alpha: TailIndex) -> Result<BreimanRatio> {
    let (m1, s1) = v1.moment(alpha.value())?;
    let (m2, s2) = v2.moment(alpha.value())?;
    if m2 <= 0.0 {
        return Err(Error::invalid("denominator moment is zero"));
    }
    let value = m1 / m2;
    let rel1 = if m1 > 0.0 { s1 / m1 } else { 0.0 };
    let se = value * (rel1 * rel1 + (s2 / m2) * (s2 / m2)).sqrt();
    Ok(BreimanRatio { value, se })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopLossRegime {
    /// `α > 1`: compare `E(ξᵀX − u)_+` with `E(ξᵀY − u)_+`.
    IncreasingConvex,
    /// `α < 1`: compare `E[−((ξᵀX)_+ ∧ u)]` with the same for `Y`.
    DecreasingConvex,
    /// `α = 1`: neither condition applies.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopLossRow {
    pub u: f64,
    pub h_x: Estimate,
    pub h_y: Estimate,
    pub f_x: Estimate,
    pub f_y: Estimate,
    /// Whether the regime's inequality `X ≤ Y` is consistent with the data at 3 SE.
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopLossTable {
    pub xi: Portfolio,
    pub regime: StopLossRegime,
    pub rows: Vec<StopLossRow>,
}

/// `E(L − u)_+` with a bootstrap that only resamples the nonzero terms.
fn stop_loss_estimate(losses: &[f64], u: f64, rng: &mut ChaCha8Rng) -> Estimate {
    let n = losses.len();
    let nonzero: Vec<f64> = losses.iter().map(|l| l - u).filter(|&e| e > 0.0).collect();
    let value = nonzero.iter().sum::<f64>() / n as f64;
    if nonzero.is_empty() {
        return Estimate { value, se: 0.0 };
    }
    let p = nonzero.len() as f64 / n as f64;
    let reps = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let c = if nonzero.len() == n {
                n as u64
            } else {
                Binomial::new(n as u64, p).expect("valid binomial parameters").sample(rng)
            };
            (0..c).map(|_| nonzero[rng.random_range(0..nonzero.len())]).sum::<f64>() / n as f64
        })
        .collect();
    Estimate { value, se: percentile_se(reps) }
}

/// `E[−((L)_+ ∧ u)]` with the standard error of a bounded mean.
fn capped_estimate(losses: &[f64], u: f64) -> Estimate {
    let v: Vec<f64> = losses.iter().map(|&l| -(l.max(0.0).min(u))).collect();
    let m = mean(&v);
    let n = v.len() as f64;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Estimate { value: m, se: (var / n).sqrt() }
}

/// Empirical stop-loss transforms of `ξᵀX` and `ξᵀY` on `u_grid`, with the
/// regime's inequality checked at 3 SE.
pub fn stop_loss_check(
    x: &SampleCloud,
    y: &SampleCloud,
    xi: &Portfolio,
    u_grid: &[f64],
    alpha: TailIndex,
) -> Result<StopLossTable> {
    check_dim(x.d(), y.d())?;
    if u_grid.is_empty() || u_grid.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
        return Err(Error::invalid("u grid must be non-empty with positive entries"));
    }
    if u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("u grid must be strictly increasing"));
    }
    let a = alpha.value();
    let regime = if a > 1.0 {
        StopLossRegime::IncreasingConvex
    } else if a < 1.0 {
        StopLossRegime::DecreasingConvex
    } else {
        StopLossRegime::Undecided
    };
    let lx = x.losses(xi)?;
    let ly = y.losses(xi)?;
    let mut rng_x = stream_rng(x.seed(), "stop_loss_check_x", 0);
    let mut rng_y = stream_rng(y.seed(), "stop_loss_check_y", 0);
    let rows = u_grid
        .iter()
        .map(|&u| {
            let h_x = stop_loss_estimate(&lx, u, &mut rng_x);
            let h_y = stop_loss_estimate(&ly, u, &mut rng_y);
            let f_x = capped_estimate(&lx, u);
            let f_y = capped_estimate(&ly, u);
            let within =
                |a: Estimate, b: Estimate| a.value - b.value <= 3.0 * (a.se * a.se + b.se * b.se).sqrt();
            let holds = match regime {
                StopLossRegime::IncreasingConvex => Some(within(h_x, h_y)),
                StopLossRegime::DecreasingConvex => Some(within(f_x, f_y)),
                StopLossRegime::Undecided => None,
            };
            StopLossRow { u, h_x, h_y, f_x, f_y, holds }
        })
        .collect();
    Ok(StopLossTable { xi: xi.clone(), regime, rows })
}
