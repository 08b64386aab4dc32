//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The 15-point rule never evaluates the interval endpoints, so integrands
//! with integrable power singularities at the ends of the domain (the copula
//! spectral densities near the simplex vertices) are handled by repeated
//! bisection of the worst subinterval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Intervals narrower than this are no longer bisected.
const MIN_WIDTH: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Absolute tolerance on the summed error estimate.
    pub abs_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-9, max_subintervals: 1 << 20 }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub subintervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `cfg.abs_tol`.
///
/// On failure the returned [`Error::Quadrature`] carries the best estimate
/// and the error bound actually reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::invalid(format!("bad integration bounds [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, abs_error: 0.0, subintervals: 1 });
    }

    let first = gauss_kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut frozen_count = 0usize;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut iterations = 0usize;

    loop {
        if !total_value.is_finite() {
            return Err(Error::Quadrature {
                value: total_value,
                achieved: f64::INFINITY,
                requested: cfg.abs_tol,
            });
        }
        if total_error - frozen_error <= cfg.abs_tol {
            if frozen_error > cfg.abs_tol {
                return Err(Error::Quadrature {
                    value: total_value,
                    achieved: total_error,
                    requested: cfg.abs_tol,
                });
            }
            break;
        }
        if heap.len() + frozen_count >= cfg.max_subintervals || heap.is_empty() {
            return Err(Error::Quadrature {
                value: total_value,
                achieved: total_error,
                requested: cfg.abs_tol,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a < MIN_WIDTH || mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            frozen_count += 1;
            continue;
        }
        let left = gauss_kronrod(&f, worst.a, mid);
        let right = gauss_kronrod(&f, mid, worst.b);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        iterations += 1;
        if iterations.is_multiple_of(1024) {
            total_value = frozen_value + heap.iter().map(|s| s.value).sum::<f64>();
            total_error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
        }
    }

    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = frozen_value + segments.iter().map(|s| s.value).sum::<f64>();
    let abs_error = frozen_error + segments.iter().map(|s| s.error).sum::<f64>();
    Ok(Quadrature { value, abs_error, subintervals: segments.len() + frozen_count })
}

/// Integrates `f(w, 1 - w)` over `w ∈ [0, 1]`.
///
/// Both arguments are passed so that points close to `w = 1` keep full
/// relative precision in `1 - w`; the two halves are folded onto `[0, 1/2]`.
pub fn integrate_unit_pair<F: Fn(f64, f64) -> f64>(f: F, cfg: &QuadConfig) -> Result<Quadrature> {
    integrate(|t| f(t, 1.0 - t) + f(1.0 - t, t), 0.0, 0.5, cfg)
}
