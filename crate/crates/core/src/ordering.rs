//! Integral order `≼_{G,α}` between canonical spectral measures, the
//! dependence bounds of canonical curves, and asymptotic portfolio loss
//! verdicts built on top of them.
//!
//! All verdicts are relative to the supplied portfolio grid: a grid can refute
//! an ordering or support it, never certify it on the whole simplex.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonicalize::require_canonical;
use crate::error::{check_dim, Error, Result};
use crate::models::CovarianceMatrix;
use crate::quadrature::QuadConfig;
use crate::spectral::{g_value, Portfolio, SpectralMeasure, TailIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LeftPrecedes,
    RightPrecedes,
    Equivalent,
    Incomparable,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::LeftPrecedes => "left_precedes",
            Relation::RightPrecedes => "right_precedes",
            Relation::Equivalent => "equivalent",
            Relation::Incomparable => "incomparable",
        }
    }

    /// The relation with left and right swapped.
    pub fn reversed(self) -> Self {
        match self {
            Relation::LeftPrecedes => Relation::RightPrecedes,
            Relation::RightPrecedes => Relation::LeftPrecedes,
            other => other,
        }
    }

    /// True for `left_precedes` and `equivalent`.
    pub fn left_le_right(self) -> bool {
        matches!(self, Relation::LeftPrecedes | Relation::Equivalent)
    }

    pub fn right_le_left(self) -> bool {
        matches!(self, Relation::RightPrecedes | Relation::Equivalent)
    }
}

/// Outcome of comparing two curves `L(ξ)` and `R(ξ)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    /// `max |L − R|` over the grid.
    pub max_violation: f64,
    /// Portfolio attaining `max_violation`; absent for `equivalent`.
    pub witness_xi: Option<Portfolio>,
    pub tolerance: f64,
    /// `max(L − R, 0)`: evidence against `left ≼ right`.
    pub forward_violation: f64,
    pub forward_witness: Option<Portfolio>,
    /// `max(R − L, 0)`: evidence against `right ≼ left`.
    pub backward_violation: f64,
    pub backward_witness: Option<Portfolio>,
}

/// Classifies `Δ = left − right` on the grid at tolerance `tol`.
pub fn verdict_from_curves(
    left: &[f64],
    right: &[f64],
    grid: &[Portfolio],
    tol: f64,
) -> Result<OrderVerdict> {
    check_dim(grid.len(), left.len())?;
    check_dim(grid.len(), right.len())?;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid("tolerance must be finite and nonnegative"));
    }
    let mut fwd = (0.0f64, None::<usize>);
    let mut bwd = (0.0f64, None::<usize>);
    for (i, (l, r)) in left.iter().zip(right).enumerate() {
        let delta = l - r;
        if !delta.is_finite() {
            return Err(Error::invalid(format!("curve values are not finite at grid point {i}")));
        }
        if delta > fwd.0 {
            fwd = (delta, Some(i));
        }
        if -delta > bwd.0 {
            bwd = (-delta, Some(i));
        }
    }
    let left_ok = fwd.0 <= tol;
    let right_ok = bwd.0 <= tol;
    let relation = match (left_ok, right_ok) {
        (true, true) => Relation::Equivalent,
        (true, false) => Relation::LeftPrecedes,
        (false, true) => Relation::RightPrecedes,
        (false, false) => Relation::Incomparable,
    };
    let (max_violation, arg) = if fwd.0 >= bwd.0 { fwd } else { bwd };
    let pick = |i: Option<usize>| i.map(|i| grid[i].clone());
    let witness_xi = if relation == Relation::Equivalent { None } else { pick(arg) };
    Ok(OrderVerdict {
        relation,
        max_violation,
        witness_xi,
        tolerance: tol,
        forward_violation: fwd.0,
        forward_witness: pick(fwd.1),
        backward_violation: bwd.0,
        backward_witness: pick(bwd.1),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderConfig {
    /// Overrides the representation-dependent default tolerance.
    pub tol: Option<f64>,
    pub quad: QuadConfig,
}

impl OrderConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol: Some(tol), ..Self::default() }
    }

    fn resolve(&self, measures: &[&SpectralMeasure]) -> f64 {
        self.tol.unwrap_or_else(|| measures.iter().map(|m| m.default_tolerance()).fold(0.0, f64::max))
    }
}

fn curve_values(
    measure: &SpectralMeasure,
    alpha: f64,
    grid: &[Portfolio],
    quad: &QuadConfig,
) -> Result<Vec<f64>> {
    grid.par_iter().map(|xi| measure.integrate(|s| g_value(xi.weights(), alpha, s), quad)).collect()
}

fn check_grid(d: usize, grid: &[Portfolio]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("portfolio grid is empty"));
    }
    for xi in grid {
        check_dim(d, xi.dim())?;
    }
    Ok(())
}

/// Compares `Ψ*_L g_{ξ,α}` with `Ψ*_R g_{ξ,α}` over the grid.
pub fn galpha_check(
    left: &SpectralMeasure,
    right: &SpectralMeasure,
    alpha: TailIndex,
    grid: &[Portfolio],
    cfg: &OrderConfig,
) -> Result<OrderVerdict> {
    check_dim(left.dim(), right.dim())?;
    check_grid(left.dim(), grid)?;
    require_canonical(left, &cfg.quad)?;
    require_canonical(right, &cfg.quad)?;
    let tol = cfg.resolve(&[left, right]);
    let l = curve_values(left, alpha.value(), grid, &cfg.quad)?;
    let r = curve_values(right, alpha.value(), grid, &cfg.quad)?;
    verdict_from_curves(&l, &r, grid, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub pass: bool,
    pub tolerance: f64,
    /// Largest amount by which a curve value leaves its bounds (≤ 0 when strictly inside).
    pub worst_gap: f64,
    pub worst_xi: Portfolio,
    /// `max(lower − value)`.
    pub lower_violation: f64,
    /// `max(value − upper)`.
    pub upper_violation: f64,
}

/// Checks `Σξ_i^α ≤ Ψ*g_{ξ,α} ≤ 1` for `α ≥ 1` and the reversed sandwich
/// `1 ≤ Ψ*g_{ξ,α} ≤ Σξ_i^α` for `α ≤ 1`.
pub fn dependence_bounds_check(
    measure: &SpectralMeasure,
    alpha: TailIndex,
    grid: &[Portfolio],
    tol: f64,
    quad: &QuadConfig,
) -> Result<BoundsReport> {
    if !measure.is_simplex() {
        return Err(Error::Unsupported(
            "dependence bounds hold for measures on the nonnegative orthant only".into(),
        ));
    }
    check_grid(measure.dim(), grid)?;
    require_canonical(measure, quad)?;
    let a = alpha.value();
    let values = curve_values(measure, a, grid, quad)?;
    let mut lower_violation = f64::NEG_INFINITY;
    let mut upper_violation = f64::NEG_INFINITY;
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (i, (xi, v)) in grid.iter().zip(&values).enumerate() {
        let independent: f64 = xi.weights().iter().map(|w| w.powf(a)).sum();
        let (lo, hi) = if a >= 1.0 { (independent, 1.0) } else { (1.0, independent) };
        let below = lo - v;
        let above = v - hi;
        lower_violation = lower_violation.max(below);
        upper_violation = upper_violation.max(above);
        let gap = below.max(above);
        if gap > worst.0 {
            worst = (gap, i);
        }
    }
    Ok(BoundsReport {
        pass: worst.0 <= tol,
        tolerance: tol,
        worst_gap: worst.0,
        worst_xi: grid[worst.1].clone(),
        lower_violation,
        upper_violation,
    })
}

/// Per-coordinate limits `λ_i = lim P{|X_i| > t} / P{|Y_i| > t}`, possibly `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalTailRelation {
    lambda: Vec<f64>,
}

impl MarginalTailRelation {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::invalid("tail ratios must not be empty"));
        }
        if lambda.iter().any(|l| l.is_nan() || *l < 0.0) {
            return Err(Error::invalid("tail ratios must be nonnegative"));
        }
        Ok(Self { lambda })
    }

    /// All ratios equal to one.
    pub fn balanced(d: usize) -> Self {
        Self { lambda: vec![1.0; d] }
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// The marginal relation of `|X_i|` against `|Y_i|` per coordinate.
    pub fn componentwise(&self) -> Vec<Relation> {
        self.lambda
            .iter()
            .map(|&l| {
                if l == 1.0 {
                    Relation::Equivalent
                } else if l < 1.0 {
                    Relation::LeftPrecedes
                } else {
                    Relation::RightPrecedes
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AplRule {
    /// Heavier overall tail loses: compare tail indices.
    TailIndexDominance,
    /// Equal tail indices, margins ordered, spectral order on the grid.
    SpectralOrder,
    /// Unit tail index on the nonnegative orthant: margins decide.
    UnitIndexReduction,
    NoRule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AplVerdict {
    pub relation: Relation,
    pub rule: AplRule,
    pub trace: Vec<String>,
    /// The spectral comparison, when one was run.
    pub spectral_check: Option<OrderVerdict>,
}

fn all_in_unit(lambda: &[f64]) -> bool {
    lambda.iter().all(|&l| l > 0.0 && l <= 1.0)
}

fn all_at_least_one(lambda: &[f64]) -> bool {
    lambda.iter().all(|&l| l >= 1.0)
}

/// Asymptotic portfolio loss verdict for `X` (left) against `Y` (right).
///
/// Rules in order: different tail indices; unit tail index on the orthant;
/// equal tail indices with ordered margins and a spectral comparison.
pub fn apl_verdict(
    left: &SpectralMeasure,
    right: &SpectralMeasure,
    alpha_left: TailIndex,
    alpha_right: TailIndex,
    margins: &MarginalTailRelation,
    grid: &[Portfolio],
    cfg: &OrderConfig,
) -> Result<AplVerdict> {
    check_dim(left.dim(), right.dim())?;
    check_dim(left.dim(), margins.lambda().len())?;
    let mut trace = Vec::new();
    let (al, ar) = (alpha_left.value(), alpha_right.value());

    if al != ar {
        let relation = if al > ar { Relation::LeftPrecedes } else { Relation::RightPrecedes };
        trace.push(format!("tail indices differ ({al} vs {ar}): the lighter-tailed vector precedes"));
        return Ok(AplVerdict { relation, rule: AplRule::TailIndexDominance, trace, spectral_check: None });
    }
    trace.push(format!("equal tail index {al}"));

    let lambda = margins.lambda();
    let on_orthant = left.is_simplex() && right.is_simplex();
    let below = lambda.iter().all(|&l| l <= 1.0);
    let above = all_at_least_one(lambda);

    if al == 1.0 && on_orthant {
        let relation = match (below, above) {
            (true, true) => Some(Relation::Equivalent),
            (true, false) => Some(Relation::LeftPrecedes),
            (false, true) => Some(Relation::RightPrecedes),
            (false, false) => None,
        };
        if let Some(relation) = relation {
            trace.push(format!(
                "unit tail index on the orthant: portfolio tails are linear in the margins, lambda = {lambda:?}"
            ));
            return Ok(AplVerdict {
                relation,
                rule: AplRule::UnitIndexReduction,
                trace,
                spectral_check: None,
            });
        }
        trace.push("unit tail index but margins are not ordered in one direction".into());
    }

    if !on_orthant {
        trace.push(
            "a measure charges directions outside the orthant: the spectral shortcut needs an \
             additional rescaling comparison that is not decided automatically"
                .into(),
        );
        return Ok(AplVerdict {
            relation: Relation::Incomparable,
            rule: AplRule::NoRule,
            trace,
            spectral_check: None,
        });
    }

    let forward_margins = all_in_unit(lambda);
    let backward_margins = lambda.iter().all(|&l| l >= 1.0 && l.is_finite());
    if !(forward_margins || backward_margins) {
        trace.push(format!("margins not ordered within (0, 1] in either direction: lambda = {lambda:?}"));
        return Ok(AplVerdict {
            relation: Relation::Incomparable,
            rule: AplRule::NoRule,
            trace,
            spectral_check: None,
        });
    }

    let check = galpha_check(left, right, alpha_left, grid, cfg)?;
    trace.push(format!(
        "spectral comparison on {} portfolios: {} (tolerance {:e})",
        grid.len(),
        check.relation.as_str(),
        check.tolerance
    ));
    let balanced = lambda.iter().all(|&l| l == 1.0);
    let relation = if forward_margins && check.relation.left_le_right() {
        if balanced && check.relation == Relation::Equivalent {
            Some(Relation::Equivalent)
        } else {
            Some(Relation::LeftPrecedes)
        }
    } else if backward_margins && check.relation.right_le_left() {
        Some(Relation::RightPrecedes)
    } else {
        None
    };
    match relation {
        Some(r) => {
            if !balanced {
                trace.push(
                    "margins are not tail-equivalent: only the one-sided implication is available, \
                     the converse is not established"
                        .into(),
                );
            }
            Ok(AplVerdict { relation: r, rule: AplRule::SpectralOrder, trace, spectral_check: Some(check) })
        }
        None => {
            trace.push("spectral order does not match the marginal ordering".into());
            Ok(AplVerdict {
                relation: Relation::Incomparable,
                rule: AplRule::NoRule,
                trace,
                spectral_check: Some(check),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadformReport {
    pub pass: bool,
    /// `max(vᵀCv − vᵀDv)` over the tested vectors.
    pub max_gap: f64,
    pub witness: Vec<f64>,
    pub tolerance: f64,
}

/// Checks `vᵀCv ≤ vᵀDv + tol` for each vector `v`.
pub fn quadform_check(
    c: &CovarianceMatrix,
    d: &CovarianceMatrix,
    vectors: &[Vec<f64>],
    tol: f64,
) -> Result<QuadformReport> {
    check_dim(c.dim(), d.dim())?;
    if vectors.is_empty() {
        return Err(Error::invalid("no vectors to test"));
    }
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (i, v) in vectors.iter().enumerate() {
        let gap = c.quadratic_form(v)? - d.quadratic_form(v)?;
        if gap > worst.0 {
            worst = (gap, i);
        }
    }
    Ok(QuadformReport {
        pass: worst.0 <= tol,
        max_gap: worst.0,
        witness: vectors[worst.1].clone(),
        tolerance: tol,
    })
}

/// [`quadform_check`] restricted to simplex portfolios.
pub fn quadform_simplex_check(
    c: &CovarianceMatrix,
    d: &CovarianceMatrix,
    grid: &[Portfolio],
    tol: f64,
) -> Result<QuadformReport> {
    let vectors: Vec<Vec<f64>> = grid.iter().map(|p| p.weights().to_vec()).collect();
    quadform_check(c, d, &vectors, tol)
}
