//! Directions, portfolios and spectral measures, together with the integrands
//! `f_{ξ,α}` and `g_{ξ,α}` and their integrals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonicalize::validate_canonical;
use crate::error::{check_dim, Error, Result};
use crate::grid::bivariate_grid;
use crate::models;
use crate::quadrature::{integrate_unit_pair, QuadConfig};

/// Tolerance on the 1-norm of directions and the weight sum of portfolios.
pub const NORM_TOL: f64 = 1e-12;

/// Default ordering/validation tolerance for measures evaluated exactly.
pub const EXACT_TOL: f64 = 1e-9;
/// Default ordering/validation tolerance for quadrature-backed measures.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// A point on the 1-norm unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction {
    coords: Vec<f64>,
}

impl Direction {
    /// Normalizes `coords` to unit 1-norm. Zero and non-finite vectors are rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("direction must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("direction coordinates must be finite"));
        }
        let norm: f64 = coords.iter().map(|c| c.abs()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("zero vector has no direction"));
        }
        let coords = if norm == 1.0 { coords } else { coords.into_iter().map(|c| c / norm).collect() };
        Ok(Self { coords })
    }

    /// Standard basis vector `e_i` (0-based `i`).
    pub fn unit(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::invalid(format!("basis index {i} out of range for d = {d}")));
        }
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Ok(Self { coords })
    }

    /// The barycentre `(1/d, ..., 1/d)`.
    pub fn barycentre(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Self { coords: vec![1.0 / d as f64; d] })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0.0)
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.coords
    }
}

/// A point of the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Portfolio {
    weights: Vec<f64>,
}

impl Portfolio {
    /// Validates nonnegative weights summing to one within [`NORM_TOL`].
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("portfolio must have at least one weight"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("portfolio weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("portfolio weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Divides nonnegative weights by their sum.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("portfolio weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("portfolio weights must not all vanish"));
        }
        Portfolio::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// The bivariate portfolio `(x1, 1 - x1)`.
    pub fn bivariate(x1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x1) {
            return Err(Error::invalid(format!("xi1 = {x1} is outside [0, 1]")));
        }
        Ok(Self { weights: vec![x1, 1.0 - x1] })
    }

    /// Single-asset portfolio `e_i` (0-based `i`).
    pub fn unit(d: usize, i: usize) -> Result<Self> {
        Ok(Self { weights: Direction::unit(d, i)?.coords })
    }

    pub fn uniform(d: usize) -> Result<Self> {
        Ok(Self { weights: Direction::barycentre(d)?.coords })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

impl TryFrom<Vec<f64>> for Portfolio {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Portfolio::new(v)
    }
}

impl From<Portfolio> for Vec<f64> {
    fn from(p: Portfolio) -> Self {
        p.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TailIndex(f64);

impl TailIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::invalid(format!("tail index must be positive and finite, got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TailIndex {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        TailIndex::new(v)
    }
}

impl From<TailIndex> for f64 {
    fn from(a: TailIndex) -> Self {
        a.0
    }
}

/// `max(x, 0)^alpha`, with `0^alpha = 0`.
#[inline]
pub fn pos_pow(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        x.powf(alpha)
    } else {
        0.0
    }
}

/// Signed power `sign(t)|t|^p`.
#[inline]
pub fn signed_pow(t: f64, p: f64) -> f64 {
    if t > 0.0 {
        t.powf(p)
    } else if t < 0.0 {
        -(-t).powf(p)
    } else {
        0.0
    }
}

/// `f_{ξ,α}(s) = (ξ·s)_+^α` on raw slices; dimensions are not checked.
#[inline]
pub fn f_value(xi: &[f64], alpha: f64, s: &[f64]) -> f64 {
    let dot: f64 = xi.iter().zip(s).map(|(a, b)| a * b).sum();
    pos_pow(dot, alpha)
}

/// `g_{ξ,α}(x) = (Σ ξ_i (x_i+^{1/α} − x_i−^{1/α}))_+^α` on raw slices.
#[inline]
pub fn g_value(xi: &[f64], alpha: f64, x: &[f64]) -> f64 {
    let inv = 1.0 / alpha;
    let inner: f64 =
        xi.iter().zip(x).map(|(&w, &t)| if w == 0.0 { 0.0 } else { w * signed_pow(t, inv) }).sum();
    pos_pow(inner, alpha)
}

pub fn eval_f(xi: &Portfolio, alpha: TailIndex, s: &Direction) -> Result<f64> {
    check_dim(xi.dim(), s.dim())?;
    Ok(f_value(xi.weights(), alpha.value(), s.coords()))
}

pub fn eval_g(xi: &Portfolio, alpha: TailIndex, x: &[f64]) -> Result<f64> {
    check_dim(xi.dim(), x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("g argument must be finite"));
    }
    Ok(g_value(xi.weights(), alpha.value(), x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub direction: Direction,
    pub weight: f64,
}

/// Finitely many weighted directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDiscrete")]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawDiscrete {
    atoms: Vec<Atom>,
}

impl TryFrom<RawDiscrete> for DiscreteMeasure {
    type Error = Error;
    fn try_from(raw: RawDiscrete) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms)
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let first =
            atoms.first().ok_or_else(|| Error::invalid("discrete measure needs at least one atom"))?;
        let d = first.direction.dim();
        for atom in &atoms {
            check_dim(d, atom.direction.dim())?;
            if !(atom.weight.is_finite() && atom.weight > 0.0) {
                return Err(Error::invalid(format!(
                    "atom weights must be positive and finite, got {}",
                    atom.weight
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn from_pairs(pairs: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let atoms = pairs
            .into_iter()
            .map(|(coords, weight)| Ok(Atom { direction: Direction::new(coords)?, weight }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].direction.dim()
    }

    pub fn into_atoms(self) -> Vec<Atom> {
        self.atoms
    }
}

/// Closed-form bivariate spectral densities parameterized by `w` for the
/// direction `(w, 1 - w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityKernel {
    Gumbel { theta: f64 },
    Galambos { theta: f64 },
}

impl DensityKernel {
    /// Density at `w`, with `wb = 1 - w` passed separately for precision.
    pub fn density(&self, w: f64, wb: f64) -> f64 {
        match *self {
            DensityKernel::Gumbel { theta } => models::gumbel_density(theta, w, wb),
            DensityKernel::Galambos { theta } => models::galambos_density(theta, w, wb),
        }
    }
}

/// Density `h` on the open segment between `e2` (w = 0) and `e1` (w = 1),
/// plus point masses at both ends.
///
/// The first moments `∫w dH` and `∫(1-w) dH` (atoms included) are computed
/// once at construction and used to integrate the endpoint behaviour of
/// integrands exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivariateDensity {
    kernel: DensityKernel,
    atom_at_zero: f64,
    atom_at_one: f64,
    moment_one: f64,
    moment_two: f64,
}

fn best_effort(r: Result<crate::quadrature::Quadrature>) -> Result<f64> {
    match r {
        Ok(q) => Ok(q.value),
        Err(Error::Quadrature { value, .. }) if value.is_finite() => Ok(value),
        Err(e) => Err(e),
    }
}

impl BivariateDensity {
    /// Density with the given endpoint atoms.
    pub fn with_atoms(
        kernel: DensityKernel,
        atom_at_zero: f64,
        atom_at_one: f64,
        quad: &QuadConfig,
    ) -> Result<Self> {
        if !(atom_at_zero.is_finite() && atom_at_zero >= 0.0)
            || !(atom_at_one.is_finite() && atom_at_one >= 0.0)
        {
            return Err(Error::invalid("endpoint atoms must be finite and nonnegative"));
        }
        let (m1, m2) = Self::interior_moments(&kernel, quad)?;
        let out = Self {
            kernel,
            atom_at_zero,
            atom_at_one,
            moment_one: m1 + atom_at_one,
            moment_two: m2 + atom_at_zero,
        };
        if out.total_mass() <= 0.0 {
            return Err(Error::invalid("bivariate density has zero total mass"));
        }
        Ok(out)
    }

    /// Density whose endpoint atoms absorb the moment deficits
    /// `1 − ∫w h` and `1 − ∫(1−w) h`, clamped at zero.
    pub fn with_deficit_atoms(kernel: DensityKernel, quad: &QuadConfig) -> Result<Self> {
        let (m1, m2) = Self::interior_moments(&kernel, quad)?;
        let atom_at_one = (1.0 - m1).max(0.0);
        let atom_at_zero = (1.0 - m2).max(0.0);
        Ok(Self {
            kernel,
            atom_at_zero,
            atom_at_one,
            moment_one: m1 + atom_at_one,
            moment_two: m2 + atom_at_zero,
        })
    }

    /// Best-effort `(∫w h, ∫(1−w) h)` over the open interval.
    fn interior_moments(kernel: &DensityKernel, quad: &QuadConfig) -> Result<(f64, f64)> {
        let m1 = best_effort(integrate_unit_pair(|w, wb| w * kernel.density(w, wb), quad))?;
        let m2 = best_effort(integrate_unit_pair(|w, wb| wb * kernel.density(w, wb), quad))?;
        Ok((m1, m2))
    }

    pub fn kernel(&self) -> DensityKernel {
        self.kernel
    }

    pub fn density(&self, w: f64) -> f64 {
        self.kernel.density(w, 1.0 - w)
    }

    /// Mass at `w = 0`, i.e. at direction `e2`.
    pub fn atom_at_zero(&self) -> f64 {
        self.atom_at_zero
    }

    /// Mass at `w = 1`, i.e. at direction `e1`.
    pub fn atom_at_one(&self) -> f64 {
        self.atom_at_one
    }

    /// `(∫ s_1 dΨ, ∫ s_2 dΨ)` including atoms.
    pub fn moments(&self) -> (f64, f64) {
        (self.moment_one, self.moment_two)
    }

    pub fn total_mass(&self) -> f64 {
        self.moment_one + self.moment_two
    }

    /// Total mass from a direct quadrature of `h` plus the atoms, independent
    /// of the stored moments.
    pub fn total_mass_direct(&self, quad: &QuadConfig) -> Result<f64> {
        let q = integrate_unit_pair(|w, wb| self.kernel.density(w, wb), quad)?;
        Ok(q.value + self.atom_at_zero + self.atom_at_one)
    }

    /// `∫ F dΨ`. The linear interpolant of `F` between the two endpoints is
    /// subtracted inside the quadrature and added back through the stored
    /// moments, so only the bounded remainder meets the density singularities.
    fn integrate_with(&self, integrand: &dyn Fn(&[f64]) -> f64, quad: &QuadConfig) -> Result<f64> {
        let f_e1 = integrand(&[1.0, 0.0]);
        let f_e2 = integrand(&[0.0, 1.0]);
        let q = integrate_unit_pair(
            |w, wb| {
                let bracket = integrand(&[w, wb]) - w * f_e1 - wb * f_e2;
                if bracket == 0.0 {
                    0.0
                } else {
                    bracket * self.kernel.density(w, wb)
                }
            },
            quad,
        )?;
        Ok(q.value + f_e1 * self.moment_one + f_e2 * self.moment_two)
    }
}

/// Equally weighted sample directions with a common total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    directions: Vec<Direction>,
    mass: f64,
}

impl EmpiricalMeasure {
    pub fn new(directions: Vec<Direction>, mass: f64) -> Result<Self> {
        let first = directions
            .first()
            .ok_or_else(|| Error::invalid("empirical measure needs at least one direction"))?;
        let d = first.dim();
        for s in &directions {
            check_dim(d, s.dim())?;
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("empirical mass must be positive and finite"));
        }
        Ok(Self { directions, mass })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }
}

/// Positive combination of measures of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureMeasure {
    components: Vec<(SpectralMeasure, f64)>,
}

impl MixtureMeasure {
    pub fn new(components: Vec<(SpectralMeasure, f64)>) -> Result<Self> {
        let first =
            components.first().ok_or_else(|| Error::invalid("mixture needs at least one component"))?;
        let d = first.0.dim();
        for (m, w) in &components {
            check_dim(d, m.dim())?;
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::invalid("mixture weights must be positive and finite"));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(SpectralMeasure, f64)] {
        &self.components
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum SpectralMeasure {
    Discrete(DiscreteMeasure),
    BivariateDensity(BivariateDensity),
    Empirical(EmpiricalMeasure),
    Mixture(MixtureMeasure),
}

impl SpectralMeasure {
    pub fn discrete(pairs: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Ok(SpectralMeasure::Discrete(DiscreteMeasure::from_pairs(pairs)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectralMeasure::Discrete(m) => m.dim(),
            SpectralMeasure::BivariateDensity(_) => 2,
            SpectralMeasure::Empirical(m) => m.dim(),
            SpectralMeasure::Mixture(m) => m.components[0].0.dim(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            SpectralMeasure::Discrete(m) => m.atoms.iter().map(|a| a.weight).sum(),
            SpectralMeasure::BivariateDensity(m) => m.total_mass(),
            SpectralMeasure::Empirical(m) => m.mass,
            SpectralMeasure::Mixture(m) => m.components.iter().map(|(c, w)| w * c.total_mass()).sum(),
        }
    }

    /// True when every direction in the support has nonnegative coordinates.
    pub fn is_simplex(&self) -> bool {
        match self {
            SpectralMeasure::Discrete(m) => m.atoms.iter().all(|a| a.direction.is_nonnegative()),
            SpectralMeasure::BivariateDensity(_) => true,
            SpectralMeasure::Empirical(m) => m.directions.iter().all(Direction::is_nonnegative),
            SpectralMeasure::Mixture(m) => m.components.iter().all(|(c, _)| c.is_simplex()),
        }
    }

    pub fn is_quadrature_backed(&self) -> bool {
        match self {
            SpectralMeasure::BivariateDensity(_) => true,
            SpectralMeasure::Mixture(m) => m.components.iter().any(|(c, _)| c.is_quadrature_backed()),
            _ => false,
        }
    }

    /// Validation and ordering tolerance appropriate for this representation.
    pub fn default_tolerance(&self) -> f64 {
        if self.is_quadrature_backed() {
            QUADRATURE_TOL
        } else {
            EXACT_TOL
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectralMeasure::Discrete(_) => "discrete",
            SpectralMeasure::BivariateDensity(_) => "bivariate_density",
            SpectralMeasure::Empirical(_) => "empirical",
            SpectralMeasure::Mixture(_) => "mixture",
        }
    }

    /// Multiplies the measure by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("scale factor must be positive and finite"));
        }
        Ok(match self {
            SpectralMeasure::Discrete(m) => SpectralMeasure::Discrete(DiscreteMeasure {
                atoms: m
                    .atoms
                    .iter()
                    .map(|a| Atom { direction: a.direction.clone(), weight: a.weight * c })
                    .collect(),
            }),
            SpectralMeasure::Empirical(m) => SpectralMeasure::Empirical(EmpiricalMeasure {
                directions: m.directions.clone(),
                mass: m.mass * c,
            }),
            other => SpectralMeasure::Mixture(MixtureMeasure::new(vec![(other.clone(), c)])?),
        })
    }

    pub fn integrate<F>(&self, integrand: F, quad: &QuadConfig) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        self.integrate_dyn(&integrand, quad)
    }

    fn integrate_dyn(&self, integrand: &dyn Fn(&[f64]) -> f64, quad: &QuadConfig) -> Result<f64> {
        match self {
            SpectralMeasure::Discrete(m) => {
                Ok(m.atoms.iter().map(|a| a.weight * integrand(a.direction.coords())).sum())
            }
            SpectralMeasure::BivariateDensity(m) => m.integrate_with(integrand, quad),
            SpectralMeasure::Empirical(m) => {
                let sum: f64 = m.directions.iter().map(|s| integrand(s.coords())).sum();
                Ok(m.mass * sum / m.directions.len() as f64)
            }
            SpectralMeasure::Mixture(m) => {
                let mut total = 0.0;
                for (c, w) in &m.components {
                    total += w * c.integrate_dyn(integrand, quad)?;
                }
                Ok(total)
            }
        }
    }
}

/// `∫ integrand dΨ`: exact for atoms, adaptive quadrature for densities and a
/// mass-scaled mean for empirical measures.
pub fn integrate<F>(measure: &SpectralMeasure, integrand: F, quad: &QuadConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    measure.integrate(integrand, quad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversificationCurve {
    pub alpha: TailIndex,
    pub grid: Vec<Portfolio>,
    pub values: Vec<f64>,
    /// Set when the measure failed canonical validation; the values are then
    /// raw integrals `Ψg_{ξ,α}` rather than diversification coefficients.
    pub non_canonical: bool,
}

impl DiversificationCurve {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.grid.first().map(Portfolio::dim)
    }
}

/// Curve on `grid_size` evenly spaced bivariate portfolios.
pub fn diversification_curve(
    measure: &SpectralMeasure,
    alpha: TailIndex,
    grid_size: usize,
) -> Result<DiversificationCurve> {
    check_dim(2, measure.dim())?;
    let grid = bivariate_grid(grid_size)?;
    diversification_curve_on(measure, alpha, &grid, &QuadConfig::default())
}

/// Curve on an explicit list of portfolios, evaluated in parallel.
pub fn diversification_curve_on(
    measure: &SpectralMeasure,
    alpha: TailIndex,
    grid: &[Portfolio],
    quad: &QuadConfig,
) -> Result<DiversificationCurve> {
    let d = measure.dim();
    for xi in grid {
        check_dim(d, xi.dim())?;
    }
    let report = validate_canonical(measure, measure.default_tolerance(), quad)?;
    let a = alpha.value();
    let values = grid
        .par_iter()
        .map(|xi| measure.integrate(|s| g_value(xi.weights(), a, s), quad))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DiversificationCurve { alpha, grid: grid.to_vec(), values, non_canonical: !report.pass })
}

/// `γ_ξ = Ψf_{ξ,α}`.
pub fn extreme_risk_index(measure: &SpectralMeasure, xi: &Portfolio, alpha: TailIndex) -> Result<f64> {
    extreme_risk_index_with(measure, xi, alpha, &QuadConfig::default())
}

pub fn extreme_risk_index_with(
    measure: &SpectralMeasure,
    xi: &Portfolio,
    alpha: TailIndex,
    quad: &QuadConfig,
) -> Result<f64> {
    check_dim(measure.dim(), xi.dim())?;
    let a = alpha.value();
    measure.integrate(|s| f_value(xi.weights(), a, s), quad)
}

/// `q_d = d^α γ_η / γ_{e1}` with `η` the uniform portfolio.
pub fn aggregation_coefficient(measure: &SpectralMeasure, alpha: TailIndex, d: usize) -> Result<f64> {
    check_dim(measure.dim(), d)?;
    let gamma_eta = extreme_risk_index(measure, &Portfolio::uniform(d)?, alpha)?;
    let gamma_e1 = extreme_risk_index(measure, &Portfolio::unit(d, 0)?, alpha)?;
    if gamma_e1 <= 0.0 {
        return Err(Error::DegenerateMargin { coordinate: 1 });
    }
    Ok((d as f64).powf(alpha.value()) * gamma_eta / gamma_e1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_renormalizes() {
        let s = Direction::new(vec![2.0, -2.0]).unwrap();
        assert_eq!(s.coords(), &[0.5, -0.5]);
        assert!(Direction::new(vec![0.0, 0.0]).is_err());
        assert!(Direction::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn portfolio_validation() {
        assert!(Portfolio::new(vec![0.3, 0.7]).is_ok());
        assert!(Portfolio::new(vec![0.3, 0.8]).is_err());
        assert!(Portfolio::new(vec![-0.1, 1.1]).is_err());
        assert!(Portfolio::bivariate(1.5).is_err());
    }

    #[test]
    fn tail_index_domain() {
        assert!(TailIndex::new(0.0).is_err());
        assert!(TailIndex::new(f64::INFINITY).is_err());
        assert_eq!(TailIndex::new(2.0).unwrap().value(), 2.0);
    }

    #[test]
    fn g_signed_roots() {
        // (1·(0.25)^{1/2} − 0)_+^2 with a negative second coordinate ignored by ξ2 = 0
        assert!((g_value(&[1.0, 0.0], 2.0, &[0.25, -0.75]) - 0.25).abs() < 1e-15);
        assert_eq!(g_value(&[0.5, 0.5], 2.0, &[-0.5, 0.5]), 0.0);
    }

    #[test]
    fn scaled_measure_mass() {
        let m = SpectralMeasure::discrete(vec![(vec![1.0, 0.0], 1.0)]).unwrap();
        assert_eq!(m.scaled(3.0).unwrap().total_mass(), 3.0);
        assert!(m.scaled(0.0).is_err());
    }

    #[test]
    fn discrete_serde_roundtrip() {
        let m = DiscreteMeasure::from_pairs(vec![(vec![0.5, 0.5], 2.0)]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: DiscreteMeasure = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<DiscreteMeasure>(r#"{"atoms":[]}"#).is_err());
    }
}
