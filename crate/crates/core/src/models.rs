//! Model families as canonical spectral measures or closed-form curves.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::quadrature::QuadConfig;
use crate::spectral::{
    diversification_curve_on, Atom, BivariateDensity, DensityKernel, Direction, DiscreteMeasure,
    DiversificationCurve, MixtureMeasure, Portfolio, SpectralMeasure, TailIndex,
};

/// `Σ δ_{e_i}`: asymptotically independent components.
pub fn psi_independent(d: usize) -> Result<SpectralMeasure> {
    if d < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {d}")));
    }
    let atoms = (0..d)
        .map(|i| Ok(Atom { direction: Direction::unit(d, i)?, weight: 1.0 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralMeasure::Discrete(DiscreteMeasure::new(atoms)?))
}

/// `d·δ_{(1/d,...,1/d)}`: asymptotically comonotone components.
pub fn psi_comonotone(d: usize) -> Result<SpectralMeasure> {
    if d < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {d}")));
    }
    Ok(SpectralMeasure::Discrete(DiscreteMeasure::new(vec![Atom {
        direction: Direction::barycentre(d)?,
        weight: d as f64,
    }])?))
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Canonical Gumbel spectral density at `(w, wb)` with `wb = 1 - w`:
/// `(θ−1)(w·wb)^{θ−2}(w^θ + wb^θ)^{1/θ−2}`. Zero for `θ = 1` and at the endpoints.
pub fn gumbel_density(theta: f64, w: f64, wb: f64) -> f64 {
    if theta <= 1.0 || w <= 0.0 || wb <= 0.0 {
        return 0.0;
    }
    let (lw, lwb) = (w.ln(), wb.ln());
    let log_h = (theta - 1.0).ln()
        + (theta - 2.0) * (lw + lwb)
        + (1.0 / theta - 2.0) * log_sum_exp(theta * lw, theta * lwb);
    log_h.exp()
}

/// Canonical Galambos spectral density at `(w, wb)`:
/// `(1+θ)(w·wb)^{−θ−2}(w^{−θ} + wb^{−θ})^{−1/θ−2}`.
pub fn galambos_density(theta: f64, w: f64, wb: f64) -> f64 {
    if theta <= 0.0 || w <= 0.0 || wb <= 0.0 {
        return 0.0;
    }
    let (lw, lwb) = (w.ln(), wb.ln());
    let log_h = (1.0 + theta).ln()
        + (-theta - 2.0) * (lw + lwb)
        + (-1.0 / theta - 2.0) * log_sum_exp(-theta * lw, -theta * lwb);
    log_h.exp()
}

/// Gumbel stable tail dependence function `(x^θ + y^θ)^{1/θ}`.
pub fn gumbel_stdf(theta: f64, x: f64, y: f64) -> f64 {
    (x.powf(theta) + y.powf(theta)).powf(1.0 / theta)
}

/// Galambos stable tail dependence function `x + y − (x^{−θ} + y^{−θ})^{−1/θ}`.
pub fn galambos_stdf(theta: f64, x: f64, y: f64) -> f64 {
    x + y - (x.powf(-theta) + y.powf(-theta)).powf(-1.0 / theta)
}

pub fn gumbel_bivariate(theta: f64) -> Result<SpectralMeasure> {
    gumbel_bivariate_with(theta, &QuadConfig::default())
}

/// Gumbel family, `θ ≥ 1`; `θ = 1` gives the independence measure.
///
/// For `θ` close to 1 part of the mass sits closer to the vertices than
/// floating point can resolve; the endpoint atoms take up that deficit.
pub fn gumbel_bivariate_with(theta: f64, quad: &QuadConfig) -> Result<SpectralMeasure> {
    if !(theta.is_finite() && theta >= 1.0) {
        return Err(Error::invalid(format!("Gumbel theta must be >= 1, got {theta}")));
    }
    if theta == 1.0 {
        return psi_independent(2);
    }
    Ok(SpectralMeasure::BivariateDensity(BivariateDensity::with_deficit_atoms(
        DensityKernel::Gumbel { theta },
        quad,
    )?))
}

pub fn galambos_bivariate(theta: f64) -> Result<SpectralMeasure> {
    galambos_bivariate_with(theta, &QuadConfig::default())
}

/// Galambos family, `θ > 0`, with endpoint atoms from the moment-deficit rule.
pub fn galambos_bivariate_with(theta: f64, quad: &QuadConfig) -> Result<SpectralMeasure> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::invalid(format!("Galambos theta must be > 0, got {theta}")));
    }
    Ok(SpectralMeasure::BivariateDensity(BivariateDensity::with_deficit_atoms(
        DensityKernel::Galambos { theta },
        quad,
    )?))
}

/// Symmetric matrix with positive diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::invalid("covariance matrix must not be empty"));
        }
        for r in &rows {
            check_dim(d, r.len())?;
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::from_matrix(m)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid("covariance matrix must be square and non-empty"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance entries must be finite"));
        }
        let d = m.nrows();
        for i in 0..d {
            if m[(i, i)] <= 0.0 {
                return Err(Error::invalid(format!("covariance diagonal entry {} is not positive", i + 1)));
            }
            for j in 0..i {
                let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid("covariance matrix must be symmetric"));
                }
            }
        }
        Ok(Self { m })
    }

    /// `[[1, ρ], [ρ, 1]]`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::invalid(format!("correlation must lie in [-1, 1], got {rho}")));
        }
        Self::new(vec![vec![1.0, rho], vec![rho, 1.0]])
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `diag(C)^{-1/2} C diag(C)^{-1/2}`.
    pub fn correlation(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.m[(i, j)] / (self.m[(i, i)] * self.m[(j, j)]).sqrt())
    }

    /// `vᵀCv` for an arbitrary vector.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let x = DVector::from_column_slice(v);
        Ok((x.transpose() * &self.m * &x)[(0, 0)])
    }
}

impl TryFrom<Vec<Vec<f64>>> for CovarianceMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        CovarianceMatrix::new(rows)
    }
}

impl From<CovarianceMatrix> for Vec<Vec<f64>> {
    fn from(c: CovarianceMatrix) -> Self {
        let d = c.dim();
        (0..d).map(|i| (0..d).map(|j| c.m[(i, j)]).collect()).collect()
    }
}

/// `(ξᵀC̃ξ)^{α/2} / 2` with `C̃` the correlation matrix of `C`.
pub fn elliptical_value(c: &CovarianceMatrix, alpha: TailIndex, xi: &Portfolio) -> Result<f64> {
    check_dim(c.dim(), xi.dim())?;
    let r = CovarianceMatrix { m: c.correlation() };
    let q = r.quadratic_form(xi.weights())?;
    if q < -1e-12 {
        return Err(Error::invalid(format!(
            "quadratic form is negative ({q}) at portfolio {:?}",
            xi.weights()
        )));
    }
    Ok(q.max(0.0).powf(alpha.value() / 2.0) / 2.0)
}

/// Closed-form diversification curve of the elliptical family with
/// generalized covariance `C`.
pub fn elliptical_curve(
    c: &CovarianceMatrix,
    alpha: TailIndex,
    grid: &[Portfolio],
) -> Result<DiversificationCurve> {
    let values = grid.iter().map(|xi| elliptical_value(c, alpha, xi)).collect::<Result<Vec<_>>>()?;
    Ok(DiversificationCurve { alpha, grid: grid.to_vec(), values, non_canonical: false })
}

/// Convex combination `Σ p_k Ψ_k`. Atomic inputs are merged into one
/// discrete measure.
pub fn mixture(measures: &[SpectralMeasure], mix_weights: &[f64]) -> Result<SpectralMeasure> {
    check_dim(measures.len(), mix_weights.len())?;
    if measures.is_empty() {
        return Err(Error::invalid("mixture needs at least one measure"));
    }
    if mix_weights.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid("mixture weights must be finite and nonnegative"));
    }
    let total: f64 = mix_weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
    }
    let d = measures[0].dim();
    for m in measures {
        check_dim(d, m.dim())?;
    }
    let kept: Vec<(SpectralMeasure, f64)> =
        measures.iter().zip(mix_weights).filter(|(_, &p)| p > 0.0).map(|(m, &p)| (m.clone(), p)).collect();
    if kept.iter().all(|(m, _)| matches!(m, SpectralMeasure::Discrete(_))) {
        let mut atoms = Vec::new();
        for (m, p) in &kept {
            if let SpectralMeasure::Discrete(dm) = m {
                atoms.extend(
                    dm.atoms().iter().map(|a| Atom { direction: a.direction.clone(), weight: a.weight * p }),
                );
            }
        }
        return Ok(SpectralMeasure::Discrete(DiscreteMeasure::new(atoms)?));
    }
    Ok(SpectralMeasure::Mixture(MixtureMeasure::new(kept)?))
}

/// A named model family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    Independent { d: usize },
    Comonotone { d: usize },
    Gumbel { theta: f64 },
    Galambos { theta: f64 },
    Elliptical { covariance: CovarianceMatrix },
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Independent { d } | Model::Comonotone { d } => *d,
            Model::Gumbel { .. } | Model::Galambos { .. } => 2,
            Model::Elliptical { covariance } => covariance.dim(),
        }
    }

    /// Canonical spectral measure; `None` for the elliptical family, whose
    /// curves come from the closed form.
    pub fn measure(&self, quad: &QuadConfig) -> Result<Option<SpectralMeasure>> {
        Ok(Some(match self {
            Model::Independent { d } => psi_independent(*d)?,
            Model::Comonotone { d } => psi_comonotone(*d)?,
            Model::Gumbel { theta } => gumbel_bivariate_with(*theta, quad)?,
            Model::Galambos { theta } => galambos_bivariate_with(*theta, quad)?,
            Model::Elliptical { .. } => return Ok(None),
        }))
    }

    pub fn curve(
        &self,
        alpha: TailIndex,
        grid: &[Portfolio],
        quad: &QuadConfig,
    ) -> Result<DiversificationCurve> {
        match self {
            Model::Elliptical { covariance } => elliptical_curve(covariance, alpha, grid),
            _ => {
                let m = self.measure(quad)?.expect("non-elliptical models have measures");
                diversification_curve_on(&m, alpha, grid, quad)
            }
        }
    }

    pub fn is_quadrature_backed(&self) -> bool {
        matches!(self, Model::Gumbel { theta } if *theta > 1.0) || matches!(self, Model::Galambos { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Independent { d } | Model::Comonotone { d } if *d < 2 => {
                Err(Error::invalid(format!("dimension must be at least 2, got {d}")))
            }
            Model::Gumbel { theta } if !(theta.is_finite() && *theta >= 1.0) => {
                Err(Error::invalid(format!("Gumbel theta must be >= 1, got {theta}")))
            }
            Model::Galambos { theta } if !(theta.is_finite() && *theta > 0.0) => {
                Err(Error::invalid(format!("Galambos theta must be > 0, got {theta}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Independent { d } => write!(f, "independent:{d}"),
            Model::Comonotone { d } => write!(f, "comonotone:{d}"),
            Model::Gumbel { theta } => write!(f, "gumbel:{theta}"),
            Model::Galambos { theta } => write!(f, "galambos:{theta}"),
            Model::Elliptical { covariance } => {
                let c = covariance.matrix();
                if c.nrows() == 2 && c[(0, 0)] == 1.0 && c[(1, 1)] == 1.0 {
                    write!(f, "elliptical:{}", c[(0, 1)])
                } else {
                    write!(f, "elliptical:{:?}", Vec::<Vec<f64>>::from(covariance.clone()))
                }
            }
        }
    }
}

/// Parses `family[:param]`, e.g. `gumbel:1.4`, `independent:3`, `elliptical:0.5`.
impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (family, param) = match s.split_once(':') {
            Some((f, p)) => (f.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let num = |name: &str| -> Result<f64> {
            let p = param
                .ok_or_else(|| Error::invalid(format!("{family} needs a parameter, e.g. {family}:{name}")))?;
            p.parse::<f64>().map_err(|_| Error::invalid(format!("cannot parse parameter '{p}' of {family}")))
        };
        let dim = || -> Result<usize> {
            match param {
                None => Ok(2),
                Some(p) => p
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("cannot parse dimension '{p}' of {family}"))),
            }
        };
        let model = match family.to_ascii_lowercase().as_str() {
            "independent" | "independence" => Model::Independent { d: dim()? },
            "comonotone" => Model::Comonotone { d: dim()? },
            "gumbel" => Model::Gumbel { theta: num("2")? },
            "galambos" => Model::Galambos { theta: num("1")? },
            "elliptical" => Model::Elliptical { covariance: CovarianceMatrix::bivariate(num("0.5")?)? },
            other => return Err(Error::invalid(format!("unknown model family '{other}'"))),
        };
        model.validate()?;
        Ok(model)
    }
}
