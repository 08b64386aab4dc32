//! Canonical spectral measures: marginal weights, the atom map to `Ψ*`,
//! balancing rescalers and canonicality checks.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::quadrature::QuadConfig;
use crate::spectral::{signed_pow, Atom, Direction, DiscreteMeasure, SpectralMeasure, TailIndex};

/// Marginal weights below this fraction of the largest one count as zero.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Default number of midpoint atoms used to discretize density measures.
pub const DEFAULT_DISCRETIZATION: usize = 4096;

/// `ν(B_i) = ∫|s_i|^α dΨ(s)` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalWeights {
    nu_b: Vec<f64>,
}

impl MarginalWeights {
    pub fn new(nu_b: Vec<f64>) -> Result<Self> {
        if nu_b.is_empty() {
            return Err(Error::invalid("marginal weights must not be empty"));
        }
        if nu_b.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("marginal weights must be finite and nonnegative"));
        }
        if nu_b.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateMeasure);
        }
        Ok(Self { nu_b })
    }

    pub fn values(&self) -> &[f64] {
        &self.nu_b
    }

    pub fn dim(&self) -> usize {
        self.nu_b.len()
    }

    /// Errors with the first (1-based) coordinate whose weight is negligible.
    pub fn check_nondegenerate(&self) -> Result<()> {
        let max = self.nu_b.iter().cloned().fold(0.0, f64::max);
        match self.nu_b.iter().position(|&v| v <= DEGENERACY_RATIO * max) {
            Some(i) => Err(Error::DegenerateMargin { coordinate: i + 1 }),
            None => Ok(()),
        }
    }

    /// True when all weights agree to relative precision `rel_tol`.
    pub fn is_balanced(&self, rel_tol: f64) -> bool {
        let max = self.nu_b.iter().cloned().fold(0.0, f64::max);
        let min = self.nu_b.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min <= rel_tol * max
    }
}

/// Componentwise positive scale factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleVector {
    w: Vec<f64>,
}

impl RescaleVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("rescale entries must be positive and finite"));
        }
        Ok(Self { w })
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub pass: bool,
    pub tolerance: f64,
    /// `∫|s_i| dΨ` per coordinate.
    pub moments: Vec<f64>,
    /// `|moment_i - 1|` per coordinate.
    pub deviations: Vec<f64>,
}

impl CanonicalReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn marginal_weights(measure: &SpectralMeasure, alpha: TailIndex) -> Result<MarginalWeights> {
    marginal_weights_with(measure, alpha, &QuadConfig::default())
}

pub fn marginal_weights_with(
    measure: &SpectralMeasure,
    alpha: TailIndex,
    quad: &QuadConfig,
) -> Result<MarginalWeights> {
    let a = alpha.value();
    let nu_b = (0..measure.dim())
        .map(|i| measure.integrate(|s| s[i].abs().powf(a), quad))
        .collect::<Result<Vec<_>>>()?;
    MarginalWeights::new(nu_b)
}

/// `w_i = ν(B_i)^{-1/α}`, which equalizes the marginal tails.
pub fn balanced_rescale(nu_b: &MarginalWeights, alpha: TailIndex) -> Result<RescaleVector> {
    nu_b.check_nondegenerate()?;
    let inv = -1.0 / alpha.value();
    RescaleVector::new(nu_b.values().iter().map(|v| v.powf(inv)).collect())
}

/// Maps each atom `(s, w)` to `(U(s)/‖U(s)‖_1, w‖U(s)‖_1)` with
/// `U(s)_i = sign(s_i)|s_i|^α / ν(B_i)`.
pub fn canonicalize_discrete(measure: &SpectralMeasure, alpha: TailIndex) -> Result<SpectralMeasure> {
    let atoms = match measure {
        SpectralMeasure::Discrete(m) => m.atoms().to_vec(),
        SpectralMeasure::Empirical(_) => discretize(measure, DEFAULT_DISCRETIZATION)?.into_atoms(),
        _ => {
            return Err(Error::Unsupported(format!(
                "canonicalize_discrete needs atoms, got a {} measure",
                measure.kind()
            )))
        }
    };
    canonicalize_atoms(atoms, alpha).map(SpectralMeasure::Discrete)
}

fn canonicalize_atoms(atoms: Vec<Atom>, alpha: TailIndex) -> Result<DiscreteMeasure> {
    let a = alpha.value();
    let d =
        atoms.first().map(|x| x.direction.dim()).ok_or_else(|| Error::invalid("no atoms to canonicalize"))?;
    let mut nu = vec![0.0; d];
    for atom in &atoms {
        for (n, s) in nu.iter_mut().zip(atom.direction.coords()) {
            *n += atom.weight * s.abs().powf(a);
        }
    }
    let nu = MarginalWeights::new(nu)?;
    nu.check_nondegenerate()?;
    let out = atoms
        .into_iter()
        .map(|atom| {
            let u: Vec<f64> = atom
                .direction
                .coords()
                .iter()
                .zip(nu.values())
                .map(|(&s, &n)| signed_pow(s, a) / n)
                .collect();
            let norm: f64 = u.iter().map(|x| x.abs()).sum();
            Ok(Atom { direction: Direction::new(u)?, weight: atom.weight * norm })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalizeConfig {
    /// Midpoint atoms used when the input is a density.
    pub atoms: usize,
    pub quad: QuadConfig,
}

impl Default for CanonicalizeConfig {
    fn default() -> Self {
        Self { atoms: DEFAULT_DISCRETIZATION, quad: QuadConfig::default() }
    }
}

/// Canonicalizes any representation; densities and mixtures are discretized first.
pub fn canonicalize(
    measure: &SpectralMeasure,
    alpha: TailIndex,
    cfg: &CanonicalizeConfig,
) -> Result<SpectralMeasure> {
    let atoms = discretize(measure, cfg.atoms)?.into_atoms();
    canonicalize_atoms(atoms, alpha).map(SpectralMeasure::Discrete)
}

/// Atomic approximation with `m` midpoint atoms per density. The endpoint
/// atoms absorb the first-moment deficits of the midpoint sum (clamped at 0),
/// so that `∫ s_i dΨ` is preserved.
pub fn discretize(measure: &SpectralMeasure, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(Error::invalid("discretization needs at least one atom"));
    }
    match measure {
        SpectralMeasure::Discrete(d) => Ok(d.clone()),
        SpectralMeasure::Empirical(e) => {
            let w = e.mass() / e.directions().len() as f64;
            DiscreteMeasure::new(
                e.directions().iter().map(|s| Atom { direction: s.clone(), weight: w }).collect(),
            )
        }
        SpectralMeasure::BivariateDensity(b) => {
            let mut atoms = Vec::with_capacity(m + 2);
            let (mut s1, mut s2) = (0.0, 0.0);
            for j in 0..m {
                let w = (j as f64 + 0.5) / m as f64;
                let wb = (m as f64 - j as f64 - 0.5) / m as f64;
                let weight = b.kernel().density(w, wb) / m as f64;
                if weight > 0.0 && weight.is_finite() {
                    s1 += w * weight;
                    s2 += wb * weight;
                    atoms.push(Atom { direction: Direction::new(vec![w, wb])?, weight });
                }
            }
            let (m1, m2) = b.moments();
            let at_one = (m1 - s1).max(0.0);
            let at_zero = (m2 - s2).max(0.0);
            if at_one > 0.0 {
                atoms.push(Atom { direction: Direction::unit(2, 0)?, weight: at_one });
            }
            if at_zero > 0.0 {
                atoms.push(Atom { direction: Direction::unit(2, 1)?, weight: at_zero });
            }
            DiscreteMeasure::new(atoms)
        }
        SpectralMeasure::Mixture(mix) => {
            let mut atoms = Vec::new();
            for (c, w) in mix.components() {
                atoms.extend(
                    discretize(c, m)?
                        .into_atoms()
                        .into_iter()
                        .map(|a| Atom { direction: a.direction, weight: a.weight * w }),
                );
            }
            DiscreteMeasure::new(atoms)
        }
    }
}

/// Pushforward of a discrete measure under `s ↦ v∘s / ‖v∘s‖_1`, with weights
/// `w‖v∘s‖_1^α` so that `ν(B_i)` becomes `v_i^α ν(B_i)`.
pub fn rescale_components(
    measure: &SpectralMeasure,
    v: &RescaleVector,
    alpha: TailIndex,
) -> Result<SpectralMeasure> {
    check_dim(measure.dim(), v.values().len())?;
    let atoms = match measure {
        SpectralMeasure::Discrete(m) => m.atoms(),
        _ => {
            return Err(Error::Unsupported(
                "componentwise rescaling is implemented for discrete measures".into(),
            ))
        }
    };
    let a = alpha.value();
    let out = atoms
        .iter()
        .map(|atom| {
            let vs: Vec<f64> = atom.direction.coords().iter().zip(v.values()).map(|(s, w)| s * w).collect();
            let norm: f64 = vs.iter().map(|x| x.abs()).sum();
            Ok(Atom { direction: Direction::new(vs)?, weight: atom.weight * norm.powf(a) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralMeasure::Discrete(DiscreteMeasure::new(out)?))
}

/// Checks `∫|s_i| dΨ = 1` for every coordinate.
pub fn validate_canonical(measure: &SpectralMeasure, tol: f64, quad: &QuadConfig) -> Result<CanonicalReport> {
    let moments =
        (0..measure.dim()).map(|i| measure.integrate(|s| s[i].abs(), quad)).collect::<Result<Vec<_>>>()?;
    let deviations: Vec<f64> = moments.iter().map(|m| (m - 1.0).abs()).collect();
    let pass = deviations.iter().all(|&dv| dv <= tol);
    Ok(CanonicalReport { pass, tolerance: tol, moments, deviations })
}

/// Errors with [`Error::NotCanonical`] unless the measure passes at its
/// default tolerance.
pub fn require_canonical(measure: &SpectralMeasure, quad: &QuadConfig) -> Result<()> {
    let report = validate_canonical(measure, measure.default_tolerance(), quad)?;
    if report.pass {
        Ok(())
    } else {
        Err(Error::NotCanonical { deviation: report.max_deviation() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_margin_named() {
        let m = SpectralMeasure::discrete(vec![(vec![-1.0, 0.0], 1.0)]).unwrap();
        let a = TailIndex::new(1.0).unwrap();
        assert_eq!(marginal_weights(&m, a).unwrap().values(), &[1.0, 0.0]);
        assert!(matches!(canonicalize_discrete(&m, a), Err(Error::DegenerateMargin { coordinate: 2 })));
    }

    #[test]
    fn all_zero_weights_rejected() {
        assert!(matches!(MarginalWeights::new(vec![0.0, 0.0]), Err(Error::DegenerateMeasure)));
    }

    #[test]
    fn rescale_scales_marginal_weights() {
        let m = SpectralMeasure::discrete(vec![(vec![0.2, 0.8], 1.0), (vec![0.7, -0.3], 0.5)]).unwrap();
        let a = TailIndex::new(1.5).unwrap();
        let v = RescaleVector::new(vec![2.0, 0.5]).unwrap();
        let before = marginal_weights(&m, a).unwrap();
        let after = marginal_weights(&rescale_components(&m, &v, a).unwrap(), a).unwrap();
        for i in 0..2 {
            let expect = v.values()[i].powf(1.5) * before.values()[i];
            assert!((after.values()[i] - expect).abs() < 1e-14);
        }
    }
}
