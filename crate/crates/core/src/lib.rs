//! Extreme portfolio loss diversification for multivariate regularly varying
//! risk models.
//!
//! The crate computes diversification curves `ξ ↦ Ψ*g_{ξ,α}` of canonical
//! spectral measures, canonicalizes arbitrary spectral measures, decides the
//! integral order between canonical measures and the induced asymptotic
//! portfolio loss order, and ships Monte Carlo samplers and tail estimators
//! for checking the analytic results on simulated data.

pub mod canonicalize;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod models;
pub mod ordering;
pub mod quadrature;
pub mod spectral;

pub use canonicalize::{
    balanced_rescale, canonicalize, canonicalize_discrete, discretize, marginal_weights, rescale_components,
    validate_canonical, CanonicalReport, MarginalWeights, RescaleVector,
};
pub use error::{Error, Result};
pub use grid::{bivariate_grid, random_simplex_grid, simplex_lattice};
pub use models::{
    elliptical_curve, galambos_bivariate, gumbel_bivariate, mixture, psi_comonotone, psi_independent,
    CovarianceMatrix, Model,
};
pub use ordering::{
    apl_verdict, dependence_bounds_check, galpha_check, quadform_check, quadform_simplex_check, AplRule,
    AplVerdict, BoundsReport, MarginalTailRelation, OrderConfig, OrderVerdict, QuadformReport, Relation,
};
pub use quadrature::QuadConfig;
pub use spectral::{
    aggregation_coefficient, diversification_curve, diversification_curve_on, eval_f, eval_g,
    extreme_risk_index, integrate, BivariateDensity, DensityKernel, Direction, DiversificationCurve,
    Portfolio, SpectralMeasure, TailIndex,
};

/// Library version reported by the CLI and the C interface.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
