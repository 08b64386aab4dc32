//! Samplers for the model families and empirical tail estimators.

pub mod cloud;
pub mod estimators;
pub mod rng;
pub mod sampling;

pub use cloud::SampleCloud;
pub use estimators::{
    breiman_ratio, default_k, empirical_curve, empirical_gamma, empirical_gamma_ratio, empirical_spectral,
    hill_estimator, stop_loss_check, tail_ratio_series, BreimanRatio, Estimate, MomentSource, StopLossRegime,
    StopLossRow, StopLossTable, TailRatioPoint, TailRatioSeries, BOOTSTRAP_RESAMPLES,
};
pub use sampling::{
    sample_comonotone_pareto, sample_elliptical_t, sample_gumbel_pareto, sample_independent_pareto,
};
