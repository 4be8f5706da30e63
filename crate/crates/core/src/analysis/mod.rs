//! Error model of the sketch: distributions, closed forms, numerical
//! integration, Monte-Carlo simulation and measurement on real indexes.

pub mod dist;
pub mod formulas;
pub mod profile;
pub mod quadrature;
pub mod simulate;

pub use dist::ValueDist;
pub use formulas::{
    error_cdf, error_cdf_gaussian, error_mean_std, error_second_moment, expected_error, min_sketch_rows,
    prob_error_exceeds, prob_overestimate, prob_overestimate_gaussian, z_statistic, zi_moments, CoordStats,
    SketchParams,
};
pub use profile::{empirical_error_profile, histogram, ErrorProfile};
pub use simulate::{fraction_above, mean_std, simulate_upper_errors, simulate_z, ZSimSpec};
