//! Heatmaps, per-flight CDFs and the truncated path-loss regression.

mod ecdf;
mod heatmap;
mod regression;

pub use ecdf::{ecdf, Ecdf, FlightCdf, FlightKey};
pub use heatmap::{heatmap, idw, HeatmapGrid, HeatmapSettings, InterpolationSpace};
pub use regression::{
    anderson_darling, censored_fraction, default_bounds, fit_log_distance, fit_truncated_family,
    fit_truncated_family_raw, log_distance, ols, reconstruct_band, Envelope, FitSettings, LineFit, NormalityCheck,
    RegressionResult, Selection, TruncatedFit, AD_CRITICAL_5PCT, DEFAULT_BOUND_COUNT, DEFAULT_BOUND_QUANTILE,
    ENVELOPE_POINTS, MIN_FIT_POINTS, THREE_SIGMA_COVERAGE,
};

#[cfg(test)]
mod tests;
