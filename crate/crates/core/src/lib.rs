//! Outdoor emission assessment for indoor private 5G base stations.
//!
//! The pipeline mirrors a UAV measurement campaign: plan constant-altitude
//! routes around the building ([`plan`]), simulate or ingest scanner and
//! drone telemetry logs ([`simulate`], [`fuse`]), turn the fused samples into
//! heatmaps, CDFs and a truncated path-loss regression ([`analyze`]), and
//! check them against regulatory limits ([`comply`]).
//!
//! Geometry and numeric kernels are generic over [`Scalar`] (`f32`/`f64`);
//! the aliases below fix the scalar to `f64`, which is what the log formats
//! and the pipeline use.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod comply;
pub mod error;
pub mod fuse;
pub mod model;
pub mod plan;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{FusedSample, LimitKind, RegulatoryLimit, RouteLabel, Sample, TelemetryPoint};
pub use scalar::Scalar;

pub type GeoPoint = model::GeoPoint<f64>;
pub type Route = model::Route<f64>;
pub type AntennaPattern = model::AntennaPattern<f64>;
pub type BuildingModel = model::BuildingModel<f64>;
pub type PathLossModel = model::PathLossModel<f64>;
pub type Rect = model::Rect<f64>;
pub type Span = model::Span<f64>;
pub type Ecdf = analyze::Ecdf<f64>;
