//! Domain types and geometry shared by every pipeline stage.

mod antenna;
mod building;
mod geometry;
mod limit;
mod pathloss;
mod records;
mod route;

pub use antenna::{angular_offset_deg, azimuth_deg, AntennaPattern, Lobe};
pub use building::{BuildingModel, Face, InteriorWall, RayExit};
pub use geometry::{distance_3d, point_segment_distance_2d, segments_intersect, GeoPoint, Rect, Span, MIN_ALTITUDE_M};
pub use limit::{LimitKind, RegulatoryLimit};
pub use pathloss::PathLossModel;
pub use records::{rsrp_in_range, FusedSample, Sample, TelemetryPoint, RSRP_MAX_DBM, RSRP_MIN_DBM};
pub use route::{point_to_polyline_distance, PolylineOffset, Projection, Route, RouteLabel};
