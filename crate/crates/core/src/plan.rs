//! Waypoint routes for the main-lobe, side-lobe and over-roof test cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AntennaPattern, BuildingModel, GeoPoint, Route, RouteLabel, Span};
use crate::scalar::Scalar;

pub const TERRAIN_CUT_ROUTE_ID: u32 = 1;
pub const MAIN_LOBE_ROUTE_ID: u32 = 2;
pub const SIDE_LOBE_ROUTE_ID: u32 = 3;
pub const FIRST_ROOF_ROUTE_ID: u32 = 4;

/// All routes of one measurement campaign. Serialized as the plan JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignPlan {
    pub routes: Vec<Route<f64>>,
    pub heights_main: Vec<f64>,
    pub height_side: f64,
    pub height_roof: f64,
    pub repeats: u32,
}

impl CampaignPlan {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::InvalidInput("repeats must be at least 1".into()));
        }
        if self.heights_main.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("main-lobe heights must be strictly increasing".into()));
        }
        for r in &self.routes {
            Route::new(r.id, r.label, r.leg_altitude, r.waypoints.clone())?;
        }
        Ok(())
    }

    pub fn routes_with_label(&self, label: RouteLabel) -> impl Iterator<Item = &Route<f64>> {
        self.routes.iter().filter(move |r| r.label == label)
    }
}

fn exit_distance_2d<T: Scalar>(building: &BuildingModel<T>, from: [T; 2], dir: [T; 2]) -> Result<T> {
    let fp = &building.footprint;
    let zero = T::zero();
    let t_of = |d: T, lo: T, hi: T, o: T| -> T {
        if d > zero {
            (hi - o) / d
        } else if d < zero {
            (lo - o) / d
        } else {
            T::infinity()
        }
    };
    let t = t_of(dir[0], fp.x_min, fp.x_max, from[0]).min(t_of(dir[1], fp.y_min, fp.y_max, from[1]));
    if !(t.is_finite() && t >= zero) {
        return Err(Error::InvalidInput("antenna must be inside the building footprint".into()));
    }
    Ok(t)
}

/// Straight sweep perpendicular to `azimuth`, centered on the ray from `bs`
/// along `azimuth` at `standoff` beyond the wall that ray exits through.
fn perpendicular_sweep<T: Scalar>(
    building: &BuildingModel<T>,
    bs: &GeoPoint<T>,
    azimuth_deg: T,
    standoff: T,
    length: T,
) -> Result<([T; 2], [T; 2])> {
    if !(standoff.is_finite() && standoff > T::zero()) {
        return Err(Error::InvalidInput("standoff must be positive".into()));
    }
    if !(length.is_finite() && length > T::zero()) {
        return Err(Error::InvalidInput("route length must be positive".into()));
    }
    let az = azimuth_deg.to_radians();
    let dir = [az.sin(), az.cos()];
    let perp = [-dir[1], dir[0]];
    let t = exit_distance_2d(building, bs.horizontal(), dir)? + standoff;
    let center = [bs.x + t * dir[0], bs.y + t * dir[1]];
    let half = length / T::lit(2.0);
    let a = [center[0] - half * perp[0], center[1] - half * perp[1]];
    let b = [center[0] + half * perp[0], center[1] + half * perp[1]];
    if building.footprint.intersects_segment(a, b) {
        return Err(Error::RouteIntersectsBuilding);
    }
    Ok((a, b))
}

/// One straight route per height, perpendicular to boresight, all sharing
/// the same ground track.
pub fn plan_main_lobe<T: Scalar>(
    building: &BuildingModel<T>,
    antenna: &AntennaPattern<T>,
    bs: &GeoPoint<T>,
    heights: &[T],
    standoff: T,
    length: T,
) -> Result<Vec<Route<T>>> {
    if heights.is_empty() {
        return Err(Error::InvalidInput("at least one height is required".into()));
    }
    let (a, b) = perpendicular_sweep(building, bs, antenna.boresight_azimuth_deg, standoff, length)?;
    heights
        .iter()
        .map(|&h| Route::straight(MAIN_LOBE_ROUTE_ID, RouteLabel::MainLobe, h, a, b))
        .collect()
}

/// Side-lobe sweep: the main-lobe construction with boresight rotated 90°
/// clockwise, so an east-facing antenna gets a route along the south wall.
pub fn plan_side_lobe<T: Scalar>(
    building: &BuildingModel<T>,
    antenna: &AntennaPattern<T>,
    bs: &GeoPoint<T>,
    height: T,
    standoff: T,
    length: T,
) -> Result<Route<T>> {
    let (a, b) = perpendicular_sweep(building, bs, antenna.boresight_azimuth_deg + T::lit(90.0), standoff, length)?;
    Route::straight(SIDE_LOBE_ROUTE_ID, RouteLabel::SideLobe, height, a, b)
}

/// Clips `route` to the longest prefix that avoids every masked arclength
/// interval.
pub fn truncate_for_terrain<T: Scalar>(route: &Route<T>, mask: &[Span<T>]) -> Result<Route<T>> {
    let length = route.length();
    for s in mask {
        if !s.is_valid() || s.from < T::zero() || s.to > length {
            return Err(Error::InvalidInput(format!(
                "terrain mask interval [{}, {}] outside route arclength [0, {length}]",
                s.from, s.to
            )));
        }
    }
    let cut = match mask.iter().map(|s| s.from).reduce(T::min) {
        None => return Ok(route.clone()),
        Some(c) => c,
    };
    if cut <= T::zero() {
        return Err(Error::RouteFullyMasked);
    }
    let mut waypoints = vec![route.waypoints[0]];
    let mut walked = T::zero();
    for w in route.waypoints.windows(2) {
        let leg = w[0].horizontal_distance(&w[1]);
        if walked + leg >= cut {
            break;
        }
        walked = walked + leg;
        waypoints.push(w[1]);
    }
    waypoints.push(route.point_at(cut));
    Route::new(route.id, route.label, route.leg_altitude, waypoints)
}

/// Parallel passes over the roof along boresight, flown front to back,
/// spanning the footprint plus `margin` on both ends.
pub fn plan_roof<T: Scalar>(
    building: &BuildingModel<T>,
    antenna: &AntennaPattern<T>,
    height: T,
    n_passes: usize,
    margin: T,
) -> Result<Vec<Route<T>>> {
    if !(height > building.roof_height_m) {
        return Err(Error::InvalidInput(format!(
            "roof pass height {height} must exceed the roof at {}",
            building.roof_height_m
        )));
    }
    if n_passes == 0 {
        return Err(Error::InvalidInput("at least one roof pass is required".into()));
    }
    if !(margin.is_finite() && margin >= T::zero()) {
        return Err(Error::InvalidInput("roof margin must be non-negative".into()));
    }
    let along = antenna.boresight_unit();
    let across = [-along[1], along[0]];
    let corners = building.footprint.corners();
    let dot = |p: [T; 2], u: [T; 2]| p[0] * u[0] + p[1] * u[1];
    let (mut s_min, mut s_max, mut c_min, mut c_max) = (T::infinity(), T::neg_infinity(), T::infinity(), T::neg_infinity());
    for c in corners {
        s_min = s_min.min(dot(c, along));
        s_max = s_max.max(dot(c, along));
        c_min = c_min.min(dot(c, across));
        c_max = c_max.max(dot(c, across));
    }
    let (front, back) = (s_max + margin, s_min - margin);
    let width = (c_max - c_min) / T::lit(n_passes as f64);
    (0..n_passes)
        .map(|i| {
            let c = c_min + (T::lit(i as f64) + T::lit(0.5)) * width;
            let at = |s: T| [s * along[0] + c * across[0], s * along[1] + c * across[1]];
            Route::straight(FIRST_ROOF_ROUTE_ID + i as u32, RouteLabel::BackLobe, height, at(front), at(back))
        })
        .collect()
}

/// Geometry parameters of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanParameters {
    pub heights_main_m: Vec<f64>,
    pub main_standoff_m: f64,
    pub main_length_m: f64,
    /// Arclength intervals of the lowest main-lobe sweep blocked by terrain;
    /// a non-empty mask turns that sweep into the shortened route 1.
    #[serde(default)]
    pub terrain_mask_m: Vec<Span<f64>>,
    pub side_height_m: f64,
    pub side_standoff_m: f64,
    pub side_length_m: f64,
    /// Final stretch of the side-lobe sweep flown under manual override and
    /// left out of the automated route.
    #[serde(default)]
    pub side_manual_tail_m: f64,
    pub roof_height_m: f64,
    pub roof_passes: usize,
    pub roof_margin_m: f64,
    pub repeats: u32,
}

/// Builds the full campaign: main-lobe sweeps (route 2, and route 1 when the
/// lowest one is cut by terrain), the side-lobe sweep (route 3) and the
/// over-roof passes (routes 4 and up).
pub fn build_campaign(
    building: &BuildingModel<f64>,
    antenna: &AntennaPattern<f64>,
    bs: &GeoPoint<f64>,
    params: &PlanParameters,
) -> Result<CampaignPlan> {
    let mut main = plan_main_lobe(
        building,
        antenna,
        bs,
        &params.heights_main_m,
        params.main_standoff_m,
        params.main_length_m,
    )?;
    if !params.terrain_mask_m.is_empty() {
        let mut cut = truncate_for_terrain(&main[0], &params.terrain_mask_m)?;
        cut.id = TERRAIN_CUT_ROUTE_ID;
        main[0] = cut;
    }
    let mut side = plan_side_lobe(building, antenna, bs, params.side_height_m, params.side_standoff_m, params.side_length_m)?;
    if params.side_manual_tail_m > 0.0 {
        let len = side.length();
        side = truncate_for_terrain(&side, &[Span::new(len - params.side_manual_tail_m, len)])?;
    }
    let roof = plan_roof(building, antenna, params.roof_height_m, params.roof_passes, params.roof_margin_m)?;

    let mut routes = main;
    routes.push(side);
    routes.extend(roof);
    let plan = CampaignPlan {
        routes,
        heights_main: params.heights_main_m.clone(),
        height_side: params.side_height_m,
        height_roof: params.roof_height_m,
        repeats: params.repeats,
    };
    plan.validate()?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::model::{Rect, Span};

    fn building() -> BuildingModel<f64> {
        BuildingModel {
            footprint: Rect::new(-30.0, 10.0, -40.0, 40.0),
            roof_height_m: 12.0,
            wall_loss_db: 20.0,
            window_loss_db: 5.0,
            east_windows: vec![],
            roof_windows: vec![],
            interior_walls: vec![],
            interior_wall_loss_db: 5.0,
            max_interior_walls: 2,
        }
    }

    fn east_antenna() -> AntennaPattern<f64> {
        AntennaPattern {
            boresight_azimuth_deg: 90.0,
            main_gain_dbi: 15.0,
            side_gain_dbi: 5.0,
            back_gain_dbi: 0.0,
            main_halfwidth_deg: 60.0,
            side_sector_deg: 120.0,
        }
    }

    fn bs() -> GeoPoint<f64> {
        GeoPoint::new(0.0, 0.0, 3.0)
    }

    #[test]
    fn six_main_lobe_heights() {
        let heights = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
        let routes = plan_main_lobe(&building(), &east_antenna(), &bs(), &heights, 15.0, 80.0).unwrap();
        assert_eq!(routes.len(), 6);
        for (r, h) in routes.iter().zip(heights) {
            assert_eq!(r.leg_altitude, h);
            assert_eq!(r.waypoints[0].horizontal(), routes[0].waypoints[0].horizontal());
            assert_eq!(r.waypoints[1].horizontal(), routes[0].waypoints[1].horizontal());
        }
    }

    #[test]
    fn single_height_route() {
        let routes = plan_main_lobe(&building(), &east_antenna(), &bs(), &[5.0], 15.0, 80.0).unwrap();
        assert_eq!(routes.len(), 1);
        assert_eq!(routes[0].leg_altitude, 5.0);
    }

    #[test]
    fn east_boresight_gives_north_south_sweep() {
        let r = &plan_main_lobe(&building(), &east_antenna(), &bs(), &[5.0], 15.0, 80.0).unwrap()[0];
        let (a, b) = (r.waypoints[0], r.waypoints[1]);
        assert_abs_diff_eq!(a.x, 25.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.x, 25.0, epsilon = 1e-9);
        assert_abs_diff_eq!((a.y - b.y).abs(), 80.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.y + b.y, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn main_lobe_single_precision() {
        let b = BuildingModel {
            footprint: Rect::new(-30.0f32, 10.0, -40.0, 40.0),
            roof_height_m: 12.0,
            wall_loss_db: 20.0,
            window_loss_db: 5.0,
            east_windows: vec![],
            roof_windows: vec![],
            interior_walls: vec![],
            interior_wall_loss_db: 5.0,
            max_interior_walls: 2,
        };
        let ant = AntennaPattern::<f32> {
            boresight_azimuth_deg: 90.0,
            main_gain_dbi: 15.0,
            side_gain_dbi: 5.0,
            back_gain_dbi: 0.0,
            main_halfwidth_deg: 60.0,
            side_sector_deg: 120.0,
        };
        let r = plan_main_lobe(&b, &ant, &GeoPoint::new(0.0f32, 0.0, 3.0), &[4.0f32], 15.0, 80.0).unwrap();
        assert!((r[0].length() - 80.0).abs() < 1e-3);
    }

    #[test]
    fn sweep_through_building_is_rejected() {
        // long sweep close to a tilted boresight clips the footprint corner
        let mut ant = east_antenna();
        ant.boresight_azimuth_deg = 60.0;
        let err = plan_main_lobe(&building(), &ant, &bs(), &[4.0], 1.0, 200.0).unwrap_err();
        assert!(matches!(err, Error::RouteIntersectsBuilding));
        assert!(plan_main_lobe(&building(), &east_antenna(), &bs(), &[4.0], 0.0, 80.0).is_err());
        assert!(plan_main_lobe(&building(), &east_antenna(), &bs(), &[], 10.0, 80.0).is_err());
    }

    #[test]
    fn side_lobe_runs_along_south_wall() {
        let r = plan_side_lobe(&building(), &east_antenna(), &bs(), 5.0, 10.0, 40.0).unwrap();
        assert_eq!(r.label, RouteLabel::SideLobe);
        for w in &r.waypoints {
            assert_abs_diff_eq!(w.y, -50.0, epsilon = 1e-9);
            assert_eq!(w.z, 5.0);
        }
    }

    fn straight(len: f64) -> Route<f64> {
        Route::straight(2, RouteLabel::MainLobe, 2.0, [25.0, -len / 2.0], [25.0, len / 2.0]).unwrap()
    }

    #[test]
    fn empty_mask_keeps_route() {
        let r = straight(80.0);
        assert_eq!(truncate_for_terrain(&r, &[]).unwrap(), r);
    }

    #[test]
    fn mask_on_final_thirty_percent() {
        let r = straight(80.0);
        let cut = truncate_for_terrain(&r, &[Span::new(56.0, 80.0)]).unwrap();
        assert_abs_diff_eq!(cut.length(), 0.7 * 80.0, epsilon = 1e-9);
    }

    /// Oracle: walk the polyline in 1 cm steps and stop at the first masked
    /// arclength.
    fn walked_prefix(route: &Route<f64>, mask: &[Span<f64>]) -> f64 {
        let step = 0.01;
        let mut s = 0.0;
        while s <= route.length() {
            if mask.iter().any(|m| m.contains(s)) {
                return s;
            }
            s += step;
        }
        route.length()
    }

    #[test]
    fn mask_in_middle_keeps_prefix() {
        let r = Route::new(
            2,
            RouteLabel::MainLobe,
            2.0,
            vec![GeoPoint::new(20.0, -40.0, 2.0), GeoPoint::new(25.0, -10.0, 2.0), GeoPoint::new(25.0, 40.0, 2.0)],
        )
        .unwrap();
        let mask = [Span::new(45.0, 50.0), Span::new(60.0, 62.0)];
        let expected = walked_prefix(&r, &mask);
        let cut = truncate_for_terrain(&r, &mask).unwrap();
        assert_abs_diff_eq!(cut.length(), expected, epsilon = 0.011);
        assert_eq!(cut.waypoints.len(), 3);
        assert_eq!(cut.waypoints[1], r.waypoints[1]);
    }

    #[test]
    fn fully_masked_route_is_an_error() {
        let r = straight(80.0);
        assert!(matches!(truncate_for_terrain(&r, &[Span::new(0.0, 80.0)]), Err(Error::RouteFullyMasked)));
        assert!(truncate_for_terrain(&r, &[Span::new(70.0, 90.0)]).is_err());
    }

    #[test]
    fn three_roof_passes() {
        let routes = plan_roof(&building(), &east_antenna(), 18.0, 3, 10.0).unwrap();
        assert_eq!(routes.len(), 3);
        assert_eq!(routes.iter().map(|r| r.id).collect::<Vec<_>>(), vec![4, 5, 6]);
        for r in &routes {
            assert!(r.waypoints.iter().all(|w| w.z == 18.0));
            // east to west, footprint plus margin
            assert_abs_diff_eq!(r.waypoints[0].x, 20.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.waypoints[1].x, -40.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.waypoints[0].y, r.waypoints[1].y, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_roof_pass_is_centered() {
        let routes = plan_roof(&building(), &east_antenna(), 18.0, 1, 5.0).unwrap();
        assert_eq!(routes.len(), 1);
        assert_abs_diff_eq!(routes[0].waypoints[0].y, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn roof_pass_below_roof_is_an_error() {
        assert!(plan_roof(&building(), &east_antenna(), 11.0, 3, 5.0).is_err());
    }

    #[test]
    fn campaign_plan_round_trips_through_json() {
        let params = PlanParameters {
            heights_main_m: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            main_standoff_m: 15.0,
            main_length_m: 80.0,
            terrain_mask_m: vec![Span::new(60.0, 80.0)],
            side_height_m: 5.0,
            side_standoff_m: 10.0,
            side_length_m: 40.0,
            side_manual_tail_m: 4.0,
            roof_height_m: 18.0,
            roof_passes: 3,
            roof_margin_m: 10.0,
            repeats: 2,
        };
        let plan = build_campaign(&building(), &east_antenna(), &bs(), &params).unwrap();
        let ids: Vec<u32> = plan.routes.iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![1, 2, 2, 2, 2, 2, 3, 4, 5, 6]);
        assert_abs_diff_eq!(plan.routes[0].length(), 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(plan.routes[6].length(), 36.0, epsilon = 1e-9);
        let json = serde_json::to_string(&plan).unwrap();
        let back: CampaignPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);

        let mut bad = params.clone();
        bad.heights_main_m = vec![4.0, 2.0];
        assert!(build_campaign(&building(), &east_antenna(), &bs(), &bad).is_err());
    }

    proptest! {
        #[test]
        fn generated_routes_are_valid(az in 0.0..360.0f64, standoff in 1.0..30.0f64, h in 1.0..15.0f64) {
            let mut ant = east_antenna();
            ant.boresight_azimuth_deg = az;
            if let Ok(routes) = plan_main_lobe(&building(), &ant, &bs(), &[h, h + 2.0], standoff, 30.0) {
                for r in routes {
                    prop_assert!(r.waypoints.len() >= 2);
                    prop_assert!(r.waypoints.iter().all(|w| w.z == r.leg_altitude));
                    prop_assert!(!building().footprint.intersects_segment(r.waypoints[0].horizontal(), r.waypoints[1].horizontal()));
                }
            }
        }
    }
}
