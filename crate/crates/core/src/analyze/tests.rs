use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::*;
use crate::error::Error;
use crate::model::{FusedSample, GeoPoint, Route, RouteLabel};

fn route() -> Route<f64> {
    Route::straight(2, RouteLabel::MainLobe, 4.0, [0.0, 0.0], [20.0, 0.0]).unwrap()
}

fn fused(x: f64, z: f64, rsrp: f64, dist: f64) -> FusedSample {
    FusedSample {
        t: x,
        pos: GeoPoint::new(x, 0.0, z),
        rsrp,
        rsrq: None,
        sinr: None,
        rssi: None,
        route_id: 2,
        leg_altitude: z,
        distance_to_bs: dist,
    }
}

/// Log-uniform distances in `[lo, hi]` with `rsrp = a - 10 n log10(d) + N(0, sigma)`,
/// optionally dropping values under `floor`.
#[allow(clippy::too_many_arguments)]
fn synth(seed: u64, count: usize, a: f64, n: f64, sigma: f64, lo: f64, hi: f64, floor: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    let (mut d, mut y) = (Vec::new(), Vec::new());
    for _ in 0..count {
        let di = lo * (hi / lo).powf(rng.random::<f64>());
        let yi = a - n * 10.0 * di.log10() + noise.sample(&mut rng);
        if floor.is_some_and(|f| yi < f) {
            continue;
        }
        d.push(di);
        y.push(yi);
    }
    (d, y)
}

#[test]
fn single_sample_is_exact_in_its_cell() {
    // arclength 5.5 m is the center of cell 5 on a 1 m grid
    let s = [fused(5.5, 4.0, -97.25, 30.0)];
    let g = heatmap(&s, &route(), &HeatmapSettings::default()).unwrap();
    let iv = g.row_index(4.0).unwrap();
    assert_abs_diff_eq!(g.get(5, iv).unwrap(), -97.25, epsilon = 1e-9);
    assert!(g.get(0, iv).is_none());
    assert!(g.get(19, iv).is_none());
}

#[test]
fn equal_bracketing_samples_give_common_value() {
    let s = [fused(5.0, 4.0, -101.0, 30.0), fused(6.0, 4.0, -101.0, 30.0)];
    let g = heatmap(&s, &route(), &HeatmapSettings::default()).unwrap();
    let iv = g.row_index(4.0).unwrap();
    assert_abs_diff_eq!(g.get(5, iv).unwrap(), -101.0, epsilon = 1e-9);
}

#[test]
fn empty_input_gives_empty_grid() {
    let g = heatmap(&[], &route(), &HeatmapSettings::default()).unwrap();
    assert_eq!(g.axis_u.len(), 20);
    assert!(g.cells.iter().all(Option::is_none));
}

#[test]
fn heatmap_rejects_bad_settings() {
    let bad = HeatmapSettings { cell_m: 0.0, ..Default::default() };
    assert!(heatmap(&[], &route(), &bad).is_err());
    let bad = HeatmapSettings { radius_m: -1.0, ..Default::default() };
    assert!(heatmap(&[], &route(), &bad).is_err());
}

#[test]
fn linear_space_averages_power_not_db() {
    // Midway between -100 and -90 dBm: mean of 0.1e-9 and 1e-9 mW
    let s = [fused(5.0, 4.0, -100.0, 30.0), fused(6.0, 4.0, -90.0, 30.0)];
    let lin = heatmap(&s, &route(), &HeatmapSettings::default()).unwrap();
    let db = heatmap(&s, &route(), &HeatmapSettings { space: InterpolationSpace::Db, ..Default::default() }).unwrap();
    let iv = lin.row_index(4.0).unwrap();
    let expected = 10.0 * ((1e-10 + 1e-9) / 2.0f64).log10();
    assert_abs_diff_eq!(lin.get(5, iv).unwrap(), expected, epsilon = 1e-9);
    assert_abs_diff_eq!(db.get(5, iv).unwrap(), -95.0, epsilon = 1e-9);
}

#[test]
fn heatmap_csv_and_geojson_shapes() {
    use crate::fuse::LocalFrame;
    let s = [fused(5.5, 4.0, -97.0, 30.0)];
    let g = heatmap(&s, &route(), &HeatmapSettings::default()).unwrap();
    let csv = g.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + g.axis_v.len());
    assert_eq!(lines[0].split(',').count(), 1 + g.axis_u.len());
    let gj = g.to_geojson(&route(), &LocalFrame { lat_deg: 52.0, lon_deg: 13.0 });
    let features = gj["features"].as_array().unwrap();
    assert_eq!(features.len(), g.cells.iter().filter(|c| c.is_some()).count());
    assert_eq!(features[0]["properties"]["rsrp_dbm"].as_f64().unwrap(), g.get(5, 0).unwrap());
}

#[test]
fn idw_in_single_precision() {
    let pts = [([0.0f32, 0.0], 2.0f32), ([2.0, 0.0], 4.0)];
    assert_eq!(idw([1.0f32, 0.0], &pts, 1.5, 2.0), Some(3.0));
    assert_eq!(idw([10.0f32, 0.0], &pts, 1.5, 2.0), None);
}

proptest! {
    #[test]
    fn heatmap_cells_within_sample_range(
        pts in prop::collection::vec((0.0..20.0f64, 2.0..6.0f64, -140.0..-60.0f64), 1..30)
    ) {
        let samples: Vec<_> = pts.iter().map(|(x, z, r)| fused(*x, *z, *r, 30.0)).collect();
        let lo = pts.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        let g = heatmap(&samples, &route(), &HeatmapSettings::default()).unwrap();
        for c in g.cells.iter().flatten() {
            prop_assert!(*c >= lo - 1e-9 && *c <= hi + 1e-9);
        }
    }

    #[test]
    fn ecdf_is_order_invariant(mut v in prop::collection::vec(-150.0..-50.0f64, 1..40), x in -150.0..-50.0f64) {
        let a = Ecdf::new(v.clone()).unwrap();
        v.reverse();
        let b = Ecdf::new(v).unwrap();
        prop_assert_eq!(a.eval(x), b.eval(x));
        prop_assert_eq!(a.eval(a.max()), 1.0);
        let steps = a.steps();
        prop_assert!(steps.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
    }

    #[test]
    fn ols_residuals_sum_to_zero(pts in prop::collection::vec((0.0..30.0f64, -150.0..-50.0f64), 3..60)) {
        let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Ok(fit) = ols(&x, &y) {
            let sum: f64 = x.iter().zip(&y).map(|(xi, yi)| yi - fit.predict(*xi)).sum();
            prop_assert!(sum.abs() < 1e-9 * 150.0 * x.len() as f64);
            prop_assert!(fit.sigma_resid >= 0.0);
        }
    }

    #[test]
    fn fit_is_shift_invariant(seed in 0u64..1000, shift in -30.0..30.0f64) {
        let (d, y) = synth(seed, 200, -40.0, 1.2, 5.0, 1.0, 300.0, None);
        let y2: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let s = FitSettings { censor_threshold_dbm: None, ..Default::default() };
        let bounds = default_bounds(&d, DEFAULT_BOUND_COUNT).unwrap();
        let a = fit_truncated_family_raw(&d, &y, &bounds, &s).unwrap();
        let b = fit_truncated_family_raw(&d, &y2, &bounds, &s).unwrap();
        for (fa, fb) in a.family.iter().zip(&b.family) {
            prop_assert!((fa.exponent - fb.exponent).abs() < 1e-9);
            prop_assert!((fb.intercept_dbm - fa.intercept_dbm - shift).abs() < 1e-9);
        }
    }
}

#[test]
fn ecdf_examples() {
    let one = Ecdf::new(vec![-100.0]).unwrap();
    assert_eq!(one.eval(-100.0), 1.0);
    let two = Ecdf::new(vec![-90.0, -100.0]).unwrap();
    assert_eq!(two.eval(-95.0), 0.5);
    assert_eq!(two.eval(-100.5), 0.0);
    assert_eq!(two.quantile(0.5), -100.0);
    assert!(Ecdf::<f64>::new(vec![]).is_err());
    assert!(Ecdf::new(vec![f64::NAN]).is_err());
}

#[test]
fn flight_cdfs_summarize_groups() {
    let key = FlightKey { route_id: 2, altitude_m: 4.0, flight: 1 };
    let out = ecdf(&[(key, vec![-120.0, -100.0, -110.0])]).unwrap();
    assert_eq!(out[0].n, 3);
    assert_eq!(out[0].min_dbm, -120.0);
    assert_eq!(out[0].median_dbm, -110.0);
    assert_eq!(out[0].max_dbm, -100.0);
}

#[test]
fn drop_censored_support_respects_floor() {
    let (_, y) = synth(3, 2000, -100.0, 1.2, 5.0, 10.0, 1000.0, Some(-140.0));
    let key = FlightKey { route_id: 2, altitude_m: 4.0, flight: 0 };
    let out = ecdf(&[(key, y)]).unwrap();
    assert!(out[0].min_dbm >= -140.0);
}

#[test]
fn noiseless_line_recovered_exactly() {
    let d: Vec<f64> = (1..=50).map(|i| i as f64 * 4.0).collect();
    let y: Vec<f64> = d.iter().map(|d| -40.0 - 12.0 * d.log10()).collect();
    let s = FitSettings { censor_threshold_dbm: None, ..Default::default() };
    let r = fit_truncated_family_raw(&d, &y, &[100.0, 200.0], &s).unwrap();
    for f in r.family.iter().chain([&r.full_fit]) {
        assert_abs_diff_eq!(f.exponent, 1.2, epsilon = 1e-10);
        assert_abs_diff_eq!(f.intercept_dbm, -40.0, epsilon = 1e-9);
        assert!(f.sigma_resid_db < 1e-9);
    }
    let f32fit = fit_log_distance(&d.iter().map(|v| *v as f32).collect::<Vec<_>>(), &y.iter().map(|v| *v as f32).collect::<Vec<_>>()).unwrap();
    assert!((f32fit.slope + 1.2).abs() < 1e-3);
}

#[test]
fn monte_carlo_recovers_exponent_and_sigma() {
    let (d, y) = synth(11, 10_000, -40.0, 1.2, 5.0, 1.0, 1000.0, None);
    let fit = fit_log_distance(&d, &y).unwrap();
    assert!((-fit.slope - 1.2).abs() <= 0.05, "n = {}", -fit.slope);
    assert!((fit.sigma_resid - 5.0).abs() <= 0.3, "sigma = {}", fit.sigma_resid);
}

#[test]
fn selection_reduces_censoring_bias() {
    let (d, y) = synth(5, 10_000, -105.0, 1.2, 5.0, 10.0, 1000.0, Some(-140.0));
    let r = fit_truncated_family(
        &d.iter().zip(&y).map(|(d, y)| fused(0.0, 4.0, *y, *d)).collect::<Vec<_>>(),
        &[],
        &FitSettings::default(),
    )
    .unwrap();
    let sel = r.selected_fit().unwrap();
    assert!(r.full_fit.exponent < 1.2);
    assert!((sel.exponent - 1.2).abs() < (r.full_fit.exponent - 1.2).abs());
    assert_eq!(r.family.len(), DEFAULT_BOUND_COUNT);
    assert!(r.family.iter().all(|f| f.n_points >= MIN_FIT_POINTS && f.sigma_resid_db >= 0.0));
}

#[test]
fn uncensored_selection_is_full_fit() {
    let (d, y) = synth(8, 3000, -40.0, 1.2, 5.0, 1.0, 500.0, None);
    let s = FitSettings { censor_threshold_dbm: None, ..Default::default() };
    let bounds = default_bounds(&d, DEFAULT_BOUND_COUNT).unwrap();
    let r = fit_truncated_family_raw(&d, &y, &bounds, &s).unwrap();
    assert_eq!(r.selection, Some(Selection::WithinThreshold));
    let sel = r.selected_fit().unwrap();
    assert_eq!(sel.exponent, r.full_fit.exponent);
    assert_eq!(sel.intercept_dbm, r.full_fit.intercept_dbm);
    assert_eq!(sel.n_points, d.len());
}

#[test]
fn small_bound_is_rejected() {
    let d: Vec<f64> = (1..=40).map(f64::from).collect();
    let y: Vec<f64> = d.iter().map(|d| -40.0 - 12.0 * d.log10()).collect();
    let r = fit_truncated_family_raw(&d, &y, &[5.0, 40.0], &FitSettings::default());
    assert!(matches!(r, Err(Error::InsufficientPoints { points: 5, .. })));
}

#[test]
fn degenerate_subset_errors() {
    let d = vec![10.0; 20];
    let y = vec![-100.0; 20];
    assert!(matches!(ols(&d, &y), Err(Error::DegenerateFit(_))));
}

#[test]
fn censored_fraction_limits() {
    assert_eq!(censored_fraction(-100.0, 5.0, None), 0.0);
    assert_eq!(censored_fraction(-100.0, 5.0, Some(-140.0)), 0.0);
    assert_eq!(censored_fraction(-160.0, 5.0, Some(-140.0)), 1.0);
    assert_abs_diff_eq!(censored_fraction(-140.0, 5.0, Some(-140.0)), 0.5, epsilon = 1e-12);
}

#[test]
fn anderson_darling_separates_normal_from_uniform() {
    let (_, gaussian) = synth(21, 500, 0.0, 0.0, 1.0, 1.0, 2.0, None);
    let a = anderson_darling(&gaussian).unwrap();
    assert!(a < AD_CRITICAL_5PCT, "A2* = {a}");
    let uniform: Vec<f64> = (0..500).map(|i| i as f64).collect();
    assert!(anderson_darling(&uniform).unwrap() > AD_CRITICAL_5PCT);
    assert!(anderson_darling(&[1.0, 1.0, 1.0]).is_none());
}

#[test]
fn zero_sigma_band_collapses() {
    let d: Vec<f64> = (1..=30).map(|i| i as f64 * 3.0).collect();
    let y: Vec<f64> = d.iter().map(|d| -40.0 - 12.0 * d.log10()).collect();
    let s = FitSettings { censor_threshold_dbm: None, ..Default::default() };
    let band = reconstruct_band(&fit_truncated_family_raw(&d, &y, &[90.0], &s).unwrap()).unwrap();
    for i in 0..band.distances_m.len() {
        assert_abs_diff_eq!(band.lower_dbm[i], band.mean_dbm[i], epsilon = 1e-9);
        assert_abs_diff_eq!(band.upper_dbm[i], band.mean_dbm[i], epsilon = 1e-9);
    }
    assert_abs_diff_eq!(band.distances_m[0], 3.0);
    assert_abs_diff_eq!(*band.distances_m.last().unwrap(), 90.0, epsilon = 1e-9);
}

#[test]
fn band_width_and_coverage() {
    let (d, y) = synth(17, 10_000, -40.0, 1.2, 5.0, 1.0, 1000.0, None);
    let s = FitSettings { censor_threshold_dbm: None, ..Default::default() };
    let r = fit_truncated_family_raw(&d, &y, &[1000.0], &s).unwrap();
    let band = reconstruct_band(&r).unwrap();
    let sigma = band.model.sigma_resid_db;
    for (lo, hi) in band.lower_dbm.iter().zip(&band.upper_dbm) {
        assert_abs_diff_eq!(hi - lo, 6.0 * sigma, epsilon = 1e-9);
    }
    let c = band.containment(&d, &y);
    assert!((c - THREE_SIGMA_COVERAGE).abs() < 0.002, "containment {c}");
    assert_abs_diff_eq!(band.nominal_coverage, 0.9973, epsilon = 1e-4);
}

#[test]
fn band_needs_selected_model() {
    let (d, y) = synth(1, 100, -40.0, 1.2, 5.0, 1.0, 100.0, None);
    let mut r = fit_truncated_family_raw(&d, &y, &[100.0], &FitSettings::default()).unwrap();
    r.selected = None;
    assert!(matches!(reconstruct_band(&r), Err(Error::NoSelectedModel)));
}
