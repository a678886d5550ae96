use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::ecdf::Ecdf;
use crate::error::{Error, Result};
use crate::model::FusedSample;
use crate::scalar::Scalar;

/// Smallest subset a path-loss fit is reported for.
pub const MIN_FIT_POINTS: usize = 10;

/// Number of bounds in the default truncation grid.
pub const DEFAULT_BOUND_COUNT: usize = 10;

/// Lower end of the default truncation grid, as a distance quantile.
pub const DEFAULT_BOUND_QUANTILE: f64 = 0.3;

/// Probability mass of a normal distribution within ±3σ.
pub const THREE_SIGMA_COVERAGE: f64 = 0.997_300_203_936_74;

/// 5% critical value of the adjusted Anderson-Darling statistic when mean
/// and variance are estimated from the data.
pub const AD_CRITICAL_5PCT: f64 = 0.752;

/// Ordinary least squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub intercept: T,
    pub slope: T,
    /// Residual standard deviation with `n - 2` degrees of freedom.
    pub sigma_resid: T,
    pub n: usize,
}

impl<T: Scalar> LineFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }
}

pub fn ols<T: Scalar>(x: &[T], y: &[T]) -> Result<LineFit<T>> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("regression inputs differ in length".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let nf = T::lit(n as f64);
    let mx = x.iter().fold(T::zero(), |a, v| a + *v) / nf;
    let my = y.iter().fold(T::zero(), |a, v| a + *v) / nf;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (xi, yi) in x.iter().zip(y) {
        let dx = *xi - mx;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * (*yi - my);
    }
    let scale = x.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::one());
    if !(sxx > T::epsilon() * scale * scale * nf) {
        return Err(Error::DegenerateFit("regressor has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = x.iter().zip(y).fold(T::zero(), |a, (xi, yi)| {
        let r = *yi - (intercept + slope * *xi);
        a + r * r
    });
    let sigma_resid = if n > 2 { (ssr / T::lit((n - 2) as f64)).sqrt() } else { T::zero() };
    Ok(LineFit { intercept, slope, sigma_resid, n })
}

/// Log-distance regressor `10 log10(d)`.
pub fn log_distance<T: Scalar>(d: T) -> T {
    T::lit(10.0) * d.log10()
}

/// Fits `rsrp = a - n * 10 log10(d)`; returns `(a, n, sigma)` via a line fit.
pub fn fit_log_distance<T: Scalar>(distances: &[T], rsrp: &[T]) -> Result<LineFit<T>> {
    if distances.iter().any(|d| !(*d > T::zero())) {
        return Err(Error::InvalidInput("distances must be positive".into()));
    }
    let x: Vec<T> = distances.iter().map(|d| log_distance(*d)).collect();
    ols(&x, rsrp)
}

/// Share of the ±3σ band below `threshold` at a point where the fitted mean
/// is `mean`: the normal mass under the threshold, renormalized to the band.
pub fn censored_fraction(mean: f64, sigma: f64, threshold: Option<f64>) -> f64 {
    let Some(thr) = threshold else { return 0.0 };
    if sigma <= 0.0 {
        return if mean < thr { 1.0 } else { 0.0 };
    }
    let z = ((thr - mean) / sigma).clamp(-3.0, 3.0);
    let std = Normal::standard();
    ((std.cdf(z) - std.cdf(-3.0)) / (std.cdf(3.0) - std.cdf(-3.0))).clamp(0.0, 1.0)
}

/// Adjusted Anderson-Darling statistic of `residuals` against a normal
/// distribution with estimated mean and variance.
pub fn anderson_darling(residuals: &[f64]) -> Option<f64> {
    let n = residuals.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean = residuals.iter().sum::<f64>() / nf;
    let sd = (residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let mut z: Vec<f64> = residuals.iter().map(|r| (r - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let std = Normal::standard();
    let tiny = 1e-300;
    let s: f64 = (0..n)
        .map(|i| {
            let fi = std.cdf(z[i]).max(tiny);
            let tail = (1.0 - std.cdf(z[n - 1 - i])).max(tiny);
            (2.0 * i as f64 + 1.0) * (fi.ln() + tail.ln())
        })
        .sum();
    let a2 = -nf - s / nf;
    Some(a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedFit {
    /// Upper distance bound of the subset, meters.
    pub d_max_m: f64,
    /// Fitted RSRP at 1 m, dBm.
    pub intercept_dbm: f64,
    pub exponent: f64,
    pub sigma_resid_db: f64,
    pub n_points: usize,
    /// Estimated share of the distribution at `d_max_m` lost below the
    /// censoring threshold.
    pub censored_fraction: f64,
}

impl TruncatedFit {
    pub fn mean_rsrp(&self, d: f64) -> f64 {
        self.intercept_dbm - self.exponent * log_distance(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Largest bound whose censored fraction is within the threshold.
    WithinThreshold,
    /// No bound qualified; the least-censored fit was taken.
    LeastCensored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityCheck {
    pub anderson_darling: f64,
    pub critical_5pct: f64,
    pub consistent_with_normal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    /// Scanner floor, dBm. `None` when the data are uncensored.
    pub censor_threshold_dbm: Option<f64>,
    pub max_censored_fraction: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { censor_threshold_dbm: Some(-140.0), max_censored_fraction: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub settings: FitSettings,
    pub distance_range_m: [f64; 2],
    /// Fit on every sample, no truncation.
    pub full_fit: TruncatedFit,
    /// One fit per truncation bound, ascending.
    pub family: Vec<TruncatedFit>,
    pub selected: Option<usize>,
    pub selection: Option<Selection>,
    /// Residual normality of the selected fit.
    pub residual_normality: Option<NormalityCheck>,
}

impl RegressionResult {
    pub fn selected_fit(&self) -> Option<&TruncatedFit> {
        self.selected.map(|i| &self.family[i])
    }
}

/// `count` equally spaced bounds from the 30th distance percentile to the
/// maximum distance.
pub fn default_bounds(distances: &[f64], count: usize) -> Result<Vec<f64>> {
    let e = Ecdf::new(distances.to_vec())?;
    let lo = e.quantile(DEFAULT_BOUND_QUANTILE);
    let hi = e.max();
    if count <= 1 || hi <= lo {
        return Ok(vec![hi]);
    }
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 }).collect())
}

fn truncated(distances: &[f64], rsrp: &[f64], d_max: f64, threshold: Option<f64>) -> Result<(TruncatedFit, Vec<f64>)> {
    let (d, y): (Vec<f64>, Vec<f64>) =
        distances.iter().zip(rsrp).filter(|(d, _)| **d <= d_max).map(|(d, y)| (*d, *y)).unzip();
    if d.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { bound: d_max, points: d.len(), min: MIN_FIT_POINTS });
    }
    let line = fit_log_distance(&d, &y)?;
    let fit = TruncatedFit {
        d_max_m: d_max,
        intercept_dbm: line.intercept,
        exponent: -line.slope,
        sigma_resid_db: line.sigma_resid,
        n_points: line.n,
        censored_fraction: 0.0,
    };
    let d_top = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = TruncatedFit { censored_fraction: censored_fraction(fit.mean_rsrp(d_top), fit.sigma_resid_db, threshold), ..fit };
    let residuals = d.iter().zip(&y).map(|(d, y)| y - fit.mean_rsrp(*d)).collect();
    Ok((fit, residuals))
}

/// Path-loss fits on distance-truncated subsets, plus the selected member.
///
/// Every bound must leave at least [`MIN_FIT_POINTS`] samples. The selected
/// model is the largest bound whose censored fraction is at most
/// `settings.max_censored_fraction`.
pub fn fit_truncated_family_raw(distances: &[f64], rsrp: &[f64], d_bounds: &[f64], settings: &FitSettings) -> Result<RegressionResult> {
    if distances.len() != rsrp.len() {
        return Err(Error::InvalidInput("distance and rsrp lengths differ".into()));
    }
    if d_bounds.is_empty() || d_bounds.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("truncation bounds must be finite and non-empty".into()));
    }
    let d_hi = distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d_lo = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let (full_fit, _) = truncated(distances, rsrp, f64::INFINITY, settings.censor_threshold_dbm)?;

    let mut bounds = d_bounds.to_vec();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    let mut family = Vec::with_capacity(bounds.len());
    let mut residuals = Vec::with_capacity(bounds.len());
    for b in bounds {
        let (fit, res) = truncated(distances, rsrp, b, settings.censor_threshold_dbm)?;
        family.push(fit);
        residuals.push(res);
    }

    let within = family.iter().rposition(|f| f.censored_fraction <= settings.max_censored_fraction);
    let (selected, selection) = match within {
        Some(i) => (i, Selection::WithinThreshold),
        None => {
            let i = family
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.censored_fraction.total_cmp(&b.1.censored_fraction))
                .map(|(i, _)| i)
                .expect("family is non-empty");
            (i, Selection::LeastCensored)
        }
    };
    let residual_normality = anderson_darling(&residuals[selected]).map(|a| NormalityCheck {
        anderson_darling: a,
        critical_5pct: AD_CRITICAL_5PCT,
        consistent_with_normal: a < AD_CRITICAL_5PCT,
    });
    Ok(RegressionResult {
        settings: *settings,
        distance_range_m: [d_lo, d_hi],
        full_fit,
        family,
        selected: Some(selected),
        selection: Some(selection),
        residual_normality,
    })
}

/// [`fit_truncated_family_raw`] over fused samples. An empty `d_bounds`
/// uses [`default_bounds`].
pub fn fit_truncated_family(samples: &[FusedSample], d_bounds: &[f64], settings: &FitSettings) -> Result<RegressionResult> {
    let distances: Vec<f64> = samples.iter().map(|s| s.distance_to_bs).collect();
    let rsrp: Vec<f64> = samples.iter().map(|s| s.rsrp).collect();
    if distances.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { bound: f64::INFINITY, points: distances.len(), min: MIN_FIT_POINTS });
    }
    let bounds = if d_bounds.is_empty() { default_bounds(&distances, DEFAULT_BOUND_COUNT)? } else { d_bounds.to_vec() };
    fit_truncated_family_raw(&distances, &rsrp, &bounds, settings)
}

/// Mean path-loss line with its ±3σ envelope over the sampled distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub model: TruncatedFit,
    pub distances_m: Vec<f64>,
    pub mean_dbm: Vec<f64>,
    pub lower_dbm: Vec<f64>,
    pub upper_dbm: Vec<f64>,
    /// Gaussian mass inside ±3σ.
    pub nominal_coverage: f64,
}

impl Envelope {
    /// Share of `(distance, rsrp)` points inside the band.
    pub fn containment(&self, distances: &[f64], rsrp: &[f64]) -> f64 {
        if distances.is_empty() {
            return 0.0;
        }
        let half = 3.0 * self.model.sigma_resid_db;
        let inside = distances
            .iter()
            .zip(rsrp)
            .filter(|(d, y)| (*y - self.model.mean_rsrp(**d)).abs() <= half)
            .count();
        inside as f64 / distances.len() as f64
    }
}

pub const ENVELOPE_POINTS: usize = 100;

pub fn reconstruct_band(result: &RegressionResult) -> Result<Envelope> {
    let model = *result.selected_fit().ok_or(Error::NoSelectedModel)?;
    let [lo, hi] = result.distance_range_m;
    let distances_m: Vec<f64> = (0..ENVELOPE_POINTS)
        .map(|i| {
            if hi <= lo {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (ENVELOPE_POINTS - 1) as f64)
            }
        })
        .collect();
    let mean_dbm: Vec<f64> = distances_m.iter().map(|d| model.mean_rsrp(*d)).collect();
    let half = 3.0 * model.sigma_resid_db;
    Ok(Envelope {
        model,
        lower_dbm: mean_dbm.iter().map(|m| m - half).collect(),
        upper_dbm: mean_dbm.iter().map(|m| m + half).collect(),
        mean_dbm,
        distances_m,
        nominal_coverage: THREE_SIGMA_COVERAGE,
    })
}
