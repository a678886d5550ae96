use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Empirical CDF over finite values, kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf<T> {
    values: Vec<T>,
}

impl<T: Scalar> Ecdf<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("ECDF needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ECDF values must be finite".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// Fraction of values `<= x`.
    pub fn eval(&self, x: T) -> T {
        let k = self.values.partition_point(|v| *v <= x);
        T::lit(k as f64) / T::lit(self.values.len() as f64)
    }

    /// Smallest value `v` with `eval(v) >= p`.
    pub fn quantile(&self, p: T) -> T {
        let n = self.values.len();
        let k = (p * T::lit(n as f64)).ceil().to_usize().unwrap_or(0).clamp(1, n);
        self.values[k - 1]
    }

    /// Step points `(value, F(value))` at each distinct value.
    pub fn steps(&self) -> Vec<(T, T)> {
        let mut out: Vec<(T, T)> = Vec::new();
        let n = T::lit(self.values.len() as f64);
        for (i, v) in self.values.iter().enumerate() {
            let f = T::lit((i + 1) as f64) / n;
            match out.last_mut() {
                Some(last) if last.0 == *v => last.1 = f,
                _ => out.push((*v, f)),
            }
        }
        out
    }
}

/// Identifies one flight: route id, leg altitude, and flight index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightKey {
    pub route_id: u32,
    pub altitude_m: f64,
    pub flight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightCdf {
    pub key: FlightKey,
    pub n: usize,
    pub min_dbm: f64,
    pub median_dbm: f64,
    pub max_dbm: f64,
    pub ecdf: Ecdf<f64>,
}

/// One ECDF of RSRP per flight group.
pub fn ecdf(groups: &[(FlightKey, Vec<f64>)]) -> Result<Vec<FlightCdf>> {
    groups
        .iter()
        .map(|(key, values)| {
            let e = Ecdf::new(values.clone())?;
            Ok(FlightCdf { key: *key, n: e.len(), min_dbm: e.min(), median_dbm: e.quantile(0.5), max_dbm: e.max(), ecdf: e })
        })
        .collect()
}
