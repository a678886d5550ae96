use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Log-distance path loss with lognormal shadowing and a receiver floor.
///
/// Mean loss at distance `d` meters is `intercept_db + 10 * exponent * log10(d)`,
/// so `intercept_db` is the loss at 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossModel<T> {
    pub intercept_db: T,
    pub exponent: T,
    pub sigma_db: T,
    pub censor_threshold_dbm: T,
}

impl<T: Scalar> PathLossModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent.is_finite() && self.exponent > T::zero()) {
            return Err(Error::InvalidInput("path loss exponent must be positive".into()));
        }
        if !(self.sigma_db.is_finite() && self.sigma_db >= T::zero()) {
            return Err(Error::InvalidInput("shadowing sigma must be non-negative".into()));
        }
        if !self.intercept_db.is_finite() || !self.censor_threshold_dbm.is_finite() {
            return Err(Error::InvalidInput("path loss intercept and threshold must be finite".into()));
        }
        Ok(())
    }

    pub fn mean_loss_db(&self, distance_m: T) -> T {
        self.intercept_db + T::lit(10.0) * self.exponent * distance_m.log10()
    }
}
