//! Driver advisory: countdown, distance gating, speed recommendation and
//! phase-change notifications for the phase of the zone the vehicle is in.

mod engine;
mod schedule;
mod speed;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{update, AdvisoryError, AdvisoryEvent, AdvisoryState, DeactivationReason};
pub use schedule::{build_schedule, green_window_s, Interval, PhaseSchedule};
pub use speed::{compute_speed_advice, SpeedRecommendation};

/// Tunables of the advisory. Distances in meters, speeds in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvisoryParams {
    /// Advice starts once the vehicle is this close to the stop bar.
    pub max_start_m: f64,
    /// Advice stops once the vehicle is closer than this.
    pub min_stop_m: f64,
    /// Trimmed off the end of green so advice never targets its last instant.
    pub green_end_margin_s: f64,
    pub v_floor_mps: f64,
}

impl Default for AdvisoryParams {
    fn default() -> Self {
        Self {
            max_start_m: 500.0,
            min_stop_m: 20.0,
            green_end_margin_s: 1.0,
            v_floor_mps: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("min_stop_m ({min}) must be positive and below max_start_m ({max})")]
    Gate { min: f64, max: f64 },
    #[error("green_end_margin_s must be non-negative, got {0}")]
    Margin(f64),
    #[error("v_floor_mps ({floor}) must be positive and below every speed limit (lowest {limit})")]
    Floor { floor: f64, limit: f64 },
}

impl AdvisoryParams {
    /// Checks the parameter invariants against the configured speed limits.
    pub fn validate(&self, speed_limits: impl IntoIterator<Item = f64>) -> Result<(), ParamsError> {
        if !(self.min_stop_m > 0.0 && self.min_stop_m < self.max_start_m) {
            return Err(ParamsError::Gate {
                min: self.min_stop_m,
                max: self.max_start_m,
            });
        }
        if self.green_end_margin_s.is_nan() || self.green_end_margin_s < 0.0 {
            return Err(ParamsError::Margin(self.green_end_margin_s));
        }
        let lowest = speed_limits.into_iter().fold(f64::INFINITY, f64::min);
        if !(self.v_floor_mps > 0.0 && self.v_floor_mps < lowest) {
            return Err(ParamsError::Floor {
                floor: self.v_floor_mps,
                limit: lowest,
            });
        }
        Ok(())
    }
}
