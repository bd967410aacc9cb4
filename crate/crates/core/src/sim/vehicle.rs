//! One-dimensional vehicle on the straight line from its spawn point through
//! the stop bar.

use serde::{Deserialize, Serialize};

use crate::geo::{project_local, unproject_local, GeoError, GeoPoint, PlanarPoint};

/// Simulation step, seconds.
pub const DT_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelLimits {
    pub min_mps2: f64,
    pub max_mps2: f64,
}

impl Default for AccelLimits {
    fn default() -> Self {
        Self {
            min_mps2: -4.5,
            max_mps2: 3.0,
        }
    }
}

impl AccelLimits {
    pub fn clamp(&self, a: f64) -> f64 {
        a.clamp(self.min_mps2, self.max_mps2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pos: GeoPoint,
    pub speed_mps: f64,
    /// Signed distance to the stop bar along the approach; positive before it.
    pub along_m: f64,
}

/// The ray spawn → stop bar in the local plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approach {
    origin: GeoPoint,
    stopbar: PlanarPoint,
    /// Unit vector pointing from the stop bar back towards the spawn.
    back: PlanarPoint,
    spawn_along_m: f64,
}

impl Approach {
    /// Fails if either point is out of projection range or they coincide.
    pub fn new(spawn: GeoPoint, stopbar: GeoPoint, origin: GeoPoint) -> Result<Self, GeoError> {
        let s = project_local(spawn, origin)?;
        let b = project_local(stopbar, origin)?;
        let back = s - b;
        let len = back.norm();
        if len.is_nan() || len <= 0.0 {
            return Err(GeoError::OutOfLocalRange {
                lat: spawn.lat_deg,
                lon: spawn.lon_deg,
            });
        }
        Ok(Self {
            origin,
            stopbar: b,
            back: back.scale(1.0 / len),
            spawn_along_m: len,
        })
    }

    pub fn spawn_along_m(&self) -> f64 {
        self.spawn_along_m
    }

    pub fn position(&self, along_m: f64) -> GeoPoint {
        unproject_local(self.stopbar + self.back.scale(along_m), self.origin)
    }

    pub fn spawn(&self, speed_mps: f64) -> VehicleState {
        VehicleState {
            pos: self.position(self.spawn_along_m),
            speed_mps: speed_mps.max(0.0),
            along_m: self.spawn_along_m,
        }
    }

    /// Explicit Euler step: speed first (floored at rest), then position with
    /// the new speed. The command is clamped to `limits`.
    pub fn step(&self, v: &VehicleState, accel_mps2: f64, limits: &AccelLimits) -> VehicleState {
        let a = limits.clamp(accel_mps2);
        let speed = (v.speed_mps + a * DT_S).max(0.0);
        let along = v.along_m - speed * DT_S;
        VehicleState {
            pos: self.position(along),
            speed_mps: speed,
            along_m: along,
        }
    }
}
