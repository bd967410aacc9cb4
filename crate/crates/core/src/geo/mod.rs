//! Local planar geometry on GPS coordinates, approach zones and the zone
//! configuration file.

mod config;
mod zone;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_zone_config, ConfigError, ValidationError, ValidationReason, ZoneConfig};
pub use zone::{distance_to_stopbar, locate, locate_index, point_in_triangle, TriZone};

/// Mean earth radius used by every distance and projection, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Projection is only defined within this many degrees of its origin.
pub const LOCAL_RANGE_DEG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub const fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self { lat_deg, lon_deg }
    }

    /// Latitude within [-90, 90] and longitude within [-180, 180).
    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.lat_deg) && (-180.0..180.0).contains(&self.lon_deg)
    }
}

/// East/north offset in meters from a projection origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl std::ops::Sub for PlanarPoint {
    type Output = PlanarPoint;

    fn sub(self, other: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.x - other.x, self.y - other.y)
    }
}

impl std::ops::Add for PlanarPoint {
    type Output = PlanarPoint;

    fn add(self, other: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.x + other.x, self.y + other.y)
    }
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scale(self, k: f64) -> PlanarPoint {
        PlanarPoint::new(self.x * k, self.y * k)
    }

    pub fn cross(self, other: PlanarPoint) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: PlanarPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeoError {
    #[error("point ({lat}, {lon}) is more than 1 degree from the projection origin")]
    OutOfLocalRange { lat: f64, lon: f64 },
}

/// Equirectangular projection about `origin`:
/// `x = R·Δlon·cos(lat₀)`, `y = R·Δlat` (angles in radians).
pub fn project_local(p: GeoPoint, origin: GeoPoint) -> Result<PlanarPoint, GeoError> {
    let dlat = p.lat_deg - origin.lat_deg;
    let dlon = p.lon_deg - origin.lon_deg;
    if !(dlat.abs() < LOCAL_RANGE_DEG && dlon.abs() < LOCAL_RANGE_DEG) {
        return Err(GeoError::OutOfLocalRange {
            lat: p.lat_deg,
            lon: p.lon_deg,
        });
    }
    let x = EARTH_RADIUS_M * dlon.to_radians() * origin.lat_deg.to_radians().cos();
    let y = EARTH_RADIUS_M * dlat.to_radians();
    Ok(PlanarPoint::new(x, y))
}

/// Analytic inverse of [`project_local`].
pub fn unproject_local(q: PlanarPoint, origin: GeoPoint) -> GeoPoint {
    let lat = origin.lat_deg + (q.y / EARTH_RADIUS_M).to_degrees();
    let lon =
        origin.lon_deg + (q.x / (EARTH_RADIUS_M * origin.lat_deg.to_radians().cos())).to_degrees();
    GeoPoint::new(lat, lon)
}

/// Great-circle distance in meters.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projection_examples() {
        let o = GeoPoint::new(0.0, 0.0);
        assert_eq!(project_local(o, o).unwrap(), PlanarPoint::new(0.0, 0.0));

        let q = project_local(GeoPoint::new(0.001, 0.0), o).unwrap();
        assert!(q.x.abs() < 1e-12);
        assert!((q.y - 111.1949).abs() < 1e-3, "{}", q.y);

        let o60 = GeoPoint::new(60.0, 0.0);
        let q = project_local(GeoPoint::new(60.0, 0.001), o60).unwrap();
        assert!((q.x - 55.597).abs() < 1e-2, "{}", q.x);
        assert!(q.y.abs() < 1e-12);
    }

    #[test]
    fn projection_range() {
        let o = GeoPoint::new(36.0, -84.0);
        assert!(project_local(GeoPoint::new(37.0, -84.0), o).is_err());
        assert!(project_local(GeoPoint::new(36.0, -82.5), o).is_err());
        assert!(project_local(GeoPoint::new(36.99, -83.01), o).is_ok());
    }

    #[test]
    fn haversine_examples() {
        let a = GeoPoint::new(36.31, -82.35);
        assert_eq!(haversine_m(a, a), 0.0);
        let d = haversine_m(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.001, 0.0));
        let arc = std::f64::consts::PI * EARTH_RADIUS_M / 180.0 * 1e-3;
        assert!((d - arc).abs() < 1e-6);
        assert!((d - 111.1949).abs() < 1e-3);
    }

    fn near(origin: GeoPoint, max_m: f64) -> impl Strategy<Value = GeoPoint> {
        let span = max_m / 111_000.0;
        (-span..span, -span..span)
            .prop_map(move |(a, b)| GeoPoint::new(origin.lat_deg + a, origin.lon_deg + b))
    }

    proptest! {
        #[test]
        fn haversine_matches_projection_within_1km(
            lat0 in -60.0f64..60.0, lon0 in -179.0f64..179.0,
            da in -0.006f64..0.006, db in -0.006f64..0.006,
        ) {
            let a = GeoPoint::new(lat0, lon0);
            let b = GeoPoint::new(lat0 + da, lon0 + db);
            prop_assume!(haversine_m(a, b) < 1000.0);
            // the projection's scale error is first order in the distance from
            // its origin, so project about the midpoint
            let mid = GeoPoint::new(lat0 + da / 2.0, lon0 + db / 2.0);
            let q = project_local(b, mid).unwrap() - project_local(a, mid).unwrap();
            prop_assert!((haversine_m(a, b) - q.norm()).abs() < 0.01);
        }

        #[test]
        fn haversine_symmetric_and_triangle(
            a in near(GeoPoint::new(36.3, -82.3), 5000.0),
            b in near(GeoPoint::new(36.3, -82.3), 5000.0),
            c in near(GeoPoint::new(36.3, -82.3), 5000.0),
        ) {
            let ab = haversine_m(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, haversine_m(b, a));
            let bound = haversine_m(a, c) + haversine_m(c, b);
            prop_assert!(ab <= bound + 1e-6 * bound.max(1.0));
        }

        #[test]
        fn unproject_inverts_projection(
            origin in (-70.0f64..70.0, -170.0f64..170.0),
            dx in -1000.0f64..1000.0, dy in -1000.0f64..1000.0,
        ) {
            let o = GeoPoint::new(origin.0, origin.1);
            let p = unproject_local(PlanarPoint::new(dx, dy), o);
            let back = unproject_local(project_local(p, o).unwrap(), o);
            prop_assert!((back.lat_deg - p.lat_deg).abs() < 1e-9);
            prop_assert!((back.lon_deg - p.lon_deg).abs() < 1e-9);
        }
    }
}
