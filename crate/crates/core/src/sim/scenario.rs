use serde::{Deserialize, Serialize};

use crate::codec::FrameFormat;
use crate::geo::GeoPoint;

/// Who sets the acceleration each tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Driver {
    /// Piecewise-constant acceleration: each `(tick, accel)` entry holds until
    /// the next one. Before the first entry the vehicle coasts.
    Scripted {
        #[serde(default)]
        script: Vec<(u64, f64)>,
    },
    AdviceFollower,
    /// Commands arrive from outside (the live console); coasts until told otherwise.
    External,
}

impl Driver {
    pub fn scripted_accel(script: &[(u64, f64)], tick: u64) -> f64 {
        script
            .iter()
            .filter(|(t, _)| *t <= tick)
            .max_by_key(|(t, _)| *t)
            .map_or(0.0, |(_, a)| *a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(with = "lat_lon")]
    pub spawn: GeoPoint,
    pub initial_speed_mps: f64,
    pub approach_phase_id: u8,
    pub driver: Driver,
    pub max_ticks: u64,
    #[serde(default = "default_format")]
    pub frame_format: FrameFormat,
}

fn default_format() -> FrameFormat {
    FrameFormat::M60
}

mod lat_lon {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geo::GeoPoint;

    pub fn serialize<S: Serializer>(p: &GeoPoint, s: S) -> Result<S::Ok, S::Error> {
        [p.lat_deg, p.lon_deg].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GeoPoint, D::Error> {
        let [lat, lon] = <[f64; 2]>::deserialize(d)?;
        Ok(GeoPoint::new(lat, lon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_scripted() {
        let s: Scenario = serde_json::from_str(
            r#"{"spawn":[36.3,-82.3],"initial_speed_mps":12.5,"approach_phase_id":2,
               "driver":{"type":"scripted","script":[[0,1.0],[50,-2.0]]},"max_ticks":900,
               "frame_format":"tw900"}"#,
        )
        .unwrap();
        assert_eq!(s.frame_format, FrameFormat::Tw900);
        let Driver::Scripted { script } = &s.driver else {
            panic!()
        };
        assert_eq!(Driver::scripted_accel(script, 0), 1.0);
        assert_eq!(Driver::scripted_accel(script, 49), 1.0);
        assert_eq!(Driver::scripted_accel(script, 50), -2.0);
        assert_eq!(Driver::scripted_accel(&[(10, 1.0)], 3), 0.0);
    }

    #[test]
    fn parse_follower_defaults_to_m60() {
        let s: Scenario = serde_json::from_str(
            r#"{"spawn":[36.3,-82.3],"initial_speed_mps":0,"approach_phase_id":4,
               "driver":{"type":"advice_follower"},"max_ticks":10}"#,
        )
        .unwrap();
        assert_eq!(s.driver, Driver::AdviceFollower);
        assert_eq!(s.frame_format, FrameFormat::M60);
        let back: Scenario = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_keys_and_drivers() {
        assert!(serde_json::from_str::<Scenario>(
            r#"{"spawn":[0,0],"initial_speed_mps":0,"approach_phase_id":4,
               "driver":{"type":"robot"},"max_ticks":10}"#
        )
        .is_err());
        assert!(serde_json::from_str::<Scenario>(
            r#"{"spawn":[0,0],"initial_speed_mps":0,"approach_phase_id":4,
               "driver":{"type":"external"},"max_ticks":10,"colour":"red"}"#
        )
        .is_err());
    }
}
