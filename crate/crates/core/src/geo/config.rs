//! Zone-setup configuration: JSON document describing the approach triangles
//! of one intersection and its signal plan.
//!
//! ```json
//! { "version": 1, "intersection_id": 17,
//!   "ref_point": {"lat": 36.31, "lon": -82.35},
//!   "zones": [ { "phase_id": 2, "vertices": [[lat,lon],[lat,lon],[lat,lon]],
//!                "stopbar": [lat,lon], "speed_limit_mps": 17.88 } ],
//!   "plan": { "cycle_ds": 900, "phases": [ ... ] } }
//! ```

use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use super::zone::{planar_contains, planar_contains_strict};
use super::{project_local, GeoPoint, PlanarPoint, TriZone};
use crate::codec::PHASE_COUNT;
use crate::sim::plan::{RawPlan, SignalPlan};

const MIN_AREA_M2: f64 = 1.0;
/// Stop bars may sit this far outside their triangle (rounding at the edge).
const STOPBAR_TOLERANCE_M: f64 = 0.01;
/// Barycentric grid resolution for the overlap probe; yields 105 interior points.
const OVERLAP_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneConfig {
    pub intersection_id: u32,
    pub ref_point: GeoPoint,
    pub zones: Vec<TriZone>,
    pub plan: SignalPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationReason {
    PhaseOutOfRange(u8),
    BadCoordinate,
    OutOfLocalRange,
    Collinear { area_m2: f64 },
    StopbarOutside { distance_m: f64 },
    BadSpeedLimit(f64),
    Overlap { other: usize },
    BadPlan(String),
}

impl fmt::Display for ValidationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationReason::PhaseOutOfRange(id) => write!(f, "phase {id} out of range 1..=8"),
            ValidationReason::BadCoordinate => f.write_str("coordinate out of range"),
            ValidationReason::OutOfLocalRange => {
                f.write_str("more than 1 degree from the reference point")
            }
            ValidationReason::Collinear { area_m2 } => {
                write!(f, "collinear vertices (area {area_m2:.3} m²)")
            }
            ValidationReason::StopbarOutside { distance_m } => {
                write!(f, "stop bar {distance_m:.3} m outside the triangle")
            }
            ValidationReason::BadSpeedLimit(v) => write!(f, "speed limit {v} must be positive"),
            ValidationReason::Overlap { other } => write!(f, "overlaps zone {other}"),
            ValidationReason::BadPlan(msg) => write!(f, "bad plan: {msg}"),
        }
    }
}

/// One failed check. `zone` is the index into `zones`, `None` for
/// document-level problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub zone: Option<usize>,
    pub reason: ValidationReason,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.zone {
            Some(i) => write!(f, "zone {i}: {}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{} validation error(s); first: {}", .0.len(), .0[0])]
    Validation(Vec<ValidationError>),
}

impl ConfigError {
    pub fn validation_errors(&self) -> &[ValidationError] {
        match self {
            ConfigError::Validation(v) => v,
            ConfigError::Schema { .. } => &[],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: u32,
    intersection_id: u32,
    ref_point: RawRef,
    zones: Vec<RawZone>,
    plan: RawPlan,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRef {
    lat: f64,
    lon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZone {
    phase_id: u8,
    vertices: [[f64; 2]; 3],
    stopbar: [f64; 2],
    speed_limit_mps: f64,
}

fn point([lat, lon]: [f64; 2]) -> GeoPoint {
    GeoPoint::new(lat, lon)
}

fn triangle_area(t: &[PlanarPoint; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0]).abs()
}

fn segment_distance(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab.scale(t))).norm()
}

fn distance_outside(p: PlanarPoint, t: &[PlanarPoint; 3]) -> f64 {
    if planar_contains(p, t) {
        return 0.0;
    }
    (0..3)
        .map(|i| segment_distance(p, t[i], t[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

/// Strictly interior barycentric grid points of `t`.
fn interior_grid(t: &[PlanarPoint; 3]) -> impl Iterator<Item = PlanarPoint> + '_ {
    let n = OVERLAP_GRID;
    (1..n).flat_map(move |i| {
        (1..n - i).map(move |j| {
            let k = n - i - j;
            let (wa, wb, wc) = (
                i as f64 / n as f64,
                j as f64 / n as f64,
                k as f64 / n as f64,
            );
            PlanarPoint::new(
                wa * t[0].x + wb * t[1].x + wc * t[2].x,
                wa * t[0].y + wb * t[1].y + wc * t[2].y,
            )
        })
    })
}

fn segments_cross(a: PlanarPoint, b: PlanarPoint, c: PlanarPoint, d: PlanarPoint) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn overlaps(s: &[PlanarPoint; 3], t: &[PlanarPoint; 3]) -> bool {
    let vertex_inside = s.iter().any(|&p| planar_contains_strict(p, t))
        || t.iter().any(|&p| planar_contains_strict(p, s));
    let grid_shared = interior_grid(s).any(|p| planar_contains_strict(p, t))
        || interior_grid(t).any(|p| planar_contains_strict(p, s));
    let edges_cross =
        (0..3).any(|i| (0..3).any(|j| segments_cross(s[i], s[(i + 1) % 3], t[j], t[(j + 1) % 3])));
    vertex_inside || grid_shared || edges_cross
}

/// Parses and validates a zone configuration document.
///
/// Schema problems stop parsing at the first offending path. Geometry and
/// plan problems are collected, so one call reports every invalid zone.
pub fn load_zone_config(document: &str) -> Result<ZoneConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    if raw.version != 1 {
        return Err(ConfigError::Schema {
            path: "version".into(),
            message: format!("unsupported version {}", raw.version),
        });
    }

    let mut errors = Vec::new();
    let mut push = |zone: Option<usize>, reason| errors.push(ValidationError { zone, reason });

    let ref_point = GeoPoint::new(raw.ref_point.lat, raw.ref_point.lon);
    if !ref_point.is_valid() {
        push(None, ValidationReason::BadCoordinate);
    }

    let plan = match SignalPlan::new(raw.plan.cycle_ds, raw.plan.phases) {
        Ok(p) => Some(p),
        Err(e) => {
            push(None, ValidationReason::BadPlan(e.to_string()));
            None
        }
    };

    let mut zones = Vec::with_capacity(raw.zones.len());
    let mut projected: Vec<Option<[PlanarPoint; 3]>> = Vec::with_capacity(raw.zones.len());
    for (i, rz) in raw.zones.into_iter().enumerate() {
        let zone = TriZone {
            phase_id: rz.phase_id,
            vertices: rz.vertices.map(point),
            stopbar: point(rz.stopbar),
            speed_limit_mps: rz.speed_limit_mps,
        };
        let mut tri = None;
        if !(1..=PHASE_COUNT as u8).contains(&zone.phase_id) {
            push(Some(i), ValidationReason::PhaseOutOfRange(zone.phase_id));
        }
        if !(zone.speed_limit_mps.is_finite() && zone.speed_limit_mps > 0.0) {
            push(
                Some(i),
                ValidationReason::BadSpeedLimit(zone.speed_limit_mps),
            );
        }
        let all_points = zone.vertices.iter().chain(std::iter::once(&zone.stopbar));
        if all_points.clone().any(|p| !p.is_valid()) {
            push(Some(i), ValidationReason::BadCoordinate);
        } else if let (Some(t), Ok(sb)) = (
            zone.project(ref_point),
            project_local(zone.stopbar, ref_point),
        ) {
            let area_m2 = triangle_area(&t);
            if area_m2 <= MIN_AREA_M2 {
                push(Some(i), ValidationReason::Collinear { area_m2 });
            } else {
                let distance_m = distance_outside(sb, &t);
                if distance_m > STOPBAR_TOLERANCE_M {
                    push(Some(i), ValidationReason::StopbarOutside { distance_m });
                }
                tri = Some(t);
            }
        } else {
            push(Some(i), ValidationReason::OutOfLocalRange);
        }
        zones.push(zone);
        projected.push(tri);
    }

    for i in 0..projected.len() {
        for j in i + 1..projected.len() {
            if let (Some(a), Some(b)) = (&projected[i], &projected[j]) {
                if overlaps(a, b) {
                    push(Some(j), ValidationReason::Overlap { other: i });
                }
            }
        }
    }

    match plan {
        Some(plan) if errors.is_empty() => Ok(ZoneConfig {
            intersection_id: raw.intersection_id,
            ref_point,
            zones,
            plan,
        }),
        _ => Err(ConfigError::Validation(errors)),
    }
}
