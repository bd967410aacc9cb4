use serde::{Deserialize, Serialize};

use super::{haversine_m, project_local, GeoPoint, PlanarPoint};

/// Triangular approach zone feeding one signal phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriZone {
    pub phase_id: u8,
    pub vertices: [GeoPoint; 3],
    pub stopbar: GeoPoint,
    pub speed_limit_mps: f64,
}

impl TriZone {
    /// Vertex centroid, in degrees. Always strictly inside a non-degenerate zone.
    pub fn centroid(&self) -> GeoPoint {
        let [a, b, c] = self.vertices;
        GeoPoint::new(
            (a.lat_deg + b.lat_deg + c.lat_deg) / 3.0,
            (a.lon_deg + b.lon_deg + c.lon_deg) / 3.0,
        )
    }

    /// Vertices projected about `origin`, or `None` if any is out of local range.
    pub fn project(&self, origin: GeoPoint) -> Option<[PlanarPoint; 3]> {
        let [a, b, c] = self.vertices;
        Some([
            project_local(a, origin).ok()?,
            project_local(b, origin).ok()?,
            project_local(c, origin).ok()?,
        ])
    }
}

/// Edge-side cross products of `p` against triangle `t`, one per edge.
pub(crate) fn edge_sides(p: PlanarPoint, t: &[PlanarPoint; 3]) -> [f64; 3] {
    let [a, b, c] = *t;
    [
        (b - a).cross(p - a),
        (c - b).cross(p - b),
        (a - c).cross(p - c),
    ]
}

/// Same-side test; points on an edge or vertex count as inside.
pub(crate) fn planar_contains(p: PlanarPoint, t: &[PlanarPoint; 3]) -> bool {
    let s = edge_sides(p, t);
    let neg = s.iter().any(|&v| v < 0.0);
    let pos = s.iter().any(|&v| v > 0.0);
    !(neg && pos)
}

/// Interior-only variant of [`planar_contains`].
pub(crate) fn planar_contains_strict(p: PlanarPoint, t: &[PlanarPoint; 3]) -> bool {
    let s = edge_sides(p, t);
    s.iter().all(|&v| v > 0.0) || s.iter().all(|&v| v < 0.0)
}

pub fn point_in_triangle(p: GeoPoint, zone: &TriZone, origin: GeoPoint) -> bool {
    let (Ok(q), Some(t)) = (project_local(p, origin), zone.project(origin)) else {
        return false;
    };
    planar_contains(q, &t)
}

/// Index of the zone containing `p`. When several contain it (shared
/// boundaries), the lowest phase id wins, then the earliest entry.
pub fn locate_index(p: GeoPoint, zones: &[TriZone], origin: GeoPoint) -> Option<usize> {
    zones
        .iter()
        .enumerate()
        .filter(|(_, z)| point_in_triangle(p, z, origin))
        .min_by_key(|(i, z)| (z.phase_id, *i))
        .map(|(i, _)| i)
}

pub fn locate(p: GeoPoint, zones: &[TriZone], origin: GeoPoint) -> Option<&TriZone> {
    locate_index(p, zones, origin).map(|i| &zones[i])
}

/// Straight-line distance to the zone's stop bar, defined everywhere.
pub fn distance_to_stopbar(p: GeoPoint, zone: &TriZone) -> f64 {
    haversine_m(p, zone.stopbar)
}
