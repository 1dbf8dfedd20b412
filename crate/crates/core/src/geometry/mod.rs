//! Curves, oriented surface patches, their panelization and signed crossings.

mod curve;
mod intersect;
mod surface;

pub use curve::{curve_distance, hausdorff_distance, Curve, Orientation, Piece};
pub use intersect::{segment_panel_intersection, Crossing, DEFAULT_TRANSVERSALITY_TOL};
pub(crate) use intersect::{locate, PlaneHit};
pub use surface::{mesh_boundary, mesh_surface, Panel, PatchPoint, SurfaceMesh, SurfacePatch};

use crate::vector::Vector3;

/// Bounding-box diagonal of a set of points.
pub fn scene_scale(points: impl IntoIterator<Item = Vector3>) -> f64 {
    let mut lo = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        lo = lo.component_min(p);
        hi = hi.component_max(p);
    }
    let d = (hi - lo).norm();
    if d.is_finite() {
        d
    } else {
        0.0
    }
}
