//! Signed crossings of straight segments through flat oriented pieces of surface.

use crate::error::{Error, Result};
use crate::geometry::surface::Panel;
use crate::vector::Vector3;

/// Default bound on `|unit tangent · unit normal|` and on the distance to a
/// panel edge (in the panel's own edge coordinates) below which a crossing is refused.
pub const DEFAULT_TRANSVERSALITY_TOL: f64 = 1e-9;

/// A transversal crossing: `sign` is `+1` when the segment passes to the side
/// the area vector points to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub sign: i32,
    pub point: Vector3,
}

/// Where a segment meets the plane of `base + α a + β b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PlaneHit {
    /// No crossing of the plane within the segment.
    Miss,
    /// The segment runs (nearly) parallel to the plane within reach of it.
    Tangent,
    /// An endpoint lies on the plane; its in-plane coordinates are given.
    Endpoint { alpha: f64, beta: f64 },
    /// Clean crossing of the open segment.
    Cross {
        alpha: f64,
        beta: f64,
        sign: i32,
        point: Vector3,
    },
}

/// Intersection of the segment with the plane spanned at `base` by `a`, `b`,
/// expressed in the `(α, β)` coordinates of that frame.
pub(crate) fn locate(
    start: Vector3,
    end: Vector3,
    base: Vector3,
    a: Vector3,
    b: Vector3,
    tol: f64,
) -> PlaneHit {
    let d = end - start;
    let n = a.cross(b);
    let n2 = n.norm_squared();
    let denom = d.dot(n);
    let dist_start = (start - base).dot(n);
    let dist_end = (end - base).dot(n);
    let coords = |p: Vector3| {
        let q = p - base;
        (q.cross(b).dot(n) / n2, a.cross(q).dot(n) / n2)
    };
    let cos = denom / (d.norm() * n2.sqrt());
    if cos.abs() < tol {
        // parallel: only a problem when the segment lies in the plane
        let reach = tol * d.norm() * n2.sqrt();
        if dist_start.abs() > reach && dist_end.abs() > reach && dist_start.signum() == dist_end.signum() {
            return PlaneHit::Miss;
        }
        return PlaneHit::Tangent;
    }
    let s = -dist_start / denom;
    if s < -tol || s > 1.0 + tol {
        return PlaneHit::Miss;
    }
    let point = start + d * s;
    let (alpha, beta) = coords(point);
    if s <= tol || s >= 1.0 - tol {
        return PlaneHit::Endpoint { alpha, beta };
    }
    PlaneHit::Cross {
        alpha,
        beta,
        sign: if denom > 0.0 { 1 } else { -1 },
        point,
    }
}

/// Crossing of the open segment through the panel interior.
///
/// Returns `Ok(None)` when the segment misses the panel, and
/// `DegenerateIntersection` when the segment is within `tol` of tangent to
/// the panel, or the crossing is within `tol` of a panel edge or of a
/// segment endpoint.
pub fn segment_panel_intersection(
    seg_start: Vector3,
    seg_end: Vector3,
    panel: &Panel,
    transversality_tol: f64,
) -> Result<Option<Crossing>> {
    if seg_start == seg_end {
        return Err(Error::InvalidArgument("segment has zero length".into()));
    }
    let tol = transversality_tol;
    let inside = |x: f64| x > tol && x < 1.0 - tol;
    let outside = |x: f64| x < -tol || x > 1.0 + tol;
    match locate(seg_start, seg_end, panel.base, panel.edge_a, panel.edge_b, tol) {
        PlaneHit::Miss => Ok(None),
        PlaneHit::Tangent => {
            if tangent_segment_misses_panel(seg_start, seg_end, panel, tol) {
                Ok(None)
            } else {
                Err(Error::DegenerateIntersection(
                    "segment is tangent to the panel plane".into(),
                ))
            }
        }
        PlaneHit::Endpoint { alpha, beta } => {
            if outside(alpha) || outside(beta) {
                Ok(None)
            } else {
                Err(Error::DegenerateIntersection(
                    "segment endpoint lies on the panel".into(),
                ))
            }
        }
        PlaneHit::Cross {
            alpha,
            beta,
            sign,
            point,
        } => {
            if inside(alpha) && inside(beta) {
                Ok(Some(Crossing { sign, point }))
            } else if outside(alpha) || outside(beta) {
                Ok(None)
            } else {
                Err(Error::DegenerateIntersection(format!(
                    "crossing at {point:?} lies on a panel edge"
                )))
            }
        }
    }
}

/// For a segment in the panel plane: true when its in-plane projection
/// stays clear of the (tolerance-expanded) parallelogram. Liang-Barsky
/// clipping against `[−tol, 1+tol]²`.
fn tangent_segment_misses_panel(start: Vector3, end: Vector3, panel: &Panel, tol: f64) -> bool {
    let n = panel.area_vector;
    let n2 = n.norm_squared();
    let coords = |p: Vector3| {
        let q = p - panel.base;
        (q.cross(panel.edge_b).dot(n) / n2, panel.edge_a.cross(q).dot(n) / n2)
    };
    let (a0, b0) = coords(start);
    let (a1, b1) = coords(end);
    let (da, db) = (a1 - a0, b1 - b0);
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (p, q) in [
        (-da, a0 + tol),
        (da, 1.0 + tol - a0),
        (-db, b0 + tol),
        (db, 1.0 + tol - b0),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return true;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    t0 > t1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_panel() -> Panel {
        Panel::new(Vector3::ZERO, Vector3::X, Vector3::Y).unwrap()
    }

    const TOL: f64 = DEFAULT_TRANSVERSALITY_TOL;

    #[test]
    fn axis_aligned_crossing() {
        let hit = segment_panel_intersection(
            Vector3::new(0.5, 0.5, -1.0),
            Vector3::new(0.5, 0.5, 1.0),
            &unit_panel(),
            TOL,
        )
        .unwrap()
        .unwrap();
        assert_eq!(hit.sign, 1);
        assert!((hit.point - Vector3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reversed_segment_flips_sign() {
        let hit = segment_panel_intersection(
            Vector3::new(0.5, 0.5, 1.0),
            Vector3::new(0.5, 0.5, -1.0),
            &unit_panel(),
            TOL,
        )
        .unwrap()
        .unwrap();
        assert_eq!(hit.sign, -1);
        assert!((hit.point - Vector3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reversed_panel_flips_sign() {
        let flipped = Panel::new(Vector3::ZERO, Vector3::Y, Vector3::X).unwrap();
        let hit = segment_panel_intersection(
            Vector3::new(0.3, 0.6, -1.0),
            Vector3::new(0.4, 0.2, 1.0),
            &flipped,
            TOL,
        )
        .unwrap()
        .unwrap();
        assert_eq!(hit.sign, -1);
    }

    #[test]
    fn parallel_segment_misses() {
        let r = segment_panel_intersection(
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(1.0, 1.0, 1.0),
            &unit_panel(),
            TOL,
        )
        .unwrap();
        assert!(r.is_none());
        // coplanar but outside
        let r = segment_panel_intersection(
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(3.0, 1.0, 0.0),
            &unit_panel(),
            TOL,
        )
        .unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn coplanar_overlap_is_degenerate() {
        let r = segment_panel_intersection(
            Vector3::new(-1.0, 0.5, 0.0),
            Vector3::new(2.0, 0.5, 0.0),
            &unit_panel(),
            TOL,
        );
        assert!(matches!(r, Err(Error::DegenerateIntersection(_))));
    }

    #[test]
    fn edge_and_endpoint_hits_are_degenerate() {
        let edge = segment_panel_intersection(
            Vector3::new(1.0, 0.5, -1.0),
            Vector3::new(1.0, 0.5, 1.0),
            &unit_panel(),
            TOL,
        );
        assert!(matches!(edge, Err(Error::DegenerateIntersection(_))));
        let endpoint = segment_panel_intersection(
            Vector3::new(0.5, 0.5, 0.0),
            Vector3::new(0.5, 0.5, 1.0),
            &unit_panel(),
            TOL,
        );
        assert!(matches!(endpoint, Err(Error::DegenerateIntersection(_))));
    }

    #[test]
    fn misses_outside_and_short() {
        let outside = segment_panel_intersection(
            Vector3::new(1.5, 0.5, -1.0),
            Vector3::new(1.5, 0.5, 1.0),
            &unit_panel(),
            TOL,
        )
        .unwrap();
        assert!(outside.is_none());
        let short = segment_panel_intersection(
            Vector3::new(0.5, 0.5, 0.5),
            Vector3::new(0.5, 0.5, 1.0),
            &unit_panel(),
            TOL,
        )
        .unwrap();
        assert!(short.is_none());
    }

    #[test]
    fn oblique_crossing_in_skew_panel() {
        let panel = Panel::new(
            Vector3::new(1.0, 1.0, 1.0),
            Vector3::new(2.0, 0.0, 1.0),
            Vector3::new(0.0, 1.0, 1.0),
        )
        .unwrap();
        // centre of the panel
        let c = panel.centroid();
        let dir = Vector3::new(0.3, -0.2, 1.0);
        let hit = segment_panel_intersection(c - dir, c + dir, &panel, TOL)
            .unwrap()
            .unwrap();
        assert!((hit.point - c).norm() < 1e-14);
        assert_eq!(hit.sign, dir.dot(panel.area_vector).signum() as i32);
    }
}
