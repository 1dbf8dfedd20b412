use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector3;

/// Closure tolerance for closed curves, relative to the curve scale.
const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Counterclockwise when viewed from the tip of the axis.
    Ccw,
    Cw,
}

impl Orientation {
    fn sense(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        }
    }
}

/// An oriented curve in space.
///
/// Parametrizations:
/// * `Circle`: `t in [0, 2pi]`, starting at `center + radius * e1` where
///   `(e1, e2)` is [`Vector3::orthonormal_basis`] of the axis.
/// * `PolyLine`: one unit of parameter per segment, `t in [0, segments]`.
/// * `RectLoopCn`: the rectangle (0,0,-n) -> (0,0,n) -> (n,0,n) -> (n,0,-n) -> back,
///   one unit of parameter per leg, `t in [0, 4]`.
/// * `Composite`: the parts' intervals laid end to end from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Curve {
    Circle {
        center: Vector3,
        radius: f64,
        axis: Vector3,
        #[serde(default = "default_orientation")]
        orientation: Orientation,
    },
    PolyLine {
        vertices: Vec<Vector3>,
        closed: bool,
    },
    RectLoopCn {
        n: u32,
    },
    Composite {
        parts: Vec<Curve>,
    },
}

fn default_orientation() -> Orientation {
    Orientation::Ccw
}

/// A smooth piece of a curve with its own parameter interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// Straight segment on `[0, 1]`.
    Segment { start: Vector3, end: Vector3 },
    /// Full circle on `[0, 2pi]`: `center + radius (cos t e1 + sense sin t e2)`.
    Arc {
        center: Vector3,
        radius: f64,
        e1: Vector3,
        e2: Vector3,
        sense: f64,
    },
}

impl Piece {
    pub fn interval(&self) -> (f64, f64) {
        match self {
            Piece::Segment { .. } => (0.0, 1.0),
            Piece::Arc { .. } => (0.0, TAU),
        }
    }

    /// Position and derivative with respect to the piece parameter.
    #[inline]
    pub fn eval(&self, t: f64) -> (Vector3, Vector3) {
        match *self {
            Piece::Segment { start, end } => {
                let d = end - start;
                (start + d * t, d)
            }
            Piece::Arc {
                center,
                radius,
                e1,
                e2,
                sense,
            } => {
                let (s, c) = t.sin_cos();
                (
                    center + (e1 * c + e2 * (sense * s)) * radius,
                    (e1 * (-s) + e2 * (sense * c)) * radius,
                )
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { start, end } => start.distance(end),
            Piece::Arc { radius, .. } => TAU * radius,
        }
    }

    /// Exact Euclidean distance from `p` to the piece.
    pub fn distance_to(&self, p: Vector3) -> f64 {
        match *self {
            Piece::Segment { start, end } => point_segment_distance(p, start, end),
            Piece::Arc {
                center,
                radius,
                e1,
                e2,
                ..
            } => {
                let q = p - center;
                let n = e1.cross(e2);
                let h = q.dot(n);
                let rho = (q - n * h).norm();
                h.hypot(rho - radius)
            }
        }
    }

    /// Vertices of a polygon approximating the piece, excluding the final
    /// endpoint. Segments contribute their start only; arcs are sampled at
    /// half-offset angles `2pi (k + 1/2) / count`.
    fn polygon_vertices(&self, max_chord: f64, out: &mut Vec<Vector3>) {
        match *self {
            Piece::Segment { start, .. } => out.push(start),
            Piece::Arc { radius, .. } => {
                // a multiple of 4 keeps every vertex off the quarter points
                let count = ((TAU * radius / max_chord).ceil() as usize).max(8).next_multiple_of(4);
                for k in 0..count {
                    let t = TAU * (k as f64 + 0.5) / count as f64;
                    out.push(self.eval(t).0);
                }
            }
        }
    }
}

pub(crate) fn point_segment_distance(p: Vector3, a: Vector3, b: Vector3) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.distance(a + d * s)
}

impl Curve {
    pub fn circle(
        center: Vector3,
        radius: f64,
        axis: Vector3,
        orientation: Orientation,
    ) -> Result<Self> {
        let c = Curve::Circle {
            center,
            radius,
            axis,
            orientation,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn polyline(vertices: Vec<Vector3>, closed: bool) -> Result<Self> {
        let c = Curve::PolyLine { vertices, closed };
        c.validate()?;
        Ok(c)
    }

    pub fn rect_loop(n: u32) -> Result<Self> {
        let c = Curve::RectLoopCn { n };
        c.validate()?;
        Ok(c)
    }

    pub fn composite(parts: Vec<Curve>) -> Result<Self> {
        let c = Curve::Composite { parts };
        c.validate()?;
        Ok(c)
    }

    /// Checks the construction invariants. Deserialized curves are unchecked
    /// until this runs.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGeometry(msg));
        match self {
            Curve::Circle {
                center,
                radius,
                axis,
                ..
            } => {
                if !center.is_finite() || !axis.is_finite() || !radius.is_finite() {
                    return bad("circle parameters must be finite".into());
                }
                if *radius <= 0.0 {
                    return bad(format!("circle radius must be positive, got {radius}"));
                }
                if axis.normalized().is_none() {
                    return bad("circle axis must be nonzero".into());
                }
            }
            Curve::PolyLine { vertices, closed } => {
                if vertices.len() < 2 {
                    return bad("polyline needs at least two vertices".into());
                }
                if *closed && vertices.len() < 3 {
                    return bad("closed polyline needs at least three vertices".into());
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return bad("polyline vertices must be finite".into());
                }
                let pieces = self.pieces();
                if pieces.iter().any(|p| p.length() == 0.0) {
                    return bad("polyline has a zero-length segment".into());
                }
            }
            Curve::RectLoopCn { n } => {
                if *n == 0 {
                    return bad("RectLoopCn needs n >= 1".into());
                }
            }
            Curve::Composite { parts } => {
                if parts.is_empty() {
                    return bad("composite curve needs at least one part".into());
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// The smooth pieces in traversal order.
    pub fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::new();
        self.collect_pieces(&mut out);
        out
    }

    fn collect_pieces(&self, out: &mut Vec<Piece>) {
        match self {
            Curve::Circle {
                center,
                radius,
                axis,
                orientation,
            } => {
                let n = axis.normalized().unwrap_or(Vector3::Z);
                let (e1, e2) = n.orthonormal_basis();
                out.push(Piece::Arc {
                    center: *center,
                    radius: *radius,
                    e1,
                    e2,
                    sense: orientation.sense(),
                });
            }
            Curve::PolyLine { vertices, closed } => {
                for w in vertices.windows(2) {
                    out.push(Piece::Segment {
                        start: w[0],
                        end: w[1],
                    });
                }
                if *closed {
                    out.push(Piece::Segment {
                        start: vertices[vertices.len() - 1],
                        end: vertices[0],
                    });
                }
            }
            Curve::RectLoopCn { n } => {
                let corners = rect_loop_corners(*n);
                for k in 0..4 {
                    out.push(Piece::Segment {
                        start: corners[k],
                        end: corners[(k + 1) % 4],
                    });
                }
            }
            Curve::Composite { parts } => {
                for p in parts {
                    p.collect_pieces(out);
                }
            }
        }
    }

    pub fn param_interval(&self) -> (f64, f64) {
        let len: f64 = self
            .pieces()
            .iter()
            .map(|p| {
                let (a, b) = p.interval();
                b - a
            })
            .sum();
        (0.0, len)
    }

    /// Position `m(t)` and tangent `dm/dt`. At a joint between pieces the
    /// outgoing piece is used.
    pub fn eval(&self, t: f64) -> Result<(Vector3, Vector3)> {
        let (start, end) = self.param_interval();
        if !(t >= start && t <= end) {
            return Err(Error::ParamOutOfRange { t, start, end });
        }
        let pieces = self.pieces();
        let mut offset = 0.0;
        for (k, p) in pieces.iter().enumerate() {
            let (a, b) = p.interval();
            let len = b - a;
            if t < offset + len || k + 1 == pieces.len() {
                return Ok(p.eval(a + (t - offset).min(len)));
            }
            offset += len;
        }
        unreachable!("curve has at least one piece")
    }

    /// Whether the curve returns to its start. Composites are closed when
    /// every part is closed or the parts chain into one loop.
    pub fn is_closed(&self) -> bool {
        match self {
            Curve::Circle { .. } | Curve::RectLoopCn { .. } => true,
            Curve::PolyLine { closed, .. } => *closed,
            Curve::Composite { parts } => {
                if parts.iter().all(Curve::is_closed) {
                    return true;
                }
                let tol = CLOSURE_TOL * self.scale().max(1.0);
                let ends: Vec<(Vector3, Vector3)> = parts.iter().map(Curve::endpoints).collect();
                (0..ends.len()).all(|k| {
                    let next = ends[(k + 1) % ends.len()].0;
                    ends[k].1.distance(next) <= tol
                })
            }
        }
    }

    fn endpoints(&self) -> (Vector3, Vector3) {
        let pieces = self.pieces();
        let first = pieces[0];
        let last = pieces[pieces.len() - 1];
        (first.eval(first.interval().0).0, last.eval(last.interval().1).0)
    }

    /// The same point set traversed backwards.
    pub fn reversed(&self) -> Curve {
        match self {
            Curve::Circle {
                center,
                radius,
                axis,
                orientation,
            } => Curve::Circle {
                center: *center,
                radius: *radius,
                axis: *axis,
                orientation: orientation.flipped(),
            },
            Curve::PolyLine { vertices, closed } => {
                let mut v = vertices.clone();
                if *closed {
                    // keep the start vertex so the loops share m(0)
                    v[1..].reverse();
                } else {
                    v.reverse();
                }
                Curve::PolyLine {
                    vertices: v,
                    closed: *closed,
                }
            }
            Curve::RectLoopCn { n } => {
                let c = rect_loop_corners(*n);
                Curve::PolyLine {
                    vertices: vec![c[0], c[3], c[2], c[1]],
                    closed: true,
                }
            }
            Curve::Composite { parts } => Curve::Composite {
                parts: parts.iter().rev().map(Curve::reversed).collect(),
            },
        }
    }

    /// Rigid motion `x -> rotation * x + translation`, with `rotation` given by
    /// its rows. Circles keep their start point only up to the basis choice.
    pub fn transformed(&self, rotation: &[Vector3; 3], translation: Vector3) -> Curve {
        let rot = |v: Vector3| Vector3::new(rotation[0].dot(v), rotation[1].dot(v), rotation[2].dot(v));
        let map = |v: Vector3| rot(v) + translation;
        match self {
            Curve::Circle {
                center,
                radius,
                axis,
                orientation,
            } => Curve::Circle {
                center: map(*center),
                radius: *radius,
                axis: rot(*axis),
                orientation: *orientation,
            },
            Curve::PolyLine { vertices, closed } => Curve::PolyLine {
                vertices: vertices.iter().map(|v| map(*v)).collect(),
                closed: *closed,
            },
            Curve::RectLoopCn { n } => {
                let c = rect_loop_corners(*n);
                Curve::PolyLine {
                    vertices: c.iter().map(|v| map(*v)).collect(),
                    closed: true,
                }
            }
            Curve::Composite { parts } => Curve::Composite {
                parts: parts.iter().map(|p| p.transformed(rotation, translation)).collect(),
            },
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vector3, Vector3) {
        let mut lo = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in self.pieces() {
            match p {
                Piece::Segment { start, end } => {
                    lo = lo.component_min(start).component_min(end);
                    hi = hi.component_max(start).component_max(end);
                }
                Piece::Arc {
                    center,
                    radius,
                    e1,
                    e2,
                    ..
                } => {
                    let n = e1.cross(e2);
                    let ext = Vector3::new(
                        (1.0 - n.x * n.x).max(0.0).sqrt(),
                        (1.0 - n.y * n.y).max(0.0).sqrt(),
                        (1.0 - n.z * n.z).max(0.0).sqrt(),
                    ) * radius;
                    lo = lo.component_min(center - ext);
                    hi = hi.component_max(center + ext);
                }
            }
        }
        (lo, hi)
    }

    /// Bounding-box diagonal.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn length(&self) -> f64 {
        self.pieces().iter().map(Piece::length).sum()
    }

    /// Exact distance from a point to the curve.
    pub fn distance_to(&self, p: Vector3) -> f64 {
        self.pieces()
            .iter()
            .map(|piece| piece.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vector area `1/2 ∮ m × dm`; its direction is the normal that the
    /// traversal circles counterclockwise.
    pub fn vector_area(&self) -> Vector3 {
        self.pieces()
            .iter()
            .map(|p| match *p {
                Piece::Segment { start, end } => start.cross(end) * 0.5,
                // the center drops out since ∮ u' dt = 0
                Piece::Arc {
                    radius,
                    e1,
                    e2,
                    sense,
                    ..
                } => e1.cross(e2) * (PI * radius * radius * sense),
            })
            .sum()
    }

    /// Closed polygon approximating the curve with chords of at most
    /// `max_chord` along arcs. Straight pieces are kept whole.
    pub fn to_polygon(&self, max_chord: f64) -> Vec<Vector3> {
        let mut out = Vec::new();
        for p in self.pieces() {
            p.polygon_vertices(max_chord, &mut out);
        }
        if !self.is_closed() {
            out.push(self.endpoints().1);
        }
        out
    }
}

fn rect_loop_corners(n: u32) -> [Vector3; 4] {
    let n = n as f64;
    [
        Vector3::new(0.0, 0.0, -n),
        Vector3::new(0.0, 0.0, n),
        Vector3::new(n, 0.0, n),
        Vector3::new(n, 0.0, -n),
    ]
}

/// Minimum distance between two curves.
///
/// Pairs of pieces are sampled coarsely, then the best pair is polished by
/// alternating exact point-to-piece projections from several seeds.
pub fn curve_distance(a: &Curve, b: &Curve) -> f64 {
    let pa = a.pieces();
    let pb = b.pieces();
    let mut best = f64::INFINITY;
    const SAMPLES: usize = 64;
    for p in &pa {
        let (t0, t1) = p.interval();
        for k in 0..=SAMPLES {
            let t = t0 + (t1 - t0) * k as f64 / SAMPLES as f64;
            let x = p.eval(t).0;
            for q in &pb {
                best = best.min(q.distance_to(x));
            }
        }
    }
    for q in &pb {
        let (t0, t1) = q.interval();
        for k in 0..=SAMPLES {
            let t = t0 + (t1 - t0) * k as f64 / SAMPLES as f64;
            let x = q.eval(t).0;
            for p in &pa {
                best = best.min(p.distance_to(x));
            }
        }
    }
    // local refinement: golden-section search of the exact distance along each piece of `a`
    for p in &pa {
        let (t0, t1) = p.interval();
        let f = |t: f64| {
            let x = p.eval(t).0;
            pb.iter().map(|q| q.distance_to(x)).fold(f64::INFINITY, f64::min)
        };
        let h = (t1 - t0) / SAMPLES as f64;
        let mut k_best = 0;
        let mut v_best = f64::INFINITY;
        for k in 0..=SAMPLES {
            let v = f(t0 + h * k as f64);
            if v < v_best {
                v_best = v;
                k_best = k;
            }
        }
        let lo = (t0 + h * (k_best as f64 - 1.0)).max(t0);
        let hi = (t0 + h * (k_best as f64 + 1.0)).min(t1);
        best = best.min(golden_min(f, lo, hi));
    }
    best
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd).min(f(a)).min(f(b))
}

/// Symmetric Hausdorff distance between two curves, using exact
/// point-to-curve distances from samples spaced at most `spacing` apart.
pub fn hausdorff_distance(a: &Curve, b: &Curve, spacing: f64) -> f64 {
    let one_sided = |from: &Curve, to: &Curve| {
        let mut worst: f64 = 0.0;
        for p in from.pieces() {
            let (t0, t1) = p.interval();
            let count = ((p.length() / spacing).ceil() as usize).max(1);
            for k in 0..=count {
                let x = p.eval(t0 + (t1 - t0) * k as f64 / count as f64).0;
                worst = worst.max(to.distance_to(x));
            }
        }
        worst
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle() -> Curve {
        Curve::circle(Vector3::ZERO, 1.0, Vector3::Z, Orientation::Ccw).unwrap()
    }

    fn close(a: Vector3, b: Vector3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn circle_start_point() {
        let c = unit_circle();
        assert_eq!(c.param_interval(), (0.0, TAU));
        let (p, d) = c.eval(0.0).unwrap();
        assert!(close(p, Vector3::X, 1e-15));
        assert!(close(d, Vector3::Y, 1e-15));
    }

    #[test]
    fn rect_loop_first_leg_midpoint() {
        let c = Curve::rect_loop(4).unwrap();
        assert_eq!(c.param_interval(), (0.0, 4.0));
        let (p, d) = c.eval(0.5).unwrap();
        assert!(close(p, Vector3::ZERO, 1e-15));
        // leg length 8 over a unit parameter share
        assert!(close(d, Vector3::new(0.0, 0.0, 8.0), 1e-15));
    }

    #[test]
    fn rect_loop_corners_in_order() {
        let c = Curve::rect_loop(3).unwrap();
        let want = [
            Vector3::new(0.0, 0.0, -3.0),
            Vector3::new(0.0, 0.0, 3.0),
            Vector3::new(3.0, 0.0, 3.0),
            Vector3::new(3.0, 0.0, -3.0),
            Vector3::new(0.0, 0.0, -3.0),
        ];
        for (k, w) in want.iter().enumerate() {
            assert!(close(c.eval(k as f64).unwrap().0, *w, 1e-15));
        }
    }

    #[test]
    fn open_polyline_interpolates() {
        let c = Curve::polyline(vec![Vector3::ZERO, Vector3::X], false).unwrap();
        let (p, d) = c.eval(0.5).unwrap();
        assert!(close(p, Vector3::new(0.5, 0.0, 0.0), 1e-15));
        assert!(close(d, Vector3::X, 1e-15));
        assert!(!c.is_closed());
    }

    #[test]
    fn vertex_tangent_is_outgoing() {
        let c = Curve::polyline(vec![Vector3::ZERO, Vector3::X, Vector3::new(1.0, 1.0, 0.0)], false)
            .unwrap();
        let (p, d) = c.eval(1.0).unwrap();
        assert!(close(p, Vector3::X, 1e-15));
        assert!(close(d, Vector3::Y, 1e-15));
    }

    #[test]
    fn out_of_range_parameter() {
        let c = unit_circle();
        assert!(matches!(c.eval(7.0), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(c.eval(-1e-9), Err(Error::ParamOutOfRange { .. })));
    }

    #[test]
    fn closed_curves_close() {
        for c in [
            unit_circle(),
            Curve::rect_loop(5).unwrap(),
            Curve::polyline(vec![Vector3::ZERO, Vector3::X, Vector3::Y], true).unwrap(),
        ] {
            let (a, b) = c.param_interval();
            let gap = c.eval(a).unwrap().0.distance(c.eval(b).unwrap().0);
            assert!(gap <= 1e-12 * c.scale(), "{c:?}: gap {gap}");
        }
    }

    #[test]
    fn reversal_negates_tangent() {
        let curves = [
            unit_circle(),
            Curve::rect_loop(2).unwrap(),
            Curve::circle(
                Vector3::new(1.0, 0.0, 0.0),
                0.7,
                Vector3::new(0.3, -1.0, 0.2),
                Orientation::Cw,
            )
            .unwrap(),
        ];
        for c in &curves {
            let r = c.reversed();
            let (a, b) = c.param_interval();
            for k in 1..40 {
                let t = a + (b - a) * (k as f64 + 0.37) / 41.0;
                let (p, d) = c.eval(t).unwrap();
                // find the matching point on the reversed curve by dense search
                let (ra, rb) = r.param_interval();
                let mut best = (f64::INFINITY, Vector3::ZERO);
                for j in 0..=20000 {
                    let s = ra + (rb - ra) * j as f64 / 20000.0;
                    let (q, e) = r.eval(s).unwrap();
                    let dist = q.distance(p);
                    if dist < best.0 {
                        best = (dist, e);
                    }
                }
                let e = best.1;
                let cos = e.dot(d) / (e.norm() * d.norm());
                assert!(cos < -0.999, "{c:?} at t={t}: cos {cos}");
            }
        }
    }

    #[test]
    fn invalid_curves_rejected() {
        assert!(Curve::circle(Vector3::ZERO, 0.0, Vector3::Z, Orientation::Ccw).is_err());
        assert!(Curve::circle(Vector3::ZERO, 1.0, Vector3::ZERO, Orientation::Ccw).is_err());
        assert!(Curve::polyline(vec![Vector3::ZERO], false).is_err());
        assert!(Curve::polyline(vec![Vector3::ZERO, Vector3::ZERO, Vector3::X], true).is_err());
        assert!(Curve::rect_loop(0).is_err());
        assert!(Curve::polyline(vec![Vector3::ZERO, Vector3::new(f64::NAN, 0.0, 0.0)], false).is_err());
    }

    #[test]
    fn distances() {
        let c = unit_circle();
        assert!((c.distance_to(Vector3::new(0.0, 0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert!((c.distance_to(Vector3::new(3.0, 0.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!(c.distance_to(Vector3::new(0.0, 1.0, 0.0)) < 1e-15);
        let far = Curve::circle(Vector3::new(0.0, 0.0, 10.0), 1.0, Vector3::Z, Orientation::Ccw)
            .unwrap();
        assert!((curve_distance(&c, &far) - 10.0).abs() < 1e-9);
        let leg = Curve::rect_loop(4).unwrap();
        assert!((curve_distance(&leg, &c) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vector_areas() {
        let c = unit_circle();
        assert!(close(c.vector_area(), Vector3::new(0.0, 0.0, PI), 1e-14));
        assert!(close(c.reversed().vector_area(), Vector3::new(0.0, 0.0, -PI), 1e-14));
        let sq = Curve::polyline(
            vec![Vector3::ZERO, Vector3::X, Vector3::new(1.0, 1.0, 0.0), Vector3::Y],
            true,
        )
        .unwrap();
        assert!(close(sq.vector_area(), Vector3::Z, 1e-15));
        // C_n lies in the xz plane with area 2n^2, circling +y
        let rl = Curve::rect_loop(2).unwrap();
        assert!(close(rl.vector_area(), Vector3::new(0.0, 8.0, 0.0), 1e-12));
    }

    #[test]
    fn bounding_box_of_tilted_circle() {
        let c = Curve::circle(Vector3::ZERO, 2.0, Vector3::Y, Orientation::Ccw).unwrap();
        let (lo, hi) = c.bounding_box();
        assert!(close(lo, Vector3::new(-2.0, 0.0, -2.0), 1e-15));
        assert!(close(hi, Vector3::new(2.0, 0.0, 2.0), 1e-15));
    }

    #[test]
    fn polygon_sampling_respects_chord() {
        let c = unit_circle();
        let poly = c.to_polygon(0.05);
        for k in 0..poly.len() {
            assert!(poly[k].distance(poly[(k + 1) % poly.len()]) <= 0.05);
        }
        assert_eq!(Curve::rect_loop(3).unwrap().to_polygon(0.01).len(), 4);
    }

    #[test]
    fn hausdorff_of_polygon_and_circle() {
        let c = unit_circle();
        let poly = Curve::polyline(c.to_polygon(0.1), true).unwrap();
        let h = hausdorff_distance(&c, &poly, 0.01);
        // sagitta of a 0.1 chord on the unit circle
        assert!(h < 0.0013 && h > 0.0010, "{h}");
    }

    #[test]
    fn serde_tags() {
        let c: Curve = serde_json::from_str(
            r#"{"kind":"circle","center":[0,0,0],"radius":1.0,"axis":[0,0,1],"orientation":"cw"}"#,
        )
        .unwrap();
        assert!(matches!(c, Curve::Circle { orientation: Orientation::Cw, .. }));
        let r: Curve = serde_json::from_str(r#"{"kind":"rect_loop_cn","n":7}"#).unwrap();
        assert_eq!(r, Curve::RectLoopCn { n: 7 });
        assert!(serde_json::from_str::<Curve>(r#"{"kind":"rect_loop_cn","n":7,"extra":1}"#).is_err());
    }
}
