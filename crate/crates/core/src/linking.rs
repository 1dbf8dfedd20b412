//! Linking of two closed curves, computed two independent ways: the Gauss
//! double integral by adaptive quadrature, and the signed count of crossings
//! of one curve through a meshed surface spanning the other.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    curve_distance, hausdorff_distance, locate, mesh_boundary, scene_scale, Curve, PlaneHit,
    SurfaceMesh,
};
use crate::fields::FieldConstants;
use crate::quadrature::{integrate_2d, Estimate, QuadratureSpec, Rect};
use crate::vector::Vector3;

/// Two closed disjoint curves `C` (the current loop) and `L` (the circuit),
/// optionally with a mesh spanning `L`.
#[derive(Debug, Clone)]
pub struct LinkScene {
    pub curve_c: Curve,
    pub curve_l: Curve,
    pub spanning_mesh: Option<SurfaceMesh>,
}

impl LinkScene {
    /// Validates closure, disjointness and, when a mesh is given, that its
    /// boundary follows `L` with the same orientation.
    pub fn new(
        curve_c: Curve,
        curve_l: Curve,
        spanning_mesh: Option<SurfaceMesh>,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let scene = Self {
            curve_c,
            curve_l,
            spanning_mesh,
        };
        scene.validate(spec)?;
        Ok(scene)
    }

    pub fn scale(&self) -> f64 {
        let (a0, a1) = self.curve_c.bounding_box();
        let (b0, b1) = self.curve_l.bounding_box();
        scene_scale([a0, a1, b0, b1])
    }

    /// Closest approach of the two curves.
    pub fn separation(&self) -> f64 {
        curve_distance(&self.curve_c, &self.curve_l)
    }

    pub fn validate(&self, spec: &QuadratureSpec) -> Result<()> {
        spec.validate()?;
        self.curve_c.validate()?;
        self.curve_l.validate()?;
        if !self.curve_c.is_closed() || !self.curve_l.is_closed() {
            return Err(Error::InvalidGeometry("both curves of a link scene must be closed".into()));
        }
        let distance = self.separation();
        let guard = spec.guard(self.scale());
        if distance <= guard {
            return Err(Error::CurvesTooClose { distance, guard });
        }
        if let Some(mesh) = &self.spanning_mesh {
            let boundary = mesh_boundary(mesh)?;
            let spacing = (mesh.min_edge() / 4.0).min(self.curve_l.length() / 64.0);
            let gap = hausdorff_distance(&boundary, &self.curve_l, spacing);
            if gap >= 0.5 * distance {
                return Err(Error::InvalidGeometry(format!(
                    "spanning mesh boundary is {gap:.3e} from L, curves are only {distance:.3e} apart"
                )));
            }
            if boundary.vector_area().dot(self.curve_l.vector_area()) <= 0.0 {
                return Err(Error::InvalidGeometry(
                    "spanning mesh boundary runs against the orientation of L".into(),
                ));
            }
        }
        Ok(())
    }

    /// The same pair with the roles of `C` and `L` exchanged (the mesh is dropped).
    pub fn swapped(&self) -> LinkScene {
        LinkScene {
            curve_c: self.curve_l.clone(),
            curve_l: self.curve_c.clone(),
            spanning_mesh: None,
        }
    }
}

/// Gauss linking integral
/// `k_B ∬ ((dm × (l − m)) · dl) / ‖l − m‖³`, which is the circulation of
/// the field of `C` around `L`. Integer valued for `k_B = 1/(4π)`.
pub fn gauss_linking(
    scene: &LinkScene,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>> {
    let parts = gauss_linking_by_piece(scene, consts, spec)?;
    Ok(parts.into_iter().fold(Estimate::zero(), |acc, e| acc + e))
}

/// Contribution of each piece of `C`, in piece order.
pub fn gauss_linking_by_piece(
    scene: &LinkScene,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vec<Estimate<f64>>> {
    consts.validate()?;
    spec.validate()?;
    let distance = scene.separation();
    let guard = spec.guard(scene.scale());
    if distance <= guard {
        return Err(Error::CurvesTooClose { distance, guard });
    }
    let pc = scene.curve_c.pieces();
    let pl = scene.curve_l.pieces();
    let pairs: Vec<(usize, usize)> = (0..pc.len())
        .flat_map(|i| (0..pl.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<Estimate<f64>>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (c, l) = (&pc[i], &pl[j]);
            integrate_2d(
                |t, s| {
                    let (m, dm) = c.eval(t);
                    let (p, dl) = l.eval(s);
                    let r = p - m;
                    let d2 = r.norm_squared();
                    dm.cross(r).dot(dl) / (d2 * d2.sqrt())
                },
                Rect::new(c.interval(), l.interval()),
                spec,
            )
        })
        .collect();
    let mut per_piece = vec![Estimate::zero(); pc.len()];
    for (&(i, _), r) in pairs.iter().zip(results) {
        per_piece[i] = per_piece[i] + r?;
    }
    Ok(per_piece.into_iter().map(|e| e.scaled(consts.k_b)).collect())
}

/// Signed number of crossings of `curve_c` through the mesh.
///
/// `C` is replaced by a polygon with chords at most a quarter of the
/// shortest mesh edge; straight pieces are kept whole. Each mesh cell is
/// split along its `(i, j)–(i+1, j+1)` diagonal into two triangles on the
/// exact grid nodes, so adjacent cells share edges exactly. A crossing on
/// the internal diagonal is counted once; one on a cell edge or node, or at
/// a polygon vertex, is refused as degenerate.
pub fn combinatorial_lk(curve_c: &Curve, mesh: &SurfaceMesh, transversality_tol: f64) -> Result<i64> {
    curve_c.validate()?;
    if !curve_c.is_closed() {
        return Err(Error::InvalidGeometry("linking needs a closed curve".into()));
    }
    if !(transversality_tol > 0.0 && transversality_tol < 0.1) {
        return Err(Error::InvalidArgument(format!(
            "transversality tolerance {transversality_tol} outside (0, 0.1)"
        )));
    }
    let poly = curve_c.to_polygon(mesh.min_edge() / 4.0);
    let cells: Vec<(usize, usize)> = (0..mesh.m)
        .flat_map(|i| (0..mesh.n).map(move |j| (i, j)))
        .collect();
    let mut total = 0i64;
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let lo = a.component_min(b);
        let hi = a.component_max(b);
        for &(i, j) in &cells {
            let corners = mesh.cell_corners(i, j);
            if !boxes_overlap(lo, hi, &corners) {
                continue;
            }
            total += cell_crossings(a, b, &corners, transversality_tol)?;
        }
    }
    Ok(total)
}

fn boxes_overlap(lo: Vector3, hi: Vector3, corners: &[Vector3; 4]) -> bool {
    let mut clo = corners[0];
    let mut chi = corners[0];
    for c in &corners[1..] {
        clo = clo.component_min(*c);
        chi = chi.component_max(*c);
    }
    let pad = 1e-9 * (chi - clo).norm();
    lo.x <= chi.x + pad
        && lo.y <= chi.y + pad
        && lo.z <= chi.z + pad
        && hi.x >= clo.x - pad
        && hi.y >= clo.y - pad
        && hi.z >= clo.z - pad
}

/// Where a hit falls within one triangle `(base, base + a, base + b)`.
enum TriangleHit {
    Outside,
    Interior(i32),
    /// On the shared diagonal of the cell, away from its ends.
    Diagonal(i32),
}

/// `diagonal_is_alpha`: the diagonal is the `α = 0` side (first triangle)
/// or the `β = 0` side (second triangle).
fn triangle_hit(
    start: Vector3,
    end: Vector3,
    base: Vector3,
    a: Vector3,
    b: Vector3,
    diagonal_is_alpha: bool,
    tol: f64,
) -> Result<TriangleHit> {
    let near = |x: f64| x.abs() <= tol;
    let out = |al: f64, be: f64| al < -tol || be < -tol || al + be > 1.0 + tol;
    match locate(start, end, base, a, b, tol) {
        PlaneHit::Miss => Ok(TriangleHit::Outside),
        PlaneHit::Tangent => {
            if segment_clear_of_triangle(start, end, base, a, b, tol) {
                Ok(TriangleHit::Outside)
            } else {
                Err(Error::NonTransversal(format!(
                    "segment {start:?} -> {end:?} is tangent to the spanning surface"
                )))
            }
        }
        PlaneHit::Endpoint { alpha, beta } => {
            if out(alpha, beta) {
                Ok(TriangleHit::Outside)
            } else {
                Err(Error::DegenerateIntersection(format!(
                    "polygon vertex near {start:?} lies on the spanning surface"
                )))
            }
        }
        PlaneHit::Cross {
            alpha,
            beta,
            sign,
            point,
        } => {
            if out(alpha, beta) {
                return Ok(TriangleHit::Outside);
            }
            let (diag, other) = if diagonal_is_alpha { (alpha, beta) } else { (beta, alpha) };
            if near(other) || near(alpha + beta - 1.0) {
                return Err(Error::DegenerateIntersection(format!(
                    "crossing at {point:?} lies on a mesh edge"
                )));
            }
            if near(diag) {
                Ok(TriangleHit::Diagonal(sign))
            } else {
                Ok(TriangleHit::Interior(sign))
            }
        }
    }
}

fn cell_crossings(start: Vector3, end: Vector3, c: &[Vector3; 4], tol: f64) -> Result<i64> {
    let first = triangle_hit(start, end, c[0], c[1] - c[0], c[2] - c[0], true, tol)?;
    let second = triangle_hit(start, end, c[0], c[2] - c[0], c[3] - c[0], false, tol)?;
    let mut total = 0i64;
    let mut diagonal = None;
    for hit in [first, second] {
        match hit {
            TriangleHit::Outside => {}
            TriangleHit::Interior(s) => total += s as i64,
            TriangleHit::Diagonal(s) => diagonal = diagonal.or(Some(s)),
        }
    }
    Ok(total + diagonal.map_or(0, |s| s as i64))
}

/// True when a segment lying along the triangle's plane stays farther than
/// `tol` (in triangle coordinates) from the triangle.
fn segment_clear_of_triangle(
    start: Vector3,
    end: Vector3,
    base: Vector3,
    a: Vector3,
    b: Vector3,
    tol: f64,
) -> bool {
    let n = a.cross(b);
    let n2 = n.norm_squared();
    let reach = tol * n2.sqrt().sqrt().max((end - start).norm());
    let h0 = (start - base).dot(n) / n2.sqrt();
    let h1 = (end - base).dot(n) / n2.sqrt();
    if (h0 > reach && h1 > reach) || (h0 < -reach && h1 < -reach) {
        return true;
    }
    let coords = |p: Vector3| {
        let q = p - base;
        (q.cross(b).dot(n) / n2, a.cross(q).dot(n) / n2)
    };
    let (a0, b0) = coords(start);
    let (a1, b1) = coords(end);
    let (da, db) = (a1 - a0, b1 - b0);
    // clip s in [0, 1] against α ≥ −tol, β ≥ −tol, α + β ≤ 1 + tol
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (p, q) in [(-da, a0 + tol), (-db, b0 + tol), (da + db, 1.0 + tol - a0 - b0)] {
        if p == 0.0 {
            if q < 0.0 {
                return true;
            }
        } else if p < 0.0 {
            t0 = t0.max(q / p);
        } else {
            t1 = t1.min(q / p);
        }
    }
    t0 > t1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_surface, Orientation, SurfacePatch, DEFAULT_TRANSVERSALITY_TOL};

    const TOL: f64 = DEFAULT_TRANSVERSALITY_TOL;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn unit_circle() -> Curve {
        Curve::circle(Vector3::ZERO, 1.0, Vector3::Z, Orientation::Ccw).unwrap()
    }

    fn disk_mesh(m: usize) -> SurfaceMesh {
        let disk = SurfacePatch::Disk {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
        };
        mesh_surface(&disk, m, m).unwrap()
    }

    fn dome_mesh(m: usize) -> SurfaceMesh {
        let dome = SurfacePatch::Dome {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
            height: 0.6,
        };
        mesh_surface(&dome, m, m).unwrap()
    }

    fn hopf_c() -> Curve {
        Curve::circle(Vector3::X, 1.0, Vector3::Y, Orientation::Ccw).unwrap()
    }

    #[test]
    fn hopf_link_is_plus_one() {
        let scene = LinkScene::new(hopf_c(), unit_circle(), Some(disk_mesh(21)), &spec()).unwrap();
        let a = gauss_linking(&scene, &FieldConstants::default(), &spec()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-6, "{a:?}");
        let lk = combinatorial_lk(&scene.curve_c, scene.spanning_mesh.as_ref().unwrap(), TOL).unwrap();
        assert_eq!(lk, 1);
    }

    #[test]
    fn far_circles_do_not_link() {
        let c = Curve::circle(Vector3::new(0.0, 0.0, 10.0), 1.0, Vector3::Z, Orientation::Ccw).unwrap();
        let scene = LinkScene::new(c.clone(), unit_circle(), Some(disk_mesh(9)), &spec()).unwrap();
        let a = gauss_linking(&scene, &FieldConstants::default(), &spec()).unwrap();
        assert!(a.value.abs() < 1e-6);
        assert_eq!(combinatorial_lk(&c, &disk_mesh(9), TOL).unwrap(), 0);
    }

    #[test]
    fn lemma_loop_links_once() {
        let c = Curve::rect_loop(4).unwrap();
        assert_eq!(combinatorial_lk(&c, &disk_mesh(11), TOL).unwrap(), 1);
        let scene = LinkScene::new(Curve::rect_loop(32).unwrap(), unit_circle(), None, &spec()).unwrap();
        let a = gauss_linking(&scene, &FieldConstants::default(), &spec()).unwrap();
        assert!((a.value - 1.0).abs() < 1e-2);
        // leg on the z axis: closed form n / sqrt(1 + n²)
        let parts = gauss_linking_by_piece(&scene, &FieldConstants::default(), &spec()).unwrap();
        let want = 32.0 / (1.0f64 + 32.0 * 32.0).sqrt();
        assert!((parts[0].value - want).abs() < 1e-8, "{} vs {want}", parts[0].value);
    }

    fn double_wind() -> Curve {
        let v = |x: f64, y: f64, z: f64| Vector3::new(x, y, z);
        Curve::polyline(
            vec![
                v(0.3, 0.1, -1.0),
                v(0.3, 0.1, 1.0),
                v(3.0, 0.1, 1.0),
                v(3.0, 0.1, -1.0),
                v(-0.3, 0.2, -1.0),
                v(-0.3, 0.2, 1.0),
                v(-3.0, 0.2, 1.0),
                v(-3.0, 0.2, -1.5),
                v(0.3, 0.1, -1.5),
            ],
            true,
        )
        .unwrap()
    }

    /// Brute force: signed passes of each polyline edge through the open
    /// unit disk in the plane z = 0.
    fn disk_crossings_oracle(poly: &[Vector3]) -> i64 {
        let mut total = 0;
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            if (a.z < 0.0) == (b.z < 0.0) {
                continue;
            }
            let s = a.z / (a.z - b.z);
            let p = a + (b - a) * s;
            if p.x * p.x + p.y * p.y < 1.0 {
                total += if b.z > a.z { 1 } else { -1 };
            }
        }
        total
    }

    #[test]
    fn double_winding() {
        let c = double_wind();
        let verts = c.to_polygon(1.0);
        assert_eq!(disk_crossings_oracle(&verts), 2);
        assert_eq!(combinatorial_lk(&c, &disk_mesh(15), TOL).unwrap(), 2);
        let scene = LinkScene::new(c, unit_circle(), None, &spec()).unwrap();
        let a = gauss_linking(&scene, &FieldConstants::default(), &spec()).unwrap();
        assert!((a.value - 2.0).abs() < 1e-6, "{a:?}");
    }

    #[test]
    fn symmetric_in_the_two_curves() {
        let scene = LinkScene::new(hopf_c(), unit_circle(), None, &spec()).unwrap();
        let c = FieldConstants::default();
        let ab = gauss_linking(&scene, &c, &spec()).unwrap();
        let ba = gauss_linking(&scene.swapped(), &c, &spec()).unwrap();
        assert!((ab.value - ba.value).abs() <= 2.0 * (ab.error + ba.error));
    }

    #[test]
    fn reversal_flips_sign() {
        let c = FieldConstants::default();
        let fwd = LinkScene::new(hopf_c(), unit_circle(), None, &spec()).unwrap();
        let rev = LinkScene::new(hopf_c().reversed(), unit_circle(), None, &spec()).unwrap();
        let a = gauss_linking(&fwd, &c, &spec()).unwrap().value;
        let b = gauss_linking(&rev, &c, &spec()).unwrap().value;
        assert!((a + b).abs() < 1e-9);
        assert_eq!(combinatorial_lk(&hopf_c().reversed(), &disk_mesh(21), TOL).unwrap(), -1);
        let flipped = mesh_surface(
            &SurfacePatch::Disk {
                center: Vector3::ZERO,
                radius: 1.0,
                axis: -Vector3::Z,
            },
            21,
            21,
        )
        .unwrap();
        assert_eq!(combinatorial_lk(&hopf_c(), &flipped, TOL).unwrap(), -1);
    }

    #[test]
    fn lk_independent_of_spanning_surface() {
        for c in [hopf_c(), double_wind(), Curve::rect_loop(3).unwrap()] {
            let flat = combinatorial_lk(&c, &disk_mesh(15), TOL).unwrap();
            let dome = combinatorial_lk(&c, &dome_mesh(15), TOL).unwrap();
            assert_eq!(flat, dome);
        }
    }

    #[test]
    fn deformed_circuit_keeps_the_value() {
        let c = FieldConstants::default();
        let base = gauss_linking(
            &LinkScene::new(hopf_c(), unit_circle(), None, &spec()).unwrap(),
            &c,
            &spec(),
        )
        .unwrap();
        for l in [
            Curve::circle(Vector3::new(0.2, 0.1, 0.0), 1.3, Vector3::Z, Orientation::Ccw).unwrap(),
            Curve::circle(Vector3::new(0.0, 0.0, 0.0), 0.6, Vector3::Z, Orientation::Ccw).unwrap(),
        ] {
            let moved = gauss_linking(&LinkScene::new(hopf_c(), l, None, &spec()).unwrap(), &c, &spec()).unwrap();
            assert!((moved.value - base.value).abs() < 1e-6);
        }
    }

    #[test]
    fn scene_validation() {
        // touching curves
        let touching = Curve::circle(Vector3::new(2.0, 0.0, 0.0), 1.0, Vector3::Z, Orientation::Ccw).unwrap();
        assert!(matches!(
            LinkScene::new(touching, unit_circle(), None, &spec()),
            Err(Error::CurvesTooClose { .. })
        ));
        // mesh against the orientation of L
        assert!(LinkScene::new(hopf_c(), unit_circle().reversed(), Some(disk_mesh(9)), &spec()).is_err());
        // mesh spanning some other loop
        let big = mesh_surface(
            &SurfacePatch::Disk {
                center: Vector3::ZERO,
                radius: 3.0,
                axis: Vector3::Z,
            },
            9,
            9,
        )
        .unwrap();
        assert!(LinkScene::new(hopf_c(), unit_circle(), Some(big), &spec()).is_err());
        let open = Curve::polyline(vec![Vector3::ZERO, Vector3::X], false).unwrap();
        assert!(LinkScene::new(open, unit_circle(), None, &spec()).is_err());
    }

    #[test]
    fn crossing_on_a_node_is_degenerate() {
        // the even mesh puts a grid node at the disk centre, on the z axis
        let r = combinatorial_lk(&Curve::rect_loop(4).unwrap(), &disk_mesh(10), TOL);
        assert!(matches!(r, Err(Error::DegenerateIntersection(_))), "{r:?}");
    }
}
