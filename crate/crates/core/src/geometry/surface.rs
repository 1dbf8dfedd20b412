use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::curve::{point_segment_distance, Curve};
use crate::quadrature::{GaussLegendre, Rect};
use crate::vector::Vector3;

/// Relative threshold on `‖Φ_u × Φ_v‖ / scale²` below which a patch is degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

/// An oriented parametric surface `Φ: [0,1]² -> R³`, oriented by `Φ_u × Φ_v`.
///
/// `Disk` and `Dome` use the concentric square-to-disk map, which has a
/// nonvanishing Jacobian everywhere on the closed square (it is only
/// piecewise smooth across the diagonals). Their boundary runs
/// counterclockwise about `axis`, starting at `center + radius * e1` with
/// `e1` from [`Vector3::orthonormal_basis`], matching the circle parametrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfacePatch {
    PlanarRect {
        corner: Vector3,
        edge_a: Vector3,
        edge_b: Vector3,
    },
    Disk {
        center: Vector3,
        radius: f64,
        axis: Vector3,
    },
    /// A disk bulged along its axis by `height * (1 - ρ²/R²)`.
    Dome {
        center: Vector3,
        radius: f64,
        axis: Vector3,
        height: f64,
    },
}

/// `Φ(u, v)` with its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchPoint {
    pub position: Vector3,
    pub d_u: Vector3,
    pub d_v: Vector3,
}

impl PatchPoint {
    pub fn area_element(&self) -> Vector3 {
        self.d_u.cross(self.d_v)
    }
}

/// Concentric map of `(u, v) ∈ [0,1]²` onto the unit disk: `(x, y, ∂/∂u, ∂/∂v)`.
fn concentric(u: f64, v: f64) -> ((f64, f64), (f64, f64), (f64, f64)) {
    let a = 2.0 * u - 1.0;
    let b = 2.0 * v - 1.0;
    // radius r, angle phi and their partials in (a, b)
    let (r, phi, r_a, r_b, phi_a, phi_b) = if a.abs() >= b.abs() {
        if a == 0.0 {
            (0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        } else {
            (a, FRAC_PI_4 * b / a, 1.0, 0.0, -FRAC_PI_4 * b / (a * a), FRAC_PI_4 / a)
        }
    } else {
        (
            b,
            2.0 * FRAC_PI_4 - FRAC_PI_4 * a / b,
            0.0,
            1.0,
            -FRAC_PI_4 / b,
            FRAC_PI_4 * a / (b * b),
        )
    };
    let (s, c) = phi.sin_cos();
    let pos = (r * c, r * s);
    // d/da and d/db of (r cos phi, r sin phi); at the origin r*phi_b -> pi/4 in the limit
    let (x_a, y_a) = (r_a * c - r * s * phi_a, r_a * s + r * c * phi_a);
    let (x_b, y_b) = if a == 0.0 && b == 0.0 {
        (0.0, FRAC_PI_4)
    } else {
        (r_b * c - r * s * phi_b, r_b * s + r * c * phi_b)
    };
    // chain rule: a = 2u - 1, b = 2v - 1
    (pos, (2.0 * x_a, 2.0 * y_a), (2.0 * x_b, 2.0 * y_b))
}

impl SurfacePatch {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::DegeneratePatch(m.to_string()));
        match self {
            SurfacePatch::PlanarRect {
                corner,
                edge_a,
                edge_b,
            } => {
                if !(corner.is_finite() && edge_a.is_finite() && edge_b.is_finite()) {
                    return bad("planar rect parameters must be finite");
                }
                let scale = edge_a.norm() + edge_b.norm();
                if edge_a.cross(*edge_b).norm() <= DEGENERACY_TOL * scale * scale {
                    return bad("planar rect edges are parallel or zero");
                }
            }
            SurfacePatch::Disk {
                center,
                radius,
                axis,
            }
            | SurfacePatch::Dome {
                center,
                radius,
                axis,
                ..
            } => {
                if !(center.is_finite() && axis.is_finite() && radius.is_finite()) {
                    return bad("disk parameters must be finite");
                }
                if *radius <= 0.0 {
                    return bad("disk radius must be positive");
                }
                if axis.normalized().is_none() {
                    return bad("disk axis must be nonzero");
                }
                if let SurfacePatch::Dome { height, .. } = self {
                    if !height.is_finite() {
                        return bad("dome height must be finite");
                    }
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, u: f64, v: f64) -> PatchPoint {
        match *self {
            SurfacePatch::PlanarRect {
                corner,
                edge_a,
                edge_b,
            } => PatchPoint {
                position: corner + edge_a * u + edge_b * v,
                d_u: edge_a,
                d_v: edge_b,
            },
            SurfacePatch::Disk {
                center,
                radius,
                axis,
            } => self.disk_point(center, radius, axis, 0.0, u, v),
            SurfacePatch::Dome {
                center,
                radius,
                axis,
                height,
            } => self.disk_point(center, radius, axis, height, u, v),
        }
    }

    fn disk_point(
        &self,
        center: Vector3,
        radius: f64,
        axis: Vector3,
        height: f64,
        u: f64,
        v: f64,
    ) -> PatchPoint {
        let n = axis.normalized().unwrap_or(Vector3::Z);
        let (e1, e2) = n.orthonormal_basis();
        let ((x, y), (x_u, y_u), (x_v, y_v)) = concentric(u, v);
        let bulge = height * (1.0 - x * x - y * y);
        PatchPoint {
            position: center + (e1 * x + e2 * y) * radius + n * bulge,
            d_u: (e1 * x_u + e2 * y_u) * radius - n * (2.0 * height * (x * x_u + y * y_u)),
            d_v: (e1 * x_v + e2 * y_v) * radius - n * (2.0 * height * (x * x_v + y * y_v)),
        }
    }

    /// Parameter domain used for surface integrals; see [`Self::integration_point`].
    pub fn integration_domain(&self) -> Rect {
        match self {
            SurfacePatch::PlanarRect { .. } => Rect::new((0.0, 1.0), (0.0, 1.0)),
            SurfacePatch::Disk { .. } | SurfacePatch::Dome { .. } => {
                Rect::new((0.0, 1.0), (0.0, std::f64::consts::TAU))
            }
        }
    }

    /// Position and vector area element for surface integrals.
    ///
    /// Disks and domes are integrated in polar coordinates `(ρ, θ)`, which are
    /// smooth where the concentric map is only piecewise smooth. The area
    /// element points the same way as `Φ_u × Φ_v`.
    pub fn integration_point(&self, s: f64, t: f64) -> (Vector3, Vector3) {
        match *self {
            SurfacePatch::PlanarRect { .. } => {
                let p = self.eval(s, t);
                (p.position, p.area_element())
            }
            SurfacePatch::Disk {
                center,
                radius,
                axis,
            } => self.polar_point(center, radius, axis, 0.0, s, t),
            SurfacePatch::Dome {
                center,
                radius,
                axis,
                height,
            } => self.polar_point(center, radius, axis, height, s, t),
        }
    }

    fn polar_point(
        &self,
        center: Vector3,
        radius: f64,
        axis: Vector3,
        height: f64,
        rho: f64,
        theta: f64,
    ) -> (Vector3, Vector3) {
        let n = axis.normalized().unwrap_or(Vector3::Z);
        let (e1, e2) = n.orthonormal_basis();
        let (s, c) = theta.sin_cos();
        let er = e1 * c + e2 * s;
        let position = center + er * (radius * rho) + n * (height * (1.0 - rho * rho));
        // Φ_ρ × Φ_θ with Φ_ρ = R e_r - 2hρ n, Φ_θ = Rρ e_θ
        let area = n * (radius * radius * rho) + er * (2.0 * height * radius * rho * rho);
        (position, area)
    }

    /// Axis-aligned bounding box, from a grid of samples plus known extremes.
    pub fn bounding_box(&self) -> (Vector3, Vector3) {
        let mut lo = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        let k = 32;
        for i in 0..=k {
            for j in 0..=k {
                let p = self.eval(i as f64 / k as f64, j as f64 / k as f64).position;
                lo = lo.component_min(p);
                hi = hi.component_max(p);
            }
        }
        if let SurfacePatch::Disk { center, radius, axis } | SurfacePatch::Dome { center, radius, axis, .. } = self {
            let n = axis.normalized().unwrap_or(Vector3::Z);
            let ext = Vector3::new(
                (1.0 - n.x * n.x).max(0.0).sqrt(),
                (1.0 - n.y * n.y).max(0.0).sqrt(),
                (1.0 - n.z * n.z).max(0.0).sqrt(),
            ) * *radius;
            lo = lo.component_min(*center - ext);
            hi = hi.component_max(*center + ext);
        }
        (lo, hi)
    }

    /// Bounding-box diagonal.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Checks `‖Φ_u × Φ_v‖ > 1e-12 scale²` at the nodes of an 8-point
    /// Gauss-Legendre rule on an 8x8 grid of cells.
    pub fn check_nondegenerate(&self) -> Result<()> {
        self.validate()?;
        let scale = self.scale();
        let rule = GaussLegendre::new(8);
        let cells = 8;
        for ci in 0..cells {
            for cj in 0..cells {
                for xu in rule.nodes() {
                    for xv in rule.nodes() {
                        let u = (ci as f64 + 0.5 * (xu + 1.0)) / cells as f64;
                        let v = (cj as f64 + 0.5 * (xv + 1.0)) / cells as f64;
                        let j = self.eval(u, v).area_element().norm();
                        if !(j > DEGENERACY_TOL * scale * scale) {
                            return Err(Error::DegeneratePatch(format!(
                                "vanishing area element at (u, v) = ({u:.4}, {v:.4})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Distance from `p` to the patch. Exact for planar kinds; for domes a
    /// grid search refined by shrinking pattern search.
    pub fn distance_to(&self, p: Vector3) -> f64 {
        match *self {
            SurfacePatch::PlanarRect {
                corner,
                edge_a,
                edge_b,
            } => {
                parallelogram_distance(p, corner, edge_a, edge_b)
            }
            SurfacePatch::Disk {
                center,
                radius,
                axis,
            } => {
                let n = axis.normalized().unwrap_or(Vector3::Z);
                let q = p - center;
                let h = q.dot(n);
                let rho = (q - n * h).norm();
                if rho <= radius {
                    h.abs()
                } else {
                    h.hypot(rho - radius)
                }
            }
            SurfacePatch::Dome { .. } => self.distance_by_search(p),
        }
    }

    fn distance_by_search(&self, p: Vector3) -> f64 {
        let k = 48;
        let mut best = (f64::INFINITY, 0.5, 0.5);
        for i in 0..=k {
            for j in 0..=k {
                let (u, v) = (i as f64 / k as f64, j as f64 / k as f64);
                let d = self.eval(u, v).position.distance(p);
                if d < best.0 {
                    best = (d, u, v);
                }
            }
        }
        let (mut d, mut u, mut v) = best;
        let mut step = 1.0 / k as f64;
        while step > 1e-12 {
            let mut moved = false;
            for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let (nu, nv) = ((u + du).clamp(0.0, 1.0), (v + dv).clamp(0.0, 1.0));
                let nd = self.eval(nu, nv).position.distance(p);
                if nd < d {
                    (d, u, v) = (nd, nu, nv);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        d
    }
}

fn parallelogram_distance(p: Vector3, base: Vector3, a: Vector3, b: Vector3) -> f64 {
    let n = a.cross(b);
    let n2 = n.norm_squared();
    let q = p - base;
    let alpha = q.cross(b).dot(n) / n2;
    let beta = a.cross(q).dot(n) / n2;
    if (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta) {
        return (q.dot(n) / n2.sqrt()).abs();
    }
    let c = [base, base + a, base + a + b, base + b];
    (0..4)
        .map(|k| point_segment_distance(p, c[k], c[(k + 1) % 4]))
        .fold(f64::INFINITY, f64::min)
}

/// A flat oriented parallelogram with corners `base`, `base + edge_a`,
/// `base + edge_a + edge_b`, `base + edge_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub base: Vector3,
    pub edge_a: Vector3,
    pub edge_b: Vector3,
    pub area_vector: Vector3,
}

impl Panel {
    pub fn new(base: Vector3, edge_a: Vector3, edge_b: Vector3) -> Result<Self> {
        let area_vector = edge_a.cross(edge_b);
        if !(base.is_finite() && edge_a.is_finite() && edge_b.is_finite()) {
            return Err(Error::InvalidGeometry("panel corners must be finite".into()));
        }
        if area_vector.norm() == 0.0 {
            return Err(Error::DegeneratePatch("panel has zero area".into()));
        }
        Ok(Self {
            base,
            edge_a,
            edge_b,
            area_vector,
        })
    }

    pub fn distance_to(&self, p: Vector3) -> f64 {
        parallelogram_distance(p, self.base, self.edge_a, self.edge_b)
    }

    /// `‖edge_a‖ + ‖edge_b‖`.
    pub fn size(&self) -> f64 {
        self.edge_a.norm() + self.edge_b.norm()
    }

    pub fn centroid(&self) -> Vector3 {
        self.base + (self.edge_a + self.edge_b) * 0.5
    }

    /// The same parallelogram with its base moved to the centroid.
    pub fn recentered(&self) -> Panel {
        Panel {
            base: self.centroid(),
            ..*self
        }
    }

    pub fn corners(&self) -> [Vector3; 4] {
        [
            self.base,
            self.base + self.edge_a,
            self.base + self.edge_a + self.edge_b,
            self.base + self.edge_b,
        ]
    }

    /// The induced boundary: base -> +a -> +a+b -> +b -> base.
    pub fn boundary(&self) -> Curve {
        Curve::PolyLine {
            vertices: self.corners().to_vec(),
            closed: true,
        }
    }
}

/// An `m x n` panelization of a patch.
///
/// `nodes` holds `Φ(i/m, j/n)` for `i in 0..=m`, `j in 0..=n`; panel `(i, j)`
/// has base at node `(i, j)` and edges to nodes `(i+1, j)` and `(i, j+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub source: SurfacePatch,
    pub m: usize,
    pub n: usize,
    pub nodes: Vec<Vector3>,
    pub panels: Vec<Panel>,
}

impl SurfaceMesh {
    pub fn node(&self, i: usize, j: usize) -> Vector3 {
        self.nodes[i * (self.n + 1) + j]
    }

    pub fn panel(&self, i: usize, j: usize) -> &Panel {
        &self.panels[i * self.n + j]
    }

    /// Exact grid-node corners of cell `(i, j)` in boundary order.
    pub fn cell_corners(&self, i: usize, j: usize) -> [Vector3; 4] {
        [
            self.node(i, j),
            self.node(i + 1, j),
            self.node(i + 1, j + 1),
            self.node(i, j + 1),
        ]
    }

    pub fn total_area_vector(&self) -> Vector3 {
        self.panels.iter().map(|p| p.area_vector).sum()
    }

    /// Length of the shortest cell edge.
    pub fn min_edge(&self) -> f64 {
        let mut min = f64::INFINITY;
        for i in 0..self.m {
            for j in 0..self.n {
                let c = self.cell_corners(i, j);
                for k in 0..4 {
                    min = min.min(c[k].distance(c[(k + 1) % 4]));
                }
            }
        }
        min
    }

    pub fn scale(&self) -> f64 {
        let mut lo = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.nodes {
            lo = lo.component_min(*p);
            hi = hi.component_max(*p);
        }
        (hi - lo).norm()
    }
}

/// Panelizes `patch` into `m x n` flat parallelograms, one per grid cell,
/// centred on the mean of the cell's four nodes with edges averaged over
/// opposite sides.
pub fn mesh_surface(patch: &SurfacePatch, m: usize, n: usize) -> Result<SurfaceMesh> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "mesh dimensions must be positive, got {m} x {n}"
        )));
    }
    patch.check_nondegenerate()?;
    let mut nodes = Vec::with_capacity((m + 1) * (n + 1));
    for i in 0..=m {
        for j in 0..=n {
            nodes.push(patch.eval(i as f64 / m as f64, j as f64 / n as f64).position);
        }
    }
    let mut mesh = SurfaceMesh {
        source: patch.clone(),
        m,
        n,
        nodes,
        panels: Vec::with_capacity(m * n),
    };
    for i in 0..m {
        for j in 0..n {
            let [x00, x10, x11, x01] = mesh.cell_corners(i, j);
            // averaged edges: a × b is the vector area of the quad x00 x10 x11 x01
            let a = ((x10 - x00) + (x11 - x01)) * 0.5;
            let b = ((x01 - x00) + (x11 - x10)) * 0.5;
            let mid = (x00 + x10 + x11 + x01) * 0.25;
            let panel = Panel::new(mid - (a + b) * 0.5, a, b)
                .map_err(|_| {
                    Error::DegeneratePatch(format!("panel ({i}, {j}) of the {m}x{n} mesh has zero area"))
                })?;
            mesh.panels.push(panel);
        }
    }
    Ok(mesh)
}

/// The outer boundary of the mesh as a closed polyline in the induced
/// orientation: along `v = 0` with `u` increasing, up `u = 1`, back along
/// `v = 1`, down `u = 0`. Interior edges cancel pairwise and do not appear.
pub fn mesh_boundary(mesh: &SurfaceMesh) -> Result<Curve> {
    let (m, n) = (mesh.m, mesh.n);
    let mut verts = Vec::with_capacity(2 * (m + n));
    for i in 0..m {
        verts.push(mesh.node(i, 0));
    }
    for j in 0..n {
        verts.push(mesh.node(m, j));
    }
    for i in (1..=m).rev() {
        verts.push(mesh.node(i, n));
    }
    for j in (1..=n).rev() {
        verts.push(mesh.node(0, j));
    }
    verts.dedup();
    if verts.len() > 1 && verts.first() == verts.last() {
        verts.pop();
    }
    Curve::polyline(verts, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::f64::consts::PI;

    fn unit_square() -> SurfacePatch {
        SurfacePatch::PlanarRect {
            corner: Vector3::ZERO,
            edge_a: Vector3::X,
            edge_b: Vector3::Y,
        }
    }

    fn unit_disk() -> SurfacePatch {
        SurfacePatch::Disk {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
        }
    }

    #[test]
    fn single_panel_identity() {
        let mesh = mesh_surface(&unit_square(), 1, 1).unwrap();
        assert_eq!(mesh.panels.len(), 1);
        assert_eq!(mesh.panels[0].area_vector, Vector3::Z);
    }

    #[test]
    fn two_by_two_square() {
        let mesh = mesh_surface(&unit_square(), 2, 2).unwrap();
        assert_eq!(mesh.panels.len(), 4);
        for p in &mesh.panels {
            assert_eq!(p.area_vector, Vector3::new(0.0, 0.0, 0.25));
        }
        assert_eq!(mesh.total_area_vector(), Vector3::Z);
    }

    #[test]
    fn planar_rect_panels_sum_to_patch() {
        let patch = SurfacePatch::PlanarRect {
            corner: Vector3::new(1.0, -2.0, 0.5),
            edge_a: Vector3::new(0.3, 1.1, -0.2),
            edge_b: Vector3::new(-0.7, 0.2, 0.9),
        };
        let mesh = mesh_surface(&patch, 5, 3).unwrap();
        let want = Vector3::new(0.3, 1.1, -0.2).cross(Vector3::new(-0.7, 0.2, 0.9));
        assert!((mesh.total_area_vector() - want).norm() < 1e-14);
    }

    #[test]
    fn disk_area_converges() {
        let mut prev = f64::INFINITY;
        for m in [8, 16, 32, 64] {
            let a = mesh_surface(&unit_disk(), m, m).unwrap().total_area_vector();
            assert!(a.x.abs() < 1e-12 && a.y.abs() < 1e-12);
            let err = (a.z - PI).abs();
            assert!(err < prev, "m={m}: {err} !< {prev}");
            prev = err;
        }
        assert!(prev < 1e-2);
        assert_eq!(mesh_surface(&unit_disk(), 8, 8).unwrap().panels.len(), 64);
    }

    #[test]
    fn concentric_map_is_nondegenerate_and_oriented() {
        for patch in [
            unit_disk(),
            SurfacePatch::Dome {
                center: Vector3::new(0.2, 0.0, 1.0),
                radius: 1.5,
                axis: Vector3::new(1.0, 1.0, 0.0),
                height: 0.8,
            },
        ] {
            patch.check_nondegenerate().unwrap();
            let n = match &patch {
                SurfacePatch::Disk { axis, .. } | SurfacePatch::Dome { axis, .. } => *axis,
                _ => unreachable!(),
            };
            for k in 0..=20 {
                for l in 0..=20 {
                    let p = patch.eval(k as f64 / 20.0, l as f64 / 20.0);
                    assert!(p.area_element().dot(n) > 0.0);
                }
            }
        }
    }

    #[test]
    fn disk_partials_match_finite_differences() {
        let patch = SurfacePatch::Dome {
            center: Vector3::ZERO,
            radius: 2.0,
            axis: Vector3::new(0.1, -0.3, 1.0),
            height: 0.5,
        };
        let h = 1e-6;
        for &(u, v) in &[(0.13, 0.71), (0.8, 0.45), (0.3, 0.2), (0.66, 0.9), (0.52, 0.49)] {
            let p = patch.eval(u, v);
            let du = (patch.eval(u + h, v).position - patch.eval(u - h, v).position) / (2.0 * h);
            let dv = (patch.eval(u, v + h).position - patch.eval(u, v - h).position) / (2.0 * h);
            assert!((du - p.d_u).norm() < 1e-7, "({u},{v}) {du:?} vs {:?}", p.d_u);
            assert!((dv - p.d_v).norm() < 1e-7, "({u},{v}) {dv:?} vs {:?}", p.d_v);
        }
    }

    #[test]
    fn disk_boundary_matches_circle_parametrization() {
        let patch = unit_disk();
        let p = patch.eval(1.0, 0.5).position;
        assert!((p - Vector3::X).norm() < 1e-15);
        let c = patch.eval(0.5, 0.5).position;
        assert!(c.norm() < 1e-15);
    }

    #[test]
    fn degenerate_patches_rejected() {
        let flat = SurfacePatch::PlanarRect {
            corner: Vector3::ZERO,
            edge_a: Vector3::X,
            edge_b: Vector3::X * 2.0,
        };
        assert!(matches!(mesh_surface(&flat, 2, 2), Err(Error::DegeneratePatch(_))));
        assert!(mesh_surface(&unit_square(), 0, 2).is_err());
    }

    #[test]
    fn boundary_of_single_panel_is_rect() {
        let patch = SurfacePatch::PlanarRect {
            corner: Vector3::new(1.0, 2.0, 3.0),
            edge_a: Vector3::new(2.0, 0.0, 0.0),
            edge_b: Vector3::new(0.0, 0.0, 1.0),
        };
        let mesh = mesh_surface(&patch, 1, 1).unwrap();
        let b = mesh_boundary(&mesh).unwrap();
        let Curve::PolyLine { vertices, closed } = b.clone() else { panic!() };
        assert!(closed);
        let c = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(
            vertices,
            vec![
                c,
                c + Vector3::new(2.0, 0.0, 0.0),
                c + Vector3::new(2.0, 0.0, 1.0),
                c + Vector3::new(0.0, 0.0, 1.0)
            ]
        );
        assert_eq!(b.pieces().len(), 4);
    }

    /// Signed directed-edge multiset: +1 per traversal u->v, -1 for v->u.
    fn cancelled_edges(mesh: &SurfaceMesh) -> HashMap<(usize, usize), i32> {
        let idx = |i: usize, j: usize| i * (mesh.n + 1) + j;
        let mut count: HashMap<(usize, usize), i32> = HashMap::new();
        for i in 0..mesh.m {
            for j in 0..mesh.n {
                let c = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
                for k in 0..4 {
                    let (a, b) = (c[k], c[(k + 1) % 4]);
                    if a < b {
                        *count.entry((a, b)).or_default() += 1;
                    } else {
                        *count.entry((b, a)).or_default() -= 1;
                    }
                }
            }
        }
        count.retain(|_, v| *v != 0);
        count
    }

    #[test]
    fn interior_edges_cancel() {
        for (m, n) in [(1, 1), (2, 2), (3, 5), (7, 4)] {
            let mesh = mesh_surface(&unit_square(), m, n).unwrap();
            let survivors = cancelled_edges(&mesh);
            assert_eq!(survivors.len(), 2 * (m + n), "{m}x{n}");
            assert!(survivors.values().all(|v| v.abs() == 1));
            let total_edges = m * (n + 1) + n * (m + 1);
            assert_eq!(total_edges - survivors.len(), (m - 1) * n + (n - 1) * m);
            // mesh_boundary traverses exactly the surviving edges, in their direction
            let boundary = mesh_boundary(&mesh).unwrap();
            let pieces = boundary.pieces();
            assert_eq!(pieces.len(), survivors.len());
        }
        let mesh = mesh_surface(&unit_square(), 2, 2).unwrap();
        assert_eq!(mesh_boundary(&mesh).unwrap().pieces().len(), 8);
    }

    #[test]
    fn disk_boundary_hugs_circle() {
        let mesh = mesh_surface(&unit_disk(), 16, 16).unwrap();
        let b = mesh_boundary(&mesh).unwrap();
        assert!(b.is_closed());
        let mut worst: f64 = 0.0;
        for p in b.pieces() {
            for k in 0..=10 {
                let x = p.eval(k as f64 / 10.0).0;
                worst = worst.max((x.norm() - 1.0).abs());
            }
        }
        assert!(worst < 0.02, "{worst}");
        assert!(b.vector_area().z > 3.0);
    }

    #[test]
    fn polar_integration_area() {
        use crate::quadrature::{integrate_2d, QuadratureSpec};
        let disk = SurfacePatch::Disk {
            center: Vector3::new(1.0, 2.0, 3.0),
            radius: 2.0,
            axis: Vector3::new(0.0, 1.0, 1.0),
        };
        let area = integrate_2d(
            |s, t| disk.integration_point(s, t).1.norm(),
            disk.integration_domain(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((area.value - 4.0 * PI).abs() < 1e-12);
        // paraboloid cap z = h (1 - ρ²): area = π/(6 k²) ((1 + 4k²)^{3/2} - 1), k = h
        let h = 0.7;
        let dome = SurfacePatch::Dome {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
            height: h,
        };
        let area = integrate_2d(
            |s, t| dome.integration_point(s, t).1.norm(),
            dome.integration_domain(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let want = PI / (6.0 * h * h) * ((1.0 + 4.0 * h * h).powf(1.5) - 1.0);
        assert!((area.value - want).abs() < 1e-9, "{} vs {want}", area.value);
        let (_, el) = dome.integration_point(0.3, 1.0);
        assert!(el.z > 0.0);
    }

    #[test]
    fn planar_distances() {
        let sq = unit_square();
        assert!((sq.distance_to(Vector3::new(0.5, 0.5, 2.0)) - 2.0).abs() < 1e-15);
        assert!((sq.distance_to(Vector3::new(2.0, 0.5, 0.0)) - 1.0).abs() < 1e-15);
        let d = unit_disk();
        assert!((d.distance_to(Vector3::new(0.2, 0.1, -0.3)) - 0.3).abs() < 1e-15);
        assert!((d.distance_to(Vector3::new(2.0, 0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        let dome = SurfacePatch::Dome {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
            height: 0.5,
        };
        assert!((dome.distance_to(Vector3::new(0.0, 0.0, 1.5)) - 1.0).abs() < 1e-9);
    }
}
