//! Static field formulas: Coulomb fields of charged surfaces, the
//! Biot-Savart field of a current loop, dipole sheets (exact two-sheet
//! construction and the closed-form point-dipole panel), plus the
//! finite-difference probes and algebraic identities that relate them.
//!
//! Sign convention for the magnetic field:
//!
//! ```text
//! B_C(x) = k_B ∮ dm × (x − m) / ‖x − m‖³
//! ```
//!
//! With `k_B = 1` a small loop around an oriented parallelogram produces
//! exactly `1/h` times the field of the dipole sheet with `σ = 1` on that
//! parallelogram, to first order in its size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Curve, Panel, SurfaceMesh, SurfacePatch};
use crate::quadrature::{integrate_1d, integrate_2d, Estimate, QuadratureSpec};
use crate::vector::Vector3;

/// Guard for closed-form panel fields, relative to the panel size.
const PANEL_GUARD: f64 = 1e-6;

/// Prefactors of the Coulomb and Biot-Savart laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConstants {
    #[serde(rename = "k_E", default = "default_k_e")]
    pub k_e: f64,
    #[serde(rename = "k_B", default = "default_k_b")]
    pub k_b: f64,
}

fn default_k_e() -> f64 {
    1.0
}

fn default_k_b() -> f64 {
    1.0 / (4.0 * std::f64::consts::PI)
}

impl Default for FieldConstants {
    fn default() -> Self {
        Self {
            k_e: default_k_e(),
            k_b: default_k_b(),
        }
    }
}

impl FieldConstants {
    /// Both prefactors 1, under which a dipole sheet of strength `h` and its
    /// boundary current produce matching fields `E = h B`.
    pub const UNIT: FieldConstants = FieldConstants { k_e: 1.0, k_b: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.k_e.is_finite() && self.k_b.is_finite() && self.k_e != 0.0 && self.k_b != 0.0) {
            return Err(Error::InvalidArgument(
                "field constants must be finite and nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Surface charge density `sigma` on two copies of a surface offset by
/// `±h/2` along its normal, carrying `±sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSheetSpec {
    pub sigma: f64,
    pub h: f64,
}

impl DipoleSheetSpec {
    pub fn new(sigma: f64, h: f64) -> Result<Self> {
        let d = Self { sigma, h };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.h.is_finite()) || self.h < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dipole sheet needs finite sigma and h >= 0, got sigma={}, h={}",
                self.sigma, self.h
            )));
        }
        Ok(())
    }
}

fn check_point(x: Vector3) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("evaluation point {x:?} is not finite")))
    }
}

/// Biot-Savart field of a closed curve, with the quadrature error estimate.
pub fn biot_savart_estimate(
    curve: &Curve,
    x: Vector3,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Estimate<Vector3>> {
    consts.validate()?;
    check_point(x)?;
    curve.validate()?;
    let distance = curve.distance_to(x);
    let guard = spec.guard(curve.scale());
    if distance <= guard {
        return Err(Error::NearSingular { distance, guard });
    }
    let mut total = Estimate::zero();
    for piece in curve.pieces() {
        let (a, b) = piece.interval();
        let est = integrate_1d(
            |t| {
                let (m, dm) = piece.eval(t);
                let r = x - m;
                let d2 = r.norm_squared();
                dm.cross(r) / (d2 * d2.sqrt())
            },
            a,
            b,
            spec,
        )?;
        total = total + est;
    }
    Ok(total.scaled(consts.k_b))
}

/// `k_B ∮ dm × (x − m) / ‖x − m‖³`, integrated piece by piece.
pub fn biot_savart(
    curve: &Curve,
    x: Vector3,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vector3> {
    biot_savart_estimate(curve, x, consts, spec).map(|e| e.value)
}

/// Coulomb field of a uniformly charged patch,
/// `k_E σ ∬ (x − Φ) / ‖x − Φ‖³ dA`.
pub fn coulomb_surface_field(
    patch: &SurfacePatch,
    sigma: f64,
    x: Vector3,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vector3> {
    consts.validate()?;
    check_point(x)?;
    patch.validate()?;
    let distance = patch.distance_to(x);
    let guard = spec.guard(patch.scale());
    if distance <= guard {
        return Err(Error::NearSingular { distance, guard });
    }
    if sigma == 0.0 {
        return Ok(Vector3::ZERO);
    }
    let est = integrate_2d(
        |s, t| {
            let (p, area) = patch.integration_point(s, t);
            let r = x - p;
            let d2 = r.norm_squared();
            r * (area.norm() / (d2 * d2.sqrt()))
        },
        patch.integration_domain(),
        spec,
    )?;
    Ok(est.value * (consts.k_e * sigma))
}

/// Field of the two-sheet dipole layer: `+σ` on the patch shifted by
/// `+h/2 n̂` and `−σ` on the patch shifted by `−h/2 n̂`, with the unit normal
/// `n̂` taken pointwise. Both sheets use the unshifted area element, which
/// is exact for planar patches.
pub fn dipole_sheet_field_exact(
    patch: &SurfacePatch,
    dp: &DipoleSheetSpec,
    x: Vector3,
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vector3> {
    consts.validate()?;
    dp.validate()?;
    check_point(x)?;
    patch.validate()?;
    let distance = patch.distance_to(x) - 0.5 * dp.h;
    let guard = spec.guard(patch.scale());
    if distance <= guard {
        return Err(Error::NearSingular { distance, guard });
    }
    if dp.h == 0.0 || dp.sigma == 0.0 {
        return Ok(Vector3::ZERO);
    }
    let half = 0.5 * dp.h;
    let est = integrate_2d(
        |s, t| {
            let (p, area) = patch.integration_point(s, t);
            let da = area.norm();
            let n = if da > 0.0 { area / da } else { Vector3::ZERO };
            let rp = x - (p + n * half);
            let rm = x - (p - n * half);
            let dp2 = rp.norm_squared();
            let dm2 = rm.norm_squared();
            (rp / (dp2 * dp2.sqrt()) - rm / (dm2 * dm2.sqrt())) * da
        },
        patch.integration_domain(),
        spec,
    )?;
    Ok(est.value * (consts.k_e * dp.sigma))
}

/// Closed-form field of a point dipole sheet element at `panel.base`:
///
/// ```text
/// E = k_E h σ / ‖r‖³ (3 (r̂ · A) r̂ − A),   r = x − base,  A = edge_a × edge_b
/// ```
pub fn dipole_panel_field(
    panel: &Panel,
    dp: &DipoleSheetSpec,
    x: Vector3,
    consts: &FieldConstants,
) -> Result<Vector3> {
    consts.validate()?;
    dp.validate()?;
    check_point(x)?;
    let r = x - panel.base;
    let d = r.norm();
    let guard = PANEL_GUARD * panel.size();
    if d <= guard {
        return Err(Error::NearSingular { distance: d, guard });
    }
    Ok(point_dipole(r, d, panel.area_vector) * (consts.k_e * dp.h * dp.sigma))
}

#[inline]
fn point_dipole(r: Vector3, d: f64, moment: Vector3) -> Vector3 {
    let u = r / d;
    (u * (3.0 * u.dot(moment)) - moment) / (d * d * d)
}

/// Sum of panel dipole fields over a mesh, each dipole placed at its panel's
/// centroid (midpoint rule, second order in the panel size).
pub fn dipole_mesh_field(
    mesh: &SurfaceMesh,
    dp: &DipoleSheetSpec,
    x: Vector3,
    consts: &FieldConstants,
) -> Result<Vector3> {
    consts.validate()?;
    dp.validate()?;
    check_point(x)?;
    let guard = PANEL_GUARD * mesh.scale();
    let mut total = Vector3::ZERO;
    for panel in &mesh.panels {
        let distance = panel.distance_to(x);
        if distance <= guard {
            return Err(Error::NearSingular { distance, guard });
        }
        let r = x - panel.centroid();
        total += point_dipole(r, r.norm(), panel.area_vector);
    }
    Ok(total * (consts.k_e * dp.h * dp.sigma))
}

/// Curl and divergence by second-order central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub curl: Vector3,
    pub divergence: f64,
}

/// Central-difference curl and divergence of `field` at `x` on the
/// six-point stencil `x ± step e_k`.
pub fn differential_probe<F>(field: F, x: Vector3, step: f64) -> Result<Derivatives>
where
    F: Fn(Vector3) -> Result<Vector3>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let axes = [Vector3::X, Vector3::Y, Vector3::Z];
    // jac[k] = ∂F/∂x_k
    let mut jac = [Vector3::ZERO; 3];
    for (k, e) in axes.iter().enumerate() {
        let plus = field(x + *e * step)?;
        let minus = field(x - *e * step)?;
        jac[k] = (plus - minus) / (2.0 * step);
    }
    Ok(Derivatives {
        curl: Vector3::new(
            jac[1].z - jac[2].y,
            jac[2].x - jac[0].z,
            jac[0].y - jac[1].x,
        ),
        divergence: jac[0].x + jac[1].y + jac[2].z,
    })
}

/// Both sides of `((a × b) · r̂) r̂ = a × b + (r̂ · a) b × r̂ − (r̂ · b) a × r̂`.
pub fn lemma41_identity(a: Vector3, b: Vector3, r_hat: Vector3) -> Result<(Vector3, Vector3)> {
    let n = r_hat.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(n));
    }
    let ab = a.cross(b);
    let lhs = r_hat * ab.dot(r_hat);
    let rhs = ab + b.cross(r_hat) * r_hat.dot(a) - a.cross(r_hat) * r_hat.dot(b);
    Ok((lhs, rhs))
}

/// Finite-difference slopes of `‖x + εa‖⁻³` against the first-order
/// coefficient `−3 ‖x‖⁻⁵ (x · a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorProbe {
    pub eps: Vec<f64>,
    pub slopes: Vec<f64>,
    pub analytic: f64,
}

impl TaylorProbe {
    pub fn errors(&self) -> Vec<f64> {
        self.slopes.iter().map(|s| (s - self.analytic).abs()).collect()
    }
}

pub fn taylor_probe(x: Vector3, a: Vector3, eps_list: &[f64]) -> Result<TaylorProbe> {
    let nx = x.norm();
    if nx == 0.0 {
        return Err(Error::DegenerateBase);
    }
    let base = nx.powi(-3);
    let mut slopes = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if eps == 0.0 || (a * eps).norm() >= 0.5 * nx {
            return Err(Error::InvalidArgument(format!(
                "eps = {eps} must be nonzero with ‖eps a‖ < ‖x‖/2"
            )));
        }
        slopes.push(((x + a * eps).norm().powi(-3) - base) / eps);
    }
    Ok(TaylorProbe {
        eps: eps_list.to_vec(),
        slopes,
        analytic: -3.0 * nx.powi(-5) * x.dot(a),
    })
}
