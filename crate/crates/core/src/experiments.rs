//! Numerical experiments turning the limit statements into measured
//! convergence: finite-size evaluations, a fitted log-log order, and a pass
//! threshold per experiment.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    biot_savart, biot_savart_estimate, coulomb_surface_field, differential_probe,
    dipole_mesh_field, dipole_panel_field, dipole_sheet_field_exact, lemma41_identity,
    taylor_probe, DipoleSheetSpec, FieldConstants,
};
use crate::geometry::{
    mesh_boundary, mesh_surface, Curve, Orientation, Panel, SurfacePatch,
    DEFAULT_TRANSVERSALITY_TOL,
};
use crate::linking::{combinatorial_lk, gauss_linking, gauss_linking_by_piece, LinkScene};
use crate::quadrature::QuadratureSpec;
use crate::vector::Vector3;

/// Format used for every float in CSV output.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A scalar or vector measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Scalar(f64),
    Vector(Vector3),
}

impl Quantity {
    fn components(&self) -> [f64; 3] {
        match *self {
            Quantity::Scalar(x) => [x, 0.0, 0.0],
            Quantity::Vector(v) => v.to_array(),
        }
    }

    pub fn norm(&self) -> f64 {
        match *self {
            Quantity::Scalar(x) => x.abs(),
            Quantity::Vector(v) => v.norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scale: f64,
    pub measured: Quantity,
    pub reference: Quantity,
    pub abs_error: f64,
    pub rel_error: Option<f64>,
    /// Failure of this row's computation, kept so the batch can go on.
    pub error: Option<String>,
}

impl ReportRow {
    fn new(scale: f64, measured: Quantity, reference: Quantity) -> Self {
        let m = measured.components();
        let r = reference.components();
        let abs_error = (0..3).map(|k| (m[k] - r[k]).powi(2)).sum::<f64>().sqrt();
        let rn = reference.norm();
        Self {
            scale,
            measured,
            reference,
            abs_error,
            rel_error: (rn > 0.0).then(|| abs_error / rn),
            error: None,
        }
    }

    fn failed(scale: f64, err: &Error) -> Self {
        Self {
            scale,
            measured: Quantity::Scalar(f64::NAN),
            reference: Quantity::Scalar(f64::NAN),
            abs_error: f64::NAN,
            rel_error: None,
            error: Some(err.to_string()),
        }
    }

    /// Relative error when the reference is nonzero, else absolute.
    pub fn fit_error(&self) -> f64 {
        self.rel_error.unwrap_or(self.abs_error)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub label: String,
    pub rows: Vec<ReportRow>,
    pub fitted_order: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ConvergenceReport {
    fn new(experiment: &str, label: String, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| b.scale.total_cmp(&a.scale));
        let fitted_order = fitted_order(&rows);
        Self {
            experiment: experiment.to_string(),
            label,
            rows,
            fitted_order,
            checks: Vec::new(),
            passed: false,
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check::new(name, passed, detail));
    }

    fn finish(mut self) -> Self {
        let rows_ok = self.rows.iter().all(|r| r.error.is_none());
        if !rows_ok {
            self.check("rows", false, "a row failed to evaluate".into());
        }
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self
    }

    pub const CSV_HEADER: &'static str = "experiment,label,scale,measured_x,measured_y,measured_z,\
reference_x,reference_y,reference_z,abs_error,rel_error,error";

    /// One line per row, without the header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let m = r.measured.components();
            let f = r.reference.components();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                self.experiment,
                csv_text(&self.label),
                csv_float(r.scale),
                csv_float(m[0]),
                csv_float(m[1]),
                csv_float(m[2]),
                csv_float(f[0]),
                csv_float(f[1]),
                csv_float(f[2]),
                csv_float(r.abs_error),
                r.rel_error.map(csv_float).unwrap_or_default(),
                csv_text(r.error.as_deref().unwrap_or("")),
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}", Self::CSV_HEADER, self.csv_rows())
    }

    /// Human summary line.
    pub fn summary(&self) -> String {
        let order = self
            .fitted_order
            .map(|o| format!("{o:.4}"))
            .unwrap_or_else(|| "n/a".into());
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut line = format!(
            "{} {} [{}] order={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.experiment,
            self.label,
            order,
        );
        if !failed.is_empty() {
            line.push_str(&format!(" failed: {}", failed.join(", ")));
        }
        line
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

/// Least-squares slope of `ln(error)` against `ln(scale)` over usable rows.
pub fn fitted_order(rows: &[ReportRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error.is_none() && r.scale > 0.0 && r.fit_error() > 0.0 && r.fit_error().is_finite())
        .map(|r| (r.scale.ln(), r.fit_error().ln()))
        .collect();
    log_log_slope(&pts)
}

fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn fmt_vec(v: Vector3) -> String {
    format!("({}, {}, {})", v.x, v.y, v.z)
}

fn order_at_least(report: &mut ConvergenceReport, min: f64) {
    let ok = report.fitted_order.is_some_and(|o| o >= min);
    report.check("fitted_order", ok, format!("{:?} >= {min}", report.fitted_order));
}

/// Point dipole of a small parallelogram against the field of its boundary
/// loop, `E_panel = h B_loop` to first order in `ε`. Both sides use unit
/// prefactors.
#[allow(clippy::too_many_arguments)]
pub fn similitude_infinitesimal(
    base: Vector3,
    a: Vector3,
    b: Vector3,
    r: Vector3,
    eps_list: &[f64],
    h: f64,
    spec: &QuadratureSpec,
) -> Result<ConvergenceReport> {
    let dist = (r - base).norm();
    if dist == 0.0 {
        return Err(Error::InvalidArgument("field point coincides with the panel base".into()));
    }
    if a.cross(b).norm() == 0.0 {
        return Err(Error::InvalidGeometry("panel edges are parallel".into()));
    }
    let dp = DipoleSheetSpec::new(1.0, h)?;
    let unit = FieldConstants::UNIT;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) || eps * a.norm().max(b.norm()) > dist / 10.0 {
            return Err(Error::InvalidArgument(format!(
                "eps = {eps} must be positive with eps * edge <= distance / 10"
            )));
        }
        let panel = Panel::new(base, a * eps, b * eps)?;
        let e = dipole_panel_field(&panel, &dp, r, &unit)?;
        let bf = biot_savart(&panel.boundary(), r, &unit, spec)?;
        rows.push(ReportRow::new(eps, Quantity::Vector(e), Quantity::Vector(bf * h)));
    }
    let mut report = ConvergenceReport::new("similitude_infinitesimal", format!("r={}", fmt_vec(r)), rows);
    order_at_least(&mut report, 0.9);
    Ok(report.finish())
}

/// Panel dipole sum over an `M x M` mesh against `h` times the field of the
/// mesh boundary, for each `M` in `mesh_sizes`.
pub fn similitude_general(
    patch: &SurfacePatch,
    r: Vector3,
    h: f64,
    mesh_sizes: &[usize],
    spec: &QuadratureSpec,
) -> Result<ConvergenceReport> {
    patch.validate()?;
    let (lo, hi) = patch.bounding_box();
    let diameter = (hi - lo).norm();
    let dist = patch.distance_to(r);
    if dist < 0.5 * diameter {
        return Err(Error::InvalidArgument(format!(
            "field point at distance {dist} is closer than half the patch diameter {diameter}"
        )));
    }
    let dp = DipoleSheetSpec::new(1.0, h)?;
    let unit = FieldConstants::UNIT;
    let rows = mesh_sizes
        .par_iter()
        .map(|&m| {
            let mesh = mesh_surface(patch, m, m)?;
            let e = dipole_mesh_field(&mesh, &dp, r, &unit)?;
            let bf = biot_savart(&mesh_boundary(&mesh)?, r, &unit, spec)?;
            Ok(ReportRow::new(1.0 / m as f64, Quantity::Vector(e), Quantity::Vector(bf * h)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ConvergenceReport::new("similitude_general", format!("r={}", fmt_vec(r)), rows);
    let last = report.rows.last().map_or(f64::INFINITY, |r| r.fit_error());
    report.check("final_error", last <= 1e-3, format!("{last:.3e} <= 1e-3"));
    order_at_least(&mut report, 0.9);
    Ok(report.finish())
}

/// Thresholds shared by the curl and Maxwell probes.
pub const PROBE_THRESHOLD: f64 = 1e-5;
/// Step at which the threshold applies.
pub const PROBE_STEP: f64 = 1e-3;
/// Accepted range for the error ratio when the step is halved.
pub const STEP_RATIO_RANGE: (f64, f64) = (3.0, 5.0);

/// Curl (rows) and divergence (check) of a field by central differences,
/// with the quadrature noise floor `floor_at(step)` below which step
/// ratios are not judged.
fn stencil_report<F>(
    experiment: &str,
    x: Vector3,
    steps: &[f64],
    field: F,
    floor_at: impl Fn(f64) -> f64,
) -> ConvergenceReport
where
    F: Fn(Vector3) -> Result<Vector3> + Sync,
{
    let probes: Vec<(f64, Result<crate::fields::Derivatives>)> =
        steps.iter().map(|&s| (s, differential_probe(&field, x, s))).collect();
    let mut rows = Vec::new();
    let mut divs = Vec::new();
    for (s, d) in &probes {
        match d {
            Ok(d) => {
                rows.push(ReportRow::new(*s, Quantity::Vector(d.curl), Quantity::Vector(Vector3::ZERO)));
                divs.push((*s, d.divergence));
            }
            Err(e) => rows.push(ReportRow::failed(*s, e)),
        }
    }
    let mut report = ConvergenceReport::new(experiment, format!("x={}", fmt_vec(x)), rows);
    divs.sort_by(|a, b| b.0.total_cmp(&a.0));
    for r in &report.rows {
        if r.error.is_none() && r.scale <= PROBE_STEP * (1.0 + 1e-12) {
            report.checks.push(Check::new(
                "curl",
                r.abs_error <= PROBE_THRESHOLD,
                format!("|curl| = {:.3e} at step {:e}", r.abs_error, r.scale),
            ));
        }
    }
    for &(s, d) in &divs {
        if s <= PROBE_STEP * (1.0 + 1e-12) {
            report.checks.push(Check::new(
                "divergence",
                d.abs() <= PROBE_THRESHOLD,
                format!("|div| = {:.3e} at step {s:e}", d.abs()),
            ));
        }
    }
    if report.checks.is_empty() && report.rows.iter().all(|r| r.error.is_none()) {
        report.check("curl", false, format!("no step at or below {PROBE_STEP:e}"));
    }
    // step-halving ratios above the floor
    let (rlo, rhi) = STEP_RATIO_RANGE;
    let ok_rows: Vec<&ReportRow> = report.rows.iter().filter(|r| r.error.is_none()).collect();
    for w in ok_rows.windows(2) {
        let (big, small) = (w[0], w[1]);
        if (big.scale / small.scale - 2.0).abs() > 1e-9 {
            continue;
        }
        let floor = floor_at(small.scale);
        if small.abs_error <= floor || big.abs_error <= floor {
            continue;
        }
        let ratio = big.abs_error / small.abs_error;
        report.checks.push(Check::new(
            "step_ratio",
            (rlo..=rhi).contains(&ratio),
            format!("{ratio:.4} for steps {:e} -> {:e}", big.scale, small.scale),
        ));
    }
    report.finish()
}

/// Noise floor of a central difference: `100 × quadrature error / step`.
fn fd_floor(quad_error: f64, step: f64) -> f64 {
    100.0 * quad_error / step
}

/// Curl and divergence of the loop field at each probe point.
pub fn curl_vanishing(
    curve: &Curve,
    probe_points: &[Vector3],
    steps: &[f64],
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vec<ConvergenceReport>> {
    curve.validate()?;
    let max_step = steps.iter().cloned().fold(0.0, f64::max);
    for &p in probe_points {
        let d = curve.distance_to(p);
        if d < 100.0 * max_step {
            return Err(Error::InvalidArgument(format!(
                "probe point {p:?} is only {d} from the curve, need 100 x step"
            )));
        }
    }
    let reports = probe_points
        .par_iter()
        .map(|&x| {
            let quad_err = biot_savart_estimate(curve, x, consts, spec).map_or(0.0, |e| e.error);
            stencil_report(
                "curl_vanishing",
                x,
                steps,
                |p| biot_savart(curve, p, consts, spec),
                |s| fd_floor(quad_err, s),
            )
        })
        .collect();
    Ok(reports)
}

/// Divergence and curl of the Coulomb field of a charged patch, or of a
/// dipole sheet on it when `dipole_h` is given, away from the charges.
pub fn maxwell_probe(
    patch: &SurfacePatch,
    sigma: f64,
    dipole_h: Option<f64>,
    probe_points: &[Vector3],
    steps: &[f64],
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Vec<ConvergenceReport>> {
    patch.validate()?;
    let name = if dipole_h.is_some() { "maxwell_dipole" } else { "maxwell_plain" };
    let field = |p: Vector3| match dipole_h {
        Some(h) => dipole_sheet_field_exact(patch, &DipoleSheetSpec::new(sigma, h)?, p, consts, spec),
        None => coulomb_surface_field(patch, sigma, p, consts, spec),
    };
    // relative quadrature accuracy sets the noise floor
    let reports = probe_points
        .par_iter()
        .map(|&x| {
            let scale = field(x).map_or(0.0, |e| e.norm());
            let quad_err = spec.abs_tol.max(spec.rel_tol * scale);
            stencil_report(name, x, steps, field, |s| fd_floor(quad_err, s))
        })
        .collect();
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma53Row {
    pub n: u32,
    pub a_total: f64,
    pub a_c1: f64,
    pub a_c2: f64,
    pub abs_err: f64,
    pub error_estimate: f64,
    /// `n / sqrt(1 + n²)`, the closed form of the leg on the axis.
    pub c1_closed_form: f64,
    pub lk: Option<i64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma53Report {
    pub rows: Vec<Lemma53Row>,
    /// `t / sqrt(1 + t²)` as `t → ∞`, evaluated at `t = 1e8`.
    pub infinite_line_value: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Lemma53Report {
    pub const CSV_HEADER: &'static str = "n,A_total,A_c1,A_c2,abs_err,error_estimate,c1_closed_form,Lk,error";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                csv_float(r.a_total),
                csv_float(r.a_c1),
                csv_float(r.a_c2),
                csv_float(r.abs_err),
                csv_float(r.error_estimate),
                csv_float(r.c1_closed_form),
                r.lk.map(|l| l.to_string()).unwrap_or_default(),
                csv_text(r.error.as_deref().unwrap_or("")),
            );
        }
        out
    }
}

/// Odd mesh size for the disk spanning the unit circle; odd keeps the
/// centre off the grid lines where the axis leg crosses.
pub const LEMMA53_DISK_MESH: usize = 11;

/// The rectangle loop `C_n` against the unit circle `L` in the `z = 0`
/// plane, for each `n`. The leg on the `z` axis is `C¹`, the other three `C²`.
pub fn lemma53_convergence(
    n_list: &[u32],
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Result<Lemma53Report> {
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let l = Curve::circle(Vector3::ZERO, 1.0, Vector3::Z, Orientation::Ccw)?;
    let disk = SurfacePatch::Disk {
        center: Vector3::ZERO,
        radius: 1.0,
        axis: Vector3::Z,
    };
    let mesh = mesh_surface(&disk, LEMMA53_DISK_MESH, LEMMA53_DISK_MESH)?;
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let rows: Vec<Lemma53Row> = sorted
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let closed = nf / (1.0 + nf * nf).sqrt();
            let computed = (|| {
                let c = Curve::rect_loop(n)?;
                let scene = LinkScene::new(c.clone(), l.clone(), Some(mesh.clone()), spec)?;
                let parts = gauss_linking_by_piece(&scene, consts, spec)?;
                let lk = combinatorial_lk(&c, &mesh, DEFAULT_TRANSVERSALITY_TOL)?;
                Ok::<_, Error>((parts, lk))
            })();
            match computed {
                Ok((parts, lk)) => {
                    let c1 = parts[0].value;
                    let c2: f64 = parts[1..].iter().map(|e| e.value).sum();
                    let err: f64 = parts.iter().map(|e| e.error).sum();
                    let total = c1 + c2;
                    Lemma53Row {
                        n,
                        a_total: total,
                        a_c1: c1,
                        a_c2: c2,
                        abs_err: (total - 1.0).abs(),
                        error_estimate: err,
                        c1_closed_form: closed,
                        lk: Some(lk),
                        error: None,
                    }
                }
                Err(e) => Lemma53Row {
                    n,
                    a_total: f64::NAN,
                    a_c1: f64::NAN,
                    a_c2: f64::NAN,
                    abs_err: f64::NAN,
                    error_estimate: f64::NAN,
                    c1_closed_form: closed,
                    lk: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let t = 1e8_f64;
    let infinite_line_value = t / (1.0 + t * t).sqrt();
    let mut checks = Vec::new();
    let ok_rows = rows.iter().all(|r| r.error.is_none());
    checks.push(Check::new("rows", ok_rows, "every n evaluated".into()));
    if let Some(last) = rows.last() {
        checks.push(Check::new(
            "limit",
            last.abs_err <= 1e-2,
            format!("|A(C_{}) - 1| = {:.3e} <= 1e-2", last.n, last.abs_err),
        ));
    }
    let tail_monotone = rows.windows(2).all(|w| w[1].a_c2.abs() < w[0].a_c2.abs());
    checks.push(Check::new(
        "c2_tail_monotone",
        tail_monotone && rows.len() >= 2,
        rows.iter().map(|r| format!("{:.3e}", r.a_c2)).collect::<Vec<_>>().join(" > "),
    ));
    let c1_rising = rows.windows(2).all(|w| w[1].a_c1 > w[0].a_c1 && w[1].a_c1 <= 1.0 + 1e-12);
    let worst_c1 = rows.iter().map(|r| (r.a_c1 - r.c1_closed_form).abs()).fold(0.0, f64::max);
    checks.push(Check::new(
        "c1_toward_one",
        c1_rising && worst_c1 <= 1e-8,
        format!("max |C1 - closed form| = {worst_c1:.3e}"),
    ));
    checks.push(Check::new(
        "infinite_line",
        (infinite_line_value - 1.0).abs() <= 1e-12,
        format!("{infinite_line_value}"),
    ));
    let lk_one = rows.iter().all(|r| r.lk == Some(1));
    checks.push(Check::new("lk_is_one", lk_one, format!("{:?}", rows.iter().map(|r| r.lk).collect::<Vec<_>>())));
    let passed = checks.iter().all(|c| c.passed);
    Ok(Lemma53Report {
        rows,
        infinite_line_value,
        checks,
        passed,
    })
}

/// Result of checking the triple-product identity on random inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub samples: usize,
    pub seed: u64,
    pub failures: usize,
    /// Largest `‖lhs − rhs‖ / (‖a‖ ‖b‖)` seen.
    pub worst: f64,
    pub passed: bool,
}

/// Allowed discrepancy of the two sides, relative to `‖a‖ ‖b‖`.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// `samples` random triples `(a, b, r̂)` from a seeded ChaCha stream, with
/// `a`, `b` uniform in `[-1, 1]³` and `r̂` a normalized Gaussian vector.
pub fn identity_sweep(samples: usize, seed: u64) -> Result<IdentityReport> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cube = || Vector3::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < samples {
        let a = cube();
        let b = cube();
        let Some(r_hat) = cube().normalized() else { continue };
        let (lhs, rhs) = lemma41_identity(a, b, r_hat)?;
        let scale = a.norm() * b.norm();
        let rel = if scale > 0.0 { (lhs - rhs).norm() / scale } else { (lhs - rhs).norm() };
        worst = worst.max(rel);
        if rel > IDENTITY_TOLERANCE {
            failures += 1;
        }
        done += 1;
    }
    Ok(IdentityReport {
        samples,
        seed,
        failures,
        worst,
        passed: failures == 0 && samples > 0,
    })
}

/// Accepted range for the error ratio when `ε` is halved in the Taylor probe.
pub const TAYLOR_RATIO_RANGE: (f64, f64) = (1.8, 2.2);

/// Finite-difference slopes of `‖x + εa‖⁻³` against `−3 ‖x‖⁻⁵ (x · a)`;
/// halving `ε` should halve the error.
pub fn taylor_report(x: Vector3, a: Vector3, eps_list: &[f64]) -> Result<ConvergenceReport> {
    let probe = taylor_probe(x, a, eps_list)?;
    let rows = probe
        .eps
        .iter()
        .zip(&probe.slopes)
        .map(|(&e, &s)| {
            let mut row = ReportRow::new(e, Quantity::Scalar(s), Quantity::Scalar(probe.analytic));
            // the remainder is judged in absolute terms
            row.rel_error = None;
            row
        })
        .collect();
    let mut report = ConvergenceReport::new("taylor", format!("x={} a={}", fmt_vec(x), fmt_vec(a)), rows);
    let (lo, hi) = TAYLOR_RATIO_RANGE;
    let pairs: Vec<(f64, f64, f64)> = report
        .rows
        .windows(2)
        .filter(|w| (w[0].scale / w[1].scale - 2.0).abs() < 1e-9)
        .map(|w| (w[0].scale, w[1].scale, w[0].abs_error / w[1].abs_error))
        .collect();
    for (big, small, ratio) in &pairs {
        report.check(
            "halving_ratio",
            (lo..=hi).contains(ratio),
            format!("{ratio:.4} for eps {big:e} -> {small:e}"),
        );
    }
    if pairs.is_empty() {
        report.check("halving_ratio", false, "no pair of eps differing by a factor 2".into());
    }
    Ok(report.finish())
}

/// A catalog entry: a validated scene with a mesh spanning `L`.
#[derive(Debug, Clone)]
pub struct NamedScene {
    pub id: String,
    pub scene: LinkScene,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub scene_id: String,
    pub a: f64,
    pub a_error: f64,
    pub lk: Option<i64>,
    pub diff: f64,
    /// `A(L, C)` with its error estimate.
    pub a_swapped: f64,
    pub a_swapped_error: f64,
    pub symmetric: bool,
    pub pass: bool,
    pub error: Option<String>,
}

/// Allowed `|A − Lk|` on top of the quadrature error estimate.
pub const AMPERE_TOLERANCE: f64 = 1e-4;

pub const CATALOG_CSV_HEADER: &str =
    "scene_id,A,A_error,Lk,abs_diff,A_swapped,A_swapped_error,symmetric,pass,error";

/// `A(C, L)` against `Lk(C, L)` for each scene, plus the symmetry
/// `A(C, L) = A(L, C)`. Failures are recorded per row.
pub fn ampere_catalog(
    scenes: &[NamedScene],
    consts: &FieldConstants,
    spec: &QuadratureSpec,
) -> Vec<CatalogRow> {
    scenes
        .par_iter()
        .map(|s| {
            let computed = (|| {
                let mesh = s.scene.spanning_mesh.as_ref().ok_or_else(|| {
                    Error::InvalidArgument(format!("scene {} has no spanning mesh", s.id))
                })?;
                let a = gauss_linking(&s.scene, consts, spec)?;
                let sw = gauss_linking(&s.scene.swapped(), consts, spec)?;
                let lk = combinatorial_lk(&s.scene.curve_c, mesh, DEFAULT_TRANSVERSALITY_TOL)?;
                Ok::<_, Error>((a, sw, lk))
            })();
            match computed {
                Ok((a, sw, lk)) => {
                    let diff = (a.value - lk as f64).abs();
                    let symmetric = (a.value - sw.value).abs() <= 2.0 * (a.error + sw.error);
                    CatalogRow {
                        scene_id: s.id.clone(),
                        a: a.value,
                        a_error: a.error,
                        lk: Some(lk),
                        diff,
                        a_swapped: sw.value,
                        a_swapped_error: sw.error,
                        symmetric,
                        pass: diff <= AMPERE_TOLERANCE + a.error && symmetric,
                        error: None,
                    }
                }
                Err(e) => CatalogRow {
                    scene_id: s.id.clone(),
                    a: f64::NAN,
                    a_error: f64::NAN,
                    lk: None,
                    diff: f64::NAN,
                    a_swapped: f64::NAN,
                    a_swapped_error: f64::NAN,
                    symmetric: false,
                    pass: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

pub fn catalog_csv(rows: &[CatalogRow]) -> String {
    let mut out = format!("{CATALOG_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_text(&r.scene_id),
            csv_float(r.a),
            csv_float(r.a_error),
            r.lk.map(|l| l.to_string()).unwrap_or_default(),
            csv_float(r.diff),
            csv_float(r.a_swapped),
            csv_float(r.a_swapped_error),
            r.symmetric,
            r.pass,
            csv_text(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

fn circle(center: Vector3, radius: f64, axis: Vector3) -> Result<Curve> {
    Curve::circle(center, radius, axis, Orientation::Ccw)
}

fn disk_spanning(center: Vector3, radius: f64, axis: Vector3, m: usize) -> Result<crate::geometry::SurfaceMesh> {
    mesh_surface(&SurfacePatch::Disk { center, radius, axis }, m, m)
}

/// Curve winding twice through the unit disk in the `z = 0` plane.
pub fn double_wind_curve() -> Result<Curve> {
    let v = Vector3::new;
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
}

/// The built-in catalog, linking numbers -1, 0, 1 and 2.
pub fn default_catalog(spec: &QuadratureSpec) -> Result<Vec<NamedScene>> {
    let unit_l = circle(Vector3::ZERO, 1.0, Vector3::Z)?;
    let disk = disk_spanning(Vector3::ZERO, 1.0, Vector3::Z, 21)?;
    let hopf_c = circle(Vector3::X, 1.0, Vector3::Y)?;
    let dome = mesh_surface(
        &SurfacePatch::Dome {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
            height: 0.7,
        },
        21,
        21,
    )?;
    let rect_l = Curve::polyline(
        vec![
            Vector3::new(-1.0, -0.5, 0.0),
            Vector3::new(1.0, -0.5, 0.0),
            Vector3::new(1.0, 0.5, 0.0),
            Vector3::new(-1.0, 0.5, 0.0),
        ],
        true,
    )?;
    let rect_mesh = mesh_surface(
        &SurfacePatch::PlanarRect {
            corner: Vector3::new(-1.0, -0.5, 0.0),
            edge_a: Vector3::new(2.0, 0.0, 0.0),
            edge_b: Vector3::new(0.0, 1.0, 0.0),
        },
        17,
        9,
    )?;
    let entries: Vec<(&str, Curve, Curve, crate::geometry::SurfaceMesh)> = vec![
        ("hopf", hopf_c.clone(), unit_l.clone(), disk.clone()),
        ("hopf_reversed", hopf_c.reversed(), unit_l.clone(), disk.clone()),
        ("hopf_dome", hopf_c.clone(), unit_l.clone(), dome),
        (
            "unlinked_far",
            circle(Vector3::new(0.0, 0.0, 10.0), 1.0, Vector3::Z)?,
            unit_l.clone(),
            disk.clone(),
        ),
        (
            "unlinked_near",
            circle(Vector3::new(2.5, 0.0, 0.0), 1.0, Vector3::Y)?,
            unit_l.clone(),
            disk.clone(),
        ),
        ("double_wind", double_wind_curve()?, unit_l.clone(), disk.clone()),
        ("lemma53_n4", Curve::rect_loop(4)?, unit_l.clone(), disk.clone()),
        ("lemma53_reversed", Curve::rect_loop(4)?.reversed(), unit_l.clone(), disk.clone()),
        (
            "rect_threaded",
            circle(Vector3::new(0.3, 0.5, 0.0), 0.6, Vector3::X)?,
            rect_l,
            rect_mesh,
        ),
    ];
    entries
        .into_iter()
        .map(|(id, c, l, mesh)| {
            Ok(NamedScene {
                id: id.to_string(),
                scene: LinkScene::new(c, l, Some(mesh), spec)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn unit_square() -> SurfacePatch {
        SurfacePatch::PlanarRect {
            corner: Vector3::ZERO,
            edge_a: Vector3::X,
            edge_b: Vector3::Y,
        }
    }

    #[test]
    fn fit_recovers_power_law() {
        let rows: Vec<ReportRow> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&s: &f64| ReportRow::new(s, Quantity::Scalar(1.0 + 3.0 * s * s), Quantity::Scalar(1.0)))
            .collect();
        assert!((fitted_order(&rows).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_order(&rows[..2]), None);
    }

    #[test]
    fn rows_sorted_descending() {
        let rows = [0.1, 0.4, 0.2]
            .iter()
            .map(|&s| ReportRow::new(s, Quantity::Scalar(s), Quantity::Scalar(0.0)))
            .collect();
        let r = ConvergenceReport::new("t", String::new(), rows);
        let scales: Vec<f64> = r.rows.iter().map(|r| r.scale).collect();
        assert_eq!(scales, vec![0.4, 0.2, 0.1]);
    }

    #[test]
    fn infinitesimal_default_panel() {
        let eps = [0.2, 0.1, 0.05, 0.025];
        let on_axis = similitude_infinitesimal(
            Vector3::ZERO,
            Vector3::X,
            Vector3::Y,
            Vector3::new(0.0, 0.0, 2.0),
            &eps,
            1e-4,
            &spec(),
        )
        .unwrap();
        assert!(on_axis.passed, "{on_axis:#?}");
        assert!(on_axis.rows.windows(2).all(|w| w[1].fit_error() < w[0].fit_error()));
        let oblique = similitude_infinitesimal(
            Vector3::ZERO,
            Vector3::X,
            Vector3::Y,
            Vector3::new(1.2, -0.7, 1.5),
            &eps,
            1e-4,
            &spec(),
        )
        .unwrap();
        assert!(oblique.passed, "{}", oblique.summary());
    }

    #[test]
    fn infinitesimal_error_independent_of_h() {
        let run = |h| {
            similitude_infinitesimal(
                Vector3::ZERO,
                Vector3::X,
                Vector3::Y,
                Vector3::new(0.0, 0.0, 2.0),
                &[0.1],
                h,
                &spec(),
            )
            .unwrap()
            .rows[0]
                .fit_error()
        };
        assert!((run(1e-3) - run(1e-4)).abs() < 1e-10);
    }

    #[test]
    fn infinitesimal_rejects_large_eps() {
        let r = similitude_infinitesimal(Vector3::ZERO, Vector3::X, Vector3::Y, Vector3::Z * 2.0, &[0.5], 1e-4, &spec());
        assert!(r.is_err());
    }

    #[test]
    fn general_square() {
        let r = similitude_general(&unit_square(), Vector3::new(0.5, 0.5, 2.0), 1e-4, &[8, 16, 32, 64], &spec()).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.rows.windows(2).all(|w| w[1].fit_error() < w[0].fit_error()));
    }

    #[test]
    fn general_disk_on_axis() {
        let disk = SurfacePatch::Disk {
            center: Vector3::ZERO,
            radius: 1.0,
            axis: Vector3::Z,
        };
        let r = similitude_general(&disk, Vector3::new(0.0, 0.0, 3.0), 1e-4, &[8, 16, 32, 64], &spec()).unwrap();
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn one_cell_mesh_is_the_centred_panel() {
        let side = 0.05;
        let sq = SurfacePatch::PlanarRect {
            corner: Vector3::ZERO,
            edge_a: Vector3::X * side,
            edge_b: Vector3::Y * side,
        };
        let r = Vector3::new(0.0, 0.0, 2.0);
        let general = similitude_general(&sq, r, 1e-4, &[1], &spec()).unwrap();
        let panel = Panel::new(Vector3::ZERO, Vector3::X * side, Vector3::Y * side).unwrap();
        let dp = DipoleSheetSpec::new(1.0, 1e-4).unwrap();
        let e = dipole_panel_field(&panel.recentered(), &dp, r, &FieldConstants::UNIT).unwrap();
        assert_eq!(general.rows[0].measured, Quantity::Vector(e));
        let b = biot_savart(&panel.boundary(), r, &FieldConstants::UNIT, &spec()).unwrap() * 1e-4;
        match general.rows[0].reference {
            Quantity::Vector(v) => assert!((v - b).norm() <= 1e-12 * b.norm(), "{v:?} {b:?}"),
            _ => panic!(),
        }
    }

    fn tight() -> QuadratureSpec {
        QuadratureSpec::default().with_tolerances(1e-15, 1e-14)
    }

    #[test]
    fn loop_curl_vanishes() {
        let c = Curve::circle(Vector3::ZERO, 1.0, Vector3::Z, Orientation::Ccw).unwrap();
        let reports = curl_vanishing(
            &c,
            &[Vector3::new(0.0, 0.0, 1.5), Vector3::new(0.4, 0.3, 1.2)],
            &[4e-3, 2e-3, 1e-3],
            &FieldConstants::default(),
            &tight(),
        )
        .unwrap();
        for r in &reports {
            assert!(r.passed, "{r:#?}");
        }
        assert!(reports[1].checks.iter().any(|c| c.name == "step_ratio"), "{:#?}", reports[1]);
    }

    #[test]
    fn maxwell_off_support() {
        let p = [Vector3::new(0.5, 0.5, 1.0)];
        let plain = maxwell_probe(&unit_square(), 1.0, None, &p, &[1e-3], &FieldConstants::default(), &spec()).unwrap();
        assert!(plain[0].passed, "{:#?}", plain[0]);
        let dip = maxwell_probe(&unit_square(), 1.0, Some(1e-3), &p, &[1e-3], &FieldConstants::default(), &spec())
            .unwrap();
        assert!(dip[0].passed, "{:#?}", dip[0]);
    }

    #[test]
    fn maxwell_guard_is_reported_not_raised() {
        let p = [Vector3::new(0.5, 0.5, 1e-7)];
        let r = maxwell_probe(&unit_square(), 1.0, None, &p, &[1e-3], &FieldConstants::default(), &spec()).unwrap();
        assert!(!r[0].passed);
        assert!(r[0].rows[0].error.as_deref().unwrap().contains("guard distance"), "{r:#?}");
    }

    #[test]
    fn lemma53_report() {
        let r = lemma53_convergence(&[2, 4, 8, 16, 32], &FieldConstants::default(), &spec()).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.to_csv().starts_with("n,A_total,A_c1,A_c2,abs_err"));
        assert!(lemma53_convergence(&[1], &FieldConstants::default(), &spec()).is_err());
    }

    #[test]
    fn catalog_passes() {
        let scenes = default_catalog(&spec()).unwrap();
        let rows = ampere_catalog(&scenes, &FieldConstants::default(), &spec());
        for r in &rows {
            assert!(r.pass, "{r:#?}");
        }
        let mut lks: Vec<i64> = rows.iter().filter_map(|r| r.lk).collect();
        lks.sort();
        lks.dedup();
        assert_eq!(lks, vec![-1, 0, 1, 2]);
    }

    #[test]
    fn csv_is_fixed_format() {
        assert_eq!(csv_float(1.0), "1.0000000000000000e0");
        assert_eq!(csv_float(-0.1), "-1.0000000000000001e-1");
        let r = ConvergenceReport::new(
            "x",
            "a,b".into(),
            vec![ReportRow::new(0.5, Quantity::Scalar(2.0), Quantity::Scalar(1.0))],
        );
        let csv = r.to_csv();
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.contains("\"a,b\""));
    }

    #[test]
    fn identity_sweep_is_clean_and_seeded() {
        let a = identity_sweep(2000, 7).unwrap();
        assert!(a.passed && a.failures == 0, "{a:?}");
        assert_eq!(a, identity_sweep(2000, 7).unwrap());
    }

    #[test]
    fn taylor_first_order() {
        let r = taylor_report(
            Vector3::new(1.0, -0.5, 2.0),
            Vector3::new(0.3, 0.8, -0.4),
            &[1e-2, 5e-3, 2.5e-3, 1.25e-3],
        )
        .unwrap();
        assert!(r.passed, "{r:#?}");
        assert!((r.fitted_order.unwrap() - 1.0).abs() < 0.05);
    }
}
