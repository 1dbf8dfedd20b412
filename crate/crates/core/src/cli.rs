//! Command line front end: JSON scene files in, CSV and JSON reports out.
//!
//! Exit codes: 0 when everything passes, 1 when a report row fails, 2 on
//! usage or input errors, 3 when a required computation fails numerically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    ampere_catalog, catalog_csv, csv_float, curl_vanishing, default_catalog, identity_sweep,
    lemma53_convergence, maxwell_probe, similitude_general, similitude_infinitesimal,
    taylor_report, ConvergenceReport, NamedScene,
};
use crate::fields::{
    biot_savart_estimate, coulomb_surface_field, dipole_sheet_field_exact, DipoleSheetSpec,
    FieldConstants,
};
use crate::geometry::{mesh_surface, Curve, Orientation, SurfaceMesh, SurfacePatch, DEFAULT_TRANSVERSALITY_TOL};
use crate::linking::{combinatorial_lk, gauss_linking, LinkScene};
use crate::quadrature::QuadratureSpec;
use crate::vector::Vector3;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const SCENE_FILE_VERSION: u32 = 1;

fn default_mesh_size() -> usize {
    21
}

fn default_sigma() -> f64 {
    1.0
}

/// A surface patch and the resolution of its mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceEntry {
    pub patch: SurfacePatch,
    #[serde(default = "default_mesh_size")]
    pub m: usize,
    #[serde(default = "default_mesh_size")]
    pub n: usize,
}

/// Names of the curves `C` and `L` and of an optional surface spanning `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEntry {
    pub c: String,
    pub l: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Field of a named curve (Biot-Savart) or surface (Coulomb, or a dipole
    /// sheet when `h` is given) at the listed points.
    Field {
        source: String,
        points: Vec<Vector3>,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    /// Gauss linking integral of the listed scenes (all when empty).
    Link {
        #[serde(default)]
        scenes: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Lk {
        #[serde(default)]
        scenes: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    SimilitudeInfinitesimal {
        base: Vector3,
        a: Vector3,
        b: Vector3,
        r: Vector3,
        eps: Vec<f64>,
        h: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    SimilitudeGeneral {
        surface: String,
        r: Vector3,
        h: f64,
        mesh_sizes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Ampere {
        #[serde(default)]
        scenes: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Lemma53 {
        n: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Maxwell {
        surface: String,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
        points: Vec<Vector3>,
        steps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature: Option<QuadratureSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Curl {
        curve: String,
        points: Vec<Vector3>,
        steps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature: Option<QuadratureSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Identity {
        samples: usize,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
    Taylor {
        x: Vector3,
        a: Vector3,
        eps: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        out: Option<PathBuf>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Field { .. } => "field",
            Experiment::Link { .. } => "link",
            Experiment::Lk { .. } => "lk",
            Experiment::SimilitudeInfinitesimal { .. } => "similitude_infinitesimal",
            Experiment::SimilitudeGeneral { .. } => "similitude_general",
            Experiment::Ampere { .. } => "ampere",
            Experiment::Lemma53 { .. } => "lemma53",
            Experiment::Maxwell { .. } => "maxwell",
            Experiment::Curl { .. } => "curl",
            Experiment::Identity { .. } => "identity",
            Experiment::Taylor { .. } => "taylor",
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Experiment::Field { out, .. }
            | Experiment::Link { out, .. }
            | Experiment::Lk { out, .. }
            | Experiment::SimilitudeInfinitesimal { out, .. }
            | Experiment::SimilitudeGeneral { out, .. }
            | Experiment::Ampere { out, .. }
            | Experiment::Lemma53 { out, .. }
            | Experiment::Maxwell { out, .. }
            | Experiment::Curl { out, .. }
            | Experiment::Identity { out, .. }
            | Experiment::Taylor { out, .. } => out.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    #[serde(default)]
    pub constants: FieldConstants,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub curves: BTreeMap<String, Curve>,
    #[serde(default)]
    pub surfaces: BTreeMap<String, SurfaceEntry>,
    #[serde(default)]
    pub scenes: BTreeMap<String, SceneEntry>,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: SceneFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("scene file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read scene file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene files always serialize")
    }

    /// Version, constants, quadrature, geometry and that every name resolves.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCENE_FILE_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported scene file version {}, expected {SCENE_FILE_VERSION}",
                self.version
            )));
        }
        self.constants.validate()?;
        self.quadrature.validate()?;
        for (name, c) in &self.curves {
            c.validate()
                .map_err(|e| Error::InvalidArgument(format!("curve {name}: {e}")))?;
        }
        for (name, s) in &self.surfaces {
            s.patch
                .validate()
                .map_err(|e| Error::InvalidArgument(format!("surface {name}: {e}")))?;
            if s.m == 0 || s.n == 0 {
                return Err(Error::InvalidArgument(format!("surface {name}: mesh size must be positive")));
            }
        }
        for (name, s) in &self.scenes {
            self.curve(&s.c).map_err(|e| Error::InvalidArgument(format!("scene {name}: {e}")))?;
            self.curve(&s.l).map_err(|e| Error::InvalidArgument(format!("scene {name}: {e}")))?;
            if let Some(surf) = &s.surface {
                self.surface(surf).map_err(|e| Error::InvalidArgument(format!("scene {name}: {e}")))?;
            }
        }
        for e in &self.experiments {
            self.check_refs(e)?;
        }
        Ok(())
    }

    fn check_refs(&self, e: &Experiment) -> Result<()> {
        let scenes = |ids: &[String]| -> Result<()> {
            for id in ids {
                if !self.scenes.contains_key(id) {
                    return Err(Error::InvalidArgument(format!("unknown scene {id:?}")));
                }
            }
            Ok(())
        };
        match e {
            Experiment::Field { source, .. } => {
                if !self.curves.contains_key(source) && !self.surfaces.contains_key(source) {
                    return Err(Error::InvalidArgument(format!("unknown curve or surface {source:?}")));
                }
            }
            Experiment::Link { scenes: ids, .. }
            | Experiment::Lk { scenes: ids, .. }
            | Experiment::Ampere { scenes: ids, .. } => scenes(ids)?,
            Experiment::SimilitudeGeneral { surface, .. } | Experiment::Maxwell { surface, .. } => {
                self.surface(surface)?;
            }
            Experiment::Curl { curve, .. } => {
                self.curve(curve)?;
            }
            Experiment::SimilitudeInfinitesimal { .. }
            | Experiment::Lemma53 { .. }
            | Experiment::Identity { .. }
            | Experiment::Taylor { .. } => {}
        }
        Ok(())
    }

    pub fn curve(&self, name: &str) -> Result<&Curve> {
        self.curves
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown curve {name:?}")))
    }

    pub fn surface(&self, name: &str) -> Result<&SurfaceEntry> {
        self.surfaces
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown surface {name:?}")))
    }

    pub fn mesh(&self, name: &str) -> Result<SurfaceMesh> {
        let s = self.surface(name)?;
        mesh_surface(&s.patch, s.m, s.n)
    }

    pub fn link_scene(&self, id: &str) -> Result<LinkScene> {
        let s = self
            .scenes
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scene {id:?}")))?;
        let mesh = s.surface.as_deref().map(|n| self.mesh(n)).transpose()?;
        LinkScene::new(self.curve(&s.c)?.clone(), self.curve(&s.l)?.clone(), mesh, &self.quadrature)
    }

    fn scene_ids(&self, ids: &[String]) -> Vec<String> {
        if ids.is_empty() {
            self.scenes.keys().cloned().collect()
        } else {
            ids.to_vec()
        }
    }
}

/// CSV and JSON renderings of one experiment's results.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: &'static str,
    pub csv: String,
    pub json: serde_json::Value,
    pub passed: bool,
    /// One line per report for the diagnostic stream.
    pub summary: Vec<String>,
}

fn reports_outcome(kind: &'static str, reports: &[ConvergenceReport]) -> Outcome {
    let mut csv = format!("{}\n", ConvergenceReport::CSV_HEADER);
    for r in reports {
        csv.push_str(&r.csv_rows());
    }
    Outcome {
        kind,
        csv,
        json: serde_json::to_value(reports).expect("reports serialize"),
        passed: reports.iter().all(|r| r.passed),
        summary: reports.iter().map(|r| r.summary()).collect(),
    }
}

fn numeric_json(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// Runs one experiment against the definitions of `file`.
pub fn execute(file: &SceneFile, exp: &Experiment) -> Result<Outcome> {
    let consts = &file.constants;
    let spec = &file.quadrature;
    match exp {
        Experiment::Field {
            source,
            points,
            sigma,
            h,
            ..
        } => {
            let mut csv = String::from("source,x,y,z,field_x,field_y,field_z\n");
            let mut records = Vec::new();
            for &p in points {
                let f = if let Ok(curve) = file.curve(source) {
                    biot_savart_estimate(curve, p, consts, spec)?.value
                } else {
                    let patch = &file.surface(source)?.patch;
                    match h {
                        Some(h) => dipole_sheet_field_exact(patch, &DipoleSheetSpec::new(*sigma, *h)?, p, consts, spec)?,
                        None => coulomb_surface_field(patch, *sigma, p, consts, spec)?,
                    }
                };
                let _ = writeln!(
                    csv,
                    "{source},{},{},{},{},{},{}",
                    csv_float(p.x),
                    csv_float(p.y),
                    csv_float(p.z),
                    csv_float(f.x),
                    csv_float(f.y),
                    csv_float(f.z)
                );
                records.push(json!({"point": p, "field": f}));
            }
            Ok(Outcome {
                kind: "field",
                csv,
                json: json!({"source": source, "values": records}),
                passed: true,
                summary: vec![format!("field of {source} at {} points", points.len())],
            })
        }
        Experiment::Link { scenes, .. } => {
            let mut csv = String::from("scene_id,A,A_error,nearest_integer,Lk,pass\n");
            let mut records = Vec::new();
            let mut summary = Vec::new();
            let mut passed = true;
            for id in file.scene_ids(scenes) {
                let scene = file.link_scene(&id)?;
                let a = gauss_linking(&scene, consts, spec)?;
                let lk = scene
                    .spanning_mesh
                    .as_ref()
                    .map(|m| combinatorial_lk(&scene.curve_c, m, DEFAULT_TRANSVERSALITY_TOL))
                    .transpose()?;
                let target = lk.map_or(a.value.round(), |l| l as f64);
                let ok = (a.value - target).abs() <= crate::experiments::AMPERE_TOLERANCE + a.error;
                passed &= ok;
                let _ = writeln!(
                    csv,
                    "{id},{},{},{},{},{ok}",
                    csv_float(a.value),
                    csv_float(a.error),
                    a.value.round() as i64,
                    lk.map(|l| l.to_string()).unwrap_or_default()
                );
                summary.push(format!("{id}: A = {:.12} (error {:.1e}), Lk = {lk:?}", a.value, a.error));
                records.push(json!({"scene_id": id, "A": a.value, "A_error": a.error, "evaluations": a.evaluations, "Lk": lk, "pass": ok}));
            }
            Ok(Outcome {
                kind: "link",
                csv,
                json: json!(records),
                passed,
                summary,
            })
        }
        Experiment::Lk { scenes, .. } => {
            let mut csv = String::from("scene_id,Lk\n");
            let mut records = Vec::new();
            let mut summary = Vec::new();
            for id in file.scene_ids(scenes) {
                let scene = file.link_scene(&id)?;
                let mesh = scene
                    .spanning_mesh
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument(format!("scene {id} has no spanning surface")))?;
                let lk = combinatorial_lk(&scene.curve_c, mesh, DEFAULT_TRANSVERSALITY_TOL)?;
                let _ = writeln!(csv, "{id},{lk}");
                summary.push(format!("{id}: Lk = {lk}"));
                records.push(json!({"scene_id": id, "Lk": lk}));
            }
            Ok(Outcome {
                kind: "lk",
                csv,
                json: json!(records),
                passed: true,
                summary,
            })
        }
        Experiment::SimilitudeInfinitesimal { base, a, b, r, eps, h, .. } => {
            let report = similitude_infinitesimal(*base, *a, *b, *r, eps, *h, spec)?;
            Ok(reports_outcome("similitude_infinitesimal", &[report]))
        }
        Experiment::SimilitudeGeneral {
            surface,
            r,
            h,
            mesh_sizes,
            ..
        } => {
            let report = similitude_general(&file.surface(surface)?.patch, *r, *h, mesh_sizes, spec)?;
            Ok(reports_outcome("similitude_general", &[report]))
        }
        Experiment::Ampere { scenes, .. } => {
            let named = file
                .scene_ids(scenes)
                .into_iter()
                .map(|id| Ok(NamedScene { scene: file.link_scene(&id)?, id }))
                .collect::<Result<Vec<_>>>()?;
            Ok(catalog_outcome(&named, consts, spec))
        }
        Experiment::Lemma53 { n, .. } => {
            let report = lemma53_convergence(n, consts, spec)?;
            Ok(Outcome {
                kind: "lemma53",
                csv: report.to_csv(),
                passed: report.passed,
                summary: report
                    .checks
                    .iter()
                    .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
                    .collect(),
                json: serde_json::to_value(&report).expect("report serializes"),
            })
        }
        Experiment::Maxwell {
            surface,
            sigma,
            h,
            points,
            steps,
            quadrature,
            ..
        } => {
            let spec = quadrature.as_ref().unwrap_or(spec);
            spec.validate()?;
            let reports = maxwell_probe(&file.surface(surface)?.patch, *sigma, *h, points, steps, consts, spec)?;
            Ok(reports_outcome("maxwell", &reports))
        }
        Experiment::Curl {
            curve,
            points,
            steps,
            quadrature,
            ..
        } => {
            let spec = quadrature.as_ref().unwrap_or(spec);
            spec.validate()?;
            let reports = curl_vanishing(file.curve(curve)?, points, steps, consts, spec)?;
            Ok(reports_outcome("curl", &reports))
        }
        Experiment::Identity { samples, seed, .. } => {
            let r = identity_sweep(*samples, *seed)?;
            Ok(Outcome {
                kind: "identity",
                csv: format!(
                    "samples,seed,failures,worst_relative\n{},{},{},{}\n",
                    r.samples,
                    r.seed,
                    r.failures,
                    csv_float(r.worst)
                ),
                passed: r.passed,
                summary: vec![format!("{} of {} triples outside tolerance, worst {:.3e}", r.failures, r.samples, r.worst)],
                json: serde_json::to_value(&r).expect("report serializes"),
            })
        }
        Experiment::Taylor { x, a, eps, .. } => {
            let report = taylor_report(*x, *a, eps)?;
            Ok(reports_outcome("taylor", &[report]))
        }
    }
}

fn catalog_outcome(named: &[NamedScene], consts: &FieldConstants, spec: &QuadratureSpec) -> Outcome {
    let rows = ampere_catalog(named, consts, spec);
    Outcome {
        kind: "ampere",
        csv: catalog_csv(&rows),
        passed: rows.iter().all(|r| r.pass),
        summary: rows
            .iter()
            .map(|r| {
                format!(
                    "{} {}: A = {:.12}, Lk = {:?}{}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.scene_id,
                    r.a,
                    r.lk,
                    r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                )
            })
            .collect(),
        json: json!(rows
            .iter()
            .map(|r| json!({
                "scene_id": r.scene_id,
                "A": numeric_json(r.a),
                "A_error": numeric_json(r.a_error),
                "Lk": r.lk,
                "abs_diff": numeric_json(r.diff),
                "A_swapped": numeric_json(r.a_swapped),
                "A_swapped_error": numeric_json(r.a_swapped_error),
                "symmetric": r.symmetric,
                "pass": r.pass,
                "error": r.error,
            }))
            .collect::<Vec<_>>()),
    }
}

/// Built-in experiments run by `selftest` and by subcommands given no scene file.
pub fn default_scene_file() -> SceneFile {
    let v = Vector3::new;
    let unit_circle = Curve::circle(Vector3::ZERO, 1.0, Vector3::Z, Orientation::Ccw).expect("valid circle");
    let square = SurfacePatch::PlanarRect {
        corner: Vector3::ZERO,
        edge_a: Vector3::X,
        edge_b: Vector3::Y,
    };
    let disk = SurfacePatch::Disk {
        center: Vector3::ZERO,
        radius: 1.0,
        axis: Vector3::Z,
    };
    let tight = QuadratureSpec::default().with_tolerances(1e-15, 1e-14);
    let probe_steps = vec![4e-3, 2e-3, 1e-3];
    let sheet_points = vec![v(0.5, 0.5, 1.0), v(1.4, -0.3, 0.7), v(0.2, 0.8, -1.1)];
    SceneFile {
        version: SCENE_FILE_VERSION,
        constants: FieldConstants::default(),
        quadrature: QuadratureSpec::default(),
        curves: BTreeMap::from([("unit_circle".to_string(), unit_circle)]),
        surfaces: BTreeMap::from([
            ("unit_square".to_string(), SurfaceEntry { patch: square, m: 16, n: 16 }),
            ("unit_disk".to_string(), SurfaceEntry { patch: disk, m: 21, n: 21 }),
        ]),
        scenes: BTreeMap::new(),
        experiments: vec![
            Experiment::SimilitudeInfinitesimal {
                base: Vector3::ZERO,
                a: Vector3::X,
                b: Vector3::Y,
                r: v(0.0, 0.0, 2.0),
                eps: vec![0.2, 0.1, 0.05, 0.025],
                h: 1e-4,
                out: None,
            },
            Experiment::SimilitudeInfinitesimal {
                base: Vector3::ZERO,
                a: Vector3::X,
                b: Vector3::Y,
                r: v(1.2, -0.7, 1.5),
                eps: vec![0.2, 0.1, 0.05, 0.025],
                h: 1e-4,
                out: None,
            },
            Experiment::SimilitudeGeneral {
                surface: "unit_square".into(),
                r: v(0.5, 0.5, 2.0),
                h: 1e-4,
                mesh_sizes: vec![8, 16, 32, 64],
                out: None,
            },
            Experiment::SimilitudeGeneral {
                surface: "unit_disk".into(),
                r: v(0.0, 0.0, 3.0),
                h: 1e-4,
                mesh_sizes: vec![8, 16, 32, 64],
                out: None,
            },
            Experiment::Curl {
                curve: "unit_circle".into(),
                points: vec![v(0.0, 0.0, 1.5), v(0.4, 0.3, 1.2), v(2.2, 0.4, 0.3)],
                steps: probe_steps.clone(),
                quadrature: Some(tight),
                out: None,
            },
            Experiment::Maxwell {
                surface: "unit_square".into(),
                sigma: 1.0,
                h: None,
                points: sheet_points.clone(),
                steps: probe_steps.clone(),
                quadrature: None,
                out: None,
            },
            Experiment::Maxwell {
                surface: "unit_square".into(),
                sigma: 1.0,
                h: Some(1e-3),
                points: sheet_points,
                steps: probe_steps,
                quadrature: None,
                out: None,
            },
            Experiment::Lemma53 {
                n: vec![2, 4, 8, 16, 32],
                out: None,
            },
            Experiment::Ampere {
                scenes: Vec::new(),
                out: None,
            },
            Experiment::Identity {
                samples: 10_000,
                seed: 20240601,
                out: None,
            },
            Experiment::Taylor {
                x: v(1.0, -0.5, 2.0),
                a: v(0.3, 0.8, -0.4),
                eps: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
                out: None,
            },
        ],
    }
}

/// Executes an experiment; an `Ampere` entry with no scenes in a file that
/// defines none runs the built-in catalog.
fn execute_or_default(file: &SceneFile, exp: &Experiment) -> Result<Outcome> {
    if let Experiment::Ampere { scenes, .. } = exp {
        if scenes.is_empty() && file.scenes.is_empty() {
            let named = default_catalog(&file.quadrature)?;
            return Ok(catalog_outcome(&named, &file.constants, &file.quadrature));
        }
    }
    execute(file, exp)
}

#[derive(Parser, Debug)]
#[command(name = "ampere", version, about = "Field, linking and similitude experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct SceneArgs {
    /// Scene file (JSON).
    #[arg(long)]
    pub scene: PathBuf,
    /// CSV output path; the JSON record goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OptionalSceneArgs {
    /// Scene file (JSON); built-in defaults when absent.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Only this scene.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Lemma53Args {
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Comma-separated loop sizes, overriding the scene file.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Field values at points.
    Field(SceneArgs),
    /// Gauss linking integral per scene.
    Link(LinkArgs),
    /// Signed crossing count per scene.
    Lk(LinkArgs),
    /// Dipole sheet against loop field convergence.
    Similitude(OptionalSceneArgs),
    /// Linking integral against crossing count over a catalog.
    Ampere(OptionalSceneArgs),
    /// Rectangle loops against the unit circle.
    Lemma53(Lemma53Args),
    /// Divergence and curl of sheet fields away from the charges.
    Maxwell(OptionalSceneArgs),
    /// Curl of the loop field.
    Curl(OptionalSceneArgs),
    /// Every experiment in a scene file.
    Run(SceneArgs),
    /// Built-in acceptance checks.
    Selftest,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// Reads `THREADS` and sizes the global rayon pool.
fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("THREADS must be a positive integer, got {raw:?}")))?;
    // a pool built earlier in this process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| dispatch(cli.command));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical error: {m}");
            EXIT_NUMERICAL
        }
    }
}

fn load_or_default(path: Option<&Path>) -> std::result::Result<SceneFile, Failure> {
    match path {
        Some(p) => Ok(SceneFile::load(p)?),
        None => Ok(default_scene_file()),
    }
}

/// Experiments of the given kinds; when the file has none, a default one
/// built by `fallback`.
fn select(file: &SceneFile, kinds: &[&str], fallback: impl FnOnce() -> Vec<Experiment>) -> Vec<Experiment> {
    let chosen: Vec<Experiment> = file
        .experiments
        .iter()
        .filter(|e| kinds.contains(&e.kind()))
        .cloned()
        .collect();
    if chosen.is_empty() {
        fallback()
    } else {
        chosen
    }
}

fn dispatch(cmd: Command) -> std::result::Result<bool, Failure> {
    match cmd {
        Command::Selftest => Ok(selftest(&mut std::io::stdout())),
        Command::Run(a) => {
            let file = SceneFile::load(&a.scene)?;
            if file.experiments.is_empty() {
                return Err(Failure::Usage(format!("{} lists no experiments", a.scene.display())));
            }
            let exps = file.experiments.clone();
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Field(a) => {
            let file = SceneFile::load(&a.scene)?;
            let exps = select(&file, &["field"], Vec::new);
            if exps.is_empty() {
                return Err(Failure::Usage(format!("{} lists no field experiments", a.scene.display())));
            }
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Link(a) => {
            let file = SceneFile::load(&a.scene)?;
            let scenes = a.id.into_iter().collect();
            run_experiments(&file, &[Experiment::Link { scenes, out: None }], a.out.as_deref())
        }
        Command::Lk(a) => {
            let file = SceneFile::load(&a.scene)?;
            let scenes = a.id.into_iter().collect();
            run_experiments(&file, &[Experiment::Lk { scenes, out: None }], a.out.as_deref())
        }
        Command::Similitude(a) => {
            let file = load_or_default(a.scene.as_deref())?;
            let defaults = default_scene_file();
            let exps = select(&file, &["similitude_infinitesimal", "similitude_general"], || {
                select(&defaults, &["similitude_infinitesimal"], Vec::new)
            });
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Ampere(a) => {
            let file = load_or_default(a.scene.as_deref())?;
            let exps = select(&file, &["ampere"], || {
                vec![Experiment::Ampere {
                    scenes: Vec::new(),
                    out: None,
                }]
            });
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Lemma53(a) => {
            let file = load_or_default(a.scene.as_deref())?;
            let exps = if a.n.is_empty() {
                select(&file, &["lemma53"], || {
                    vec![Experiment::Lemma53 {
                        n: vec![2, 4, 8, 16, 32],
                        out: None,
                    }]
                })
            } else {
                vec![Experiment::Lemma53 { n: a.n, out: None }]
            };
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Maxwell(a) => {
            let file = load_or_default(a.scene.as_deref())?;
            let exps = select(&file, &["maxwell"], Vec::new);
            if exps.is_empty() {
                return Err(Failure::Usage("scene file lists no maxwell experiments".into()));
            }
            run_experiments(&file, &exps, a.out.as_deref())
        }
        Command::Curl(a) => {
            let file = load_or_default(a.scene.as_deref())?;
            let exps = select(&file, &["curl"], Vec::new);
            if exps.is_empty() {
                return Err(Failure::Usage("scene file lists no curl experiments".into()));
            }
            run_experiments(&file, &exps, a.out.as_deref())
        }
    }
}

/// Runs the experiments in order, writing each outcome to its own `out`
/// path or to the command line `--out`, else to standard output.
fn run_experiments(
    file: &SceneFile,
    exps: &[Experiment],
    out: Option<&Path>,
) -> std::result::Result<bool, Failure> {
    let mut outcomes = Vec::new();
    for e in exps {
        let o = execute_or_default(file, e)?;
        for line in &o.summary {
            eprintln!("{line}");
        }
        if let Some(p) = e.out() {
            write_outputs(p, &o.csv, &o.json)?;
        }
        outcomes.push((e.out().is_some(), o));
    }
    let unrouted: Vec<&Outcome> = outcomes.iter().filter(|(routed, _)| !routed).map(|(_, o)| o).collect();
    if !unrouted.is_empty() {
        let csv = unrouted.iter().map(|o| o.csv.as_str()).collect::<Vec<_>>().join("\n");
        match out {
            Some(p) => {
                let json = if unrouted.len() == 1 {
                    unrouted[0].json.clone()
                } else {
                    json!(unrouted.iter().map(|o| json!({"kind": o.kind, "result": o.json})).collect::<Vec<_>>())
                };
                write_outputs(p, &csv, &json)?;
            }
            None => print!("{csv}"),
        }
    }
    Ok(outcomes.iter().all(|(_, o)| o.passed))
}

fn write_outputs(path: &Path, csv: &str, json: &serde_json::Value) -> std::result::Result<(), Failure> {
    let write = |p: &Path, text: &str| {
        std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display())))
    };
    let json_path = path.with_extension("json");
    if json_path == path {
        return Err(Failure::Usage(format!(
            "output path {} must not end in .json; the CSV goes there",
            path.display()
        )));
    }
    write(path, csv)?;
    let mut text = serde_json::to_string_pretty(json).expect("values serialize");
    text.push('\n');
    write(&json_path, &text)
}

/// Runs the built-in checks and prints one line per criterion. Returns
/// whether all passed.
pub fn selftest(out: &mut impl std::io::Write) -> bool {
    let file = default_scene_file();
    let mut all = true;
    let mut line = |label: &str, result: Result<(bool, String)>| {
        let (ok, detail) = result.unwrap_or_else(|e| (false, e.to_string()));
        all &= ok;
        let _ = writeln!(out, "{} {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    };
    let reports = |kind: &str| -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for e in file.experiments.iter().filter(|e| e.kind() == kind) {
            let o = execute(&file, e)?;
            ok &= o.passed;
            parts.extend(o.summary);
        }
        Ok((ok && !parts.is_empty(), parts.join("; ")))
    };

    line("lemma53", reports("lemma53"));
    let catalog = default_catalog(&file.quadrature).map(|named| {
        let rows = ampere_catalog(&named, &file.constants, &file.quadrature);
        let mut lks: Vec<i64> = rows.iter().filter_map(|r| r.lk).collect();
        lks.sort_unstable();
        lks.dedup();
        (rows, lks)
    });
    match catalog {
        Ok((rows, lks)) => {
            let agree = rows.iter().all(|r| r.error.is_none() && r.diff <= crate::experiments::AMPERE_TOLERANCE + r.a_error);
            let covered = [-1, 0, 1, 2].iter().all(|l| lks.contains(l));
            let worst = rows.iter().map(|r| r.diff).fold(0.0, f64::max);
            line(
                "ampere_catalog",
                Ok((agree && covered && rows.len() >= 6, format!("{} scenes, Lk values {lks:?}, max |A - Lk| = {worst:.3e}", rows.len()))),
            );
            let sym = rows.iter().all(|r| r.symmetric);
            let worst_sym = rows.iter().map(|r| (r.a - r.a_swapped).abs()).fold(0.0, f64::max);
            line("symmetry", Ok((sym, format!("max |A(C,L) - A(L,C)| = {worst_sym:.3e}"))));
        }
        Err(e) => {
            line("ampere_catalog", Err(e.clone()));
            line("symmetry", Err(e));
        }
    }
    line("similitude_infinitesimal", reports("similitude_infinitesimal"));
    line("similitude_general", reports("similitude_general"));
    line("curl_vanishing", reports("curl"));
    line("maxwell", reports("maxwell"));
    line("identity", reports("identity"));
    line("taylor", reports("taylor"));
    all
}
