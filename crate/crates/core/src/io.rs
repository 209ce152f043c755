//! Versioned JSON artifacts and CSV dumps.
//!
//! Every top-level document carries `"schema": 1`; readers refuse other
//! versions. Floats are written with 17 significant digits in exponent form
//! so that identical inputs give byte-identical files.

use std::fmt::Write as _;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gcmgeom::{AngularMomentum, GcmInput, GcmSolution};
use crate::modes::{ModeBasis, Provenance};
use crate::moebius::{Diffeo, MoebiusMap, Rotation3};
use crate::s2field::{make_grid, ConformalMetric, GridSpec, OneForm, ScalarField};
use crate::stability::{CalibratedReport, CalibrationFrame, MapFactor, SphereMap, StabilityReport};
use crate::uniformize::{CenteringSolve, Diagnostics, UniformizationResult};

/// The only schema version written and accepted.
pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Deterministic printing

/// Serializes `value` with two-space indentation, numeric arrays on one line
/// and every non-integer number printed as `{:.16e}`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if n.is_f64() {
        let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
    } else {
        let _ = write!(out, "{n}");
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn is_flat_array(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| is_scalar(x) || matches!(x, Value::Array(b) if b.iter().all(is_scalar))),
        _ => false,
    }
}

fn write_inline(out: &mut String, v: &Value) {
    match v {
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(out, x);
            }
            out.push(']');
        }
        Value::Number(n) => write_number(out, n),
        other => out.push_str(&other.to_string()),
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 2);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
        Value::Array(a) if !a.is_empty() && !is_flat_array(v) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        other => write_inline(out, other),
    }
}

/// Parses a versioned document into `T`.
///
/// # Errors
/// [`Error::Format`] with line/column (and field name, where serde reports
/// one) for malformed input, a missing `schema` or an unknown version.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Versioned {
        schema: Option<u32>,
    }
    let head: Versioned = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    match head.schema {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(Error::Format(format!("unsupported schema version {v} (expected {SCHEMA_VERSION})"))),
        None => return Err(Error::Format("missing field `schema`".into())),
    }
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

// ---------------------------------------------------------------------------
// Building blocks

/// A scalar field on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    #[serde(rename = "L")]
    pub band_limit: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub values: Vec<f64>,
}

fn check_grid(band_limit: usize, n_theta: usize, n_phi: usize) -> Result<GridSpec> {
    let grid = make_grid(band_limit)?;
    if grid.n_theta() != n_theta || grid.n_phi() != n_phi {
        return Err(Error::Format(format!(
            "grid ({n_theta} x {n_phi}) does not match band limit {band_limit} ({} x {})",
            grid.n_theta(),
            grid.n_phi()
        )));
    }
    Ok(grid)
}

impl FieldJson {
    pub fn from_field(f: &ScalarField) -> Self {
        let g = f.grid();
        Self { band_limit: g.band_limit(), n_theta: g.n_theta(), n_phi: g.n_phi(), values: f.values().to_vec() }
    }

    /// # Errors
    /// Grid mismatch or non-finite values.
    pub fn to_field(&self) -> Result<ScalarField> {
        let grid = check_grid(self.band_limit, self.n_theta, self.n_phi)?;
        ScalarField::new(&grid, self.values.clone())
    }
}

/// Möbius matrix as `[[re, im]; 4]` in the order a, b, c, d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoebiusJson {
    pub matrix: [[f64; 2]; 4],
    pub conjugate: bool,
}

impl MoebiusJson {
    pub fn from_map(m: &MoebiusMap) -> Self {
        let e = m.entries();
        Self { matrix: e.map(|c| [c.re, c.im]), conjugate: m.is_conjugate() }
    }

    /// # Errors
    /// [`Error::Domain`] when the matrix is not unimodular.
    pub fn to_map(&self) -> Result<MoebiusMap> {
        let [a, b, c, d] = self.matrix.map(|[re, im]| Complex64::new(re, im));
        MoebiusMap::new(a, b, c, d, self.conjugate)
    }
}

/// Rotation matrix, 9 reals in row-major order.
pub fn rotation_to_json(r: &Rotation3) -> [f64; 9] {
    r.to_row_major()
}

/// Named analytic diffeomorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DiffeoJson {
    Rotation { matrix: [f64; 9] },
    Moebius { matrix: [[f64; 2]; 4], conjugate: bool },
    Twist { amplitude: f64 },
}

impl DiffeoJson {
    pub fn from_diffeo(d: &Diffeo) -> Self {
        match d {
            Diffeo::Rotation(r) => DiffeoJson::Rotation { matrix: r.to_row_major() },
            Diffeo::Moebius(m) => {
                let j = MoebiusJson::from_map(m);
                DiffeoJson::Moebius { matrix: j.matrix, conjugate: j.conjugate }
            }
            Diffeo::Twist { amplitude } => DiffeoJson::Twist { amplitude: *amplitude },
        }
    }

    /// # Errors
    /// Invalid rotation or Möbius matrices.
    pub fn to_diffeo(&self) -> Result<Diffeo> {
        Ok(match self {
            DiffeoJson::Rotation { matrix } => Diffeo::Rotation(Rotation3::from_row_major(*matrix)?),
            DiffeoJson::Moebius { matrix, conjugate } => {
                Diffeo::Moebius(MoebiusJson { matrix: *matrix, conjugate: *conjugate }.to_map()?)
            }
            DiffeoJson::Twist { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::Domain("twist amplitude must be finite".into()));
                }
                Diffeo::Twist { amplitude: *amplitude }
            }
        })
    }
}

/// A sphere map: exact composition (outermost factor first) or node samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SphereMapJson {
    Composition {
        factors: Vec<DiffeoJson>,
    },
    Sampled {
        #[serde(rename = "L")]
        band_limit: usize,
        images: Vec<[f64; 3]>,
    },
}

impl SphereMapJson {
    pub fn from_map(m: &SphereMap) -> Self {
        match m {
            SphereMap::Composition(f) => SphereMapJson::Composition {
                factors: f
                    .iter()
                    .map(|x| match x {
                        MapFactor::Moebius(mm) => DiffeoJson::from_diffeo(&Diffeo::Moebius(*mm)),
                        MapFactor::Diffeo(d) => DiffeoJson::from_diffeo(d),
                    })
                    .collect(),
            },
            SphereMap::Sampled { grid, images } => SphereMapJson::Sampled {
                band_limit: grid.band_limit(),
                images: images.iter().map(|p| [p.x, p.y, p.z]).collect(),
            },
        }
    }

    /// # Errors
    /// Invalid factors or samples.
    pub fn to_map(&self) -> Result<SphereMap> {
        match self {
            SphereMapJson::Composition { factors } => Ok(SphereMap::Composition(
                factors
                    .iter()
                    .map(|f| {
                        f.to_diffeo().map(|d| match d {
                            Diffeo::Moebius(m) => MapFactor::Moebius(m),
                            other => MapFactor::Diffeo(other),
                        })
                    })
                    .collect::<Result<_>>()?,
            )),
            SphereMapJson::Sampled { band_limit, images } => {
                let grid = make_grid(*band_limit)?;
                SphereMap::sampled(&grid, images.iter().map(|p| Vector3::from(*p)).collect())
            }
        }
    }
}

/// A conformal metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricJson {
    pub radius: f64,
    pub w: FieldJson,
    pub precompose: Option<DiffeoJson>,
}

impl MetricJson {
    pub fn from_metric(g: &ConformalMetric) -> Self {
        Self {
            radius: g.radius(),
            w: FieldJson::from_field(g.conformal_factor()),
            precompose: g.precompose().map(DiffeoJson::from_diffeo),
        }
    }

    /// # Errors
    /// Invalid fields, radius or precompose.
    pub fn to_metric(&self) -> Result<ConformalMetric> {
        let pre = self.precompose.as_ref().map(DiffeoJson::to_diffeo).transpose()?;
        ConformalMetric::new(self.radius, self.w.to_field()?, pre)
    }
}

/// A 1-form in unit-frame components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneFormJson {
    #[serde(rename = "L")]
    pub band_limit: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub b_theta: Vec<f64>,
    pub b_phi: Vec<f64>,
}

impl OneFormJson {
    pub fn from_form(b: &OneForm) -> Self {
        let g = b.grid();
        Self {
            band_limit: g.band_limit(),
            n_theta: g.n_theta(),
            n_phi: g.n_phi(),
            b_theta: b.b_theta().to_vec(),
            b_phi: b.b_phi().to_vec(),
        }
    }

    /// # Errors
    /// Grid mismatch or non-finite values.
    pub fn to_form(&self) -> Result<OneForm> {
        let grid = check_grid(self.band_limit, self.n_theta, self.n_phi)?;
        OneForm::new(&grid, self.b_theta.clone(), self.b_phi.clone())
    }
}

// ---------------------------------------------------------------------------
// Top-level documents

/// A bare field document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub schema: u32,
    #[serde(flatten)]
    pub field: FieldJson,
}

impl FieldDoc {
    pub fn new(f: &ScalarField) -> Self {
        Self { schema: SCHEMA_VERSION, field: FieldJson::from_field(f) }
    }
}

/// A metric document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDoc {
    pub schema: u32,
    #[serde(flatten)]
    pub metric: MetricJson,
}

impl MetricDoc {
    pub fn new(g: &ConformalMetric) -> Self {
        Self { schema: SCHEMA_VERSION, metric: MetricJson::from_metric(g) }
    }
}

/// A bare sphere-map document (the identification Ψ of `compare`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub schema: u32,
    pub map: SphereMapJson,
}

impl MapDoc {
    pub fn new(m: &SphereMap) -> Self {
        Self { schema: SCHEMA_VERSION, map: SphereMapJson::from_map(m) }
    }
}

/// A uniformization result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema: u32,
    /// The full uniformizing map phi = precompose⁻¹ ∘ M.
    pub phi: SphereMapJson,
    /// The Möbius factor M.
    pub moebius: MoebiusJson,
    pub precompose: Option<DiffeoJson>,
    pub radius: f64,
    pub u: FieldJson,
    pub residual: f64,
    pub cm_norm: f64,
    pub newton_iters: usize,
    pub krylov_iters: usize,
    pub centering_iters: usize,
    pub pre_iterations: usize,
    pub metric_identity_error: f64,
    pub epsilon: f64,
    pub residual_history: Vec<f64>,
}

impl ResultDoc {
    pub fn new(r: &UniformizationResult) -> Self {
        let d = &r.diagnostics;
        Self {
            schema: SCHEMA_VERSION,
            phi: SphereMapJson::from_map(&r.phi),
            moebius: MoebiusJson::from_map(&r.moebius),
            precompose: r.precompose.as_ref().map(DiffeoJson::from_diffeo),
            radius: r.radius,
            u: FieldJson::from_field(&r.u),
            residual: d.residual,
            cm_norm: d.cm_norm,
            newton_iters: d.newton_iters,
            krylov_iters: d.krylov_iters,
            centering_iters: d.centering_iters,
            pre_iterations: d.pre_iterations,
            metric_identity_error: d.metric_identity_error,
            epsilon: d.epsilon,
            residual_history: d.residual_history.clone(),
        }
    }

    /// Rebuilds the result (phi is recomputed from M and the precompose).
    ///
    /// # Errors
    /// Invalid parts.
    pub fn to_result(&self) -> Result<UniformizationResult> {
        if !(self.radius > 0.0) {
            return Err(Error::Format(format!("radius {} must be positive", self.radius)));
        }
        let diagnostics = Diagnostics {
            residual: self.residual,
            cm_norm: self.cm_norm,
            metric_identity_error: self.metric_identity_error,
            newton_iters: self.newton_iters,
            krylov_iters: self.krylov_iters,
            centering_iters: self.centering_iters,
            pre_iterations: self.pre_iterations,
            residual_history: self.residual_history.clone(),
            epsilon: self.epsilon,
        };
        Ok(UniformizationResult::from_parts(
            self.moebius.to_map()?,
            self.precompose.as_ref().map(DiffeoJson::to_diffeo).transpose()?,
            self.u.to_field()?,
            self.radius,
            diagnostics,
        ))
    }
}

/// A centering solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringDoc {
    pub schema: u32,
    pub t: [f64; 3],
    pub map: MoebiusJson,
    pub iterations: usize,
    pub pre_iterations: usize,
    pub theta_norm: f64,
    pub trace: Vec<f64>,
    /// The centered factor u∘M + ½ log J_M.
    pub u: FieldJson,
}

impl CenteringDoc {
    pub fn new(c: &CenteringSolve, centered: &ScalarField) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            t: c.t,
            map: MoebiusJson::from_map(&c.map),
            iterations: c.iterations,
            pre_iterations: c.pre_iterations,
            theta_norm: c.theta_norm,
            trace: c.trace.clone(),
            u: FieldJson::from_field(centered),
        }
    }
}

/// Mode fields in (0, +, −) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFieldsJson {
    pub p0: FieldJson,
    pub pplus: FieldJson,
    pub pminus: FieldJson,
}

/// Projections onto the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionJson {
    pub p0: f64,
    pub pplus: f64,
    pub pminus: f64,
}

impl From<[f64; 3]> for ProjectionJson {
    fn from(t: [f64; 3]) -> Self {
        Self { p0: t[0], pplus: t[1], pminus: t[2] }
    }
}

impl From<ProjectionJson> for [f64; 3] {
    fn from(p: ProjectionJson) -> Self {
        [p.p0, p.pplus, p.pminus]
    }
}

/// A mode basis with its Gram matrix and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesDoc {
    pub schema: u32,
    pub provenance: String,
    pub modes: ModeFieldsJson,
    pub gram: [[f64; 3]; 3],
    pub zero_mean: ProjectionJson,
    pub laplacian_defect: Option<f64>,
    pub curvature_projection: Option<ProjectionJson>,
}

/// Short provenance tag of a basis.
pub fn provenance_tag(b: &ModeBasis) -> String {
    match &b.provenance {
        Provenance::Standard => "standard".into(),
        Provenance::Canonical(_) => "canonical".into(),
        Provenance::Background { name } => format!("background:{name}"),
    }
}

impl ModeFieldsJson {
    pub fn from_basis(b: &ModeBasis) -> Self {
        Self {
            p0: FieldJson::from_field(&b.fields[0]),
            pplus: FieldJson::from_field(&b.fields[1]),
            pminus: FieldJson::from_field(&b.fields[2]),
        }
    }
}

/// Pairwise comparison of two uniformized spheres; inputs are embedded so the
/// report can be re-run and calibrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareDoc {
    pub schema: u32,
    pub metric1: MetricJson,
    pub metric2: MetricJson,
    pub psi: SphereMapJson,
    pub distance: f64,
    pub rotation: [f64; 9],
    pub psi_hat_defect: f64,
    pub u_gap: f64,
    pub mode_gap: f64,
    #[serde(default)]
    pub calibration: Option<CalibrationJson>,
}

impl CompareDoc {
    pub fn new(g1: &ConformalMetric, psi: &SphereMap, g2: &ConformalMetric, rep: &StabilityReport) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            metric1: MetricJson::from_metric(g1),
            metric2: MetricJson::from_metric(g2),
            psi: SphereMapJson::from_map(psi),
            distance: rep.distance,
            rotation: rep.rotation.to_row_major(),
            psi_hat_defect: rep.psi_hat_defect,
            u_gap: rep.u_gap,
            mode_gap: rep.mode_gap,
            calibration: None,
        }
    }
}

/// Calibration section added to a comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationJson {
    pub frame: CalibrationFrame,
    pub rotation: [f64; 9],
    pub psi_hat_defect: f64,
    pub u_gap: f64,
    pub mode_gap: f64,
    pub calibration_defect: f64,
}

impl CalibrationJson {
    pub fn new(frame: &CalibrationFrame, rep: &CalibratedReport) -> Self {
        Self {
            frame: *frame,
            rotation: rep.rotation.to_row_major(),
            psi_hat_defect: rep.psi_hat_defect,
            u_gap: rep.u_gap,
            mode_gap: rep.mode_gap,
            calibration_defect: rep.calibration_defect,
        }
    }
}

/// Geometric data carried by one sphere (modes are recomputed on reading).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereDataDoc {
    pub schema: u32,
    pub metric: MetricJson,
    pub kappa: FieldJson,
    pub kappa_bar: FieldJson,
    pub beta: OneFormJson,
    pub r: f64,
    pub m: f64,
}

/// Angular-momentum report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngmomDoc {
    pub schema: u32,
    #[serde(rename = "a_S")]
    pub a_s: f64,
    #[serde(rename = "V")]
    pub v: [f64; 3],
    pub rotation: [f64; 9],
    pub rotated_pm: [f64; 2],
    pub hawking_mass: f64,
}

impl AngmomDoc {
    pub fn new(a: &AngularMomentum, hawking_mass: f64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            a_s: a.a_s,
            v: a.v,
            rotation: a.rotation.to_row_major(),
            rotated_pm: a.rotated_pm,
            hawking_mass,
        }
    }
}

/// Leading-order GCM input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcmInputDoc {
    pub schema: u32,
    pub div_beta_modes: [f64; 3],
    pub kappa_check_modes: [f64; 3],
    pub kappa_bar_check_modes: [f64; 3],
    pub r: f64,
    pub m: f64,
}

impl GcmInputDoc {
    pub fn new(g: &GcmInput) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            div_beta_modes: g.div_beta_modes,
            kappa_check_modes: g.kappa_check_modes,
            kappa_bar_check_modes: g.kappa_bar_check_modes,
            r: g.r,
            m: g.m,
        }
    }

    /// # Errors
    /// [`Error::Domain`] for r ≤ 0, m ≤ 0 or non-finite entries.
    pub fn to_input(&self) -> Result<GcmInput> {
        let g = GcmInput::new(self.div_beta_modes, self.kappa_check_modes, self.kappa_bar_check_modes, self.r, self.m);
        g.validate()?;
        Ok(g)
    }
}

/// Leading-order GCM solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcmSolutionDoc {
    pub schema: u32,
    pub lambda: [f64; 3],
    pub lambda_bar: [f64; 3],
    pub upsilon: f64,
}

impl GcmSolutionDoc {
    pub fn new(s: &GcmSolution, upsilon: f64) -> Self {
        Self { schema: SCHEMA_VERSION, lambda: s.lambda, lambda_bar: s.lambda_bar, upsilon }
    }
}

/// CSV dump: header `theta,phi,value`, one row per node.
pub fn field_to_csv(f: &ScalarField) -> String {
    let g = f.grid();
    let mut out = String::from("theta,phi,value\n");
    for (i, v) in f.values().iter().enumerate() {
        let (t, p) = g.angles(i);
        let _ = writeln!(out, "{t:.16e},{p:.16e},{v:.16e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        make_grid(8).unwrap()
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json_string(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-7], "n": 3})).unwrap();
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("[1.0000000000000000e0, -2.4999999999999999e-7]"), "{s}");
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn metric_round_trip_is_exact() {
        let g = grid();
        let w = ScalarField::from_fn(&g, |x| 0.1 * x.z + 0.03 * x.x * x.y);
        let m = ConformalMetric::new(2.0, w, Some(Diffeo::Twist { amplitude: 0.3 })).unwrap();
        let text = to_json_string(&MetricDoc::new(&m)).unwrap();
        let back: MetricDoc = from_json_str(&text).unwrap();
        assert_eq!(back.metric.to_metric().unwrap(), m);
        assert_eq!(to_json_string(&back).unwrap(), text);
    }

    #[test]
    fn schema_is_enforced() {
        let g = grid();
        let mut doc = serde_json::to_value(FieldDoc::new(&ScalarField::constant(&g, 1.0))).unwrap();
        doc["schema"] = 2.into();
        let e = from_json_str::<FieldDoc>(&doc.to_string()).unwrap_err();
        assert!(e.to_string().contains("schema version 2"));
        doc.as_object_mut().unwrap().remove("schema");
        assert!(from_json_str::<FieldDoc>(&doc.to_string()).is_err());
    }

    #[test]
    fn malformed_input_reports_position_and_field() {
        let e = from_json_str::<FieldDoc>("{\"schema\": 1,\n \"L\": 8,").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = from_json_str::<FieldDoc>("{\"schema\": 1, \"L\": 8, \"n_theta\": 9, \"n_phi\": 18}").unwrap_err();
        assert!(e.to_string().contains("values"), "{e}");
    }

    #[test]
    fn moebius_and_maps_round_trip() {
        let m = MoebiusMap::scale(&Vector3::new(0.6, 0.0, 0.8), 1.7).unwrap();
        assert_eq!(MoebiusJson::from_map(&m).to_map().unwrap(), m);
        let s = SphereMap::Composition(vec![
            MapFactor::Diffeo(Diffeo::Twist { amplitude: 0.2 }),
            MapFactor::Moebius(m),
            MapFactor::Diffeo(Diffeo::Rotation(Rotation3::conjugation())),
        ]);
        assert_eq!(SphereMapJson::from_map(&s).to_map().unwrap(), s);
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let g = grid();
        let csv = field_to_csv(&ScalarField::constant(&g, 2.0));
        assert_eq!(csv.lines().count(), g.len() + 1);
        assert!(csv.starts_with("theta,phi,value\n"));
    }
}
