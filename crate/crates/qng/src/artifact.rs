//! JSON and CSV artifacts.
//!
//! JSON artifacts wrap the full in-memory result together with
//! `schema_version` and the hash of the producing config, and re-parse
//! bit-exactly. CSV artifacts start with one `#` line naming the kind, the
//! schema version and the column order, followed by a header row; numbers are
//! written to 12 significant digits.

use std::io::{Read, Write};

use qng_core::decoherence::{BoundaryPoint, DepthResult};
use qng_core::envelope::{CriterionCurve, CriterionSurface, MinimumKind};
use qng_core::measures::CoherenceId;
use qng_core::thresholds::{ConvergenceRow, TableRow};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::certify::CertificationReport;
use crate::config::Format;
use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub id: CoherenceId,
    pub family: String,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveArtifact {
    pub curve: CriterionCurve,
    pub physical: CriterionCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceArtifact {
    pub curve: CriterionCurve,
    pub surface: CriterionSurface,
    pub physical: CriterionSurface,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub hierarchy: String,
    pub order: usize,
    pub threshold: f64,
    /// `None` when the threshold cannot be beaten at all.
    pub loss: Option<DepthResult>,
    pub thermal: Option<DepthResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySweep {
    pub hierarchy: String,
    pub order: usize,
    pub threshold: f64,
    pub points: Vec<BoundaryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthArtifact {
    pub id: CoherenceId,
    pub rows: Vec<DepthRow>,
    pub sweeps: Vec<BoundarySweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceArtifact {
    pub id: CoherenceId,
    pub rows: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    ThresholdTable(ThresholdTable),
    Curve(CurveArtifact),
    Surface(SurfaceArtifact),
    Depth(DepthArtifact),
    Convergence(ConvergenceArtifact),
    Certification(CertificationReport),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ThresholdTable(_) => "threshold_table",
            Self::Curve(_) => "curve",
            Self::Surface(_) => "surface",
            Self::Depth(_) => "depth",
            Self::Convergence(_) => "convergence",
            Self::Certification(_) => "certification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub schema_version: u32,
    pub config_hash: String,
    pub payload: Payload,
}

impl Artifact {
    pub fn new(config_hash: String, payload: Payload) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash,
            payload,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        if a.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {}",
                a.schema_version
            )));
        }
        Ok(a)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
            }
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match &self.payload {
            Payload::ThresholdTable(t) => write_rows(out, "threshold_table", &threshold_rows(t)),
            Payload::Curve(c) => write_rows(out, "curve", &curve_rows(c)),
            Payload::Surface(s) => write_rows(out, "surface", &surface_rows(s)),
            Payload::Depth(d) if d.sweeps.is_empty() => write_rows(out, "depth", &depth_rows(d)),
            Payload::Depth(d) => write_rows(out, "depth_boundary", &boundary_rows(d)),
            Payload::Convergence(c) => write_rows(out, "convergence", &convergence_rows(c)),
            Payload::Certification(r) => write_rows(out, "certification", &certification_rows(r)),
        }
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn r12(x: f64) -> f64 {
    round12(x)
}

fn columns<T: Serialize + Default>() -> Result<Vec<String>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(T::default())?;
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    let text = String::from_utf8(bytes).expect("csv output is UTF-8");
    Ok(text
        .lines()
        .next()
        .unwrap_or_default()
        .split(',')
        .map(str::to_owned)
        .collect())
}

fn write_rows<W: Write, T: Serialize + Default>(mut out: W, kind: &str, rows: &[T]) -> Result<()> {
    let cols = columns::<T>()?;
    writeln!(
        out,
        "# kind={kind} schema_version={SCHEMA_VERSION} columns={}",
        cols.join(",")
    )
    .map_err(|e| CliError::io("<csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(&cols)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

/// Parses the rows of a CSV artifact, checking its `#` line against `kind`.
pub fn read_rows<R: Read, T: DeserializeOwned>(input: R, kind: &str) -> Result<Vec<T>> {
    let mut text = String::new();
    let mut input = input;
    input
        .read_to_string(&mut text)
        .map_err(|e| CliError::io("<csv>", e))?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let expected = format!("# kind={kind} schema_version={SCHEMA_VERSION} ");
    if !first.starts_with(&expected) {
        return Err(CliError::Usage(format!(
            "not a {kind} CSV artifact: {first:?}"
        )));
    }
    csv::Reader::from_reader(rest.as_bytes())
        .deserialize()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCsvRow {
    pub m: usize,
    pub n: usize,
    pub hierarchy: String,
    pub order: usize,
    pub threshold: f64,
    pub sentinel: bool,
    pub xi_re: f64,
    pub xi_im: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub phi: f64,
    /// Space-separated Fock indices of the maximizing core subspace.
    pub subspace: String,
    pub best_start: usize,
    pub top5_spread: f64,
    pub validation_margin: f64,
    pub subspaces_evaluated: usize,
    pub subspaces_total: usize,
    pub note: String,
}

pub fn threshold_rows(t: &ThresholdTable) -> Vec<ThresholdCsvRow> {
    t.rows
        .iter()
        .map(|row| {
            let r = &row.result;
            let d = &r.diagnostics;
            let mut out = ThresholdCsvRow {
                m: t.id.m(),
                n: t.id.n(),
                hierarchy: row.spec.to_string(),
                order: row.order,
                threshold: r12(r.value),
                sentinel: r.is_sentinel(),
                best_start: d.best_start,
                top5_spread: r12(d.top5_spread),
                validation_margin: r12(d.validation_margin),
                subspaces_evaluated: d.subspaces_evaluated,
                subspaces_total: d.subspaces_total,
                note: d.note.clone().unwrap_or_default(),
                ..Default::default()
            };
            if let Some(a) = &r.argmax {
                out.xi_re = r12(a.params.xi.re);
                out.xi_im = r12(a.params.xi.im);
                out.alpha_re = r12(a.params.alpha.re);
                out.alpha_im = r12(a.params.alpha.im);
                out.phi = r12(a.phi);
                out.subspace = a
                    .subspace
                    .indices()
                    .iter()
                    .map(usize::to_string)
                    .collect::<Vec<_>>()
                    .join(" ");
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveCsvRow {
    pub p: f64,
    pub c_threshold: f64,
    pub raw: f64,
    pub lambda: f64,
    pub absolute: f64,
    pub physical: f64,
}

pub fn curve_rows(c: &CurveArtifact) -> Vec<CurveCsvRow> {
    c.curve
        .points
        .iter()
        .map(|pt| CurveCsvRow {
            p: r12(pt.p),
            c_threshold: r12(pt.c_threshold),
            raw: r12(pt.raw),
            lambda: r12(pt.lambda),
            absolute: r12(c.curve.absolute),
            physical: r12(c.physical.threshold_at(pt.p)),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCsvRow {
    pub pn: f64,
    pub pe: f64,
    pub c_threshold: f64,
    pub raw: f64,
    pub lambda1: f64,
    pub minimum: String,
    /// Single-probability curve at `pn`, ignoring `pe`.
    pub curve: f64,
    pub physical: f64,
}

fn minimum_name(k: MinimumKind) -> &'static str {
    match k {
        MinimumKind::Stationary => "stationary",
        MinimumKind::Crossing => "crossing",
        MinimumKind::Physical => "physical",
    }
}

pub fn surface_rows(s: &SurfaceArtifact) -> Vec<SurfaceCsvRow> {
    s.surface
        .points
        .iter()
        .map(|pt| SurfaceCsvRow {
            pn: r12(pt.pn),
            pe: r12(pt.pe),
            c_threshold: r12(pt.c_threshold),
            raw: r12(pt.raw),
            lambda1: r12(pt.lambda1),
            minimum: minimum_name(pt.minimum).to_owned(),
            curve: r12(s.curve.threshold_at(pt.pn)),
            physical: r12(s.physical.threshold_at(pt.pn, pt.pe)),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DepthCsvRow {
    pub m: usize,
    pub n: usize,
    pub hierarchy: String,
    pub order: usize,
    pub threshold: f64,
    pub loss_depth: Option<f64>,
    pub loss_saturated: bool,
    pub thermal_depth: Option<f64>,
    pub thermal_saturated: bool,
}

pub fn depth_rows(d: &DepthArtifact) -> Vec<DepthCsvRow> {
    d.rows
        .iter()
        .map(|r| DepthCsvRow {
            m: d.id.m(),
            n: d.id.n(),
            hierarchy: r.hierarchy.clone(),
            order: r.order,
            threshold: r12(r.threshold),
            loss_depth: r.loss.map(|x| r12(x.value)),
            loss_saturated: r.loss.is_some_and(|x| x.saturated),
            thermal_depth: r.thermal.map(|x| r12(x.value)),
            thermal_saturated: r.thermal.is_some_and(|x| x.saturated),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCsvRow {
    pub hierarchy: String,
    pub order: usize,
    pub threshold: f64,
    pub nbar: f64,
    /// Empty when thermal noise alone already defeats the threshold.
    pub max_loss: Option<f64>,
    pub saturated: bool,
}

pub fn boundary_rows(d: &DepthArtifact) -> Vec<BoundaryCsvRow> {
    d.sweeps
        .iter()
        .flat_map(|s| {
            s.points.iter().map(move |p| BoundaryCsvRow {
                hierarchy: s.hierarchy.clone(),
                order: s.order,
                threshold: r12(s.threshold),
                nbar: r12(p.nbar),
                max_loss: p.max_loss.map(r12),
                saturated: p.saturated,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCsvRow {
    pub m: usize,
    pub n: usize,
    pub n_max: usize,
    pub excluded: usize,
    pub one_minus_t: f64,
    pub raw_one_minus_t: f64,
}

pub fn convergence_rows(c: &ConvergenceArtifact) -> Vec<ConvergenceCsvRow> {
    c.rows
        .iter()
        .map(|r| ConvergenceCsvRow {
            m: c.id.m(),
            n: c.id.n(),
            n_max: r.n_max,
            excluded: r.excluded,
            one_minus_t: r12(r.one_minus_t),
            raw_one_minus_t: r12(r.raw_one_minus_t),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationCsvRow {
    pub hierarchy: String,
    pub order: usize,
    pub criterion: String,
    pub threshold: f64,
    pub measured: f64,
    pub pass: bool,
    pub margin: f64,
}

pub fn certification_rows(r: &CertificationReport) -> Vec<CertificationCsvRow> {
    r.verdicts
        .iter()
        .map(|v| CertificationCsvRow {
            hierarchy: v.hierarchy.clone(),
            order: v.order,
            criterion: v.criterion.to_string(),
            threshold: r12(v.threshold),
            measured: r12(r.measured.c),
            pass: v.pass,
            margin: r12(v.margin),
        })
        .collect()
}
