//! On-disk model files.
//!
//! A model file is a JSON document
//!
//! ```text
//! { "format_version": 1, "kind": "...", "payload": {...}, "metadata": {...} }
//! ```
//!
//! with every floating-point number written as 17 significant digits, so a
//! read followed by a write reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::hypermodel::{Condition, HyperModel, TargetKind, FEATURE_ORDERING};
use crate::numeric::Matrix;
use crate::pipeline::{GeneratedModel, Provenance};
use crate::regressors::Regressor;
use crate::ssm::{DeformableModel, Shape};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformableRecord {
    pub landmark_dim: usize,
    pub components: usize,
    pub mean: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
    /// `landmark_dim × components`, column-major.
    pub basis: Vec<f64>,
}

impl From<&DeformableModel> for DeformableRecord {
    fn from(m: &DeformableModel) -> Self {
        DeformableRecord {
            landmark_dim: m.landmark_dim(),
            components: m.components(),
            mean: m.mean().to_vec(),
            eigenvalues: m.eigenvalues().to_vec(),
            total_variance: m.total_variance(),
            basis: m.basis().to_column_major(),
        }
    }
}

impl TryFrom<DeformableRecord> for DeformableModel {
    type Error = Error;

    fn try_from(r: DeformableRecord) -> Result<Self> {
        if r.mean.len() != r.landmark_dim {
            return Err(Error::DimensionMismatch {
                what: "stored mean shape",
                expected: r.landmark_dim,
                found: r.mean.len(),
            });
        }
        let basis = Matrix::from_column_major(r.landmark_dim, r.components, &r.basis)?;
        DeformableModel::from_parts(r.mean, basis, r.eigenvalues, r.total_variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperModelRecord {
    pub degree: usize,
    pub condition_dim: usize,
    pub target_kind: TargetKind,
    pub feature_ordering: String,
    pub feature_mean: Vec<f64>,
    pub feature_scale: Vec<f64>,
    pub per_output: Vec<Vec<f64>>,
    pub r2_per_output: Vec<f64>,
    pub r2_mean: f64,
}

impl From<&HyperModel> for HyperModelRecord {
    fn from(h: &HyperModel) -> Self {
        HyperModelRecord {
            degree: h.degree(),
            condition_dim: h.condition_dim(),
            target_kind: h.target_kind(),
            feature_ordering: FEATURE_ORDERING.to_string(),
            feature_mean: h.feature_mean().to_vec(),
            feature_scale: h.feature_scale().to_vec(),
            per_output: h.per_output().to_vec(),
            r2_per_output: h.r2_per_output().to_vec(),
            r2_mean: h.r2_mean(),
        }
    }
}

impl TryFrom<HyperModelRecord> for HyperModel {
    type Error = Error;

    fn try_from(r: HyperModelRecord) -> Result<Self> {
        if r.feature_ordering != FEATURE_ORDERING {
            return Err(Error::invalid(format!(
                "unknown feature ordering {:?}",
                r.feature_ordering
            )));
        }
        HyperModel::from_parts(
            r.degree,
            r.condition_dim,
            r.target_kind,
            r.feature_mean,
            r.feature_scale,
            r.per_output,
            r.r2_per_output,
            r.r2_mean,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedRecord {
    pub regressor: Regressor,
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    pub provenance: Provenance,
}

impl From<&GeneratedModel> for GeneratedRecord {
    fn from(g: &GeneratedModel) -> Self {
        GeneratedRecord {
            regressor: g.regressor.clone(),
            condition: g.condition.clone(),
            inputs: g.inputs.clone(),
            shape: g.shape.clone(),
            provenance: g.provenance.clone(),
        }
    }
}

impl From<GeneratedRecord> for GeneratedModel {
    fn from(r: GeneratedRecord) -> Self {
        GeneratedModel {
            regressor: r.regressor,
            condition: r.condition,
            inputs: r.inputs,
            shape: r.shape,
            provenance: r.provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum Payload {
    Regressor(Regressor),
    Deformable(DeformableRecord),
    Hypermodel(HyperModelRecord),
    Generated(GeneratedRecord),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Regressor(_) => "regressor",
            Payload::Deformable(_) => "deformable",
            Payload::Hypermodel(_) => "hypermodel",
            Payload::Generated(_) => "generated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub created_at: String,
    pub tool_version: String,
    /// Task identifier, for source regressors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_id: Option<String>,
    /// Task condition, for source regressors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, serde_json::Value>,
}

impl Metadata {
    pub fn now() -> Self {
        Metadata {
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            task_id: None,
            condition: None,
            provenance: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub payload: Payload,
    pub metadata: Metadata,
}

/// Pretty JSON with floats printed at 17 significant digits.
struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

impl ModelFile {
    pub fn new(payload: Payload) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            payload,
            metadata: Metadata::now(),
        }
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
        self.serialize(&mut ser)?;
        buf.push(b'\n');
        String::from_utf8(buf).map_err(|e| Error::Numerical(format!("non-UTF-8 output: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::invalid("model file has no format_version"))?;
        if version != u64::from(FORMAT_VERSION) {
            return Err(Error::UnsupportedVersion(version.try_into().unwrap_or(u32::MAX)));
        }
        let file: ModelFile = serde_json::from_value(value)?;
        file.check()?;
        Ok(file)
    }

    /// Validates the payload invariants.
    fn check(&self) -> Result<()> {
        match &self.payload {
            Payload::Regressor(r) => r.validate(),
            Payload::Deformable(d) => DeformableModel::try_from(d.clone()).map(|_| ()),
            Payload::Hypermodel(h) => HyperModel::try_from(h.clone()).map(|_| ()),
            Payload::Generated(g) => g.regressor.validate(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
