//! Feature models: a transform from a gait sample to a template plus the
//! distance used to compare templates.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric::{extract_geometric, GeometricFeatureSpec, DEFAULT_FRAME_RATE};
use crate::learned::{fit_mmc_linear, fit_pcalda_linear, group_by_label, scatter_of, LinearFit, MatrixData};
use crate::linalg::{columns, regularized_inverse};
use crate::normalize::{raw_dimension, vectorize, DEFAULT_FRAMES};
use crate::sample::{Dataset, GaitSample};
use crate::skeleton::JointMask;

pub const MODEL_FORMAT: &str = "gaitlab-model";
pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_VARIANCE_KEEP: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mmc,
    Pcalda,
    Geometric,
    Raw,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mmc => "mmc",
            Method::Pcalda => "pcalda",
            Method::Geometric => "geometric",
            Method::Raw => "raw",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmc" => Ok(Method::Mmc),
            "pcalda" | "pca+lda" => Ok(Method::Pcalda),
            "geometric" => Ok(Method::Geometric),
            "raw" => Ok(Method::Raw),
            other => Err(Error::Parameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Distance between templates.
pub trait Distance: Sync {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Distance for Euclidean {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

/// `sqrt((a-b)^T P (a-b))` for a symmetric positive-definite precision `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mahalanobis {
    precision: DMatrix<f64>,
}

impl Mahalanobis {
    pub fn new(precision: DMatrix<f64>) -> Result<Self> {
        if precision.nrows() != precision.ncols() {
            return Err(Error::Shape {
                expected: precision.nrows(),
                found: precision.ncols(),
            });
        }
        if precision.clone().cholesky().is_none() {
            return Err(Error::Parameter("precision matrix is not positive definite".into()));
        }
        Ok(Mahalanobis { precision })
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
}

impl Distance for Mahalanobis {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = a.len();
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        let mut q = 0.0;
        for i in 0..n {
            let row: f64 = d.iter().enumerate().map(|(j, dj)| self.precision[(i, j)] * dj).sum();
            q += d[i] * row;
        }
        q.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean,
    Mahalanobis(Mahalanobis),
}

impl Distance for Metric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => Euclidean.distance(a, b),
            Metric::Mahalanobis(m) => m.distance(a, b),
        }
    }
}

/// A feature vector in a model's feature space, optionally labelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitTemplate {
    pub features: Vec<f64>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningSummary {
    pub classes: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub frames: usize,
    pub mask: JointMask,
    pub variance_keep: f64,
    pub frame_rate: f64,
    pub geometric: Option<GeometricFeatureSpec>,
    /// Use the Mahalanobis metric for geometric and raw models.
    pub mahalanobis_for_unlearned: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            frames: DEFAULT_FRAMES,
            mask: JointMask::full(),
            variance_keep: DEFAULT_VARIANCE_KEEP,
            frame_rate: DEFAULT_FRAME_RATE,
            geometric: None,
            mahalanobis_for_unlearned: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    method: Method,
    frames: usize,
    mask: JointMask,
    frame_rate: f64,
    projection: Option<DMatrix<f64>>,
    eigenvalues: Vec<f64>,
    metric: Metric,
    geometric: Option<GeometricFeatureSpec>,
    learning: Option<LearningSummary>,
}

impl FeatureModel {
    /// Identity transform on raw vectors with the Euclidean metric.
    pub fn raw(mask: JointMask, frames: usize) -> Self {
        FeatureModel {
            method: Method::Raw,
            frames,
            mask,
            frame_rate: DEFAULT_FRAME_RATE,
            projection: None,
            eigenvalues: Vec::new(),
            metric: Metric::Euclidean,
            geometric: None,
            learning: None,
        }
    }

    pub fn geometric(spec: GeometricFeatureSpec, frame_rate: f64) -> Result<Self> {
        if spec.is_empty() {
            return Err(Error::Parameter("geometric spec has no descriptors".into()));
        }
        Ok(FeatureModel {
            method: Method::Geometric,
            frames: DEFAULT_FRAMES,
            mask: JointMask::full(),
            frame_rate,
            projection: None,
            eigenvalues: Vec::new(),
            metric: Metric::Euclidean,
            geometric: Some(spec),
            learning: None,
        })
    }

    fn from_linear(method: Method, fit: LinearFit, mask: JointMask, frames: usize) -> Result<Self> {
        Ok(FeatureModel {
            method,
            frames,
            mask,
            frame_rate: DEFAULT_FRAME_RATE,
            metric: Metric::Mahalanobis(Mahalanobis::new(fit.precision)?),
            projection: Some(fit.projection),
            eigenvalues: fit.eigenvalues,
            geometric: None,
            learning: Some(LearningSummary {
                classes: fit.classes,
                samples: fit.samples,
            }),
        })
    }

    /// Fits an MMC model directly on raw vectors laid out with `mask`/`frames`.
    pub fn fit_mmc<L: AsRef<str>>(vectors: &[Vec<f64>], labels: &[L], mask: JointMask, frames: usize) -> Result<Self> {
        Self::from_linear(Method::Mmc, fit_mmc_linear(vectors, labels)?, mask, frames)
    }

    pub fn fit_pcalda<L: AsRef<str>>(
        vectors: &[Vec<f64>],
        labels: &[L],
        variance_keep: f64,
        mask: JointMask,
        frames: usize,
    ) -> Result<Self> {
        Self::from_linear(
            Method::Pcalda,
            fit_pcalda_linear(vectors, labels, variance_keep)?,
            mask,
            frames,
        )
    }

    /// Fits (or builds) a model of the given method on a learning dataset.
    pub fn fit(method: Method, learning: &Dataset, opts: &FitOptions) -> Result<Self> {
        let mut model = match method {
            Method::Raw => FeatureModel::raw(opts.mask.clone(), opts.frames),
            Method::Geometric => {
                let spec = opts
                    .geometric
                    .clone()
                    .ok_or_else(|| Error::Configuration("geometric method needs a feature spec".into()))?;
                FeatureModel::geometric(spec, opts.frame_rate)?
            }
            Method::Mmc | Method::Pcalda => {
                let vectors = raw_vectors(learning, &opts.mask, opts.frames)?;
                let labels = learning.labels();
                if method == Method::Mmc {
                    FeatureModel::fit_mmc(&vectors, &labels, opts.mask.clone(), opts.frames)?
                } else {
                    FeatureModel::fit_pcalda(&vectors, &labels, opts.variance_keep, opts.mask.clone(), opts.frames)?
                }
            }
        };
        model.frame_rate = opts.frame_rate;
        if opts.mahalanobis_for_unlearned && matches!(method, Method::Raw | Method::Geometric) {
            model.learn_unlearned_metric(learning)?;
        }
        Ok(model)
    }

    fn learn_unlearned_metric(&mut self, learning: &Dataset) -> Result<()> {
        let vectors: Vec<Vec<f64>> = self.templates(learning)?.into_iter().map(|t| t.features).collect();
        let (_, members) = group_by_label(&learning.labels());
        let (_, _, _, within) = scatter_of(&columns(&vectors), &members);
        let precision = regularized_inverse(&within)
            .ok_or_else(|| Error::DegenerateModel("within-class covariance is not invertible".into()))?;
        self.metric = Metric::Mahalanobis(Mahalanobis::new(precision)?);
        Ok(())
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn mask(&self) -> &JointMask {
        &self.mask
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn projection(&self) -> Option<&DMatrix<f64>> {
        self.projection.as_ref()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn geometric_spec(&self) -> Option<&GeometricFeatureSpec> {
        self.geometric.as_ref()
    }

    pub fn learning(&self) -> Option<LearningSummary> {
        self.learning
    }

    /// Raw input dimension (`3 * |mask| * T`).
    pub fn input_dim(&self) -> usize {
        raw_dimension(&self.mask, self.frames)
    }

    pub fn output_dim(&self) -> usize {
        match (&self.projection, &self.geometric) {
            (Some(p), _) => p.nrows(),
            (None, Some(g)) => g.len(),
            (None, None) => self.input_dim(),
        }
    }

    /// Maps a raw vector into the feature space.
    ///
    /// Geometric models need the time base of the original cycle and so
    /// only accept samples; see [`FeatureModel::template`].
    pub fn project(&self, raw: &[f64], label: Option<&str>) -> Result<GaitTemplate> {
        if raw.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                found: raw.len(),
            });
        }
        let features = match (&self.projection, self.method) {
            (Some(p), _) => {
                let mut out = vec![0.0; p.nrows()];
                for (r, o) in out.iter_mut().enumerate() {
                    *o = p.row(r).iter().zip(raw).map(|(w, x)| w * x).sum();
                }
                out
            }
            (None, Method::Geometric) => {
                return Err(Error::Parameter(
                    "geometric models extract features from samples, not raw vectors".into(),
                ))
            }
            (None, _) => raw.to_vec(),
        };
        Ok(GaitTemplate {
            features,
            label: label.map(str::to_string),
        })
    }

    /// Template of one gait sample, labelled with the sample's identity.
    pub fn template(&self, sample: &GaitSample) -> Result<GaitTemplate> {
        match &self.geometric {
            Some(spec) => Ok(GaitTemplate {
                features: extract_geometric(sample, spec, Some(self.frame_rate))?,
                label: Some(sample.label().to_string()),
            }),
            None => {
                let raw = vectorize(sample, &self.mask, self.frames)?;
                self.project(&raw, Some(sample.label()))
            }
        }
    }

    pub fn templates(&self, dataset: &Dataset) -> Result<Vec<GaitTemplate>> {
        dataset.samples().iter().map(|s| self.template(s)).collect()
    }

    pub fn template_distance(&self, a: &GaitTemplate, b: &GaitTemplate) -> Result<f64> {
        let d = self.output_dim();
        for t in [a, b] {
            if t.features.len() != d {
                return Err(Error::Shape {
                    expected: d,
                    found: t.features.len(),
                });
            }
        }
        Ok(self.metric.distance(&a.features, &b.features))
    }

    /// Linear map `L^T` with `P = L L^T`, so Euclidean distances of whitened
    /// templates equal model distances.
    pub fn whitener(&self) -> DMatrix<f64> {
        match &self.metric {
            Metric::Euclidean => DMatrix::identity(self.output_dim(), self.output_dim()),
            Metric::Mahalanobis(m) => m
                .precision
                .clone()
                .cholesky()
                .expect("precision is positive definite")
                .l()
                .transpose(),
        }
    }

    pub fn whiten(&self, features: &[f64]) -> Vec<f64> {
        match &self.metric {
            Metric::Euclidean => features.to_vec(),
            Metric::Mahalanobis(_) => {
                let w = self.whitener();
                (w * DVector::from_column_slice(features)).iter().copied().collect()
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_json()?).map_err(|e| Error::io_at(path.as_ref(), e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path.as_ref()).map_err(|e| Error::io_at(path.as_ref(), e))?)
    }
}

impl Distance for FeatureModel {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.metric.distance(a, b)
    }
}

pub fn raw_vectors(dataset: &Dataset, mask: &JointMask, frames: usize) -> Result<Vec<Vec<f64>>> {
    dataset.samples().iter().map(|s| vectorize(s, mask, frames)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MetricKind {
    Euclidean,
    Mahalanobis,
}

/// On-disk JSON document for a model.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    method: Method,
    frames: usize,
    mask: Vec<usize>,
    frame_rate: f64,
    input_dim: usize,
    output_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    eigenvalues: Vec<f64>,
    metric: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    geometric_spec: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    learning: Option<LearningSummary>,
}

impl From<&FeatureModel> for ModelFile {
    fn from(m: &FeatureModel) -> Self {
        let (metric, precision) = match &m.metric {
            Metric::Euclidean => (MetricKind::Euclidean, None),
            Metric::Mahalanobis(p) => (MetricKind::Mahalanobis, Some(MatrixData::from(&p.precision))),
        };
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            method: m.method,
            frames: m.frames,
            mask: m.mask.indices().to_vec(),
            frame_rate: m.frame_rate,
            input_dim: m.input_dim(),
            output_dim: m.output_dim(),
            projection: m.projection.as_ref().map(MatrixData::from),
            eigenvalues: m.eigenvalues.clone(),
            metric,
            precision,
            geometric_spec: m
                .geometric
                .as_ref()
                .map(|g| g.descriptors.iter().map(|d| d.to_string()).collect()),
            learning: m.learning,
        }
    }
}

impl TryFrom<ModelFile> for FeatureModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format != MODEL_FORMAT {
            return Err(Error::Parameter(format!("not a model file (format `{}`)", f.format)));
        }
        if f.version != MODEL_VERSION {
            return Err(Error::Parameter(format!("unsupported model version {}", f.version)));
        }
        let metric = match (f.metric, f.precision) {
            (MetricKind::Euclidean, _) => Metric::Euclidean,
            (MetricKind::Mahalanobis, Some(p)) => Metric::Mahalanobis(Mahalanobis::new(p.try_into()?)?),
            (MetricKind::Mahalanobis, None) => {
                return Err(Error::Parameter("mahalanobis model without precision matrix".into()))
            }
        };
        let geometric = f
            .geometric_spec
            .map(|lines| GeometricFeatureSpec::parse(&lines.join("\n")))
            .transpose()?;
        let model = FeatureModel {
            method: f.method,
            frames: f.frames,
            mask: JointMask::new(f.mask)?,
            frame_rate: f.frame_rate,
            projection: f.projection.map(DMatrix::try_from).transpose()?,
            eigenvalues: f.eigenvalues,
            metric,
            geometric,
            learning: f.learning,
        };
        if let Some(p) = &model.projection {
            if p.ncols() != model.input_dim() {
                return Err(Error::Shape {
                    expected: model.input_dim(),
                    found: p.ncols(),
                });
            }
        }
        if model.output_dim() != f.output_dim {
            return Err(Error::Shape {
                expected: f.output_dim,
                found: model.output_dim(),
            });
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_and_diagonal_mahalanobis() {
        let raw = FeatureModel::raw(JointMask::new(vec![0]).unwrap(), 2);
        let a = GaitTemplate {
            features: vec![0.0; 6],
            label: None,
        };
        let mut b = a.clone();
        b.features[0] = 3.0;
        b.features[1] = 4.0;
        assert_eq!(raw.template_distance(&a, &b).unwrap(), 5.0);
        assert_eq!(raw.template_distance(&a, &a).unwrap(), 0.0);
        let short = GaitTemplate {
            features: vec![0.0; 2],
            label: None,
        };
        assert!(matches!(raw.template_distance(&a, &short), Err(Error::Shape { .. })));

        let m = Mahalanobis::new(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((m.distance(&[0.0, 0.0], &[1.0, 1.0]) - 5f64.sqrt()).abs() < 1e-15);
        assert!(Mahalanobis::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }

    #[test]
    fn raw_model_projection_is_identity() {
        let raw = FeatureModel::raw(JointMask::new(vec![0, 1]).unwrap(), 2);
        let v: Vec<f64> = (0..12).map(f64::from).collect();
        assert_eq!(raw.project(&v, None).unwrap().features, v);
        assert!(matches!(raw.project(&v[..3], None), Err(Error::Shape { expected: 12, found: 3 })));
    }

    #[test]
    fn linear_projection_of_zero_is_zero() {
        let v = vec![vec![0.0, 1.0, 0.0], vec![0.5, 1.2, 0.1], vec![4.0, 0.0, 1.0], vec![4.5, 0.1, 1.3]];
        let mask = JointMask::new(vec![0]).unwrap();
        let m = FeatureModel::fit_mmc(&v, &["a", "a", "b", "b"], mask, 1).unwrap();
        let t = m.project(&[0.0; 3], None).unwrap();
        assert!(t.features.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn model_file_roundtrip() {
        let v = vec![vec![0.0, 1.0, 0.0], vec![0.5, 1.2, 0.1], vec![4.0, 0.0, 1.0], vec![4.5, 0.1, 1.3]];
        let mask = JointMask::new(vec![5]).unwrap();
        let m = FeatureModel::fit_mmc(&v, &["a", "a", "b", "b"], mask, 1).unwrap();
        let back = FeatureModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);

        let g = FeatureModel::geometric(crate::geometric::preset_lower_body(), 100.0).unwrap();
        assert_eq!(FeatureModel::from_json(&g.to_json().unwrap()).unwrap(), g);
        assert!(FeatureModel::from_json("{\"format\":\"other\"}").is_err());
    }
}
