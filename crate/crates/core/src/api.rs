//! Request and response bodies of the HTTP/JSON service.
//!
//! Paths in requests are resolved on the server's filesystem.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::gallery::DEFAULT_CALIBRATION_QUANTILE;
use crate::geometric::DEFAULT_FRAME_RATE;
use crate::harness::cluster::DEFAULT_MAX_ITER;
use crate::harness::{EvaluationReport, NoiseKind};
use crate::metrics::{ClusteringScores, PairConfusion};
use crate::model::{FitOptions, DEFAULT_VARIANCE_KEEP};
use crate::normalize::DEFAULT_FRAMES;
use crate::skeleton::JointMask;

pub const API_PREFIX: &str = "/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

/// Error body returned with every non-2xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: String,
    pub message: String,
}

/// Feature-extraction parameters shared by every request that fits a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitParams {
    pub frames: usize,
    pub variance_keep: f64,
    pub frame_rate: f64,
    /// Joint names left out of the raw vectors.
    pub exclude_joints: Vec<String>,
    /// Learn a Mahalanobis metric for raw and geometric models too.
    pub mahalanobis: bool,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            frames: DEFAULT_FRAMES,
            variance_keep: DEFAULT_VARIANCE_KEEP,
            frame_rate: DEFAULT_FRAME_RATE,
            exclude_joints: Vec::new(),
            mahalanobis: false,
        }
    }
}

impl FitParams {
    pub fn options(&self) -> crate::Result<FitOptions> {
        let mask = if self.exclude_joints.is_empty() {
            JointMask::full()
        } else {
            let idx = self
                .exclude_joints
                .iter()
                .map(|n| crate::skeleton::joint_index(n))
                .collect::<crate::Result<Vec<_>>>()?;
            JointMask::excluding(&idx)?
        };
        Ok(FitOptions {
            frames: self.frames,
            mask,
            variance_keep: self.variance_keep,
            frame_rate: self.frame_rate,
            geometric: None,
            mahalanobis_for_unlearned: self.mahalanobis,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: PathBuf,
    pub dataset_id: String,
    pub classes: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthRequest {
    pub ids: usize,
    pub per_id: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestRequest {
    pub input: PathBuf,
    pub out: PathBuf,
    /// `x`, `y` or `z`: the axis pointing up in the input.
    #[serde(default = "default_vertical")]
    pub vertical: String,
    /// Position/heading normalization of every sample.
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn default_vertical() -> String {
    "y".into()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptRequest {
    pub data: PathBuf,
    pub out: PathBuf,
    pub kind: NoiseKind,
    pub x: f64,
    pub seed: u64,
    /// Per-axis min-max normalization first. Substitution noise always does it.
    #[serde(default)]
    pub minmax: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptResponse {
    pub dataset: DatasetInfo,
    /// Substitution noise only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replaced: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRequest {
    /// `mmc`, `pcalda`, `raw` or `geometric:<preset-or-spec-file>`.
    pub method: String,
    pub learn: PathBuf,
    pub out: PathBuf,
    #[serde(default)]
    pub params: FitParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub path: PathBuf,
    pub method: String,
    pub input_dim: usize,
    pub output_dim: usize,
    pub eigenvalues: Vec<f64>,
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_classes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_samples: Option<usize>,
}

/// Which model to evaluate: a saved model file, or an unlearned method
/// (`raw`, `geometric:<spec>`) built on the spot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSource {
    File(PathBuf),
    Method { method: String, params: FitParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub model: ModelSource,
    pub eval: PathBuf,
    /// Subset of `dbi`, `sc`, `roc`, `pr`; empty means all four.
    #[serde(default)]
    pub metrics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub metrics: BTreeMap<String, f64>,
    pub samples: usize,
    pub classes: usize,
    pub positive_pairs: u64,
    pub negative_pairs: u64,
    /// Share of same-identity pairs; the chance level of PR-AUC.
    pub prevalence: f64,
    pub tied_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRequest {
    pub model: ModelSource,
    pub eval: PathBuf,
    /// Defaults to the number of identities in the evaluation set.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn one() -> usize {
    1
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResponse {
    pub k: usize,
    pub sse: f64,
    pub iterations: usize,
    pub scores: ClusteringScores,
    pub pairs: PairConfusion,
    pub assignment: Vec<usize>,
}

/// Noise applied during a sweep, in the `kind:x` form of the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRequest {
    pub kind: NoiseKind,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub data: PathBuf,
    pub methods: String,
    pub start: (usize, usize),
    pub end_learning: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise: Option<NoiseRequest>,
    #[serde(default)]
    pub corrupt_learn: bool,
    #[serde(default)]
    pub params: FitParams,
    /// Report path; `.csv`, `.json` and the pivot table are written next to it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustRequest {
    pub data: PathBuf,
    #[serde(default = "default_robust_method")]
    pub method: String,
    pub config: (usize, usize),
    pub seed: u64,
    /// `default`, `none`, or a path to a file with one exclusion per line:
    /// `<name>: <joint> <joint> ...`.
    #[serde(default = "default_exclusions")]
    pub exclusions: String,
    /// Noise series levels, run for each listed kind.
    #[serde(default)]
    pub noise_kinds: Vec<NoiseKind>,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub corrupt_learn: bool,
    #[serde(default)]
    pub params: FitParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub timestamp: bool,
}

fn default_robust_method() -> String {
    "mmc".into()
}

fn default_exclusions() -> String {
    "default".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterabilityRequest {
    pub data: PathBuf,
    pub methods: String,
    pub config: (usize, usize),
    pub seed: u64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "one")]
    pub restarts: usize,
    #[serde(default)]
    pub params: FitParams,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub timestamp: bool,
}

/// Reports are returned in full; when `out` was given they are also written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResponse {
    pub report: EvaluationReport,
    pub written: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryAddRequest {
    pub gallery: PathBuf,
    pub model: PathBuf,
    /// Canonical sample file; every sample in it becomes one incident.
    pub sample: PathBuf,
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub camera: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GalleryAddResponse {
    pub ids: Vec<u64>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryQueryRequest {
    pub gallery: PathBuf,
    pub model: PathBuf,
    /// Query by sample file (its sample at `index`) ...
    #[serde(default)]
    pub sample: Option<PathBuf>,
    #[serde(default)]
    pub index: usize,
    /// ... or by a stored incident id.
    #[serde(default)]
    pub incident: Option<u64>,
    /// `threshold:<tau>`, `topk:<k>` or `cluster:<k>[:<seed>]`.
    pub rule: String,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateRequest {
    pub model: PathBuf,
    pub validation: PathBuf,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
}

fn default_quantile() -> f64 {
    DEFAULT_CALIBRATION_QUANTILE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateResponse {
    pub tau: f64,
    pub quantile: f64,
    pub rule: String,
}
