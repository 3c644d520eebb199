use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::report::{CellInfo, EvaluationReport, ReportRow};
use crate::harness::split::SplitConfiguration;
use crate::harness::sweep::{MethodSpec, SweepOptions};
use crate::metrics::{clustering_scores, kmeans_restarts, ClusteringResult, ClusteringScores};
use crate::model::FeatureModel;
use crate::sample::Dataset;
use crate::seeds::derive_seed;

pub const DEFAULT_MAX_ITER: usize = 300;

/// Published MMC clustering scores on the CMU corpus at a (9, 55) split with
/// K = 55, in `ClusteringScores::named` order.
pub const CMU_MMC_REFERENCE: [(&str, f64); 5] = [
    ("purity", 0.4491),
    ("ri", 0.9538),
    ("f", 0.2147),
    ("ji", 0.1203),
    ("fmi", 0.2202),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterOptions {
    /// Cluster count; `None` uses the number of identities being clustered.
    pub k: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            k: None,
            seed: 0,
            restarts: 1,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRun {
    pub clustering: ClusteringResult,
    pub scores: ClusteringScores,
}

/// K-Means on whitened templates, scored against the true identities.
pub fn cluster_dataset(model: &FeatureModel, dataset: &Dataset, opts: &ClusterOptions) -> Result<ClusterRun> {
    let points = model
        .templates(dataset)?
        .into_iter()
        .map(|t| model.whiten(&t.features))
        .collect::<Vec<_>>();
    let k = opts.k.unwrap_or_else(|| dataset.class_count());
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let clustering = kmeans_restarts(&points, k, opts.seed, opts.max_iter, opts.restarts)?;
    let scores = clustering_scores(&clustering.assignment, &dataset.labels())?;
    Ok(ClusterRun { clustering, scores })
}

/// Fits on the learning part, clusters the evaluation part and reports the
/// five clustering scores. The K-Means seed is derived from the run seed and
/// the split.
pub fn clusterability(
    method: &MethodSpec,
    dataset: &Dataset,
    split: &SplitConfiguration,
    cluster: &ClusterOptions,
    opts: &SweepOptions,
) -> Result<(EvaluationReport, ClusterRun)> {
    let (learning, evaluation) = split.partition(dataset)?;
    let model = method.fit(&learning, &opts.fit)?;
    let mut copts = *cluster;
    copts.seed = derive_seed(
        cluster.seed,
        &format!("kmeans/{}", crate::harness::sweep::cell_id(split)),
    );
    let run = cluster_dataset(&model, &evaluation, &copts)?;
    let (cl, ce) = split.counts();
    let mut report = EvaluationReport::new(opts.metadata(dataset));
    for (metric, value) in run.scores.named() {
        report.rows.push(ReportRow {
            method: method.name.clone(),
            config_learn: cl,
            config_eval: ce,
            corruption: "none".into(),
            metric: metric.into(),
            value,
            relative_score: None,
        });
    }
    report.cells.push(CellInfo {
        method: method.name.clone(),
        config_learn: cl,
        config_eval: ce,
        corruption: "none".into(),
        input_dim: model.input_dim(),
        output_dim: model.output_dim(),
    });
    Ok((report, run))
}
