use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric::GeometricFeatureSpec;
use crate::harness::corrupt::{apply_noise, minmax_normalize, CorruptionSpec, NoiseKind};
use crate::harness::report::{CellError, CellInfo, EvaluationReport, ReportMetadata, ReportRow};
use crate::harness::split::SplitConfiguration;
use crate::io::dataset_id;
use crate::metrics::SeparationMetrics;
use crate::model::{FeatureModel, FitOptions, Method};
use crate::sample::Dataset;
use crate::seeds::derive_seed;

/// A method as named on the command line: `mmc`, `pcalda`, `raw` or
/// `geometric:<preset-or-spec-file>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric: Option<GeometricFeatureSpec>,
}

impl MethodSpec {
    pub fn plain(method: Method) -> Self {
        MethodSpec {
            name: method.to_string(),
            method,
            geometric: None,
        }
    }

    pub fn geometric(label: &str, spec: GeometricFeatureSpec) -> Self {
        MethodSpec {
            name: format!("geometric:{label}"),
            method: Method::Geometric,
            geometric: Some(spec),
        }
    }

    /// Comma-separated list of method specs.
    pub fn parse_list(text: &str) -> Result<Vec<MethodSpec>> {
        let list = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(MethodSpec::from_str)
            .collect::<Result<Vec<_>>>()?;
        if list.is_empty() {
            return Err(Error::Parameter("no methods given".into()));
        }
        Ok(list)
    }

    pub fn fit(&self, learning: &Dataset, base: &FitOptions) -> Result<FeatureModel> {
        let mut opts = base.clone();
        if self.geometric.is_some() {
            opts.geometric = self.geometric.clone();
        }
        FeatureModel::fit(self.method, learning, &opts)
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("geometric", spec)) => Ok(MethodSpec::geometric(spec, GeometricFeatureSpec::resolve(spec)?)),
            Some(_) => Err(Error::Parameter(format!("unknown method `{s}`"))),
            None if s == "geometric" => Ok(MethodSpec::geometric(
                "preset-broad",
                GeometricFeatureSpec::resolve("preset-broad")?,
            )),
            None => Ok(MethodSpec::plain(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOptions {
    pub fit: FitOptions,
    pub seed: u64,
    /// Apply noise to the learning part as well as the evaluation part.
    pub corrupt_learn: bool,
    pub timestamp: Option<u64>,
}


impl SweepOptions {
    pub fn metadata(&self, dataset: &Dataset) -> ReportMetadata {
        ReportMetadata {
            seed: self.seed,
            frames: self.fit.frames,
            dataset_id: dataset_id(dataset),
            timestamp: self.timestamp,
        }
    }
}

/// Outcome of one (method, configuration, corruption) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub metrics: SeparationMetrics,
    pub input_dim: usize,
    pub output_dim: usize,
}

pub(crate) fn cell_id(split: &SplitConfiguration) -> String {
    // Identity sets pin a cell down even when several splits share counts.
    format!("{}|{}", split.learning.join(","), split.evaluation.join(","))
}

/// Applies `corruption` to a partitioned split. Noise seeds depend on the
/// split and part but not on the method, so every method sees the same noise.
pub(crate) fn corrupt_parts(
    learning: Dataset,
    evaluation: Dataset,
    split: &SplitConfiguration,
    corruption: &CorruptionSpec,
    corrupt_learn: bool,
    opts: &mut FitOptions,
) -> Result<(Dataset, Dataset)> {
    match corruption {
        CorruptionSpec::None => Ok((learning, evaluation)),
        CorruptionSpec::Noise { noise, x, seed } => {
            let id = cell_id(split);
            let eval = apply_noise(&evaluation, *noise, *x, derive_seed(*seed, &format!("eval/{id}")))?;
            let learn = if corrupt_learn {
                apply_noise(&learning, *noise, *x, derive_seed(*seed, &format!("learn/{id}")))?
            } else {
                learning
            };
            Ok((learn, eval))
        }
        CorruptionSpec::ExcludeJoints { mask, .. } => {
            opts.mask = mask.clone();
            Ok((learning, evaluation))
        }
    }
}

/// Evaluates an already fitted model on an evaluation part.
pub fn evaluate_model(model: &FeatureModel, evaluation: &Dataset) -> Result<SeparationMetrics> {
    let templates: Vec<Vec<f64>> = model.templates(evaluation)?.into_iter().map(|t| t.features).collect();
    SeparationMetrics::compute(&templates, &evaluation.labels(), model)
}

/// Fits on the learning part and evaluates on the evaluation part.
pub fn run_cell(
    method: &MethodSpec,
    dataset: &Dataset,
    split: &SplitConfiguration,
    corruption: &CorruptionSpec,
    opts: &SweepOptions,
) -> Result<CellOutcome> {
    split.validate()?;
    let (learning, evaluation) = split.partition(dataset)?;
    let learned: Vec<String> = learning.identities();
    if evaluation.identities().iter().any(|i| learned.contains(i)) {
        return Err(Error::InvalidSplit("learning and evaluation parts share an identity".into()));
    }
    let mut fit_opts = opts.fit.clone();
    let (learning, evaluation) = corrupt_parts(learning, evaluation, split, corruption, opts.corrupt_learn, &mut fit_opts)?;
    let model = method.fit(&learning, &fit_opts)?;
    Ok(CellOutcome {
        metrics: evaluate_model(&model, &evaluation)?,
        input_dim: model.input_dim(),
        output_dim: model.output_dim(),
    })
}

/// Substitution noise draws from `[0, 1]`, so its experiments run on
/// per-axis min-max normalized coordinates.
pub fn prepare_for_corruption(dataset: &Dataset, corruption: &CorruptionSpec) -> Result<Option<Dataset>> {
    match corruption {
        CorruptionSpec::Noise {
            noise: NoiseKind::Subst, ..
        } => Ok(Some(minmax_normalize(dataset)?)),
        _ => Ok(None),
    }
}

/// Every (method, configuration) cell: fit on the learning part, evaluate the
/// four separation metrics on the evaluation part. Failed cells are recorded
/// in `errors` and the run continues.
pub fn run_sweep(
    methods: &[MethodSpec],
    dataset: &Dataset,
    sequence: &[SplitConfiguration],
    corruption: &CorruptionSpec,
    opts: &SweepOptions,
) -> Result<EvaluationReport> {
    if methods.is_empty() || sequence.is_empty() {
        return Err(Error::Parameter("sweep needs at least one method and one configuration".into()));
    }
    let prepared = prepare_for_corruption(dataset, corruption)?;
    let data = prepared.as_ref().unwrap_or(dataset);
    let cells: Vec<(&MethodSpec, &SplitConfiguration)> =
        methods.iter().flat_map(|m| sequence.iter().map(move |s| (m, s))).collect();
    let outcomes: Vec<Result<CellOutcome>> = cells
        .par_iter()
        .map(|(m, s)| run_cell(m, data, s, corruption, opts))
        .collect();

    let mut report = EvaluationReport::new(opts.metadata(dataset));
    let tag = corruption.tag();
    for ((method, split), outcome) in cells.into_iter().zip(outcomes) {
        let (cl, ce) = split.counts();
        match outcome {
            Ok(cell) => {
                for (metric, value) in cell.metrics.named() {
                    report.rows.push(ReportRow {
                        method: method.name.clone(),
                        config_learn: cl,
                        config_eval: ce,
                        corruption: tag.clone(),
                        metric: metric.into(),
                        value,
                        relative_score: None,
                    });
                }
                report.cells.push(CellInfo {
                    method: method.name.clone(),
                    config_learn: cl,
                    config_eval: ce,
                    corruption: tag.clone(),
                    input_dim: cell.input_dim,
                    output_dim: cell.output_dim,
                });
            }
            Err(e) => report.errors.push(CellError {
                method: method.name.clone(),
                config_learn: cl,
                config_eval: ce,
                corruption: tag.clone(),
                error: e.to_string(),
            }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::split::configuration_sequence;
    use crate::synth::synthesize_dataset;

    #[test]
    fn method_specs_parse() {
        let list = MethodSpec::parse_list("mmc, pcalda,raw,geometric:preset-lower-body").unwrap();
        let names: Vec<&str> = list.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["mmc", "pcalda", "raw", "geometric:preset-lower-body"]);
        assert!(list[3].geometric.is_some());
        assert!(MethodSpec::parse_list("").is_err());
        assert!(MethodSpec::parse_list("lda").is_err());
        assert!(MethodSpec::parse_list("raw:x").is_err());
    }

    #[test]
    fn one_cell_gives_four_rows() {
        let d = synthesize_dataset(8, 4, 3).unwrap();
        let seq = configuration_sequence(&d, (4, 4), 4, 1).unwrap();
        let r = run_sweep(&[MethodSpec::plain(Method::Mmc)], &d, &seq, &CorruptionSpec::None, &SweepOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.errors.is_empty());
        assert_eq!(r.cells.len(), 1);
        assert!(r.rows.iter().all(|row| row.relative_score.is_none() && row.value.is_finite()));
    }

    #[test]
    fn degenerate_cells_are_recorded_not_fatal() {
        // One learning identity cannot be fitted; raw still runs.
        let d = synthesize_dataset(5, 3, 3).unwrap();
        let seq = configuration_sequence(&d, (1, 4), 1, 1).unwrap();
        let methods = [MethodSpec::plain(Method::Mmc), MethodSpec::plain(Method::Raw)];
        let r = run_sweep(&methods, &d, &seq, &CorruptionSpec::None, &SweepOptions::default()).unwrap();
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].method, "mmc");
        assert_eq!(r.rows.len(), 4);
    }

    #[test]
    fn zero_multiplicative_noise_changes_nothing() {
        let d = synthesize_dataset(8, 4, 3).unwrap();
        let seq = configuration_sequence(&d, (4, 4), 5, 1).unwrap();
        let m = [MethodSpec::plain(Method::Mmc)];
        let opts = SweepOptions::default();
        let clean = run_sweep(&m, &d, &seq, &CorruptionSpec::None, &opts).unwrap();
        let noisy = run_sweep(&m, &d, &seq, &CorruptionSpec::noise(NoiseKind::Mult, 0.0, 4).unwrap(), &opts).unwrap();
        let v = |r: &EvaluationReport| r.rows.iter().map(|x| x.value).collect::<Vec<_>>();
        assert_eq!(v(&clean), v(&noisy));
    }
}
