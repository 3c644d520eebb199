//! Blocking implementations of the service operations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use gaitlab_core::api::*;
use gaitlab_core::gallery::{calibrate_threshold, AcceptanceRule};
use gaitlab_core::harness::{
    clusterability as run_clusterability, configuration_sequence, corrupt_substitution_counted, default_exclusions,
    joint_exclusion_suite, minmax_normalize, noise_series, random_split, run_sweep, CorruptionSpec, EvaluationReport,
    MethodSpec, NoiseKind, SweepOptions,
};
use gaitlab_core::harness::cluster::{cluster_dataset, ClusterOptions};
use gaitlab_core::io::{dataset_id, parse_dataset, parse_dataset_with, write_dataset, VerticalAxis};
use gaitlab_core::metrics::{
    average_precision_from_pairs, davies_bouldin, labelled_pairs, roc_auc_from_pairs, silhouette,
};
use gaitlab_core::model::{FeatureModel, Method, Metric};
use gaitlab_core::normalize::normalize_sample;
use gaitlab_core::sample::{Dataset, GaitSample};
use gaitlab_core::skeleton::{joint_index, Exclusion};
use gaitlab_core::synth::synthesize_dataset;
use gaitlab_core::{Error, Result};

pub fn dataset_info(path: &Path, d: &Dataset) -> DatasetInfo {
    DatasetInfo {
        path: path.to_path_buf(),
        dataset_id: dataset_id(d),
        classes: d.class_count(),
        samples: d.len(),
    }
}

fn now() -> Option<u64> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

pub fn synth(req: SynthRequest) -> Result<DatasetInfo> {
    if req.ids == 0 || req.per_id == 0 {
        return Err(Error::Parameter("identity and sample counts must be at least 1".into()));
    }
    let d = synthesize_dataset(req.ids, req.per_id, req.seed)?;
    write_dataset(&req.out, &d)?;
    Ok(dataset_info(&req.out, &d))
}

pub fn normalize_dataset(d: &Dataset) -> Result<Dataset> {
    d.map_samples(normalize_sample)
}

pub fn ingest(req: IngestRequest) -> Result<DatasetInfo> {
    let axis: VerticalAxis = req.vertical.parse()?;
    let mut d = parse_dataset_with(&req.input, axis)?;
    if req.normalize {
        d = normalize_dataset(&d)?;
    }
    write_dataset(&req.out, &d)?;
    Ok(dataset_info(&req.out, &d))
}

pub fn corrupt(req: CorruptRequest) -> Result<CorruptResponse> {
    let mut d = parse_dataset(&req.data)?;
    if req.minmax || req.kind == NoiseKind::Subst {
        d = minmax_normalize(&d)?;
    }
    let (out, replaced) = match req.kind {
        NoiseKind::Mult => (gaitlab_core::harness::corrupt_multiplicative(&d, req.x, req.seed)?, None),
        NoiseKind::Subst => {
            let (o, n) = corrupt_substitution_counted(&d, req.x, req.seed)?;
            (o, Some(n))
        }
    };
    write_dataset(&req.out, &out)?;
    Ok(CorruptResponse {
        dataset: dataset_info(&req.out, &out),
        replaced,
    })
}

fn sweep_options(params: &FitParams, seed: u64, corrupt_learn: bool, timestamp: bool) -> Result<SweepOptions> {
    Ok(SweepOptions {
        fit: params.options()?,
        seed,
        corrupt_learn,
        timestamp: if timestamp { now() } else { None },
    })
}

pub fn model_info(path: &Path, m: &FeatureModel) -> ModelInfo {
    let learning = m.learning();
    ModelInfo {
        path: path.to_path_buf(),
        method: m.method().to_string(),
        input_dim: m.input_dim(),
        output_dim: m.output_dim(),
        eigenvalues: m.eigenvalues().to_vec(),
        metric: match m.metric() {
            Metric::Euclidean => "euclidean".into(),
            Metric::Mahalanobis(_) => "mahalanobis".into(),
        },
        learning_classes: learning.as_ref().map(|l| l.classes),
        learning_samples: learning.map(|l| l.samples),
    }
}

pub fn fit(req: FitRequest) -> Result<ModelInfo> {
    let method: MethodSpec = req.method.parse()?;
    let learning = parse_dataset(&req.learn)?;
    let model = method.fit(&learning, &req.params.options()?)?;
    model.save(&req.out)?;
    Ok(model_info(&req.out, &model))
}

/// Loads a saved model or builds an unlearned one.
pub fn resolve_model(source: &ModelSource) -> Result<FeatureModel> {
    match source {
        ModelSource::File(path) => FeatureModel::load(path),
        ModelSource::Method { method, params } => {
            let spec: MethodSpec = method.parse()?;
            if params.mahalanobis {
                return Err(Error::Configuration(
                    "a Mahalanobis metric needs learning data; fit the model first".into(),
                ));
            }
            let opts = params.options()?;
            match (spec.method, spec.geometric) {
                (Method::Raw, _) => Ok(FeatureModel::raw(opts.mask, opts.frames)),
                (Method::Geometric, Some(g)) => FeatureModel::geometric(g, opts.frame_rate),
                _ => Err(Error::Configuration(format!(
                    "method `{method}` must be fitted first; pass a model file"
                ))),
            }
        }
    }
}

fn templates(model: &FeatureModel, d: &Dataset) -> Result<Vec<Vec<f64>>> {
    Ok(model.templates(d)?.into_iter().map(|t| t.features).collect())
}

pub fn eval(req: EvalRequest) -> Result<EvalResponse> {
    let model = resolve_model(&req.model)?;
    let d = parse_dataset(&req.eval)?;
    let t = templates(&model, &d)?;
    let labels = d.labels();
    let wanted: Vec<String> = if req.metrics.is_empty() {
        ["dbi", "sc", "roc", "pr"].map(String::from).to_vec()
    } else {
        req.metrics.clone()
    };
    let pairs = labelled_pairs(&t, &labels, &model)?;
    let ap = average_precision_from_pairs(&pairs)?;
    let positives = pairs.iter().filter(|p| p.1).count() as u64;
    let mut metrics = BTreeMap::new();
    for m in &wanted {
        let v = match m.as_str() {
            "dbi" => davies_bouldin(&t, &labels, &model)?,
            "sc" => silhouette(&t, &labels, &model)?,
            "roc" => roc_auc_from_pairs(&pairs)?,
            "pr" => ap.ap,
            other => return Err(Error::Parameter(format!("unknown metric `{other}`"))),
        };
        metrics.insert(m.clone(), v);
    }
    Ok(EvalResponse {
        metrics,
        samples: d.len(),
        classes: d.class_count(),
        positive_pairs: positives,
        negative_pairs: pairs.len() as u64 - positives,
        prevalence: ap.prevalence,
        tied_pairs: ap.tied_pairs,
    })
}

pub fn cluster(req: ClusterRequest) -> Result<ClusterResponse> {
    let model = resolve_model(&req.model)?;
    let d = parse_dataset(&req.eval)?;
    let run = cluster_dataset(
        &model,
        &d,
        &ClusterOptions {
            k: req.k,
            seed: req.seed,
            restarts: req.restarts,
            max_iter: req.max_iter,
        },
    )?;
    Ok(ClusterResponse {
        k: run.clustering.k,
        sse: run.clustering.sse,
        iterations: run.clustering.iterations,
        pairs: run.scores.pairs,
        scores: run.scores,
        assignment: run.clustering.assignment,
    })
}

/// Writes `<out>.csv`, `<out>.json` and one pivot table per entry of `pivots`.
fn write_report(
    report: &EvaluationReport,
    out: Option<&Path>,
    pivots: &[(&str, &EvaluationReport, bool)],
) -> Result<Vec<PathBuf>> {
    let Some(out) = out else { return Ok(Vec::new()) };
    report.write(out)?;
    let mut written = vec![out.with_extension("csv"), out.with_extension("json")];
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    for (suffix, r, relative) in pivots {
        r.write_pivot(out, suffix, *relative)?;
        written.push(out.with_file_name(format!("{stem}.{suffix}.csv")));
    }
    Ok(written)
}

pub fn sweep(req: SweepRequest) -> Result<ReportResponse> {
    let methods = MethodSpec::parse_list(&req.methods)?;
    let d = parse_dataset(&req.data)?;
    let seq = configuration_sequence(&d, req.start, req.end_learning, req.seed)?;
    let corruption = match req.noise {
        None => CorruptionSpec::None,
        Some(n) => CorruptionSpec::noise(n.kind, n.x, req.seed)?,
    };
    let opts = sweep_options(&req.params, req.seed, req.corrupt_learn, req.timestamp)?;
    let report = run_sweep(&methods, &d, &seq, &corruption, &opts)?;
    let written = write_report(&report, req.out.as_deref(), &[("fig3", &report, false)])?;
    Ok(ReportResponse { report, written })
}

/// `<name>: <joint> <joint> ...` per line; `#` starts a comment.
pub fn parse_exclusions(text: &str) -> Result<Vec<Exclusion>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| {
            let (name, joints) = l.split_once(':').ok_or_else(|| Error::Parse {
                line,
                msg: "expected `<name>: <joint> ...`".into(),
            })?;
            let joints = joints.split_whitespace().map(joint_index).collect::<Result<Vec<_>>>()?;
            if joints.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "exclusion lists no joints".into(),
                });
            }
            Ok(Exclusion {
                name: name.trim().to_string(),
                joints,
            })
        })
        .collect()
}

pub fn resolve_exclusions(spec: &str) -> Result<Vec<Exclusion>> {
    match spec {
        "default" => Ok(default_exclusions()),
        "none" => Ok(Vec::new()),
        path => parse_exclusions(&std::fs::read_to_string(path)?),
    }
}

pub fn robust(req: RobustRequest) -> Result<ReportResponse> {
    let method: MethodSpec = req.method.parse()?;
    let d = parse_dataset(&req.data)?;
    let split = random_split(&d, req.config, req.seed)?;
    let opts = sweep_options(&req.params, req.seed, req.corrupt_learn, req.timestamp)?;
    let exclusions = resolve_exclusions(&req.exclusions)?;
    let excl = joint_exclusion_suite(&method, &d, &split, &exclusions, &opts)?;
    let mut noise = EvaluationReport::new(opts.metadata(&d));
    if !req.noise_kinds.is_empty() {
        if req.levels.is_empty() {
            return Err(Error::Parameter("noise series needs levels".into()));
        }
        for kind in &req.noise_kinds {
            noise.extend(noise_series(&method, &d, &split, *kind, &req.levels, req.seed, &opts)?);
        }
    }
    let mut report = excl.clone();
    report.extend(noise.clone());
    let mut pivots = vec![("fig4", &excl, true)];
    if !noise.rows.is_empty() {
        pivots.push(("fig5", &noise, true));
    }
    let written = write_report(&report, req.out.as_deref(), &pivots)?;
    Ok(ReportResponse { report, written })
}

pub fn clusterability(req: ClusterabilityRequest) -> Result<ReportResponse> {
    let methods = MethodSpec::parse_list(&req.methods)?;
    let d = parse_dataset(&req.data)?;
    let split = random_split(&d, req.config, req.seed)?;
    let opts = sweep_options(&req.params, req.seed, false, req.timestamp)?;
    let copts = ClusterOptions {
        k: req.k,
        seed: req.seed,
        restarts: req.restarts,
        ..ClusterOptions::default()
    };
    let mut report = EvaluationReport::new(opts.metadata(&d));
    for m in &methods {
        match run_clusterability(m, &d, &split, &copts, &opts) {
            Ok((r, _)) => report.extend(r),
            Err(e) => {
                let (cl, ce) = split.counts();
                report.errors.push(gaitlab_core::harness::report::CellError {
                    method: m.name.clone(),
                    config_learn: cl,
                    config_eval: ce,
                    corruption: "none".into(),
                    error: e.to_string(),
                });
            }
        }
    }
    let written = write_report(&report, req.out.as_deref(), &[("table1", &report, false)])?;
    Ok(ReportResponse { report, written })
}

pub fn calibrate(req: CalibrateRequest) -> Result<CalibrateResponse> {
    let model = FeatureModel::load(&req.model)?;
    let d = parse_dataset(&req.validation)?;
    let tau = calibrate_threshold(&model, &d, req.quantile)?;
    Ok(CalibrateResponse {
        tau,
        quantile: req.quantile,
        rule: AcceptanceRule::Threshold { tau }.to_string(),
    })
}

/// Samples of a query/incident file, normalized like ingested data.
pub fn load_samples(path: &Path) -> Result<Vec<GaitSample>> {
    Ok(normalize_dataset(&parse_dataset(path)?)?.into_samples())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exclusion_file_format() {
        let e = parse_exclusions("# c\nleft knee: ltibia\nfeet: lfoot rfoot # both\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].name, "left knee");
        assert_eq!(e[1].joints.len(), 2);
        assert!(parse_exclusions("nocolon").is_err());
        assert!(parse_exclusions("x: nosuchjoint").is_err());
        assert!(parse_exclusions("x:").is_err());
    }
}
