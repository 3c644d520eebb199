use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::corrupt::{apply_noise, minmax_normalize, CorruptionSpec, NoiseKind};
use crate::harness::report::{CellError, CellInfo, EvaluationReport, ReportRow};
use crate::harness::split::SplitConfiguration;
use crate::harness::sweep::{cell_id, evaluate_model, run_cell, MethodSpec, SweepOptions};
use crate::metrics::SeparationMetrics;
use crate::sample::Dataset;
use crate::seeds::derive_seed;
use crate::skeleton::{default_group_exclusions, single_joint_exclusions, Exclusion};

/// Percentage scores of a corrupted run against its clean baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeScores {
    pub dbi: f64,
    pub sc: f64,
    pub roc: f64,
    pub pr: f64,
}

impl RelativeScores {
    pub fn named(&self) -> [(&'static str, f64); 4] {
        [("dbi", self.dbi), ("sc", self.sc), ("roc", self.roc), ("pr", self.pr)]
    }
}

/// DBI is lower-is-better, so its score is the inverse ratio; SC is shifted
/// onto `[0, 2]` before taking the ratio.
pub fn relative_scores(old: &SeparationMetrics, new: &SeparationMetrics) -> Result<RelativeScores> {
    let undefined = |what: &str| Err(Error::UndefinedScore(what.into()));
    if new.dbi == 0.0 {
        return undefined("DBI of the corrupted run is 0");
    }
    if old.sc == -1.0 {
        return undefined("baseline SC is -1");
    }
    if old.roc == 0.0 {
        return undefined("baseline ROC-AUC is 0");
    }
    if old.pr == 0.0 {
        return undefined("baseline PR-AUC is 0");
    }
    Ok(RelativeScores {
        dbi: 100.0 * (old.dbi / new.dbi),
        sc: 100.0 * ((new.sc + 1.0) / (old.sc + 1.0)),
        roc: 100.0 * (new.roc / old.roc),
        pr: 100.0 * (new.pr / old.pr),
    })
}

/// The 31 single-joint exclusions followed by the 14 default group exclusions.
pub fn default_exclusions() -> Vec<Exclusion> {
    let mut v = single_joint_exclusions();
    v.extend(default_group_exclusions());
    v
}

fn push_rows(
    report: &mut EvaluationReport,
    method: &str,
    split: &SplitConfiguration,
    corruption: &str,
    metrics: &SeparationMetrics,
    relative: Option<RelativeScores>,
) {
    let (cl, ce) = split.counts();
    let rel = relative.map(|r| r.named());
    for (i, (metric, value)) in metrics.named().into_iter().enumerate() {
        report.rows.push(ReportRow {
            method: method.into(),
            config_learn: cl,
            config_eval: ce,
            corruption: corruption.into(),
            metric: metric.into(),
            value,
            relative_score: rel.map(|r| r[i].1),
        });
    }
}

fn push_error(report: &mut EvaluationReport, method: &str, split: &SplitConfiguration, corruption: &str, e: &Error) {
    let (cl, ce) = split.counts();
    report.errors.push(CellError {
        method: method.into(),
        config_learn: cl,
        config_eval: ce,
        corruption: corruption.into(),
        error: e.to_string(),
    });
}

/// Refits the model once per exclusion on masked vectors and scores each
/// against the unmasked baseline. The baseline rows carry relative scores of
/// exactly 100.
pub fn joint_exclusion_suite(
    method: &MethodSpec,
    dataset: &Dataset,
    split: &SplitConfiguration,
    exclusions: &[Exclusion],
    opts: &SweepOptions,
) -> Result<EvaluationReport> {
    let masks = exclusions
        .iter()
        .map(|e| {
            Ok(CorruptionSpec::ExcludeJoints {
                name: e.name.clone(),
                mask: e.mask()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut base_opts = opts.clone();
    base_opts.fit.mask = crate::skeleton::JointMask::full();
    let baseline = run_cell(method, dataset, split, &CorruptionSpec::None, &base_opts)?;
    let outcomes: Vec<_> = masks
        .par_iter()
        .map(|c| run_cell(method, dataset, split, c, &base_opts))
        .collect();

    let mut report = EvaluationReport::new(opts.metadata(dataset));
    let (cl, ce) = split.counts();
    let info = |corruption: String, i: usize, o: usize| CellInfo {
        method: method.name.clone(),
        config_learn: cl,
        config_eval: ce,
        corruption,
        input_dim: i,
        output_dim: o,
    };
    push_rows(
        &mut report,
        &method.name,
        split,
        "none",
        &baseline.metrics,
        Some(relative_scores(&baseline.metrics, &baseline.metrics)?),
    );
    report.cells.push(info("none".into(), baseline.input_dim, baseline.output_dim));
    for (c, outcome) in masks.iter().zip(outcomes) {
        let tag = c.tag();
        match outcome.and_then(|o| relative_scores(&baseline.metrics, &o.metrics).map(|r| (o, r))) {
            Ok((o, r)) => {
                push_rows(&mut report, &method.name, split, &tag, &o.metrics, Some(r));
                report.cells.push(info(tag, o.input_dim, o.output_dim));
            }
            Err(e) => push_error(&mut report, &method.name, split, &tag, &e),
        }
    }
    Ok(report)
}

/// Noise robustness curve on a fixed split.
///
/// The dataset is min-max normalized first for both noise kinds, and `x = 0`
/// of the same series is the baseline. Unless `opts.corrupt_learn` is set the
/// model is fitted once on clean learning data.
pub fn noise_series(
    method: &MethodSpec,
    dataset: &Dataset,
    split: &SplitConfiguration,
    kind: NoiseKind,
    levels: &[f64],
    noise_seed: u64,
    opts: &SweepOptions,
) -> Result<EvaluationReport> {
    if levels.is_empty() {
        return Err(Error::Parameter("noise series needs at least one level".into()));
    }
    let data = minmax_normalize(dataset)?;
    let (learning, evaluation) = split.partition(&data)?;
    let clean_model = method.fit(&learning, &opts.fit)?;
    let baseline = evaluate_model(&clean_model, &evaluation)?;
    let id = cell_id(split);

    let outcomes: Vec<Result<(SeparationMetrics, usize)>> = levels
        .par_iter()
        .map(|&x| {
            let spec = CorruptionSpec::noise(kind, x, noise_seed)?;
            let CorruptionSpec::Noise { seed, .. } = spec else { unreachable!() };
            let eval = apply_noise(&evaluation, kind, x, derive_seed(seed, &format!("eval/{id}")))?;
            if opts.corrupt_learn && x > 0.0 {
                let learn = apply_noise(&learning, kind, x, derive_seed(seed, &format!("learn/{id}")))?;
                let model = method.fit(&learn, &opts.fit)?;
                Ok((evaluate_model(&model, &eval)?, model.output_dim()))
            } else {
                Ok((evaluate_model(&clean_model, &eval)?, clean_model.output_dim()))
            }
        })
        .collect();

    let mut report = EvaluationReport::new(opts.metadata(dataset));
    let (cl, ce) = split.counts();
    for (&x, outcome) in levels.iter().zip(outcomes) {
        let tag = format!("{kind}:{x}");
        match outcome.and_then(|(m, d)| relative_scores(&baseline, &m).map(|r| (m, r, d))) {
            Ok((m, r, d)) => {
                push_rows(&mut report, &method.name, split, &tag, &m, Some(r));
                report.cells.push(CellInfo {
                    method: method.name.clone(),
                    config_learn: cl,
                    config_eval: ce,
                    corruption: tag,
                    input_dim: clean_model.input_dim(),
                    output_dim: d,
                });
            }
            Err(e) => push_error(&mut report, &method.name, split, &tag, &e),
        }
    }
    Ok(report)
}
