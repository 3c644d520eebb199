//! Experiment protocols: configuration sweeps, robustness to missing joints
//! and noise, and clusterability, with CSV/JSON reports.

pub mod cluster;
pub mod corrupt;
pub mod report;
pub mod robust;
pub mod split;
pub mod sweep;

pub use cluster::{cluster_dataset, clusterability, ClusterOptions, ClusterRun, CMU_MMC_REFERENCE};
pub use corrupt::{
    apply_noise, corrupt_multiplicative, corrupt_substitution, corrupt_substitution_counted, minmax_normalize,
    CorruptionSpec, NoiseKind,
};
pub use report::{EvaluationReport, ReportMetadata, ReportRow, CSV_HEADER};
pub use robust::{default_exclusions, joint_exclusion_suite, noise_series, relative_scores, RelativeScores};
pub use split::{configuration_sequence, random_split, SplitConfiguration};
pub use sweep::{evaluate_model, run_cell, run_sweep, MethodSpec, SweepOptions};
