//! `gaitlab`: command-line client of the gaitlab service.
//!
//! Without `--server` (or `GAITLAB_SERVER`) an embedded server is started on
//! an ephemeral localhost port for the duration of the command.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gaitlab_client::Client;
use gaitlab_core::api::*;
use gaitlab_core::harness::NoiseKind;

#[derive(Parser)]
#[command(name = "gaitlab", version, about = "Gait feature learning and evaluation toolkit")]
struct Cli {
    /// Service URL. Without it an embedded server is started.
    #[arg(long, global = true, env = "GAITLAB_SERVER")]
    server: Option<String>,
    /// Print full JSON responses instead of summaries.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8750")]
        addr: SocketAddr,
    },
    /// Convert a canonical dataset file into a normalized store.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Up axis of the input: x, y or z.
        #[arg(long, default_value = "y")]
        vertical: String,
        /// Keep coordinates as they are instead of normalizing each sample.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Generate a synthetic dataset.
    Synth {
        #[arg(long)]
        ids: usize,
        #[arg(long)]
        per_id: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a noisy copy of a dataset.
    Corrupt {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kind: NoiseKind,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Min-max normalize per axis first (always done for subst).
        #[arg(long)]
        minmax: bool,
    },
    /// Fit a feature model on a learning set.
    Fit {
        #[arg(long)]
        method: String,
        #[arg(long)]
        learn: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Separation metrics of an evaluation set in a model's feature space.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "dbi,sc,roc,pr")]
        metrics: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-Means clustering of an evaluation set, scored against identities.
    Cluster {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit and evaluate methods over a growing sequence of splits.
    Sweep {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "mmc,pcalda,raw")]
        methods: String,
        /// First (learning, evaluation) identity counts.
        #[arg(long, default_value = "2,62", value_parser = parse_pair)]
        start: (usize, usize),
        /// Last learning count; defaults to an even split.
        #[arg(long)]
        end: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation-data noise as `mult:<x>` or `subst:<x>`.
        #[arg(long, value_parser = parse_noise)]
        noise: Option<NoiseRequest>,
        #[arg(long)]
        corrupt_learn: bool,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Joint-exclusion and noise robustness on one split.
    Robust {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "mmc")]
        method: String,
        #[arg(long, default_value = "9,55", value_parser = parse_pair)]
        config: (usize, usize),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `default`, `none` or an exclusion file.
        #[arg(long, default_value = "default")]
        exclusions: String,
        /// Noise kinds for the noise series.
        #[arg(long, value_delimiter = ',')]
        noise: Vec<NoiseKind>,
        #[arg(long, value_delimiter = ',', default_value = "0,25,50,75,100")]
        levels: Vec<f64>,
        #[arg(long)]
        corrupt_learn: bool,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Clustering scores of methods on one split.
    Clusterability {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "mmc")]
        methods: String,
        #[arg(long, default_value = "9,55", value_parser = parse_pair)]
        config: (usize, usize),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Incident gallery.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Acceptance threshold from same-identity distances of a validation set.
    Calibrate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        quantile: f64,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// Add every sample of a file as an incident.
    Add {
        #[arg(long, default_value = "gallery.gal")]
        gallery: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        ts: i64,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long, default_value = "")]
        camera: String,
    },
    /// Rank the gallery against a query and write the location trace.
    Query {
        #[arg(long, default_value = "gallery.gal")]
        gallery: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "incident")]
        sample: Option<PathBuf>,
        /// Which sample of the query file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        incident: Option<u64>,
        #[arg(long, default_value = "topk:10")]
        rule: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = gaitlab_core::normalize::DEFAULT_FRAMES)]
    frames: usize,
    #[arg(long, default_value_t = gaitlab_core::model::DEFAULT_VARIANCE_KEEP)]
    variance_keep: f64,
    #[arg(long, default_value_t = gaitlab_core::geometric::DEFAULT_FRAME_RATE)]
    frame_rate: f64,
    /// Joint names to leave out.
    #[arg(long, value_delimiter = ',')]
    exclude_joints: Vec<String>,
    /// Learn a Mahalanobis metric for raw and geometric models.
    #[arg(long)]
    mahalanobis: bool,
}

impl FitArgs {
    fn params(&self) -> FitParams {
        FitParams {
            frames: self.frames,
            variance_keep: self.variance_keep,
            frame_rate: self.frame_rate,
            exclude_joints: self.exclude_joints.clone(),
            mahalanobis: self.mahalanobis,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Saved model file.
    #[arg(long, conflicts_with = "method")]
    model: Option<PathBuf>,
    /// Unlearned method built on the fly: `raw` or `geometric`.
    #[arg(long)]
    method: Option<String>,
    /// Geometric spec: preset name or spec file.
    #[arg(long)]
    spec: Option<String>,
    #[command(flatten)]
    fit: FitArgs,
}

impl ModelArgs {
    fn source(&self) -> Result<ModelSource> {
        match (&self.model, &self.method) {
            (Some(m), None) => Ok(ModelSource::File(absolute(m)?)),
            (None, Some(method)) => {
                let method = match (method.as_str(), &self.spec) {
                    ("geometric", Some(spec)) => format!("geometric:{}", spec_arg(spec)?),
                    (m, None) => m.to_string(),
                    (m, Some(_)) => bail!("--spec only applies to --method geometric, not `{m}`"),
                };
                Ok(ModelSource::Method {
                    method,
                    params: self.fit.params(),
                })
            }
            _ => bail!("give either --model or --method"),
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Report path; CSV, JSON mirror and a pivot table are written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record the wall-clock time in the report metadata.
    #[arg(long)]
    timestamp: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected `<learning>,<evaluation>`")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

fn parse_noise(s: &str) -> std::result::Result<NoiseRequest, String> {
    let (kind, x) = s.split_once(':').ok_or("expected `<kind>:<x>`")?;
    Ok(NoiseRequest {
        kind: kind.parse().map_err(|e: gaitlab_core::Error| e.to_string())?,
        x: x.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
    })
}

/// The server may run elsewhere in the filesystem; send absolute paths.
fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

/// Spec files become absolute; preset names pass through.
fn spec_arg(spec: &str) -> Result<String> {
    if spec.starts_with("preset-") || Path::new(spec).extension().is_none() && !Path::new(spec).exists() {
        Ok(spec.to_string())
    } else {
        Ok(absolute(Path::new(spec))?.to_string_lossy().into_owned())
    }
}

fn methods_arg(list: &str) -> Result<String> {
    list.split(',')
        .map(|m| match m.trim().split_once(':') {
            Some(("geometric", spec)) => Ok(format!("geometric:{}", spec_arg(spec)?)),
            _ => Ok(m.trim().to_string()),
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.join(","))
}

fn abs_opt(p: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    p.as_deref().map(absolute).transpose()
}

fn print<T: serde::Serialize>(json: bool, value: &T, summary: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        println!("{}", summary());
    }
    Ok(())
}

fn report_summary(r: &ReportResponse) -> String {
    let mut s = format!(
        "{} rows, {} failed cells",
        r.report.rows.len(),
        r.report.errors.len()
    );
    for e in &r.report.errors {
        s.push_str(&format!(
            "\n  failed {} ({},{}) {}: {}",
            e.method, e.config_learn, e.config_eval, e.corruption, e.error
        ));
    }
    for p in &r.written {
        s.push_str(&format!("\nwrote {}", p.display()));
    }
    if r.written.is_empty() {
        s.push('\n');
        s.push_str(r.report.to_csv().trim_end());
    }
    s
}

async fn run(cli: Cli) -> Result<()> {
    if let Command::Serve { addr } = cli.command {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("gaitlab service listening on http://{}", listener.local_addr()?);
        gaitlab_server::serve(listener).await?;
        return Ok(());
    }
    let base = match &cli.server {
        Some(url) => url.clone(),
        None => {
            let addr = gaitlab_server::spawn(([127, 0, 0, 1], 0).into()).await?;
            format!("http://{addr}")
        }
    };
    let client = Client::new(base);
    let json = cli.json;
    match cli.command {
        Command::Serve { .. } => unreachable!("handled above"),
        Command::Ingest {
            input,
            out,
            vertical,
            no_normalize,
        } => {
            let r = client
                .ingest(&IngestRequest {
                    input: absolute(&input)?,
                    out: absolute(&out)?,
                    vertical,
                    normalize: !no_normalize,
                })
                .await?;
            print(json, &r, || dataset_summary(&r))?;
        }
        Command::Synth { ids, per_id, seed, out } => {
            let r = client
                .synth(&SynthRequest {
                    ids,
                    per_id,
                    seed,
                    out: absolute(&out)?,
                })
                .await?;
            print(json, &r, || dataset_summary(&r))?;
        }
        Command::Corrupt {
            data,
            out,
            kind,
            x,
            seed,
            minmax,
        } => {
            let r = client
                .corrupt(&CorruptRequest {
                    data: absolute(&data)?,
                    out: absolute(&out)?,
                    kind,
                    x,
                    seed,
                    minmax,
                })
                .await?;
            print(json, &r, || match r.replaced {
                Some(n) => format!("{}\nreplaced {n} values", dataset_summary(&r.dataset)),
                None => dataset_summary(&r.dataset),
            })?;
        }
        Command::Fit { method, learn, out, fit } => {
            let r = client
                .fit(&FitRequest {
                    method: methods_arg(&method)?,
                    learn: absolute(&learn)?,
                    out: absolute(&out)?,
                    params: fit.params(),
                })
                .await?;
            print(json, &r, || {
                format!(
                    "{} model: {} -> {} dims, {} metric, wrote {}",
                    r.method,
                    r.input_dim,
                    r.output_dim,
                    r.metric,
                    r.path.display()
                )
            })?;
        }
        Command::Eval {
            model,
            eval,
            metrics,
            out,
        } => {
            let r = client
                .eval(&EvalRequest {
                    model: model.source()?,
                    eval: absolute(&eval)?,
                    metrics,
                })
                .await?;
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&r)? + "\n")?;
            }
            print(json, &r, || {
                let mut s: Vec<String> = r.metrics.iter().map(|(k, v)| format!("{k} {v}")).collect();
                s.push(format!("prevalence {}", r.prevalence));
                s.push(format!("pairs {} positive, {} negative", r.positive_pairs, r.negative_pairs));
                s.join("\n")
            })?;
        }
        Command::Cluster {
            model,
            eval,
            k,
            seed,
            restarts,
            out,
        } => {
            let r = client
                .cluster(&ClusterRequest {
                    model: model.source()?,
                    eval: absolute(&eval)?,
                    k,
                    seed,
                    restarts,
                    max_iter: gaitlab_core::harness::cluster::DEFAULT_MAX_ITER,
                })
                .await?;
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_string_pretty(&r)? + "\n")?;
            }
            print(json, &r, || {
                let mut s: Vec<String> = r.scores.named().iter().map(|(k, v)| format!("{k} {v}")).collect();
                s.push(format!(
                    "pairs tp {} fp {} fn {} tn {}",
                    r.pairs.tp, r.pairs.fp, r.pairs.fn_, r.pairs.tn
                ));
                s.push(format!("k {} sse {} iterations {}", r.k, r.sse, r.iterations));
                s.join("\n")
            })?;
        }
        Command::Sweep {
            data,
            methods,
            start,
            end,
            seed,
            noise,
            corrupt_learn,
            fit,
            report,
        } => {
            let end_learning = end.unwrap_or((start.0 + start.1) / 2);
            let r = client
                .sweep(&SweepRequest {
                    data: absolute(&data)?,
                    methods: methods_arg(&methods)?,
                    start,
                    end_learning,
                    seed,
                    noise,
                    corrupt_learn,
                    params: fit.params(),
                    out: abs_opt(&report.out)?,
                    timestamp: report.timestamp,
                })
                .await?;
            print(json, &r, || report_summary(&r))?;
        }
        Command::Robust {
            data,
            method,
            config,
            seed,
            exclusions,
            noise,
            levels,
            corrupt_learn,
            fit,
            report,
        } => {
            let exclusions = match exclusions.as_str() {
                "default" | "none" => exclusions,
                path => absolute(Path::new(path))?.to_string_lossy().into_owned(),
            };
            let r = client
                .robust(&RobustRequest {
                    data: absolute(&data)?,
                    method: methods_arg(&method)?,
                    config,
                    seed,
                    exclusions,
                    noise_kinds: noise,
                    levels,
                    corrupt_learn,
                    params: fit.params(),
                    out: abs_opt(&report.out)?,
                    timestamp: report.timestamp,
                })
                .await?;
            print(json, &r, || report_summary(&r))?;
        }
        Command::Clusterability {
            data,
            methods,
            config,
            seed,
            k,
            restarts,
            fit,
            report,
        } => {
            let r = client
                .clusterability(&ClusterabilityRequest {
                    data: absolute(&data)?,
                    methods: methods_arg(&methods)?,
                    config,
                    seed,
                    k,
                    restarts,
                    params: fit.params(),
                    out: abs_opt(&report.out)?,
                    timestamp: report.timestamp,
                })
                .await?;
            print(json, &r, || report_summary(&r))?;
        }
        Command::Gallery { command } => match command {
            GalleryCommand::Add {
                gallery,
                model,
                sample,
                ts,
                lat,
                lon,
                camera,
            } => {
                let r = client
                    .gallery_add(&GalleryAddRequest {
                        gallery: absolute(&gallery)?,
                        model: absolute(&model)?,
                        sample: absolute(&sample)?,
                        timestamp: ts,
                        lat,
                        lon,
                        camera,
                    })
                    .await?;
                print(json, &r, || {
                    match (r.ids.first(), r.ids.last()) {
                        (Some(a), Some(b)) if a != b => format!("added incidents {a}..={b}; gallery size {}", r.size),
                        (Some(a), _) => format!("added incident {a}; gallery size {}", r.size),
                        _ => format!("nothing added; gallery size {}", r.size),
                    }
                })?;
            }
            GalleryCommand::Query {
                gallery,
                model,
                sample,
                index,
                incident,
                rule,
                out,
            } => {
                let r = client
                    .gallery_query(&GalleryQueryRequest {
                        gallery: absolute(&gallery)?,
                        model: absolute(&model)?,
                        sample: abs_opt(&sample)?,
                        index,
                        incident,
                        rule,
                        out: abs_opt(&out)?,
                    })
                    .await?;
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
                print(json, &r, || {
                    let mut lines = vec![format!("{} accepted ({})", r.accepted.len(), r.rule)];
                    for e in &r.accepted {
                        lines.push(format!(
                            "{} {} {} {} {} {}",
                            e.id, e.distance, e.timestamp, e.lat, e.lon, e.camera
                        ));
                    }
                    lines.join("\n")
                })?;
            }
        },
        Command::Calibrate {
            model,
            validation,
            quantile,
        } => {
            let r = client
                .calibrate(&CalibrateRequest {
                    model: absolute(&model)?,
                    validation: absolute(&validation)?,
                    quantile,
                })
                .await?;
            print(json, &r, || format!("{} (quantile {})", r.rule, r.quantile))?;
        }
    }
    Ok(())
}

fn dataset_summary(d: &DatasetInfo) -> String {
    format!(
        "{}: {} identities, {} samples, id {}",
        d.path.display(),
        d.classes,
        d.samples,
        d.dataset_id
    )
}

#[tokio::main]
async fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("GAITLAB_LOG"))
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()).await {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
