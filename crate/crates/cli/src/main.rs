//! Experiment runner: reproducible, seeded runs of the tagging and
//! network-diagnostic pipelines with JSON/CSV reports.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.
//! Log level comes from the SOCIOTAG_LOG environment variable.

mod cfg;
mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sociotag::analysis::BenchmarkConfig;
use sociotag::error::{Error, Result};

use cfg::{optional_path, require_path, FileConfig};
use commands::Ctx;

#[derive(Parser)]
#[command(
    name = "sociotag",
    version,
    about = "Taggers, node embeddings, and social-network diagnostics for linguistic-homophily experiments"
)]
struct Cli {
    /// JSON config file; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root random seed; recorded in every report.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports and artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent repeats (default 1 = sequential).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Floating-point width for training and inference: 32 or 64.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate inputs and write a normalized corpus.
    Preprocess {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        tagset: Option<PathBuf>,
        /// Edge-list files to validate (repeatable).
        #[arg(long)]
        edges: Vec<PathBuf>,
    },
    /// Train LINE node embeddings from an edge list.
    Embed {
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        /// Proximity order, 1 or 2.
        #[arg(long)]
        order: Option<u8>,
        #[arg(long)]
        negatives: Option<usize>,
        /// Total edge samples (default 100|E|, at least 10^5).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
    /// Build a network-aligned or random train/test author split.
    Split {
        /// network | random
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        tagset: Option<PathBuf>,
        /// Node embeddings (network mode).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Training-set author count (random mode).
        #[arg(long)]
        train_size: Option<usize>,
    },
    /// Train a tagger: naive | crf | bilstm | social.
    Train {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        valid: Option<PathBuf>,
        #[arg(long)]
        tagset: Option<PathBuf>,
        /// Pretrained word vectors (text format).
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Brown cluster paths file.
        #[arg(long)]
        brown: Option<PathBuf>,
        /// Tag dictionary as name=path (repeatable).
        #[arg(long = "dict")]
        dicts: Vec<String>,
        /// Social graph edge list (social model).
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Node embedding file (social model).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Number of basis taggers (social model).
        #[arg(long)]
        k: Option<usize>,
        /// softmax | sigmoid (social model).
        #[arg(long)]
        gate: Option<String>,
        /// Network kind for the default K: follow | mention | retweet.
        #[arg(long)]
        network: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        dropout: Option<f64>,
        #[arg(long)]
        patience: Option<usize>,
    },
    /// Evaluate a checkpoint on a labeled corpus.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        tagset: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        brown: Option<PathBuf>,
        #[arg(long = "dict")]
        dicts: Vec<String>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Include per-author accuracies in the report.
        #[arg(long)]
        per_author: bool,
    },
    /// Accuracy assortativity against degree-preserving rewired
    /// baselines, swept over rewiring epochs.
    Assort {
        /// JSON file of author -> accuracy (alternative to --checkpoint).
        #[arg(long)]
        accuracies: Option<PathBuf>,
        /// Tagger checkpoint to compute per-author accuracy from.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        tagset: Option<PathBuf>,
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Rewiring-epoch sweep values (repeatable).
        #[arg(long = "rewire-epochs")]
        rewire_epochs: Vec<usize>,
        #[arg(long)]
        rewire_samples: Option<usize>,
        /// Also emit an SVG chart of the sweep.
        #[arg(long)]
        svg: bool,
    },
    /// Attention-distribution similarity of a social checkpoint against
    /// rewired baselines.
    AttnSim {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        rewire_epochs: Option<usize>,
        #[arg(long)]
        rewire_samples: Option<usize>,
    },
    /// Generate a synthetic homophilous benchmark (graph + corpus).
    Synth {
        #[arg(long)]
        authors: Option<usize>,
        #[arg(long)]
        communities: Option<usize>,
        #[arg(long)]
        p_in: Option<f64>,
        #[arg(long)]
        p_out: Option<f64>,
        #[arg(long)]
        divergence: Option<f64>,
        #[arg(long)]
        tweets_per_author: Option<usize>,
    },
    /// Full synthetic pipeline: naive-tagger assortativity, CRF
    /// split-gap, and social-attention similarity, in one report.
    SynthE2e {
        #[arg(long)]
        authors: Option<usize>,
        #[arg(long)]
        communities: Option<usize>,
        #[arg(long)]
        p_in: Option<f64>,
        #[arg(long)]
        p_out: Option<f64>,
        #[arg(long)]
        divergence: Option<f64>,
        #[arg(long)]
        tweets_per_author: Option<usize>,
        /// Split repetitions (network and random each).
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        rewire_epochs: Option<usize>,
        #[arg(long)]
        rewire_samples: Option<usize>,
        /// Experts in the social-attention model.
        #[arg(long)]
        k: Option<usize>,
        /// LINE embedding dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// LINE sample budget.
        #[arg(long)]
        samples: Option<usize>,
        /// Social-attention training epochs.
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SOCIOTAG_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let ctx = Ctx {
        seed: cli.seed.or(file.seed).unwrap_or(42),
        out: cli
            .out
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from("sociotag-out")),
        workers: cli.workers.or(file.workers).unwrap_or(1).max(1),
        precision: cli.precision.or(file.precision).unwrap_or(32),
    };
    if ctx.precision != 32 && ctx.precision != 64 {
        return Err(Error::usage(format!(
            "--precision must be 32 or 64, got {}",
            ctx.precision
        )));
    }

    match cli.command {
        Command::Preprocess {
            corpus,
            tagset,
            edges,
        } => {
            let corpus = require_path(corpus, file.corpus.clone(), "corpus")?;
            let tagset = require_path(tagset, file.tagset.clone(), "tagset")?;
            let mut edge_paths = edges;
            if edge_paths.is_empty() {
                if let Some(e) = file.edges.clone() {
                    edge_paths.push(e);
                }
            }
            for e in &edge_paths {
                if !e.exists() {
                    return Err(Error::usage(format!(
                        "--edges path {} does not exist",
                        e.display()
                    )));
                }
            }
            commands::preprocess(&ctx, &corpus, &tagset, &edge_paths)
        }
        Command::Embed {
            edges,
            dim,
            order,
            negatives,
            samples,
            lr,
        } => {
            let edges = require_path(edges, file.edges.clone(), "edges")?;
            commands::embed(
                &ctx,
                &edges,
                dim.or(file.dim).unwrap_or(50),
                order.or(file.order).unwrap_or(2),
                negatives.or(file.negatives).unwrap_or(5),
                samples.or(file.samples),
                lr.or(file.lr).unwrap_or(0.025),
            )
        }
        Command::Split {
            mode,
            corpus,
            tagset,
            embeddings,
            train_size,
        } => {
            let mode = mode
                .or(file.mode.clone())
                .ok_or_else(|| Error::usage("missing --mode (network | random)"))?;
            let corpus = require_path(corpus, file.corpus.clone(), "corpus")?;
            let tagset = require_path(tagset, file.tagset.clone(), "tagset")?;
            let embeddings = optional_path(embeddings, file.embeddings.clone(), "embeddings")?;
            commands::split(
                &ctx,
                &mode,
                &corpus,
                &tagset,
                embeddings.as_deref(),
                train_size.or(file.train_size),
            )
        }
        Command::Train {
            model,
            corpus,
            valid,
            tagset,
            vectors,
            brown,
            dicts,
            edges,
            embeddings,
            k,
            gate,
            network,
            epochs,
            lr,
            l2,
            dropout,
            patience,
        } => {
            let args = commands::TrainArgs {
                model: model
                    .or(file.model.clone())
                    .ok_or_else(|| Error::usage("missing --model"))?,
                corpus: require_path(corpus, file.corpus.clone(), "corpus")?,
                valid: optional_path(valid, file.valid.clone(), "valid")?,
                tagset: require_path(tagset, file.tagset.clone(), "tagset")?,
                vectors: optional_path(vectors, file.vectors.clone(), "vectors")?,
                brown: optional_path(brown, file.brown.clone(), "brown")?,
                dicts: if dicts.is_empty() {
                    file.dicts.clone().unwrap_or_default()
                } else {
                    dicts
                },
                edges: optional_path(edges, file.edges.clone(), "edges")?,
                embeddings: optional_path(embeddings, file.embeddings.clone(), "embeddings")?,
                k: k.or(file.k),
                gate: gate.or(file.gate.clone()),
                network: network.or(file.network.clone()),
                epochs: epochs.or(file.epochs),
                lr: lr.or(file.lr),
                l2: l2.or(file.l2),
                dropout: dropout.or(file.dropout),
                patience: patience.or(file.patience),
            };
            commands::train(&ctx, &args)
        }
        Command::Eval {
            checkpoint,
            corpus,
            tagset,
            vectors,
            brown,
            dicts,
            embeddings,
            per_author,
        } => {
            let args = commands::EvalArgs {
                checkpoint: require_path(checkpoint, file.checkpoint.clone(), "checkpoint")?,
                corpus: require_path(corpus, file.corpus.clone(), "corpus")?,
                tagset: require_path(tagset, file.tagset.clone(), "tagset")?,
                vectors: optional_path(vectors, file.vectors.clone(), "vectors")?,
                brown: optional_path(brown, file.brown.clone(), "brown")?,
                dicts: if dicts.is_empty() {
                    file.dicts.clone().unwrap_or_default()
                } else {
                    dicts
                },
                embeddings: optional_path(embeddings, file.embeddings.clone(), "embeddings")?,
                per_author,
            };
            commands::eval(&ctx, &args)
        }
        Command::Assort {
            accuracies,
            checkpoint,
            corpus,
            tagset,
            edges,
            rewire_epochs,
            rewire_samples,
            svg,
        } => {
            let args = commands::AssortArgs {
                accuracies: optional_path(accuracies, file.accuracies.clone(), "accuracies")?,
                checkpoint: optional_path(checkpoint, file.checkpoint.clone(), "checkpoint")?,
                corpus: optional_path(corpus, file.corpus.clone(), "corpus")?,
                tagset: optional_path(tagset, file.tagset.clone(), "tagset")?,
                edges: require_path(edges, file.edges.clone(), "edges")?,
                rewire_epochs: if rewire_epochs.is_empty() {
                    file.rewire_epochs.clone().unwrap_or_else(|| vec![10])
                } else {
                    rewire_epochs
                },
                rewire_samples: rewire_samples.or(file.rewire_samples).unwrap_or(20),
                svg: svg || file.svg.unwrap_or(false),
            };
            commands::assort(&ctx, &args)
        }
        Command::AttnSim {
            checkpoint,
            embeddings,
            edges,
            rewire_epochs,
            rewire_samples,
        } => {
            let args = commands::AttnSimArgs {
                checkpoint: require_path(checkpoint, file.checkpoint.clone(), "checkpoint")?,
                embeddings: require_path(embeddings, file.embeddings.clone(), "embeddings")?,
                edges: require_path(edges, file.edges.clone(), "edges")?,
                rewire_epochs: rewire_epochs
                    .or_else(|| file.rewire_epochs.clone().and_then(|v| v.first().copied()))
                    .unwrap_or(10),
                rewire_samples: rewire_samples.or(file.rewire_samples).unwrap_or(20),
            };
            commands::attn_sim(&ctx, &args)
        }
        Command::Synth {
            authors,
            communities,
            p_in,
            p_out,
            divergence,
            tweets_per_author,
        } => {
            let config = merge_benchmark(
                file.benchmark.clone(),
                authors,
                communities,
                p_in,
                p_out,
                divergence,
                tweets_per_author,
            );
            commands::synth(&ctx, &config)
        }
        Command::SynthE2e {
            authors,
            communities,
            p_in,
            p_out,
            divergence,
            tweets_per_author,
            repeats,
            rewire_epochs,
            rewire_samples,
            k,
            dim,
            samples,
            epochs,
            lr,
        } => {
            let defaults = commands::SynthE2eArgs::default();
            let args = commands::SynthE2eArgs {
                benchmark: merge_benchmark(
                    file.benchmark.clone(),
                    authors,
                    communities,
                    p_in,
                    p_out,
                    divergence,
                    tweets_per_author,
                ),
                repeats: repeats.or(file.repeats).unwrap_or(defaults.repeats),
                rewire_epochs: rewire_epochs
                    .or_else(|| file.rewire_epochs.clone().and_then(|v| v.first().copied()))
                    .unwrap_or(defaults.rewire_epochs),
                rewire_samples: rewire_samples
                    .or(file.rewire_samples)
                    .unwrap_or(defaults.rewire_samples),
                k: k.or(file.k).unwrap_or(defaults.k),
                line_dim: dim.or(file.dim).unwrap_or(defaults.line_dim),
                line_samples: samples.or(file.samples),
                attn_epochs: epochs.or(file.epochs).unwrap_or(defaults.attn_epochs),
                attn_lr: lr.or(file.lr).unwrap_or(defaults.attn_lr),
            };
            commands::synth_e2e(&ctx, &args)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn merge_benchmark(
    base: Option<BenchmarkConfig>,
    authors: Option<usize>,
    communities: Option<usize>,
    p_in: Option<f64>,
    p_out: Option<f64>,
    divergence: Option<f64>,
    tweets_per_author: Option<usize>,
) -> BenchmarkConfig {
    let mut config = base.unwrap_or_default();
    if let Some(v) = authors {
        config.authors = v;
    }
    if let Some(v) = communities {
        config.communities = v;
    }
    if let Some(v) = p_in {
        config.p_in = v;
    }
    if let Some(v) = p_out {
        config.p_out = v;
    }
    if let Some(v) = divergence {
        config.divergence = v;
    }
    if let Some(v) = tweets_per_author {
        config.tweets_per_author = v;
    }
    config
}
