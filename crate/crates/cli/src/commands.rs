//! Subcommand implementations. Each command validates its inputs up
//! front, runs one experiment, and writes a JSON report (plus artifact
//! files) under the output directory.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use sociotag::analysis::{
    assortativity, gen_benchmark, mean_abs_attention_diff, rewired_baseline, BenchmarkConfig,
    RewiredComparison,
};
use sociotag::clustering::{network_split, paired_random_split, random_split, SplitSpec};
use sociotag::corpus::{load_corpus, save_corpus, Corpus, Tagset};
use sociotag::error::{Error, Result};
use sociotag::node_embed::{train_line_traced, LineConfig, LineOrder, NodeEmbedding};
use sociotag::numerics::{Checkpoint, Real, SeedStream};
use sociotag::social_attention::{
    attention_weights, expert_utilization, train_social_traced, GateMode, SocialAttentionModel,
    SocialConfig,
};
use sociotag::socialgraph::{load_edge_list, save_edge_list};
use sociotag::taggers::{
    evaluate, per_author_accuracy, train_basis_traced, train_crf_traced, train_naive, BasisConfig,
    BasisTagger, CrfConfig, CrfModel, NaiveModel, Tagger,
};

use crate::cfg::{file_hash, load_resources, parallel_map, Report};
use crate::svg;

/// Resolved global options.
pub struct Ctx {
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub precision: u32,
}

impl Ctx {
    fn root(&self) -> SeedStream {
        SeedStream::new(self.seed)
    }
}

/// Runs `f::<f32>` or `f::<f64>` according to `--precision`.
macro_rules! dispatch_precision {
    ($ctx:expr, $func:ident ( $($arg:expr),* $(,)? )) => {
        match $ctx.precision {
            32 => $func::<f32>($($arg),*),
            64 => $func::<f64>($($arg),*),
            other => Err(Error::usage(format!("unsupported precision {other}"))),
        }
    };
}

pub fn preprocess(
    ctx: &Ctx,
    corpus_path: &Path,
    tagset_path: &Path,
    edge_paths: &[PathBuf],
) -> Result<()> {
    let tagset = Tagset::from_file(tagset_path)?;
    let corpus = load_corpus(corpus_path, &tagset)?;
    fs::create_dir_all(&ctx.out)?;
    save_corpus(&corpus, &ctx.out.join("corpus.normalized.txt"))?;
    let mut networks = BTreeMap::new();
    for path in edge_paths {
        let graph = load_edge_list(path)?;
        networks.insert(
            path.display().to_string(),
            json!({"nodes": graph.num_nodes(), "edges": graph.num_edges()}),
        );
    }
    let labeled = corpus.labeled_tweets().count();
    let report = Report::new(
        "preprocess",
        ctx.seed,
        json!({
            "corpus": corpus_path,
            "tagset": tagset_path,
            "edges": edge_paths,
        }),
        json!({
            "tweets": corpus.tweets.len(),
            "labeled_tweets": labeled,
            "tokens": corpus.num_tokens(),
            "annotated_authors": corpus.annotated_authors().len(),
            "tagset_size": tagset.len(),
            "networks": networks,
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn embed(
    ctx: &Ctx,
    edges: &Path,
    dim: usize,
    order: u8,
    negatives: usize,
    samples: Option<usize>,
    lr: f64,
) -> Result<()> {
    let graph = load_edge_list(edges)?;
    let config = LineConfig {
        dim,
        order: match order {
            1 => LineOrder::First,
            2 => LineOrder::Second,
            other => {
                return Err(Error::usage(format!(
                    "LINE proximity order must be 1 or 2, got {other}"
                )))
            }
        },
        negatives,
        total_samples: samples,
        initial_lr: lr,
    };
    let mut rng = ctx.root().child("line").rng();
    let (emb, trace) = train_line_traced(&graph, &config, &mut rng)?;
    fs::create_dir_all(&ctx.out)?;
    let emb_path = ctx.out.join("embeddings.txt");
    emb.save(&emb_path)?;
    let report = Report::new(
        "embed",
        ctx.seed,
        json!({
            "edges": edges,
            "dim": dim,
            "order": order,
            "negatives": negatives,
            "total_samples": samples,
            "initial_lr": lr,
        }),
        json!({
            "nodes": graph.num_nodes(),
            "edges": graph.num_edges(),
            "embedded": emb.len(),
            "samples_drawn": trace.sample_loss.len(),
            "loss_first_decile": trace.decile_mean(true),
            "loss_last_decile": trace.decile_mean(false),
            "embeddings_file": emb_path,
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn split(
    ctx: &Ctx,
    mode: &str,
    corpus_path: &Path,
    tagset_path: &Path,
    embeddings: Option<&Path>,
    train_size: Option<usize>,
) -> Result<()> {
    let tagset = Tagset::from_file(tagset_path)?;
    let corpus = load_corpus(corpus_path, &tagset)?;
    let spec: SplitSpec = match mode {
        "network" => {
            let emb_path =
                embeddings.ok_or_else(|| Error::usage("network split needs --embeddings"))?;
            let emb = NodeEmbedding::load(emb_path)?;
            network_split(&emb, &corpus, ctx.root().child("split"))?
        }
        "random" => {
            let size = train_size.ok_or_else(|| Error::usage("random split needs --train-size"))?;
            random_split(&corpus, size, ctx.root().child("split"))?
        }
        other => {
            return Err(Error::usage(format!(
                "split mode must be network or random, got {other:?}"
            )))
        }
    };
    fs::create_dir_all(&ctx.out)?;
    let split_path = ctx.out.join("split.json");
    fs::write(&split_path, serde_json::to_string_pretty(&spec)?)?;
    let report = Report::new(
        "split",
        ctx.seed,
        json!({"mode": mode, "corpus": corpus_path, "train_size": train_size}),
        json!({
            "train_authors": spec.train.len(),
            "test_authors": spec.test.len(),
            "split_file": split_path,
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub model: String,
    pub corpus: PathBuf,
    pub valid: Option<PathBuf>,
    pub tagset: PathBuf,
    pub vectors: Option<PathBuf>,
    pub brown: Option<PathBuf>,
    pub dicts: Vec<String>,
    pub edges: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub k: Option<usize>,
    pub gate: Option<String>,
    pub network: Option<String>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub l2: Option<f64>,
    pub dropout: Option<f64>,
    pub patience: Option<usize>,
}

pub fn train(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    match args.model.as_str() {
        "naive" => train_naive_cmd(ctx, args),
        "crf" => dispatch_precision!(ctx, train_crf_cmd(ctx, args)),
        "bilstm" => dispatch_precision!(ctx, train_bilstm_cmd(ctx, args)),
        "social" => dispatch_precision!(ctx, train_social_cmd(ctx, args)),
        other => Err(Error::usage(format!(
            "model must be naive, crf, bilstm, or social; got {other:?}"
        ))),
    }
}

fn load_train_corpora(args: &TrainArgs) -> Result<(Corpus, Option<Corpus>)> {
    let tagset = Tagset::from_file(&args.tagset)?;
    let train = load_corpus(&args.corpus, &tagset)?;
    let valid = match &args.valid {
        Some(path) => Some(load_corpus(path, &tagset)?),
        None => None,
    };
    Ok((train, valid))
}

fn write_model_report<M: Serialize>(
    ctx: &Ctx,
    ckpt: &Checkpoint,
    args: &TrainArgs,
    metrics: M,
) -> Result<()> {
    fs::create_dir_all(&ctx.out)?;
    let model_path = ctx.out.join(format!("model.{}.json", args.model));
    ckpt.save(&model_path)?;
    let report = Report::new(
        &format!("train-{}", args.model),
        ctx.seed,
        json!({
            "model": args.model,
            "corpus": args.corpus,
            "valid": args.valid,
            "tagset": args.tagset,
            "vectors": args.vectors,
            "brown": args.brown,
            "dicts": args.dicts,
            "edges": args.edges,
            "embeddings": args.embeddings,
            "k": args.k,
            "gate": args.gate,
            "network": args.network,
            "epochs": args.epochs,
            "lr": args.lr,
            "l2": args.l2,
            "dropout": args.dropout,
            "patience": args.patience,
            "precision": ctx.precision,
        }),
        json!({"model_file": model_path, "details": metrics}),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn train_naive_cmd(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let (train, _) = load_train_corpora(args)?;
    let model = train_naive(&train)?;
    let train_acc = evaluate(&model, &train)?;
    write_model_report(
        ctx,
        &model.to_checkpoint(),
        args,
        json!({"train_accuracy": train_acc}),
    )
}

fn train_crf_cmd<F: Real>(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let (train, valid) = load_train_corpora(args)?;
    let config = CrfConfig {
        epochs: args.epochs.unwrap_or(10),
        lr: args.lr.unwrap_or(0.05),
        l2: args.l2.unwrap_or(0.01),
        patience: args.patience.unwrap_or(3),
    };
    let (model, trace) =
        train_crf_traced::<F>(&train, valid.as_ref(), &config, ctx.root().child("crf"))?;
    write_model_report(
        ctx,
        &model.to_checkpoint(),
        args,
        json!({
            "num_features": model.num_features(),
            "epoch_nll": trace.epoch_nll,
            "epoch_val_acc": trace.epoch_val_acc,
        }),
    )
}

fn basis_config_from(args: &TrainArgs, pretrained_dim: usize) -> BasisConfig {
    let mut config = BasisConfig {
        pretrained_dim,
        ..Default::default()
    };
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    if let Some(lr) = args.lr {
        config.lr = lr;
    }
    if let Some(l2) = args.l2 {
        config.l2 = l2;
    }
    if let Some(d) = args.dropout {
        config.dropout = d;
    }
    if let Some(p) = args.patience {
        config.patience = p;
    }
    config
}

fn train_bilstm_cmd<F: Real>(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let (train, valid) = load_train_corpora(args)?;
    let valid = valid.ok_or_else(|| Error::usage("bilstm training needs --valid"))?;
    let resources = Arc::new(load_resources(
        args.vectors.as_deref(),
        args.brown.as_deref(),
        &args.dicts,
    )?);
    let config = basis_config_from(args, resources.vector_dim);
    let (model, trace) = train_basis_traced::<F>(
        &train,
        &valid,
        resources,
        &config,
        ctx.root().child("bilstm"),
    )?;
    write_model_report(
        ctx,
        &model.to_checkpoint(),
        args,
        json!({
            "best_epoch": trace.best_epoch,
            "best_val_acc": trace.best_val_acc(),
            "epoch_val_acc": trace.epoch_val_acc,
            "epoch_train_nll": trace.epoch_train_nll,
        }),
    )
}

fn train_social_cmd<F: Real>(ctx: &Ctx, args: &TrainArgs) -> Result<()> {
    let (train, valid) = load_train_corpora(args)?;
    let valid = valid.ok_or_else(|| Error::usage("social training needs --valid"))?;
    let edges = args
        .edges
        .as_deref()
        .ok_or_else(|| Error::usage("social training needs --edges"))?;
    let emb_path = args
        .embeddings
        .as_deref()
        .ok_or_else(|| Error::usage("social training needs --embeddings"))?;
    let graph = load_edge_list(edges)?;
    let emb = NodeEmbedding::load(emb_path)?;
    let emb_hash = file_hash(emb_path)?;
    let resources = Arc::new(load_resources(
        args.vectors.as_deref(),
        args.brown.as_deref(),
        &args.dicts,
    )?);
    let k = args
        .k
        .or_else(|| {
            args.network
                .as_deref()
                .map(sociotag::social_attention::default_k)
        })
        .unwrap_or(3);
    let gate = parse_gate(args.gate.as_deref())?;
    let config = SocialConfig {
        k,
        gate,
        phi_init_scale: 0.01,
        basis: basis_config_from(args, resources.vector_dim),
    };
    let (model, trace) = train_social_traced::<F>(
        &train,
        &valid,
        &graph,
        &emb,
        resources,
        &config,
        ctx.root().child("social"),
    )?;
    let authors = train.annotated_authors();
    let util = expert_utilization(&model, &authors);
    write_model_report(
        ctx,
        &model.to_checkpoint(emb_hash),
        args,
        json!({
            "k": k,
            "best_epoch": trace.best_epoch,
            "best_val_acc": trace.best_val_acc(),
            "epoch_val_acc": trace.epoch_val_acc,
            "epoch_train_nll": trace.epoch_train_nll,
            "expert_mean_weight": util.mean_weight,
            "expert_argmax_share": util.argmax_share,
        }),
    )
}

fn parse_gate(gate: Option<&str>) -> Result<GateMode> {
    match gate.unwrap_or("softmax") {
        "softmax" => Ok(GateMode::Softmax),
        "sigmoid" => Ok(GateMode::Sigmoid),
        other => Err(Error::usage(format!(
            "gate must be softmax or sigmoid, got {other:?}"
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub corpus: PathBuf,
    pub tagset: PathBuf,
    pub vectors: Option<PathBuf>,
    pub brown: Option<PathBuf>,
    pub dicts: Vec<String>,
    pub embeddings: Option<PathBuf>,
    pub per_author: bool,
}

pub fn eval(ctx: &Ctx, args: &EvalArgs) -> Result<()> {
    dispatch_precision!(ctx, eval_cmd(ctx, args))
}

fn eval_cmd<F: Real>(ctx: &Ctx, args: &EvalArgs) -> Result<()> {
    let tagset = Tagset::from_file(&args.tagset)?;
    let corpus = load_corpus(&args.corpus, &tagset)?;
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    if ckpt.tagset != tagset.tags() {
        return Err(Error::usage(
            "checkpoint tagset does not match --tagset file",
        ));
    }
    let tagger: Box<dyn Tagger> = match ckpt.kind.as_str() {
        "naive" => Box::new(NaiveModel::from_checkpoint(&ckpt)?),
        "crf" => Box::new(CrfModel::<F>::from_checkpoint(&ckpt)?),
        "bilstm" => {
            let resources = Arc::new(load_resources(
                args.vectors.as_deref(),
                args.brown.as_deref(),
                &args.dicts,
            )?);
            Box::new(BasisTagger::<F>::from_checkpoint(&ckpt, resources)?)
        }
        "social" => {
            let emb_path = args
                .embeddings
                .as_deref()
                .ok_or_else(|| Error::usage("social checkpoints need --embeddings"))?;
            let emb = NodeEmbedding::load(emb_path)?;
            let resources = Arc::new(load_resources(
                args.vectors.as_deref(),
                args.brown.as_deref(),
                &args.dicts,
            )?);
            Box::new(SocialAttentionModel::<F>::from_checkpoint(
                &ckpt,
                resources,
                emb,
                file_hash(emb_path)?,
            )?)
        }
        other => return Err(Error::data(format!("unknown checkpoint kind {other:?}"))),
    };
    let accuracy = evaluate(tagger.as_ref(), &corpus)?;
    let per_author: Option<BTreeMap<String, f64>> = if args.per_author {
        Some(
            per_author_accuracy(tagger.as_ref(), &corpus)?
                .into_iter()
                .collect(),
        )
    } else {
        None
    };
    let report = Report::new(
        "eval",
        ctx.seed,
        json!({
            "checkpoint": args.checkpoint,
            "corpus": args.corpus,
            "kind": ckpt.kind,
            "precision": ctx.precision,
        }),
        json!({
            "accuracy": accuracy,
            "tokens": corpus.num_tokens(),
            "per_author": per_author,
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("accuracy {accuracy:.4}");
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AssortArgs {
    pub accuracies: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub tagset: Option<PathBuf>,
    pub edges: PathBuf,
    pub rewire_epochs: Vec<usize>,
    pub rewire_samples: usize,
    pub svg: bool,
}

/// Serializable summary of one observed-vs-rewired comparison.
#[derive(Serialize)]
struct ComparisonSummary {
    epochs: usize,
    observed: f64,
    sample_mean: f64,
    sample_std: f64,
    empirical_p: f64,
}

impl ComparisonSummary {
    fn from(cmp: &RewiredComparison) -> Self {
        ComparisonSummary {
            epochs: cmp.epochs_per_sample,
            observed: cmp.observed,
            sample_mean: cmp.sample_mean(),
            sample_std: cmp.sample_std(),
            empirical_p: cmp.empirical_p,
        }
    }
}

pub fn assort(ctx: &Ctx, args: &AssortArgs) -> Result<()> {
    let acc: HashMap<String, f64> = match (&args.accuracies, &args.checkpoint) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
        }
        (None, Some(ckpt_path)) => {
            let corpus_path = args
                .corpus
                .as_deref()
                .ok_or_else(|| Error::usage("--checkpoint accuracy needs --corpus"))?;
            let tagset_path = args
                .tagset
                .as_deref()
                .ok_or_else(|| Error::usage("--checkpoint accuracy needs --tagset"))?;
            let tagset = Tagset::from_file(tagset_path)?;
            let corpus = load_corpus(corpus_path, &tagset)?;
            let ckpt = Checkpoint::load(ckpt_path)?;
            let tagger: Box<dyn Tagger> = match ckpt.kind.as_str() {
                "naive" => Box::new(NaiveModel::from_checkpoint(&ckpt)?),
                "crf" => Box::new(CrfModel::<f64>::from_checkpoint(&ckpt)?),
                other => {
                    return Err(Error::usage(format!(
                        "assort --checkpoint supports naive or crf models, got {other:?}"
                    )))
                }
            };
            per_author_accuracy(tagger.as_ref(), &corpus)?
        }
        (None, None) => {
            return Err(Error::usage(
                "assort needs --accuracies or --checkpoint with --corpus/--tagset",
            ))
        }
    };
    let graph = load_edge_list(&args.edges)?;
    let root = ctx.root();
    let sweep: Vec<ComparisonSummary> = parallel_map(
        args.rewire_epochs.clone(),
        ctx.workers,
        |epochs| -> Result<ComparisonSummary> {
            let cmp = rewired_baseline(
                |g| assortativity(&acc, g),
                &graph,
                epochs,
                args.rewire_samples,
                root.child_indexed("sweep", epochs as u64),
            )?;
            Ok(ComparisonSummary::from(&cmp))
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;

    fs::create_dir_all(&ctx.out)?;
    let mut csv = String::from("epoch,observed,sample_mean,sample_std\n");
    for s in &sweep {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.epochs, s.observed, s.sample_mean, s.sample_std
        ));
    }
    let csv_path = ctx.out.join("assort.sweep.csv");
    fs::write(&csv_path, csv)?;
    let mut svg_path = None;
    if args.svg {
        let points: Vec<svg::SweepPoint> = sweep
            .iter()
            .map(|s| svg::SweepPoint {
                epochs: s.epochs,
                observed: s.observed,
                mean: s.sample_mean,
                std: s.sample_std,
            })
            .collect();
        let path = ctx.out.join("assort.svg");
        fs::write(
            &path,
            svg::sweep_chart(
                "accuracy assortativity vs degree-preserving rewiring",
                "mean squared accuracy difference",
                &points,
            ),
        )?;
        svg_path = Some(path);
    }
    let report = Report::new(
        "assort",
        ctx.seed,
        json!({
            "accuracies": args.accuracies,
            "checkpoint": args.checkpoint,
            "corpus": args.corpus,
            "edges": args.edges,
            "rewire_epochs": args.rewire_epochs,
            "rewire_samples": args.rewire_samples,
        }),
        json!({
            "observed": sweep.first().map(|s| s.observed),
            "sweep": sweep,
            "csv_file": csv_path,
            "svg_file": svg_path,
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Clone, Debug)]
pub struct AttnSimArgs {
    pub checkpoint: PathBuf,
    pub embeddings: PathBuf,
    pub edges: PathBuf,
    pub rewire_epochs: usize,
    pub rewire_samples: usize,
}

pub fn attn_sim(ctx: &Ctx, args: &AttnSimArgs) -> Result<()> {
    dispatch_precision!(ctx, attn_sim_cmd(ctx, args))
}

fn attn_sim_cmd<F: Real>(ctx: &Ctx, args: &AttnSimArgs) -> Result<()> {
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let emb = NodeEmbedding::load(&args.embeddings)?;
    let model = SocialAttentionModel::<F>::from_checkpoint(
        &ckpt,
        Arc::new(sociotag::corpus::LexicalResources::empty()),
        emb,
        file_hash(&args.embeddings)?,
    )?;
    let graph = load_edge_list(&args.edges)?;
    // The attention weights depend only on the embeddings, so compute
    // them once and evaluate the pair metric on each rewired graph.
    let mut weights: HashMap<String, Vec<f64>> = HashMap::new();
    for node in graph.nodes() {
        if model.node_embeddings.contains(node) {
            let pi = attention_weights(&model, node);
            weights.insert(node.clone(), pi.into_iter().map(Real::as_f64).collect());
        }
    }
    let cmp = rewired_baseline(
        |g| mean_abs_attention_diff(&weights, g),
        &graph,
        args.rewire_epochs,
        args.rewire_samples,
        ctx.root().child("attn-sim"),
    )?;
    let report = Report::new(
        "attn-sim",
        ctx.seed,
        json!({
            "checkpoint": args.checkpoint,
            "embeddings": args.embeddings,
            "edges": args.edges,
            "rewire_epochs": args.rewire_epochs,
            "rewire_samples": args.rewire_samples,
            "precision": ctx.precision,
        }),
        json!({
            "k": model.k,
            "comparison": ComparisonSummary::from(&cmp),
        }),
    );
    let path = report.write(&ctx.out)?;
    println!(
        "observed {:.4} vs rewired mean {:.4} (p = {:.4})",
        cmp.observed,
        cmp.sample_mean(),
        cmp.empirical_p
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn synth(ctx: &Ctx, config: &BenchmarkConfig) -> Result<()> {
    let bench = gen_benchmark(config, ctx.root().child("bench"))?;
    fs::create_dir_all(&ctx.out)?;
    save_corpus(&bench.corpus, &ctx.out.join("corpus.txt"))?;
    save_edge_list(&bench.graph, &ctx.out.join("edges.tsv"))?;
    let tagset_text: String = config.tags.iter().map(|t| format!("{t}\n")).collect();
    fs::write(ctx.out.join("tagset.txt"), tagset_text)?;
    let communities: BTreeMap<&String, &usize> = bench.communities.iter().collect();
    fs::write(
        ctx.out.join("communities.json"),
        serde_json::to_string_pretty(&communities)?,
    )?;
    let report = Report::new(
        "synth",
        ctx.seed,
        json!({"benchmark": config}),
        json!({
            "authors": config.authors,
            "graph_nodes": bench.graph.num_nodes(),
            "graph_edges": bench.graph.num_edges(),
            "tweets": bench.corpus.tweets.len(),
            "tokens": bench.corpus.num_tokens(),
        }),
    );
    let path = report.write(&ctx.out)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SynthE2eArgs {
    pub benchmark: BenchmarkConfig,
    pub repeats: usize,
    pub rewire_epochs: usize,
    pub rewire_samples: usize,
    pub k: usize,
    pub line_dim: usize,
    pub line_samples: Option<usize>,
    pub attn_epochs: usize,
    pub attn_lr: f64,
}

impl Default for SynthE2eArgs {
    fn default() -> Self {
        SynthE2eArgs {
            benchmark: BenchmarkConfig::default(),
            repeats: 10,
            rewire_epochs: 10,
            rewire_samples: 20,
            k: 2,
            line_dim: 16,
            line_samples: None,
            attn_epochs: 6,
            attn_lr: 1e-3,
        }
    }
}

pub fn synth_e2e(ctx: &Ctx, args: &SynthE2eArgs) -> Result<()> {
    dispatch_precision!(ctx, synth_e2e_cmd(ctx, args))
}

/// Synthetic basis configuration sized for the planted benchmark.
pub fn synth_basis_config(epochs: usize, lr: f64) -> BasisConfig {
    BasisConfig {
        char_emb_dim: 8,
        char_hidden: 8,
        word_emb_dim: 12,
        pretrained_dim: 0,
        word_hidden: 16,
        fc_dim: 16,
        dropout: 0.35,
        l2: 0.01,
        lr,
        epochs,
        patience: 3,
        unk_prob: 0.5,
    }
}

fn synth_e2e_cmd<F: Real>(ctx: &Ctx, args: &SynthE2eArgs) -> Result<()> {
    let root = ctx.root();
    let bench = gen_benchmark(&args.benchmark, root.child("bench"))?;
    let resources = Arc::new(sociotag::corpus::LexicalResources::empty());

    // Accuracy assortativity of a naive tagger trained on community 0.
    let community0: HashSet<String> = bench.community_authors(0).into_iter().collect();
    let train_a = bench.corpus.filter_by_author(|a| community0.contains(a));
    let naive = train_naive(&train_a)?;
    let acc = per_author_accuracy(&naive, &bench.corpus)?;
    let assort_cmp = rewired_baseline(
        |g| assortativity(&acc, g),
        &bench.graph,
        args.rewire_epochs,
        args.rewire_samples,
        root.child("assort"),
    )?;

    // Network-aligned vs size-matched random splits, CRF accuracy gap.
    let line_config = LineConfig {
        dim: args.line_dim,
        total_samples: args.line_samples,
        ..Default::default()
    };
    let emb = sociotag::node_embed::train_line(
        &bench.graph,
        &line_config,
        &mut root.child("line").rng(),
    )?;
    let crf_config = CrfConfig {
        epochs: 8,
        ..Default::default()
    };
    let accuracy_for = |spec: &SplitSpec, label: &str, r: usize| -> Result<f64> {
        let train = bench.corpus.filter_by_author(|a| spec.train.contains(a));
        let test = bench.corpus.filter_by_author(|a| spec.test.contains(a));
        let model = sociotag::taggers::train_crf::<F>(
            &train,
            None,
            &crf_config,
            root.child_indexed(&format!("crf-{label}"), r as u64),
        )?;
        evaluate(&model, &test)
    };
    let results: Vec<(f64, f64)> = parallel_map(
        (0..args.repeats).collect::<Vec<usize>>(),
        ctx.workers,
        |r| -> Result<(f64, f64)> {
            let net = network_split(
                &emb,
                &bench.corpus,
                root.child_indexed("net-split", r as u64),
            )?;
            let rand = paired_random_split(
                &bench.corpus,
                &net,
                root.child_indexed("rand-split", r as u64),
            )?;
            Ok((
                accuracy_for(&net, "net", r)?,
                accuracy_for(&rand, "rand", r)?,
            ))
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    let network_accs: Vec<f64> = results.iter().map(|(n, _)| *n).collect();
    let random_accs: Vec<f64> = results.iter().map(|(_, r)| *r).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (network_mean, random_mean) = (mean(&network_accs), mean(&random_accs));

    // Social attention with K experts; attention-distribution
    // similarity on observed vs rewired graphs.
    let authors = bench.corpus.annotated_authors();
    let attn_split = random_split(
        &bench.corpus,
        (authors.len() * 4) / 5,
        root.child("attn-split"),
    )?;
    let attn_train = bench
        .corpus
        .filter_by_author(|a| attn_split.train.contains(a));
    let attn_valid = bench
        .corpus
        .filter_by_author(|a| attn_split.test.contains(a));
    let social_config = SocialConfig {
        k: args.k,
        gate: GateMode::Softmax,
        phi_init_scale: 0.01,
        basis: synth_basis_config(args.attn_epochs, args.attn_lr),
    };
    let (model, trace) = train_social_traced::<F>(
        &attn_train,
        &attn_valid,
        &bench.graph,
        &emb,
        resources,
        &social_config,
        root.child("social"),
    )?;
    let mut weights: HashMap<String, Vec<f64>> = HashMap::new();
    for node in bench.graph.nodes() {
        if model.node_embeddings.contains(node) {
            let pi = attention_weights(&model, node);
            weights.insert(node.clone(), pi.into_iter().map(Real::as_f64).collect());
        }
    }
    let attn_cmp = rewired_baseline(
        |g| mean_abs_attention_diff(&weights, g),
        &bench.graph,
        args.rewire_epochs,
        args.rewire_samples,
        root.child("attn"),
    )?;
    let util = expert_utilization(&model, &authors);

    let report = Report::new(
        "synth-e2e",
        ctx.seed,
        json!({
            "benchmark": args.benchmark,
            "repeats": args.repeats,
            "rewire_epochs": args.rewire_epochs,
            "rewire_samples": args.rewire_samples,
            "k": args.k,
            "line_dim": args.line_dim,
            "line_samples": args.line_samples,
            "attn_epochs": args.attn_epochs,
            "attn_lr": args.attn_lr,
            "precision": ctx.precision,
        }),
        json!({
            "benchmark": {
                "graph_nodes": bench.graph.num_nodes(),
                "graph_edges": bench.graph.num_edges(),
                "tweets": bench.corpus.tweets.len(),
                "tokens": bench.corpus.num_tokens(),
            },
            "assortativity": ComparisonSummary::from(&assort_cmp),
            "split_gap": {
                "repeats": args.repeats,
                "network_mean": network_mean,
                "random_mean": random_mean,
                "gap": random_mean - network_mean,
                "network_accs": network_accs,
                "random_accs": random_accs,
            },
            "attention": {
                "k": args.k,
                "best_val_acc": trace.best_val_acc(),
                "expert_mean_weight": util.mean_weight,
                "comparison": ComparisonSummary::from(&attn_cmp),
            },
        }),
    );
    let path = report.write(&ctx.out)?;
    println!(
        "assortativity: observed {:.5} vs rewired {:.5} (p = {:.4})",
        assort_cmp.observed,
        assort_cmp.sample_mean(),
        assort_cmp.empirical_p
    );
    println!(
        "split gap: network {:.4} vs random {:.4} (gap {:.4})",
        network_mean,
        random_mean,
        random_mean - network_mean
    );
    println!(
        "attention: observed {:.4} vs rewired {:.4} (p = {:.4})",
        attn_cmp.observed,
        attn_cmp.sample_mean(),
        attn_cmp.empirical_p
    );
    println!("wrote {}", path.display());
    Ok(())
}
