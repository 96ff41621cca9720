//! Mixture-of-experts tagging with author-conditional attention.
//!
//! K basis taggers are combined per author: attention weights are
//! computed from frozen social-network node embeddings through a gating
//! layer (softmax by default, sigmoid optional), and the mixture row is
//! `p(y|x,a) = sum_k pi_{a,k} p_k(y|x)`. Authors absent from the network
//! share a single trainable fallback embedding. Experts, gate
//! parameters, and the fallback all train jointly on token NLL; the
//! embeddings stay fixed.
//!
//! The training engine here is shared with the standalone basis tagger
//! (a mixture with K = 1 and no gate), so those two runs are
//! bit-identical under one seed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LexicalResources, Tagset, Tweet};
use crate::error::{Error, Result};
use crate::node_embed::NodeEmbedding;
use crate::numerics::{
    softmax, softmax_backward, xavier_init, AdamConfig, Checkpoint, Gradients, ParamStore, Real,
    SeedStream, Tensor,
};
use crate::socialgraph::SocialGraph;
use crate::taggers::{
    arch_from_meta_internal, arch_meta_internal, argmax_rows_internal, backward_cached_internal,
    forward_cached_internal, BasisArch, BasisCache, BasisConfig, Tagger,
};

pub const ATT_PHI: &str = "att.phi";
pub const ATT_BIAS: &str = "att.bias";
pub const ATT_FALLBACK: &str = "att.fallback";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    Softmax,
    Sigmoid,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SocialConfig {
    pub k: usize,
    pub gate: GateMode,
    /// Gate weights start at this multiple of their Xavier scale so the
    /// initial attention is near-uniform and no expert starts dead.
    pub phi_init_scale: f64,
    pub basis: BasisConfig,
}

impl Default for SocialConfig {
    fn default() -> Self {
        SocialConfig {
            k: 3,
            gate: GateMode::Softmax,
            phi_init_scale: 0.01,
            basis: BasisConfig::default(),
        }
    }
}

/// Best-performing expert counts per network kind.
pub fn default_k(network: &str) -> usize {
    match network {
        "retweet" => 4,
        _ => 3,
    }
}

#[derive(Clone, Debug)]
pub struct SocialAttentionModel<F: Real> {
    pub k: usize,
    pub gate_mode: GateMode,
    pub archs: Vec<BasisArch>,
    pub store: ParamStore<F>,
    pub node_embeddings: NodeEmbedding,
    pub tagset: Tagset,
}

/// Attention weights `pi_a` for an author: softmax (or sigmoid) of
/// `phi_k . v_a + b_k`, with the trainable fallback embedding standing
/// in for authors absent from the network.
pub fn attention_weights<F: Real>(model: &SocialAttentionModel<F>, author_id: &str) -> Vec<F> {
    attention_state(
        &model.store,
        &model.node_embeddings,
        model.gate_mode,
        author_id,
    )
    .pi
}

/// Mixture rows `p(y_i | x, a)`; with the sigmoid gate the unnormalized
/// mixture is renormalized per token.
pub fn mixture_predict<F: Real>(
    model: &SocialAttentionModel<F>,
    tweet: &Tweet,
    author_id: &str,
) -> Result<Vec<Vec<F>>> {
    let pi = attention_weights(model, author_id);
    let expert_rows: Vec<Vec<Vec<F>>> = model
        .archs
        .iter()
        .map(|arch| forward_cached_internal(arch, &model.store, tweet, None).map(|c| c.probs))
        .collect::<Result<_>>()?;
    Ok(mix_probability_rows(
        &pi,
        &expert_rows,
        model.gate_mode == GateMode::Sigmoid,
    ))
}

/// `sum_k pi_k p_k` per token; `renormalize` divides each row by its sum
/// (sigmoid gate).
pub fn mix_probability_rows<F: Real>(
    pi: &[F],
    expert_rows: &[Vec<Vec<F>>],
    renormalize: bool,
) -> Vec<Vec<F>> {
    debug_assert_eq!(pi.len(), expert_rows.len());
    let t_len = expert_rows[0].len();
    let n_tags = if t_len > 0 {
        expert_rows[0][0].len()
    } else {
        0
    };
    let mut rows = vec![vec![F::zero(); n_tags]; t_len];
    for (weight, expert) in pi.iter().zip(expert_rows) {
        for (mix, row) in rows.iter_mut().zip(expert) {
            for (m, &p) in mix.iter_mut().zip(row) {
                *m += *weight * p;
            }
        }
    }
    if renormalize {
        for row in &mut rows {
            let sum: F = row.iter().copied().sum();
            if sum > F::zero() {
                for m in row.iter_mut() {
                    *m = *m / sum;
                }
            }
        }
    }
    rows
}

impl<F: Real> Tagger for SocialAttentionModel<F> {
    fn tag_tweet(&self, tweet: &Tweet) -> Vec<usize> {
        let rows = mixture_predict(self, tweet, &tweet.author_id)
            .expect("architecture dimensions are consistent");
        argmax_rows_internal(&rows)
    }

    fn tagset(&self) -> &Tagset {
        &self.tagset
    }
}

/// Mean attention weight per expert plus the share of authors whose
/// top-weighted expert is each one.
#[derive(Clone, Debug, Serialize)]
pub struct ExpertUtilization {
    pub mean_weight: Vec<f64>,
    pub argmax_share: Vec<f64>,
}

pub fn expert_utilization<F: Real>(
    model: &SocialAttentionModel<F>,
    authors: &[String],
) -> ExpertUtilization {
    let k = model.k;
    let mut mean_weight = vec![0.0; k];
    let mut argmax_share = vec![0.0; k];
    for author in authors {
        let pi = attention_weights(model, author);
        let mut best = 0;
        for (i, w) in pi.iter().enumerate() {
            mean_weight[i] += w.as_f64();
            if *w > pi[best] {
                best = i;
            }
        }
        argmax_share[best] += 1.0;
    }
    let n = authors.len().max(1) as f64;
    mean_weight.iter_mut().for_each(|x| *x /= n);
    argmax_share.iter_mut().for_each(|x| *x /= n);
    ExpertUtilization {
        mean_weight,
        argmax_share,
    }
}

/// Joint training of K basis taggers and the attention gate.
pub fn train_social<F: Real>(
    train: &Corpus,
    valid: &Corpus,
    graph: &SocialGraph,
    node_emb: &NodeEmbedding,
    resources: Arc<LexicalResources>,
    config: &SocialConfig,
    seed: SeedStream,
) -> Result<SocialAttentionModel<F>> {
    train_social_traced(train, valid, graph, node_emb, resources, config, seed).map(|(m, _)| m)
}

pub fn train_social_traced<F: Real>(
    train: &Corpus,
    valid: &Corpus,
    graph: &SocialGraph,
    node_emb: &NodeEmbedding,
    resources: Arc<LexicalResources>,
    config: &SocialConfig,
    seed: SeedStream,
) -> Result<(SocialAttentionModel<F>, TrainTrace)> {
    if config.k == 0 {
        return Err(Error::usage("K must be at least 1"));
    }
    if node_emb.is_empty() {
        return Err(Error::data("node embedding is empty"));
    }
    for author in node_emb.vectors.keys() {
        if !graph.contains_node(author) {
            return Err(Error::data(format!(
                "embedded author {author:?} is not a node of the graph"
            )));
        }
    }
    let archs: Vec<BasisArch> = (0..config.k)
        .map(|k| {
            BasisArch::build(
                train,
                Arc::clone(&resources),
                config.basis.clone(),
                &format!("b{k}."),
            )
        })
        .collect::<Result<_>>()?;
    let gate = GateSetup {
        emb: node_emb,
        mode: config.gate,
        phi_scale: config.phi_init_scale,
    };
    let (store, trace) = train_engine(&archs, Some(&gate), train, valid, seed)?;
    Ok((
        SocialAttentionModel {
            k: config.k,
            gate_mode: config.gate,
            archs,
            store,
            node_embeddings: node_emb.clone(),
            tagset: train.tagset.clone(),
        },
        trace,
    ))
}

/// Per-epoch diagnostics from the training engine. Validation accuracy
/// index 0 is the untrained model; `best_epoch` indexes that vector.
#[derive(Clone, Debug, Default)]
pub struct TrainTrace {
    pub epoch_train_nll: Vec<f64>,
    pub epoch_val_acc: Vec<f64>,
    pub best_epoch: usize,
}

impl TrainTrace {
    pub fn best_val_acc(&self) -> f64 {
        self.epoch_val_acc[self.best_epoch]
    }
}

pub(crate) struct GateSetup<'a> {
    pub emb: &'a NodeEmbedding,
    pub mode: GateMode,
    pub phi_scale: f64,
}

struct AttentionState<F> {
    pi: Vec<F>,
    v: Vec<F>,
    used_fallback: bool,
}

fn attention_state<F: Real>(
    store: &ParamStore<F>,
    emb: &NodeEmbedding,
    mode: GateMode,
    author_id: &str,
) -> AttentionState<F> {
    let phi = store.tensor(ATT_PHI);
    let bias = store.tensor(ATT_BIAS).as_slice();
    let (v, used_fallback): (Vec<F>, bool) = match emb.get(author_id) {
        Some(vec) => (vec.iter().map(|&x| F::from_f64(x)).collect(), false),
        None => (store.tensor(ATT_FALLBACK).as_slice().to_vec(), true),
    };
    let mut logits = phi.matvec(&v);
    for (l, &b) in logits.iter_mut().zip(bias) {
        *l += b;
    }
    let pi = match mode {
        GateMode::Softmax => softmax(&logits),
        GateMode::Sigmoid => logits
            .iter()
            .map(|&l| crate::numerics::sigmoid(l))
            .collect(),
    };
    AttentionState {
        pi,
        v,
        used_fallback,
    }
}

fn gold_ids(tweet: &Tweet, tagset: &Tagset) -> Vec<usize> {
    tweet
        .tags
        .as_ref()
        .expect("labeled")
        .iter()
        .map(|t| tagset.index_of(t).expect("validated at load"))
        .collect()
}

/// Deterministic (dropout-off) mixture loss of one labeled tweet: token
/// NLL plus `l2 ||theta||^2` over the whole store. `gate: None` is the
/// standalone single-expert case.
pub fn mixture_sentence_loss<F: Real>(
    archs: &[BasisArch],
    store: &ParamStore<F>,
    gate: Option<(&NodeEmbedding, GateMode)>,
    tweet: &Tweet,
    l2: f64,
) -> Result<F> {
    let gold = gold_ids(tweet, &archs[0].tagset);
    let pi: Vec<F> = match gate {
        Some((emb, mode)) => attention_state(store, emb, mode, &tweet.author_id).pi,
        None => vec![F::one(); archs.len()],
    };
    let expert_rows: Vec<Vec<Vec<F>>> = archs
        .iter()
        .map(|arch| forward_cached_internal(arch, store, tweet, None).map(|c| c.probs))
        .collect::<Result<_>>()?;
    let sigmoid_norm = matches!(gate, Some((_, GateMode::Sigmoid)));
    let s: F = pi.iter().copied().sum();
    let mut nll = F::zero();
    for (i, &g) in gold.iter().enumerate() {
        let mut mix = F::zero();
        for (weight, rows) in pi.iter().zip(&expert_rows) {
            mix += *weight * rows[i][g];
        }
        nll -= mix.ln();
        if sigmoid_norm {
            nll += s.ln();
        }
    }
    Ok(nll + F::from_f64(l2) * store.l2_norm_sq())
}

/// Analytic gradients of [`mixture_sentence_loss`] for every parameter
/// in the store (experts, gate, fallback; L2 included).
pub fn mixture_sentence_grads<F: Real>(
    archs: &[BasisArch],
    store: &ParamStore<F>,
    gate: Option<(&NodeEmbedding, GateMode)>,
    tweet: &Tweet,
    l2: f64,
) -> Result<(F, Gradients<F>)> {
    let gold = gold_ids(tweet, &archs[0].tagset);
    let mut grads = Gradients::zeros_like(store);
    let caches: Vec<BasisCache<F>> = archs
        .iter()
        .map(|arch| forward_cached_internal(arch, store, tweet, None))
        .collect::<Result<_>>()?;
    let att = gate.map(|(emb, mode)| attention_state(store, emb, mode, &tweet.author_id));
    let nll = accumulate_mixture_grads(
        archs,
        store,
        &caches,
        att.as_ref(),
        gate.map(|(_, m)| m),
        &gold,
        &mut grads,
    );
    grads.add_l2_from(store, l2);
    Ok((nll + F::from_f64(l2) * store.l2_norm_sq(), grads))
}

/// Inner step shared by training and the gradient diagnostics: mixture
/// NLL and gradients for one sentence from per-expert forward caches,
/// backpropagating through the gate when present.
fn accumulate_mixture_grads<F: Real>(
    archs: &[BasisArch],
    store: &ParamStore<F>,
    caches: &[BasisCache<F>],
    att: Option<&AttentionState<F>>,
    gate_mode: Option<GateMode>,
    gold: &[usize],
    grads: &mut Gradients<F>,
) -> F {
    let k_experts = archs.len();
    let pi: Vec<F> = match att {
        Some(state) => state.pi.clone(),
        None => vec![F::one(); k_experts],
    };
    let sigmoid_norm = matches!(gate_mode, Some(GateMode::Sigmoid));
    let s: F = pi.iter().copied().sum();

    let mut nll = F::zero();
    let mut dpi = vec![F::zero(); k_experts];
    let mut dlogits: Vec<Vec<Vec<F>>> = (0..k_experts)
        .map(|_| Vec::with_capacity(gold.len()))
        .collect();
    for (i, &g) in gold.iter().enumerate() {
        let mut mix = F::zero();
        for (weight, cache) in pi.iter().zip(caches) {
            mix += *weight * cache.probs[i][g];
        }
        nll -= mix.ln();
        if sigmoid_norm {
            nll += s.ln();
        }
        for k in 0..k_experts {
            let row = &caches[k].probs[i];
            // Responsibility of expert k for the gold tag; the expert's
            // output-logit gradient is w * (p - onehot).
            let w = pi[k] * row[g] / mix;
            let mut d: Vec<F> = row.iter().map(|&p| w * p).collect();
            d[g] -= w;
            dlogits[k].push(d);
            dpi[k] -= row[g] / mix;
            if sigmoid_norm {
                dpi[k] += F::one() / s;
            }
        }
    }
    for (k, arch) in archs.iter().enumerate() {
        backward_cached_internal(arch, store, &caches[k], &dlogits[k], grads);
    }

    if let (Some(state), Some(mode)) = (att, gate_mode) {
        let dlogits_att: Vec<F> = match mode {
            GateMode::Softmax => softmax_backward(&state.pi, &dpi),
            GateMode::Sigmoid => state
                .pi
                .iter()
                .zip(&dpi)
                .map(|(&p, &d)| d * p * (F::one() - p))
                .collect(),
        };
        let phi = store.tensor(ATT_PHI);
        grads
            .tensor_mut(ATT_PHI)
            .add_outer(&dlogits_att, &state.v, F::one());
        for (g, &d) in grads
            .tensor_mut(ATT_BIAS)
            .as_mut_slice()
            .iter_mut()
            .zip(&dlogits_att)
        {
            *g += d;
        }
        if state.used_fallback {
            let dv = phi.t_matvec(&dlogits_att);
            for (g, &d) in grads
                .tensor_mut(ATT_FALLBACK)
                .as_mut_slice()
                .iter_mut()
                .zip(&dv)
            {
                *g += d;
            }
        }
    }
    nll
}

fn predict_mixture_tags<F: Real>(
    archs: &[BasisArch],
    store: &ParamStore<F>,
    gate: Option<&GateSetup>,
    tweet: &Tweet,
) -> Result<Vec<usize>> {
    let pi: Vec<F> = match gate {
        Some(g) => attention_state(store, g.emb, g.mode, &tweet.author_id).pi,
        None => vec![F::one(); archs.len()],
    };
    let expert_rows: Vec<Vec<Vec<F>>> = archs
        .iter()
        .map(|arch| forward_cached_internal(arch, store, tweet, None).map(|c| c.probs))
        .collect::<Result<_>>()?;
    let renorm = gate.map(|g| g.mode) == Some(GateMode::Sigmoid);
    Ok(argmax_rows_internal(&mix_probability_rows(
        &pi,
        &expert_rows,
        renorm,
    )))
}

fn evaluate_mixture<F: Real>(
    archs: &[BasisArch],
    store: &ParamStore<F>,
    gate: Option<&GateSetup>,
    corpus: &Corpus,
) -> Result<f64> {
    let tagset = &archs[0].tagset;
    let mut correct = 0usize;
    let mut total = 0usize;
    for tweet in corpus.labeled_tweets() {
        let gold = gold_ids(tweet, tagset);
        let predicted = predict_mixture_tags(archs, store, gate, tweet)?;
        correct += gold.iter().zip(&predicted).filter(|(g, p)| g == p).count();
        total += gold.len();
    }
    if total == 0 {
        return Err(Error::usage("validation corpus has no labeled tokens"));
    }
    Ok(correct as f64 / total as f64)
}

/// Shared Adam training loop over one parameter store holding all
/// experts (and the gate when present). Hyperparameters come from the
/// expert configuration, which all experts share; one sentence per
/// step; early stopping on validation token accuracy; returns the
/// best-validation parameters.
pub(crate) fn train_engine<F: Real>(
    archs: &[BasisArch],
    gate: Option<&GateSetup>,
    train: &Corpus,
    valid: &Corpus,
    seed: SeedStream,
) -> Result<(ParamStore<F>, TrainTrace)> {
    assert!(
        gate.is_some() || archs.len() == 1,
        "gate-free training is single-expert"
    );
    let hyper = archs[0].config.clone();
    let sentences: Vec<&Tweet> = train.labeled_tweets().collect();
    if sentences.is_empty() {
        return Err(Error::usage("training corpus has no labeled tweets"));
    }
    let tagset = &archs[0].tagset;
    let gold: Vec<Vec<usize>> = sentences.iter().map(|t| gold_ids(t, tagset)).collect();

    let mut store: ParamStore<F> = ParamStore::new();
    for (k, arch) in archs.iter().enumerate() {
        let mut rng = seed.child(&format!("expert{k}/init")).rng();
        arch.init_params(&mut store, &mut rng);
    }
    if let Some(g) = gate {
        let mut rng = seed.child("attention/init").rng();
        let mut phi: Tensor<F> = xavier_init(archs.len(), g.emb.dim, &mut rng);
        let scale = F::from_f64(g.phi_scale);
        for x in phi.as_mut_slice() {
            *x *= scale;
        }
        store.insert(ATT_PHI, phi);
        store.insert(ATT_BIAS, Tensor::vector(archs.len()));
        store.insert(ATT_FALLBACK, xavier_init(g.emb.dim, 1, &mut rng));
    }

    let train_authors: Vec<String> = {
        let mut authors: Vec<String> = sentences.iter().map(|t| t.author_id.clone()).collect();
        authors.sort();
        authors.dedup();
        authors
    };

    let adam = AdamConfig::with_lr(hyper.lr);
    let mut grads = Gradients::zeros_like(&store);
    let mut trace = TrainTrace::default();
    let initial_acc = evaluate_mixture(archs, &store, gate, valid)?;
    trace.epoch_val_acc.push(initial_acc);
    let mut best = (initial_acc, store.clone(), 0usize);
    let mut since_best = 0usize;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for epoch in 0..hyper.epochs {
        let mut rng = seed.child(&format!("epoch{epoch}/shuffle")).rng();
        crate::clustering::shuffle(&mut order, &mut rng);
        let mut nll_sum = 0.0;
        for &s in &order {
            let tweet = sentences[s];
            let caches: Vec<BasisCache<F>> = archs
                .iter()
                .enumerate()
                .map(|(k, arch)| {
                    let mut rng = seed
                        .child(&format!("epoch{epoch}/tweet{s}/expert{k}"))
                        .rng();
                    forward_cached_internal(arch, &store, tweet, Some(&mut rng))
                })
                .collect::<Result<_>>()?;
            let att = gate.map(|g| attention_state(&store, g.emb, g.mode, &tweet.author_id));
            grads.zero_all();
            let nll = accumulate_mixture_grads(
                archs,
                &store,
                &caches,
                att.as_ref(),
                gate.map(|g| g.mode),
                &gold[s],
                &mut grads,
            );
            grads.add_l2_from(&store, hyper.l2);
            store.adam_step(&grads, &adam)?;
            nll_sum += nll.as_f64();
        }
        trace.epoch_train_nll.push(nll_sum / sentences.len() as f64);

        if let Some(g) = gate {
            if archs.len() > 1 {
                log_utilization(archs.len(), &store, g, &train_authors, epoch);
            }
        }

        let acc = evaluate_mixture(archs, &store, gate, valid)?;
        trace.epoch_val_acc.push(acc);
        if acc > best.0 {
            best = (acc, store.clone(), epoch + 1);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > hyper.patience {
                break;
            }
        }
    }
    trace.best_epoch = best.2;
    Ok((best.1, trace))
}

fn log_utilization<F: Real>(
    k_experts: usize,
    store: &ParamStore<F>,
    gate: &GateSetup,
    authors: &[String],
    epoch: usize,
) {
    let mut means = vec![0.0f64; k_experts];
    for author in authors {
        let state = attention_state::<F>(store, gate.emb, gate.mode, author);
        for (m, w) in means.iter_mut().zip(&state.pi) {
            *m += w.as_f64();
        }
    }
    means
        .iter_mut()
        .for_each(|m| *m /= authors.len().max(1) as f64);
    log::debug!("epoch {epoch}: expert mean attention weights {means:?}");
    let floor = 1.0 / (10.0 * k_experts as f64);
    for (k, &m) in means.iter().enumerate() {
        if m < floor {
            log::warn!(
                "epoch {epoch}: expert {k} mean attention weight {m:.4} is below 1/(10K) = {floor:.4}; it may be going dead"
            );
        }
    }
}

impl<F: Real> SocialAttentionModel<F> {
    /// `embedding_hash` identifies the node-embedding file this model
    /// was trained with (the embeddings themselves are not stored).
    pub fn to_checkpoint(&self, embedding_hash: u64) -> Checkpoint {
        let arch_metas: Vec<serde_json::Value> =
            self.archs.iter().map(arch_meta_internal).collect();
        let config = serde_json::json!({
            "k": self.k,
            "gate": self.gate_mode,
            "basis": self.archs[0].config,
        });
        let mut ckpt = Checkpoint::new(
            "social",
            config,
            self.tagset.tags().to_vec(),
            serde_json::json!({
                "embedding_hash": embedding_hash,
                "embedding_dim": self.node_embeddings.dim,
                "archs": arch_metas,
            }),
        );
        ckpt.insert_store(&self.store);
        ckpt
    }

    pub fn from_checkpoint(
        ckpt: &Checkpoint,
        resources: Arc<LexicalResources>,
        node_embeddings: NodeEmbedding,
        embedding_hash: u64,
    ) -> Result<SocialAttentionModel<F>> {
        if ckpt.kind != "social" {
            return Err(Error::data(format!(
                "expected a social checkpoint, found {:?}",
                ckpt.kind
            )));
        }
        let stored_hash: u64 = serde_json::from_value(ckpt.meta["embedding_hash"].clone())?;
        if stored_hash != embedding_hash {
            return Err(Error::data(format!(
                "embedding file hash {embedding_hash} does not match checkpoint ({stored_hash})"
            )));
        }
        let k: usize = serde_json::from_value(ckpt.config["k"].clone())?;
        let gate_mode: GateMode = serde_json::from_value(ckpt.config["gate"].clone())?;
        let basis: BasisConfig = serde_json::from_value(ckpt.config["basis"].clone())?;
        let tagset = Tagset::new(ckpt.tagset.clone())?;
        let arch_metas: Vec<serde_json::Value> =
            serde_json::from_value(ckpt.meta["archs"].clone())?;
        let archs = arch_metas
            .iter()
            .map(|meta| {
                arch_from_meta_internal(basis.clone(), tagset.clone(), meta, Arc::clone(&resources))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SocialAttentionModel {
            k,
            gate_mode,
            archs,
            store: ckpt.to_store(),
            node_embeddings,
            tagset,
        })
    }
}
