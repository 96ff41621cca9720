#![allow(clippy::needless_range_loop)] // index-form DP over tag lattices

//! Lexical feature-rich linear-chain CRF tagger.
//!
//! Emission scores are sums of per-position indicator-feature weights;
//! transitions carry tag-pair, start, and stop weights. Training
//! minimizes L2-regularized NLL with Adam (one sentence per step),
//! with gradients from forward-backward expectations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tagset, Tweet};
use crate::error::{Error, Result};
use crate::numerics::{
    config_hash, log_sum_exp, AdamConfig, Checkpoint, Gradients, ParamStore, Real, SeedStream,
    Tensor,
};

use super::Tagger;

/// Parameter names a CRF store carries: emission weights
/// (features x tags), tag-pair transitions, and start/stop scores.
pub const CRF_EMIT: &str = "crf.emit";
pub const CRF_TRANS: &str = "crf.trans";
pub const CRF_START: &str = "crf.start";
pub const CRF_STOP: &str = "crf.stop";

const EMIT: &str = CRF_EMIT;
const TRANS: &str = CRF_TRANS;
const START: &str = CRF_START;
const STOP: &str = CRF_STOP;

/// Feature strings for position `i`: the five window words (boundary
/// markers beyond the edges), their prefixes and suffixes of lengths
/// 1-4, and orthographic flags on the current word.
pub fn extract_crf_features(tweet: &Tweet, i: usize) -> Result<Vec<String>> {
    if i >= tweet.len() {
        return Err(Error::usage(format!(
            "feature position {i} out of range for {} tokens",
            tweet.len()
        )));
    }
    let mut feats = Vec::with_capacity(48);
    for off in [-2i64, -1, 0, 1, 2] {
        let name = offset_name(off);
        let word = window_word(tweet, i, off);
        feats.push(format!("w{name}={word}"));
        if word != BOUNDARY_LEFT && word != BOUNDARY_RIGHT {
            let chars: Vec<char> = word.chars().collect();
            for len in 1..=4usize.min(chars.len()) {
                let prefix: String = chars[..len].iter().collect();
                let suffix: String = chars[chars.len() - len..].iter().collect();
                feats.push(format!("p{len}@{name}={prefix}"));
                feats.push(format!("s{len}@{name}={suffix}"));
            }
        }
    }
    let cur = &tweet.tokens[i].normalized;
    if cur.contains('-') {
        feats.push("f=hyphen".to_string());
    }
    if cur.contains('@') {
        feats.push("f=mention".to_string());
    }
    if cur.starts_with('#') {
        feats.push("f=hashtag".to_string());
    }
    if cur.chars().any(|c| c.is_ascii_digit()) {
        feats.push("f=digit".to_string());
    }
    Ok(feats)
}

const BOUNDARY_LEFT: &str = "<S>";
const BOUNDARY_RIGHT: &str = "</S>";

fn window_word(tweet: &Tweet, i: usize, off: i64) -> &str {
    let pos = i as i64 + off;
    if pos < 0 {
        BOUNDARY_LEFT
    } else if pos >= tweet.len() as i64 {
        BOUNDARY_RIGHT
    } else {
        &tweet.tokens[pos as usize].normalized
    }
}

fn offset_name(off: i64) -> String {
    if off > 0 {
        format!("+{off}")
    } else {
        off.to_string()
    }
}

/// Log-partition of a sentence by the forward recursion in log space.
pub fn crf_log_partition<F: Real>(
    emissions: &[Vec<F>],
    trans: &Tensor<F>,
    start: &[F],
    stop: &[F],
) -> F {
    let n_tags = start.len();
    debug_assert!(!emissions.is_empty());
    let mut alpha: Vec<F> = (0..n_tags).map(|t| start[t] + emissions[0][t]).collect();
    let mut scratch = vec![F::zero(); n_tags];
    for emit in emissions.iter().skip(1) {
        let mut next = vec![F::zero(); n_tags];
        for (t, next_t) in next.iter_mut().enumerate() {
            for p in 0..n_tags {
                scratch[p] = alpha[p] + trans.get(p, t);
            }
            *next_t = log_sum_exp(&scratch) + emit[t];
        }
        alpha = next;
    }
    for (t, a) in alpha.iter().enumerate() {
        scratch[t] = *a + stop[t];
    }
    log_sum_exp(&scratch)
}

/// Highest-scoring tag sequence; ties break toward the lower tag index.
pub fn viterbi_decode<F: Real>(
    emissions: &[Vec<F>],
    trans: &Tensor<F>,
    start: &[F],
    stop: &[F],
) -> Vec<usize> {
    let n_tags = start.len();
    let t_len = emissions.len();
    if t_len == 0 {
        return Vec::new();
    }
    let mut delta: Vec<F> = (0..n_tags).map(|t| start[t] + emissions[0][t]).collect();
    let mut backptr: Vec<Vec<usize>> = Vec::with_capacity(t_len);
    for emit in emissions.iter().skip(1) {
        let mut next = vec![F::neg_infinity(); n_tags];
        let mut ptr = vec![0usize; n_tags];
        for t in 0..n_tags {
            let mut best = delta[0] + trans.get(0, t);
            let mut best_p = 0;
            for p in 1..n_tags {
                let score = delta[p] + trans.get(p, t);
                if score > best {
                    best = score;
                    best_p = p;
                }
            }
            next[t] = best + emit[t];
            ptr[t] = best_p;
        }
        delta = next;
        backptr.push(ptr);
    }
    let mut best_t = 0;
    let mut best = delta[0] + stop[0];
    for (t, d) in delta.iter().enumerate().skip(1) {
        let score = *d + stop[t];
        if score > best {
            best = score;
            best_t = t;
        }
    }
    let mut path = vec![best_t];
    for ptr in backptr.iter().rev() {
        path.push(ptr[*path.last().unwrap()]);
    }
    path.reverse();
    path
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrfConfig {
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    /// Early-stopping patience in epochs without validation improvement.
    pub patience: usize,
}

impl Default for CrfConfig {
    fn default() -> Self {
        CrfConfig {
            epochs: 10,
            lr: 0.05,
            l2: 0.01,
            patience: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CrfModel<F: Real> {
    tagset: Tagset,
    feature_index: HashMap<String, usize>,
    store: ParamStore<F>,
    config: CrfConfig,
}

/// Mean training NLL and validation accuracy per epoch.
#[derive(Clone, Debug, Default)]
pub struct CrfTrace {
    pub epoch_nll: Vec<f64>,
    pub epoch_val_acc: Vec<f64>,
}

pub fn train_crf<F: Real>(
    train: &Corpus,
    valid: Option<&Corpus>,
    config: &CrfConfig,
    seed: SeedStream,
) -> Result<CrfModel<F>> {
    train_crf_traced(train, valid, config, seed).map(|(m, _)| m)
}

pub fn train_crf_traced<F: Real>(
    train: &Corpus,
    valid: Option<&Corpus>,
    config: &CrfConfig,
    seed: SeedStream,
) -> Result<(CrfModel<F>, CrfTrace)> {
    let sentences: Vec<&Tweet> = train.labeled_tweets().collect();
    if sentences.is_empty() {
        return Err(Error::usage("train_crf needs a labeled corpus"));
    }
    let n_tags = train.tagset.len();

    // Intern the training feature space.
    let mut feature_index: HashMap<String, usize> = HashMap::new();
    let mut feats_per_sentence: Vec<Vec<Vec<usize>>> = Vec::with_capacity(sentences.len());
    let mut gold_per_sentence: Vec<Vec<usize>> = Vec::with_capacity(sentences.len());
    for tweet in &sentences {
        let mut per_pos = Vec::with_capacity(tweet.len());
        for i in 0..tweet.len() {
            let names = extract_crf_features(tweet, i)?;
            let ids = names
                .into_iter()
                .map(|name| {
                    let next = feature_index.len();
                    *feature_index.entry(name).or_insert(next)
                })
                .collect();
            per_pos.push(ids);
        }
        feats_per_sentence.push(per_pos);
        gold_per_sentence.push(gold_ids(tweet, &train.tagset));
    }

    let mut store: ParamStore<F> = ParamStore::new();
    store.insert(EMIT, Tensor::zeros(feature_index.len(), n_tags));
    store.insert(TRANS, Tensor::zeros(n_tags, n_tags));
    store.insert(START, Tensor::vector(n_tags));
    store.insert(STOP, Tensor::vector(n_tags));

    let adam = AdamConfig::with_lr(config.lr);
    let mut grads = Gradients::zeros_like(&store);
    let mut trace = CrfTrace::default();
    let mut best: Option<(f64, ParamStore<F>)> = None;
    let mut since_best = 0usize;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = seed.child(&format!("epoch{epoch}/shuffle")).rng();
        crate::clustering::shuffle(&mut order, &mut rng);
        let mut nll_sum = 0.0;
        for &s in &order {
            grads.zero_all();
            let nll = crf_sentence_grads(
                &feats_per_sentence[s],
                &gold_per_sentence[s],
                &store,
                n_tags,
                &mut grads,
            );
            grads.add_l2_from(&store, config.l2);
            store.adam_step(&grads, &adam)?;
            nll_sum += nll.as_f64();
        }
        trace.epoch_nll.push(nll_sum / sentences.len() as f64);

        if let Some(valid) = valid {
            let model = CrfModel {
                tagset: train.tagset.clone(),
                feature_index: feature_index.clone(),
                store: store.clone(),
                config: config.clone(),
            };
            let acc = super::evaluate(&model, valid)?;
            trace.epoch_val_acc.push(acc);
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, store.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > config.patience {
                    break;
                }
            }
        }
    }
    let store = best.map(|(_, s)| s).unwrap_or(store);
    Ok((
        CrfModel {
            tagset: train.tagset.clone(),
            feature_index,
            store,
            config: config.clone(),
        },
        trace,
    ))
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

/// Emission score rows for interned features.
fn emissions_from<F: Real>(feats: &[Vec<usize>], emit: &Tensor<F>, n_tags: usize) -> Vec<Vec<F>> {
    feats
        .iter()
        .map(|active| {
            let mut row = vec![F::zero(); n_tags];
            for &f in active {
                for (r, w) in row.iter_mut().zip(emit.row(f)) {
                    *r += *w;
                }
            }
            row
        })
        .collect()
}

fn gold_score<F: Real>(
    emissions: &[Vec<F>],
    gold: &[usize],
    trans: &Tensor<F>,
    start: &[F],
    stop: &[F],
) -> F {
    let mut score = start[gold[0]] + emissions[0][gold[0]];
    for i in 1..gold.len() {
        score += trans.get(gold[i - 1], gold[i]) + emissions[i][gold[i]];
    }
    score + stop[*gold.last().unwrap()]
}

/// Sentence NLL (without the L2 term) for a store holding the CRF
/// parameter names.
pub fn crf_sentence_nll<F: Real>(
    feats: &[Vec<usize>],
    gold: &[usize],
    store: &ParamStore<F>,
    n_tags: usize,
) -> F {
    let emit = store.tensor(EMIT);
    let trans = store.tensor(TRANS);
    let start = store.tensor(START).as_slice();
    let stop = store.tensor(STOP).as_slice();
    let emissions = emissions_from(feats, emit, n_tags);
    crf_log_partition(&emissions, trans, start, stop)
        - gold_score(&emissions, gold, trans, start, stop)
}

/// Accumulates NLL gradients (expected minus observed feature counts)
/// from forward-backward marginals; returns the sentence NLL.
pub fn crf_sentence_grads<F: Real>(
    feats: &[Vec<usize>],
    gold: &[usize],
    store: &ParamStore<F>,
    n_tags: usize,
    grads: &mut Gradients<F>,
) -> F {
    let emit = store.tensor(EMIT);
    let trans = store.tensor(TRANS);
    let start = store.tensor(START).as_slice();
    let stop = store.tensor(STOP).as_slice();
    let emissions = emissions_from(feats, emit, n_tags);
    let t_len = emissions.len();

    // Forward and backward tables in log space.
    let mut alpha = vec![vec![F::zero(); n_tags]; t_len];
    for t in 0..n_tags {
        alpha[0][t] = start[t] + emissions[0][t];
    }
    let mut scratch = vec![F::zero(); n_tags];
    for i in 1..t_len {
        for t in 0..n_tags {
            for p in 0..n_tags {
                scratch[p] = alpha[i - 1][p] + trans.get(p, t);
            }
            alpha[i][t] = log_sum_exp(&scratch) + emissions[i][t];
        }
    }
    let mut beta = vec![vec![F::zero(); n_tags]; t_len];
    beta[t_len - 1].copy_from_slice(stop);
    for i in (0..t_len - 1).rev() {
        for p in 0..n_tags {
            for t in 0..n_tags {
                scratch[t] = trans.get(p, t) + emissions[i + 1][t] + beta[i + 1][t];
            }
            beta[i][p] = log_sum_exp(&scratch);
        }
    }
    for t in 0..n_tags {
        scratch[t] = alpha[t_len - 1][t] + stop[t];
    }
    let log_z = log_sum_exp(&scratch);

    // Unary marginals drive emission/start/stop gradients.
    for i in 0..t_len {
        for t in 0..n_tags {
            let mut marginal = (alpha[i][t] + beta[i][t] - log_z).exp();
            if t == gold[i] {
                marginal -= F::one();
            }
            if marginal != F::zero() {
                for &f in &feats[i] {
                    let g = grads.tensor_mut(EMIT);
                    let cur = g.get(f, t);
                    g.set(f, t, cur + marginal);
                }
            }
            if i == 0 {
                grads.tensor_mut(START).as_mut_slice()[t] += marginal;
            }
            if i == t_len - 1 {
                grads.tensor_mut(STOP).as_mut_slice()[t] += marginal;
            }
        }
    }
    // Pairwise marginals drive transition gradients.
    for i in 0..t_len - 1 {
        let g = grads.tensor_mut(TRANS);
        for p in 0..n_tags {
            for t in 0..n_tags {
                let mut marginal =
                    (alpha[i][p] + trans.get(p, t) + emissions[i + 1][t] + beta[i + 1][t] - log_z)
                        .exp();
                if p == gold[i] && t == gold[i + 1] {
                    marginal -= F::one();
                }
                let cur = g.get(p, t);
                g.set(p, t, cur + marginal);
            }
        }
    }

    log_z - gold_score(&emissions, gold, trans, start, stop)
}

impl<F: Real> CrfModel<F> {
    /// Interned active features per position; unseen features ignored.
    fn features_of(&self, tweet: &Tweet) -> Result<Vec<Vec<usize>>> {
        (0..tweet.len())
            .map(|i| {
                Ok(extract_crf_features(tweet, i)?
                    .into_iter()
                    .filter_map(|name| self.feature_index.get(&name).copied())
                    .collect())
            })
            .collect()
    }

    pub fn decode(&self, tweet: &Tweet) -> Result<Vec<usize>> {
        if tweet.is_empty() {
            return Ok(Vec::new());
        }
        let feats = self.features_of(tweet)?;
        let emissions = emissions_from(&feats, self.store.tensor(EMIT), self.tagset.len());
        Ok(viterbi_decode(
            &emissions,
            self.store.tensor(TRANS),
            self.store.tensor(START).as_slice(),
            self.store.tensor(STOP).as_slice(),
        ))
    }

    pub fn num_features(&self) -> usize {
        self.feature_index.len()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut features: Vec<(&String, &usize)> = self.feature_index.iter().collect();
        features.sort();
        let mut ckpt = Checkpoint::new(
            "crf",
            serde_json::to_value(&self.config).expect("config serializes"),
            self.tagset.tags().to_vec(),
            serde_json::json!({ "features": features }),
        );
        ckpt.insert_store(&self.store);
        ckpt
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<CrfModel<F>> {
        if ckpt.kind != "crf" {
            return Err(Error::data(format!(
                "expected a crf checkpoint, found {:?}",
                ckpt.kind
            )));
        }
        let config: CrfConfig = serde_json::from_value(ckpt.config.clone())?;
        let features: Vec<(String, usize)> = serde_json::from_value(ckpt.meta["features"].clone())?;
        Ok(CrfModel {
            tagset: Tagset::new(ckpt.tagset.clone())?,
            feature_index: features.into_iter().collect(),
            store: ckpt.to_store(),
            config,
        })
    }

    pub fn config_hash(&self) -> u64 {
        config_hash(&self.config)
    }
}

impl<F: Real> Tagger for CrfModel<F> {
    fn tag_tweet(&self, tweet: &Tweet) -> Vec<usize> {
        self.decode(tweet).expect("tweet positions are in range")
    }

    fn tagset(&self) -> &Tagset {
        &self.tagset
    }
}
