//! Hierarchical BiLSTM basis tagger.
//!
//! Per token: a character-level BiLSTM builds a spelling representation
//! (final states of both directions), concatenated with a learned word
//! embedding and a fixed pretrained embedding; a word-level BiLSTM runs
//! over the sequence; each hidden state is concatenated with surface
//! features (Brown-path prefixes, tag-dictionary indicators) and passed
//! through a tanh layer and a softmax over tags. Dropout is applied to
//! the word-LSTM input and to the tanh layer output in training mode.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LexicalResources, Tagset, Tweet};
use crate::error::{Error, Result};
use crate::numerics::{
    dropout_mask, init_lstm_params, lstm_sequence_backward, lstm_sequence_forward, softmax,
    xavier_init, Direction, Gradients, LstmCache, LstmDims, ParamStore, Real, SeedStream, Tensor,
};
use crate::social_attention;

use super::Tagger;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisConfig {
    pub char_emb_dim: usize,
    /// Character-LSTM hidden size per direction.
    pub char_hidden: usize,
    pub word_emb_dim: usize,
    /// Dimension of the frozen pretrained embeddings (0 disables them).
    pub pretrained_dim: usize,
    /// Word-LSTM hidden size per direction.
    pub word_hidden: usize,
    pub fc_dim: usize,
    pub dropout: f64,
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub patience: usize,
    /// Probability of replacing a training-frequency-1 word by UNK while
    /// training, so the UNK embedding is learned.
    pub unk_prob: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        BasisConfig {
            char_emb_dim: 30,
            char_hidden: 50,
            word_emb_dim: 50,
            pretrained_dim: 100,
            word_hidden: 150,
            fc_dim: 100,
            dropout: 0.35,
            l2: 0.01,
            lr: 1e-3,
            epochs: 30,
            patience: 5,
            unk_prob: 0.5,
        }
    }
}

/// Index over surface feature names seen in training; unseen features
/// are ignored at prediction time.
#[derive(Clone, Debug, Default)]
pub struct SurfaceFeatureIndex {
    map: HashMap<String, usize>,
}

impl SurfaceFeatureIndex {
    pub fn build(corpus: &Corpus, resources: &LexicalResources) -> SurfaceFeatureIndex {
        let mut index = SurfaceFeatureIndex::default();
        for tweet in &corpus.tweets {
            for i in 0..tweet.len() {
                for name in Self::feature_names(tweet, i, resources) {
                    let next = index.map.len();
                    index.map.entry(name).or_insert(next);
                }
            }
        }
        index
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Raw feature names for one position: Brown-path prefixes of even
    /// lengths 2..=16 for the previous, current, and next token, and
    /// tag-dictionary indicators for the current word's entries.
    pub fn feature_names(tweet: &Tweet, i: usize, resources: &LexicalResources) -> Vec<String> {
        let mut names = Vec::new();
        for off in [-1i64, 0, 1] {
            let pos = i as i64 + off;
            if pos < 0 || pos >= tweet.len() as i64 {
                continue;
            }
            let word = &tweet.tokens[pos as usize].normalized;
            if let Some(path) = resources.brown_paths.get(word) {
                let off_name = if off > 0 {
                    format!("+{off}")
                } else {
                    off.to_string()
                };
                for len in (2..=16).step_by(2) {
                    if len > path.len() {
                        break;
                    }
                    names.push(format!("br@{off_name}={}", &path[..len]));
                }
            }
        }
        let cur = &tweet.tokens[i].normalized;
        for (dict_name, dict) in &resources.tag_dicts {
            if let Some(entries) = dict.get(cur) {
                for (tag, _count) in entries {
                    names.push(format!("dict:{dict_name}:{tag}"));
                }
            }
        }
        names
    }

    /// Active feature ids for a position, sorted and deduplicated.
    pub fn extract(&self, tweet: &Tweet, i: usize, resources: &LexicalResources) -> Vec<usize> {
        let mut ids: Vec<usize> = Self::feature_names(tweet, i, resources)
            .into_iter()
            .filter_map(|n| self.map.get(&n).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Multi-hot vector form of [`Self::extract`].
    pub fn multi_hot(&self, tweet: &Tweet, i: usize, resources: &LexicalResources) -> Vec<f64> {
        let mut v = vec![0.0; self.map.len()];
        for id in self.extract(tweet, i, resources) {
            v[id] = 1.0;
        }
        v
    }

    fn names_by_id(&self) -> Vec<String> {
        let mut pairs: Vec<(&String, &usize)> = self.map.iter().collect();
        pairs.sort_by_key(|(_, &id)| id);
        pairs.into_iter().map(|(n, _)| n.clone()).collect()
    }

    fn from_names(names: Vec<String>) -> SurfaceFeatureIndex {
        SurfaceFeatureIndex {
            map: names.into_iter().enumerate().map(|(i, n)| (n, i)).collect(),
        }
    }
}

/// Convenience wrapper matching the surface-feature operation: multi-hot
/// vector for a position under a prebuilt index.
pub fn extract_surface_features(
    index: &SurfaceFeatureIndex,
    tweet: &Tweet,
    i: usize,
    resources: &LexicalResources,
) -> Vec<f64> {
    index.multi_hot(tweet, i, resources)
}

/// Everything about a basis tagger except its parameters: vocabularies,
/// feature index, resources, and configuration. Parameter names carry
/// `prefix` so several experts can share one parameter store.
#[derive(Clone, Debug)]
pub struct BasisArch {
    pub config: BasisConfig,
    pub tagset: Tagset,
    pub prefix: String,
    char_index: HashMap<char, usize>,
    word_index: HashMap<String, usize>,
    word_freq: HashMap<String, u64>,
    pub surface: SurfaceFeatureIndex,
    resources: Arc<LexicalResources>,
}

impl BasisArch {
    pub fn build(
        train: &Corpus,
        resources: Arc<LexicalResources>,
        config: BasisConfig,
        prefix: &str,
    ) -> Result<BasisArch> {
        if !resources.word_vectors.is_empty() && resources.vector_dim != config.pretrained_dim {
            return Err(Error::data(format!(
                "pretrained vectors have dim {} but the model expects {}",
                resources.vector_dim, config.pretrained_dim
            )));
        }
        let mut chars = BTreeSet::new();
        let mut words = BTreeSet::new();
        let mut word_freq: HashMap<String, u64> = HashMap::new();
        for tweet in &train.tweets {
            for token in &tweet.tokens {
                chars.extend(token.normalized.chars());
                words.insert(token.normalized.clone());
                *word_freq.entry(token.normalized.clone()).or_default() += 1;
            }
        }
        // Id 0 is reserved for UNK in both vocabularies.
        let char_index = chars.into_iter().zip(1..).collect();
        let word_index = words.into_iter().zip(1..).collect();
        let surface = SurfaceFeatureIndex::build(train, &resources);
        Ok(BasisArch {
            config,
            tagset: train.tagset.clone(),
            prefix: prefix.to_string(),
            char_index,
            word_index,
            word_freq,
            surface,
            resources,
        })
    }

    pub fn word_input_dim(&self) -> usize {
        2 * self.config.char_hidden + self.config.word_emb_dim + self.config.pretrained_dim
    }

    fn name(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.prefix)
    }

    /// Registers this architecture's parameters (Xavier weights, zero
    /// biases) in a fixed draw order.
    pub fn init_params<F: Real>(&self, store: &mut ParamStore<F>, rng: &mut ChaCha8Rng) {
        let c = &self.config;
        store.insert(
            self.name("char_emb"),
            xavier_init(self.char_index.len() + 1, c.char_emb_dim, rng),
        );
        let char_dims = LstmDims {
            input: c.char_emb_dim,
            hidden: c.char_hidden,
        };
        init_lstm_params(store, &self.name("char_fwd"), char_dims, rng);
        init_lstm_params(store, &self.name("char_bwd"), char_dims, rng);
        store.insert(
            self.name("word_emb"),
            xavier_init(self.word_index.len() + 1, c.word_emb_dim, rng),
        );
        let word_dims = LstmDims {
            input: self.word_input_dim(),
            hidden: c.word_hidden,
        };
        init_lstm_params(store, &self.name("word_fwd"), word_dims, rng);
        init_lstm_params(store, &self.name("word_bwd"), word_dims, rng);
        store.insert(
            self.name("fc.wh"),
            xavier_init(c.fc_dim, 2 * c.word_hidden, rng),
        );
        store.insert(
            self.name("fc.ws"),
            xavier_init(c.fc_dim, self.surface.len(), rng),
        );
        store.insert(self.name("fc.b"), Tensor::vector(c.fc_dim));
        store.insert(
            self.name("out.w"),
            xavier_init(self.tagset.len(), c.fc_dim, rng),
        );
        store.insert(self.name("out.b"), Tensor::vector(self.tagset.len()));
    }
}

/// Forward activations cached for the backward pass.
pub struct BasisCache<F: Real> {
    char_ids: Vec<Vec<usize>>,
    char_fwd: Vec<LstmCache<F>>,
    char_bwd: Vec<LstmCache<F>>,
    word_rows: Vec<usize>,
    input_masks: Option<Vec<Vec<F>>>,
    word_fwd: LstmCache<F>,
    word_bwd: LstmCache<F>,
    hidden: Vec<Vec<F>>,
    surf_ids: Vec<Vec<usize>>,
    r_pre: Vec<Vec<F>>,
    r_masks: Option<Vec<Vec<F>>>,
    r_used: Vec<Vec<F>>,
    pub probs: Vec<Vec<F>>,
}

/// Runs the tagger over one tweet. `train_rng: Some(_)` enables the
/// training path: UNK substitution for frequency-1 words and inverted
/// dropout on the word-LSTM input and the tanh layer output.
pub(crate) fn forward_cached<F: Real>(
    arch: &BasisArch,
    store: &ParamStore<F>,
    tweet: &Tweet,
    mut train_rng: Option<&mut ChaCha8Rng>,
) -> Result<BasisCache<F>> {
    let c = &arch.config;
    let char_emb = store.tensor(&arch.name("char_emb"));
    let word_emb = store.tensor(&arch.name("word_emb"));
    let t_len = tweet.len();

    let mut char_ids = Vec::with_capacity(t_len);
    let mut char_fwd = Vec::with_capacity(t_len);
    let mut char_bwd = Vec::with_capacity(t_len);
    let mut word_rows = Vec::with_capacity(t_len);
    let mut inputs = Vec::with_capacity(t_len);
    let mut input_masks = train_rng.as_ref().map(|_| Vec::with_capacity(t_len));
    for token in &tweet.tokens {
        let ids: Vec<usize> = token
            .normalized
            .chars()
            .map(|ch| arch.char_index.get(&ch).copied().unwrap_or(0))
            .collect();
        let char_inputs: Vec<Vec<F>> = ids.iter().map(|&id| char_emb.row(id).to_vec()).collect();
        let (fwd_out, fwd_cache) = lstm_sequence_forward(
            store,
            &arch.name("char_fwd"),
            &char_inputs,
            Direction::Forward,
        )?;
        let (bwd_out, bwd_cache) = lstm_sequence_forward(
            store,
            &arch.name("char_bwd"),
            &char_inputs,
            Direction::Backward,
        )?;
        let mut x: Vec<F> = Vec::with_capacity(arch.word_input_dim());
        // Final states: last aligned output of the forward run, first
        // aligned output of the backward run.
        match fwd_out.last() {
            Some(h) => x.extend_from_slice(h),
            None => x.extend(std::iter::repeat_n(F::zero(), c.char_hidden)),
        }
        match bwd_out.first() {
            Some(h) => x.extend_from_slice(h),
            None => x.extend(std::iter::repeat_n(F::zero(), c.char_hidden)),
        }

        let mut row = arch.word_index.get(&token.normalized).copied().unwrap_or(0);
        if let Some(rng) = train_rng.as_deref_mut() {
            if arch.word_freq.get(&token.normalized) == Some(&1) && rng.random::<f64>() < c.unk_prob
            {
                row = 0;
            }
        }
        x.extend_from_slice(word_emb.row(row));

        match arch.resources.word_vectors.get(&token.normalized) {
            Some(v) => x.extend(v.iter().map(|&f| F::from_f64(f))),
            None => x.extend(std::iter::repeat_n(F::zero(), c.pretrained_dim)),
        }

        if let Some(rng) = train_rng.as_deref_mut() {
            let mask = dropout_mask::<F>(x.len(), c.dropout, rng)?;
            for (xi, m) in x.iter_mut().zip(&mask) {
                *xi *= *m;
            }
            input_masks.as_mut().expect("training mode").push(mask);
        }

        char_ids.push(ids);
        char_fwd.push(fwd_cache);
        char_bwd.push(bwd_cache);
        word_rows.push(row);
        inputs.push(x);
    }

    let (h_fwd, word_fwd) =
        lstm_sequence_forward(store, &arch.name("word_fwd"), &inputs, Direction::Forward)?;
    let (h_bwd, word_bwd) =
        lstm_sequence_forward(store, &arch.name("word_bwd"), &inputs, Direction::Backward)?;
    let hidden: Vec<Vec<F>> = h_fwd
        .into_iter()
        .zip(h_bwd)
        .map(|(mut f, b)| {
            f.extend(b);
            f
        })
        .collect();

    let fc_wh = store.tensor(&arch.name("fc.wh"));
    let fc_ws = store.tensor(&arch.name("fc.ws"));
    let fc_b = store.tensor(&arch.name("fc.b"));
    let out_w = store.tensor(&arch.name("out.w"));
    let out_b = store.tensor(&arch.name("out.b"));
    let mut surf_ids = Vec::with_capacity(t_len);
    let mut r_pre = Vec::with_capacity(t_len);
    let mut r_masks = train_rng.as_ref().map(|_| Vec::with_capacity(t_len));
    let mut r_used = Vec::with_capacity(t_len);
    let mut probs = Vec::with_capacity(t_len);
    for (i, h) in hidden.iter().enumerate() {
        let active = arch.surface.extract(tweet, i, &arch.resources);
        let mut pre = fc_wh.matvec(h);
        for &f in &active {
            for (p, r) in pre.iter_mut().enumerate() {
                *r += fc_ws.get(p, f);
            }
        }
        for (p, &b) in pre.iter_mut().zip(fc_b.as_slice()) {
            *p += b;
        }
        let r: Vec<F> = pre.iter().map(|&p| p.tanh()).collect();

        let used: Vec<F> = if let Some(rng) = train_rng.as_deref_mut() {
            let mask = dropout_mask::<F>(r.len(), c.dropout, rng)?;
            let used = r.iter().zip(&mask).map(|(&x, &m)| x * m).collect();
            r_masks.as_mut().expect("training mode").push(mask);
            used
        } else {
            r.clone()
        };

        let mut logits = out_w.matvec(&used);
        for (l, &b) in logits.iter_mut().zip(out_b.as_slice()) {
            *l += b;
        }
        probs.push(softmax(&logits));
        surf_ids.push(active);
        r_pre.push(r);
        r_used.push(used);
    }

    Ok(BasisCache {
        char_ids,
        char_fwd,
        char_bwd,
        word_rows,
        input_masks,
        word_fwd,
        word_bwd,
        hidden,
        surf_ids,
        r_pre,
        r_masks,
        r_used,
        probs,
    })
}

/// Backpropagates per-token output-logit gradients through the cached
/// forward pass, accumulating into `grads`.
pub(crate) fn backward_cached<F: Real>(
    arch: &BasisArch,
    store: &ParamStore<F>,
    cache: &BasisCache<F>,
    dlogits: &[Vec<F>],
    grads: &mut Gradients<F>,
) {
    let c = &arch.config;
    let t_len = cache.probs.len();
    debug_assert_eq!(dlogits.len(), t_len);
    let out_w = store.tensor(&arch.name("out.w"));
    let fc_wh = store.tensor(&arch.name("fc.wh"));

    let mut d_hidden: Vec<Vec<F>> = Vec::with_capacity(t_len);
    for i in 0..t_len {
        grads
            .tensor_mut(&arch.name("out.w"))
            .add_outer(&dlogits[i], &cache.r_used[i], F::one());
        for (g, &d) in grads
            .tensor_mut(&arch.name("out.b"))
            .as_mut_slice()
            .iter_mut()
            .zip(&dlogits[i])
        {
            *g += d;
        }
        let mut dr = out_w.t_matvec(&dlogits[i]);
        if let Some(masks) = &cache.r_masks {
            for (d, &m) in dr.iter_mut().zip(&masks[i]) {
                *d *= m;
            }
        }
        // tanh backward.
        let dpre: Vec<F> = dr
            .iter()
            .zip(&cache.r_pre[i])
            .map(|(&d, &r)| d * (F::one() - r * r))
            .collect();
        grads
            .tensor_mut(&arch.name("fc.wh"))
            .add_outer(&dpre, &cache.hidden[i], F::one());
        {
            let ws = grads.tensor_mut(&arch.name("fc.ws"));
            for &f in &cache.surf_ids[i] {
                for (p, &d) in dpre.iter().enumerate() {
                    let cur = ws.get(p, f);
                    ws.set(p, f, cur + d);
                }
            }
        }
        for (g, &d) in grads
            .tensor_mut(&arch.name("fc.b"))
            .as_mut_slice()
            .iter_mut()
            .zip(&dpre)
        {
            *g += d;
        }
        d_hidden.push(fc_wh.t_matvec(&dpre));
    }

    // Word-level BiLSTM backward.
    let h = c.word_hidden;
    let d_fwd: Vec<Vec<F>> = d_hidden.iter().map(|d| d[..h].to_vec()).collect();
    let d_bwd: Vec<Vec<F>> = d_hidden.iter().map(|d| d[h..].to_vec()).collect();
    let dx_fwd = lstm_sequence_backward(
        store,
        &arch.name("word_fwd"),
        &cache.word_fwd,
        &d_fwd,
        grads,
    );
    let dx_bwd = lstm_sequence_backward(
        store,
        &arch.name("word_bwd"),
        &cache.word_bwd,
        &d_bwd,
        grads,
    );

    for i in 0..t_len {
        let mut dx: Vec<F> = dx_fwd[i]
            .iter()
            .zip(&dx_bwd[i])
            .map(|(&a, &b)| a + b)
            .collect();
        if let Some(masks) = &cache.input_masks {
            for (d, &m) in dx.iter_mut().zip(&masks[i]) {
                *d *= m;
            }
        }
        let char_part = 2 * c.char_hidden;
        // Learned word embedding slice.
        {
            let we = grads.tensor_mut(&arch.name("word_emb"));
            let row = cache.word_rows[i];
            for (j, &d) in dx[char_part..char_part + c.word_emb_dim].iter().enumerate() {
                let cur = we.get(row, j);
                we.set(row, j, cur + d);
            }
        }
        // Character BiLSTM backward: gradient lands only on the final
        // state of each direction.
        let n_chars = cache.char_ids[i].len();
        if n_chars == 0 {
            continue;
        }
        let zero = vec![F::zero(); c.char_hidden];
        let mut dh_f = vec![zero.clone(); n_chars];
        dh_f[n_chars - 1] = dx[..c.char_hidden].to_vec();
        let mut dh_b = vec![zero; n_chars];
        dh_b[0] = dx[c.char_hidden..char_part].to_vec();
        let dc_f = lstm_sequence_backward(
            store,
            &arch.name("char_fwd"),
            &cache.char_fwd[i],
            &dh_f,
            grads,
        );
        let dc_b = lstm_sequence_backward(
            store,
            &arch.name("char_bwd"),
            &cache.char_bwd[i],
            &dh_b,
            grads,
        );
        let ce = grads.tensor_mut(&arch.name("char_emb"));
        for (pos, &id) in cache.char_ids[i].iter().enumerate() {
            for j in 0..c.char_emb_dim {
                let cur = ce.get(id, j);
                ce.set(id, j, cur + dc_f[pos][j] + dc_b[pos][j]);
            }
        }
    }
}

/// Token NLL of probability rows against gold ids.
#[cfg(test)]
pub(crate) fn nll_of_probs<F: Real>(probs: &[Vec<F>], gold: &[usize]) -> F {
    let mut nll = F::zero();
    for (row, &g) in probs.iter().zip(gold) {
        nll -= row[g].ln();
    }
    nll
}

/// A trained basis tagger: architecture plus parameters.
#[derive(Clone, Debug)]
pub struct BasisTagger<F: Real> {
    pub arch: BasisArch,
    pub store: ParamStore<F>,
}

/// Per-token tag distributions `p(y_i | x)`. In training mode the rng
/// drives dropout and UNK substitution; evaluation mode is
/// deterministic and ignores it.
pub fn basis_forward<F: Real>(
    model: &BasisTagger<F>,
    tweet: &Tweet,
    training: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<F>>> {
    let cache = forward_cached(
        &model.arch,
        &model.store,
        tweet,
        if training { Some(rng) } else { None },
    )?;
    Ok(cache.probs)
}

pub(crate) fn argmax_rows<F: Real>(probs: &[Vec<F>]) -> Vec<usize> {
    probs
        .iter()
        .map(|row| {
            let mut best = 0;
            for (t, &p) in row.iter().enumerate().skip(1) {
                if p > row[best] {
                    best = t;
                }
            }
            best
        })
        .collect()
}

impl<F: Real> Tagger for BasisTagger<F> {
    fn tag_tweet(&self, tweet: &Tweet) -> Vec<usize> {
        let cache = forward_cached(&self.arch, &self.store, tweet, None)
            .expect("architecture dimensions are consistent");
        argmax_rows(&cache.probs)
    }

    fn tagset(&self) -> &Tagset {
        &self.arch.tagset
    }
}

/// Vocabulary/feature-index meta block used by checkpoints.
pub(crate) fn arch_meta(arch: &BasisArch) -> serde_json::Value {
    let mut chars: Vec<(char, usize)> = arch.char_index.iter().map(|(&c, &i)| (c, i)).collect();
    chars.sort_by_key(|&(_, i)| i);
    let mut words: Vec<(&String, &usize)> = arch.word_index.iter().collect();
    words.sort_by_key(|&(_, &i)| i);
    serde_json::json!({
        "prefix": arch.prefix,
        "chars": chars.iter().map(|(ch, _)| ch.to_string()).collect::<Vec<_>>(),
        "words": words.iter().map(|(w, _)| (*w).clone()).collect::<Vec<_>>(),
        "surface": arch.surface.names_by_id(),
    })
}

impl<F: Real> BasisTagger<F> {
    pub fn to_checkpoint(&self) -> crate::numerics::Checkpoint {
        let mut ckpt = crate::numerics::Checkpoint::new(
            "bilstm",
            serde_json::to_value(&self.arch.config).expect("config serializes"),
            self.arch.tagset.tags().to_vec(),
            arch_meta(&self.arch),
        );
        ckpt.insert_store(&self.store);
        ckpt
    }

    pub fn from_checkpoint(
        ckpt: &crate::numerics::Checkpoint,
        resources: Arc<LexicalResources>,
    ) -> Result<BasisTagger<F>> {
        if ckpt.kind != "bilstm" {
            return Err(Error::data(format!(
                "expected a bilstm checkpoint, found {:?}",
                ckpt.kind
            )));
        }
        let arch = arch_from_meta(
            serde_json::from_value(ckpt.config.clone())?,
            Tagset::new(ckpt.tagset.clone())?,
            &ckpt.meta,
            resources,
        )?;
        Ok(BasisTagger {
            arch,
            store: ckpt.to_store(),
        })
    }
}

pub(crate) fn arch_from_meta(
    config: BasisConfig,
    tagset: Tagset,
    meta: &serde_json::Value,
    resources: Arc<LexicalResources>,
) -> Result<BasisArch> {
    let chars: Vec<String> = serde_json::from_value(meta["chars"].clone())?;
    let words: Vec<String> = serde_json::from_value(meta["words"].clone())?;
    let surface: Vec<String> = serde_json::from_value(meta["surface"].clone())?;
    let prefix: String = serde_json::from_value(meta["prefix"].clone())?;
    Ok(BasisArch {
        config,
        tagset,
        prefix,
        char_index: chars
            .iter()
            .filter_map(|s| s.chars().next())
            .zip(1..)
            .collect(),
        word_index: words.into_iter().zip(1..).collect(),
        word_freq: HashMap::new(),
        surface: SurfaceFeatureIndex::from_names(surface),
        resources,
    })
}

/// Trains a single basis tagger with Adam on L2-regularized token NLL,
/// early-stopping on validation accuracy; the best-validation
/// checkpoint is returned.
pub fn train_basis<F: Real>(
    train: &Corpus,
    valid: &Corpus,
    resources: Arc<LexicalResources>,
    config: &BasisConfig,
    seed: SeedStream,
) -> Result<BasisTagger<F>> {
    train_basis_traced(train, valid, resources, config, seed).map(|(m, _)| m)
}

pub fn train_basis_traced<F: Real>(
    train: &Corpus,
    valid: &Corpus,
    resources: Arc<LexicalResources>,
    config: &BasisConfig,
    seed: SeedStream,
) -> Result<(BasisTagger<F>, social_attention::TrainTrace)> {
    let arch = BasisArch::build(train, resources, config.clone(), "")?;
    let (store, trace) =
        social_attention::train_engine::<F>(std::slice::from_ref(&arch), None, train, valid, seed)?;
    Ok((BasisTagger { arch, store }, trace))
}
