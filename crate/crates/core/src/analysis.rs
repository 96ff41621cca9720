//! Network diagnostics and the synthetic homophilous benchmark.
//!
//! Assortativity here is the mean squared difference in per-author
//! tagging accuracy over connected author pairs; lower means errors
//! cluster on the network. Observed values are compared against
//! degree-preserving rewired copies of the graph, with an empirical
//! permutation p-value. The same machinery serves the mean absolute
//! difference of attention distributions across edges.
//!
//! The benchmark generator plants a stochastic-block-model graph and a
//! corpus whose tag conventions diverge by community, producing
//! controllable linguistic homophily at desk scale.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tagset, Token, Tweet};
use crate::error::{Error, Result};
use crate::numerics::{Real, SeedStream};
use crate::social_attention::{attention_weights, SocialAttentionModel};
use crate::socialgraph::SocialGraph;

/// Observed metric versus degree-preserving rewired samples.
#[derive(Clone, Debug, Serialize)]
pub struct RewiredComparison {
    pub observed: f64,
    pub rewired_samples: Vec<f64>,
    pub epochs_per_sample: usize,
    /// `(1 + #{samples <= observed}) / (1 + #samples)`; small when the
    /// observed value sits below the rewired distribution
    /// (lower-is-assortative metrics).
    pub empirical_p: f64,
}

impl RewiredComparison {
    pub fn sample_mean(&self) -> f64 {
        self.rewired_samples.iter().sum::<f64>() / self.rewired_samples.len() as f64
    }

    pub fn sample_std(&self) -> f64 {
        let mean = self.sample_mean();
        let var = self
            .rewired_samples
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / self.rewired_samples.len() as f64;
        var.sqrt()
    }
}

/// Mean squared difference of per-author accuracy over edges whose both
/// endpoints have an accuracy.
pub fn assortativity(acc: &HashMap<String, f64>, graph: &SocialGraph) -> Result<f64> {
    let annotated: HashSet<String> = acc.keys().cloned().collect();
    let pairs = graph.connected_annotated_pairs(&annotated);
    if pairs.is_empty() {
        return Err(Error::data(
            "no edge connects two authors with measured accuracy",
        ));
    }
    let sum: f64 = pairs
        .iter()
        .map(|(u, v)| {
            let d = acc[u] - acc[v];
            d * d
        })
        .sum();
    Ok(sum / pairs.len() as f64)
}

/// Evaluates a graph metric on the observed graph and on `n_samples`
/// independently rewired copies (`epochs` rewiring epochs each, seeds
/// derived per sample), and reports the empirical p-value.
pub fn rewired_baseline(
    metric: impl Fn(&SocialGraph) -> Result<f64>,
    graph: &SocialGraph,
    epochs: usize,
    n_samples: usize,
    seed: SeedStream,
) -> Result<RewiredComparison> {
    if n_samples == 0 {
        return Err(Error::usage("need at least one rewired sample"));
    }
    let observed = metric(graph)?;
    let mut rewired_samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let mut rng = seed.child_indexed("rewire-sample", i as u64).rng();
        let rewired = graph.rewire_epochs(epochs, &mut rng);
        rewired_samples.push(metric(&rewired)?);
    }
    let below = rewired_samples.iter().filter(|&&s| s <= observed).count();
    let empirical_p = (1 + below) as f64 / (1 + n_samples) as f64;
    Ok(RewiredComparison {
        observed,
        rewired_samples,
        epochs_per_sample: epochs,
        empirical_p,
    })
}

/// Mean over connected embedded pairs of `sum_k |pi_i,k - pi_j,k|`.
/// Pairs involving the fallback embedding are excluded: all such
/// authors share one attention vector, which would bias the mean
/// toward zero.
pub fn attention_similarity<F: Real>(
    model: &SocialAttentionModel<F>,
    graph: &SocialGraph,
) -> Result<f64> {
    let mut weights: HashMap<String, Vec<f64>> = HashMap::new();
    for node in graph.nodes() {
        if model.node_embeddings.contains(node) {
            let pi = attention_weights(model, node);
            weights.insert(node.clone(), pi.into_iter().map(Real::as_f64).collect());
        }
    }
    mean_abs_attention_diff(&weights, graph)
}

/// Same metric over precomputed per-author weight vectors; edges with a
/// missing endpoint are skipped.
pub fn mean_abs_attention_diff(
    weights: &HashMap<String, Vec<f64>>,
    graph: &SocialGraph,
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (u, v) in graph.edges() {
        let (Some(wu), Some(wv)) = (weights.get(u), weights.get(v)) else {
            continue;
        };
        total += wu.iter().zip(wv).map(|(a, b)| (a - b).abs()).sum::<f64>();
        count += 1;
    }
    if count == 0 {
        return Err(Error::data(
            "no edge connects two embedded authors with attention weights",
        ));
    }
    Ok(total / count as f64)
}

/// Stochastic block model: every intra-community pair is edged with
/// `p_in`, every inter-community pair with `p_out`. Returns the graph
/// (including isolated nodes) and the author -> community map.
pub fn gen_planted_graph(
    n: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(SocialGraph, HashMap<String, usize>)> {
    if communities == 0 || communities > n {
        return Err(Error::usage(format!(
            "community count {communities} out of range for {n} authors"
        )));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(Error::usage(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let author = |i: usize| format!("u{i:04}");
    let community_of = |i: usize| i * communities / n;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if community_of(i) == community_of(j) {
                p_in
            } else {
                p_out
            };
            if rng.random::<f64>() < p {
                edges.push((author(i), author(j)));
            }
        }
    }
    let graph = SocialGraph::from_parts((0..n).map(author), edges);
    let map = (0..n).map(|i| (author(i), community_of(i))).collect();
    Ok((graph, map))
}

/// Vocabulary shape for the synthetic corpus.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VocabConfig {
    /// Unambiguous words per tag, tagged identically by everyone.
    pub words_per_tag: usize,
    /// Words whose gold tag depends on the author's community.
    pub ambiguous_words: usize,
    /// Probability that a sampled token is an ambiguous word.
    pub ambiguous_frac: f64,
    pub sentence_len_min: usize,
    pub sentence_len_max: usize,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            words_per_tag: 8,
            ambiguous_words: 12,
            ambiguous_frac: 0.4,
            sentence_len_min: 6,
            sentence_len_max: 12,
        }
    }
}

/// Generates a labeled corpus over the given authors. Every community
/// shares the unambiguous vocabulary; each ambiguous word has two
/// candidate tags, and an author's community tags it by its own
/// convention with probability `divergence` (uniformly over the two
/// candidates otherwise). Lexical choice of ambiguous words is mildly
/// community-conditioned: authors favour words "homed" in their own
/// community 2:1.
pub fn gen_homophilous_corpus(
    communities: &HashMap<String, usize>,
    tagset: &Tagset,
    vocab: &VocabConfig,
    divergence: f64,
    tweets_per_author: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Corpus> {
    if !(0.0..=1.0).contains(&divergence) {
        return Err(Error::usage(format!(
            "divergence must be in [0, 1], got {divergence}"
        )));
    }
    let n_comm = communities.values().copied().max().map_or(0, |m| m + 1);
    if divergence > 0.0 && n_comm < 2 {
        return Err(Error::usage(
            "divergence > 0 needs at least two communities",
        ));
    }
    if tagset.len() < 2 && vocab.ambiguous_words > 0 {
        return Err(Error::usage("ambiguous words need at least two tags"));
    }
    if vocab.sentence_len_min == 0 || vocab.sentence_len_min > vocab.sentence_len_max {
        return Err(Error::usage("invalid sentence length range"));
    }
    if tweets_per_author == 0 {
        return Err(Error::usage("tweets_per_author must be at least 1"));
    }

    // Unambiguous vocabulary: words_per_tag words for every tag.
    let mut plain: Vec<(String, usize)> = Vec::new();
    for t in 0..tagset.len() {
        for j in 0..vocab.words_per_tag {
            plain.push((format!("w{t}x{j}"), t));
        }
    }
    // Ambiguous words cycle over adjacent tag pairs; even communities
    // use the first tag by convention, odd communities the second.
    let ambiguous: Vec<(String, usize, usize)> = (0..vocab.ambiguous_words)
        .map(|j| {
            let t1 = j % tagset.len();
            let t2 = (j + 1) % tagset.len();
            (format!("amb{j}"), t1, t2)
        })
        .collect();

    let mut authors: Vec<&String> = communities.keys().collect();
    authors.sort();
    let mut tweets = Vec::new();
    let mut counter = 0usize;
    for author in authors {
        let community = communities[author];
        for _ in 0..tweets_per_author {
            let len = rng.random_range(vocab.sentence_len_min..=vocab.sentence_len_max);
            let mut tokens = Vec::with_capacity(len);
            let mut tags = Vec::with_capacity(len);
            for _ in 0..len {
                let ambiguous_pick =
                    !ambiguous.is_empty() && rng.random::<f64>() < vocab.ambiguous_frac;
                if ambiguous_pick {
                    let (word, t1, t2) =
                        &ambiguous[pick_home_biased(ambiguous.len(), n_comm, community, rng)];
                    let convention = if community.is_multiple_of(2) {
                        *t1
                    } else {
                        *t2
                    };
                    let tag = if rng.random::<f64>() < divergence {
                        convention
                    } else if rng.random::<f64>() < 0.5 {
                        *t1
                    } else {
                        *t2
                    };
                    tokens.push(Token::new(word.clone()));
                    tags.push(tagset.tag(tag).to_string());
                } else {
                    let (word, t) = &plain[rng.random_range(0..plain.len())];
                    tokens.push(Token::new(word.clone()));
                    tags.push(tagset.tag(*t).to_string());
                }
            }
            tweets.push(Tweet {
                tweet_id: format!("s{counter}"),
                author_id: author.clone(),
                tokens,
                tags: Some(tags),
            });
            counter += 1;
        }
    }
    Ok(Corpus {
        tweets,
        tagset: tagset.clone(),
    })
}

/// Weighted index draw: ambiguous word j is "homed" in community
/// `j % n_comm` and weighted 2:1 for its home authors.
fn pick_home_biased(
    n_words: usize,
    n_comm: usize,
    community: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    if n_comm == 0 {
        return rng.random_range(0..n_words);
    }
    let weight = |j: usize| if j % n_comm == community { 2.0 } else { 1.0 };
    let total: f64 = (0..n_words).map(weight).sum();
    let mut target = rng.random::<f64>() * total;
    for j in 0..n_words {
        target -= weight(j);
        if target <= 0.0 {
            return j;
        }
    }
    n_words - 1
}

/// Default synthetic tag symbols.
pub fn default_synthetic_tags() -> Vec<String> {
    ["N", "V", "D", "A", "P", "O"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub authors: usize,
    pub communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub divergence: f64,
    pub tweets_per_author: usize,
    pub tags: Vec<String>,
    pub vocab: VocabConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            authors: 200,
            communities: 2,
            p_in: 0.1,
            p_out: 0.005,
            divergence: 0.8,
            tweets_per_author: 3,
            tags: default_synthetic_tags(),
            vocab: VocabConfig::default(),
        }
    }
}

/// A planted graph plus a matching homophilous corpus.
#[derive(Clone, Debug)]
pub struct SyntheticBenchmark {
    pub graph: SocialGraph,
    pub communities: HashMap<String, usize>,
    pub corpus: Corpus,
    pub config: BenchmarkConfig,
    pub seed: u64,
}

impl SyntheticBenchmark {
    pub fn community_authors(&self, community: usize) -> Vec<String> {
        let mut authors: Vec<String> = self
            .communities
            .iter()
            .filter(|(_, &c)| c == community)
            .map(|(a, _)| a.clone())
            .collect();
        authors.sort();
        authors
    }
}

pub fn gen_benchmark(config: &BenchmarkConfig, seed: SeedStream) -> Result<SyntheticBenchmark> {
    let tagset = Tagset::new(config.tags.clone())?;
    let mut graph_rng = seed.child("graph").rng();
    let (graph, communities) = gen_planted_graph(
        config.authors,
        config.communities,
        config.p_in,
        config.p_out,
        &mut graph_rng,
    )?;
    let mut corpus_rng = seed.child("corpus").rng();
    let corpus = gen_homophilous_corpus(
        &communities,
        &tagset,
        &config.vocab,
        config.divergence,
        config.tweets_per_author,
        &mut corpus_rng,
    )?;
    Ok(SyntheticBenchmark {
        graph,
        communities,
        corpus,
        config: config.clone(),
        seed: seed.seed(),
    })
}
