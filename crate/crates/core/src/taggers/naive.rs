//! Dictionary baseline: predicts the most common training tag of each
//! normalized word, and a hapax-derived fallback tag for unseen words.

use std::collections::HashMap;

use crate::corpus::{Corpus, Tagset, Tweet};
use crate::error::{Error, Result};

use super::Tagger;

#[derive(Clone, Debug)]
pub struct NaiveModel {
    tagset: Tagset,
    /// Normalized word -> per-tag counts (tag id indexed).
    counts: HashMap<String, Vec<u64>>,
    majority: HashMap<String, usize>,
    pub unknown_tag: usize,
}

/// Counts (word, tag) pairs over normalized tokens and resolves per-word
/// majority tags. The unseen-word tag is the majority tag among hapax
/// legomena (training frequency 1); ties always break toward the lower
/// tag index. A corpus without hapax words falls back to the global
/// majority tag.
pub fn train_naive(corpus: &Corpus) -> Result<NaiveModel> {
    let n_tags = corpus.tagset.len();
    let mut counts: HashMap<String, Vec<u64>> = HashMap::new();
    let mut labeled_tokens = 0usize;
    for tweet in corpus.labeled_tweets() {
        let tags = tweet.tags.as_ref().expect("labeled");
        for (token, tag) in tweet.tokens.iter().zip(tags) {
            let tag_id = corpus.tagset.index_of(tag).expect("tags validated at load");
            counts
                .entry(token.normalized.clone())
                .or_insert_with(|| vec![0; n_tags])[tag_id] += 1;
            labeled_tokens += 1;
        }
    }
    if labeled_tokens == 0 {
        return Err(Error::usage("train_naive needs a labeled corpus"));
    }

    let majority: HashMap<String, usize> = counts
        .iter()
        .map(|(word, tag_counts)| (word.clone(), argmax_lowest(tag_counts)))
        .collect();

    let mut hapax_tags = vec![0u64; n_tags];
    let mut global_tags = vec![0u64; n_tags];
    for tag_counts in counts.values() {
        let freq: u64 = tag_counts.iter().sum();
        for (t, &c) in tag_counts.iter().enumerate() {
            global_tags[t] += c;
            if freq == 1 {
                hapax_tags[t] += c;
            }
        }
    }
    let unknown_tag = if hapax_tags.iter().any(|&c| c > 0) {
        argmax_lowest(&hapax_tags)
    } else {
        argmax_lowest(&global_tags)
    };

    Ok(NaiveModel {
        tagset: corpus.tagset.clone(),
        counts,
        majority,
        unknown_tag,
    })
}

/// Per-token majority lookup; unseen words get the unknown-word tag.
pub fn tag_naive(model: &NaiveModel, tweet: &Tweet) -> Vec<usize> {
    tweet
        .tokens
        .iter()
        .map(|t| {
            model
                .majority
                .get(&t.normalized)
                .copied()
                .unwrap_or(model.unknown_tag)
        })
        .collect()
}

impl NaiveModel {
    pub fn word_counts(&self, word: &str) -> Option<&[u64]> {
        self.counts.get(word).map(Vec::as_slice)
    }

    /// Count table serialized in sorted order so the file is
    /// byte-stable across runs.
    pub fn to_checkpoint(&self) -> crate::numerics::Checkpoint {
        let mut counts: Vec<(&String, &Vec<u64>)> = self.counts.iter().collect();
        counts.sort();
        crate::numerics::Checkpoint::new(
            "naive",
            serde_json::json!({"model": "naive"}),
            self.tagset.tags().to_vec(),
            serde_json::json!({
                "unknown_tag": self.unknown_tag,
                "counts": counts,
            }),
        )
    }

    pub fn from_checkpoint(ckpt: &crate::numerics::Checkpoint) -> Result<NaiveModel> {
        if ckpt.kind != "naive" {
            return Err(Error::data(format!(
                "expected a naive checkpoint, found {:?}",
                ckpt.kind
            )));
        }
        let tagset = Tagset::new(ckpt.tagset.clone())?;
        let unknown_tag: usize = serde_json::from_value(ckpt.meta["unknown_tag"].clone())?;
        let counts: Vec<(String, Vec<u64>)> = serde_json::from_value(ckpt.meta["counts"].clone())?;
        let counts: HashMap<String, Vec<u64>> = counts.into_iter().collect();
        let majority = counts
            .iter()
            .map(|(w, c)| (w.clone(), argmax_lowest(c)))
            .collect();
        Ok(NaiveModel {
            tagset,
            counts,
            majority,
            unknown_tag,
        })
    }
}

impl Tagger for NaiveModel {
    fn tag_tweet(&self, tweet: &Tweet) -> Vec<usize> {
        tag_naive(self, tweet)
    }

    fn tagset(&self) -> &Tagset {
        &self.tagset
    }
}

fn argmax_lowest(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
