//! The tagger families: a naïve per-word dictionary tagger, a lexical
//! feature-rich linear-chain CRF, and a hierarchical BiLSTM tagger with
//! surface features, plus token-accuracy evaluation.

mod basis;
mod crf;
mod naive;

pub use basis::{
    basis_forward, extract_surface_features, train_basis, train_basis_traced, BasisArch,
    BasisCache, BasisConfig, BasisTagger, SurfaceFeatureIndex,
};
pub use crf::{
    crf_log_partition, crf_sentence_grads, crf_sentence_nll, extract_crf_features, train_crf,
    train_crf_traced, viterbi_decode, CrfConfig, CrfModel, CrfTrace, CRF_EMIT, CRF_START, CRF_STOP,
    CRF_TRANS,
};
pub use naive::{tag_naive, train_naive, NaiveModel};

pub(crate) use basis::{
    arch_from_meta as arch_from_meta_internal, arch_meta as arch_meta_internal,
    argmax_rows as argmax_rows_internal, backward_cached as backward_cached_internal,
    forward_cached as forward_cached_internal,
};

use std::collections::HashMap;

use crate::corpus::{Corpus, Tagset, Tweet};
use crate::error::{Error, Result};

/// Anything that can tag a tweet into tag indices of its tagset.
pub trait Tagger {
    fn tag_tweet(&self, tweet: &Tweet) -> Vec<usize>;
    fn tagset(&self) -> &Tagset;
}

/// Token accuracy over the labeled tweets of a corpus.
pub fn evaluate(tagger: &dyn Tagger, corpus: &Corpus) -> Result<f64> {
    let (correct, total) = count_correct(tagger, corpus.labeled_tweets())?;
    if total == 0 {
        return Err(Error::usage("evaluate needs a labeled corpus"));
    }
    Ok(correct as f64 / total as f64)
}

/// Token accuracy pooled over each author's tweets.
pub fn per_author_accuracy(tagger: &dyn Tagger, corpus: &Corpus) -> Result<HashMap<String, f64>> {
    let mut per_author: HashMap<String, (usize, usize)> = HashMap::new();
    for tweet in corpus.labeled_tweets() {
        let (c, t) = count_correct(tagger, std::iter::once(tweet))?;
        let entry = per_author.entry(tweet.author_id.clone()).or_insert((0, 0));
        entry.0 += c;
        entry.1 += t;
    }
    Ok(per_author
        .into_iter()
        .map(|(a, (c, t))| (a, c as f64 / t as f64))
        .collect())
}

fn count_correct<'a>(
    tagger: &dyn Tagger,
    tweets: impl Iterator<Item = &'a Tweet>,
) -> Result<(usize, usize)> {
    let tagset = tagger.tagset();
    let mut correct = 0;
    let mut total = 0;
    for tweet in tweets {
        let gold = tweet.tags.as_ref().expect("labeled tweets only");
        let predicted = tagger.tag_tweet(tweet);
        debug_assert_eq!(predicted.len(), tweet.tokens.len());
        for (tag, pred) in gold.iter().zip(&predicted) {
            let gold_id = tagset
                .index_of(tag)
                .ok_or_else(|| Error::usage(format!("gold tag {tag:?} not in model tagset")))?;
            if gold_id == *pred {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok((correct, total))
}

#[cfg(test)]
pub(crate) mod test_util {
    use crate::corpus::{parse_corpus, Corpus, Tagset};

    /// Builds a labeled corpus from (author, [(token, tag)]) triples.
    pub fn corpus_from(sentences: &[(&str, &[(&str, &str)])], tags: &[&str]) -> Corpus {
        let tagset = Tagset::new(tags.iter().map(|s| s.to_string()).collect()).unwrap();
        let mut text = String::new();
        for (i, (author, tokens)) in sentences.iter().enumerate() {
            text.push_str(&format!("# tweet_id = t{i}\n# author_id = {author}\n"));
            for (tok, tag) in tokens.iter() {
                text.push_str(&format!("{tok}\t{tag}\n"));
            }
            text.push('\n');
        }
        parse_corpus(&text, &tagset).unwrap()
    }
}

/// Toy fixtures shared by the neural-tagger test modules.
#[cfg(test)]
pub(crate) mod tests_support {
    use std::collections::HashMap;

    use super::test_util::corpus_from;
    use super::BasisConfig;
    use crate::corpus::{Corpus, LexicalResources};

    pub fn toy_resources() -> LexicalResources {
        let vectors: HashMap<String, Vec<f64>> = [
            ("the".to_string(), vec![0.1, -0.2]),
            ("dog".to_string(), vec![0.5, 0.3]),
        ]
        .into_iter()
        .collect();
        let brown: HashMap<String, String> = [
            ("the".to_string(), "0011".to_string()),
            ("dog".to_string(), "0110".to_string()),
            ("ran".to_string(), "11".to_string()),
        ]
        .into_iter()
        .collect();
        let dict: HashMap<String, Vec<(String, u64)>> = [(
            "run".to_string(),
            vec![("V".to_string(), 7), ("N".to_string(), 3)],
        )]
        .into_iter()
        .collect();
        LexicalResources::empty()
            .with_word_vectors(vectors)
            .unwrap()
            .with_brown_paths(brown)
            .add_tag_dict("ptb", dict)
    }

    pub fn toy_config() -> BasisConfig {
        BasisConfig {
            char_emb_dim: 3,
            char_hidden: 2,
            word_emb_dim: 3,
            pretrained_dim: 2,
            word_hidden: 3,
            fc_dim: 4,
            dropout: 0.35,
            l2: 0.01,
            lr: 0.01,
            epochs: 10,
            patience: 10,
            unk_prob: 0.5,
        }
    }

    pub fn toy_corpus() -> Corpus {
        corpus_from(
            &[
                ("a", &[("the", "D"), ("dog", "N"), ("ran", "V")]),
                ("b", &[("the", "D"), ("run", "V")]),
            ],
            &["N", "V", "D"],
        )
    }

    /// One labeled sentence per author, cycling a tiny vocabulary.
    pub fn toy_corpus_authors(authors: &[&str]) -> Corpus {
        let patterns: [&[(&str, &str)]; 3] = [
            &[("the", "D"), ("dog", "N"), ("ran", "V")],
            &[("the", "D"), ("run", "V")],
            &[("dog", "N"), ("ran", "V")],
        ];
        let sentences: Vec<(&str, &[(&str, &str)])> = authors
            .iter()
            .enumerate()
            .map(|(i, author)| (*author, patterns[i % patterns.len()]))
            .collect();
        corpus_from(&sentences, &["N", "V", "D"])
    }
}
