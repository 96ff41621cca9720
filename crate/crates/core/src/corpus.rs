//! Data model and ingestion: annotated tweets, tagsets, and external
//! lexical resources (word vectors, Brown clusters, tag dictionaries).
//!
//! Corpus files are UTF-8 blocks separated by blank lines. Each block
//! starts with `# tweet_id = <s>` and `# author_id = <s>` header lines,
//! followed by one `token<TAB>tag` (or bare `token`) line per token.
//! A tagset file lists one tag symbol per line, in index order.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ordered tagset; the index is a bijection onto `0..len`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tagset {
    tags: Vec<String>,
    index: HashMap<String, usize>,
}

impl Serialize for Tagset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.tags.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Tagset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let tags = Vec::<String>::deserialize(deserializer)?;
        Tagset::new(tags).map_err(serde::de::Error::custom)
    }
}

impl Tagset {
    pub fn new(tags: Vec<String>) -> Result<Self> {
        if tags.is_empty() {
            return Err(Error::data("tagset is empty"));
        }
        let mut index = HashMap::new();
        for (i, tag) in tags.iter().enumerate() {
            if index.insert(tag.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate tag symbol {tag:?}")));
            }
        }
        Ok(Tagset { tags, index })
    }

    /// One tag symbol per line, order = index; blank lines ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let tags: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect();
        Tagset::new(tags).map_err(|e| Error::data(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn tag(&self, id: usize) -> &str {
        &self.tags[id]
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }
}

/// A single token: raw surface form plus its normalized form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        let normalized = normalize_token(&surface);
        Token {
            surface,
            normalized,
        }
    }
}

/// One message: tokens, author, and (for annotated data) gold tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tweet {
    pub tweet_id: String,
    pub author_id: String,
    pub tokens: Vec<Token>,
    pub tags: Option<Vec<String>>,
}

impl Tweet {
    pub fn is_labeled(&self) -> bool {
        self.tags.is_some()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub tweets: Vec<Tweet>,
    pub tagset: Tagset,
}

impl Corpus {
    pub fn num_tokens(&self) -> usize {
        self.tweets.iter().map(Tweet::len).sum()
    }

    pub fn labeled_tweets(&self) -> impl Iterator<Item = &Tweet> {
        self.tweets.iter().filter(|t| t.is_labeled())
    }

    /// Authors owning at least one labeled tweet, sorted and deduplicated.
    pub fn annotated_authors(&self) -> Vec<String> {
        let mut authors: Vec<String> = self.labeled_tweets().map(|t| t.author_id.clone()).collect();
        authors.sort();
        authors.dedup();
        authors
    }

    /// Restricts the corpus to tweets whose author passes the filter.
    pub fn filter_by_author(&self, keep: impl Fn(&str) -> bool) -> Corpus {
        Corpus {
            tweets: self
                .tweets
                .iter()
                .filter(|t| keep(&t.author_id))
                .cloned()
                .collect(),
            tagset: self.tagset.clone(),
        }
    }
}

const MENTION_TOKEN: &str = "<@MENTION>";
const URL_TOKEN: &str = "<URL>";

/// Lowercases a token and collapses @-mentions to `<@MENTION>` and
/// URLs/email addresses to `<URL>`. Total and idempotent.
pub fn normalize_token(surface: &str) -> String {
    // The replacement literals must map to themselves.
    if surface == MENTION_TOKEN || surface == URL_TOKEN {
        return surface.to_string();
    }
    let lower = surface.to_lowercase();
    if is_mention(&lower) {
        MENTION_TOKEN.to_string()
    } else if is_url(&lower) || is_email(&lower) {
        URL_TOKEN.to_string()
    } else {
        lower
    }
}

fn is_mention(token: &str) -> bool {
    let mut chars = token.chars();
    if chars.next() != Some('@') {
        return false;
    }
    let rest = chars.as_str();
    !rest.is_empty() && rest.chars().all(|c| c.is_alphanumeric() || c == '_')
}

fn is_url(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://") || token.starts_with("www.")
}

fn is_email(token: &str) -> bool {
    let Some((local, domain)) = token.split_once('@') else {
        return false;
    };
    if local.is_empty() || domain.contains('@') {
        return false;
    }
    let Some((host, tld)) = domain.rsplit_once('.') else {
        return false;
    };
    !host.is_empty() && !tld.is_empty() && tld.chars().all(|c| c.is_alphanumeric())
}

/// Parses a corpus file (format above). Tokens are normalized at load so
/// every downstream consumer sees one consistent view.
pub fn load_corpus(path: &Path, tagset: &Tagset) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text, tagset).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_corpus(text: &str, tagset: &Tagset) -> Result<Corpus> {
    let mut tweets = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            if !block.is_empty() {
                tweets.push(parse_block(&block, tagset)?);
                block.clear();
            }
        } else {
            block.push((lineno + 1, raw));
        }
    }
    if !block.is_empty() {
        tweets.push(parse_block(&block, tagset)?);
    }
    Ok(Corpus {
        tweets,
        tagset: tagset.clone(),
    })
}

fn parse_block(lines: &[(usize, &str)], tagset: &Tagset) -> Result<Tweet> {
    let first_line = lines[0].0;
    let mut tweet_id: Option<String> = None;
    let mut author_id: Option<String> = None;
    let mut tokens = Vec::new();
    let mut tags: Vec<Option<String>> = Vec::new();
    for &(lineno, raw) in lines {
        if let Some(rest) = raw.strip_prefix('#') {
            let Some((key, value)) = rest.split_once('=') else {
                return Err(Error::data(format!("line {lineno}: malformed header")));
            };
            match key.trim() {
                "tweet_id" => tweet_id = Some(value.trim().to_string()),
                "author_id" => author_id = Some(value.trim().to_string()),
                other => {
                    return Err(Error::data(format!(
                        "line {lineno}: unknown header key {other:?}"
                    )))
                }
            }
        } else {
            match raw.split_once('\t') {
                Some((tok, tag)) => {
                    let tag = tag.trim();
                    if tagset.index_of(tag).is_none() {
                        return Err(Error::data(format!(
                            "line {lineno}: tag {tag:?} not in tagset"
                        )));
                    }
                    tokens.push(Token::new(tok));
                    tags.push(Some(tag.to_string()));
                }
                None => {
                    tokens.push(Token::new(raw.trim_end()));
                    tags.push(None);
                }
            }
        }
    }
    let tweet_id = tweet_id
        .ok_or_else(|| Error::data(format!("line {first_line}: missing tweet_id header")))?;
    let author_id = author_id
        .ok_or_else(|| Error::data(format!("line {first_line}: missing author_id header")))?;
    if author_id.is_empty() {
        return Err(Error::data(format!("line {first_line}: empty author_id")));
    }
    if tokens.is_empty() {
        return Err(Error::data(format!(
            "line {first_line}: block has no tokens"
        )));
    }
    let labeled = tags.iter().filter(|t| t.is_some()).count();
    let tags = if labeled == tokens.len() {
        Some(tags.into_iter().map(Option::unwrap).collect())
    } else if labeled == 0 {
        None
    } else {
        return Err(Error::data(format!(
            "line {first_line}: block mixes labeled and unlabeled tokens ({labeled} of {} tagged)",
            tokens.len()
        )));
    };
    Ok(Tweet {
        tweet_id,
        author_id,
        tokens,
        tags,
    })
}

/// Serializes a corpus back to the block format; `load_corpus` of the
/// output reproduces the corpus exactly.
pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (i, tweet) in corpus.tweets.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# tweet_id = {}\n", tweet.tweet_id));
        out.push_str(&format!("# author_id = {}\n", tweet.author_id));
        for (j, token) in tweet.tokens.iter().enumerate() {
            match &tweet.tags {
                Some(tags) => out.push_str(&format!("{}\t{}\n", token.surface, tags[j])),
                None => out.push_str(&format!("{}\n", token.surface)),
            }
        }
    }
    out
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    fs::write(path, corpus_to_string(corpus))?;
    Ok(())
}

/// External lexical resources shared by the feature-based taggers.
#[derive(Clone, Debug, Default)]
pub struct LexicalResources {
    /// Pretrained word vectors; all vectors share one dimension.
    pub word_vectors: HashMap<String, Vec<f64>>,
    pub vector_dim: usize,
    /// Brown-cluster binary tree paths per word.
    pub brown_paths: HashMap<String, String>,
    /// Named tag dictionaries: word -> (tag, count) sorted by count desc.
    pub tag_dicts: BTreeMap<String, HashMap<String, Vec<(String, u64)>>>,
}

impl LexicalResources {
    pub fn empty() -> Self {
        LexicalResources::default()
    }

    pub fn with_word_vectors(mut self, vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        let mut dims = vectors.values().map(Vec::len);
        if let Some(first) = dims.next() {
            if dims.any(|d| d != first) {
                return Err(Error::data("word vectors have inconsistent dimensions"));
            }
            self.vector_dim = first;
        }
        self.word_vectors = vectors;
        Ok(self)
    }

    pub fn with_brown_paths(mut self, paths: HashMap<String, String>) -> Self {
        self.brown_paths = paths;
        self
    }

    pub fn add_tag_dict(
        mut self,
        name: impl Into<String>,
        dict: HashMap<String, Vec<(String, u64)>>,
    ) -> Self {
        self.tag_dicts.insert(name.into(), dict);
        self
    }
}

/// Whitespace-separated word-vector text format with an optional `N D`
/// header line. Duplicate words keep their first occurrence.
pub fn load_word_vectors(path: &Path) -> Result<HashMap<String, Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    parse_word_vectors(&text).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_word_vectors(text: &str) -> Result<HashMap<String, Vec<f64>>> {
    let mut map: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dim: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        // Header: first line of exactly two integer fields.
        if i == 0
            && fields.len() == 2
            && fields[0].parse::<usize>().is_ok()
            && fields[1].parse::<usize>().is_ok()
        {
            continue;
        }
        if fields.len() < 2 {
            return Err(Error::data(format!(
                "line {lineno}: expected word and vector components"
            )));
        }
        let word = fields[0].to_string();
        let vec: Vec<f64> = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::data(format!("line {lineno}: bad vector component {f:?}")))
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(vec.len()),
            Some(d) if d != vec.len() => {
                return Err(Error::data(format!(
                    "line {lineno}: vector of dim {} in a file of dim {d}",
                    vec.len()
                )));
            }
            _ => {}
        }
        map.entry(word).or_insert(vec);
    }
    Ok(map)
}

/// Writes vectors in the `load_word_vectors` text format (with header),
/// rows sorted by word for reproducible output.
pub fn save_word_vectors(vectors: &HashMap<String, Vec<f64>>, path: &Path) -> Result<()> {
    let dim = vectors.values().map(Vec::len).next().unwrap_or(0);
    let mut words: Vec<&String> = vectors.keys().collect();
    words.sort();
    let mut out = format!("{} {}\n", vectors.len(), dim);
    for word in words {
        out.push_str(word);
        for v in &vectors[word] {
            out.push(' ');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Brown cluster file: `bitstring \t word \t count` per line. Duplicate
/// words keep the path with the higher count.
pub fn load_brown_clusters(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)?;
    parse_brown_clusters(&text).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_brown_clusters(text: &str) -> Result<HashMap<String, String>> {
    let mut best: HashMap<String, (String, u64)> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::data(format!(
                "line {lineno}: expected bitstring, word, count"
            )));
        }
        let bits = fields[0];
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::data(format!(
                "line {lineno}: bitstring {bits:?} is not binary"
            )));
        }
        if bits.len() > 16 {
            return Err(Error::data(format!(
                "line {lineno}: bitstring longer than 16 bits"
            )));
        }
        let count: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("line {lineno}: bad count {:?}", fields[2])))?;
        let word = fields[1].to_string();
        match best.get(&word) {
            Some((_, existing)) if *existing >= count => {}
            _ => {
                best.insert(word, (bits.to_string(), count));
            }
        }
    }
    Ok(best.into_iter().map(|(w, (b, _))| (w, b)).collect())
}

/// Tag dictionary file: `word \t tag \t count` per line. Counts are
/// aggregated per (word, tag); entries sorted by count descending with
/// lexicographic tag tie-break.
pub fn load_tag_dictionary(path: &Path) -> Result<HashMap<String, Vec<(String, u64)>>> {
    let text = fs::read_to_string(path)?;
    parse_tag_dictionary(&text).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_tag_dictionary(text: &str) -> Result<HashMap<String, Vec<(String, u64)>>> {
    let mut counts: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::data(format!(
                "line {lineno}: expected word, tag, count"
            )));
        }
        let count: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("line {lineno}: bad count {:?}", fields[2])))?;
        *counts
            .entry(fields[0].to_string())
            .or_default()
            .entry(fields[1].to_string())
            .or_default() += count;
    }
    Ok(counts
        .into_iter()
        .map(|(word, per_tag)| {
            let mut entries: Vec<(String, u64)> = per_tag.into_iter().collect();
            // BTreeMap already yields lexicographic tag order, so a
            // stable sort by descending count keeps that tie-break.
            entries.sort_by_key(|e| std::cmp::Reverse(e.1));
            (word, entries)
        })
        .collect())
}
