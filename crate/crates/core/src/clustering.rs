//! k-means over node embeddings and construction of network-aligned
//! versus random train/test author splits.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::node_embed::NodeEmbedding;
use crate::numerics::SeedStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Network,
    Random,
}

/// A train/test partition of the annotated authors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub provenance: Provenance,
    pub seed: u64,
    pub train: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl SplitSpec {
    pub fn is_train(&self, author: &str) -> bool {
        self.train.contains(author)
    }
}

/// Lloyd's algorithm with k-means++ seeding. Stops on stable assignments
/// or `max_iters`; an empty cluster is re-seeded from the point farthest
/// from its current centroid. Ties in assignment go to the lower cluster
/// index.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    max_iters: usize,
) -> Result<Vec<usize>> {
    kmeans_detailed(points, k, rng, max_iters).map(|d| d.assignments)
}

#[derive(Clone, Debug)]
pub struct KmeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster SSE recorded after each assignment step.
    pub sse_history: Vec<f64>,
}

pub fn kmeans_detailed(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    max_iters: usize,
) -> Result<KmeansResult> {
    if k == 0 {
        return Err(Error::usage("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::usage(format!(
            "k = {k} exceeds number of points {}",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::usage("points have inconsistent dimensions"));
    }

    let mut centroids = plus_plus_seeds(points, k, rng);
    let mut assignments = vec![0usize; points.len()];
    let mut sse_history = Vec::new();
    for _ in 0..max_iters {
        let mut changed = false;
        let mut sse = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (best, dist) = nearest(p, &centroids);
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
            sse += dist;
        }
        sse_history.push(sse);
        if !changed && sse_history.len() > 1 {
            break;
        }
        // Mean update.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignments[i]] += 1;
            for (s, &x) in sums[assignments[i]].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // Re-seed from the point farthest from its centroid.
                let far = points
                    .iter()
                    .enumerate()
                    .max_by(|(i, p), (j, q)| {
                        let da = sq_dist(p, &centroids[assignments[*i]]);
                        let db = sq_dist(q, &centroids[assignments[*j]]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .map(|(i, _)| i)
                    .expect("points non-empty");
                centroids[c] = points[far].clone();
            }
        }
    }
    Ok(KmeansResult {
        assignments,
        centroids,
        sse_history,
    })
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..points.len())].clone());
    let mut min_dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = min_dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in min_dist.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is on already-chosen positions
            // (duplicate points); fall back to a uniform draw.
            rng.random_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (d, p) in min_dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centroids.last().unwrap()));
        }
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = sq_dist(p, &centroids[0]);
    for (c, centroid) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(p, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Network-aligned split: k-means with k = 2 over the embeddings of the
/// annotated authors present in the network; the larger cluster trains.
/// Annotated authors absent from the network are assigned uniformly at
/// random to either side.
pub fn network_split(emb: &NodeEmbedding, corpus: &Corpus, seed: SeedStream) -> Result<SplitSpec> {
    let authors = corpus.annotated_authors();
    let embedded: Vec<&String> = authors.iter().filter(|a| emb.contains(a)).collect();
    let missing: Vec<&String> = authors.iter().filter(|a| !emb.contains(a)).collect();
    if embedded.is_empty() {
        return Err(Error::data(
            "no annotated author appears in the network embedding",
        ));
    }

    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    if embedded.len() == 1 {
        train.insert(embedded[0].clone());
    } else {
        let points: Vec<Vec<f64>> = embedded
            .iter()
            .map(|a| emb.get(a).expect("filtered to embedded").clone())
            .collect();
        let mut rng = seed.child("kmeans").rng();
        let assignments = kmeans(&points, 2, &mut rng, 100)?;
        let ones = assignments.iter().filter(|&&c| c == 1).count();
        let train_cluster = if ones * 2 > assignments.len() { 1 } else { 0 };
        for (author, &cluster) in embedded.iter().zip(&assignments) {
            if cluster == train_cluster {
                train.insert((*author).clone());
            } else {
                test.insert((*author).clone());
            }
        }
    }
    let mut rng = seed.child("missing").rng();
    for author in missing {
        if rng.random_bool(0.5) {
            train.insert(author.clone());
        } else {
            test.insert(author.clone());
        }
    }
    Ok(SplitSpec {
        provenance: Provenance::Network,
        seed: seed.seed(),
        train,
        test,
    })
}

/// Uniform random author partition with `train_size` training authors.
pub fn random_split(corpus: &Corpus, train_size: usize, seed: SeedStream) -> Result<SplitSpec> {
    let authors = corpus.annotated_authors();
    if train_size == 0 || train_size >= authors.len() {
        return Err(Error::usage(format!(
            "train_size {train_size} out of range for {} annotated authors",
            authors.len()
        )));
    }
    let mut shuffled = authors;
    let mut rng = seed.child("shuffle").rng();
    shuffle(&mut shuffled, &mut rng);
    let train: BTreeSet<String> = shuffled[..train_size].iter().cloned().collect();
    let test: BTreeSet<String> = shuffled[train_size..].iter().cloned().collect();
    Ok(SplitSpec {
        provenance: Provenance::Random,
        seed: seed.seed(),
        train,
        test,
    })
}

/// Random split size-matched to an existing split, so the two
/// conditions differ only in how authors are assigned.
pub fn paired_random_split(
    corpus: &Corpus,
    reference: &SplitSpec,
    seed: SeedStream,
) -> Result<SplitSpec> {
    random_split(corpus, reference.train.len(), seed)
}

/// Fisher-Yates; `rand::seq` shuffling is avoided so draw order is pinned
/// by this crate rather than by the rand crate's internals.
pub(crate) fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
