//! LINE-style node embeddings learned solely from the social graph.
//!
//! Training draws edges uniformly, applies the negative-sampling
//! objective of the chosen proximity order (noise distribution
//! proportional to degree^0.75, alias-method tables for O(1) draws),
//! and linearly decays the learning rate. The API deliberately takes no
//! corpus: embeddings never see text.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus;
use crate::error::{Error, Result};
use crate::socialgraph::SocialGraph;

/// Which proximity the objective models: first-order (vertex-vertex) or
/// second-order (vertex-context).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineOrder {
    First,
    Second,
}

#[derive(Clone, Debug)]
pub struct LineConfig {
    pub dim: usize,
    pub order: LineOrder,
    pub negatives: usize,
    /// Edge samples to draw; defaults to `max(100 |E|, 10^5)`.
    pub total_samples: Option<usize>,
    pub initial_lr: f64,
}

impl Default for LineConfig {
    fn default() -> Self {
        LineConfig {
            dim: 50,
            order: LineOrder::Second,
            negatives: 5,
            total_samples: None,
            initial_lr: 0.025,
        }
    }
}

impl LineConfig {
    fn resolved_samples(&self, num_edges: usize) -> usize {
        self.total_samples.unwrap_or((100 * num_edges).max(100_000))
    }
}

/// Author -> vector map; every embedded author is a node of the graph
/// the embedding was trained on.
#[derive(Clone, Debug)]
pub struct NodeEmbedding {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl NodeEmbedding {
    pub fn get(&self, author: &str) -> Option<&Vec<f64>> {
        self.vectors.get(author)
    }

    pub fn contains(&self, author: &str) -> bool {
        self.vectors.contains_key(author)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Serializes in the word-vector text format with the author id as
    /// the token, so `corpus::load_word_vectors` can reload it.
    pub fn save(&self, path: &Path) -> Result<()> {
        corpus::save_word_vectors(&self.vectors, path)
    }

    pub fn load(path: &Path) -> Result<NodeEmbedding> {
        let vectors = corpus::load_word_vectors(path)?;
        let dim = vectors.values().map(Vec::len).next().unwrap_or(0);
        Ok(NodeEmbedding { dim, vectors })
    }
}

/// Per-sample objective values, kept for diagnostics (training should
/// drive the sampled loss down over the run).
#[derive(Clone, Debug, Default)]
pub struct LineTrace {
    pub sample_loss: Vec<f64>,
}

impl LineTrace {
    pub fn decile_mean(&self, first: bool) -> f64 {
        let n = self.sample_loss.len();
        let k = (n / 10).max(1);
        let slice = if first {
            &self.sample_loss[..k]
        } else {
            &self.sample_loss[n - k..]
        };
        slice.iter().sum::<f64>() / slice.len() as f64
    }
}

pub fn train_line(
    graph: &SocialGraph,
    config: &LineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<NodeEmbedding> {
    train_line_traced(graph, config, rng).map(|(emb, _)| emb)
}

pub fn train_line_traced(
    graph: &SocialGraph,
    config: &LineConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(NodeEmbedding, LineTrace)> {
    if graph.num_nodes() == 0 || graph.num_edges() == 0 {
        return Err(Error::data("cannot embed an empty graph"));
    }
    let nodes = graph.nodes();
    let n = nodes.len();
    let dim = config.dim;
    let edges: Vec<(usize, usize)> = {
        let index: HashMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        graph.edges().map(|(u, v)| (index[u], index[v])).collect()
    };

    // Vertex vectors start small and uniform; context vectors start at
    // zero (second order only).
    let mut vertex: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
                .collect()
        })
        .collect();
    let mut context: Vec<Vec<f64>> = match config.order {
        LineOrder::Second => vec![vec![0.0; dim]; n],
        LineOrder::First => Vec::new(),
    };

    let noise = AliasTable::new(
        &nodes
            .iter()
            .map(|name| (graph.degree(name).unwrap_or(0) as f64).powf(0.75))
            .collect::<Vec<_>>(),
    );

    let total = config.resolved_samples(edges.len());
    let mut trace = LineTrace {
        sample_loss: Vec::with_capacity(total),
    };
    let mut source_update = vec![0.0; dim];
    let mut src_vec = vec![0.0; dim];
    for sample in 0..total {
        let progress = sample as f64 / total as f64;
        let lr = config.initial_lr * (1.0 - progress).max(1e-4);
        let (u, v) = edges[rng.random_range(0..edges.len())];
        let (src, pos) = if rng.random_bool(0.5) { (u, v) } else { (v, u) };

        source_update.iter_mut().for_each(|x| *x = 0.0);
        src_vec.copy_from_slice(&vertex[src]);
        let mut loss = 0.0;
        for neg_idx in 0..=config.negatives {
            let (target, label) = if neg_idx == 0 {
                (pos, 1.0)
            } else {
                let mut t = noise.sample(rng);
                let mut retries = 0;
                while t == pos && retries < 32 {
                    t = noise.sample(rng);
                    retries += 1;
                }
                (t, 0.0)
            };
            let target_vec: &mut Vec<f64> = match config.order {
                LineOrder::Second => &mut context[target],
                LineOrder::First => {
                    if target == src {
                        // First-order self pair contributes nothing useful;
                        // count it as a skipped negative.
                        continue;
                    }
                    &mut vertex[target]
                }
            };
            let z: f64 = src_vec
                .iter()
                .zip(target_vec.iter())
                .map(|(a, b)| a * b)
                .sum();
            let sig = stable_sigmoid(z);
            loss -= if label > 0.5 {
                sig.max(1e-12).ln()
            } else {
                (1.0 - sig).max(1e-12).ln()
            };
            let g = (label - sig) * lr;
            for d in 0..dim {
                source_update[d] += g * target_vec[d];
                target_vec[d] += g * src_vec[d];
            }
        }
        for d in 0..dim {
            vertex[src][d] += source_update[d];
        }
        trace.sample_loss.push(loss);
    }

    let vectors = nodes
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), vertex[i].clone()))
        .collect();
    Ok((NodeEmbedding { dim, vectors }, trace))
}

/// Cosine similarity; a zero vector paired with anything is defined as 0.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::usage(format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu * nv))
}

fn stable_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Walker alias table for O(1) sampling from a fixed discrete
/// distribution.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> AliasTable {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "alias table needs positive total weight");
        let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        let mut rem = scaled;
        for (i, &p) in rem.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            large.pop();
            prob[s] = rem[s];
            alias[s] = l;
            rem[l] -= 1.0 - rem[s];
            if rem[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        AliasTable { prob, alias }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeedStream;

    fn two_cliques(size: usize) -> SocialGraph {
        let mut edges = Vec::new();
        for clique in 0..2 {
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((format!("c{clique}_{i}"), format!("c{clique}_{j}")));
                }
            }
        }
        SocialGraph::from_edges(edges)
    }

    #[test]
    fn embeds_every_node_at_the_right_dim() {
        let g = two_cliques(5);
        let cfg = LineConfig {
            dim: 8,
            total_samples: Some(2000),
            ..Default::default()
        };
        let emb = train_line(&g, &cfg, &mut SeedStream::new(1).rng()).unwrap();
        assert_eq!(emb.len(), g.num_nodes());
        assert!(emb.vectors.values().all(|v| v.len() == 8));
    }

    #[test]
    fn empty_graph_is_data_error() {
        let g = SocialGraph::from_edges(Vec::<(String, String)>::new());
        assert!(matches!(
            train_line(&g, &LineConfig::default(), &mut SeedStream::new(1).rng()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn same_seed_gives_bitwise_identical_embeddings() {
        let g = two_cliques(4);
        let cfg = LineConfig {
            dim: 6,
            total_samples: Some(3000),
            ..Default::default()
        };
        let a = train_line(&g, &cfg, &mut SeedStream::new(9).rng()).unwrap();
        let b = train_line(&g, &cfg, &mut SeedStream::new(9).rng()).unwrap();
        for (name, va) in &a.vectors {
            let vb = &b.vectors[name];
            assert!(va.iter().zip(vb).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    /// Community-separation oracle: after training on two disjoint
    /// cliques, mean intra-clique cosine must exceed mean inter-clique
    /// cosine, and the sampled objective must have decreased.
    #[test]
    fn separates_two_cliques_and_loss_decreases() {
        let g = two_cliques(10);
        let cfg = LineConfig {
            dim: 8,
            ..Default::default()
        };
        let (emb, trace) = train_line_traced(&g, &cfg, &mut SeedStream::new(7).rng()).unwrap();
        let members = |c: usize| -> Vec<&Vec<f64>> {
            (0..10)
                .map(|i| &emb.vectors[&format!("c{c}_{i}")])
                .collect()
        };
        let (a, b) = (members(0), members(1));
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for group in [&a, &b] {
            for i in 0..group.len() {
                for j in (i + 1)..group.len() {
                    intra.push(cosine_similarity(group[i], group[j]).unwrap());
                }
            }
        }
        for va in &a {
            for vb in &b {
                inter.push(cosine_similarity(va, vb).unwrap());
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} <= inter {}",
            mean(&intra),
            mean(&inter)
        );
        assert!(
            trace.decile_mean(false) < trace.decile_mean(true),
            "objective did not decrease: first {} last {}",
            trace.decile_mean(true),
            trace.decile_mean(false)
        );
    }

    #[test]
    fn first_order_also_separates_cliques() {
        let g = two_cliques(8);
        let cfg = LineConfig {
            dim: 8,
            order: LineOrder::First,
            total_samples: Some(60_000),
            ..Default::default()
        };
        let emb = train_line(&g, &cfg, &mut SeedStream::new(5).rng()).unwrap();
        let intra = cosine_similarity(&emb.vectors["c0_0"], &emb.vectors["c0_1"]).unwrap();
        let inter = cosine_similarity(&emb.vectors["c0_0"], &emb.vectors["c1_0"]).unwrap();
        assert!(intra > inter, "intra {intra} <= inter {inter}");
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let got = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((got - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn embedding_roundtrips_through_word_vector_format() {
        let g = two_cliques(3);
        let cfg = LineConfig {
            dim: 4,
            total_samples: Some(500),
            ..Default::default()
        };
        let emb = train_line(&g, &cfg, &mut SeedStream::new(3).rng()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        emb.save(&path).unwrap();
        let loaded = NodeEmbedding::load(&path).unwrap();
        assert_eq!(loaded.dim, 4);
        assert_eq!(loaded.len(), emb.len());
        for (k, v) in &emb.vectors {
            let lv = &loaded.vectors[k];
            assert!(v.iter().zip(lv).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn alias_table_matches_weights() {
        let table = AliasTable::new(&[1.0, 3.0, 6.0]);
        let mut rng = SeedStream::new(4).rng();
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[table.sample(&mut rng)] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        for (freq, expected) in freqs.iter().zip([0.1, 0.3, 0.6]) {
            assert!((freq - expected).abs() < 0.01, "{freqs:?}");
        }
    }
}
