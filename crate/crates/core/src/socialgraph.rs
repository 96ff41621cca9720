//! Undirected simple graphs over authors, degree-preserving random
//! rewiring (double-edge swaps), and enumeration of connected annotated
//! pairs.
//!
//! Graphs are canonicalized at construction (nodes sorted, edges sorted
//! with endpoints normalized), so every operation — rewiring included —
//! is a pure function of the abstract graph and the seed, independent of
//! input file ordering.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SocialGraph {
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl SocialGraph {
    /// Builds a graph from node names and endpoint pairs. Self-loops are
    /// dropped, duplicates collapsed, direction discarded; nodes not
    /// listed explicitly are taken from the edges.
    pub fn from_parts<N, E>(nodes: N, edge_pairs: E) -> SocialGraph
    where
        N: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String)>,
    {
        let mut names: Vec<String> = nodes.into_iter().collect();
        let pairs: Vec<(String, String)> = edge_pairs.into_iter().collect();
        for (u, v) in &pairs {
            names.push(u.clone());
            names.push(v.clone());
        }
        names.sort();
        names.dedup();
        let node_index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let mut edges: Vec<(usize, usize)> = pairs
            .iter()
            .filter_map(|(u, v)| {
                let (a, b) = (node_index[u], node_index[v]);
                if a == b {
                    None
                } else {
                    Some((a.min(b), a.max(b)))
                }
            })
            .collect();
        edges.sort();
        edges.dedup();
        let edge_set: HashSet<(usize, usize)> = edges.iter().copied().collect();
        let mut adjacency = vec![Vec::new(); names.len()];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
        }
        SocialGraph {
            nodes: names,
            node_index,
            edges,
            edge_set,
            adjacency,
        }
    }

    pub fn from_edges<E>(edge_pairs: E) -> SocialGraph
    where
        E: IntoIterator<Item = (String, String)>,
    {
        SocialGraph::from_parts(std::iter::empty(), edge_pairs)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains_node(&self, author: &str) -> bool {
        self.node_index.contains_key(author)
    }

    pub fn degree(&self, author: &str) -> Option<usize> {
        self.node_index
            .get(author)
            .map(|&i| self.adjacency[i].len())
    }

    /// Edges as author-id pairs in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u].as_str(), self.nodes[v].as_str()))
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.node_index.get(a), self.node_index.get(b)) {
            (Some(&u), Some(&v)) => self.edge_set.contains(&(u.min(v), u.max(v))),
            _ => false,
        }
    }

    /// Degree multiset, as a sorted vector with one entry per node.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut degrees: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        degrees.sort_unstable();
        degrees
    }

    /// Degree-preserving randomization. Each epoch performs exactly
    /// `|E|` attempted double-edge swaps: two distinct edges are drawn
    /// uniformly, one of the two reconnection orientations is chosen
    /// uniformly, and the proposal is rejected (still consuming budget)
    /// if it would create a self-loop or duplicate edge. Graphs with
    /// fewer than two edges are returned unchanged.
    pub fn rewire_epochs(&self, epochs: usize, rng: &mut ChaCha8Rng) -> SocialGraph {
        let m = self.edges.len();
        let mut graph = self.clone();
        if m < 2 {
            return graph;
        }
        for _ in 0..epochs {
            for _ in 0..m {
                let i = rng.random_range(0..m);
                let j_raw = rng.random_range(0..m - 1);
                let j = if j_raw >= i { j_raw + 1 } else { j_raw };
                let (u, v) = graph.edges[i];
                let (x, y) = graph.edges[j];
                let (e1, e2) = if rng.random_bool(0.5) {
                    (norm_edge(u, x), norm_edge(v, y))
                } else {
                    (norm_edge(u, y), norm_edge(v, x))
                };
                let (Some(e1), Some(e2)) = (e1, e2) else {
                    continue; // self-loop
                };
                if e1 == e2 || graph.edge_set.contains(&e1) || graph.edge_set.contains(&e2) {
                    continue;
                }
                graph.edge_set.remove(&(u, v));
                graph.edge_set.remove(&(x, y));
                graph.edge_set.insert(e1);
                graph.edge_set.insert(e2);
                graph.edges[i] = e1;
                graph.edges[j] = e2;
            }
        }
        graph.rebuild_adjacency();
        graph
    }

    fn rebuild_adjacency(&mut self) {
        for neighbors in &mut self.adjacency {
            neighbors.clear();
        }
        for &(u, v) in &self.edges {
            self.adjacency[u].push(v);
            self.adjacency[v].push(u);
        }
        for neighbors in &mut self.adjacency {
            neighbors.sort_unstable();
        }
    }

    /// Edges of the graph whose both endpoints are annotated, each
    /// unordered pair once, in canonical order.
    pub fn connected_annotated_pairs(&self, annotated: &HashSet<String>) -> Vec<(String, String)> {
        self.edges
            .iter()
            .filter(|&&(u, v)| {
                annotated.contains(&self.nodes[u]) && annotated.contains(&self.nodes[v])
            })
            .map(|&(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }

    /// Annotated pairs within graph distance `max_dist` (1 = direct
    /// edges, 2 = also pairs sharing a neighbour, e.g. through crawled
    /// intermediaries). Each unordered pair appears once.
    pub fn connected_annotated_pairs_within(
        &self,
        annotated: &HashSet<String>,
        max_dist: usize,
    ) -> Vec<(String, String)> {
        if max_dist <= 1 {
            return self.connected_annotated_pairs(annotated);
        }
        let annotated_idx: Vec<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| annotated.contains(*n))
            .map(|(i, _)| i)
            .collect();
        let mut pairs: HashSet<(usize, usize)> = HashSet::new();
        for &u in &annotated_idx {
            for &w in &self.adjacency[u] {
                if w > u && annotated.contains(&self.nodes[w]) {
                    pairs.insert((u, w));
                }
                for &v in &self.adjacency[w] {
                    if v > u && annotated.contains(&self.nodes[v]) {
                        pairs.insert((u, v));
                    }
                }
            }
        }
        let mut out: Vec<(usize, usize)> = pairs.into_iter().collect();
        out.sort();
        out.into_iter()
            .map(|(u, v)| (self.nodes[u].clone(), self.nodes[v].clone()))
            .collect()
    }
}

fn norm_edge(a: usize, b: usize) -> Option<(usize, usize)> {
    if a == b {
        None
    } else {
        Some((a.min(b), a.max(b)))
    }
}

/// Loads `author_id \t author_id` lines; `#` comment lines and blanks
/// are skipped, duplicates collapsed, self-loops dropped.
pub fn load_edge_list(path: &Path) -> Result<SocialGraph> {
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text).map_err(|e| match e {
        Error::Data(msg) => Error::data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_edge_list(text: &str) -> Result<SocialGraph> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::data(format!(
                "line {}: expected two author ids, found {}",
                i + 1,
                fields.len()
            )));
        }
        pairs.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(SocialGraph::from_edges(pairs))
}

pub fn save_edge_list(graph: &SocialGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (u, v) in graph.edges() {
        out.push_str(u);
        out.push('\t');
        out.push_str(v);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::numerics::SeedStream;
    use proptest::prelude::*;

    fn graph_of(edges: &[(&str, &str)]) -> SocialGraph {
        SocialGraph::from_edges(edges.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }

    #[test]
    fn load_collapses_duplicates_and_self_loops() {
        let g = parse_edge_list("a\tb\nb\ta\na\ta\n").unwrap();
        assert_eq!(g.num_edges(), 1);
        assert!(g.has_edge("a", "b"));
        assert_eq!(g.num_nodes(), 2);
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let g = parse_edge_list("# only a comment\n").unwrap();
        assert_eq!(g.num_nodes(), 0);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn path_graph_degrees() {
        let g = parse_edge_list("a\tb\nb\tc\n").unwrap();
        assert_eq!(g.degree("a"), Some(1));
        assert_eq!(g.degree("b"), Some(2));
        assert_eq!(g.degree("c"), Some(1));
    }

    #[test]
    fn bad_field_count_is_data_error() {
        assert!(parse_edge_list("a b c\n").is_err());
        assert!(parse_edge_list("a\n").is_err());
    }

    #[test]
    fn degree_sequences() {
        let triangle = graph_of(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(triangle.degree_sequence(), vec![2, 2, 2]);
        let single = graph_of(&[("a", "b")]);
        assert_eq!(single.degree_sequence(), vec![1, 1]);
        let star = graph_of(&[("hub", "a"), ("hub", "b"), ("hub", "c")]);
        assert_eq!(star.degree_sequence(), vec![1, 1, 1, 3]);
    }

    #[test]
    fn single_edge_graph_never_rewires() {
        let g = graph_of(&[("a", "b")]);
        let mut rng = SeedStream::new(3).rng();
        let r = g.rewire_epochs(5, &mut rng);
        assert_eq!(r.num_edges(), 1);
        assert!(r.has_edge("a", "b"));
    }

    #[test]
    fn two_edge_swap_lands_on_a_perfect_matching() {
        // Hand enumeration: a swap of {(a,b),(c,d)} can only produce
        // {(a,c),(b,d)} or {(a,d),(b,c)}; every outcome keeps degrees 1.
        let g = graph_of(&[("a", "b"), ("c", "d")]);
        let matchings = [
            vec![("a", "b"), ("c", "d")],
            vec![("a", "c"), ("b", "d")],
            vec![("a", "d"), ("b", "c")],
        ];
        let mut seen_changed = false;
        for seed in 0..10 {
            let mut rng = SeedStream::new(seed).child("swap").rng();
            let r = g.rewire_epochs(1, &mut rng);
            assert_eq!(r.degree_sequence(), vec![1, 1, 1, 1]);
            let ok = matchings
                .iter()
                .any(|m| m.iter().all(|(u, v)| r.has_edge(u, v)));
            assert!(ok, "unexpected edge set");
            if !r.has_edge("a", "b") {
                seen_changed = true;
            }
        }
        assert!(seen_changed);
    }

    #[test]
    fn rewire_is_seed_deterministic() {
        let g = random_graph(60, 150, 11);
        let edges = |g: &SocialGraph| -> Vec<(String, String)> {
            g.edges()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect()
        };
        let a = g.rewire_epochs(4, &mut SeedStream::new(5).rng());
        let b = g.rewire_epochs(4, &mut SeedStream::new(5).rng());
        assert_eq!(edges(&a), edges(&b));
        let c = g.rewire_epochs(4, &mut SeedStream::new(6).rng());
        assert_ne!(edges(&a), edges(&c));
    }

    #[test]
    fn rewiring_perturbs_large_graphs() {
        let g = random_graph(100, 220, 21);
        for seed in 0..10u64 {
            let mut rng = SeedStream::new(seed).child("perturb").rng();
            let r = g.rewire_epochs(10, &mut rng);
            let original: HashSet<(String, String)> = g
                .edges()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
            let changed = r
                .edges()
                .any(|(a, b)| !original.contains(&(a.to_string(), b.to_string())));
            assert!(changed, "seed {seed} left the edge set identical");
        }
    }

    #[test]
    fn annotated_pair_enumeration() {
        let g = graph_of(&[("a", "b"), ("b", "c")]);
        let ann: HashSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            g.connected_annotated_pairs(&ann),
            vec![("a".to_string(), "b".to_string())]
        );
        assert!(g.connected_annotated_pairs(&HashSet::new()).is_empty());
        let triangle = graph_of(&[("a", "b"), ("b", "c"), ("a", "c")]);
        let all: HashSet<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(triangle.connected_annotated_pairs(&all).len(), 3);
    }

    #[test]
    fn distance_two_pairs_include_shared_neighbors() {
        let g = graph_of(&[("a", "m"), ("m", "b")]);
        let ann: HashSet<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert!(g.connected_annotated_pairs(&ann).is_empty());
        assert_eq!(
            g.connected_annotated_pairs_within(&ann, 2),
            vec![("a".to_string(), "b".to_string())]
        );
    }

    pub(crate) fn random_graph(n: usize, m: usize, seed: u64) -> SocialGraph {
        let mut rng = SeedStream::new(seed).child("gen").rng();
        let mut pairs = HashSet::new();
        while pairs.len() < m {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort();
        SocialGraph::from_parts(
            (0..n).map(|i| format!("n{i:03}")),
            pairs
                .into_iter()
                .map(|(a, b)| (format!("n{a:03}"), format!("n{b:03}"))),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rewiring_preserves_degree_multiset(
            n in 4usize..40,
            m_frac in 0.1f64..0.9,
            epochs in 1usize..6,
            seed in 0u64..1000,
        ) {
            let max_edges = n * (n - 1) / 2;
            let m = ((max_edges as f64 * m_frac) as usize).clamp(2, max_edges);
            let g = random_graph(n, m, seed);
            let mut rng = SeedStream::new(seed).child("rewire").rng();
            let r = g.rewire_epochs(epochs, &mut rng);
            prop_assert_eq!(r.degree_sequence(), g.degree_sequence());
            prop_assert_eq!(r.num_edges(), g.num_edges());
            // No self-loops / duplicates: canonical edge list is strictly
            // increasing pairs with distinct endpoints.
            let mut seen = HashSet::new();
            for (u, v) in r.edges() {
                prop_assert!(u < v);
                prop_assert!(seen.insert((u.to_string(), v.to_string())));
            }
        }
    }
}
