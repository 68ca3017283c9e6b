//! Attributed-network data model, edge splits, and synthetic graphs.
//!
//! Graphs are undirected, stored as CSR adjacency (both directions) plus a
//! CSR table of per-node attribute-id sets over a universe of size `|A|`.
//! Node ids are dense integers in `[0, |V|)`; loaders remap arbitrary tokens
//! (see [`io`]). Graphs are immutable once constructed, so concurrent readers
//! need no synchronization.

mod synthetic;

pub mod io;

pub use synthetic::{generate_synthetic, SyntheticConfig};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hashing::ElementSet;

// ---------------------------------------------------------------------------
// AttributedGraph
// ---------------------------------------------------------------------------

/// An undirected graph whose nodes carry attribute-id sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedGraph {
    adj_offsets: Vec<usize>,
    adj_targets: Vec<u32>,
    attr_offsets: Vec<usize>,
    attr_ids: Vec<u32>,
    universe_size: u32,
    edge_count: usize,
}

impl AttributedGraph {
    /// Builds a graph from an edge list and per-node attribute sets.
    ///
    /// Duplicate edges collapse silently (set semantics); self-loops and
    /// attribute ids outside `[0, universe_size)` are rejected.
    pub fn from_parts<E>(
        node_count: usize,
        edges: E,
        attributes: Vec<ElementSet>,
        universe_size: u32,
    ) -> Result<Self>
    where
        E: IntoIterator<Item = (u32, u32)>,
    {
        if universe_size == 0 {
            return Err(Error::InvalidParameter(
                "universe size must be at least 1".into(),
            ));
        }
        if attributes.len() != node_count {
            return Err(Error::InvalidParameter(format!(
                "expected {node_count} attribute sets, got {}",
                attributes.len()
            )));
        }

        let mut normalized: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("self-loop at node {u}")));
            }
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) references a node outside [0, {node_count})"
                )));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let edge_count = normalized.len();

        let mut degrees = vec![0usize; node_count];
        for &(u, v) in &normalized {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut adj_offsets = Vec::with_capacity(node_count + 1);
        adj_offsets.push(0);
        for v in 0..node_count {
            adj_offsets.push(adj_offsets[v] + degrees[v]);
        }
        let mut adj_targets = vec![0u32; 2 * edge_count];
        let mut cursor = adj_offsets.clone();
        for &(u, v) in &normalized {
            adj_targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            adj_targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..node_count {
            adj_targets[adj_offsets[v]..adj_offsets[v + 1]].sort_unstable();
        }

        let mut attr_offsets = Vec::with_capacity(node_count + 1);
        attr_offsets.push(0);
        let mut attr_ids = Vec::new();
        for (v, set) in attributes.iter().enumerate() {
            if let Some(&max) = set.ids().last() {
                if max >= universe_size {
                    return Err(Error::Validation(format!(
                        "node {v} has attribute id {max} outside the universe [0, {universe_size})"
                    )));
                }
            }
            attr_ids.extend_from_slice(set.ids());
            attr_offsets.push(attr_ids.len());
        }

        Ok(Self {
            adj_offsets,
            adj_targets,
            attr_offsets,
            attr_ids,
            universe_size,
            edge_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adj_offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn universe_size(&self) -> u32 {
        self.universe_size
    }

    /// The reserved empty-set marker: one past the largest attribute id.
    pub fn sentinel(&self) -> u32 {
        self.universe_size
    }

    /// `2|E| / |V|`.
    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj_offsets[v as usize + 1] - self.adj_offsets[v as usize]
    }

    /// Sorted neighbor ids of `v`.
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj_targets[self.adj_offsets[v as usize]..self.adj_offsets[v as usize + 1]]
    }

    /// Sorted attribute ids of `v`.
    pub fn attributes(&self, v: u32) -> &[u32] {
        &self.attr_ids[self.attr_offsets[v as usize]..self.attr_offsets[v as usize + 1]]
    }

    pub fn attribute_set(&self, v: u32) -> ElementSet {
        ElementSet::from_sorted_unchecked(self.attributes(v).to_vec())
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Same nodes and attributes, different edge set.
    pub fn with_edges<E: IntoIterator<Item = (u32, u32)>>(&self, edges: E) -> Result<Self> {
        let attributes = (0..self.node_count() as u32)
            .map(|v| self.attribute_set(v))
            .collect();
        Self::from_parts(self.node_count(), edges, attributes, self.universe_size)
    }

    /// Same structure, attribute sets permuted across nodes. Used as the
    /// shuffled control in homophily-signal experiments.
    pub fn shuffle_attributes<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let mut order: Vec<u32> = (0..self.node_count() as u32).collect();
        order.shuffle(rng);
        let attributes: Vec<ElementSet> = order.iter().map(|&v| self.attribute_set(v)).collect();
        Self::from_parts(self.node_count(), self.edges(), attributes, self.universe_size)
            .expect("permuting attributes preserves validity")
    }
}

// ---------------------------------------------------------------------------
// Edge splits
// ---------------------------------------------------------------------------

/// A train/test partition of a graph's edges plus sampled negatives.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub train_graph: AttributedGraph,
    pub test_positives: Vec<(u32, u32)>,
    pub test_negatives: Vec<(u32, u32)>,
    pub train_ratio: f64,
}

/// Uniformly partitions edges into train/test and samples one negative
/// (uniform non-edge of the ORIGINAL graph) per held-out positive.
///
/// The train graph keeps `ceil(train_ratio * |E|)` edges and every node and
/// attribute set. Errors if fewer than 2 edges, if the ratio holds out
/// nothing, or if negatives cannot be sampled (e.g. a complete graph).
pub fn split_edges<R: Rng + ?Sized>(
    g: &AttributedGraph,
    train_ratio: f64,
    rng: &mut R,
) -> Result<LinkSplit> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train ratio must lie in (0, 1); got {train_ratio}"
        )));
    }
    let edge_count = g.edge_count();
    if edge_count < 2 {
        return Err(Error::Split(format!(
            "need at least 2 edges to split, graph has {edge_count}"
        )));
    }

    let mut edges: Vec<(u32, u32)> = g.edges().collect();
    edges.shuffle(rng);
    let train_count = (train_ratio * edge_count as f64).ceil() as usize;
    if train_count >= edge_count {
        return Err(Error::Split(format!(
            "ratio {train_ratio} holds out no test edges ({edge_count} edges)"
        )));
    }
    let test_positives: Vec<(u32, u32)> = edges.split_off(train_count);
    let train_graph = g.with_edges(edges)?;

    let test_negatives = sample_negatives(g, test_positives.len(), rng)?;

    Ok(LinkSplit {
        train_graph,
        test_positives,
        test_negatives,
        train_ratio,
    })
}

/// Uniform iid non-edges of `g` (never self-loops, never true edges).
fn sample_negatives<R: Rng + ?Sized>(
    g: &AttributedGraph,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(u32, u32)>> {
    let n = g.node_count() as u64;
    let pair_count = n * n.saturating_sub(1) / 2;
    let non_edges = pair_count.saturating_sub(g.edge_count() as u64);
    if non_edges == 0 {
        return Err(Error::Split(
            "graph has no non-edges to sample negatives from".into(),
        ));
    }

    let mut negatives = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = 100 * count + 10_000;
    while negatives.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Split(format!(
                "negative sampling exceeded {budget} attempts; graph too dense"
            )));
        }
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        negatives.push((u.min(v), u.max(v)));
    }
    Ok(negatives)
}
