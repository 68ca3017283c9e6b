//! Planted-partition synthetic graphs with community-aligned attributes.
//!
//! Used by the scaling benchmarks (constant average degree while `|V|`
//! grows) and by link-prediction sanity experiments: each community owns a
//! disjoint attribute block, so structural communities are detectable
//! through attribute Jaccard similarity.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::hashing::ElementSet;

/// Fraction of expected edges placed inside communities (when there is more
/// than one community).
const INTRA_EDGE_FRACTION: f64 = 0.9;

/// Parameters of the planted-partition generator.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub node_count: usize,
    pub avg_degree: f64,
    pub communities: usize,
    pub attrs_per_node: usize,
    pub universe_size: u32,
    /// Probability that an attribute draw comes from the node's own
    /// community block rather than the whole universe.
    pub attr_affinity: f64,
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.communities == 0 || self.node_count < self.communities {
            return Err(Error::InvalidParameter(format!(
                "need node_count >= communities >= 1; got {} nodes, {} communities",
                self.node_count, self.communities
            )));
        }
        if self.avg_degree.is_nan()
            || self.avg_degree < 0.0
            || self.avg_degree >= self.node_count as f64
        {
            return Err(Error::InvalidParameter(format!(
                "average degree {} infeasible for {} nodes",
                self.avg_degree, self.node_count
            )));
        }
        if self.universe_size == 0 {
            return Err(Error::InvalidParameter(
                "universe size must be at least 1".into(),
            ));
        }
        if self.attrs_per_node as u64 > u64::from(self.universe_size) {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {} distinct attributes from a universe of {}",
                self.attrs_per_node, self.universe_size
            )));
        }
        if !(0.0..=1.0).contains(&self.attr_affinity) {
            return Err(Error::InvalidParameter(format!(
                "attribute affinity must lie in [0, 1]; got {}",
                self.attr_affinity
            )));
        }
        Ok(())
    }
}

/// Community of node `v` under balanced contiguous blocks.
fn community_of(v: usize, node_count: usize, communities: usize) -> usize {
    v * communities / node_count
}

/// Generates a planted-partition graph with expected average degree
/// `avg_degree` and community-aligned attribute sets.
pub fn generate_synthetic<R: Rng + ?Sized>(
    cfg: &SyntheticConfig,
    rng: &mut R,
) -> Result<AttributedGraph> {
    cfg.validate()?;
    let n = cfg.node_count;
    let k = cfg.communities;

    // Community boundaries: block c covers [bounds[c], bounds[c+1]).
    let bounds: Vec<usize> = (0..=k).map(|c| c * n / k).collect();

    let intra_pairs: u64 = (0..k)
        .map(|c| {
            let size = (bounds[c + 1] - bounds[c]) as u64;
            size * size.saturating_sub(1) / 2
        })
        .sum();
    let total_pairs = (n as u64) * (n as u64 - 1) / 2;
    let inter_pairs = total_pairs - intra_pairs;

    let expected_edges = cfg.avg_degree * n as f64 / 2.0;
    let (intra_share, inter_share) = if k == 1 {
        (1.0, 0.0)
    } else {
        (INTRA_EDGE_FRACTION, 1.0 - INTRA_EDGE_FRACTION)
    };
    let p_intra = if intra_pairs == 0 {
        0.0
    } else {
        expected_edges * intra_share / intra_pairs as f64
    };
    let p_inter = if inter_pairs == 0 {
        0.0
    } else {
        expected_edges * inter_share / inter_pairs as f64
    };
    if p_intra > 1.0 || p_inter > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "average degree {} is infeasible for this community layout",
            cfg.avg_degree
        )));
    }

    // G(n, p) per region: draw the edge count from Binomial(pairs, p), then
    // sample that many distinct pairs uniformly. Equivalent to independent
    // per-pair coin flips but O(|E|) instead of O(|V|^2).
    let mut edges: HashSet<(u32, u32)> = HashSet::new();
    for c in 0..k {
        let (lo, hi) = (bounds[c], bounds[c + 1]);
        let size = (hi - lo) as u64;
        let pairs = size * size.saturating_sub(1) / 2;
        if pairs == 0 || p_intra == 0.0 {
            continue;
        }
        let count = Binomial::new(pairs, p_intra)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng);
        sample_distinct_pairs(rng, count, &mut edges, |rng| {
            let u = rng.random_range(lo..hi) as u32;
            let v = rng.random_range(lo..hi) as u32;
            (u, v)
        });
    }
    if inter_pairs > 0 && p_inter > 0.0 {
        let count = Binomial::new(inter_pairs, p_inter)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng);
        sample_distinct_pairs(rng, count, &mut edges, |rng| {
            let u = rng.random_range(0..n) as u32;
            let v = rng.random_range(0..n) as u32;
            if community_of(u as usize, n, k) == community_of(v as usize, n, k) {
                (u, u) // same community: rejected as a pseudo self-loop
            } else {
                (u, v)
            }
        });
    }

    // Attribute blocks mirror the community layout over the universe.
    let a = u64::from(cfg.universe_size);
    let attr_bounds: Vec<u64> = (0..=k as u64).map(|c| c * a / k as u64).collect();
    let mut attributes = Vec::with_capacity(n);
    for v in 0..n {
        let c = community_of(v, n, k);
        let (own_lo, own_hi) = (attr_bounds[c], attr_bounds[c + 1]);
        let mut ids: HashSet<u32> = HashSet::with_capacity(cfg.attrs_per_node);
        let mut attempts = 0usize;
        let budget = 100 * cfg.attrs_per_node + 100;
        while ids.len() < cfg.attrs_per_node && attempts < budget {
            attempts += 1;
            let from_own_block = own_hi > own_lo && rng.random_bool(cfg.attr_affinity);
            let id = if from_own_block {
                rng.random_range(own_lo..own_hi) as u32
            } else {
                rng.random_range(0..a) as u32
            };
            ids.insert(id);
        }
        attributes.push(ElementSet::from_ids(ids));
    }

    let mut edge_list: Vec<(u32, u32)> = edges.into_iter().collect();
    edge_list.sort_unstable();
    AttributedGraph::from_parts(n, edge_list, attributes, cfg.universe_size)
}

/// Inserts `count` distinct normalized pairs produced by `draw`, rejecting
/// self-loops and duplicates.
fn sample_distinct_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    count: u64,
    edges: &mut HashSet<(u32, u32)>,
    mut draw: impl FnMut(&mut R) -> (u32, u32),
) {
    let mut added = 0u64;
    let mut attempts = 0u64;
    let budget = 20 * count + 1_000;
    while added < count && attempts < budget {
        attempts += 1;
        let (u, v) = draw(rng);
        if u == v {
            continue;
        }
        if edges.insert((u.min(v), u.max(v))) {
            added += 1;
        }
    }
}
