//! Shared test helpers: an independent reference implementation of the
//! sketch recurrence and random-graph builders.
//!
//! The reference implementation shares nothing with the engine except the
//! [`HashFamilyTable`]: it recomputes hash values from the raw `(a, b, c)`
//! parameters and walks the two phases with plain `BTreeSet`s, exactly as
//! the recurrence is written.

use std::collections::BTreeSet;

use rand::Rng;

use hashgnn::graph::AttributedGraph;
use hashgnn::hashing::{ElementSet, HashParams};
use hashgnn::sketch::HashFamilyTable;

pub fn raw_hash(p: &HashParams, e: u32) -> u64 {
    (p.multiplier() * u64::from(e) + p.offset()) % p.modulus()
}

fn brute_argmin(set: &BTreeSet<u32>, p: &HashParams) -> Option<u32> {
    set.iter().map(|&e| (raw_hash(p, e), e)).min().map(|(_, e)| e)
}

/// Straight-line reference run: T iterations, K dimensions, two phases per
/// (t, k). Returns the final per-node rows.
#[allow(clippy::needless_range_loop)] // written index-style to mirror the recurrence
pub fn reference_embed(g: &AttributedGraph, table: &HashFamilyTable) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let k_dims = table.dimensions();
    let sentinel = g.sentinel();

    let mut state: Vec<BTreeSet<u32>> = (0..n)
        .map(|v| g.attributes(v as u32).iter().copied().collect())
        .collect();
    let mut rows: Vec<Vec<u32>> = vec![vec![sentinel; k_dims]; n];

    for t in 0..table.iterations() {
        for k in 0..k_dims {
            let triple = table.triple(t, k);

            // Phase 1: each node condenses its previous representation into
            // one message element.
            let mut messages: Vec<Option<u32>> = Vec::with_capacity(n);
            for set in &state {
                messages.push(brute_argmin(set, &triple.message_hash));
            }

            // Phase 2: pool own elements with deduplicated neighbor
            // messages; the smallest (hash, self-first, id) key wins.
            for v in 0..n {
                let mut candidates: Vec<(u64, u8, u32)> = state[v]
                    .iter()
                    .map(|&e| (raw_hash(&triple.self_hash, e), 0, e))
                    .collect();
                let neighbor_messages: BTreeSet<u32> = g
                    .neighbors(v as u32)
                    .iter()
                    .filter_map(|&u| messages[u as usize])
                    .collect();
                for &m in &neighbor_messages {
                    candidates.push((raw_hash(&triple.neighbor_hash, m), 1, m));
                }
                rows[v][k] = candidates.into_iter().min().map(|(_, _, e)| e).unwrap_or(sentinel);
            }
        }

        // The new network state: each row read back as a set, sentinel
        // entries dropped.
        state = rows
            .iter()
            .map(|row| row.iter().copied().filter(|&e| e != sentinel).collect())
            .collect();
    }
    rows
}

/// A random graph of at most `max_nodes` nodes with random attribute sets
/// (possibly empty) over a small universe.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, universe: u32) -> AttributedGraph {
    let n = rng.random_range(2..=max_nodes);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.random_bool(0.3) {
                edges.push((u, v));
            }
        }
    }
    let attrs: Vec<ElementSet> = (0..n)
        .map(|_| {
            let count = rng.random_range(0..=4);
            ElementSet::from_ids((0..count).map(|_| rng.random_range(0..universe)))
        })
        .collect();
    AttributedGraph::from_parts(n, edges, attrs, universe).unwrap()
}

/// A random graph with a planted twin pair: identical attribute sets and
/// identical neighborhoods (sometimes mutually adjacent on top). Returns the
/// graph and the twins' ids.
#[allow(dead_code)] // not every test target uses every helper
pub fn random_graph_with_twins<R: Rng>(rng: &mut R, universe: u32) -> (AttributedGraph, u32, u32) {
    let base = rng.random_range(4..=16);
    let twin_a = base as u32;
    let twin_b = base as u32 + 1;
    let n = base + 2;

    let mut edges = Vec::new();
    for u in 0..base as u32 {
        for v in (u + 1)..base as u32 {
            if rng.random_bool(0.3) {
                edges.push((u, v));
            }
        }
    }
    // The twins attach to one shared neighbor subset of the base graph.
    for u in 0..base as u32 {
        if rng.random_bool(0.4) {
            edges.push((u, twin_a));
            edges.push((u, twin_b));
        }
    }
    if rng.random_bool(0.5) {
        edges.push((twin_a, twin_b));
    }

    let mut attrs: Vec<ElementSet> = (0..base)
        .map(|_| {
            let count = rng.random_range(0..=4);
            ElementSet::from_ids((0..count).map(|_| rng.random_range(0..universe)))
        })
        .collect();
    let twin_ids = ElementSet::from_ids(
        (0..rng.random_range(1..=4)).map(|_| rng.random_range(0..universe)),
    );
    attrs.push(twin_ids.clone());
    attrs.push(twin_ids);

    let g = AttributedGraph::from_parts(n, edges, attrs, universe).unwrap();
    (g, twin_a, twin_b)
}
