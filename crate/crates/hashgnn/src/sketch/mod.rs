//! The sketch engine: MinHash message passing over an attributed graph.
//!
//! One run performs `T` iterations. In iteration `t`, for every dimension
//! `k`, two phases execute under three hash functions drawn fresh per
//! `(t, k)`:
//!
//! 1. every node summarizes its iteration-`t-1` representation into a single
//!    message element, the MinHash argmin under the message hash;
//! 2. every node pools its own iteration-`t-1` elements (hashed by the self
//!    hash) with the messages of its neighbors (hashed by the neighbor hash)
//!    and keeps the element with the smallest hash value.
//!
//! The iteration-0 representation of a node is its attribute set; later
//! representations are `K`-vectors of element ids treated as sets when
//! hashed. A node whose pool is empty receives the sentinel id (one past the
//! universe). Iteration `t` reads only iteration `t-1` state, so the run is
//! a Markov chain over whole-network states: it can be checkpointed and
//! resumed without history.
//!
//! Dimensions are independent given the previous state; the engine processes
//! columns in parallel and the output is bitwise independent of the thread
//! count.

pub mod io;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::hashing::{self, ElementSet, HashParams, MAX_MODULUS};

// ---------------------------------------------------------------------------
// Hash family table
// ---------------------------------------------------------------------------

/// The three hash functions of one `(t, k)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashTriple {
    /// Hashes the node's own previous-iteration elements (pi_1).
    pub self_hash: HashParams,
    /// Hashes the aggregated neighbor messages (pi_2).
    pub neighbor_hash: HashParams,
    /// Produces the per-node message broadcast to neighbors (pi_3).
    pub message_hash: HashParams,
}

/// All `3 * T * K` hash functions of a run, drawn from one seeded generator
/// in a fixed order: iteration-major, then dimension, then
/// (self, neighbor, message), each as (multiplier, offset). Every function
/// shares the modulus `next_prime(universe_size)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashFamilyTable {
    triples: Vec<HashTriple>,
    iterations: usize,
    dimensions: usize,
    universe_size: u32,
    seed: u64,
}

impl HashFamilyTable {
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn dimensions(&self) -> usize {
        self.dimensions
    }

    pub fn universe_size(&self) -> u32 {
        self.universe_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Shared prime modulus of every function in the table.
    pub fn modulus(&self) -> u64 {
        self.triples
            .first()
            .map(|t| t.self_hash.modulus())
            .unwrap_or(2)
    }

    /// Cell for 0-based iteration `t` and dimension `k`.
    pub fn triple(&self, t: usize, k: usize) -> &HashTriple {
        &self.triples[t * self.dimensions + k]
    }
}

/// Draws the full table for a run. Deterministic in `(universe_size,
/// iterations, dimensions, seed)`.
pub fn build_family_table(
    universe_size: u32,
    iterations: usize,
    dimensions: usize,
    seed: u64,
) -> Result<HashFamilyTable> {
    if iterations == 0 || dimensions == 0 {
        return Err(Error::InvalidParameter(format!(
            "need iterations >= 1 and dimensions >= 1; got T={iterations}, K={dimensions}"
        )));
    }
    if universe_size == 0 {
        return Err(Error::InvalidParameter(
            "universe size must be at least 1".into(),
        ));
    }
    let modulus = hashing::next_prime(u64::from(universe_size));
    if modulus >= MAX_MODULUS {
        return Err(Error::InvalidParameter(format!(
            "universe size {universe_size} needs a modulus beyond the supported {MAX_MODULUS}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::with_capacity(iterations * dimensions);
    for _t in 0..iterations {
        for _k in 0..dimensions {
            let self_hash = hashing::sample_with_modulus(modulus, &mut rng);
            let neighbor_hash = hashing::sample_with_modulus(modulus, &mut rng);
            let message_hash = hashing::sample_with_modulus(modulus, &mut rng);
            triples.push(HashTriple {
                self_hash,
                neighbor_hash,
                message_hash,
            });
        }
    }
    Ok(HashFamilyTable {
        triples,
        iterations,
        dimensions,
        universe_size,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Embedding matrix
// ---------------------------------------------------------------------------

/// Run parameters for [`embed`].
#[derive(Debug, Clone, Copy)]
pub struct EmbedConfig {
    pub iterations: usize,
    pub dimensions: usize,
    pub seed: u64,
}

/// The `|V| x K` table of element ids produced by a run, tagged with the
/// iteration it represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMatrix {
    entries: Vec<u32>,
    node_count: usize,
    dimensions: usize,
    iteration: usize,
    universe_size: u32,
    seed: u64,
}

impl EmbeddingMatrix {
    /// Assembles a matrix from row-major entries, validating shape and the
    /// `[0, universe]` range of every entry.
    pub fn from_rows(
        entries: Vec<u32>,
        node_count: usize,
        dimensions: usize,
        iteration: usize,
        universe_size: u32,
        seed: u64,
    ) -> Result<Self> {
        if entries.len() != node_count * dimensions {
            return Err(Error::InvalidParameter(format!(
                "expected {node_count} x {dimensions} entries, got {}",
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&e| e > universe_size) {
            return Err(Error::Validation(format!(
                "embedding entry {bad} is outside [0, {universe_size}]"
            )));
        }
        Ok(Self {
            entries,
            node_count,
            dimensions,
            iteration,
            universe_size,
            seed,
        })
    }

    pub fn row(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.entries[v * self.dimensions..(v + 1) * self.dimensions]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn dimensions(&self) -> usize {
        self.dimensions
    }

    /// The iteration `t` this state belongs to (1-based; the final matrix of
    /// a full run has `iteration == T`).
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn universe_size(&self) -> u32 {
        self.universe_size
    }

    pub fn sentinel(&self) -> u32 {
        self.universe_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Peak working-set estimate in bytes: two `|V| x K` state buffers plus the
/// `|V|` message buffer, 4 bytes per id. The iteration count does not enter;
/// only the previous iteration's state is ever retained.
pub fn memory_footprint(node_count: usize, iterations: usize, dimensions: usize) -> u64 {
    let _ = iterations;
    let ids = 2 * (node_count as u64) * (dimensions as u64) + node_count as u64;
    ids * 4
}

// ---------------------------------------------------------------------------
// Node-set sources
// ---------------------------------------------------------------------------

/// A per-node view of iteration `t-1` representations as element sets.
///
/// `scan` may visit duplicates (the argmin is unaffected) but never the
/// sentinel.
trait NodeSetSource: Sync {
    fn scan<F: FnMut(u32)>(&self, v: usize, visit: F);
}

/// Iteration 0: attribute sets straight from the graph.
struct AttrSource<'a>(&'a AttributedGraph);

impl NodeSetSource for AttrSource<'_> {
    #[inline]
    fn scan<F: FnMut(u32)>(&self, v: usize, mut visit: F) {
        for &id in self.0.attributes(v as u32) {
            visit(id);
        }
    }
}

/// Iterations >= 1: rows of the previous state, canonicalized so that
/// sentinel padding sits at the tail (see [`canonicalize_rows`]).
struct RowSource<'a> {
    rows: &'a [u32],
    width: usize,
    sentinel: u32,
}

impl NodeSetSource for RowSource<'_> {
    #[inline]
    fn scan<F: FnMut(u32)>(&self, v: usize, mut visit: F) {
        for &e in &self.rows[v * self.width..(v + 1) * self.width] {
            if e == self.sentinel {
                break;
            }
            visit(e);
        }
    }
}

/// Explicit sets, for the standalone phase operations.
struct SliceSource<'a>(&'a [ElementSet]);

impl NodeSetSource for SliceSource<'_> {
    #[inline]
    fn scan<F: FnMut(u32)>(&self, v: usize, mut visit: F) {
        for id in self.0[v].iter() {
            visit(id);
        }
    }
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

#[inline]
fn phase1_into<S: NodeSetSource>(
    source: &S,
    node_count: usize,
    message_hash: &HashParams,
    sentinel: u32,
    out: &mut [u32],
) {
    for (v, slot) in out.iter_mut().enumerate().take(node_count) {
        let mut best: Option<(u64, u32)> = None;
        source.scan(v, |e| {
            let h = message_hash.eval(e);
            match best {
                None => best = Some((h, e)),
                Some((bh, be)) => {
                    if h < bh || (h == bh && e < be) {
                        best = Some((h, e));
                    }
                }
            }
        });
        *slot = best.map(|(_, e)| e).unwrap_or(sentinel);
    }
}

/// Candidate keys order by (hash value, self-before-neighbor, element id);
/// the self preference keeps cross-family ties stable under neighbor
/// permutations.
#[inline]
fn phase2_into<S: NodeSetSource>(
    source: &S,
    graph: &AttributedGraph,
    messages: &[u32],
    self_hash: &HashParams,
    neighbor_hash: &HashParams,
    sentinel: u32,
    out: &mut [u32],
) {
    for (v, slot) in out.iter_mut().enumerate() {
        let mut best: Option<(u64, u8, u32)> = None;
        let mut consider = |key: (u64, u8, u32)| match best {
            None => best = Some(key),
            Some(b) => {
                if key < b {
                    best = Some(key);
                }
            }
        };
        source.scan(v, |e| consider((self_hash.eval(e), 0, e)));
        for &u in graph.neighbors(v as u32) {
            let m = messages[u as usize];
            if m == sentinel {
                continue; // empty-set message carries nothing
            }
            consider((neighbor_hash.eval(m), 1, m));
        }
        *slot = best.map(|(_, _, e)| e).unwrap_or(sentinel);
    }
}

/// Per-node message elements for one `(t, k)` cell: the MinHash argmin of
/// each node's representation under the message hash, sentinel for empty
/// sets.
pub fn phase1_messages(
    state: &[ElementSet],
    message_hash: &HashParams,
    sentinel: u32,
) -> Result<Vec<u32>> {
    validate_sets(state, sentinel, message_hash.modulus())?;
    let mut out = vec![sentinel; state.len()];
    phase1_into(&SliceSource(state), state.len(), message_hash, sentinel, &mut out);
    Ok(out)
}

/// One dimension of the iteration-`t` state: for every node, the best
/// element of its own set (under `self_hash`) pooled with its neighbors'
/// messages (under `neighbor_hash`).
///
/// Requires that `messages` was produced from the same `state` (the barrier
/// between phases).
pub fn phase2_update(
    state: &[ElementSet],
    messages: &[u32],
    graph: &AttributedGraph,
    self_hash: &HashParams,
    neighbor_hash: &HashParams,
) -> Result<Vec<u32>> {
    let sentinel = graph.sentinel();
    if state.len() != graph.node_count() {
        return Err(Error::LengthMismatch {
            left: state.len(),
            right: graph.node_count(),
        });
    }
    if messages.len() != graph.node_count() {
        return Err(Error::LengthMismatch {
            left: messages.len(),
            right: graph.node_count(),
        });
    }
    validate_sets(state, sentinel, self_hash.modulus())?;
    let mut out = vec![sentinel; state.len()];
    phase2_into(
        &SliceSource(state),
        graph,
        messages,
        self_hash,
        neighbor_hash,
        sentinel,
        &mut out,
    );
    Ok(out)
}

fn validate_sets(state: &[ElementSet], sentinel: u32, modulus: u64) -> Result<()> {
    for set in state {
        if let Some(&max) = set.ids().last() {
            if max >= sentinel {
                return Err(Error::Validation(format!(
                    "representation element {max} is outside the universe [0, {sentinel})"
                )));
            }
            if u64::from(max) >= modulus {
                return Err(Error::HashDomain {
                    element: max,
                    modulus,
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The engine
// ---------------------------------------------------------------------------

/// State handed to the per-iteration observer of [`embed_iterations`].
pub struct IterationSnapshot<'a> {
    /// 1-based iteration that just completed.
    pub iteration: usize,
    /// Wall-clock time this iteration took.
    pub elapsed: Duration,
    /// Row-major `|V| x K` entries of the just-completed state.
    pub entries: &'a [u32],
}

/// Embeds a graph: builds the hash table from the config and runs all
/// iterations.
pub fn embed(g: &AttributedGraph, config: &EmbedConfig) -> Result<EmbeddingMatrix> {
    let table = build_family_table(
        g.universe_size(),
        config.iterations,
        config.dimensions,
        config.seed,
    )?;
    embed_with_table(g, &table)
}

/// Runs every iteration of `table` over `g`.
pub fn embed_with_table(g: &AttributedGraph, table: &HashFamilyTable) -> Result<EmbeddingMatrix> {
    embed_iterations(g, table, |_| {})
}

/// Runs only the first `iterations` iterations of `table`.
pub fn embed_prefix(
    g: &AttributedGraph,
    table: &HashFamilyTable,
    iterations: usize,
) -> Result<EmbeddingMatrix> {
    if iterations == 0 || iterations > table.iterations() {
        return Err(Error::InvalidParameter(format!(
            "prefix length {iterations} outside [1, {}]",
            table.iterations()
        )));
    }
    run(g, table, iterations, None, |_| {})
}

/// Full run with an observer called after every iteration (timings,
/// checkpoints).
pub fn embed_iterations<F>(
    g: &AttributedGraph,
    table: &HashFamilyTable,
    visit: F,
) -> Result<EmbeddingMatrix>
where
    F: FnMut(IterationSnapshot<'_>),
{
    run(g, table, table.iterations(), None, visit)
}

/// Advances a stored state by one iteration using the hash functions of
/// iteration `state.iteration() + 1`. Bitwise identical to having run the
/// longer prefix directly (the Markov property of the state chain).
pub fn advance(
    g: &AttributedGraph,
    table: &HashFamilyTable,
    state: &EmbeddingMatrix,
) -> Result<EmbeddingMatrix> {
    if state.node_count() != g.node_count() {
        return Err(Error::LengthMismatch {
            left: state.node_count(),
            right: g.node_count(),
        });
    }
    if state.dimensions() != table.dimensions() {
        return Err(Error::LengthMismatch {
            left: state.dimensions(),
            right: table.dimensions(),
        });
    }
    if state.universe_size() != g.universe_size() || table.universe_size() != g.universe_size() {
        return Err(Error::Validation(
            "state, table and graph disagree on the attribute universe".into(),
        ));
    }
    if state.iteration() >= table.iterations() {
        return Err(Error::InvalidParameter(format!(
            "state is already at iteration {}; the table stops at {}",
            state.iteration(),
            table.iterations()
        )));
    }
    run(g, table, state.iteration() + 1, Some(state), |_| {})
}

/// Shared driver. Runs iterations `start..until` where `start` is 0 or the
/// iteration of `resume_from`.
fn run<F>(
    g: &AttributedGraph,
    table: &HashFamilyTable,
    until: usize,
    resume_from: Option<&EmbeddingMatrix>,
    mut visit: F,
) -> Result<EmbeddingMatrix>
where
    F: FnMut(IterationSnapshot<'_>),
{
    if table.universe_size() != g.universe_size() {
        return Err(Error::Validation(format!(
            "table universe {} does not match graph universe {}",
            table.universe_size(),
            g.universe_size()
        )));
    }
    let n = g.node_count();
    let k = table.dimensions();
    let sentinel = g.sentinel();

    let mut rows: Vec<u32> = match resume_from {
        Some(state) => state.entries().to_vec(),
        None => vec![0u32; n * k],
    };
    let mut cols: Vec<u32> = vec![0u32; n * k];
    let start = resume_from.map_or(0, |s| s.iteration());

    for t in start..until {
        let begin = Instant::now();
        if t == 0 {
            run_iteration(&AttrSource(g), g, table, t, sentinel, &mut cols);
        } else {
            canonicalize_rows(&mut rows, k, sentinel);
            let source = RowSource {
                rows: &rows,
                width: k,
                sentinel,
            };
            run_iteration(&source, g, table, t, sentinel, &mut cols);
        }
        transpose_into_rows(&cols, &mut rows, n, k);
        visit(IterationSnapshot {
            iteration: t + 1,
            elapsed: begin.elapsed(),
            entries: &rows,
        });
    }

    EmbeddingMatrix::from_rows(rows, n, k, until, g.universe_size(), table.seed())
}

/// Runs both phases of iteration `t` for every dimension, writing the new
/// state column-major. Columns are independent given the previous state, so
/// the dimension loop is the parallel axis; each worker keeps its own
/// message buffer and the result never depends on the thread count.
fn run_iteration<S: NodeSetSource>(
    source: &S,
    g: &AttributedGraph,
    table: &HashFamilyTable,
    t: usize,
    sentinel: u32,
    cols: &mut [u32],
) {
    let n = g.node_count();
    if n == 0 {
        return;
    }
    cols.par_chunks_mut(n)
        .enumerate()
        .for_each_init(
            || vec![0u32; n],
            |messages, (k, column)| {
                let triple = table.triple(t, k);
                // Phase barrier: every message exists before any pool is read.
                phase1_into(source, n, &triple.message_hash, sentinel, messages);
                phase2_into(
                    source,
                    g,
                    messages,
                    &triple.self_hash,
                    &triple.neighbor_hash,
                    sentinel,
                    column,
                );
            },
        );
}

/// Sorts and dedups each row in place, padding the tail with the sentinel.
/// The previous state is dead after its iteration, so this costs no extra
/// buffer; scans then stop at the first sentinel.
fn canonicalize_rows(rows: &mut [u32], width: usize, sentinel: u32) {
    if width == 0 {
        return;
    }
    rows.par_chunks_mut(width).for_each(|row| {
        row.sort_unstable();
        let mut keep = 0usize;
        for i in 0..row.len() {
            let e = row[i];
            if e == sentinel {
                break;
            }
            if keep == 0 || row[keep - 1] != e {
                row[keep] = e;
                keep += 1;
            }
        }
        for slot in &mut row[keep..] {
            *slot = sentinel;
        }
    });
}

fn transpose_into_rows(cols: &[u32], rows: &mut [u32], n: usize, k: usize) {
    if n == 0 || k == 0 {
        return;
    }
    rows.par_chunks_mut(k).enumerate().for_each(|(v, row)| {
        for (dim, slot) in row.iter_mut().enumerate() {
            *slot = cols[dim * n + v];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(node_count: usize, edges: &[(u32, u32)], attrs: &[&[u32]], universe: u32) -> AttributedGraph {
        let attrs = attrs
            .iter()
            .map(|ids| ElementSet::from_ids(ids.iter().copied()))
            .collect();
        AttributedGraph::from_parts(node_count, edges.iter().copied(), attrs, universe).unwrap()
    }

    fn raw_hash(p: &HashParams, e: u32) -> u64 {
        (p.multiplier() * u64::from(e) + p.offset()) % p.modulus()
    }

    #[test]
    fn family_table_is_deterministic_and_counts_cells() {
        let a = build_family_table(100, 2, 3, 9).unwrap();
        let b = build_family_table(100, 2, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations() * a.dimensions(), 6); // 6 triples = 18 HashParams

        let mut distinct = 0;
        for seed in 0..10u64 {
            let x = build_family_table(100, 2, 3, seed).unwrap();
            let y = build_family_table(100, 2, 3, seed + 1000).unwrap();
            if x != y {
                distinct += 1;
            }
        }
        assert_eq!(distinct, 10, "different seeds should differ");
    }

    #[test]
    fn family_table_shares_one_prime() {
        let table = build_family_table(14, 3, 4, 1).unwrap();
        assert_eq!(table.modulus(), 17);
        for t in 0..3 {
            for k in 0..4 {
                let triple = table.triple(t, k);
                assert_eq!(triple.self_hash.modulus(), 17);
                assert_eq!(triple.neighbor_hash.modulus(), 17);
                assert_eq!(triple.message_hash.modulus(), 17);
            }
        }
    }

    #[test]
    fn family_table_rejects_zero_shape() {
        assert!(build_family_table(10, 0, 4, 1).is_err());
        assert!(build_family_table(10, 2, 0, 1).is_err());
        assert!(build_family_table(0, 2, 2, 1).is_err());
    }

    #[test]
    fn phase1_singleton_and_symmetry() {
        let sets = vec![
            ElementSet::from_ids([7]),
            ElementSet::from_ids([7]),
            ElementSet::from_ids([1, 2, 3]),
        ];
        let p = HashParams::new(3, 5, 13).unwrap();
        let messages = phase1_messages(&sets, &p, 13).unwrap();
        assert_eq!(messages[0], 7);
        assert_eq!(messages[0], messages[1], "identical sets, identical messages");
    }

    #[test]
    fn phase1_matches_direct_enumeration_on_a_path() {
        // Path 0-1-2 with sets {0,1}, {1,2}, {2,3}.
        let sets = vec![
            ElementSet::from_ids([0, 1]),
            ElementSet::from_ids([1, 2]),
            ElementSet::from_ids([2, 3]),
        ];
        let p = HashParams::new(5, 3, 7).unwrap();
        let messages = phase1_messages(&sets, &p, 7).unwrap();
        for (v, set) in sets.iter().enumerate() {
            let expected = set
                .iter()
                .map(|e| (raw_hash(&p, e), e))
                .min()
                .map(|(_, e)| e)
                .unwrap();
            assert_eq!(messages[v], expected, "node {v}");
        }
    }

    #[test]
    fn phase1_empty_set_gets_sentinel() {
        let sets = vec![ElementSet::empty(), ElementSet::from_ids([2])];
        let p = HashParams::new(3, 5, 13).unwrap();
        let messages = phase1_messages(&sets, &p, 13).unwrap();
        assert_eq!(messages[0], 13);
        assert_eq!(messages[1], 2);
    }

    #[test]
    fn phase2_isolated_node_keeps_its_only_candidate() {
        let g = graph(1, &[], &[&[7]], 10);
        let sets = vec![g.attribute_set(0)];
        let p1 = HashParams::new(3, 5, 11).unwrap();
        let p2 = HashParams::new(2, 7, 11).unwrap();
        let p3 = HashParams::new(5, 1, 11).unwrap();
        let messages = phase1_messages(&sets, &p3, g.sentinel()).unwrap();
        let column = phase2_update(&sets, &messages, &g, &p1, &p2).unwrap();
        assert_eq!(column, vec![7]);
    }

    #[test]
    fn phase2_matches_exhaustive_candidate_enumeration() {
        // Path 0-1-2 with sets {0,1}, {1,2}, {2,3}; pool = self under p1 and
        // neighbor messages under p2, exhaustively enumerated here.
        let g = graph(3, &[(0, 1), (1, 2)], &[&[0, 1], &[1, 2], &[2, 3]], 4);
        let sets: Vec<ElementSet> = (0..3).map(|v| g.attribute_set(v)).collect();
        let p1 = HashParams::new(3, 2, 5).unwrap();
        let p2 = HashParams::new(2, 4, 5).unwrap();
        let p3 = HashParams::new(4, 1, 5).unwrap();
        let messages = phase1_messages(&sets, &p3, g.sentinel()).unwrap();
        let column = phase2_update(&sets, &messages, &g, &p1, &p2).unwrap();

        for v in 0..3u32 {
            let mut candidates: Vec<(u64, u8, u32)> = sets[v as usize]
                .iter()
                .map(|e| (raw_hash(&p1, e), 0, e))
                .collect();
            for &u in g.neighbors(v) {
                let m = messages[u as usize];
                candidates.push((raw_hash(&p2, m), 1, m));
            }
            let expected = candidates.into_iter().min().unwrap().2;
            assert_eq!(column[v as usize], expected, "node {v}");
        }
    }

    #[test]
    fn phase2_twins_get_identical_entries() {
        // Nodes 0 and 1 both attach to 2 and 3 with the same attributes.
        let g = graph(
            4,
            &[(0, 2), (0, 3), (1, 2), (1, 3)],
            &[&[5], &[5], &[6], &[7]],
            8,
        );
        let sets: Vec<ElementSet> = (0..4).map(|v| g.attribute_set(v)).collect();
        let table = build_family_table(8, 1, 16, 3).unwrap();
        for k in 0..16 {
            let triple = table.triple(0, k);
            let messages = phase1_messages(&sets, &triple.message_hash, g.sentinel()).unwrap();
            let column =
                phase2_update(&sets, &messages, &g, &triple.self_hash, &triple.neighbor_hash)
                    .unwrap();
            assert_eq!(column[0], column[1], "twin entries diverged at k={k}");
        }
    }

    #[test]
    fn phase2_cross_family_tie_prefers_the_self_element() {
        // p1(3) = 3 and p2(2) = 3 tie on hash value; the self element wins.
        let g = graph(2, &[(0, 1)], &[&[3], &[2]], 5);
        let sets: Vec<ElementSet> = (0..2).map(|v| g.attribute_set(v)).collect();
        let p1 = HashParams::new(1, 5, 7).unwrap(); // identity-ish: e + 5 mod 7
        let p2 = HashParams::new(1, 6, 7).unwrap(); // e + 6 mod 7
        let p3 = HashParams::new(1, 1, 7).unwrap();
        // messages: node 1 broadcasts its singleton 2.
        let messages = phase1_messages(&sets, &p3, g.sentinel()).unwrap();
        assert_eq!(messages[1], 2);
        // node 0 pool: self 3 -> (3+5)%7 = 1; neighbor 2 -> (2+6)%7 = 1. Tie.
        let column = phase2_update(&sets, &messages, &g, &p1, &p2).unwrap();
        assert_eq!(column[0], 3, "self element must win the tie");
    }

    #[test]
    fn embed_isolated_singleton_is_forced() {
        let g = graph(1, &[], &[&[3]], 5);
        for (t, k) in [(1, 1), (2, 4), (3, 8)] {
            let m = embed(&g, &EmbedConfig { iterations: t, dimensions: k, seed: 42 }).unwrap();
            assert_eq!(m.row(0), vec![3; k].as_slice(), "T={t} K={k}");
        }
    }

    #[test]
    fn embed_identical_isolated_nodes_share_rows() {
        let g = graph(2, &[], &[&[1, 4], &[1, 4]], 6);
        let m = embed(&g, &EmbedConfig { iterations: 2, dimensions: 16, seed: 7 }).unwrap();
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn embed_rejects_zero_parameters() {
        let g = graph(1, &[], &[&[0]], 2);
        assert!(embed(&g, &EmbedConfig { iterations: 0, dimensions: 4, seed: 1 }).is_err());
        assert!(embed(&g, &EmbedConfig { iterations: 2, dimensions: 0, seed: 1 }).is_err());
    }

    #[test]
    fn embed_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = generate_synthetic(
            &SyntheticConfig {
                node_count: 60,
                avg_degree: 6.0,
                communities: 2,
                attrs_per_node: 4,
                universe_size: 40,
                attr_affinity: 0.8,
            },
            &mut rng,
        )
        .unwrap();
        let cfg = EmbedConfig { iterations: 3, dimensions: 32, seed: 5 };
        assert_eq!(embed(&g, &cfg).unwrap(), embed(&g, &cfg).unwrap());
    }

    #[test]
    fn embed_is_independent_of_thread_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let g = generate_synthetic(
            &SyntheticConfig {
                node_count: 50,
                avg_degree: 5.0,
                communities: 1,
                attrs_per_node: 4,
                universe_size: 30,
                attr_affinity: 0.5,
            },
            &mut rng,
        )
        .unwrap();
        let cfg = EmbedConfig { iterations: 2, dimensions: 24, seed: 77 };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| embed(&g, &cfg).unwrap());
        let quad = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| embed(&g, &cfg).unwrap());
        assert_eq!(single, quad);
    }

    #[test]
    fn embed_ignores_neighbor_order_in_input() {
        let attrs: Vec<&[u32]> = vec![&[0, 5], &[1], &[2, 3], &[4]];
        let forward = graph(4, &[(0, 1), (0, 2), (0, 3), (2, 3)], &attrs, 8);
        let backward = graph(4, &[(2, 3), (3, 0), (2, 0), (1, 0)], &attrs, 8);
        let cfg = EmbedConfig { iterations: 2, dimensions: 16, seed: 9 };
        assert_eq!(embed(&forward, &cfg).unwrap(), embed(&backward, &cfg).unwrap());
    }

    #[test]
    fn embed_entries_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let g = generate_synthetic(
            &SyntheticConfig {
                node_count: 40,
                avg_degree: 4.0,
                communities: 2,
                attrs_per_node: 3,
                universe_size: 25,
                attr_affinity: 0.9,
            },
            &mut rng,
        )
        .unwrap();
        let m = embed(&g, &EmbedConfig { iterations: 3, dimensions: 16, seed: 2 }).unwrap();
        assert!(m.entries().iter().all(|&e| e <= g.universe_size()));
    }

    #[test]
    fn sentinel_propagates_for_attribute_less_isolated_nodes() {
        // Node 2 has no attributes and no neighbors: sentinel forever.
        // Node 3 is its twin; their rows must match.
        let g = graph(4, &[(0, 1)], &[&[1], &[2], &[], &[]], 4);
        let m = embed(&g, &EmbedConfig { iterations: 3, dimensions: 8, seed: 11 }).unwrap();
        assert_eq!(m.row(2), vec![g.sentinel(); 8].as_slice());
        assert_eq!(m.row(2), m.row(3));
    }

    #[test]
    fn attribute_less_node_with_neighbors_adopts_messages() {
        // Node 1 has no attributes but hears node 0's messages.
        let g = graph(2, &[(0, 1)], &[&[2, 3], &[]], 4);
        let m = embed(&g, &EmbedConfig { iterations: 1, dimensions: 8, seed: 13 }).unwrap();
        for &e in m.row(1) {
            assert!(e == 2 || e == 3, "entry {e} not sourced from the neighbor");
        }
    }

    #[test]
    fn advance_resumes_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = generate_synthetic(
            &SyntheticConfig {
                node_count: 30,
                avg_degree: 4.0,
                communities: 2,
                attrs_per_node: 3,
                universe_size: 20,
                attr_affinity: 0.7,
            },
            &mut rng,
        )
        .unwrap();
        let table = build_family_table(g.universe_size(), 3, 12, 21).unwrap();
        let two = embed_prefix(&g, &table, 2).unwrap();
        let three_direct = embed_prefix(&g, &table, 3).unwrap();
        let three_resumed = advance(&g, &table, &two).unwrap();
        assert_eq!(three_direct, three_resumed);
        assert_eq!(three_resumed.iteration(), 3);
    }

    #[test]
    fn advance_past_the_table_errors() {
        let g = graph(2, &[(0, 1)], &[&[0], &[1]], 2);
        let table = build_family_table(2, 2, 4, 1).unwrap();
        let full = embed_with_table(&g, &table).unwrap();
        assert!(advance(&g, &table, &full).is_err());
    }

    #[test]
    fn memory_footprint_formula() {
        // Two |V| x K state buffers plus one |V| message buffer, 4 bytes each.
        assert_eq!(memory_footprint(1000, 2, 200), 2 * 1000 * 200 * 4 + 1000 * 4);
        // T does not enter.
        assert_eq!(memory_footprint(1000, 1, 200), memory_footprint(1000, 9, 200));
        // Doubling K doubles the estimate (up to the small message term).
        let ratio = memory_footprint(1000, 2, 400) as f64 / memory_footprint(1000, 2, 200) as f64;
        assert!(ratio > 1.99 && ratio <= 2.0, "ratio {ratio}");
    }

    #[test]
    fn embedding_iterations_observer_sees_each_step() {
        let g = graph(3, &[(0, 1), (1, 2)], &[&[0], &[1], &[2]], 3);
        let table = build_family_table(3, 3, 4, 8).unwrap();
        let mut seen = Vec::new();
        let final_state = embed_iterations(&g, &table, |snap| {
            seen.push((snap.iteration, snap.entries.to_vec()));
        })
        .unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(seen.last().unwrap().1, final_state.entries());
        // The observer's intermediate state matches a shorter prefix run.
        let two = embed_prefix(&g, &table, 2).unwrap();
        assert_eq!(seen[1].1, two.entries());
    }
}
