//! Graph file ingestion and serialization.
//!
//! Formats:
//! - Edge file: one edge per line, two whitespace-separated node tokens.
//!   Lines starting with `#` are ignored.
//! - Attribute file: one node per line; first token the node id, remaining
//!   tokens attribute ids. An optional first line `#universe <int>` declares
//!   `|A|`; other `#` lines are ignored.
//! - Mapping file: `<original-token> <dense-id>` per line.
//!
//! Node tokens may be arbitrary strings; they are remapped to dense ids in
//! first-seen order, scanning the attribute file before the edge file (saved
//! graphs list every node in id order, which makes save -> load an identity).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::hashing::ElementSet;

/// A parsed graph plus the dense-id -> original-token mapping.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: AttributedGraph,
    /// `node_labels[id]` is the token that named this node in the input.
    pub node_labels: Vec<String>,
}

/// Parses a graph from edge and attribute sources.
///
/// `universe_size` is `1 + max(attribute id)` unless the attribute source
/// declares `#universe <int>` on its first line; a declared universe makes
/// any id at or above it a validation error. Nodes appearing only in the
/// edge file get empty attribute sets.
pub fn load_graph<E: BufRead, A: BufRead>(edge_source: E, attr_source: A) -> Result<LoadedGraph> {
    let mut labels: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |token: &str, labels: &mut Vec<String>| -> u32 {
        if let Some(&id) = ids.get(token) {
            return id;
        }
        let id = labels.len() as u32;
        ids.insert(token.to_string(), id);
        labels.push(token.to_string());
        id
    };

    // Attribute file first so saved graphs (one line per node, in id order)
    // reload with identical ids.
    let mut declared_universe: Option<u32> = None;
    let mut attr_sets: Vec<Option<Vec<u32>>> = Vec::new();
    let mut max_attr_id: Option<u32> = None;
    for (lineno, line) in attr_source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if lineno == 1 {
                if let Some(value) = rest.trim().strip_prefix("universe") {
                    let universe: u32 = value.trim().parse().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("bad universe declaration: {trimmed:?}"),
                    })?;
                    declared_universe = Some(universe);
                }
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let node_token = tokens.next().expect("non-empty line");
        let node = intern(node_token, &mut labels) as usize;
        if attr_sets.len() <= node {
            attr_sets.resize(node + 1, None);
        }
        if attr_sets[node].is_some() {
            return Err(Error::Validation(format!(
                "duplicate attribute line for node {node_token:?} at line {lineno}"
            )));
        }
        let mut set = Vec::new();
        for tok in tokens {
            let id: u32 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("attribute id {tok:?} is not a non-negative integer"),
            })?;
            if let Some(universe) = declared_universe {
                if id >= universe {
                    return Err(Error::Validation(format!(
                        "attribute id {id} at line {lineno} is outside the declared universe [0, {universe})"
                    )));
                }
            }
            max_attr_id = Some(max_attr_id.map_or(id, |m| m.max(id)));
            set.push(id);
        }
        attr_sets[node] = Some(set);
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (lineno, line) in edge_source.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two node tokens, got {}", tokens.len()),
            });
        }
        let u = intern(tokens[0], &mut labels);
        let v = intern(tokens[1], &mut labels);
        if u == v {
            return Err(Error::Validation(format!(
                "self-loop on node {:?} at line {lineno}",
                tokens[0]
            )));
        }
        edges.push((u, v));
    }

    let node_count = labels.len();
    attr_sets.resize(node_count, None);
    let attributes: Vec<ElementSet> = attr_sets
        .into_iter()
        .map(|set| ElementSet::from_ids(set.unwrap_or_default()))
        .collect();

    // No attribute data at all still needs a non-empty universe (the
    // sentinel id must exist).
    let universe_size = declared_universe.unwrap_or_else(|| max_attr_id.map_or(1, |m| m + 1));

    let graph = AttributedGraph::from_parts(node_count, edges, attributes, universe_size)?;
    Ok(LoadedGraph {
        graph,
        node_labels: labels,
    })
}

/// Convenience wrapper opening the two files.
pub fn load_graph_from_paths<P: AsRef<Path>, Q: AsRef<Path>>(
    edge_path: P,
    attr_path: Q,
) -> Result<LoadedGraph> {
    let edges = BufReader::new(File::open(edge_path)?);
    let attrs = BufReader::new(File::open(attr_path)?);
    load_graph(edges, attrs)
}

/// Writes the edge file (`u v` per line, `u < v`, sorted).
pub fn write_edges<W: Write>(g: &AttributedGraph, mut out: W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Writes the attribute file: a `#universe` header, then one line per node
/// in id order (nodes without attributes still get a line).
pub fn write_attributes<W: Write>(g: &AttributedGraph, mut out: W) -> Result<()> {
    writeln!(out, "#universe {}", g.universe_size())?;
    for v in 0..g.node_count() as u32 {
        write!(out, "{v}")?;
        for &id in g.attributes(v) {
            write!(out, " {id}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Saves both files; `load_graph` on the pair reproduces the graph exactly.
pub fn save_graph<P: AsRef<Path>, Q: AsRef<Path>>(
    g: &AttributedGraph,
    edge_path: P,
    attr_path: Q,
) -> Result<()> {
    let mut edges = BufWriter::new(File::create(edge_path)?);
    write_edges(g, &mut edges)?;
    edges.flush()?;
    let mut attrs = BufWriter::new(File::create(attr_path)?);
    write_attributes(g, &mut attrs)?;
    attrs.flush()?;
    Ok(())
}

/// Writes the `<original-token> <dense-id>` mapping file.
pub fn write_mapping<W: Write>(node_labels: &[String], mut out: W) -> Result<()> {
    for (id, label) in node_labels.iter().enumerate() {
        writeln!(out, "{label} {id}")?;
    }
    Ok(())
}
