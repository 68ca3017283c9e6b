//! Embedding file format.
//!
//! Header line, then one line per node:
//!
//! ```text
//! #gnn v1 nodes=<|V|> K=<K> T=<T> seed=<seed> universe=<|A|>
//! <node-id> <K space-separated entries>
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::sketch::EmbeddingMatrix;

/// Writes the embedding file; byte-deterministic for a given matrix.
pub fn write_embedding<W: Write>(m: &EmbeddingMatrix, mut out: W) -> Result<()> {
    writeln!(
        out,
        "#gnn v1 nodes={} K={} T={} seed={} universe={}",
        m.node_count(),
        m.dimensions(),
        m.iteration(),
        m.seed(),
        m.universe_size()
    )?;
    for v in 0..m.node_count() as u32 {
        write!(out, "{v}")?;
        for &e in m.row(v) {
            write!(out, " {e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Parses an embedding file written by [`write_embedding`].
pub fn read_embedding<R: BufRead>(input: R) -> Result<EmbeddingMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing header line".into(),
        })??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 7 || fields[0] != "#gnn" || fields[1] != "v1" {
        return Err(Error::Parse {
            line: 1,
            message: format!("bad header: {header:?}"),
        });
    }
    let keyed = |idx: usize, key: &str| -> Result<u64> {
        let field: &str = fields[idx];
        field
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .and_then(|value| value.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("expected {key}=<int>, got {field:?}"),
            })
    };
    let node_count = keyed(2, "nodes")? as usize;
    let dimensions = keyed(3, "K")? as usize;
    let iteration = keyed(4, "T")? as usize;
    let seed = keyed(5, "seed")?;
    let universe = keyed(6, "universe")? as u32;

    let mut entries = Vec::with_capacity(node_count * dimensions);
    let mut row = 0usize;
    for (lineno, line) in lines.enumerate() {
        let lineno = lineno + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let id: usize = tokens
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno,
                message: "bad node id".into(),
            })?;
        if id != row {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected node {row}, found {id}"),
            });
        }
        let before = entries.len();
        for tok in tokens {
            let e: u32 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad entry {tok:?}"),
            })?;
            entries.push(e);
        }
        if entries.len() - before != dimensions {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "expected {dimensions} entries, got {}",
                    entries.len() - before
                ),
            });
        }
        row += 1;
    }
    if row != node_count {
        return Err(Error::Parse {
            line: row + 1,
            message: format!("expected {node_count} rows, got {row}"),
        });
    }
    EmbeddingMatrix::from_rows(entries, node_count, dimensions, iteration, universe, seed)
}
