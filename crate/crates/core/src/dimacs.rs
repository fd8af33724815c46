//! DIMACS edge format: `p edge n m` header, `e u v` lines with 1-indexed vertices.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::DimacsError;
use crate::graph::{Adjacency, Graph};

/// A parsed graph plus the number of duplicate `e` lines that were merged.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub graph: Graph,
    pub duplicate_edges: usize,
}

pub fn parse_dimacs(text: &str) -> Result<Parsed, DimacsError> {
    parse_dimacs_reader(text.as_bytes())
}

pub fn parse_dimacs_reader<R: BufRead>(reader: R) -> Result<Parsed, DimacsError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| DimacsError::Malformed {
            line: lineno,
            message: e.to_string(),
        })?;
        let mut tokens = line.split_whitespace();
        let Some(kind) = tokens.next() else { continue };
        match kind {
            "c" => {}
            "p" => {
                if n.is_some() {
                    return Err(malformed(lineno, "second problem line"));
                }
                let format = tokens.next().ok_or_else(|| malformed(lineno, "missing format"))?;
                if format != "edge" && format != "col" {
                    return Err(malformed(lineno, &format!("unsupported format {format:?}")));
                }
                let count = number(tokens.next(), lineno, "vertex count")?;
                number(tokens.next(), lineno, "edge count")?;
                if tokens.next().is_some() {
                    return Err(malformed(lineno, "trailing tokens in header"));
                }
                n = Some(count);
            }
            "e" => {
                let n = n.ok_or(DimacsError::MissingHeader)?;
                let u = number(tokens.next(), lineno, "edge endpoint")?;
                let v = number(tokens.next(), lineno, "edge endpoint")?;
                if tokens.next().is_some() {
                    return Err(malformed(lineno, "trailing tokens in edge line"));
                }
                for x in [u, v] {
                    if x == 0 || x > n {
                        return Err(DimacsError::VertexOutOfRange { line: lineno, vertex: x, n });
                    }
                }
                if u == v {
                    return Err(DimacsError::SelfLoop { line: lineno, vertex: u });
                }
                edges.push((u - 1, v - 1));
            }
            other => return Err(malformed(lineno, &format!("unknown line type {other:?}"))),
        }
    }
    let n = n.ok_or(DimacsError::MissingHeader)?;
    let (graph, duplicate_edges) =
        Graph::from_edges(n, edges).expect("edges were range- and loop-checked");
    Ok(Parsed { graph, duplicate_edges })
}

fn malformed(line: usize, message: &str) -> DimacsError {
    DimacsError::Malformed { line, message: message.to_string() }
}

fn number(tok: Option<&str>, line: usize, what: &str) -> Result<usize, DimacsError> {
    let tok = tok.ok_or_else(|| malformed(line, &format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| malformed(line, &format!("{what} {tok:?} is not a nonnegative integer")))
}

/// Byte-stable writer: header, then `e u v` with `u < v`, sorted, 1-indexed.
pub fn write_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "p edge {} {}", g.vertex_count(), g.edge_count()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
    }
    out
}
