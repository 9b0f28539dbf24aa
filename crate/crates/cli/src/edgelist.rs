//! Edge-list ingestion: one `u v` pair of 1-based labels per line.

use std::path::Path;

use thiserror::Error;
use topix::graph_model::SampledGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeListError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },
    #[error("line {line}: expected two positive integer labels, got {text:?}")]
    BadLine { line: usize, text: String },
    #[error("edge list contains no edges")]
    Empty,
}

/// Parses edge-list text. Blank lines and `#` comments are skipped,
/// duplicate edges collapse, and `n` is the largest label.
pub fn parse_edge_list(text: &str) -> Result<SampledGraph, EdgeListError> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = || EdgeListError::BadLine {
            line,
            text: trimmed.to_string(),
        };
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(bad());
        }
        let u: usize = tokens[0].parse().map_err(|_| bad())?;
        let v: usize = tokens[1].parse().map_err(|_| bad())?;
        if u == 0 || v == 0 {
            return Err(bad());
        }
        if u == v {
            return Err(EdgeListError::SelfLoop { line, node: u });
        }
        edges.push((u - 1, v - 1));
    }
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().ok_or(EdgeListError::Empty)?;
    // labels are validated above, so construction cannot fail
    Ok(SampledGraph::from_edges(n, edges).expect("validated edge list"))
}

pub fn load_edge_list(path: &Path) -> Result<SampledGraph, EdgeListError> {
    let text = std::fs::read_to_string(path).map_err(|e| EdgeListError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_edge_list(&text)
}
