//! Tab-separated edge lists: `u<TAB>v` or `u<TAB>v<TAB>w`, 0-indexed,
//! `#` lines ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::SparseGraph;
use crate::error::{Error, Result};

/// Parses edge-list text. `path` is only used to label errors.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(Error::format(
                path,
                lineno,
                format!("expected 2 or 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let node = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::format(path, lineno, format!("invalid node index {s:?}")))
        };
        let u = node(fields[0])?;
        let v = node(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::format(path, lineno, format!("invalid weight {s:?}")))?,
            None => 1.0,
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::format(path, lineno, format!("weight {w} must be positive")));
        }
        edges.push((u, v, w));
    }
    Ok(edges)
}

/// Reads an edge-list file. When `num_nodes` is `None` it is one past the largest index.
pub fn read_edge_list(path: &Path, num_nodes: Option<usize>) -> Result<SparseGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let edges = parse_edge_list(&text, path)?;
    let inferred = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = num_nodes.unwrap_or(inferred);
    if inferred > n {
        // Locate the first offending line for the message.
        let bad = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
            .zip(&edges)
            .find(|(_, &(u, v, _))| u >= n || v >= n)
            .map_or(0, |((i, _), _)| i + 1);
        return Err(Error::format(
            path,
            bad,
            format!("node index out of range for {n} nodes"),
        ));
    }
    SparseGraph::from_weighted_edges(n, edges)
}

/// Renders each undirected edge once with `u < v`; the weight column is
/// written only for graphs with non-unit weights.
pub fn edge_list_text(g: &SparseGraph) -> String {
    let weighted = !g.is_unweighted();
    let mut out = String::with_capacity(g.num_edges() * 12);
    for (u, v, w) in g.edges() {
        if weighted {
            let _ = writeln!(out, "{u}\t{v}\t{w}");
        } else {
            let _ = writeln!(out, "{u}\t{v}");
        }
    }
    out
}

pub fn write_edge_list(g: &SparseGraph, path: &Path) -> Result<()> {
    fs::write(path, edge_list_text(g)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_weights() {
        let text = "# header\n0\t1\n1\t2\t2.5\n\n";
        let edges = parse_edge_list(text, Path::new("e.tsv")).unwrap();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 2.5)]);
    }

    #[test]
    fn errors_name_file_and_line() {
        let err = parse_edge_list("0\t1\n0 1\n", Path::new("edges.tsv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("edges.tsv") && msg.contains("line 2"), "{msg}");
        let err = parse_edge_list("0\tx\n", Path::new("edges.tsv")).unwrap_err();
        assert!(err.to_string().contains("line 1"));
        assert!(parse_edge_list("0\t1\t-2\n", Path::new("e")).is_err());
    }

    #[test]
    fn out_of_range_in_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.tsv");
        fs::write(&p, "0\t1\n1\t5\n").unwrap();
        let err = read_edge_list(&p, Some(3)).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert_eq!(read_edge_list(&p, None).unwrap().num_nodes(), 6);
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            n in 1usize..30,
            raw in prop::collection::vec((0usize..30, 0usize..30, 1u8..4), 0..80),
            weighted in any::<bool>(),
        ) {
            let edges: Vec<_> = raw
                .into_iter()
                .map(|(u, v, w)| (u % n, v % n, if weighted { f64::from(w) * 0.5 } else { 1.0 }))
                .collect();
            let g = SparseGraph::from_weighted_edges(n, edges).unwrap();
            let text = edge_list_text(&g);
            let back = SparseGraph::from_weighted_edges(
                n,
                parse_edge_list(&text, Path::new("mem")).unwrap(),
            )
            .unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
