//! Canonical dataset directories and output files.
//!
//! A dataset directory holds:
//!
//! * `meta.json`: `name`, `num_nodes`, `num_edges` (stored directed entries,
//!   i.e. twice the undirected edge count), `num_features`, `num_classes`
//! * `edges.tsv`: one `u<TAB>v` line per undirected edge with `u < v`
//! * `features.tsv`: `num_nodes` lines of `num_features` tab-separated decimals
//! * `labels.tsv` (optional): `num_nodes` lines holding one integer each
//!
//! All files are UTF-8 with LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_list_text, parse_edge_list, SparseGraph};
use crate::linalg::DenseMatrix;
use crate::metrics::LabelVector;
use crate::model::TrainReport;

pub const META_FILE: &str = "meta.json";
pub const EDGES_FILE: &str = "edges.tsv";
pub const FEATURES_FILE: &str = "features.tsv";
pub const LABELS_FILE: &str = "labels.tsv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    pub num_classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub meta: DatasetMeta,
    pub graph: SparseGraph,
    pub features: DenseMatrix,
    pub labels: Option<LabelVector>,
}

impl DatasetBundle {
    /// Assembles a bundle, deriving the metadata from its parts.
    pub fn new(
        name: impl Into<String>,
        graph: SparseGraph,
        features: DenseMatrix,
        labels: Option<LabelVector>,
        num_classes: usize,
    ) -> Result<Self> {
        let meta = DatasetMeta {
            name: name.into(),
            num_nodes: graph.num_nodes(),
            num_edges: graph.num_entries(),
            num_features: features.cols(),
            num_classes,
        };
        let bundle = DatasetBundle {
            meta,
            graph,
            features,
            labels,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.meta;
        if self.graph.num_nodes() != m.num_nodes || self.features.rows() != m.num_nodes {
            return Err(Error::input(format!(
                "node counts disagree: meta {}, graph {}, features {}",
                m.num_nodes,
                self.graph.num_nodes(),
                self.features.rows()
            )));
        }
        if self.graph.num_entries() != m.num_edges {
            return Err(Error::input(format!(
                "meta num_edges {} but graph stores {} entries",
                m.num_edges,
                self.graph.num_entries()
            )));
        }
        if m.num_features == 0 || self.features.cols() != m.num_features {
            return Err(Error::input(format!(
                "meta num_features {} but features have {} columns",
                m.num_features,
                self.features.cols()
            )));
        }
        if let Some(y) = &self.labels {
            if y.len() != m.num_nodes || y.num_classes() > m.num_classes {
                return Err(Error::input("labels disagree with meta"));
            }
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads and validates a canonical dataset directory.
pub fn read_dataset(dir: &Path) -> Result<DatasetBundle> {
    let meta_path = dir.join(META_FILE);
    let meta: DatasetMeta = serde_json::from_str(&read_text(&meta_path)?)
        .map_err(|e| Error::format(&meta_path, e.line(), e.to_string()))?;
    if meta.num_features == 0 {
        return Err(Error::format(&meta_path, 0, "num_features must be at least 1"));
    }

    let edges_path = dir.join(EDGES_FILE);
    let edges = parse_edge_list(&read_text(&edges_path)?, &edges_path)?;
    if let Some(pos) = edges
        .iter()
        .position(|&(u, v, _)| u >= meta.num_nodes || v >= meta.num_nodes)
    {
        return Err(Error::format(
            &edges_path,
            0,
            format!("edge #{} references a node >= num_nodes={}", pos + 1, meta.num_nodes),
        ));
    }
    let graph = SparseGraph::from_weighted_edges(meta.num_nodes, edges)?;
    if graph.num_entries() != meta.num_edges {
        return Err(Error::format(
            &edges_path,
            0,
            format!(
                "{} directed entries after symmetrization, meta.json declares {}",
                graph.num_entries(),
                meta.num_edges
            ),
        ));
    }

    let features_path = dir.join(FEATURES_FILE);
    let features = parse_features(&read_text(&features_path)?, &features_path, &meta)?;

    let labels_path = dir.join(LABELS_FILE);
    let labels = if labels_path.exists() {
        let raw = parse_labels(&read_text(&labels_path)?, &labels_path)?;
        if raw.len() != meta.num_nodes {
            return Err(Error::format(
                &labels_path,
                0,
                format!("{} labels, expected {}", raw.len(), meta.num_nodes),
            ));
        }
        if let Some(i) = raw.iter().position(|&l| l >= meta.num_classes) {
            return Err(Error::format(
                &labels_path,
                i + 1,
                format!("label {} not below num_classes={}", raw[i], meta.num_classes),
            ));
        }
        Some(LabelVector::new(raw, meta.num_classes)?)
    } else {
        None
    };

    Ok(DatasetBundle {
        meta,
        graph,
        features,
        labels,
    })
}

fn parse_features(text: &str, path: &Path, meta: &DatasetMeta) -> Result<DenseMatrix> {
    let f = meta.num_features;
    let mut data = Vec::with_capacity(meta.num_nodes * f);
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if rows == meta.num_nodes {
            return Err(Error::format(
                path,
                lineno,
                format!("more than num_nodes={} feature rows", meta.num_nodes),
            ));
        }
        let before = data.len();
        for field in line.split('\t') {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(path, lineno, format!("invalid number {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::format(path, lineno, format!("non-finite value {field:?}")));
            }
            data.push(v);
        }
        if data.len() - before != f {
            return Err(Error::format(
                path,
                lineno,
                format!("{} values, expected {f}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != meta.num_nodes {
        return Err(Error::format(
            path,
            0,
            format!("{rows} feature rows, meta.json declares {}", meta.num_nodes),
        ));
    }
    DenseMatrix::from_vec(rows, f, data)
}

/// Parses one non-negative integer per line.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .map(|(idx, line)| {
            line.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(path, idx + 1, format!("invalid label {line:?}")))
        })
        .collect()
}

/// Reads a label or assignment file; an empty file is an error.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let labels = parse_labels(&read_text(path)?, path)?;
    if labels.is_empty() {
        return Err(Error::format(path, 0, "file holds no labels"));
    }
    Ok(labels)
}

fn features_text(x: &DenseMatrix) -> String {
    let mut out = String::with_capacity(x.rows() * x.cols() * 8);
    for r in 0..x.rows() {
        for (j, v) in x.row(r).iter().enumerate() {
            if j > 0 {
                out.push('\t');
            }
            // `{}` prints the shortest string that parses back to the same f64.
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

fn labels_text(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

/// Writes `bundle` into `dir`, creating the directory if needed.
pub fn write_dataset(bundle: &DatasetBundle, dir: &Path) -> Result<()> {
    bundle.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = serde_json::to_string_pretty(&bundle.meta).expect("plain struct serializes");
    write_text(&dir.join(META_FILE), &(meta + "\n"))?;
    write_text(&dir.join(EDGES_FILE), &edge_list_text(&bundle.graph))?;
    write_text(&dir.join(FEATURES_FILE), &features_text(&bundle.features))?;
    let labels_path = dir.join(LABELS_FILE);
    match &bundle.labels {
        Some(y) => write_text(&labels_path, &labels_text(y.labels()))?,
        None if labels_path.exists() => {
            fs::remove_file(&labels_path).map_err(|e| Error::io(&labels_path, e))?
        }
        None => {}
    }
    Ok(())
}

/// One cluster id per line.
pub fn write_assignments(labels: &LabelVector, path: &Path) -> Result<()> {
    write_text(path, &labels_text(labels.labels()))
}

pub fn write_report(report: &TrainReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    write_text(path, &(json + "\n"))
}

pub fn read_report(path: &Path) -> Result<TrainReport> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::format(path, e.line(), e.to_string()))
}

/// Paths of the four dataset files under `dir`.
pub fn dataset_files(dir: &Path) -> [PathBuf; 4] {
    [META_FILE, EDGES_FILE, FEATURES_FILE, LABELS_FILE].map(|f| dir.join(f))
}
