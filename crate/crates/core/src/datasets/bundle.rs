//! The interchange bundle: a directory of tab-separated text files.
//!
//! ```text
//! meta.json    {"name", "num_nodes", "num_edges", "feature_dim", "num_classes", ...}
//! edges.tsv    u<TAB>v          (u < v)
//! attrs.tsv    node<TAB>feature<TAB>value   (optional; absent entries are 0)
//! labels.tsv   node<TAB>class   (nodes not listed are unlabeled)
//! splits.tsv   node<TAB>role    (optional; role is train, val or test)
//! node_ids.tsv node<TAB>source_id (optional; ids in the graph this one was cut from)
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Split;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeRole, NodeSetView};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    /// Any further keys are carried through untouched.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// A loaded dataset: labeled graph, class count and optional fixed split.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: Graph,
    pub num_classes: usize,
    pub split: Option<Split>,
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DatasetBundle {
    pub fn new(name: impl Into<String>, graph: Graph, num_classes: usize) -> Self {
        Self {
            name: name.into(),
            graph,
            num_classes,
            split: None,
            extra: serde_json::Map::new(),
        }
    }

    pub fn meta(&self) -> BundleMeta {
        BundleMeta {
            name: self.name.clone(),
            num_nodes: self.graph.num_nodes(),
            num_edges: self.graph.num_edges(),
            feature_dim: self.graph.feature_dim().unwrap_or(0),
            num_classes: self.num_classes,
            extra: self.extra.clone(),
        }
    }
}

struct Lines<'a> {
    file: &'a Path,
    text: &'a str,
}

impl<'a> Lines<'a> {
    /// Non-empty lines as `(1-based line number, tab-separated fields)`.
    fn records(&self, arity: usize) -> impl Iterator<Item = Result<(usize, Vec<&'a str>)>> + '_ {
        self.text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(move |(i, l)| {
                let fields: Vec<&str> = l.split('\t').map(str::trim).collect();
                if fields.len() != arity {
                    return Err(self.malformed(
                        i + 1,
                        format!("expected {arity} tab-separated fields, found {}", fields.len()),
                    ));
                }
                Ok((i + 1, fields))
            })
    }

    fn malformed(&self, line: usize, reason: String) -> Error {
        Error::Malformed {
            file: self.file.to_path_buf(),
            line,
            reason,
        }
    }

    fn id(&self, line: usize, field: &str, limit: usize) -> Result<usize> {
        let id: usize = field
            .parse()
            .map_err(|_| self.malformed(line, format!("{field:?} is not a non-negative integer")))?;
        if id >= limit {
            return Err(Error::IdOutOfRange {
                file: self.file.to_path_buf(),
                line,
                id,
                limit,
            });
        }
        Ok(id)
    }
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn read_required(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses and validates a bundle directory.
pub fn load_bundle(dir: &Path) -> Result<DatasetBundle> {
    let meta_path = dir.join("meta.json");
    let meta: BundleMeta = serde_json::from_str(&read_required(&meta_path)?).map_err(|e| {
        Error::Malformed {
            file: meta_path.clone(),
            line: e.line(),
            reason: e.to_string(),
        }
    })?;
    let n = meta.num_nodes;

    let edges_path = dir.join("edges.tsv");
    let text = read_required(&edges_path)?;
    let lines = Lines {
        file: &edges_path,
        text: &text,
    };
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for rec in lines.records(2) {
        let (line, f) = rec?;
        let u = lines.id(line, f[0], n)?;
        let v = lines.id(line, f[1], n)?;
        if u >= v {
            return Err(lines.malformed(line, format!("edge ({u}, {v}) must satisfy u < v")));
        }
        if !seen.insert((u, v)) {
            return Err(lines.malformed(line, format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v));
    }
    if edges.len() != meta.num_edges {
        return Err(Error::CountMismatch {
            what: "edge",
            expected: meta.num_edges,
            found: edges.len(),
        });
    }
    let mut graph = Graph::new(n, edges)?;

    let attrs_path = dir.join("attrs.tsv");
    if let Some(text) = read_optional(&attrs_path)? {
        let lines = Lines {
            file: &attrs_path,
            text: &text,
        };
        let mut triplets = Vec::new();
        for rec in lines.records(3) {
            let (line, f) = rec?;
            let node = lines.id(line, f[0], n)?;
            let feature = lines.id(line, f[1], meta.feature_dim)?;
            let value: f64 = f[2]
                .parse()
                .map_err(|_| lines.malformed(line, format!("{:?} is not a number", f[2])))?;
            if !value.is_finite() {
                return Err(lines.malformed(line, format!("non-finite value {value}")));
            }
            triplets.push((node, feature, value));
        }
        graph = graph.with_attributes(CsrMatrix::from_triplets(n, meta.feature_dim, &triplets)?)?;
    }

    let labels_path = dir.join("labels.tsv");
    let text = read_required(&labels_path)?;
    let lines = Lines {
        file: &labels_path,
        text: &text,
    };
    let mut labels = vec![None; n];
    for rec in lines.records(2) {
        let (line, f) = rec?;
        let node = lines.id(line, f[0], n)?;
        let class = lines.id(line, f[1], meta.num_classes)?;
        if labels[node].replace(class).is_some() {
            return Err(lines.malformed(line, format!("node {node} labeled twice")));
        }
    }
    graph = graph.with_labels(labels)?;

    let ids_path = dir.join("node_ids.tsv");
    if let Some(text) = read_optional(&ids_path)? {
        let lines = Lines {
            file: &ids_path,
            text: &text,
        };
        let mut ids: Vec<u64> = (0..n as u64).collect();
        let mut count = 0;
        for rec in lines.records(2) {
            let (line, f) = rec?;
            let node = lines.id(line, f[0], n)?;
            ids[node] = f[1]
                .parse()
                .map_err(|_| lines.malformed(line, format!("{:?} is not an id", f[1])))?;
            count += 1;
        }
        if count != n {
            return Err(Error::CountMismatch {
                what: "node id",
                expected: n,
                found: count,
            });
        }
        graph = graph.with_node_ids(ids)?;
    }

    let splits_path = dir.join("splits.tsv");
    let split = match read_optional(&splits_path)? {
        None => None,
        Some(text) => {
            let lines = Lines {
                file: &splits_path,
                text: &text,
            };
            let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
            let mut seen = vec![false; n];
            for rec in lines.records(2) {
                let (line, f) = rec?;
                let node = lines.id(line, f[0], n)?;
                if std::mem::replace(&mut seen[node], true) {
                    return Err(lines.malformed(line, format!("node {node} listed twice")));
                }
                match f[1] {
                    "train" => train.push(node),
                    "val" => val.push(node),
                    "test" => test.push(node),
                    other => {
                        return Err(lines.malformed(line, format!("unknown split role {other:?}")))
                    }
                }
            }
            Some(Split {
                train: NodeSetView::new(train, NodeRole::Other)?,
                val: NodeSetView::new(val, NodeRole::Other)?,
                test: NodeSetView::new(test, NodeRole::Other)?,
            })
        }
    };

    Ok(DatasetBundle {
        name: meta.name,
        graph,
        num_classes: meta.num_classes,
        split,
        extra: meta.extra,
    })
}

fn write_file(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `bundle` to `dir` (created if needed). Output is byte-stable.
pub fn write_bundle(bundle: &DatasetBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = &bundle.graph;
    let mut meta = serde_json::to_string_pretty(&bundle.meta())?;
    meta.push('\n');
    write_file(dir.join("meta.json"), &meta)?;

    let mut s = String::new();
    for &(u, v) in g.edges() {
        writeln!(s, "{u}\t{v}").unwrap();
    }
    write_file(dir.join("edges.tsv"), &s)?;

    if let Some(attrs) = g.attributes() {
        let mut s = String::new();
        for (r, c, v) in attrs.triplets() {
            writeln!(s, "{r}\t{c}\t{v}").unwrap();
        }
        write_file(dir.join("attrs.tsv"), &s)?;
    }

    let mut s = String::new();
    for (v, label) in g.labels().unwrap_or(&[]).iter().enumerate() {
        if let Some(c) = label {
            writeln!(s, "{v}\t{c}").unwrap();
        }
    }
    write_file(dir.join("labels.tsv"), &s)?;

    let identity = g.node_ids().iter().enumerate().all(|(i, &id)| id == i as u64);
    if !identity {
        let mut s = String::new();
        for (v, id) in g.node_ids().iter().enumerate() {
            writeln!(s, "{v}\t{id}").unwrap();
        }
        write_file(dir.join("node_ids.tsv"), &s)?;
    }

    if let Some(split) = &bundle.split {
        let mut rows: Vec<(usize, &str)> = Vec::new();
        for (set, role) in [(&split.train, "train"), (&split.val, "val"), (&split.test, "test")] {
            rows.extend(set.ids().iter().map(|&v| (v, role)));
        }
        rows.sort_unstable();
        let mut s = String::new();
        for (v, role) in rows {
            writeln!(s, "{v}\t{role}").unwrap();
        }
        write_file(dir.join("splits.tsv"), &s)?;
    }
    Ok(())
}
