//! Plain-text dataset bundle: `edges.tsv`, `features.csv`, `labels.csv`,
//! `splits.json`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, Graph};
use crate::linalg::Matrix;

pub const EDGES_FILE: &str = "edges.tsv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const SPLITS_FILE: &str = "splits.json";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub nodes: usize,
    pub edges: usize,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
    pub lcc_size: usize,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nodes={} edges={} dropped_self_loops={} dropped_duplicates={} lcc_size={}",
            self.nodes, self.edges, self.dropped_self_loops, self.dropped_duplicates, self.lcc_size
        )
    }
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    fs::read_to_string(&path).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_err(file: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads and validates a dataset bundle. The graph is returned as stored;
/// the report carries the size of its largest connected component.
pub fn load_graph(dir: &Path) -> Result<(Graph, LoadReport)> {
    let feature_text = read(dir, FEATURES_FILE)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, text) in content_lines(&feature_text) {
        let row = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(FEATURES_FILE, line, e.to_string()))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::RaggedFeatures {
                    row: rows.len(),
                    got: row.len(),
                    expected: first.len(),
                });
            }
        }
        rows.push(row);
    }
    let num_nodes = rows.len();
    let num_features = rows.first().map_or(0, Vec::len);
    let features = Matrix::from_vec(num_nodes, num_features, rows.concat())?;

    let label_text = read(dir, LABELS_FILE)?;
    let mut labels = Vec::with_capacity(num_nodes);
    for (line, text) in content_lines(&label_text) {
        let label: i64 = text
            .parse()
            .map_err(|e: std::num::ParseIntError| parse_err(LABELS_FILE, line, e.to_string()))?;
        if label < 0 {
            return Err(Error::LabelOutOfRange {
                node: labels.len(),
                label,
                num_classes: 0,
            });
        }
        labels.push(label as usize);
    }
    if labels.len() != num_nodes {
        return Err(parse_err(
            LABELS_FILE,
            labels.len(),
            format!("{} labels for {num_nodes} feature rows", labels.len()),
        ));
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);

    let edge_text = read(dir, EDGES_FILE)?;
    let mut edges = Vec::new();
    for (line, text) in content_lines(&edge_text) {
        let mut parts = text.split_whitespace();
        let mut next = || -> Result<usize> {
            parts
                .next()
                .ok_or_else(|| parse_err(EDGES_FILE, line, "expected two node indices"))?
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(EDGES_FILE, line, e.to_string()))
        };
        let (u, v) = (next()?, next()?);
        edges.push((u, v));
    }

    let splits: Splits = serde_json::from_str(&read(dir, SPLITS_FILE)?)?;
    let mask = |idx: &[usize]| -> Result<Vec<bool>> {
        let mut m = vec![false; num_nodes];
        for &i in idx {
            if i >= num_nodes {
                return Err(Error::NodeOutOfBounds {
                    index: i,
                    num_nodes,
                });
            }
            m[i] = true;
        }
        Ok(m)
    };
    let (graph, edge_report) = Graph::new(
        num_nodes,
        &edges,
        features,
        labels,
        num_classes,
        mask(&splits.train)?,
        mask(&splits.val)?,
        mask(&splits.test)?,
    )?;
    let lcc_size = graph.components().iter().map(Vec::len).max().unwrap_or(0);
    let report = LoadReport {
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        dropped_self_loops: edge_report.dropped_self_loops,
        dropped_duplicates: edge_report.dropped_duplicates,
        lcc_size,
    };
    Ok((graph, report))
}

/// Loads a bundle and restricts it to its largest connected component.
pub fn load_lcc(dir: &Path, row_normalize: bool) -> Result<(Graph, LoadReport)> {
    let (graph, report) = load_graph(dir)?;
    let (mut lcc, _) = largest_connected_component(&graph);
    if row_normalize {
        lcc.row_normalize_features();
    }
    Ok((lcc, report))
}

/// Writes `graph` as a bundle. Float formatting is Rust's shortest
/// round-trip representation, so output is byte-stable.
pub fn write_bundle(graph: &Graph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: &[u8]| -> Result<()> {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(body).map_err(|e| Error::io(&path, e))
    };

    let mut edges = String::new();
    for (u, v) in graph.edges() {
        edges.push_str(&format!("{u}\t{v}\n"));
    }
    write(EDGES_FILE, edges.as_bytes())?;

    let mut features = String::new();
    for i in 0..graph.num_nodes() {
        let row: Vec<String> = graph
            .features
            .row(i)
            .iter()
            .map(|x| format!("{x}"))
            .collect();
        features.push_str(&row.join(","));
        features.push('\n');
    }
    write(FEATURES_FILE, features.as_bytes())?;

    let mut labels = String::new();
    for l in &graph.labels {
        labels.push_str(&format!("{l}\n"));
    }
    write(LABELS_FILE, labels.as_bytes())?;

    let idx = |m: &[bool]| (0..m.len()).filter(|&i| m[i]).collect::<Vec<_>>();
    let splits = Splits {
        train: idx(&graph.train_mask),
        val: idx(&graph.val_mask),
        test: idx(&graph.test_mask),
    };
    write(SPLITS_FILE, serde_json::to_string(&splits)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundle(edges: &str, features: &str, labels: &str, splits: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(EDGES_FILE), edges).unwrap();
        fs::write(dir.path().join(FEATURES_FILE), features).unwrap();
        fs::write(dir.path().join(LABELS_FILE), labels).unwrap();
        fs::write(dir.path().join(SPLITS_FILE), splits).unwrap();
        dir
    }

    const SPLITS: &str = r#"{"train":[0],"val":[1],"test":[2]}"#;

    #[test]
    fn loads_triangle() {
        let dir = bundle("0\t1\n1\t2\n2\t0\n", "1,0\n0,1\n1,1\n", "0\n1\n0\n", SPLITS);
        let (g, report) = load_graph(dir.path()).unwrap();
        assert_eq!(g.degrees().deg, vec![2, 2, 2]);
        assert_eq!(g.num_classes, 2);
        assert_eq!(report.lcc_size, 3);
        assert_eq!(report.edges, 3);
        assert!(g.train_mask[0] && g.val_mask[1] && g.test_mask[2]);
    }

    #[test]
    fn dedups_and_reports() {
        let dir = bundle("0\t1\n1\t0\n2\t2\n", "1\n2\n3\n", "0\n0\n0\n", SPLITS);
        let (g, report) = load_graph(dir.path()).unwrap();
        assert_eq!(g.degrees().deg, vec![1, 1, 0]);
        assert_eq!(report.dropped_duplicates, 1);
        assert_eq!(report.dropped_self_loops, 1);
        assert_eq!(report.lcc_size, 2);
        let (lcc, _) = load_lcc(dir.path(), false).unwrap();
        assert_eq!(lcc.num_nodes(), 2);
    }

    #[test]
    fn error_paths() {
        let dir = bundle("0\t1\n", "1,0\n0\n1,1\n", "0\n1\n0\n", SPLITS);
        assert!(matches!(
            load_graph(dir.path()),
            Err(Error::RaggedFeatures { row: 1, .. })
        ));

        let dir = bundle("0\t7\n", "1\n1\n1\n", "0\n1\n0\n", SPLITS);
        assert!(matches!(
            load_graph(dir.path()),
            Err(Error::NodeOutOfBounds { index: 7, .. })
        ));

        let dir = bundle("0\t1\n", "1\n1\n1\n", "0\n-1\n0\n", SPLITS);
        assert!(matches!(
            load_graph(dir.path()),
            Err(Error::LabelOutOfRange { node: 1, .. })
        ));

        let dir = bundle(
            "0\t1\n",
            "1\n1\n1\n",
            "0\n1\n0\n",
            r#"{"train":[9],"val":[],"test":[]}"#,
        );
        assert!(matches!(
            load_graph(dir.path()),
            Err(Error::NodeOutOfBounds { index: 9, .. })
        ));

        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_graph(dir.path()), Err(Error::MissingFile(_))));
    }

    #[test]
    fn write_then_load_preserves_graph() {
        let dir = bundle(
            "0\t1\n1\t2\n",
            "0.5,-1.25\n3,4\n1e-3,0\n",
            "2\n0\n1\n",
            SPLITS,
        );
        let (g, _) = load_graph(dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        write_bundle(&g, out.path()).unwrap();
        let (h, _) = load_graph(out.path()).unwrap();
        assert_eq!(g.edges(), h.edges());
        assert_eq!(g.features, h.features);
        assert_eq!(g.labels, h.labels);
        assert_eq!(g.test_mask, h.test_mask);
    }
}
