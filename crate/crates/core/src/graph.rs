//! Immutable undirected graph with node features, labels and split masks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-node degrees. `deg_hat` counts the implicit self-loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTable {
    pub deg: Vec<usize>,
    pub deg_hat: Vec<usize>,
}

/// Counts of edges rejected while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeReport {
    pub input_edges: usize,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    All,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            "all" => Ok(Split::All),
            other => Err(Error::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    degrees: DegreeTable,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub train_mask: Vec<bool>,
    pub val_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Self-loops are dropped,
    /// repeated edges (in either orientation) are merged.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize)],
        features: Matrix,
        labels: Vec<usize>,
        num_classes: usize,
        train_mask: Vec<bool>,
        val_mask: Vec<bool>,
        test_mask: Vec<bool>,
    ) -> Result<(Self, EdgeReport)> {
        if features.rows() != num_nodes {
            return Err(Error::Shape(format!(
                "{} feature rows for {num_nodes} nodes",
                features.rows()
            )));
        }
        if labels.len() != num_nodes {
            return Err(Error::Shape(format!(
                "{} labels for {num_nodes} nodes",
                labels.len()
            )));
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                node,
                label: label as i64,
                num_classes,
            });
        }
        for mask in [&train_mask, &val_mask, &test_mask] {
            if mask.len() != num_nodes {
                return Err(Error::Shape(format!(
                    "mask of length {} for {num_nodes} nodes",
                    mask.len()
                )));
            }
        }
        if let Some(i) = (0..num_nodes)
            .find(|&i| train_mask[i] as u8 + val_mask[i] as u8 + test_mask[i] as u8 > 1)
        {
            return Err(Error::OverlappingSplits(i));
        }

        let mut report = EdgeReport {
            input_edges: edges.len(),
            ..Default::default()
        };
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= num_nodes {
                    return Err(Error::NodeOutOfBounds {
                        index: x,
                        num_nodes,
                    });
                }
            }
            if u == v {
                report.dropped_self_loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        let mut kept_half_edges = 0;
        for list in &mut adj {
            let before = list.len();
            list.sort_unstable();
            list.dedup();
            kept_half_edges += list.len();
            report.dropped_duplicates += before - list.len();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        debug_assert_eq!(kept_half_edges % 2, 0);
        // Each duplicate was counted on both endpoints.
        report.dropped_duplicates /= 2;

        let deg: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0]).collect();
        let deg_hat = deg.iter().map(|d| d + 1).collect();
        Ok((
            Graph {
                offsets,
                neighbors,
                degrees: DegreeTable { deg, deg_hat },
                features,
                labels,
                num_classes,
                train_mask,
                val_mask,
                test_mask,
            },
            report,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    /// Sorted neighbors of `i`, excluding `i` itself.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn degrees(&self) -> &DegreeTable {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees.deg[i]
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.deg.iter().copied().max().unwrap_or(0)
    }

    pub fn mask(&self, split: Split) -> Vec<bool> {
        match split {
            Split::Train => self.train_mask.clone(),
            Split::Val => self.val_mask.clone(),
            Split::Test => self.test_mask.clone(),
            Split::All => vec![true; self.num_nodes()],
        }
    }

    /// Undirected edge list with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_nodes())
            .flat_map(|u| {
                self.neighbors(u)
                    .iter()
                    .filter(move |&&v| u < v)
                    .map(move |&v| (u, v))
            })
            .collect()
    }

    /// Scales every feature row to unit L1 norm (zero rows are left alone).
    pub fn row_normalize_features(&mut self) {
        for i in 0..self.features.rows() {
            let row = self.features.row_mut(i);
            let s: f64 = row.iter().map(|x| x.abs()).sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
    }

    /// BFS hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_nodes()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.num_nodes() > 0 && self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// Induced subgraph on `nodes` (ascending), remapped to `0..nodes.len()`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut remap = vec![usize::MAX; self.num_nodes()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let edges: Vec<(usize, usize)> = nodes
            .iter()
            .flat_map(|&u| {
                let remap = &remap;
                self.neighbors(u)
                    .iter()
                    .filter(move |&&v| u < v && remap[v] != usize::MAX)
                    .map(move |&v| (remap[u], remap[v]))
            })
            .collect();
        let mut features = Matrix::zeros(nodes.len(), self.num_features());
        for (new, &old) in nodes.iter().enumerate() {
            features
                .row_mut(new)
                .copy_from_slice(self.features.row(old));
        }
        let pick = |m: &[bool]| nodes.iter().map(|&i| m[i]).collect::<Vec<_>>();
        let (g, _) = Graph::new(
            nodes.len(),
            &edges,
            features,
            nodes.iter().map(|&i| self.labels[i]).collect(),
            self.num_classes,
            pick(&self.train_mask),
            pick(&self.val_mask),
            pick(&self.test_mask),
        )
        .expect("induced subgraph of a valid graph is valid");
        g
    }
}

/// Induced subgraph on the largest connected component. Ties go to the
/// component holding the smallest original node index. Also returns the
/// kept original node ids.
pub fn largest_connected_component(g: &Graph) -> (Graph, Vec<usize>) {
    let comps = g.components();
    let mut best: Option<&Vec<usize>> = None;
    for c in &comps {
        if best.is_none_or(|b| c.len() > b.len()) {
            best = Some(c);
        }
    }
    let nodes = best.cloned().unwrap_or_default();
    (g.induced_subgraph(&nodes), nodes)
}

/// Double-sweep BFS lower bound on the diameter.
pub fn graph_diameter_estimate(g: &Graph) -> Result<usize> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let first = g.bfs(0);
    let (far, _) = first
        .iter()
        .enumerate()
        .max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i)))
        .unwrap();
    Ok(g.bfs(far).into_iter().max().unwrap_or(0))
}
