//! Per-node negative sample sets.
//!
//! Negatives are always drawn from the node's dark world: every node other
//! than the source and its first-order neighbors. Four selection rules are
//! provided: a k-DPP over the whole dark world, a k-DPP over the
//! neighborhood of a DFS path, uniform sampling, and personalized PageRank
//! ranking. The sample size is `k = deg(source) + 1`.

use std::fmt;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dpp::{build_kernel, Clamp, KDpp};
use crate::error::{Error, Result};
use crate::graph::{graph_diameter_estimate, Graph};
use crate::linalg::Matrix;

/// Largest dark world the global DPP sampler will eigendecompose.
pub const GLOBAL_DPP_LIMIT: usize = 2_000;
pub const DEFAULT_DFS_LENGTH: usize = 5;
pub const DEFAULT_PPR_ALPHA: f64 = 0.15;
pub const DEFAULT_PPR_ITERS: usize = 50;
pub const PPR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DppGlobal,
    DppDfs,
    Random,
    Ppr,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DppGlobal => "dpp-global",
            Method::DppDfs => "dpp-dfs",
            Method::Random => "random",
            Method::Ppr => "ppr",
        })
    }
}

/// Why a sample set deviates from the nominal `k` draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleNote {
    Clamped(Clamp),
    /// No DFS candidate survived the neighbor exclusion; drew uniformly
    /// from the dark world instead.
    FallbackUniform,
    /// Fewer non-neighbors than `k`; all were returned.
    ShortDarkWorld,
    EmptyDarkWorld,
    PprNotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSampleSet {
    pub source: usize,
    /// Ascending node ids.
    pub members: Vec<usize>,
    pub method: Method,
    pub note: Option<SampleNote>,
}

/// Preorder of a randomized depth-first search from `source`, source
/// excluded. Each node is adjacent to the source or to an earlier node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfsPath {
    pub source: usize,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub source: usize,
    /// Ascending node ids.
    pub members: Vec<usize>,
    /// `provenance[a]` is the first path node that contributed `members[a]`.
    pub provenance: Vec<usize>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Number of negatives drawn for `source`.
pub fn negative_count(g: &Graph, source: usize) -> usize {
    g.degree(source) + 1
}

/// Nodes that are neither `source` nor adjacent to it.
pub fn dark_world(g: &Graph, source: usize) -> Vec<usize> {
    (0..g.num_nodes())
        .filter(|&j| j != source && !g.is_neighbor(source, j))
        .collect()
}

/// DFS length suggested from a quarter of the estimated diameter.
pub fn suggested_dfs_length(g: &Graph) -> Result<usize> {
    let d = graph_diameter_estimate(g)?;
    Ok(((d as f64 / 4.0).round() as usize).max(1))
}

pub fn build_dfs_path<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    length: usize,
    rng: &mut R,
) -> Result<DfsPath> {
    if length == 0 {
        return Err(Error::InvalidArgument(
            "DFS length must be at least 1".into(),
        ));
    }
    if source >= g.num_nodes() {
        return Err(Error::NodeOutOfBounds {
            index: source,
            num_nodes: g.num_nodes(),
        });
    }
    let shuffled = |u: usize, rng: &mut R| {
        let mut nb = g.neighbors(u).to_vec();
        nb.shuffle(rng);
        nb
    };
    let mut visited = vec![false; g.num_nodes()];
    visited[source] = true;
    let mut nodes = Vec::with_capacity(length);
    let mut stack = vec![(shuffled(source, rng), 0usize)];
    while let Some((list, next)) = stack.last_mut() {
        if nodes.len() == length {
            break;
        }
        if *next == list.len() {
            stack.pop();
            continue;
        }
        let v = list[*next];
        *next += 1;
        if visited[v] {
            continue;
        }
        visited[v] = true;
        nodes.push(v);
        let nb = shuffled(v, rng);
        stack.push((nb, 0));
    }
    Ok(DfsPath { source, nodes })
}

/// Path nodes plus their first-order neighbors, restricted to the dark world
/// of the path's source.
pub fn collect_candidates(g: &Graph, path: &DfsPath) -> CandidateSet {
    let source = path.source;
    let mut contributor = vec![usize::MAX; g.num_nodes()];
    for &j in &path.nodes {
        for &x in std::iter::once(&j).chain(g.neighbors(j)) {
            if x != source && contributor[x] == usize::MAX && !g.is_neighbor(source, x) {
                contributor[x] = j;
            }
        }
    }
    let members: Vec<usize> = (0..g.num_nodes())
        .filter(|&x| contributor[x] != usize::MAX)
        .collect();
    let provenance = members.iter().map(|&x| contributor[x]).collect();
    CandidateSet {
        source,
        members,
        provenance,
    }
}

fn from_kdpp_sample(
    source: usize,
    items: Vec<usize>,
    clamp: Option<Clamp>,
    method: Method,
) -> NegativeSampleSet {
    NegativeSampleSet {
        source,
        members: items,
        method,
        note: clamp.map(SampleNote::Clamped),
    }
}

/// k-DPP draw of `deg(source) + 1` negatives from `candidates`, with the
/// kernel built on the current representations.
pub fn sample_dpp_from_candidates<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    candidates: &[usize],
    reps: &Matrix,
    method: Method,
    rng: &mut R,
) -> Result<NegativeSampleSet> {
    let k = negative_count(g, source);
    let kernel = build_kernel(candidates, reps)?;
    let sample = KDpp::new(kernel)?.sample(k, rng)?;
    Ok(from_kdpp_sample(source, sample.items, sample.clamp, method))
}

/// k-DPP over the entire dark world of `source`.
pub fn sample_negatives_dpp_global<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    reps: &Matrix,
    rng: &mut R,
) -> Result<NegativeSampleSet> {
    let dark = dark_world(g, source);
    if dark.len() > GLOBAL_DPP_LIMIT {
        return Err(Error::GlobalDppTooLarge {
            n: dark.len(),
            limit: GLOBAL_DPP_LIMIT,
        });
    }
    if dark.is_empty() {
        warn!("node {source} has an empty dark world");
        return Ok(NegativeSampleSet {
            source,
            members: Vec::new(),
            method: Method::DppGlobal,
            note: Some(SampleNote::EmptyDarkWorld),
        });
    }
    sample_dpp_from_candidates(g, source, &dark, reps, Method::DppGlobal, rng)
}

/// k-DPP over an already collected DFS candidate set, falling back to
/// uniform dark-world sampling when the set is empty.
pub fn sample_negatives_from_candidate_set<R: Rng + ?Sized>(
    g: &Graph,
    candidates: &CandidateSet,
    reps: &Matrix,
    rng: &mut R,
) -> Result<NegativeSampleSet> {
    let source = candidates.source;
    if candidates.is_empty() {
        warn!("node {source}: DFS candidate set is empty, falling back to uniform sampling");
        let mut set = sample_negatives_random(g, source, negative_count(g, source), rng);
        set.method = Method::DppDfs;
        if set.note != Some(SampleNote::EmptyDarkWorld) {
            set.note = Some(SampleNote::FallbackUniform);
        }
        return Ok(set);
    }
    sample_dpp_from_candidates(g, source, &candidates.members, reps, Method::DppDfs, rng)
}

/// DFS path → candidate set → exp-cosine kernel → k-DPP draw.
pub fn sample_negatives_dpp_dfs<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    reps: &Matrix,
    length: usize,
    rng: &mut R,
) -> Result<NegativeSampleSet> {
    let path = build_dfs_path(g, source, length, rng)?;
    let candidates = collect_candidates(g, &path);
    sample_negatives_from_candidate_set(g, &candidates, reps, rng)
}

/// Uniform draw of `k` dark-world nodes without replacement.
pub fn sample_negatives_random<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    k: usize,
    rng: &mut R,
) -> NegativeSampleSet {
    let dark = dark_world(g, source);
    let (members, note) = if dark.is_empty() {
        warn!("node {source} has an empty dark world");
        (Vec::new(), Some(SampleNote::EmptyDarkWorld))
    } else if dark.len() <= k {
        if dark.len() < k {
            warn!(
                "node {source}: only {} non-neighbors for k = {k}",
                dark.len()
            );
        }
        let note = (dark.len() < k).then_some(SampleNote::ShortDarkWorld);
        (dark, note)
    } else {
        let mut picked: Vec<usize> = index::sample(rng, dark.len(), k)
            .into_iter()
            .map(|i| dark[i])
            .collect();
        picked.sort_unstable();
        (picked, None)
    };
    NegativeSampleSet {
        source,
        members,
        method: Method::Random,
        note,
    }
}

#[derive(Debug, Clone)]
pub struct PprScores {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
    pub converged: bool,
}

/// Power iteration `p ← α e_s + (1 − α) p D⁻¹A`. Mass on isolated nodes
/// teleports back to the source.
pub fn personalized_pagerank(
    g: &Graph,
    source: usize,
    alpha: f64,
    iters: usize,
) -> Result<PprScores> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "teleport {alpha} outside [0, 1]"
        )));
    }
    let n = g.num_nodes();
    if source >= n {
        return Err(Error::NodeOutOfBounds {
            index: source,
            num_nodes: n,
        });
    }
    let mut p = vec![0.0; n];
    p[source] = 1.0;
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < iters {
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for (j, &pj) in p.iter().enumerate() {
            if pj == 0.0 {
                continue;
            }
            let nb = g.neighbors(j);
            if nb.is_empty() {
                dangling += pj;
                continue;
            }
            let share = (1.0 - alpha) * pj / nb.len() as f64;
            for &v in nb {
                next[v] += share;
            }
        }
        next[source] += alpha + (1.0 - alpha) * dangling;
        residual = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        iterations += 1;
        if residual < PPR_TOL {
            break;
        }
    }
    Ok(PprScores {
        scores: p,
        iterations,
        residual,
        converged: residual < PPR_TOL,
    })
}

/// Top-`k` dark-world nodes by personalized PageRank from `source`; ties go
/// to the smaller node id.
pub fn sample_negatives_ppr(
    g: &Graph,
    source: usize,
    k: usize,
    alpha: f64,
    iters: usize,
) -> Result<NegativeSampleSet> {
    let ppr = personalized_pagerank(g, source, alpha, iters)?;
    let mut note = None;
    if !ppr.converged {
        warn!(
            "PPR from node {source} not converged after {} iterations (residual {:e})",
            ppr.iterations, ppr.residual
        );
        note = Some(SampleNote::PprNotConverged);
    }
    let mut dark = dark_world(g, source);
    if dark.is_empty() {
        note = Some(SampleNote::EmptyDarkWorld);
    } else if dark.len() < k {
        note = Some(SampleNote::ShortDarkWorld);
    }
    dark.sort_by(|&a, &b| ppr.scores[b].total_cmp(&ppr.scores[a]).then(a.cmp(&b)));
    dark.truncate(k);
    dark.sort_unstable();
    Ok(NegativeSampleSet {
        source,
        members: dark,
        method: Method::Ppr,
        note,
    })
}

/// Everything the DFS sampler computes for one node.
#[derive(Debug, Clone)]
pub struct NodeInspection {
    pub path: DfsPath,
    pub candidates: CandidateSet,
    pub eigenvalues: Vec<f64>,
    pub sample: NegativeSampleSet,
}

pub fn inspect_node<R: Rng + ?Sized>(
    g: &Graph,
    source: usize,
    reps: &Matrix,
    length: usize,
    rng: &mut R,
) -> Result<NodeInspection> {
    let path = build_dfs_path(g, source, length, rng)?;
    let candidates = collect_candidates(g, &path);
    let eigenvalues = if candidates.is_empty() {
        Vec::new()
    } else {
        KDpp::new(build_kernel(&candidates.members, reps)?)?
            .eigenvalues()
            .to_vec()
    };
    let sample = sample_negatives_from_candidate_set(g, &candidates, reps, rng)?;
    Ok(NodeInspection {
        path,
        candidates,
        eigenvalues,
        sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{complete, grid, path, plain, star};
    use crate::rng::{stream, Stream};
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn rng(seed: u64) -> crate::rng::Rng {
        stream(seed, Stream::Check, &[])
    }

    /// Node 1 with positives {2, 3, 4}; nodes 5..=18 form its dark world.
    fn illustration_graph() -> Graph {
        let edges = [
            (0, 2),
            (1, 2),
            (1, 3),
            (1, 4),
            (2, 8),
            (4, 9),
            (8, 10),
            (9, 15),
            (10, 16),
            (15, 17),
            (3, 5),
            (5, 6),
            (5, 7),
            (5, 11),
            (6, 7),
            (11, 12),
            (11, 13),
            (13, 14),
            (13, 18),
            (12, 14),
        ];
        plain(19, &edges)
    }

    fn exact_ppr(g: &Graph, source: usize, alpha: f64) -> Vec<f64> {
        // Solve (I - (1-α) Pᵀ) p = α e_s by Gaussian elimination.
        let n = g.num_nodes();
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        for j in 0..n {
            for &i in g.neighbors(j) {
                a[i][j] -= (1.0 - alpha) / g.degree(j) as f64;
            }
        }
        a[source][n] = alpha;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                .unwrap();
            a.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        (0..n).map(|i| a[i][n] / a[i][i]).collect()
    }

    #[test]
    fn dfs_on_path_is_unique() {
        let g = path(4);
        let p = build_dfs_path(&g, 0, 2, &mut rng(0)).unwrap();
        assert_eq!(p.nodes, vec![1, 2]);
        assert!(build_dfs_path(&g, 0, 0, &mut rng(0)).is_err());
    }

    #[test]
    fn dfs_on_star_backtracks_through_center() {
        let g = star(3);
        let mut seen = BTreeSet::new();
        for seed in 0..50 {
            let p = build_dfs_path(&g, 1, 3, &mut rng(seed)).unwrap();
            assert_eq!(p.nodes[0], 0);
            assert_eq!(p.nodes.len(), 3);
            let rest: BTreeSet<_> = p.nodes[1..].iter().copied().collect();
            assert_eq!(rest, BTreeSet::from([2, 3]));
            seen.insert(p.nodes.clone());
        }
        // Both orders of the two remaining leaves occur.
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn dfs_stops_when_exhausted() {
        let g = path(3);
        let p = build_dfs_path(&g, 0, 10, &mut rng(1)).unwrap();
        assert_eq!(p.nodes, vec![1, 2]);
    }

    #[test]
    fn dfs_preorder_attaches_to_earlier_nodes() {
        let g = grid(5, 5);
        for seed in 0..20 {
            let p = build_dfs_path(&g, 12, 8, &mut rng(seed)).unwrap();
            assert_eq!(p.nodes.len(), 8);
            let uniq: BTreeSet<_> = p.nodes.iter().collect();
            assert_eq!(uniq.len(), 8);
            assert!(!p.nodes.contains(&12));
            for (t, &v) in p.nodes.iter().enumerate() {
                let earlier = std::iter::once(&12).chain(&p.nodes[..t]);
                assert!(earlier.clone().any(|&u| g.is_neighbor(u, v)));
            }
        }
    }

    #[test]
    fn suggested_length_is_quarter_diameter() {
        assert_eq!(suggested_dfs_length(&path(21)).unwrap(), 5);
        assert_eq!(suggested_dfs_length(&complete(4)).unwrap(), 1);
    }

    #[test]
    fn illustration_candidates() {
        let g = illustration_graph();
        let p = DfsPath {
            source: 1,
            nodes: vec![3, 5, 11, 13],
        };
        let c = collect_candidates(&g, &p);
        assert_eq!(c.members, vec![5, 6, 7, 11, 12, 13, 14, 18]);
        assert_eq!(c.provenance, vec![3, 5, 5, 5, 11, 11, 13, 13]);
    }

    #[test]
    fn illustration_dfs_sample_is_four_candidates() {
        let g = illustration_graph();
        let p = DfsPath {
            source: 1,
            nodes: vec![3, 5, 11, 13],
        };
        let c = collect_candidates(&g, &p);
        let reps = crate::linalg::Matrix::from_vec(
            19,
            3,
            (0..57).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect(),
        )
        .unwrap();
        let s = sample_negatives_from_candidate_set(&g, &c, &reps, &mut rng(3)).unwrap();
        assert_eq!(negative_count(&g, 1), 4);
        assert_eq!(s.members.len(), 4);
        assert!(s.members.iter().all(|m| c.members.contains(m)));
    }

    #[test]
    fn candidates_exclude_positives() {
        // 0 - 1 - 2 with 0 - 2 as well, plus 2 - 3.
        let g = plain(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let c = collect_candidates(
            &g,
            &DfsPath {
                source: 0,
                nodes: vec![1],
            },
        );
        assert!(c.is_empty());
        let c = collect_candidates(
            &g,
            &DfsPath {
                source: 0,
                nodes: vec![2, 3],
            },
        );
        assert_eq!(c.members, vec![3]);
    }

    #[test]
    fn complete_graph_falls_back() {
        let g = complete(5);
        let reps = crate::linalg::Matrix::identity(5);
        let s = sample_negatives_dpp_dfs(&g, 0, &reps, 3, &mut rng(0)).unwrap();
        assert!(s.members.is_empty());
        assert_eq!(s.note, Some(SampleNote::EmptyDarkWorld));
        let s = sample_negatives_dpp_global(&g, 0, &reps, &mut rng(0)).unwrap();
        assert!(s.members.is_empty());
    }

    #[test]
    fn empty_candidates_draw_uniformly_from_dark_world() {
        // Source 0's DFS path [1] has only neighbors of 0; node 3 is dark.
        let g = plain(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]);
        let c = collect_candidates(
            &g,
            &DfsPath {
                source: 0,
                nodes: vec![1],
            },
        );
        let s =
            sample_negatives_from_candidate_set(&g, &c, &Matrix::identity(4), &mut rng(0)).unwrap();
        assert_eq!(s.members, vec![3]);
        assert_eq!(s.note, Some(SampleNote::FallbackUniform));
    }

    #[test]
    fn global_k_is_degree_plus_one() {
        let g = grid(4, 4);
        let reps = crate::linalg::Matrix::identity(16);
        // Node 5 has 4 neighbors.
        let s = sample_negatives_dpp_global(&g, 5, &reps, &mut rng(2)).unwrap();
        assert_eq!(s.members.len(), 5);
        assert!(s.members.iter().all(|&m| m != 5 && !g.is_neighbor(5, m)));
    }

    #[test]
    fn global_with_identity_kernel_is_uniform() {
        let g = path(6);
        let reps = crate::linalg::Matrix::identity(6);
        // Source 0: k = 2, dark world {2,3,4,5}.
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut r = rng(4);
        for _ in 0..12_000 {
            let s = sample_negatives_dpp_global(&g, 0, &reps, &mut r).unwrap();
            *counts.entry(s.members).or_default() += 1;
        }
        let kernel = build_kernel(&[2, 3, 4, 5], &reps).unwrap();
        let pmf = crate::dpp::brute_force_k_dpp_pmf(&kernel, 2).unwrap();
        assert!(pmf.values().all(|p| (p - 1.0 / 6.0).abs() < 1e-12));
        assert!(crate::dpp::tv_distance(&pmf, &counts) < 0.03);
    }

    #[test]
    fn small_candidate_set_is_clamped() {
        // Source 0 has 3 neighbors (k = 4); only nodes 4 and 5 are dark.
        let g = plain(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (4, 5)]);
        let c = CandidateSet {
            source: 0,
            members: vec![4, 5],
            provenance: vec![1, 4],
        };
        let s =
            sample_negatives_from_candidate_set(&g, &c, &Matrix::identity(6), &mut rng(0)).unwrap();
        assert_eq!(s.members, vec![4, 5]);
        assert_eq!(s.note, Some(SampleNote::Clamped(Clamp::CandidateCount)));
    }

    #[test]
    fn random_sampling() {
        let g = star(4);
        let s = sample_negatives_random(&g, 0, 3, &mut rng(0));
        assert!(s.members.is_empty());
        assert_eq!(s.note, Some(SampleNote::EmptyDarkWorld));

        // Source 0 on path 0-1-2-3-4: dark world {2,3,4}.
        let g = path(5);
        let mut r = rng(7);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            let s = sample_negatives_random(&g, 0, 1, &mut r);
            counts[s.members[0]] += 1;
        }
        for c in &counts[2..] {
            assert!((*c as f64 / 10_000.0 - 1.0 / 3.0).abs() < 0.02);
        }
        let a = sample_negatives_random(&g, 0, 2, &mut rng(11));
        let b = sample_negatives_random(&g, 0, 2, &mut rng(11));
        assert_eq!(a, b);
        let all = sample_negatives_random(&g, 0, 9, &mut rng(0));
        assert_eq!(all.members, vec![2, 3, 4]);
        assert_eq!(all.note, Some(SampleNote::ShortDarkWorld));
    }

    #[test]
    fn ppr_on_path() {
        let g = path(4);
        let ppr = personalized_pagerank(&g, 0, 0.15, 500).unwrap();
        assert!((ppr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let exact = exact_ppr(&g, 0, 0.15);
        for (a, b) in ppr.scores.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        assert!(exact[2] > exact[3]);
        let s = sample_negatives_ppr(&g, 0, 1, 0.15, 50).unwrap();
        assert_eq!(s.members, vec![2]);
    }

    #[test]
    fn ppr_full_teleport_degenerates_to_id_order() {
        let g = path(6);
        let ppr = personalized_pagerank(&g, 0, 1.0, 50).unwrap();
        assert_eq!(ppr.scores[0], 1.0);
        assert!(ppr.scores[1..].iter().all(|&x| x == 0.0));
        let s = sample_negatives_ppr(&g, 0, 2, 1.0, 50).unwrap();
        assert_eq!(s.members, vec![2, 3]);
    }

    #[test]
    fn ppr_non_convergence_is_flagged() {
        let g = grid(4, 4);
        let s = sample_negatives_ppr(&g, 0, 3, 0.01, 2).unwrap();
        assert_eq!(s.note, Some(SampleNote::PprNotConverged));
        assert_eq!(s.members.len(), 3);
    }

    #[test]
    fn inspection_reports_all_stages() {
        let g = grid(5, 5);
        let reps =
            Matrix::from_vec(25, 2, (0..50).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let info = inspect_node(&g, 0, &reps, 5, &mut rng(5)).unwrap();
        assert_eq!(info.path.nodes.len(), 5);
        assert_eq!(info.eigenvalues.len(), info.candidates.len());
        assert!(info.candidates.len() <= 5 * (g.max_degree() + 1));
        assert_eq!(info.sample.members.len(), 3);
    }

    /// Two-block graph with blocks of `big` and `small` nodes and block
    /// indicator features plus a little noise.
    fn skewed_blocks(big: usize, small: usize, p_in: f64, p_out: f64, seed: u64) -> Graph {
        use rand::Rng;
        use rand_distr::{Distribution, Normal};
        let n = big + small;
        let block = |i: usize| usize::from(i >= big);
        let mut r = rng(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if block(i) == block(j) { p_in } else { p_out };
                if r.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut features = Matrix::zeros(n, 2);
        for i in 0..n {
            features[(i, block(i))] = 1.0;
            for x in features.row_mut(i) {
                *x += noise.sample(&mut r);
            }
        }
        let labels = (0..n).map(block).collect();
        Graph::new(
            n,
            &edges,
            features,
            labels,
            2,
            vec![false; n],
            vec![false; n],
            vec![true; n],
        )
        .unwrap()
        .0
    }

    fn covers_both(g: &Graph, members: &[usize]) -> bool {
        let first = g.labels[members[0]];
        members.iter().any(|&m| g.labels[m] != first)
    }

    /// Probability that a uniform `k`-subset of `a + b` items meets both groups.
    fn uniform_cover(a: usize, b: usize, k: usize) -> f64 {
        let choose = |n: usize, r: usize| -> f64 {
            if r > n {
                return 0.0;
            }
            (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        1.0 - (choose(a, k) + choose(b, k)) / choose(a + b, k)
    }

    #[test]
    fn exact_pmf_covers_minority_block() {
        for (big, small, k) in [(5, 1, 2), (5, 1, 3), (10, 2, 2), (10, 2, 3)] {
            let g = skewed_blocks(big, small, 0.0, 0.0, 17);
            let members: Vec<usize> = (0..big + small).collect();
            let kernel = build_kernel(&members, &g.features).unwrap();
            let pmf = crate::dpp::brute_force_k_dpp_pmf(&kernel, k).unwrap();
            let cover: f64 = pmf
                .iter()
                .filter(|(s, _)| covers_both(&g, s))
                .map(|(_, p)| p)
                .sum();
            let chance = uniform_cover(big, small, k);
            assert!(
                cover >= 0.9,
                "{big}:{small} k={k}: DPP covers both with p={cover}"
            );
            assert!(chance < 0.6, "{big}:{small} k={k}: uniform p={chance}");
        }
    }

    #[test]
    fn dfs_sampler_covers_both_blocks_on_skewed_graph() {
        let g = skewed_blocks(50, 10, 0.08, 0.02, 3);
        let (mut spanning, mut dpp_cover, mut uniform_cover_hits) = (0usize, 0usize, 0usize);
        for seed in 0..4 {
            for i in 0..g.num_nodes() {
                let path =
                    build_dfs_path(&g, i, 3, &mut stream(seed, Stream::DfsPath, &[i as u64]))
                        .unwrap();
                let cands = collect_candidates(&g, &path);
                if cands.is_empty() || !covers_both(&g, &cands.members) {
                    continue;
                }
                let k = negative_count(&g, i).min(cands.len());
                if k < 2 || k == cands.len() {
                    continue;
                }
                spanning += 1;
                let mut r = stream(seed, Stream::Dpp, &[i as u64]);
                let s =
                    sample_negatives_from_candidate_set(&g, &cands, &g.features, &mut r).unwrap();
                dpp_cover += covers_both(&g, &s.members) as usize;
                let picked: Vec<usize> = rand::seq::index::sample(&mut r, cands.len(), k)
                    .into_iter()
                    .map(|a| cands.members[a])
                    .collect();
                uniform_cover_hits += covers_both(&g, &picked) as usize;
            }
        }
        assert!(spanning >= 50, "only {spanning} spanning candidate sets");
        let dpp = dpp_cover as f64 / spanning as f64;
        let uniform = uniform_cover_hits as f64 / spanning as f64;
        assert!(dpp >= 0.9, "DPP covered both blocks in {dpp} of draws");
        assert!(dpp > uniform, "DPP {dpp} vs uniform {uniform}");
    }

    fn random_graph() -> impl Strategy<Value = (Graph, u64)> {
        (4usize..24, 0.05f64..0.5, any::<u64>()).prop_map(|(n, p, seed)| {
            use rand::Rng;
            let mut r = rng(seed);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if r.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            let data = (0..n * 3).map(|_| r.random_range(-1.0..1.0)).collect();
            let features = Matrix::from_vec(n, 3, data).unwrap();
            let g = Graph::new(
                n,
                &edges,
                features,
                vec![0; n],
                1,
                vec![false; n],
                vec![false; n],
                vec![true; n],
            )
            .unwrap()
            .0;
            (g, seed)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn negatives_respect_exclusion_and_size((g, seed) in random_graph(), length in 1usize..6) {
            for i in 0..g.num_nodes() {
                let k = negative_count(&g, i);
                let path = build_dfs_path(&g, i, length, &mut stream(seed, Stream::DfsPath, &[i as u64])).unwrap();
                let cands = collect_candidates(&g, &path);
                prop_assert!(cands.len() <= length * (g.max_degree() + 1));

                let mut r = stream(seed, Stream::Dpp, &[i as u64]);
                let dfs = sample_negatives_from_candidate_set(&g, &cands, &g.features, &mut r).unwrap();
                let random = sample_negatives_random(&g, i, k, &mut r);
                let ppr = sample_negatives_ppr(&g, i, k, DEFAULT_PPR_ALPHA, DEFAULT_PPR_ITERS).unwrap();
                for set in [&dfs, &random, &ppr] {
                    prop_assert!(!set.members.contains(&i));
                    prop_assert!(set.members.iter().all(|&j| !g.is_neighbor(i, j)));
                    prop_assert!(set.members.windows(2).all(|w| w[0] < w[1]));
                }
                let dark = dark_world(&g, i).len();
                prop_assert_eq!(random.members.len(), k.min(dark));
                prop_assert_eq!(ppr.members.len(), k.min(dark));
                if !cands.is_empty() {
                    let rank = KDpp::new(build_kernel(&cands.members, &g.features).unwrap()).unwrap().rank();
                    prop_assert_eq!(dfs.members.len(), k.min(cands.len()).min(rank));
                    prop_assert!(dfs.members.iter().all(|m| cands.members.contains(m)));
                }
            }
        }
    }
}
