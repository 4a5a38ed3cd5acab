//! Exact k-DPP sampling over a candidate node set.
//!
//! The L-ensemble is `L[a, b] = exp(cos(x_a, x_b) - 1)`. Sampling follows
//! the eigendecomposition route: choose `k` eigenvectors with probability
//! proportional to the product of their eigenvalues (backward pass over the
//! elementary symmetric polynomial table), then draw one item per chosen
//! eigenvector from the resulting elementary DPP.

use std::collections::BTreeMap;

use log::debug;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{det, eigh, gram_schmidt, norm, EigenSystem, Matrix, SymMatrix};

/// Largest ground set accepted by [`brute_force_k_dpp_pmf`].
pub const ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone)]
pub struct Kernel {
    pub candidates: Vec<usize>,
    pub matrix: SymMatrix,
}

impl Kernel {
    /// Wraps an explicit PSD matrix; position `a` corresponds to `candidates[a]`.
    pub fn from_matrix(candidates: Vec<usize>, matrix: SymMatrix) -> Result<Self> {
        check_candidates(&candidates)?;
        if matrix.n() != candidates.len() {
            return Err(Error::Shape(format!(
                "{} candidates for a {}x{} kernel",
                candidates.len(),
                matrix.n(),
                matrix.n()
            )));
        }
        Ok(Kernel { candidates, matrix })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

fn check_candidates(candidates: &[usize]) -> Result<()> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateCandidate(w[0]));
    }
    Ok(())
}

/// Exp-cosine L-ensemble on the rows of `reps` named by `candidates`.
pub fn build_kernel(candidates: &[usize], reps: &Matrix) -> Result<Kernel> {
    check_candidates(candidates)?;
    if let Some(&bad) = candidates.iter().find(|&&c| c >= reps.rows()) {
        return Err(Error::NodeOutOfBounds {
            index: bad,
            num_nodes: reps.rows(),
        });
    }
    let n = candidates.len();
    let norms: Vec<f64> = candidates.iter().map(|&c| norm(reps.row(c))).collect();
    let zero_norm = norms.iter().filter(|&&x| x == 0.0).count();
    if zero_norm > 0 {
        debug!("{zero_norm} zero-norm representations in kernel; cosine taken as 0");
    }
    let mut m = Matrix::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = 1.0;
        let ra = reps.row(candidates[a]);
        for b in (a + 1)..n {
            let cos = if norms[a] == 0.0 || norms[b] == 0.0 {
                0.0
            } else {
                let rb = reps.row(candidates[b]);
                (crate::linalg::dot(ra, rb) / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            };
            let v = (cos - 1.0).exp();
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    Ok(Kernel {
        candidates: candidates.to_vec(),
        matrix: SymMatrix::new(m)?,
    })
}

/// `e[j][m] = e_j(λ_1, …, λ_m)` for `j ≤ k`, `m ≤ n`.
#[derive(Debug, Clone)]
pub struct EspTable {
    e: Vec<Vec<f64>>,
}

impl EspTable {
    pub fn new(values: &[f64], k: usize) -> Result<Self> {
        let n = values.len();
        if k > n {
            return Err(Error::KTooLarge { k, n });
        }
        if values.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "elementary symmetric polynomials need finite non-negative values".into(),
            ));
        }
        let mut e = vec![vec![0.0; n + 1]; k + 1];
        e[0].iter_mut().for_each(|x| *x = 1.0);
        for j in 1..=k {
            for m in 1..=n {
                e[j][m] = e[j][m - 1] + values[m - 1] * e[j - 1][m - 1];
            }
        }
        Ok(EspTable { e })
    }

    pub fn get(&self, j: usize, m: usize) -> f64 {
        self.e[j][m]
    }

    pub fn k(&self) -> usize {
        self.e.len() - 1
    }

    pub fn n(&self) -> usize {
        self.e[0].len() - 1
    }

    /// `e_k(λ_1, …, λ_n)`, the k-DPP normaliser.
    pub fn total(&self) -> f64 {
        self.e[self.k()][self.n()]
    }
}

/// Why a sample came back smaller than requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamp {
    /// Fewer candidates than `k`.
    CandidateCount,
    /// Fewer strictly positive eigenvalues than `k`.
    Rank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KDppSample {
    /// Selected node ids, ascending.
    pub items: Vec<usize>,
    pub requested: usize,
    pub clamp: Option<Clamp>,
}

/// A kernel with its clamped eigendecomposition, ready for repeated draws.
#[derive(Debug, Clone)]
pub struct KDpp {
    kernel: Kernel,
    eigen: EigenSystem,
    rank: usize,
}

impl KDpp {
    pub fn new(kernel: Kernel) -> Result<Self> {
        let mut eigen = eigh(&kernel.matrix)?;
        let rank = eigen.clamp_psd();
        Ok(KDpp {
            kernel,
            eigen,
            rank,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<KDppSample> {
        let n = self.kernel.len();
        let (k_eff, clamp) = if k > n {
            debug!("k = {k} exceeds {n} candidates; returning the whole candidate set");
            (n.min(self.rank), Some(Clamp::CandidateCount))
        } else if k > self.rank {
            debug!("k = {k} exceeds kernel rank {}; clamping", self.rank);
            (self.rank, Some(Clamp::Rank))
        } else {
            (k, None)
        };
        if clamp == Some(Clamp::CandidateCount) && k_eff == n {
            return Ok(KDppSample {
                items: sorted(self.kernel.candidates.clone()),
                requested: k,
                clamp,
            });
        }
        let positions = if k_eff == n {
            (0..n).collect()
        } else {
            let chosen = select_eigenvectors(&self.eigen.values, k_eff, rng)?;
            sample_elementary(&self.eigen.vectors, &chosen, rng)
        };
        let items = sorted(
            positions
                .into_iter()
                .map(|p| self.kernel.candidates[p])
                .collect(),
        );
        Ok(KDppSample {
            items,
            requested: k,
            clamp,
        })
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Draws an exact k-DPP sample from `kernel`.
pub fn sample_k_dpp<R: Rng + ?Sized>(kernel: &Kernel, k: usize, rng: &mut R) -> Result<KDppSample> {
    if k == 0 {
        return Ok(KDppSample {
            items: Vec::new(),
            requested: 0,
            clamp: None,
        });
    }
    KDpp::new(kernel.clone())?.sample(k, rng)
}

/// Phase one: a size-`k` eigenvector index set `J` with probability
/// `∏_{m∈J} λ_m / e_k`. Requires `k` ≤ number of positive eigenvalues.
fn select_eigenvectors<R: Rng + ?Sized>(
    values: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let table = EspTable::new(values, k)?;
    let mut chosen = Vec::with_capacity(k);
    let mut remaining = k;
    for m in (1..=values.len()).rev() {
        if remaining == 0 {
            break;
        }
        let p = values[m - 1] * table.get(remaining - 1, m - 1) / table.get(remaining, m);
        let u: f64 = rng.random();
        if u < p {
            chosen.push(m - 1);
            remaining -= 1;
        }
    }
    debug_assert_eq!(remaining, 0);
    Ok(chosen)
}

/// Phase two: sample from the elementary DPP spanned by the chosen
/// eigenvectors (columns of `vectors`). Returns kernel positions.
fn sample_elementary<R: Rng + ?Sized>(
    vectors: &Matrix,
    chosen: &[usize],
    rng: &mut R,
) -> Vec<usize> {
    let n = vectors.rows();
    let mut basis: Vec<Vec<f64>> = chosen.iter().map(|&m| vectors.column(m)).collect();
    let mut picked = Vec::with_capacity(chosen.len());
    let mut taken = vec![false; n];
    while !basis.is_empty() {
        let weights: Vec<f64> = (0..n)
            .map(|a| {
                if taken[a] {
                    0.0
                } else {
                    basis.iter().map(|v| v[a] * v[a]).sum()
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut item = n - 1;
        for (a, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                item = a;
                if u < w {
                    break;
                }
                u -= w;
            }
        }
        picked.push(item);
        taken[item] = true;

        // Project the basis onto the complement of e_item.
        let pivot = (0..basis.len())
            .max_by(|&x, &y| basis[x][item].abs().total_cmp(&basis[y][item].abs()))
            .unwrap();
        let pv = basis.swap_remove(pivot);
        for w in &mut basis {
            let f = w[item] / pv[item];
            for (x, y) in w.iter_mut().zip(&pv) {
                *x -= f * y;
            }
            w[item] = 0.0;
        }
        gram_schmidt(&mut basis, 1e-14);
    }
    picked
}

/// Visits every `k`-combination of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact k-DPP probabilities `det(L_Y) / e_k` for every k-subset, keyed by
/// ascending node ids.
pub fn brute_force_k_dpp_pmf(kernel: &Kernel, k: usize) -> Result<BTreeMap<Vec<usize>, f64>> {
    let n = kernel.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut eigen = eigh(&kernel.matrix)?;
    eigen.clamp_psd();
    let e_k = EspTable::new(&eigen.values, k)?.total();
    let mut pmf = BTreeMap::new();
    let mut err = None;
    for_each_combination(n, k, |idx| match det(&kernel.matrix.submatrix(idx)) {
        Ok(d) => {
            let key = sorted(idx.iter().map(|&p| kernel.candidates[p]).collect());
            pmf.insert(key, d.max(0.0) / e_k);
        }
        Err(e) => err = Some(e),
    });
    match err {
        Some(e) => Err(e),
        None => Ok(pmf),
    }
}

/// Total-variation distance between an exact PMF and empirical counts.
pub fn tv_distance(pmf: &BTreeMap<Vec<usize>, f64>, counts: &BTreeMap<Vec<usize>, usize>) -> f64 {
    let total: usize = counts.values().sum();
    let mut tv = 0.0;
    for (key, &p) in pmf {
        let q = counts.get(key).copied().unwrap_or(0) as f64 / total as f64;
        tv += (p - q).abs();
    }
    for (key, &c) in counts {
        if !pmf.contains_key(key) {
            tv += c as f64 / total as f64;
        }
    }
    0.5 * tv
}

/// Empirical check of the sampler: for `kernels` random exp-cosine kernels on
/// `n` candidates, draws `samples` k-subsets each and returns the TV
/// distances to the exact PMF.
pub fn dpp_check(
    kernels: usize,
    n: usize,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use crate::rng::{stream, Stream};
    use rand_distr::{Distribution, StandardNormal};

    (0..kernels)
        .map(|t| {
            let mut rng = stream(seed, Stream::Check, &[t as u64]);
            let dim = 4;
            let data: Vec<f64> = (0..n * dim)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let reps = Matrix::from_vec(n, dim, data)?;
            let kernel = build_kernel(&(0..n).collect::<Vec<_>>(), &reps)?;
            let pmf = brute_force_k_dpp_pmf(&kernel, k)?;
            let dpp = KDpp::new(kernel)?;
            let mut counts = BTreeMap::new();
            for _ in 0..samples {
                *counts.entry(dpp.sample(k, &mut rng)?.items).or_insert(0) += 1;
            }
            Ok(tv_distance(&pmf, &counts))
        })
        .collect()
}
