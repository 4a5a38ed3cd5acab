//! Stochastic block model graphs with block-indicator features.

use std::path::Path;

use log::info;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::write_bundle;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::rng::{stream, Stream};

/// Connectivity retries before giving up.
pub const MAX_SBM_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub blocks: usize,
    pub per_block: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Standard deviation of the Gaussian noise added to the one-hot features.
    pub feature_noise: f64,
    pub train_frac: f64,
    pub val_frac: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn new(blocks: usize, per_block: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        SbmConfig {
            blocks,
            per_block,
            p_in,
            p_out,
            feature_noise: 0.3,
            train_frac: 0.1,
            val_frac: 0.2,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.blocks < 2 || self.per_block < 2 {
            return bad(format!(
                "need at least 2 blocks of 2 nodes, got {} × {}",
                self.blocks, self.per_block
            ));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return bad("edge probabilities must lie in [0, 1]".into());
        }
        if self.p_in <= self.p_out {
            return bad(format!(
                "p_in ({}) must exceed p_out ({})",
                self.p_in, self.p_out
            ));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return bad(format!("feature noise {} must be >= 0", self.feature_noise));
        }
        if !(self.train_frac > 0.0 && self.val_frac >= 0.0 && self.train_frac + self.val_frac < 1.0)
        {
            return bad("split fractions must leave room for a test split".into());
        }
        Ok(())
    }
}

/// Draws a connected SBM graph. Node `i` belongs to block `i / per_block`,
/// which is also its label. Splits are stratified per block.
pub fn generate_sbm(config: &SbmConfig) -> Result<Graph> {
    config.validate()?;
    let n = config.blocks * config.per_block;
    let block = |i: usize| i / config.per_block;
    for attempt in 0..MAX_SBM_ATTEMPTS {
        let mut rng = stream(config.seed, Stream::Sbm, &[attempt as u64]);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = if block(i) == block(j) {
                    config.p_in
                } else {
                    config.p_out
                };
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let noise = Normal::new(0.0, config.feature_noise).expect("validated noise");
        let mut features = Matrix::zeros(n, config.blocks);
        for i in 0..n {
            for (c, x) in features.row_mut(i).iter_mut().enumerate() {
                *x = if c == block(i) { 1.0 } else { 0.0 } + noise.sample(&mut rng);
            }
        }
        let (mut train, mut val, mut test) = (vec![false; n], vec![false; n], vec![false; n]);
        let n_train = ((config.train_frac * config.per_block as f64).round() as usize).max(1);
        let n_val = (config.val_frac * config.per_block as f64).round() as usize;
        for b in 0..config.blocks {
            let mut members: Vec<usize> =
                (b * config.per_block..(b + 1) * config.per_block).collect();
            members.shuffle(&mut rng);
            for (r, &i) in members.iter().enumerate() {
                if r < n_train {
                    train[i] = true;
                } else if r < n_train + n_val {
                    val[i] = true;
                } else {
                    test[i] = true;
                }
            }
        }
        let labels = (0..n).map(block).collect();
        let (g, _) = Graph::new(n, &edges, features, labels, config.blocks, train, val, test)?;
        if g.is_connected() {
            return Ok(g);
        }
        info!("SBM attempt {attempt} disconnected, redrawing");
    }
    Err(Error::NotConnected(MAX_SBM_ATTEMPTS))
}

/// Generates an SBM graph and writes it as a dataset bundle.
pub fn make_sbm(config: &SbmConfig, out_dir: &Path) -> Result<Graph> {
    let g = generate_sbm(config)?;
    write_bundle(&g, out_dir)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::load_graph;

    #[test]
    fn blocks_are_denser_inside() {
        let g = generate_sbm(&SbmConfig::new(4, 30, 0.3, 0.02, 1)).unwrap();
        assert_eq!(g.num_nodes(), 120);
        assert!(g.is_connected());
        let (mut inside, mut across) = (0usize, 0usize);
        for (u, v) in g.edges() {
            if g.labels[u] == g.labels[v] {
                inside += 1;
            } else {
                across += 1;
            }
        }
        // Expected: 4·C(30,2)·0.3 ≈ 522 inside, 6·900·0.02 = 108 across.
        assert!(inside > 400 && inside < 650, "inside = {inside}");
        assert!(across > 60 && across < 160, "across = {across}");
    }

    #[test]
    fn splits_are_stratified_and_disjoint() {
        let g = generate_sbm(&SbmConfig::new(3, 20, 0.4, 0.05, 9)).unwrap();
        for b in 0..3 {
            let count = |m: &[bool]| (0..60).filter(|&i| m[i] && g.labels[i] == b).count();
            assert_eq!(count(&g.train_mask), 2);
            assert_eq!(count(&g.val_mask), 4);
            assert_eq!(count(&g.test_mask), 14);
        }
        for i in 0..60 {
            let k = g.train_mask[i] as u8 + g.val_mask[i] as u8 + g.test_mask[i] as u8;
            assert_eq!(k, 1);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SbmConfig::new(2, 15, 0.5, 0.05, 3);
        let a = generate_sbm(&cfg).unwrap();
        let b = generate_sbm(&cfg).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.features, b.features);
        assert_eq!(a.train_mask, b.train_mask);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(generate_sbm(&SbmConfig::new(2, 10, 0.1, 0.1, 0)).is_err());
        assert!(generate_sbm(&SbmConfig::new(2, 10, 0.05, 0.2, 0)).is_err());
    }

    #[test]
    fn gives_up_on_hopelessly_sparse_graphs() {
        let err = generate_sbm(&SbmConfig::new(4, 30, 0.001, 0.0, 0)).unwrap_err();
        assert!(matches!(err, Error::NotConnected(MAX_SBM_ATTEMPTS)));
    }

    #[test]
    fn bundle_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_sbm(&SbmConfig::new(2, 12, 0.6, 0.1, 4), dir.path()).unwrap();
        let (h, report) = load_graph(dir.path()).unwrap();
        assert_eq!(report.nodes, 24);
        assert_eq!(g.edges(), h.edges());
        assert_eq!(g.labels, h.labels);
        assert_eq!(g.train_mask, h.train_mask);
        let max_err = g
            .features
            .as_slice()
            .iter()
            .zip(h.features.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(max_err, 0.0);
    }
}
