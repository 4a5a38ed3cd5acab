//! Full-batch training loop and per-model negative schedules.

use std::time::Instant;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optim::{Adam, AdamConfig};
use super::{DfsLength, FixedNegatives, Model, ModelConfig, ModelKind, NegativeProvider};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::metrics::{accuracy, argmax_rows, mad_masked};
use crate::negative::{
    build_dfs_path, collect_candidates, negative_count, sample_negatives_from_candidate_set,
    sample_negatives_ppr, sample_negatives_random, suggested_dfs_length, CandidateSet, SampleNote,
};
use crate::rng::{stream, Stream};

/// How a model kind obtains negatives across epochs and layers.
///
/// * `rgcn`: fresh uniform dark-world draws per epoch, layer and node.
/// * `pgcn`: top-PPR dark-world nodes, computed once from structure.
/// * `d2gcn`: DFS candidate sets rebuilt once per epoch, then a k-DPP draw
///   per layer over the layer's input representations.
pub struct NegativeSchedule<'g> {
    g: &'g Graph,
    kind: ModelKind,
    seed: u64,
    dfs_length: usize,
    ppr: Option<Vec<Vec<usize>>>,
}

impl<'g> NegativeSchedule<'g> {
    pub fn new(g: &'g Graph, config: &ModelConfig) -> Result<Self> {
        let dfs_length = match config.dfs_length {
            DfsLength::Fixed(n) => n,
            DfsLength::Auto if config.kind == ModelKind::D2gcn => suggested_dfs_length(g)?,
            DfsLength::Auto => 1,
        };
        let ppr = if config.kind == ModelKind::Pgcn {
            let sets = (0..g.num_nodes())
                .into_par_iter()
                .map(|i| {
                    sample_negatives_ppr(
                        g,
                        i,
                        negative_count(g, i),
                        config.ppr_alpha,
                        config.ppr_iters,
                    )
                    .map(|s| s.members)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(sets)
        } else {
            None
        };
        Ok(NegativeSchedule {
            g,
            kind: config.kind,
            seed: config.seed,
            dfs_length,
            ppr,
        })
    }

    pub fn dfs_length(&self) -> usize {
        self.dfs_length
    }

    pub fn epoch(&self, epoch: usize) -> Result<EpochNegatives<'_, 'g>> {
        let candidates = if self.kind == ModelKind::D2gcn {
            let g = self.g;
            let sets = (0..g.num_nodes())
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(self.seed, Stream::DfsPath, &[epoch as u64, i as u64]);
                    build_dfs_path(g, i, self.dfs_length, &mut rng)
                        .map(|p| collect_candidates(g, &p))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(sets)
        } else {
            None
        };
        Ok(EpochNegatives {
            schedule: self,
            epoch,
            candidates,
            tally: NoteTally::default(),
        })
    }
}

/// Negatives for the layers of one epoch's forward pass.
pub struct EpochNegatives<'s, 'g> {
    schedule: &'s NegativeSchedule<'g>,
    epoch: usize,
    candidates: Option<Vec<CandidateSet>>,
    tally: NoteTally,
}

impl EpochNegatives<'_, '_> {
    pub fn candidates(&self) -> Option<&[CandidateSet]> {
        self.candidates.as_deref()
    }

    pub fn tally(&self) -> NoteTally {
        self.tally
    }
}

/// Counts of DPP draws that deviated from `k` samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoteTally {
    /// `k` exceeded the candidate count or the kernel rank.
    pub clamped: usize,
    /// Empty candidate set; drawn uniformly from the dark world.
    pub fallback: usize,
}

impl NoteTally {
    fn add(&mut self, other: NoteTally) {
        self.clamped += other.clamped;
        self.fallback += other.fallback;
    }
}

impl NegativeProvider for EpochNegatives<'_, '_> {
    fn negatives(&mut self, layer: usize, reps: &Matrix) -> Result<Vec<Vec<usize>>> {
        let s = self.schedule;
        let g = s.g;
        let tags = |i: usize| [self.epoch as u64, layer as u64, i as u64];
        match s.kind {
            ModelKind::Gcn => Ok(vec![Vec::new(); g.num_nodes()]),
            ModelKind::Pgcn => Ok(s.ppr.clone().expect("PPR sets are built for pgcn")),
            ModelKind::Rgcn => Ok((0..g.num_nodes())
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(s.seed, Stream::RandomNegatives, &tags(i));
                    sample_negatives_random(g, i, negative_count(g, i), &mut rng).members
                })
                .collect()),
            ModelKind::D2gcn => {
                let cands = self
                    .candidates
                    .as_ref()
                    .expect("candidates are built for d2gcn");
                let sets = cands
                    .par_iter()
                    .map(|c| {
                        let mut rng = stream(s.seed, Stream::Dpp, &tags(c.source));
                        sample_negatives_from_candidate_set(g, c, reps, &mut rng)
                    })
                    .collect::<Result<Vec<_>>>()?;
                for set in &sets {
                    match set.note {
                        Some(SampleNote::Clamped(_)) => self.tally.clamped += 1,
                        Some(SampleNote::FallbackUniform) => self.tally.fallback += 1,
                        _ => {}
                    }
                }
                Ok(sets.into_iter().map(|s| s.members).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub mad: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: ModelKind,
    pub layers: usize,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Wall-clock training time.
    pub seconds: f64,
    pub notes: NoteTally,
}

impl RunRecord {
    pub fn last(&self) -> &EpochRecord {
        self.epochs.last().expect("at least one epoch")
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub record: RunRecord,
}

fn masked_accuracy(pred: &[usize], g: &Graph, mask: &[bool]) -> Result<f64> {
    match accuracy(pred, &g.labels, mask) {
        Err(Error::EmptyMask) => Ok(f64::NAN),
        other => other,
    }
}

/// Trains `config.kind` on `g` with full-batch Adam.
///
/// Metrics for epoch `e` describe the parameters before that epoch's update.
/// With dropout enabled they come from a dropout-free pass that reuses the
/// epoch's negatives.
pub fn train(g: &Graph, config: &ModelConfig) -> Result<Trained> {
    config.validate()?;
    if !g.train_mask.iter().any(|&m| m) {
        return Err(Error::EmptyMask);
    }
    let start = Instant::now();
    let mut model = Model::new(config.clone(), g.num_features(), g.num_classes)?;
    let schedule = NegativeSchedule::new(g, config)?;
    let mut sizes: Vec<usize> = model
        .layers
        .iter()
        .map(|l| l.theta.as_slice().len())
        .collect();
    sizes.push(1);
    let mut adam = Adam::new(AdamConfig::with_lr(config.lr), &sizes);
    let mad_rows = g.mask(config.mad_split);
    let mut epochs = Vec::with_capacity(config.epochs);
    let mut notes = NoteTally::default();

    for epoch in 0..config.epochs {
        let diverged = |what| Error::Diverged { what, epoch };
        let mut provider = schedule.epoch(epoch)?;
        let mut drop_rng = stream(config.seed, Stream::Dropout, &[epoch as u64]);
        let pass = match model.forward(g, &mut provider, Some(&mut drop_rng)) {
            Err(Error::NonFinite) => return Err(diverged("activations")),
            other => other?,
        };
        notes.add(provider.tally());
        let (loss, dlogits) = model.loss(g, &pass)?;
        if !loss.is_finite() {
            return Err(diverged("loss"));
        }

        let eval_logits = if config.dropout > 0.0 {
            let cached = pass.layers.iter().map(|s| s.negatives.clone()).collect();
            match model.forward(g, &mut FixedNegatives(cached), None) {
                Err(Error::NonFinite) => return Err(diverged("activations")),
                other => other?.logits().clone(),
            }
        } else {
            pass.logits().clone()
        };
        let pred = argmax_rows(&eval_logits);
        let record = EpochRecord {
            epoch,
            loss,
            train_acc: masked_accuracy(&pred, g, &g.train_mask)?,
            val_acc: masked_accuracy(&pred, g, &g.val_mask)?,
            test_acc: masked_accuracy(&pred, g, &g.test_mask)?,
            mad: mad_masked(&eval_logits, &mad_rows).unwrap_or(f64::NAN),
            omega: model.omega.omega,
        };
        debug!(
            "{} L={} seed={} epoch={epoch} loss={loss:.6} train={:.4} val={:.4} test={:.4} mad={:.4} omega={:.4}",
            config.kind, config.num_layers, config.seed, record.train_acc, record.val_acc,
            record.test_acc, record.mad, record.omega
        );
        epochs.push(record);

        model.backward(g, &pass, &dlogits)?;
        adam.begin_step();
        let omega_slot = model.layers.len();
        for (slot, layer) in model.layers.iter_mut().enumerate() {
            let grad = std::mem::replace(&mut layer.grad_theta, Matrix::zeros(0, 0));
            adam.update(slot, layer.theta.as_mut_slice(), grad.as_slice());
            layer.grad_theta = grad;
        }
        if model.omega.trainable {
            let mut w = [model.omega.omega];
            adam.update(omega_slot, &mut w, &[model.omega.grad_omega]);
            model.omega.omega = w[0].max(0.0);
        }
        if model.layers.iter().any(|l| !l.theta.is_finite()) || !model.omega.omega.is_finite() {
            return Err(diverged("parameters"));
        }
    }

    let record = RunRecord {
        model: config.kind,
        layers: config.num_layers,
        seed: config.seed,
        epochs,
        seconds: start.elapsed().as_secs_f64(),
        notes,
    };
    if notes != NoteTally::default() {
        info!(
            "{} L={} seed={}: {} negative draws clamped below k, {} uniform fallbacks",
            config.kind, config.num_layers, config.seed, notes.clamped, notes.fallback
        );
    }
    info!(
        "{} L={} seed={}: test_acc={:.4} mad={:.4} omega={:.4} ({:.2}s)",
        config.kind,
        config.num_layers,
        config.seed,
        record.last().test_acc,
        record.last().mad,
        record.last().omega,
        record.seconds
    );
    Ok(Trained { model, record })
}
