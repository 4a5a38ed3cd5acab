//! GCN and negative-boosted GCN layers with hand-written backpropagation.
//!
//! Layer `l` computes `Z = (Â − ω B) X Θ`, where `Â` is the self-loop
//! normalised adjacency with coefficients `1/(√deĝ(i)·√deĝ(j))` and `B`
//! holds the same coefficients on each node's negative samples. Plain GCN
//! is the `B = 0` case. ReLU is applied between layers; the last layer's
//! output feeds a log-softmax.

mod optim;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Split};
use crate::linalg::Matrix;
use crate::negative::{DEFAULT_DFS_LENGTH, DEFAULT_PPR_ALPHA, DEFAULT_PPR_ITERS};
use crate::rng::{stream, Stream};

pub use optim::{Adam, AdamConfig};
pub use train::{
    train, EpochNegatives, EpochRecord, NegativeSchedule, NoteTally, RunRecord, Trained,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gcn,
    Rgcn,
    Pgcn,
    D2gcn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Gcn,
        ModelKind::Rgcn,
        ModelKind::Pgcn,
        ModelKind::D2gcn,
    ];

    pub fn uses_negatives(self) -> bool {
        self != ModelKind::Gcn
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Gcn => "gcn",
            ModelKind::Rgcn => "rgcn",
            ModelKind::Pgcn => "pgcn",
            ModelKind::D2gcn => "d2gcn",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gcn" => Ok(ModelKind::Gcn),
            "rgcn" => Ok(ModelKind::Rgcn),
            "pgcn" => Ok(ModelKind::Pgcn),
            "d2gcn" => Ok(ModelKind::D2gcn),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

/// Negative rate: learned from 1.0, or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaSpec {
    Trainable,
    Fixed(f64),
}

pub const OMEGA_INIT: f64 = 1.0;

impl fmt::Display for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OmegaSpec::Trainable => f.write_str("trainable"),
            OmegaSpec::Fixed(w) => write!(f, "fixed:{w}"),
        }
    }
}

impl FromStr for OmegaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "trainable" {
            return Ok(OmegaSpec::Trainable);
        }
        let value = s.strip_prefix("fixed:").unwrap_or(s);
        let w: f64 = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad omega `{s}`")))?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be finite and >= 0, got {w}"
            )));
        }
        Ok(OmegaSpec::Fixed(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfsLength {
    Fixed(usize),
    /// A quarter of the estimated diameter.
    Auto,
}

impl FromStr for DfsLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(DfsLength::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(DfsLength::Fixed(n)),
            _ => Err(Error::InvalidArgument(format!("bad DFS length `{s}`"))),
        }
    }
}

impl fmt::Display for DfsLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DfsLength::Fixed(n) => write!(f, "{n}"),
            DfsLength::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub omega: OmegaSpec,
    pub dfs_length: DfsLength,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub ppr_alpha: f64,
    pub ppr_iters: usize,
    pub mad_split: Split,
}

impl ModelConfig {
    pub const MIN_LAYERS: usize = 2;
    pub const MAX_LAYERS: usize = 6;

    pub fn new(kind: ModelKind, num_layers: usize) -> Self {
        ModelConfig {
            kind,
            num_layers,
            hidden_dim: 64,
            omega: OmegaSpec::Trainable,
            dfs_length: DfsLength::Fixed(DEFAULT_DFS_LENGTH),
            lr: 0.01,
            epochs: 200,
            seed: 0,
            dropout: 0.0,
            weight_decay: 0.0,
            ppr_alpha: DEFAULT_PPR_ALPHA,
            ppr_iters: DEFAULT_PPR_ITERS,
            mad_split: Split::All,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(Self::MIN_LAYERS..=Self::MAX_LAYERS).contains(&self.num_layers) {
            return bad(format!(
                "num_layers {} outside [{}, {}]",
                self.num_layers,
                Self::MIN_LAYERS,
                Self::MAX_LAYERS
            ));
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be >= 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.lr));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad(format!("weight decay {} must be >= 0", self.weight_decay));
        }
        if let OmegaSpec::Fixed(w) = self.omega {
            if !(w >= 0.0 && w.is_finite()) {
                return bad(format!("omega {w} must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.ppr_alpha) {
            return bad(format!("PPR teleport {} outside [0, 1]", self.ppr_alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// `[in_dim × out_dim]`
    pub theta: Matrix,
    pub grad_theta: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeRate {
    pub omega: f64,
    pub trainable: bool,
    pub grad_omega: f64,
}

/// Per-layer cache of one forward pass.
#[derive(Debug, Clone)]
pub struct LayerState {
    /// Layer input after dropout (`h^(l-1)` for layer `l`).
    pub input: Matrix,
    /// Inverted-dropout scale per input entry, when dropout was applied.
    pub dropout_scale: Option<Vec<f64>>,
    /// `input · Θ`
    pub transformed: Matrix,
    pub negatives: Vec<Vec<usize>>,
    /// Pre-activation output `Z`.
    pub output: Matrix,
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub layers: Vec<LayerState>,
}

impl ForwardPass {
    /// Final-layer pre-softmax representations.
    pub fn logits(&self) -> &Matrix {
        &self.layers.last().expect("at least one layer").output
    }
}

/// Supplies each node's negative samples for a layer, given the layer's
/// input representations.
pub trait NegativeProvider {
    fn negatives(&mut self, layer: usize, reps: &Matrix) -> Result<Vec<Vec<usize>>>;
}

/// Plain GCN: no negatives.
pub struct NoNegatives;

impl NegativeProvider for NoNegatives {
    fn negatives(&mut self, _layer: usize, reps: &Matrix) -> Result<Vec<Vec<usize>>> {
        Ok(vec![Vec::new(); reps.rows()])
    }
}

/// Pre-drawn negatives, indexed `[layer][node]`.
pub struct FixedNegatives(pub Vec<Vec<Vec<usize>>>);

impl NegativeProvider for FixedNegatives {
    fn negatives(&mut self, layer: usize, _reps: &Matrix) -> Result<Vec<Vec<usize>>> {
        self.0
            .get(layer)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("no negatives for layer {layer}")))
    }
}

/// `1/√deĝ(i)` for every node.
pub fn inv_sqrt_deg_hat(g: &Graph) -> Vec<f64> {
    g.degrees()
        .deg_hat
        .iter()
        .map(|&d| 1.0 / (d as f64).sqrt())
        .collect()
}

/// `Z[i] = Σ_{j∈N(i)∪{i}} c_ij P[j] − ω Σ_{j̄∈N̄(i)} c_ij̄ P[j̄]`
pub fn aggregate(
    g: &Graph,
    coef: &[f64],
    p: &Matrix,
    negatives: &[Vec<usize>],
    omega: f64,
) -> Matrix {
    let (n, d) = p.shape();
    let mut z = Matrix::zeros(n, d);
    let mut neg = vec![0.0; d];
    for i in 0..n {
        let row = z.row_mut(i);
        let ci = coef[i];
        for &j in std::iter::once(&i).chain(g.neighbors(i)) {
            let c = ci * coef[j];
            for (o, &x) in row.iter_mut().zip(p.row(j)) {
                *o += c * x;
            }
        }
        if negatives[i].is_empty() {
            continue;
        }
        neg.iter_mut().for_each(|x| *x = 0.0);
        for &j in &negatives[i] {
            let c = ci * coef[j];
            for (o, &x) in neg.iter_mut().zip(p.row(j)) {
                *o += c * x;
            }
        }
        for (o, &x) in row.iter_mut().zip(&neg) {
            *o -= omega * x;
        }
    }
    z
}

/// Adjoint of [`aggregate`] with respect to `P`, plus `∂/∂ω`.
fn aggregate_backward(
    g: &Graph,
    coef: &[f64],
    p: &Matrix,
    dz: &Matrix,
    negatives: &[Vec<usize>],
    omega: f64,
) -> (Matrix, f64) {
    let (n, d) = dz.shape();
    let mut dp = Matrix::zeros(n, d);
    let mut dp_neg = Matrix::zeros(n, d);
    let mut d_omega = 0.0;
    for i in 0..n {
        let ci = coef[i];
        let gi = dz.row(i);
        for &j in std::iter::once(&i).chain(g.neighbors(i)) {
            let c = ci * coef[j];
            for (o, &x) in dp.row_mut(j).iter_mut().zip(gi) {
                *o += c * x;
            }
        }
        for &j in &negatives[i] {
            let c = ci * coef[j];
            for (o, &x) in dp_neg.row_mut(j).iter_mut().zip(gi) {
                *o += c * x;
            }
            d_omega -= c * crate::linalg::dot(gi, p.row(j));
        }
    }
    for (o, &x) in dp.as_mut_slice().iter_mut().zip(dp_neg.as_slice()) {
        *o -= omega * x;
    }
    (dp, d_omega)
}

/// Mean negative log-likelihood of log-softmax(`logits`) over masked rows,
/// with its gradient with respect to `logits`.
pub fn masked_nll(logits: &Matrix, labels: &[usize], mask: &[bool]) -> Result<(f64, Matrix)> {
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let (n, c) = logits.shape();
    let mut grad = Matrix::zeros(n, c);
    let mut loss = 0.0;
    for i in (0..n).filter(|&i| mask[i]) {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|x| (x - max).exp()).sum();
        let log_z = max + sum.ln();
        loss -= row[labels[i]] - log_z;
        let g = grad.row_mut(i);
        for (k, &x) in row.iter().enumerate() {
            g[k] = (x - log_z).exp() / count as f64;
        }
        g[labels[i]] -= 1.0 / count as f64;
    }
    Ok((loss / count as f64, grad))
}

/// Row-wise log-softmax.
pub fn log_softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        row.iter_mut().for_each(|x| *x -= log_z);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub layers: Vec<LayerParams>,
    pub omega: NegativeRate,
}

impl Model {
    /// Glorot-uniform initialisation from the run seed.
    pub fn new(config: ModelConfig, in_dim: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        let mut dims = vec![in_dim];
        dims.extend(std::iter::repeat_n(
            config.hidden_dim,
            config.num_layers - 1,
        ));
        dims.push(num_classes);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut rng = stream(config.seed, Stream::Init, &[l as u64]);
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-bound..=bound))
                    .collect();
                LayerParams {
                    theta: Matrix::from_vec(fan_in, fan_out, data).expect("shape"),
                    grad_theta: Matrix::zeros(fan_in, fan_out),
                }
            })
            .collect();
        let omega = match config.omega {
            OmegaSpec::Trainable => NegativeRate {
                omega: OMEGA_INIT,
                trainable: config.kind.uses_negatives(),
                grad_omega: 0.0,
            },
            OmegaSpec::Fixed(w) => NegativeRate {
                omega: w,
                trainable: false,
                grad_omega: 0.0,
            },
        };
        Ok(Model {
            config,
            layers,
            omega,
        })
    }

    /// Effective negative rate (plain GCN ignores negatives entirely).
    fn rate(&self) -> f64 {
        if self.config.kind.uses_negatives() {
            self.omega.omega
        } else {
            0.0
        }
    }

    /// Runs every layer. `dropout` supplies the mask generator when training
    /// with dropout enabled.
    pub fn forward<P: NegativeProvider + ?Sized>(
        &self,
        g: &Graph,
        provider: &mut P,
        mut dropout: Option<&mut crate::rng::Rng>,
    ) -> Result<ForwardPass> {
        if g.num_features() != self.layers[0].theta.rows() {
            return Err(Error::Shape(format!(
                "graph has {} features, model expects {}",
                g.num_features(),
                self.layers[0].theta.rows()
            )));
        }
        let coef = inv_sqrt_deg_hat(g);
        let omega = self.rate();
        let last = self.layers.len() - 1;
        let mut states: Vec<LayerState> = Vec::with_capacity(self.layers.len());
        let mut h = g.features.clone();
        for (l, params) in self.layers.iter().enumerate() {
            // Negatives are drawn from the layer input before dropout.
            let negatives = if self.config.kind.uses_negatives() {
                provider.negatives(l, &h)?
            } else {
                vec![Vec::new(); g.num_nodes()]
            };
            if negatives.len() != g.num_nodes() {
                return Err(Error::Shape(format!(
                    "{} negative sets for {} nodes",
                    negatives.len(),
                    g.num_nodes()
                )));
            }
            let dropout_scale = match (dropout.as_deref_mut(), self.config.dropout) {
                (Some(rng), p) if p > 0.0 => {
                    let keep = 1.0 / (1.0 - p);
                    let scale: Vec<f64> = (0..h.as_slice().len())
                        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
                        .collect();
                    for (x, s) in h.as_mut_slice().iter_mut().zip(&scale) {
                        *x *= s;
                    }
                    Some(scale)
                }
                _ => None,
            };
            let transformed = h.matmul(&params.theta);
            let output = aggregate(g, &coef, &transformed, &negatives, omega);
            if !output.is_finite() {
                return Err(Error::NonFinite);
            }
            let next = if l < last {
                let mut a = output.clone();
                a.as_mut_slice().iter_mut().for_each(|x| *x = x.max(0.0));
                Some(a)
            } else {
                None
            };
            states.push(LayerState {
                input: h,
                dropout_scale,
                transformed,
                negatives,
                output,
            });
            match next {
                Some(a) => h = a,
                None => break,
            }
        }
        Ok(ForwardPass { layers: states })
    }

    /// Mean NLL on the train mask plus `½·wd·Σ‖Θ‖²`, with the gradient with
    /// respect to the logits.
    pub fn loss(&self, g: &Graph, pass: &ForwardPass) -> Result<(f64, Matrix)> {
        let (nll, grad) = masked_nll(pass.logits(), &g.labels, &g.train_mask)?;
        Ok((nll + self.penalty(), grad))
    }

    pub fn penalty(&self) -> f64 {
        let wd = self.config.weight_decay;
        if wd == 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .layers
            .iter()
            .map(|l| l.theta.as_slice().iter().map(|x| x * x).sum::<f64>())
            .sum();
        0.5 * wd * sq
    }

    /// Fills `grad_theta` and `grad_omega` from the gradient of the loss with
    /// respect to the final logits. Negative selections are constants.
    pub fn backward(&mut self, g: &Graph, pass: &ForwardPass, dlogits: &Matrix) -> Result<()> {
        if pass.layers.len() != self.layers.len() {
            return Err(Error::InvalidArgument(
                "forward cache does not match the model depth".into(),
            ));
        }
        let coef = inv_sqrt_deg_hat(g);
        let omega = self.rate();
        let wd = self.config.weight_decay;
        let mut dz = dlogits.clone();
        let mut d_omega = 0.0;
        for l in (0..self.layers.len()).rev() {
            let state = &pass.layers[l];
            let (dp, dw) =
                aggregate_backward(g, &coef, &state.transformed, &dz, &state.negatives, omega);
            d_omega += dw;
            let mut grad = state.input.t_matmul(&dp);
            if wd > 0.0 {
                for (gv, &t) in grad
                    .as_mut_slice()
                    .iter_mut()
                    .zip(self.layers[l].theta.as_slice())
                {
                    *gv += wd * t;
                }
            }
            if l > 0 {
                let mut dx = dp.matmul_t(&self.layers[l].theta);
                if let Some(scale) = &state.dropout_scale {
                    for (x, s) in dx.as_mut_slice().iter_mut().zip(scale) {
                        *x *= s;
                    }
                }
                let prev = &pass.layers[l - 1].output;
                for (x, &z) in dx.as_mut_slice().iter_mut().zip(prev.as_slice()) {
                    if z <= 0.0 {
                        *x = 0.0;
                    }
                }
                dz = dx;
            }
            self.layers[l].grad_theta = grad;
        }
        self.omega.grad_omega = if self.omega.trainable { d_omega } else { 0.0 };
        Ok(())
    }

    pub fn predict(&self, pass: &ForwardPass) -> Vec<usize> {
        crate::metrics::argmax_rows(pass.logits())
    }
}

/// Versioned JSON dump of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub seed: u64,
    pub thetas: Vec<Matrix>,
    pub omega: f64,
    pub omega_trainable: bool,
}

pub const CHECKPOINT_FORMAT: &str = "negsamp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn from_model(model: &Model) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            config: model.config.clone(),
            seed: model.config.seed,
            thetas: model.layers.iter().map(|l| l.theta.clone()).collect(),
            omega: model.omega.omega,
            omega_trainable: model.omega.trainable,
        }
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        self.config.validate()?;
        if self.thetas.len() != self.config.num_layers
            || self.thetas.windows(2).any(|w| w[0].cols() != w[1].rows())
        {
            return Err(Error::Shape(
                "checkpoint layer shapes are inconsistent".into(),
            ));
        }
        let layers = self
            .thetas
            .into_iter()
            .map(|theta| LayerParams {
                grad_theta: Matrix::zeros(theta.rows(), theta.cols()),
                theta,
            })
            .collect();
        Ok(Model {
            config: self.config,
            layers,
            omega: NegativeRate {
                omega: self.omega,
                trainable: self.omega_trainable,
                grad_omega: 0.0,
            },
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
