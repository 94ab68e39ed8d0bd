//! Model configuration and the layer stack: a graph convolution, then
//! alternating NMF pooling and convolution, then mean readout and a linear
//! classifier.
//!
//! The pooling operators depend on graph structure only, so they are
//! computed once per graph ([`PreparedGraph`]) and reused by every forward
//! pass. Node features and the level-0 operator are rebuilt on demand to
//! keep memory flat on large datasets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{adjacency, node_features, normalize_adjacency, FeatureSpec, Graph};
use crate::layers::{
    cheb_backward, cheb_forward, coarsen, gc_backward, gc_forward, laplacian, linear_backward,
    linear_forward, readout_backward, readout_mean,
    scaled_laplacian, ChebCache, ChebParams, GcCache, GcParams, LinearParams,
};
use crate::linalg::DenseMatrix;
use crate::nmf::NmfConfig;
use crate::report::fixed6;

pub const HIDDEN_CHOICES: [usize; 4] = [16, 32, 64, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvKind {
    Gcn,
    /// Chebyshev filter with `order` polynomial terms.
    Cheb { order: usize },
}

impl fmt::Display for ConvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvKind::Gcn => write!(f, "gcn"),
            ConvKind::Cheb { order } => write!(f, "cheb:{order}"),
        }
    }
}

impl FromStr for ConvKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gcn" => Ok(ConvKind::Gcn),
            _ => s
                .strip_prefix("cheb:")
                .and_then(|k| k.parse().ok())
                .filter(|&order| order >= 1)
                .map(|order| ConvKind::Cheb { order })
                .ok_or_else(|| format!("unknown convolution {s:?}, expected gcn or cheb:K")),
        }
    }
}

impl Serialize for ConvKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConvKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub conv_layers: usize,
    pub pool_layers: usize,
    pub hidden_dim: usize,
    pub pool_ks: Vec<usize>,
    pub conv_kind: ConvKind,
    pub feature_spec: FeatureSpec,
    #[serde(with = "fixed6")]
    pub lr0: f64,
    #[serde(with = "fixed6")]
    pub lr_decay: f64,
    pub patience: usize,
    #[serde(with = "fixed6")]
    pub min_lr: f64,
    /// Smallest validation-loss drop that resets the patience counter.
    #[serde(with = "fixed6")]
    pub improvement_tol: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    #[serde(with = "fixed6")]
    pub val_fraction: f64,
    pub seed: u64,
    pub renormalize_pooled: bool,
    pub nmf_max_iters: usize,
    #[serde(with = "fixed6")]
    pub nmf_rel_tol: f64,
}

impl ModelConfig {
    /// Plain GCN with `conv_layers` layers and no pooling.
    pub fn plain(conv_layers: usize, hidden_dim: usize, feature_spec: FeatureSpec) -> Self {
        Self {
            conv_layers,
            pool_layers: 0,
            hidden_dim,
            pool_ks: Vec::new(),
            conv_kind: ConvKind::Gcn,
            feature_spec,
            lr0: 0.1,
            lr_decay: 0.1,
            patience: 10,
            min_lr: 1e-4,
            improvement_tol: 1e-4,
            max_epochs: 200,
            batch_size: 32,
            val_fraction: crate::dataset::DEFAULT_VAL_FRACTION,
            seed: 0,
            renormalize_pooled: false,
            nmf_max_iters: 200,
            nmf_rel_tol: 1e-4,
        }
    }

    /// `pool_ks.len()` pooling layers interleaved with one more convolution.
    pub fn pooled(pool_ks: Vec<usize>, hidden_dim: usize, feature_spec: FeatureSpec) -> Self {
        Self {
            conv_layers: pool_ks.len() + 1,
            pool_layers: pool_ks.len(),
            pool_ks,
            ..Self::plain(1, hidden_dim, feature_spec)
        }
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(1..=3).contains(&self.conv_layers) {
            problems.push(format!("conv_layers must be 1, 2 or 3 (got {})", self.conv_layers));
        }
        if self.pool_layers > 2 {
            problems.push(format!("pool_layers must be 0, 1 or 2 (got {})", self.pool_layers));
        }
        if self.pool_layers > 0 && self.conv_layers != self.pool_layers + 1 {
            problems.push(format!(
                "{} pooling layers need exactly {} convolutions (got {})",
                self.pool_layers,
                self.pool_layers + 1,
                self.conv_layers
            ));
        }
        if self.pool_ks.len() != self.pool_layers {
            problems.push(format!(
                "{} pool sizes given for {} pooling layers",
                self.pool_ks.len(),
                self.pool_layers
            ));
        }
        if self.pool_ks.contains(&0) {
            problems.push("pool sizes must be at least 1".into());
        }
        if self.pool_ks.windows(2).any(|w| w[1] >= w[0]) {
            problems.push(format!("pool sizes must be strictly decreasing (got {:?})", self.pool_ks));
        }
        if !HIDDEN_CHOICES.contains(&self.hidden_dim) {
            problems.push(format!(
                "hidden_dim must be one of {HIDDEN_CHOICES:?} (got {})",
                self.hidden_dim
            ));
        }
        if let ConvKind::Cheb { order: 0 } = self.conv_kind {
            problems.push("Chebyshev order must be at least 1".into());
        }
        if self.lr0.is_nan() || self.lr0 <= 0.0 {
            problems.push(format!("lr0 must be positive (got {})", self.lr0));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay < 1.0) {
            problems.push(format!("lr_decay must lie in (0, 1) (got {})", self.lr_decay));
        }
        if self.patience == 0 {
            problems.push("patience must be at least 1".into());
        }
        if self.max_epochs == 0 {
            problems.push("max_epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            problems.push(format!("val_fraction must lie in [0, 1) (got {})", self.val_fraction));
        }
        if let Err(Error::Config(mut p)) = self.feature_spec.validate() {
            problems.append(&mut p);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub(crate) fn nmf_config(&self, k: usize, seed: u64) -> NmfConfig {
        NmfConfig {
            max_iters: self.nmf_max_iters,
            rel_tol: self.nmf_rel_tol,
            ..NmfConfig::new(k, seed)
        }
    }

    /// Short human-readable label such as `1-NMFPool` or `2-GC`.
    pub fn label(&self) -> String {
        if self.pool_layers > 0 {
            format!("{}-NMFPool", self.pool_layers)
        } else {
            format!("{}-GC", self.conv_layers)
        }
    }
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        let mut z = state ^ p.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvLayer {
    Gcn(GcParams),
    Cheb(ChebParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    Pool { k: usize },
    Readout,
    Classifier(LinearParams),
}

impl Layer {
    pub fn name(&self) -> String {
        match self {
            Layer::Conv(ConvLayer::Gcn(_)) => "GC".into(),
            Layer::Conv(ConvLayer::Cheb(p)) => format!("Cheb(K={})", p.order()),
            Layer::Pool { k } => format!("Pool({k})"),
            Layer::Readout => "Readout".into(),
            Layer::Classifier(_) => "Classifier".into(),
        }
    }
}

/// The ordered layers of one model together with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
    pub input_dim: usize,
    pub num_classes: usize,
    pub conv_kind: ConvKind,
}

/// Builds `GC, [Pool(k_i), GC]*, Readout, Classifier` with Glorot-uniform
/// weights drawn from `cfg.seed`.
pub fn build_model(cfg: &ModelConfig, num_classes: usize, input_dim: usize) -> Result<LayerStack> {
    cfg.validate()?;
    let mut problems = Vec::new();
    if num_classes < 2 {
        problems.push(format!("need at least 2 classes (got {num_classes})"));
    }
    if input_dim == 0 {
        problems.push("input dimension must be positive".into());
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, 0x1a7e]));
    let h = cfg.hidden_dim;
    let mut conv = |d_in: usize| match cfg.conv_kind {
        ConvKind::Gcn => Layer::Conv(ConvLayer::Gcn(GcParams::glorot(d_in, h, &mut rng))),
        ConvKind::Cheb { order } => {
            Layer::Conv(ConvLayer::Cheb(ChebParams::glorot(order, d_in, h, &mut rng)))
        }
    };
    let mut layers = vec![conv(input_dim)];
    if cfg.pool_layers == 0 {
        for _ in 1..cfg.conv_layers {
            layers.push(conv(h));
        }
    } else {
        for &k in &cfg.pool_ks {
            layers.push(Layer::Pool { k });
            layers.push(conv(h));
        }
    }
    layers.push(Layer::Readout);
    layers.push(Layer::Classifier(LinearParams::glorot(h, num_classes, &mut rng)));
    Ok(LayerStack {
        layers,
        input_dim,
        num_classes,
        conv_kind: cfg.conv_kind,
    })
}

/// Structure-only precomputation for one graph: the assignment matrix and
/// coarsened propagation operator of every pooling level.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGraph {
    pub pools: Vec<PooledLevel>,
    /// λ_max of the level-0 Laplacian, for Chebyshev models.
    pub lambda_max0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledLevel {
    pub s: DenseMatrix,
    /// Operator the next convolution applies (adjacency or scaled Laplacian).
    pub operator: DenseMatrix,
    pub adjacency: DenseMatrix,
    pub k_requested: usize,
    pub k_effective: usize,
    pub nmf_objective: f64,
}

/// Seed of the factorization at `level` for the graph at `graph_index`.
pub fn nmf_seed(model_seed: u64, graph_index: usize, level: usize) -> u64 {
    mix_seed(&[model_seed, 0x11f, graph_index as u64, level as u64])
}

fn conv_operator(kind: ConvKind, adjacency: &DenseMatrix) -> DenseMatrix {
    match kind {
        ConvKind::Gcn => adjacency.clone(),
        ConvKind::Cheb { .. } => scaled_laplacian(adjacency).l_hat,
    }
}

pub fn prepare_graph(g: &Graph, cfg: &ModelConfig, graph_index: usize) -> Result<PreparedGraph> {
    let a0 = normalize_adjacency(&adjacency(g));
    let lambda_max0 = match cfg.conv_kind {
        ConvKind::Gcn => None,
        ConvKind::Cheb { .. } => Some(scaled_laplacian(&a0).lambda_max),
    };
    let mut pools = Vec::with_capacity(cfg.pool_layers);
    let mut current = a0;
    for (level, &k) in cfg.pool_ks.iter().enumerate() {
        let trace = coarsen(&current, k, &cfg.nmf_config(k, nmf_seed(cfg.seed, graph_index, level)))?;
        let next = if cfg.renormalize_pooled {
            normalize_adjacency(&trace.a_out)
        } else {
            trace.a_out
        };
        pools.push(PooledLevel {
            s: trace.s,
            operator: conv_operator(cfg.conv_kind, &next),
            adjacency: next.clone(),
            k_requested: trace.k_requested,
            k_effective: trace.k_effective,
            nmf_objective: trace.nmf.final_objective,
        });
        current = next;
    }
    Ok(PreparedGraph { pools, lambda_max0 })
}

/// Per-call inputs: node features and the level-0 operator.
pub struct GraphInputs {
    pub features: DenseMatrix,
    pub operator0: DenseMatrix,
}

impl GraphInputs {
    pub fn new(g: &Graph, spec: &FeatureSpec, kind: ConvKind, prepared: &PreparedGraph) -> Result<Self> {
        let features = node_features(g, spec)?;
        let a0 = normalize_adjacency(&adjacency(g));
        let operator0 = match (kind, prepared.lambda_max0) {
            (ConvKind::Gcn, _) => a0,
            (ConvKind::Cheb { .. }, Some(lambda)) if lambda > 0.0 => {
                let l = laplacian(&a0);
                let n = l.rows();
                DenseMatrix::from_fn(n, n, |i, j| {
                    2.0 * l.get(i, j) / lambda - if i == j { 1.0 } else { 0.0 }
                })
            }
            (ConvKind::Cheb { .. }, _) => scaled_laplacian(&a0).l_hat,
        };
        Ok(Self { features, operator0 })
    }
}

enum Tape<'a> {
    Gcn(GcCache<'a>),
    Cheb(ChebCache<'a>),
    Pool(usize),
    Readout(usize),
    Classifier(DenseMatrix),
}

pub struct ForwardPass<'a> {
    tapes: Vec<Tape<'a>>,
}

impl LayerStack {
    pub fn describe(&self) -> Vec<String> {
        self.layers.iter().map(Layer::name).collect()
    }

    /// `(parameter, gradient)` pairs in layer order.
    pub fn params_mut(&mut self) -> Vec<(&mut DenseMatrix, &mut DenseMatrix)> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(ConvLayer::Gcn(p)) => out.push((&mut p.theta, &mut p.grad_theta)),
                Layer::Conv(ConvLayer::Cheb(p)) => {
                    out.extend(p.thetas.iter_mut().zip(p.grads.iter_mut()))
                }
                Layer::Classifier(p) => {
                    out.push((&mut p.w, &mut p.grad_w));
                    out.push((&mut p.b, &mut p.grad_b));
                }
                Layer::Pool { .. } | Layer::Readout => {}
            }
        }
        out
    }

    pub fn num_parameters(&mut self) -> usize {
        self.params_mut().iter().map(|(p, _)| p.data().len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for (_, g) in self.params_mut() {
            g.fill(0.0);
        }
    }

    /// `θ ← θ − lr · grad_scale · ∇θ` for every parameter.
    pub fn sgd_step(&mut self, lr: f64, grad_scale: f64) {
        for (p, g) in self.params_mut() {
            p.add_scaled(g, -lr * grad_scale).expect("gradient shape");
        }
    }

    pub fn forward<'a>(
        &self,
        inputs: &'a GraphInputs,
        prepared: &'a PreparedGraph,
    ) -> Result<(DenseMatrix, ForwardPass<'a>)> {
        let mut tapes = Vec::with_capacity(self.layers.len());
        let mut z = inputs.features.clone();
        let mut operator = &inputs.operator0;
        let mut level = 0;
        for layer in &self.layers {
            z = match layer {
                Layer::Conv(ConvLayer::Gcn(p)) => {
                    let (out, cache) = gc_forward(operator, &z, p)?;
                    tapes.push(Tape::Gcn(cache));
                    out
                }
                Layer::Conv(ConvLayer::Cheb(p)) => {
                    let (out, cache) = cheb_forward(operator, &z, p)?;
                    tapes.push(Tape::Cheb(cache));
                    out
                }
                Layer::Pool { .. } => {
                    let pooled = prepared.pools.get(level).ok_or_else(|| {
                        Error::Config(vec![format!("graph was prepared without pooling level {level}")])
                    })?;
                    let out = pooled.s.t_matmul(&z)?;
                    operator = &pooled.operator;
                    tapes.push(Tape::Pool(level));
                    level += 1;
                    out
                }
                Layer::Readout => {
                    tapes.push(Tape::Readout(z.rows()));
                    readout_mean(&z)
                }
                Layer::Classifier(p) => {
                    let out = linear_forward(&z, p)?;
                    tapes.push(Tape::Classifier(z));
                    out
                }
            };
        }
        Ok((z, ForwardPass { tapes }))
    }

    /// Back-propagates `d_logits`, accumulating into the gradient buffers.
    pub fn backward(
        &mut self,
        pass: ForwardPass<'_>,
        prepared: &PreparedGraph,
        d_logits: &DenseMatrix,
    ) -> Result<()> {
        let mut grad = d_logits.clone();
        for (layer, tape) in self.layers.iter_mut().zip(pass.tapes).rev() {
            grad = match (layer, tape) {
                (Layer::Conv(ConvLayer::Gcn(p)), Tape::Gcn(cache)) => gc_backward(&cache, &grad, p)?,
                (Layer::Conv(ConvLayer::Cheb(p)), Tape::Cheb(cache)) => {
                    cheb_backward(&cache, &grad, p)?
                }
                (Layer::Pool { .. }, Tape::Pool(level)) => {
                    prepared.pools[level].s.matmul(&grad)?
                }
                (Layer::Readout, Tape::Readout(n)) => readout_backward(n, &grad),
                (Layer::Classifier(p), Tape::Classifier(x)) => linear_backward(&x, &grad, p)?,
                _ => unreachable!("tape recorded for a different layer"),
            };
        }
        Ok(())
    }

    pub fn inputs(&self, g: &Graph, spec: &FeatureSpec, prepared: &PreparedGraph) -> Result<GraphInputs> {
        GraphInputs::new(g, spec, self.conv_kind, prepared)
    }

    /// Loss and predicted class for one graph, without touching gradients.
    pub fn evaluate(&self, g: &Graph, spec: &FeatureSpec, prepared: &PreparedGraph) -> Result<(f64, usize)> {
        let inputs = self.inputs(g, spec, prepared)?;
        let (logits, _) = self.forward(&inputs, prepared)?;
        let (loss, _) = logits.row_softmax_cross_entropy(g.graph_label())?;
        Ok((loss, argmax(logits.data())))
    }

    /// Forward and backward for one graph; returns loss and whether the
    /// prediction was correct.
    pub fn accumulate_gradient(
        &mut self,
        g: &Graph,
        spec: &FeatureSpec,
        prepared: &PreparedGraph,
    ) -> Result<(f64, bool)> {
        let inputs = self.inputs(g, spec, prepared)?;
        let (logits, pass) = self.forward(&inputs, prepared)?;
        let (loss, d_logits) = logits.row_softmax_cross_entropy(g.graph_label())?;
        let correct = argmax(logits.data()) == g.graph_label();
        // The pass borrows only `inputs` and `prepared`, never `self`.
        let stack: &mut LayerStack = self;
        stack.backward(pass, prepared, &d_logits)?;
        Ok((loss, correct))
    }
}

/// Logits for a single graph, preparing its pooling levels from scratch.
pub fn forward_graph(stack: &LayerStack, cfg: &ModelConfig, g: &Graph) -> Result<DenseMatrix> {
    let prepared = prepare_graph(g, cfg, 0)?;
    let inputs = stack.inputs(g, &cfg.feature_spec, &prepared)?;
    let (logits, _) = stack.forward(&inputs, &prepared)?;
    logits.check_finite()?;
    Ok(logits)
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Worst relative disagreement between analytic and central-difference
/// gradients over every learnable scalar.
#[derive(Debug, Clone, Serialize)]
pub struct GradcheckReport {
    #[serde(with = "fixed6::sci")]
    pub max_rel_error: f64,
    pub parameters_checked: usize,
    pub worst_parameter: usize,
}

/// Denominator floor of the relative error, so entries whose gradient is
/// at the level of the finite-difference noise do not dominate.
pub const GRADCHECK_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRADCHECK_FLOOR)
}

/// Central-difference check of the full model on one graph. With
/// `corrupt` set the analytic gradient is doubled, which the check must
/// detect.
pub fn gradcheck_model(cfg: &ModelConfig, num_classes: usize, g: &Graph, step: f64, corrupt: bool) -> Result<GradcheckReport> {
    let spec = &cfg.feature_spec;
    let mut stack = build_model(cfg, num_classes, spec.dim())?;
    let prepared = prepare_graph(g, cfg, 0)?;
    stack.zero_grad();
    stack.accumulate_gradient(g, spec, &prepared)?;
    let analytic: Vec<f64> = stack
        .params_mut()
        .iter()
        .flat_map(|(_, grad)| grad.data().to_vec())
        .map(|v| if corrupt { 2.0 * v } else { v })
        .collect();

    let loss_at = |stack: &LayerStack| -> Result<f64> { Ok(stack.evaluate(g, spec, &prepared)?.0) };
    let mut worst = (0.0f64, 0usize);
    let mut flat = 0usize;
    let num_matrices = stack.params_mut().len();
    for m in 0..num_matrices {
        let len = stack.params_mut()[m].0.data().len();
        for e in 0..len {
            let original = stack.params_mut()[m].0.data()[e];
            stack.params_mut()[m].0.data_mut()[e] = original + step;
            let plus = loss_at(&stack)?;
            stack.params_mut()[m].0.data_mut()[e] = original - step;
            let minus = loss_at(&stack)?;
            stack.params_mut()[m].0.data_mut()[e] = original;
            let numeric = (plus - minus) / (2.0 * step);
            let err = relative_error(analytic[flat], numeric);
            if err > worst.0 {
                worst = (err, flat);
            }
            flat += 1;
        }
    }
    Ok(GradcheckReport {
        max_rel_error: worst.0,
        parameters_checked: flat,
        worst_parameter: worst.1,
    })
}

/// Small labelled graph used by the built-in gradient checks: two
/// triangles joined by a bridge plus a pendant node.
pub fn toy_graph(label: usize) -> Graph {
    Graph::new(7, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5), (5, 6)], label)
        .expect("valid toy graph")
        .with_node_labels(vec![0, 1, 2, 0, 1, 2, 1])
        .expect("label count")
}

pub const TOY_CLASSES: usize = 3;

/// The configurations exercised by the built-in gradient check.
pub fn toy_suite(seed: u64) -> Vec<(String, ModelConfig)> {
    let spec = FeatureSpec::onehot([0, 1, 2]);
    let with_seed = |mut c: ModelConfig| {
        c.seed = seed;
        c
    };
    vec![
        ("1-GC".into(), with_seed(ModelConfig::plain(1, 16, spec.clone()))),
        ("2-GC".into(), with_seed(ModelConfig::plain(2, 16, spec.clone()))),
        ("2-GC+1-NMFPool".into(), with_seed(ModelConfig::pooled(vec![3], 16, spec.clone()))),
        // Unnormalized two-level pooling saturates the softmax on this toy
        // graph, which would zero every gradient and hide any error.
        (
            "3-GC+2-NMFPool".into(),
            with_seed(ModelConfig {
                renormalize_pooled: true,
                ..ModelConfig::pooled(vec![4, 2], 16, spec.clone())
            }),
        ),
        (
            "cheb:3".into(),
            with_seed(ModelConfig {
                conv_kind: ConvKind::Cheb { order: 3 },
                ..ModelConfig::pooled(vec![3], 16, spec)
            }),
        ),
    ]
}
