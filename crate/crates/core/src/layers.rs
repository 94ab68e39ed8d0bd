//! Forward and backward passes of the network building blocks.
//!
//! * graph convolution `ReLU(Â Z Θ)`
//! * Chebyshev convolution `ReLU(Σ_k T_k(L̂) X Θ_k)`
//! * NMF pooling: factorize `A ≈ W H`, take `S = Hᵀ`, coarsen to
//!   `Z' = Sᵀ Z` and `A' = Sᵀ A S`
//! * mean readout and a linear classifier head
//!
//! Backward functions accumulate parameter gradients into the parameter
//! records and return the gradient with respect to the layer input. The
//! pooling operator `S` is treated as a constant: no gradient reaches the
//! factorization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::nmf::{effective_rank, factorize, NmfConfig, NmfFactors};

fn expect_shape(op: &'static str, m: &DenseMatrix, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::ShapeMismatch {
            op,
            left: m.shape(),
            right: (rows, cols),
        });
    }
    Ok(())
}

/// Glorot-uniform initialization on `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-limit..limit))
}

/// Weights of one graph convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct GcParams {
    pub theta: DenseMatrix,
    pub grad_theta: DenseMatrix,
}

impl GcParams {
    pub fn new(theta: DenseMatrix) -> Self {
        let grad_theta = DenseMatrix::zeros(theta.rows(), theta.cols());
        Self { theta, grad_theta }
    }

    pub fn glorot(d_in: usize, d_out: usize, rng: &mut impl Rng) -> Self {
        Self::new(glorot_uniform(d_in, d_out, rng))
    }
}

pub struct GcCache<'a> {
    a_norm: &'a DenseMatrix,
    /// `Â Z`
    az: DenseMatrix,
    pre: DenseMatrix,
}

/// `ReLU(a_norm · z · θ)`.
pub fn gc_forward<'a>(
    a_norm: &'a DenseMatrix,
    z: &DenseMatrix,
    p: &GcParams,
) -> Result<(DenseMatrix, GcCache<'a>)> {
    let n = a_norm.rows();
    expect_shape("gc_forward adjacency", a_norm, n, n)?;
    let az = a_norm.matmul(z)?;
    let pre = az.matmul(&p.theta)?;
    Ok((pre.relu(), GcCache { a_norm, az, pre }))
}

/// Accumulates `(Â Z)ᵀ G` into `p.grad_theta` and returns `Âᵀ G θᵀ`,
/// where `G = d_out ⊙ 1[pre > 0]`.
pub fn gc_backward(cache: &GcCache<'_>, d_out: &DenseMatrix, p: &mut GcParams) -> Result<DenseMatrix> {
    expect_shape("gc_backward", d_out, cache.pre.rows(), cache.pre.cols())?;
    let g = masked(d_out, &cache.pre);
    p.grad_theta.add_scaled(&cache.az.t_matmul(&g)?, 1.0)?;
    cache.a_norm.t_matmul(&g.matmul_t(&p.theta)?)
}

fn masked(d_out: &DenseMatrix, pre: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(pre.rows(), pre.cols(), |i, j| {
        if pre.get(i, j) > 0.0 {
            d_out.get(i, j)
        } else {
            0.0
        }
    })
}

/// Rescaled Laplacian `2L/λ_max − I` of an adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLaplacian {
    pub l_hat: DenseMatrix,
    pub lambda_max: f64,
    /// Set when the Laplacian vanishes; `l_hat` is then `−I`.
    pub degenerate: bool,
}

const POWER_ITERS: usize = 100;
const POWER_TOL: f64 = 1e-7;
const POWER_SEED: u64 = 0x5eed_1a9c;

/// Dominant eigenvalue of a symmetric positive semi-definite matrix by
/// power iteration with Rayleigh quotients.
pub fn power_iteration(m: &DenseMatrix, max_iters: usize, tol: f64, seed: u64) -> f64 {
    let n = m.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DenseMatrix::from_fn(n, 1, |_, _| 0.5 + rng.gen::<f64>());
    let norm = v.frobenius_norm();
    v = v.scale(1.0 / norm);
    let mut lambda = 0.0;
    for _ in 0..max_iters {
        let w = m.matmul(&v).expect("square matrix");
        let next: f64 = v.data().iter().zip(w.data()).map(|(a, b)| a * b).sum();
        let w_norm = w.frobenius_norm();
        if w_norm == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / w_norm);
        let done = (next - lambda).abs() <= tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

/// Combinatorial Laplacian `D − A` of a symmetric non-negative matrix.
pub fn laplacian(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { deg[i] } else { 0.0 } - a.get(i, j))
}

pub fn scaled_laplacian(a: &DenseMatrix) -> ScaledLaplacian {
    let n = a.rows();
    let l = laplacian(a);
    let lambda_max = power_iteration(&l, POWER_ITERS, POWER_TOL, POWER_SEED);
    if lambda_max <= 0.0 {
        log::warn!("scaled_laplacian: Laplacian vanishes, returning -I");
        return ScaledLaplacian {
            l_hat: DenseMatrix::identity(n).scale(-1.0),
            lambda_max: 0.0,
            degenerate: true,
        };
    }
    let l_hat = DenseMatrix::from_fn(n, n, |i, j| {
        2.0 * l.get(i, j) / lambda_max - if i == j { 1.0 } else { 0.0 }
    });
    ScaledLaplacian {
        l_hat,
        lambda_max,
        degenerate: false,
    }
}

/// `[T_0(L̂)X, …, T_{K−1}(L̂)X]` by the three-term recurrence.
pub fn chebyshev_terms(l_hat: &DenseMatrix, x: &DenseMatrix, order: usize) -> Result<Vec<DenseMatrix>> {
    let mut terms: Vec<DenseMatrix> = Vec::with_capacity(order);
    for k in 0..order {
        let next = match k {
            0 => x.clone(),
            1 => l_hat.matmul(x)?,
            _ => {
                let mut t = l_hat.matmul(&terms[k - 1])?.scale(2.0);
                t.add_scaled(&terms[k - 2], -1.0)?;
                t
            }
        };
        terms.push(next);
    }
    Ok(terms)
}

/// Coefficient matrices `Θ_0 … Θ_{K−1}` of a Chebyshev convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebParams {
    pub thetas: Vec<DenseMatrix>,
    pub grads: Vec<DenseMatrix>,
}

impl ChebParams {
    pub fn new(thetas: Vec<DenseMatrix>) -> Self {
        assert!(!thetas.is_empty(), "Chebyshev order must be at least 1");
        let grads = thetas
            .iter()
            .map(|t| DenseMatrix::zeros(t.rows(), t.cols()))
            .collect();
        Self { thetas, grads }
    }

    pub fn glorot(order: usize, d_in: usize, d_out: usize, rng: &mut impl Rng) -> Self {
        Self::new((0..order).map(|_| glorot_uniform(d_in, d_out, rng)).collect())
    }

    pub fn order(&self) -> usize {
        self.thetas.len()
    }
}

pub struct ChebCache<'a> {
    l_hat: &'a DenseMatrix,
    terms: Vec<DenseMatrix>,
    pre: DenseMatrix,
}

pub fn cheb_forward<'a>(
    l_hat: &'a DenseMatrix,
    x: &DenseMatrix,
    p: &ChebParams,
) -> Result<(DenseMatrix, ChebCache<'a>)> {
    let n = l_hat.rows();
    expect_shape("cheb_forward operator", l_hat, n, n)?;
    let terms = chebyshev_terms(l_hat, x, p.order())?;
    let mut pre = terms[0].matmul(&p.thetas[0])?;
    for (t, theta) in terms.iter().zip(&p.thetas).skip(1) {
        pre.add_scaled(&t.matmul(theta)?, 1.0)?;
    }
    Ok((pre.relu(), ChebCache { l_hat, terms, pre }))
}

/// Gradients of [`cheb_forward`], reversing the recurrence for `d_x`.
pub fn cheb_backward(cache: &ChebCache<'_>, d_out: &DenseMatrix, p: &mut ChebParams) -> Result<DenseMatrix> {
    if cache.terms.len() != p.order() {
        return Err(Error::ShapeMismatch {
            op: "cheb_backward order",
            left: (cache.terms.len(), 1),
            right: (p.order(), 1),
        });
    }
    expect_shape("cheb_backward", d_out, cache.pre.rows(), cache.pre.cols())?;
    let g = masked(d_out, &cache.pre);
    let mut term_grads = Vec::with_capacity(p.order());
    for ((t, theta), grad) in cache.terms.iter().zip(&p.thetas).zip(p.grads.iter_mut()) {
        grad.add_scaled(&t.t_matmul(&g)?, 1.0)?;
        term_grads.push(g.matmul_t(theta)?);
    }
    for k in (2..term_grads.len()).rev() {
        let back = cache.l_hat.t_matmul(&term_grads[k])?;
        let (head, tail) = term_grads.split_at_mut(k);
        head[k - 1].add_scaled(&back, 2.0)?;
        head[k - 2].add_scaled(&tail[0], -1.0)?;
    }
    if term_grads.len() > 1 {
        let back = cache.l_hat.t_matmul(&term_grads[1])?;
        term_grads[0].add_scaled(&back, 1.0)?;
    }
    Ok(term_grads.swap_remove(0))
}

/// Everything one NMF pooling step produced for a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolTrace {
    /// Assignment operator `S = Hᵀ`, `n × k'`.
    pub s: DenseMatrix,
    pub a_in: DenseMatrix,
    pub a_out: DenseMatrix,
    pub nmf: NmfFactors,
    pub k_requested: usize,
    pub k_effective: usize,
}

const NEGATIVE_CLAMP_TOL: f64 = 1e-12;

fn clamp_round_off(a: &DenseMatrix) -> Result<DenseMatrix> {
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if v < -NEGATIVE_CLAMP_TOL {
                return Err(Error::NegativeEntry {
                    what: "pooled adjacency",
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(a.map(|v| v.max(0.0)))
}

/// Factorizes `a` and builds the coarsened adjacency. This part depends on
/// the graph structure only, so it can be computed once per graph.
pub fn coarsen(a: &DenseMatrix, k: usize, cfg: &NmfConfig) -> Result<PoolTrace> {
    if k == 0 {
        return Err(Error::Config(vec!["pool size must be at least 1".into()]));
    }
    let n = a.rows();
    expect_shape("coarsen", a, n, n)?;
    let a_in = clamp_round_off(a)?;
    let k_effective = effective_rank(k, n, n);
    if k_effective < k {
        log::debug!("pool size {k} clamped to {k_effective} for a {n}-node graph");
    }
    let nmf = factorize(&a_in, &NmfConfig { k: k_effective, ..cfg.clone() })?;
    let s = nmf.h.transpose();
    let a_out = s.t_matmul(&a_in.matmul(&s)?)?.symmetrized();
    Ok(PoolTrace {
        s,
        a_in,
        a_out,
        nmf,
        k_requested: k,
        k_effective,
    })
}

/// `Sᵀ Z`.
pub fn pool_features(trace: &PoolTrace, z: &DenseMatrix) -> Result<DenseMatrix> {
    trace.s.t_matmul(z)
}

pub fn nmfpool_forward(
    a: &DenseMatrix,
    z: &DenseMatrix,
    k: usize,
    cfg: &NmfConfig,
) -> Result<(DenseMatrix, DenseMatrix, PoolTrace)> {
    let trace = coarsen(a, k, cfg)?;
    let z_next = pool_features(&trace, z)?;
    Ok((trace.a_out.clone(), z_next, trace))
}

/// `S · d_z_next`.
pub fn nmfpool_backward(trace: &PoolTrace, d_z_next: &DenseMatrix) -> Result<DenseMatrix> {
    trace.s.matmul(d_z_next)
}

pub fn readout_mean(z: &DenseMatrix) -> DenseMatrix {
    z.column_means()
}

pub fn readout_backward(n: usize, d_out: &DenseMatrix) -> DenseMatrix {
    let inv = 1.0 / n as f64;
    DenseMatrix::from_fn(n, d_out.cols(), |_, j| d_out.get(0, j) * inv)
}

/// Dense layer `x W + b` used as the classifier head.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    pub w: DenseMatrix,
    pub b: DenseMatrix,
    pub grad_w: DenseMatrix,
    pub grad_b: DenseMatrix,
}

impl LinearParams {
    pub fn new(w: DenseMatrix, b: DenseMatrix) -> Self {
        let grad_w = DenseMatrix::zeros(w.rows(), w.cols());
        let grad_b = DenseMatrix::zeros(b.rows(), b.cols());
        Self { w, b, grad_w, grad_b }
    }

    pub fn glorot(d_in: usize, d_out: usize, rng: &mut impl Rng) -> Self {
        Self::new(glorot_uniform(d_in, d_out, rng), DenseMatrix::zeros(1, d_out))
    }
}

pub fn linear_forward(x: &DenseMatrix, p: &LinearParams) -> Result<DenseMatrix> {
    x.matmul(&p.w)?.add(&p.b)
}

pub fn linear_backward(x: &DenseMatrix, d_out: &DenseMatrix, p: &mut LinearParams) -> Result<DenseMatrix> {
    p.grad_w.add_scaled(&x.t_matmul(d_out)?, 1.0)?;
    p.grad_b.add_scaled(d_out, 1.0)?;
    d_out.matmul_t(&p.w)
}
