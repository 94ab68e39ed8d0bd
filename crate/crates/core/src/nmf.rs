//! Non-negative matrix factorization `A ≈ W H` under the Frobenius loss,
//! solved with Lee–Seung multiplicative updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, ElementwiseOp, EPS_DIV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmfInit {
    /// Entries drawn uniformly from `(0, s]`, `s = sqrt(mean(A) / k)`.
    RandomUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub k: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    pub init: NmfInit,
}

impl NmfConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iters: 200,
            rel_tol: 1e-4,
            seed,
            init: NmfInit::RandomUniform,
        }
    }
}

/// Non-negative factors `W` (`n × k`) and `H` (`k × m`) with solver status.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
    pub final_objective: f64,
    pub iterations_run: usize,
    pub converged: bool,
    /// Objective before the first update followed by one entry per update.
    pub objective_trace: Vec<f64>,
}

impl NmfFactors {
    /// Wraps given factors, computing their objective against `a`.
    pub fn from_factors(a: &DenseMatrix, w: DenseMatrix, h: DenseMatrix) -> Result<Self> {
        let objective = residual_norm(a, &w, &h)?;
        Ok(Self {
            w,
            h,
            final_objective: objective,
            iterations_run: 0,
            converged: false,
            objective_trace: vec![objective],
        })
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }
}

fn residual_norm(a: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    let wh = w.matmul(h)?;
    Ok(a.sub(&wh)?.frobenius_norm())
}

fn check_non_negative(m: &DenseMatrix, what: &'static str) -> Result<()> {
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    what,
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    m.check_finite()
}

/// `‖A − W H‖_F`.
pub fn nmf_objective(a: &DenseMatrix, f: &NmfFactors) -> Result<f64> {
    residual_norm(a, &f.w, &f.h)
}

fn update_pair(a: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    // H ← H ⊙ (WᵀA) ⊘ (WᵀW H)
    let wt_a = w.t_matmul(a)?;
    let wt_w_h = w.t_matmul(w)?.matmul(h)?;
    let h_next = h.elementwise(&wt_a.elementwise(&wt_w_h, ElementwiseOp::DivGuarded)?, ElementwiseOp::Mul)?;
    // W ← W ⊙ (A Hᵀ) ⊘ (W H Hᵀ)
    let a_ht = a.matmul_t(&h_next)?;
    let w_h_ht = w.matmul(&h_next.matmul_t(&h_next)?)?;
    let w_next = w.elementwise(&a_ht.elementwise(&w_h_ht, ElementwiseOp::DivGuarded)?, ElementwiseOp::Mul)?;
    Ok((w_next, h_next))
}

/// One multiplicative update of `H` followed by one of `W`.
pub fn multiplicative_step(a: &DenseMatrix, f: &NmfFactors) -> Result<NmfFactors> {
    check_non_negative(a, "input matrix")?;
    check_non_negative(&f.w, "W")?;
    check_non_negative(&f.h, "H")?;
    let (w, h) = update_pair(a, &f.w, &f.h)?;
    let objective = residual_norm(a, &w, &h)?;
    let mut trace = f.objective_trace.clone();
    trace.push(objective);
    Ok(NmfFactors {
        w,
        h,
        final_objective: objective,
        iterations_run: f.iterations_run + 1,
        converged: false,
        objective_trace: trace,
    })
}

/// Inner dimension actually used for an `n × m` input: `k` clamped to
/// `max(1, min(n, m) − 1)`.
pub fn effective_rank(k: usize, rows: usize, cols: usize) -> usize {
    k.min(rows.min(cols).saturating_sub(1).max(1)).max(1)
}

/// Seeded uniform initial factors for `a` with inner dimension `k`.
pub fn initial_factors(a: &DenseMatrix, k: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
    let mut scale = (a.mean().max(0.0) / k as f64).sqrt();
    if scale == 0.0 {
        scale = EPS_DIV.sqrt();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 1 - u maps [0, 1) onto (0, 1]
    let w = DenseMatrix::from_fn(a.rows(), k, |_, _| scale * (1.0 - rng.gen::<f64>()));
    let h = DenseMatrix::from_fn(k, a.cols(), |_, _| scale * (1.0 - rng.gen::<f64>()));
    (w, h)
}

/// Factorizes a non-negative `a`. A `k` that does not satisfy
/// `k < min(n, m)` is clamped (see [`effective_rank`]).
pub fn factorize(a: &DenseMatrix, cfg: &NmfConfig) -> Result<NmfFactors> {
    if cfg.k == 0 {
        return Err(Error::Config(vec!["nmf rank k must be at least 1".into()]));
    }
    check_non_negative(a, "input matrix")?;
    let k = effective_rank(cfg.k, a.rows(), a.cols());
    let (w, h) = match cfg.init {
        NmfInit::RandomUniform => initial_factors(a, k, cfg.seed),
    };
    factorize_from(a, w, h, cfg)
}

/// Runs the update loop from the given initial factors.
pub fn factorize_from(
    a: &DenseMatrix,
    w: DenseMatrix,
    h: DenseMatrix,
    cfg: &NmfConfig,
) -> Result<NmfFactors> {
    check_non_negative(a, "input matrix")?;
    check_non_negative(&w, "W")?;
    check_non_negative(&h, "H")?;
    let mut objective = residual_norm(a, &w, &h)?;
    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    trace.push(objective);
    let (mut w, mut h) = (w, h);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let (w_next, h_next) = update_pair(a, &w, &h)?;
        w = w_next;
        h = h_next;
        iterations += 1;
        let next = residual_norm(a, &w, &h)?;
        trace.push(next);
        let change = (objective - next).abs() / objective.max(EPS_DIV);
        objective = next;
        if change < cfg.rel_tol {
            converged = true;
            break;
        }
    }
    Ok(NmfFactors {
        w,
        h,
        final_objective: objective,
        iterations_run: iterations,
        converged,
        objective_trace: trace,
    })
}
