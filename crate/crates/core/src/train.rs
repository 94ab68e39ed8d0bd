//! Mini-batch SGD with a plateau learning-rate schedule, model selection on
//! validation loss, and stratified cross-validation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_folds, DatasetBundle, FoldPlan};
use crate::error::{Error, Result};
use crate::model::{build_model, mix_seed, prepare_graph, LayerStack, ModelConfig, PreparedGraph};
use crate::report::{fixed6, ARTIFACT_VERSION};

/// Multiplies the learning rate by `decay` after `patience` epochs without
/// an absolute validation-loss improvement of at least `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    lr: f64,
    decay: f64,
    patience: usize,
    tol: f64,
    min_lr: f64,
    best: f64,
    wait: usize,
}

impl PlateauScheduler {
    pub fn new(lr0: f64, decay: f64, patience: usize, tol: f64, min_lr: f64) -> Self {
        Self {
            lr: lr0,
            decay,
            patience,
            tol,
            min_lr,
            best: f64::INFINITY,
            wait: 0,
        }
    }

    pub fn from_config(cfg: &ModelConfig) -> Self {
        Self::new(cfg.lr0, cfg.lr_decay, cfg.patience, cfg.improvement_tol, cfg.min_lr)
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    /// Records one epoch's validation loss; returns whether the rate decayed.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best - self.tol {
            self.best = loss;
            self.wait = 0;
            return false;
        }
        self.wait += 1;
        if self.wait >= self.patience {
            self.lr *= self.decay;
            self.wait = 0;
            true
        } else {
            false
        }
    }

    pub fn finished(&self) -> bool {
        self.lr < self.min_lr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    #[serde(with = "fixed6")]
    pub test_accuracy: f64,
    #[serde(with = "fixed6")]
    pub test_loss: f64,
    #[serde(with = "fixed6")]
    pub best_val_loss: f64,
    /// 1-based epoch of the selected snapshot.
    pub best_epoch: usize,
    pub epochs: usize,
    #[serde(with = "fixed6")]
    pub seconds: f64,
    #[serde(with = "fixed6")]
    pub initial_train_loss: f64,
    #[serde(with = "fixed6::vec")]
    pub train_loss: Vec<f64>,
    #[serde(with = "fixed6::vec")]
    pub train_accuracy: Vec<f64>,
    #[serde(with = "fixed6::vec")]
    pub val_loss: Vec<f64>,
    #[serde(with = "fixed6::vec")]
    pub learning_rate: Vec<f64>,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub dataset: String,
    pub model: String,
    pub config: ModelConfig,
    pub folds: Vec<FoldReport>,
    #[serde(with = "fixed6")]
    pub mean_accuracy: f64,
    /// Population standard deviation of the per-fold test accuracies.
    #[serde(with = "fixed6")]
    pub std_over_folds: f64,
    pub selection: String,
    pub artifact_version: u32,
}

pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Precomputes the pooling hierarchy of every graph in the bundle.
pub fn prepare_dataset(bundle: &DatasetBundle, cfg: &ModelConfig) -> Result<Vec<PreparedGraph>> {
    bundle
        .graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| prepare_graph(g, cfg, i))
        .collect()
}

/// Mean loss and accuracy of `stack` over `indices`.
pub fn evaluate_set(
    stack: &LayerStack,
    bundle: &DatasetBundle,
    prepared: &[PreparedGraph],
    cfg: &ModelConfig,
    indices: &[usize],
) -> Result<(f64, f64)> {
    if indices.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for &i in indices {
        let g = &bundle.graphs[i];
        let (l, pred) = stack.evaluate(g, &cfg.feature_spec, &prepared[i])?;
        loss += l;
        correct += usize::from(pred == g.graph_label());
    }
    let n = indices.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Index sets of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn from_plan(plan: &FoldPlan, fold: usize) -> Self {
        Self {
            train: plan.train_indices(fold),
            validation: plan.validation_indices(fold).to_vec(),
            test: plan.test_indices(fold).to_vec(),
        }
    }
}

/// Trains one model on `split.train`, keeps the snapshot with the lowest
/// validation loss and reports its test accuracy.
pub fn train_split(
    bundle: &DatasetBundle,
    prepared: &[PreparedGraph],
    split: &Split,
    cfg: &ModelConfig,
    fold: usize,
) -> Result<FoldReport> {
    let start = Instant::now();
    if split.train.is_empty() {
        return Err(Error::Folds(format!("fold {fold} has no training graphs")));
    }
    let model_cfg = ModelConfig {
        seed: mix_seed(&[cfg.seed, fold as u64]),
        ..cfg.clone()
    };
    let mut stack = build_model(&model_cfg, bundle.num_classes, cfg.feature_spec.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, fold as u64, 0x5eed]));
    let mut schedule = PlateauScheduler::from_config(cfg);

    // Without a validation holdout the training loss drives selection.
    let selection_set = if split.validation.is_empty() {
        &split.train
    } else {
        &split.validation
    };

    let (initial_train_loss, _) = evaluate_set(&stack, bundle, prepared, cfg, &split.train)?;
    let mut best = (f64::INFINITY, 0usize, stack.clone());
    let mut train_loss = Vec::new();
    let mut train_accuracy = Vec::new();
    let mut val_loss = Vec::new();
    let mut learning_rate = Vec::new();
    let mut order = split.train.clone();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let lr = schedule.lr();
        for batch in order.chunks(cfg.batch_size) {
            stack.zero_grad();
            for &i in batch {
                let (loss, _) = stack.accumulate_gradient(&bundle.graphs[i], &cfg.feature_spec, &prepared[i])?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch, loss });
                }
            }
            stack.sgd_step(lr, 1.0 / batch.len() as f64);
        }
        let (tl, ta) = evaluate_set(&stack, bundle, prepared, cfg, &split.train)?;
        let (vl, _) = evaluate_set(&stack, bundle, prepared, cfg, selection_set)?;
        if !tl.is_finite() || !vl.is_finite() {
            return Err(Error::Diverged { epoch, loss: if tl.is_finite() { vl } else { tl } });
        }
        train_loss.push(tl);
        train_accuracy.push(ta);
        val_loss.push(vl);
        learning_rate.push(lr);
        if vl < best.0 {
            best = (vl, epoch, stack.clone());
        }
        if schedule.observe(vl) {
            log::debug!("fold {fold}: learning rate decayed to {} after epoch {epoch}", schedule.lr());
        }
        if schedule.finished() {
            break;
        }
    }

    let (best_val_loss, best_epoch, snapshot) = best;
    let (test_loss, test_accuracy) = evaluate_set(&snapshot, bundle, prepared, cfg, &split.test)?;
    Ok(FoldReport {
        fold,
        test_accuracy,
        test_loss,
        best_val_loss,
        best_epoch,
        epochs: train_loss.len(),
        seconds: start.elapsed().as_secs_f64(),
        initial_train_loss,
        train_loss,
        train_accuracy,
        val_loss,
        learning_rate,
        train_size: split.train.len(),
        val_size: split.validation.len(),
        test_size: split.test.len(),
    })
}

pub fn train_fold(
    bundle: &DatasetBundle,
    prepared: &[PreparedGraph],
    plan: &FoldPlan,
    fold: usize,
    cfg: &ModelConfig,
) -> Result<FoldReport> {
    if fold >= plan.k {
        return Err(Error::Folds(format!("fold {fold} out of range for {} folds", plan.k)));
    }
    train_split(bundle, prepared, &Split::from_plan(plan, fold), cfg, fold)
}

/// Stratified `folds`-fold cross-validation. Folds run on up to `jobs`
/// threads; the result does not depend on `jobs`.
pub fn cross_validate(
    bundle: &DatasetBundle,
    cfg: &ModelConfig,
    folds: usize,
    jobs: usize,
) -> Result<TrainReport> {
    cfg.validate()?;
    let plan = stratified_folds(&bundle.labels(), folds, cfg.seed, cfg.val_fraction)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let reports = pool.install(|| -> Result<Vec<FoldReport>> {
        let prepared = prepare_dataset(bundle, cfg)?;
        (0..folds)
            .into_par_iter()
            .map(|f| {
                let report = train_fold(bundle, &prepared, &plan, f, cfg)?;
                log::info!(
                    "fold {f}: test accuracy {:.4} after {} epochs",
                    report.test_accuracy,
                    report.epochs
                );
                Ok(report)
            })
            .collect()
    })?;
    let accuracies: Vec<f64> = reports.iter().map(|r| r.test_accuracy).collect();
    let (mean_accuracy, std_over_folds) = mean_and_std(&accuracies);
    Ok(TrainReport {
        dataset: bundle.name.clone(),
        model: cfg.label(),
        config: cfg.clone(),
        folds: reports,
        mean_accuracy,
        std_over_folds,
        selection: "min_validation_loss".into(),
        artifact_version: ARTIFACT_VERSION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheduler_decays_on_plateau_then_stops() {
        let mut s = PlateauScheduler::new(0.1, 0.1, 10, 1e-4, 1e-4);
        let mut decays = Vec::new();
        let mut stopped = None;
        for epoch in 1..=100 {
            if s.observe(1.0) {
                decays.push(epoch);
            }
            if s.finished() {
                stopped = Some(epoch);
                break;
            }
        }
        assert_eq!(decays, [11, 21, 31, 41]);
        assert_eq!(stopped, Some(41));
    }

    #[test]
    fn improvements_below_tolerance_do_not_count() {
        let mut s = PlateauScheduler::new(0.1, 0.1, 3, 1e-4, 1e-4);
        s.observe(1.0);
        assert!(!s.observe(1.0 - 5e-5));
        assert!(!s.observe(1.0 - 9e-5));
        assert!(s.observe(1.0 - 9.9e-5));
        assert!((s.lr() - 0.01).abs() < 1e-15);
        // A real improvement resets the counter.
        assert!(!s.observe(0.5));
        assert!(!s.observe(0.5));
        assert!(!s.observe(0.5));
        assert!(s.observe(0.5));
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_and_std(&[0.2, 0.4, 0.6]);
        assert!((m - 0.4).abs() < 1e-12);
        assert!((s - (0.08f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_and_std(&[0.5]).1, 0.0);
    }
}
