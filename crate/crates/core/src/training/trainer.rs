use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_update, AdamState};
use super::backward::{sample_gradient, SurrogateParams};
use crate::dataio::{batch_indices, split_indices, Dataset, DEFAULT_TEST_FRACTION};
use crate::error::{config, Result};
use crate::snn::{network_forward, NetworkSpec, WeightSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub lr: f64,
    /// Evaluate train/test accuracy every this many epochs (and always after the last).
    pub eval_every: usize,
    pub test_fraction: f64,
    pub surrogate: SurrogateParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 16,
            seed: 0,
            lr: 5e-3,
            eval_every: 1,
            test_fraction: DEFAULT_TEST_FRACTION,
            surrogate: SurrogateParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(config("batch size must be at least 1"));
        }
        if self.eval_every == 0 {
            return Err(config("eval_every must be at least 1"));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(config(format!("learning rate {} must be finite and >= 0", self.lr)));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return Err(config("test fraction must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch's training batches.
    pub train_loss: f64,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: WeightSet,
    pub history: Vec<EpochRecord>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Accuracy of inference-mode predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub n: usize,
    pub correct: usize,
}

fn check_dataset(spec: &NetworkSpec, dataset: &Dataset) -> Result<()> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(config("dataset is empty"));
    }
    if dataset.num_classes != spec.num_classes {
        return Err(config(format!(
            "dataset has {} classes but spec {} has {}",
            dataset.num_classes, spec.name, spec.num_classes
        )));
    }
    if let Some(s) = dataset.samples.iter().find(|s| s.image.shape() != spec.input_shape) {
        return Err(config(format!(
            "image shape {:?} does not match spec input {:?}",
            s.image.shape(),
            spec.input_shape
        )));
    }
    Ok(())
}

/// Accuracy over the given sample indices (all samples when `None`).
/// Predictions use argmax with ties to the lowest class.
pub fn evaluate(spec: &NetworkSpec, weights: &WeightSet, dataset: &Dataset, indices: Option<&[usize]>) -> Result<Evaluation> {
    check_dataset(spec, dataset)?;
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..dataset.len()).collect();
            &all
        }
    };
    if idx.is_empty() {
        return Err(config("nothing to evaluate"));
    }
    let hits = idx
        .par_iter()
        .map(|&i| {
            let s = &dataset.samples[i];
            network_forward(spec, weights, &s.image).map(|o| usize::from(o.prediction() == s.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let correct: usize = hits.iter().sum();
    Ok(Evaluation {
        accuracy: correct as f64 / idx.len() as f64,
        n: idx.len(),
        correct,
    })
}

/// Mean loss, mean gradient and hit count over one batch. Per-sample work
/// runs in parallel; reduction is in sample order.
pub fn batch_gradient(
    spec: &NetworkSpec,
    weights: &WeightSet,
    dataset: &Dataset,
    batch: &[usize],
    surrogate: &SurrogateParams,
) -> Result<(f64, WeightSet, usize)> {
    let per_sample = batch
        .par_iter()
        .map(|&i| {
            let s = &dataset.samples[i];
            sample_gradient(spec, weights, &s.image, s.label, surrogate)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = WeightSet::zeros(spec);
    let mut loss = 0.0;
    let mut hits = 0;
    for (g, &i) in per_sample.iter().zip(batch) {
        total.add_scaled(&g.grads, 1.0);
        loss += g.loss;
        hits += usize::from(g.logits.argmax() == dataset.samples[i].label);
    }
    let inv = 1.0 / batch.len() as f64;
    total.scale(inv);
    Ok((loss * inv, total, hits))
}

/// Trains from a seeded initialization. The dataset must already be
/// preprocessed to the spec's input shape; it is split into train/test
/// by `config.test_fraction`.
pub fn train(spec: &NetworkSpec, dataset: &Dataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    check_dataset(spec, dataset)?;
    let (train_idx, test_idx) = split_indices(dataset.len(), cfg.test_fraction, cfg.seed);
    if train_idx.is_empty() {
        return Err(config("training split is empty"));
    }
    let mut weights = WeightSet::init(spec, cfg.seed);
    let mut adam = AdamState::new(&weights, cfg.lr);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut loss_sum = 0.0;
        for batch in batch_indices(train_idx.len(), cfg.batch_size, cfg.seed, epoch, true)? {
            let members: Vec<usize> = batch.iter().map(|&k| train_idx[k]).collect();
            let (loss, grads, _) = batch_gradient(spec, &weights, dataset, &members, &cfg.surrogate)?;
            loss_sum += loss * members.len() as f64;
            adam_update(&mut weights, &grads, &mut adam)?;
        }
        let evaluate_now = epoch % cfg.eval_every == 0 || epoch == cfg.epochs;
        let (train_acc, test_acc) = if evaluate_now {
            let tr = evaluate(spec, &weights, dataset, Some(&train_idx))?.accuracy;
            let te = if test_idx.is_empty() {
                None
            } else {
                Some(evaluate(spec, &weights, dataset, Some(&test_idx))?.accuracy)
            };
            (Some(tr), te)
        } else {
            (None, None)
        };
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_idx.len() as f64,
            train_acc,
            test_acc,
        });
    }
    Ok(TrainOutcome {
        weights,
        history,
        train_indices: train_idx,
        test_indices: test_idx,
    })
}

/// `epoch,train_loss,train_acc,test_acc`; epochs without evaluation leave
/// the accuracy fields empty.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("epoch,train_loss,train_acc,test_acc\n");
    for r in history {
        writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, opt(r.train_acc), opt(r.test_acc)).unwrap();
    }
    out
}
