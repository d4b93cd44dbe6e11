use ndarray::{Array2, Array3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamConfig, AdamState, Parameters};
use super::lstm::{backward, forward_batch, Mode};
use super::{init_weights, Architecture, ModelWeights, Normalizer};
use crate::dataset::{dataset_stats, TrainingSequence, MOTION_DIM, TUPLE_DIM};
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub arch: Architecture,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub dropout_rate: f64,
    pub batch_size: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// Fraction of sequences held out for checkpoint selection.
    pub validation_fraction: f64,
    /// Validation loss is evaluated every this many steps and after the last one.
    pub validate_every: usize,
    /// Rescales the gradient when its global norm exceeds this value.
    pub grad_clip: Option<f64>,
    /// Learning rate is multiplied by this factor over the whole run (exponential decay).
    pub final_lr_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            arch: Architecture::DEFAULT,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            dropout_rate: 0.5,
            batch_size: 64,
            max_steps: 5000,
            seed: 0,
            validation_fraction: 0.1,
            validate_every: 100,
            grad_clip: Some(10.0),
            final_lr_fraction: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        // zero is accepted so that a run can reproduce the initial weights
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.batch_size == 0 || self.validate_every == 0 {
            return bad("batch_size and validate_every must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        if !(self.final_lr_fraction > 0.0 && self.final_lr_fraction <= 1.0) {
            return bad("final_lr_fraction must lie in (0, 1]");
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("grad_clip must be positive");
        }
        if self.arch.hidden1 == 0 || self.arch.hidden2 == 0 || self.arch.dense == 0 {
            return bad("layer widths must be positive");
        }
        Ok(())
    }
}

/// Per-step training loss and the periodic validation losses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingCurve {
    pub train_loss: Vec<f64>,
    /// `(step, loss)`; step 0 is the initial weights.
    pub validation: Vec<(usize, f64)>,
    /// Step whose weights were returned.
    pub best_step: usize,
}

fn batch_arrays<S: Scalar>(seqs: &[TrainingSequence<S>], idx: &[usize]) -> (Array3<S>, Array2<S>) {
    let steps = seqs[idx[0]].input.len();
    let mut x = Array3::zeros((steps, idx.len(), TUPLE_DIM));
    let mut y = Array2::zeros((idx.len(), MOTION_DIM));
    for (b, &i) in idx.iter().enumerate() {
        for (t, tuple) in seqs[i].input.iter().enumerate() {
            for (c, v) in tuple.to_array().into_iter().enumerate() {
                x[(t, b, c)] = v;
            }
        }
        for c in 0..MOTION_DIM {
            y[(b, c)] = seqs[i].target[c];
        }
    }
    (x, y)
}

fn mean_loss<S: Scalar>(w: &ModelWeights<S>, seqs: &[TrainingSequence<S>], idx: &[usize], chunk: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut rng = rand::rngs::mock::StepRng::new(0, 0);
    for part in idx.chunks(chunk.max(1)) {
        let (x, y) = batch_arrays(seqs, part);
        let (_, cache) = forward_batch(w, &x, Mode::Eval, &mut rng)?;
        let (_, l) = backward(w, &cache, &y)?;
        total += l.as_f64() * part.len() as f64;
    }
    Ok(total / idx.len() as f64)
}

/// Mini-batch Adam on the mean normalized squared error. Normalization constants come from
/// the training split. Returns the weights with the lowest validation loss.
pub fn train<S: Scalar>(dataset: &[TrainingSequence<S>], config: &TrainConfig) -> Result<(ModelWeights<S>, TrainingCurve)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if dataset.len() < config.batch_size {
        return Err(Error::DatasetTooSmall { have: dataset.len(), batch: config.batch_size });
    }
    let steps = dataset[0].input.len();
    if steps == 0 || dataset.iter().any(|s| s.input.len() != steps) {
        return Err(Error::Shape("training sequences must share one non-zero length".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((dataset.len() as f64) * config.validation_fraction).floor() as usize;
    let n_val = n_val.min(dataset.len() - config.batch_size);
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut val_idx = val_idx.to_vec();
    let mut train_idx = train_idx.to_vec();
    train_idx.sort_unstable();
    if val_idx.is_empty() {
        val_idx = train_idx.clone();
    }
    val_idx.sort_unstable();

    let train_set: Vec<TrainingSequence<S>> = train_idx.iter().map(|&i| dataset[i].clone()).collect();
    let mut weights = init_weights::<S>(config.arch, config.seed);
    weights.norm = Normalizer::from_stats(&dataset_stats(&train_set)?);

    let adam = AdamConfig { learning_rate: config.learning_rate, beta1: config.adam_beta1, beta2: config.adam_beta2, eps: config.adam_eps };
    let mut state = AdamState::new(&weights);
    let mut curve = TrainingCurve::default();
    let eval_chunk = 512;
    let mut best = (mean_loss(&weights, dataset, &val_idx, eval_chunk)?, 0usize, weights.clone());
    curve.validation.push((0, best.0));

    let mode = Mode::Train { dropout: config.dropout_rate };
    let decay = config.final_lr_fraction.powf(1.0 / config.max_steps.max(1) as f64);
    let mut perm: Vec<usize> = Vec::new();
    let mut batch = Vec::with_capacity(config.batch_size);
    for step in 1..=config.max_steps {
        batch.clear();
        while batch.len() < config.batch_size {
            if perm.is_empty() {
                perm = train_idx.clone();
                perm.shuffle(&mut rng);
            }
            batch.push(perm.pop().unwrap());
        }
        let (x, y) = batch_arrays(dataset, &batch);
        let (_, cache) = forward_batch(&weights, &x, mode, &mut rng).map_err(|_| Error::Diverged(step))?;
        let (mut grad, l) = backward(&weights, &cache, &y)?;
        let l = l.as_f64();
        if !l.is_finite() || !grad.all_finite() {
            return Err(Error::Diverged(step));
        }
        curve.train_loss.push(l);
        if let Some(clip) = config.grad_clip {
            let norm = grad.global_norm().as_f64();
            if norm > clip {
                grad.scale(S::lit(clip / norm));
            }
        }
        let lr = AdamConfig { learning_rate: adam.learning_rate * decay.powi(step as i32 - 1), ..adam };
        adam_step(&mut weights, &grad, &mut state, &lr);
        if !weights.all_finite() {
            return Err(Error::Diverged(step));
        }
        if step % config.validate_every == 0 || step == config.max_steps {
            let v = mean_loss(&weights, dataset, &val_idx, eval_chunk).map_err(|_| Error::Diverged(step))?;
            curve.validation.push((step, v));
            if v < best.0 {
                best = (v, step, weights.clone());
            }
        }
    }
    curve.best_step = best.1;
    Ok((best.2, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::StateTuple;
    use rand::Rng;

    fn small_config() -> TrainConfig {
        TrainConfig {
            arch: Architecture { hidden1: 8, hidden2: 6, dense: 6 },
            batch_size: 8,
            max_steps: 30,
            validate_every: 10,
            ..Default::default()
        }
    }

    fn dataset(n: usize, seed: u64) -> Vec<TrainingSequence<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| TrainingSequence {
                input: (0..3).map(|_| StateTuple::from_array(std::array::from_fn(|_| rng.gen_range(-0.01..0.01)))).collect(),
                target: std::array::from_fn(|_| rng.gen_range(-0.01..0.01)),
            })
            .collect()
    }

    #[test]
    fn too_small_dataset_is_rejected() {
        let cfg = small_config();
        assert!(matches!(train(&dataset(5, 0), &cfg), Err(Error::DatasetTooSmall { have: 5, batch: 8 })));
        assert!(matches!(train::<f64>(&[], &cfg), Err(Error::Empty(_))));
    }

    #[test]
    fn zero_learning_rate_returns_initial_weights() {
        let cfg = TrainConfig { learning_rate: 0.0, ..small_config() };
        let data = dataset(40, 1);
        let (w, curve) = train(&data, &cfg).unwrap();
        let mut init = init_weights::<f64>(cfg.arch, cfg.seed);
        init.norm = w.norm;
        assert_eq!(w, init);
        assert_eq!(curve.train_loss.len(), 30);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = small_config();
        let data = dataset(40, 2);
        let (a, ca) = train(&data, &cfg).unwrap();
        let (b, cb) = train(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ca, cb);
    }

    #[test]
    fn best_checkpoint_has_lowest_validation_loss() {
        let cfg = TrainConfig { max_steps: 60, ..small_config() };
        let (_, curve) = train(&dataset(50, 3), &cfg).unwrap();
        let min = curve.validation.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let at_best = curve.validation.iter().find(|v| v.0 == curve.best_step).unwrap().1;
        assert_eq!(at_best, min);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let data = dataset(40, 4);
        for cfg in [
            TrainConfig { dropout_rate: 1.0, ..small_config() },
            TrainConfig { learning_rate: -1.0, ..small_config() },
            TrainConfig { batch_size: 0, ..small_config() },
        ] {
            assert!(matches!(train(&data, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn huge_learning_rate_reports_divergence_or_finishes_finite() {
        let cfg = TrainConfig { learning_rate: 1e12, grad_clip: None, dropout_rate: 0.0, ..small_config() };
        match train(&dataset(40, 5), &cfg) {
            Ok((w, _)) => assert!(w.all_finite()),
            Err(e) => assert!(matches!(e, Error::Diverged(_))),
        }
    }
}
