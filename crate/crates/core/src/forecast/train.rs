use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::model::TwinModel;
use super::window::{Sample, WindowedDataset};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            batch_size: 64,
            epochs: 1,
            seed: 0,
        }
    }
}

/// Gradient of the mean quadratic loss over `batch`.
pub fn loss_gradient(model: &TwinModel, batch: &[Sample]) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut grad = vec![0.0; model.params.len()];
    let scale = 2.0 / batch.len() as f64;
    for s in batch {
        if s.input.len() != model.input_dim {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim,
                got: s.input.len(),
            });
        }
        let err = model.predict_unchecked(&s.input) - s.target;
        model.accumulate_output_gradient(&s.input, scale * err, &mut grad);
    }
    Ok(grad)
}

/// Mean quadratic loss of `model` over the whole dataset.
pub fn dataset_mse(model: &TwinModel, data: &WindowedDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut sum = 0.0;
    for s in &data.samples {
        let e = model.predict(&s.input)? - s.target;
        sum += e * e;
    }
    Ok(sum / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: TwinModel,
    /// Full-dataset MSE after each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Mini-batch SGD. Each epoch shuffles the sample order with a stream
/// derived from `(cfg.seed, epoch)`; the last partial batch is kept.
pub fn local_train(
    model: &TwinModel,
    data: &WindowedDataset,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut current = model.clone();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch: Vec<Sample> = Vec::with_capacity(cfg.batch_size);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::rng_for(cfg.seed, rng::TRAIN, epoch as u64));
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data.samples[i].clone()));
            let grad = loss_gradient(&current, &batch)?;
            for (p, g) in current.params.iter_mut().zip(&grad) {
                *p -= cfg.learning_rate * g;
            }
        }
        let loss = dataset_mse(&current, data)?;
        if !loss.is_finite() || current.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        epoch_losses.push(loss);
    }
    Ok(TrainOutcome {
        model: current,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::{build_windows, init_model, Arch, WindowSpec};

    fn sample(input: &[f64], target: f64) -> Sample {
        Sample {
            input: input.to_vec(),
            target,
        }
    }

    #[test]
    fn perfect_fit_has_zero_gradient() {
        let m = TwinModel::new(Arch::Linear, 2, vec![1.0, -2.0, 0.5]).unwrap();
        let batch = [sample(&[1.0, 1.0], -0.5), sample(&[3.0, 0.0], 3.5)];
        assert_eq!(loss_gradient(&m, &batch).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_sample_gradient() {
        let m = TwinModel::new(Arch::Linear, 1, vec![1.0, 0.0]).unwrap();
        assert_eq!(loss_gradient(&m, &[sample(&[1.0], 0.0)]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(loss_gradient(&m, &[]), Err(Error::EmptyBatch));
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let m = init_model(Arch::Mlp { hidden: 3 }, 2, 4).unwrap();
        let data = WindowedDataset {
            samples: vec![sample(&[0.1, 0.2], 0.3), sample(&[0.5, 0.1], 0.9)],
        };
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 3,
            ..TrainConfig::default()
        };
        assert_eq!(local_train(&m, &data, &cfg).unwrap().model, m);
    }

    #[test]
    fn single_step_matches_closed_form() {
        let m = TwinModel::new(Arch::Linear, 2, vec![0.3, -0.2, 0.1]).unwrap();
        let s = sample(&[0.5, 2.0], 1.0);
        let data = WindowedDataset { samples: vec![s.clone()] };
        let cfg = TrainConfig {
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let out = local_train(&m, &data, &cfg).unwrap();
        let err = 0.3 * 0.5 - 0.2 * 2.0 + 0.1 - 1.0;
        let expected = [
            0.3 - 0.05 * 2.0 * err * 0.5,
            -0.2 - 0.05 * 2.0 * err * 2.0,
            0.1 - 0.05 * 2.0 * err,
        ];
        for (a, b) in out.model.params.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn converges_on_realizable_series() {
        // x[t] = 0.3 + 0.4 * x[t-1] exactly, normalized range
        let mut series = vec![0.9];
        for t in 1..200 {
            let prev: f64 = series[t - 1];
            series.push(0.3 + 0.4 * prev + if t % 50 == 0 { 0.3 } else { 0.0 });
        }
        let spec = WindowSpec::new(1, 0, 1).unwrap();
        let data = build_windows(&series, &spec).unwrap();
        let data = WindowedDataset {
            samples: data
                .samples
                .into_iter()
                .map(|s| {
                    let t = 0.3 + 0.4 * s.input[0];
                    Sample { target: t, ..s }
                })
                .collect(),
        };
        let cfg = TrainConfig {
            learning_rate: 0.01,
            batch_size: 8,
            epochs: 200,
            seed: 1,
        };
        let out = local_train(&init_model(Arch::Linear, 1, 0).unwrap(), &data, &cfg).unwrap();
        assert!(*out.epoch_losses.last().unwrap() < 1e-3, "{:?}", out.epoch_losses.last());
    }

    #[test]
    fn divergence_is_reported() {
        let m = TwinModel::new(Arch::Linear, 1, vec![0.0, 0.0]).unwrap();
        let data = WindowedDataset {
            samples: vec![sample(&[1e3], 1e3), sample(&[-1e3], 5.0)],
        };
        let cfg = TrainConfig {
            learning_rate: 10.0,
            batch_size: 1,
            epochs: 50,
            seed: 0,
        };
        assert!(matches!(
            local_train(&m, &data, &cfg),
            Err(Error::Divergence { .. })
        ));
    }
}
