use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Linear,
    /// One `tanh` hidden layer followed by a linear output.
    Mlp { hidden: usize },
}

impl Arch {
    pub fn param_count(&self, input_dim: usize) -> usize {
        match *self {
            Arch::Linear => input_dim + 1,
            Arch::Mlp { hidden } => input_dim * hidden + 2 * hidden + 1,
        }
    }
}

/// Regression twin with a flat parameter vector.
///
/// Parameter layout:
/// * linear: `[w_0 .. w_{D-1}, bias]`
/// * mlp: `[W1 (H x D, row-major), b1 (H), w2 (H), b2]`
#[derive(Debug, Clone, PartialEq)]
pub struct TwinModel {
    pub arch: Arch,
    pub input_dim: usize,
    pub params: Vec<f64>,
}

impl TwinModel {
    pub fn new(arch: Arch, input_dim: usize, params: Vec<f64>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::invalid("input dimension must be at least 1"));
        }
        if let Arch::Mlp { hidden: 0 } = arch {
            return Err(Error::invalid("mlp needs at least one hidden unit"));
        }
        let expected = arch.param_count(input_dim);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        Ok(Self {
            arch,
            input_dim,
            params,
        })
    }

    pub fn zeros(arch: Arch, input_dim: usize) -> Self {
        Self {
            arch,
            input_dim,
            params: vec![0.0; arch.param_count(input_dim)],
        }
    }

    pub fn compatible_with(&self, other: &TwinModel) -> bool {
        self.arch == other.arch
            && self.input_dim == other.input_dim
            && self.params.len() == other.params.len()
    }

    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        Ok(self.predict_unchecked(input))
    }

    pub(crate) fn predict_unchecked(&self, input: &[f64]) -> f64 {
        let d = self.input_dim;
        match self.arch {
            Arch::Linear => dot(&self.params[..d], input) + self.params[d],
            Arch::Mlp { hidden } => {
                let (w1, rest) = self.params.split_at(d * hidden);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(hidden);
                let mut out = b2[0];
                for h in 0..hidden {
                    let a = libm::tanh(dot(&w1[h * d..(h + 1) * d], input) + b1[h]);
                    out += w2[h] * a;
                }
                out
            }
        }
    }

    /// Adds `scale * d(pred)/d(params)` at `input` into `grad`.
    pub(crate) fn accumulate_output_gradient(&self, input: &[f64], scale: f64, grad: &mut [f64]) {
        let d = self.input_dim;
        match self.arch {
            Arch::Linear => {
                for (g, x) in grad[..d].iter_mut().zip(input) {
                    *g += scale * x;
                }
                grad[d] += scale;
            }
            Arch::Mlp { hidden } => {
                let (w1, rest) = self.params.split_at(d * hidden);
                let (b1, rest) = rest.split_at(hidden);
                let w2 = &rest[..hidden];
                let (g_w1, g_rest) = grad.split_at_mut(d * hidden);
                let (g_b1, g_rest) = g_rest.split_at_mut(hidden);
                let (g_w2, g_b2) = g_rest.split_at_mut(hidden);
                g_b2[0] += scale;
                for h in 0..hidden {
                    let a = libm::tanh(dot(&w1[h * d..(h + 1) * d], input) + b1[h]);
                    g_w2[h] += scale * a;
                    let back = scale * w2[h] * (1.0 - a * a);
                    g_b1[h] += back;
                    for (g, x) in g_w1[h * d..(h + 1) * d].iter_mut().zip(input) {
                        *g += back * x;
                    }
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn quadratic_loss(pred: f64, target: f64) -> f64 {
    let e = pred - target;
    e * e
}

/// Weights uniform in `[-0.1, 0.1]`, biases zero.
pub fn init_model(arch: Arch, input_dim: usize, seed: u64) -> Result<TwinModel> {
    if input_dim == 0 {
        return Err(Error::invalid("input dimension must be at least 1"));
    }
    let mut rng = rng::rng_for(seed, rng::INIT, 0);
    let mut draw = || rng.random_range(-0.1..=0.1);
    let params = match arch {
        Arch::Linear => {
            let mut p: Vec<f64> = (0..input_dim).map(|_| draw()).collect();
            p.push(0.0);
            p
        }
        Arch::Mlp { hidden } => {
            let mut p: Vec<f64> = (0..input_dim * hidden).map(|_| draw()).collect();
            p.extend(core::iter::repeat_n(0.0, hidden));
            p.extend((0..hidden).map(|_| draw()));
            p.push(0.0);
            p
        }
    };
    TwinModel::new(arch, input_dim, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_prediction() {
        let m = TwinModel::new(Arch::Linear, 2, vec![0.0, 0.0, 4.5]).unwrap();
        assert_eq!(m.predict(&[7.0, -3.0]).unwrap(), 4.5);
        let m = TwinModel::new(Arch::Linear, 2, vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(m.predict(&[2.0, 3.0]).unwrap(), 5.0);
        assert!(matches!(m.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mlp_zero_weights_returns_output_bias() {
        let mut m = TwinModel::zeros(Arch::Mlp { hidden: 4 }, 3);
        *m.params.last_mut().unwrap() = 1.5;
        assert_eq!(m.predict(&[1.0, -2.0, 0.3]).unwrap(), 1.5);
    }

    #[test]
    fn quadratic_loss_values() {
        assert_eq!(quadratic_loss(3.0, 3.0), 0.0);
        assert_eq!(quadratic_loss(0.0, 2.0), 4.0);
        assert_eq!(quadratic_loss(-1.0, 1.0), 4.0);
    }

    #[test]
    fn init_shapes_and_determinism() {
        let a = init_model(Arch::Linear, 3, 9).unwrap();
        assert_eq!(a.params.len(), 4);
        assert_eq!(a.params[3], 0.0);
        assert_eq!(a, init_model(Arch::Linear, 3, 9).unwrap());
        let m = init_model(Arch::Mlp { hidden: 8 }, 5, 1).unwrap();
        assert_eq!(m.params.len(), 57);
        assert!(m.params.iter().all(|p| p.abs() <= 0.1));
        // hidden biases and output bias are zero
        assert!(m.params[40..48].iter().all(|&p| p == 0.0));
        assert_eq!(m.params[56], 0.0);
    }

    #[test]
    fn permuting_features_with_weights_keeps_prediction() {
        let m = TwinModel::new(Arch::Linear, 3, vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let p = TwinModel::new(Arch::Linear, 3, vec![2.0, 0.5, -1.0, 0.25]).unwrap();
        let x = [1.0, 2.0, 3.0];
        assert_eq!(m.predict(&x).unwrap(), p.predict(&[3.0, 1.0, 2.0]).unwrap());
    }
}
