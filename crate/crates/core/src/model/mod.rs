//! Recurrent dynamics model: two stacked LSTM layers over a window of state tuples, then a
//! two-layer dense head predicting the next object-frame motion.

mod adam;
mod io;
mod lstm;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState, Parameters};
pub use io::{read_weights, write_weights, WEIGHTS_MAGIC, WEIGHTS_VERSION};
pub use lstm::{backward, forward, forward_batch, loss, sequences_to_array, ForwardCache, Mode};
pub use train::{train, TrainConfig, TrainingCurve};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetStats, StateTuple, MOTION_DIM, TUPLE_DIM};
use crate::error::{Error, Result};
use crate::Scalar;

/// Layer widths. Input and output are fixed by the tuple encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub hidden1: usize,
    pub hidden2: usize,
    pub dense: usize,
}

impl Architecture {
    pub const DEFAULT: Architecture = Architecture { hidden1: 128, hidden2: 64, dense: 64 };
}

impl Default for Architecture {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// One LSTM layer. Pre-activations are `x W + h U + b` with the four gates laid out as
/// column blocks `[input | forget | cell | output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<S> {
    /// `input x 4H`
    pub w: Array2<S>,
    /// `H x 4H`
    pub u: Array2<S>,
    pub b: Array1<S>,
}

impl<S: Scalar> LstmLayer<S> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self { w: Array2::zeros((input, 4 * hidden)), u: Array2::zeros((hidden, 4 * hidden)), b: Array1::zeros(4 * hidden) }
    }

    pub fn hidden(&self) -> usize {
        self.u.nrows()
    }

    fn cast<T: Scalar>(&self) -> LstmLayer<T> {
        LstmLayer { w: cast2(&self.w), u: cast2(&self.u), b: self.b.mapv(|v| T::lit(v.as_f64())) }
    }
}

/// Dense layer `x W + b`, `W` is `input x output`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<S> {
    pub w: Array2<S>,
    pub b: Array1<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self { w: Array2::zeros((input, output)), b: Array1::zeros(output) }
    }

    fn cast<T: Scalar>(&self) -> Dense<T> {
        Dense { w: cast2(&self.w), b: self.b.mapv(|v| T::lit(v.as_f64())) }
    }
}

fn cast2<S: Scalar, T: Scalar>(a: &Array2<S>) -> Array2<T> {
    a.mapv(|v| T::lit(v.as_f64()))
}

/// Per-channel input statistics. Outputs share the statistics of the three increment
/// channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer<S> {
    pub mean: [S; TUPLE_DIM],
    pub std: [S; TUPLE_DIM],
}

impl<S: Scalar> Normalizer<S> {
    pub fn identity() -> Self {
        Self { mean: [S::zero(); TUPLE_DIM], std: [S::one(); TUPLE_DIM] }
    }

    /// Degenerate channels (std below `1e-8`) are left unscaled.
    pub fn from_stats(stats: &DatasetStats) -> Self {
        Self {
            mean: stats.mean.map(S::lit),
            std: stats.std.map(|s| if s < 1e-8 { S::one() } else { S::lit(s) }),
        }
    }

    pub fn input(&self, t: &[S; TUPLE_DIM]) -> [S; TUPLE_DIM] {
        std::array::from_fn(|c| (t[c] - self.mean[c]) / self.std[c])
    }

    pub fn output(&self, y: &[S; MOTION_DIM]) -> [S; MOTION_DIM] {
        std::array::from_fn(|c| (y[c] - self.mean[c]) / self.std[c])
    }

    pub fn denormalize_output(&self, y: &[S; MOTION_DIM]) -> [S; MOTION_DIM] {
        std::array::from_fn(|c| y[c] * self.std[c] + self.mean[c])
    }

    fn cast<T: Scalar>(&self) -> Normalizer<T> {
        Normalizer { mean: self.mean.map(|v| T::lit(v.as_f64())), std: self.std.map(|v| T::lit(v.as_f64())) }
    }
}

/// Every trainable tensor plus the normalization constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights<S> {
    pub lstm1: LstmLayer<S>,
    pub lstm2: LstmLayer<S>,
    pub fc1: Dense<S>,
    pub fc2: Dense<S>,
    pub norm: Normalizer<S>,
}

impl<S: Scalar> ModelWeights<S> {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            lstm1: LstmLayer::zeros(TUPLE_DIM, arch.hidden1),
            lstm2: LstmLayer::zeros(arch.hidden1, arch.hidden2),
            fc1: Dense::zeros(arch.hidden2, arch.dense),
            fc2: Dense::zeros(arch.dense, MOTION_DIM),
            norm: Normalizer::identity(),
        }
    }

    pub fn architecture(&self) -> Architecture {
        Architecture { hidden1: self.lstm1.hidden(), hidden2: self.lstm2.hidden(), dense: self.fc1.b.len() }
    }

    pub fn cast<T: Scalar>(&self) -> ModelWeights<T> {
        ModelWeights {
            lstm1: self.lstm1.cast(),
            lstm2: self.lstm2.cast(),
            fc1: self.fc1.cast(),
            fc2: self.fc2.cast(),
            norm: self.norm.cast(),
        }
    }

    /// Checks that every array has the shape implied by the layer widths.
    pub fn check_shapes(&self) -> Result<()> {
        let a = self.architecture();
        let expect = Self::zeros(a);
        let ok = self.lstm1.w.dim() == expect.lstm1.w.dim()
            && self.lstm1.u.dim() == expect.lstm1.u.dim()
            && self.lstm1.b.dim() == expect.lstm1.b.dim()
            && self.lstm2.w.dim() == expect.lstm2.w.dim()
            && self.lstm2.u.dim() == expect.lstm2.u.dim()
            && self.lstm2.b.dim() == expect.lstm2.b.dim()
            && self.fc1.w.dim() == expect.fc1.w.dim()
            && self.fc2.w.dim() == expect.fc2.w.dim()
            && self.fc2.b.dim() == expect.fc2.b.dim();
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(format!("weights inconsistent with architecture {a:?}")))
        }
    }
}

impl<S: Scalar> Parameters<S> for ModelWeights<S> {
    fn tensors(&self) -> Vec<&[S]> {
        let all = [
            self.lstm1.w.as_slice(),
            self.lstm1.u.as_slice(),
            self.lstm1.b.as_slice(),
            self.lstm2.w.as_slice(),
            self.lstm2.u.as_slice(),
            self.lstm2.b.as_slice(),
            self.fc1.w.as_slice(),
            self.fc1.b.as_slice(),
            self.fc2.w.as_slice(),
            self.fc2.b.as_slice(),
        ];
        all.into_iter().map(|t| t.expect("standard layout")).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [S]> {
        let all = [
            self.lstm1.w.as_slice_mut(),
            self.lstm1.u.as_slice_mut(),
            self.lstm1.b.as_slice_mut(),
            self.lstm2.w.as_slice_mut(),
            self.lstm2.u.as_slice_mut(),
            self.lstm2.b.as_slice_mut(),
            self.fc1.w.as_slice_mut(),
            self.fc1.b.as_slice_mut(),
            self.fc2.w.as_slice_mut(),
            self.fc2.b.as_slice_mut(),
        ];
        all.into_iter().map(|t| t.expect("standard layout")).collect()
    }
}

/// Next-step object motion in the object frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prediction<S> {
    pub dx: S,
    pub dy: S,
    pub dtheta: S,
}

impl<S: Scalar> Prediction<S> {
    pub fn from_array(a: [S; MOTION_DIM]) -> Self {
        Self { dx: a[0], dy: a[1], dtheta: a[2] }
    }

    pub fn to_array(&self) -> [S; MOTION_DIM] {
        [self.dx, self.dy, self.dtheta]
    }
}

fn fill_uniform<S: Scalar>(a: &mut Array2<S>, rng: &mut ChaCha8Rng) {
    let bound = (6.0 / a.nrows() as f64).sqrt();
    a.mapv_inplace(|_| S::lit(rng.gen_range(-bound..=bound)));
}

/// Uniform `+-sqrt(6 / fan_in)` for every matrix, zero biases except the forget gates,
/// which start at 1. Normalization starts as the identity.
pub fn init_weights<S: Scalar>(arch: Architecture, seed: u64) -> ModelWeights<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = ModelWeights::zeros(arch);
    for layer in [&mut w.lstm1, &mut w.lstm2] {
        fill_uniform(&mut layer.w, &mut rng);
        fill_uniform(&mut layer.u, &mut rng);
        let h = layer.hidden();
        layer.b.slice_mut(ndarray::s![h..2 * h]).fill(S::one());
    }
    fill_uniform(&mut w.fc1.w, &mut rng);
    fill_uniform(&mut w.fc2.w, &mut rng);
    w
}

/// Eval-mode prediction from the most recent `k + 1` tuples of `history`.
pub fn predict_next<S: Scalar>(weights: &ModelWeights<S>, history: &[StateTuple<S>], k: usize) -> Result<Prediction<S>> {
    let need = k + 1;
    if history.len() < need {
        return Err(Error::ShortHistory { have: history.len(), need });
    }
    let (p, _) = forward(weights, &history[history.len() - need..], Mode::Eval, &mut rand::rngs::mock::StepRng::new(0, 0))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_bounded() {
        let arch = Architecture::DEFAULT;
        let a = init_weights::<f64>(arch, 11);
        assert_eq!(a, init_weights::<f64>(arch, 11));
        assert_ne!(a, init_weights::<f64>(arch, 12));
        for (m, fan_in) in [(&a.lstm1.w, 7), (&a.lstm1.u, 128), (&a.lstm2.w, 128), (&a.lstm2.u, 64), (&a.fc1.w, 64), (&a.fc2.w, 64)] {
            let bound = (6.0 / fan_in as f64).sqrt();
            assert!(m.iter().all(|v| v.abs() <= bound));
            assert!(m.iter().any(|v| v.abs() > 0.5 * bound));
        }
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let w = init_weights::<f64>(Architecture::DEFAULT, 0);
        for layer in [&w.lstm1, &w.lstm2] {
            let h = layer.hidden();
            for (j, &b) in layer.b.iter().enumerate() {
                assert_eq!(b, if (h..2 * h).contains(&j) { 1.0 } else { 0.0 });
            }
        }
        assert!(w.fc1.b.iter().chain(w.fc2.b.iter()).all(|&b| b == 0.0));
    }

    #[test]
    fn parameter_count() {
        let w = init_weights::<f64>(Architecture::DEFAULT, 0);
        let lstm = |i: usize, h: usize| 4 * h * (i + h + 1);
        assert_eq!(w.num_params(), lstm(7, 128) + lstm(128, 64) + 64 * 64 + 64 + 64 * 3 + 3);
    }

    #[test]
    fn predict_next_needs_full_window() {
        let w = init_weights::<f64>(Architecture::DEFAULT, 0);
        let h = vec![StateTuple::default(); 3];
        assert!(matches!(predict_next(&w, &h, 4), Err(Error::ShortHistory { have: 3, need: 5 })));
        assert!(predict_next(&w, &h, 2).is_ok());
    }

    #[test]
    fn predict_next_uses_latest_window() {
        let w = init_weights::<f64>(Architecture::DEFAULT, 5);
        let mk = |v: f64| StateTuple { dx: v, dy: 0.0, dtheta: 0.0, px: -0.05, py: 0.0, ax: 0.005, ay: 0.0 };
        let long: Vec<_> = (0..8).map(|i| mk(i as f64 * 1e-3)).collect();
        let a = predict_next(&w, &long, 2).unwrap();
        let b = predict_next(&w, &long[5..], 2).unwrap();
        assert_eq!(a, b);
    }
}
