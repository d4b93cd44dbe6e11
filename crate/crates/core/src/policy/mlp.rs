//! Fully connected networks for the actor and the critic.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::model::{Dense, Parameters};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Relu => x.max(S::zero()),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn grad_from_output<S: Scalar>(self, y: S) -> S {
        match self {
            Activation::Relu => {
                if y > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Activation::Tanh => S::one() - y * y,
            Activation::Identity => S::one(),
        }
    }
}

/// ReLU hidden layers followed by an output activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<S> {
    pub layers: Vec<Dense<S>>,
    pub output: Activation,
}

/// Layer outputs after activation, input first.
#[derive(Debug, Clone)]
pub struct MlpCache<S> {
    pub activations: Vec<Array2<S>>,
}

impl<S: Scalar> Mlp<S> {
    /// `sizes` lists every width from input to output. Hidden weights are uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, the last layer in `±final_scale`, biases zero.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: Activation, final_scale: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output widths");
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let (a, b) = (sizes[i], sizes[i + 1]);
                let bound = if i + 1 == n { final_scale } else { (6.0 / (a + b) as f64).sqrt() };
                Dense { w: Array2::from_shape_simple_fn((a, b), || S::lit(rng.gen_range(-bound..=bound))), b: Array1::zeros(b) }
            })
            .collect();
        Self { layers, output }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.ncols()
    }

    /// Widths from input to output.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.w.ncols()));
        s
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            Activation::Relu
        }
    }

    /// `batch x in -> batch x out`.
    pub fn forward(&self, x: &Array2<S>) -> Array2<S> {
        self.forward_cached(x).activations.pop().unwrap()
    }

    pub fn forward_cached(&self, x: &Array2<S>) -> MlpCache<S> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.clone());
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = activations[i].dot(&l.w) + &l.b;
            let act = self.activation(i);
            z.mapv_inplace(|v| act.apply(v));
            activations.push(z);
        }
        MlpCache { activations }
    }

    /// Gradients of `sum(dout * output)` with respect to the parameters and the input.
    pub fn backward(&self, cache: &MlpCache<S>, dout: &Array2<S>) -> (Self, Array2<S>) {
        let mut grads = self.zeros_like();
        let mut delta = dout.clone();
        for i in (0..self.layers.len()).rev() {
            let act = self.activation(i);
            delta.zip_mut_with(&cache.activations[i + 1], |d, &y| *d = *d * act.grad_from_output(y));
            grads.layers[i].w.assign(&cache.activations[i].t().dot(&delta));
            grads.layers[i].b.assign(&delta.sum_axis(Axis(0)));
            delta = delta.dot(&self.layers[i].w.t());
        }
        (grads, delta)
    }

    /// Moves every parameter a fraction `tau` of the way toward `source`.
    pub fn soft_update(&mut self, source: &Self, tau: S) {
        let keep = S::one() - tau;
        for (t, s) in self.tensors_mut().into_iter().zip(source.tensors()) {
            for (a, b) in t.iter_mut().zip(s) {
                *a = keep * *a + tau * *b;
            }
        }
    }

    pub fn cast<T: Scalar>(&self) -> Mlp<T> {
        Mlp {
            layers: self.layers.iter().map(|l| Dense { w: l.w.mapv(|v| T::lit(v.as_f64())), b: l.b.mapv(|v| T::lit(v.as_f64())) }).collect(),
            output: self.output,
        }
    }
}

impl<S: Scalar> Parameters<S> for Mlp<S> {
    fn tensors(&self) -> Vec<&[S]> {
        self.layers.iter().flat_map(|l| [l.w.as_slice().unwrap(), l.b.as_slice().unwrap()]).collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [S]> {
        self.layers.iter_mut().flat_map(|l| [l.w.as_slice_mut().unwrap(), l.b.as_slice_mut().unwrap()]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn loss(net: &Mlp<f64>, x: &Array2<f64>, w: &Array2<f64>) -> f64 {
        (net.forward(x) * w).sum()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for output in [Activation::Tanh, Activation::Identity] {
            let mut net = Mlp::<f64>::new(&[5, 7, 6, 2], output, 0.5, &mut rng);
            // zero biases put ReLU kinks exactly at dead rows
            for l in net.layers.iter_mut() {
                l.b.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
            }
            let x = Array2::from_shape_simple_fn((4, 5), || rng.gen_range(-1.0..1.0));
            let w = Array2::from_shape_simple_fn((4, 2), || rng.gen_range(-1.0..1.0));
            let cache = net.forward_cached(&x);
            let (g, dx) = net.backward(&cache, &w);
            let h = 1e-6;
            let mut probe = net.clone();
            let ga: Vec<f64> = g.tensors().into_iter().flatten().copied().collect();
            let n = probe.num_params();
            for idx in 0..n {
                let orig = probe.tensors()[0..].iter().flat_map(|t| t.iter()).nth(idx).copied().unwrap();
                let set = |p: &mut Mlp<f64>, v: f64| {
                    *p.tensors_mut().into_iter().flat_map(|t| t.iter_mut()).nth(idx).unwrap() = v;
                };
                set(&mut probe, orig + h);
                let up = loss(&probe, &x, &w);
                set(&mut probe, orig - h);
                let down = loss(&probe, &x, &w);
                set(&mut probe, orig);
                let fd = (up - down) / (2.0 * h);
                assert!((fd - ga[idx]).abs() < 1e-6 * (1.0 + fd.abs()), "param {idx}: {fd} vs {}", ga[idx]);
            }
            for i in 0..4 {
                for j in 0..5 {
                    let mut xp = x.clone();
                    xp[(i, j)] += h;
                    let mut xm = x.clone();
                    xm[(i, j)] -= h;
                    let fd = (loss(&net, &xp, &w) - loss(&net, &xm, &w)) / (2.0 * h);
                    assert!((fd - dx[(i, j)]).abs() < 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn tanh_output_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::new(&[3, 8, 2], Activation::Tanh, 10.0, &mut rng);
        let x = Array2::from_elem((2, 3), 1e3);
        assert!(net.forward(&x).iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn soft_update_contracts_geometrically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let main = Mlp::<f64>::new(&[3, 4, 1], Activation::Identity, 1.0, &mut rng);
        let mut target = Mlp::<f64>::new(&[3, 4, 1], Activation::Identity, 1.0, &mut rng);
        let dist = |a: &Mlp<f64>, b: &Mlp<f64>| {
            let mut d = a.clone();
            d.add_scaled(b, -1.0);
            d.global_norm()
        };
        let d0 = dist(&target, &main);
        let tau = 0.1;
        for _ in 0..10 {
            target.soft_update(&main, tau);
        }
        let expected = d0 * (1.0f64 - tau).powi(10);
        assert!((dist(&target, &main) - expected).abs() < 1e-12 * d0);
        target.soft_update(&main, 1.0);
        assert_eq!(target, main);
    }
}
