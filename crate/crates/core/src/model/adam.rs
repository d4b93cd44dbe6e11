use crate::Scalar;

/// A fixed set of flat parameter tensors visited in a stable order.
pub trait Parameters<S>: Clone {
    fn tensors(&self) -> Vec<&[S]>;
    fn tensors_mut(&mut self) -> Vec<&mut [S]>;

    /// Same shapes, all zeros.
    fn zeros_like(&self) -> Self
    where
        S: Scalar,
    {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(S::zero());
        }
        z
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Euclidean norm over all tensors.
    fn global_norm(&self) -> S
    where
        S: Scalar,
    {
        let mut acc = S::zero();
        for t in self.tensors() {
            for &v in t {
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    fn scale(&mut self, k: S)
    where
        S: Scalar,
    {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= k;
            }
        }
    }

    /// `self += other * k`, tensor by tensor.
    fn add_scaled(&mut self, other: &Self, k: S)
    where
        S: Scalar,
    {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y * k;
            }
        }
    }

    fn all_finite(&self) -> bool
    where
        S: Scalar,
    {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moment estimates plus the step count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<P> {
    pub m: P,
    pub v: P,
    pub t: u64,
}

impl<P> AdamState<P> {
    pub fn new<S: Scalar>(params: &P) -> Self
    where
        P: Parameters<S>,
    {
        Self { m: params.zeros_like(), v: params.zeros_like(), t: 0 }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<S: Scalar, P: Parameters<S>>(params: &mut P, grads: &P, state: &mut AdamState<P>, cfg: &AdamConfig) {
    state.t += 1;
    let b1 = S::lit(cfg.beta1);
    let b2 = S::lit(cfg.beta2);
    let one = S::one();
    let correction1 = one - S::lit(cfg.beta1.powi(state.t as i32));
    let correction2 = one - S::lit(cfg.beta2.powi(state.t as i32));
    let lr = S::lit(cfg.learning_rate);
    let eps = S::lit(cfg.eps);
    let ms = state.m.tensors_mut();
    let vs = state.v.tensors_mut();
    for (((p, g), m), v) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(ms).zip(vs) {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (one - b1) * g[i];
            v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug, PartialEq)]
    struct Flat(Vec<f64>);

    impl Parameters<f64> for Flat {
        fn tensors(&self) -> Vec<&[f64]> {
            vec![&self.0]
        }
        fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn zero_gradient_leaves_weights() {
        let mut p = Flat(vec![0.3, -1.2]);
        let before = p.clone();
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &Flat(vec![0.0, 0.0]), &mut st, &AdamConfig::default());
        assert_eq!(p, before);
        assert_eq!(st.t, 1);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        let cfg = AdamConfig { learning_rate: 0.01, ..Default::default() };
        let g = [3.0, -0.002, 1e-3];
        let mut p = Flat(vec![0.0; 3]);
        let mut st = AdamState::new(&p);
        adam_step(&mut p, &Flat(g.to_vec()), &mut st, &cfg);
        for (pi, gi) in p.0.iter().zip(g) {
            // m_hat = g, v_hat = g^2: step = -lr * g / (|g| + eps)
            let expected = -0.01 * gi / (gi.abs() + 1e-8);
            assert!((pi - expected).abs() < 1e-15, "{pi} vs {expected}");
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut p = Flat(vec![0.5, 0.25, -0.75]);
            let mut st = AdamState::new(&p);
            for k in 0..50 {
                let g = Flat(p.0.iter().map(|x| 2.0 * x + 0.01 * k as f64).collect());
                adam_step(&mut p, &g, &mut st, &AdamConfig::default());
            }
            p
        };
        assert_eq!(run(), run());
    }
}
