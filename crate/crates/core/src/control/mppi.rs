use ndarray::{s, Array2, Array3};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Dynamics, GoalSpec, HistoryBuffer, RmppiConfig};
use crate::dataset::TUPLE_DIM;
use crate::error::{Error, Result};
use crate::sim::{wrap_angle, Pose2D, Vec2};
use crate::Scalar;

/// Object-frame push displacements, one per horizon step.
pub type ActionSequence = Vec<Vec2<f64>>;

/// Straight-ahead nominal sequence.
pub fn forward_sequence(horizon: usize, push_magnitude: f64) -> ActionSequence {
    vec![Vec2::new(push_magnitude, 0.0); horizon]
}

/// Raw Gaussian perturbations `N x T x 2` with standard deviation `sigma`.
pub fn sample_perturbations<R: Rng + ?Sized>(n: usize, horizon: usize, sigma: f64, rng: &mut R) -> Array3<f64> {
    Array3::from_shape_simple_fn((n, horizon, 2), || sigma * rng.sample::<f64, _>(StandardNormal))
}

fn rescale(v: Vec2<f64>, magnitude: f64, fallback: Vec2<f64>) -> Vec2<f64> {
    match v.normalized() {
        Some(u) => u * magnitude,
        None => fallback,
    }
}

/// `N` sequences: the nominal direction at each step plus a Gaussian perturbation of the unit
/// direction, rescaled to the push magnitude.
pub fn sample_rollouts<R: Rng + ?Sized>(nominal: &ActionSequence, config: &RmppiConfig, rng: &mut R) -> Vec<ActionSequence> {
    let noise = sample_perturbations(config.samples, nominal.len(), config.noise_sigma, rng);
    let mag = config.push_magnitude;
    (0..config.samples)
        .map(|n| {
            nominal
                .iter()
                .enumerate()
                .map(|(t, u)| {
                    let base = rescale(*u, 1.0, Vec2::new(1.0, 0.0));
                    let d = base + Vec2::new(noise[(n, t, 0)], noise[(n, t, 1)]);
                    rescale(d, mag, base * mag)
                })
                .collect()
        })
        .collect()
}

/// Normalized path-integral weights `exp(-(C - min C) / lambda)`. Non-finite costs get zero
/// weight.
pub fn mppi_weights(costs: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let min = costs.iter().copied().filter(|c| c.is_finite()).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::NonFinite("rollout costs"));
    }
    let mut w: Vec<f64> = costs.iter().map(|&c| if c.is_finite() { (-(c - min) / lambda).exp() } else { 0.0 }).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Weighted average of the sampled actions per step, rescaled to the push magnitude.
pub fn mppi_update(costs: &[f64], sequences: &[ActionSequence], config: &RmppiConfig) -> Result<ActionSequence> {
    if costs.len() != sequences.len() || sequences.is_empty() {
        return Err(Error::Shape(format!("{} costs for {} sequences", costs.len(), sequences.len())));
    }
    let w = mppi_weights(costs, config.lambda)?;
    let best = (0..costs.len()).filter(|&i| costs[i].is_finite()).fold(None, |b: Option<usize>, i| match b {
        Some(j) if costs[j] <= costs[i] => Some(j),
        _ => Some(i),
    });
    let best = &sequences[best.unwrap()];
    if w.iter().filter(|&&v| v > 0.0).count() == 1 {
        return Ok(best.clone());
    }
    let horizon = sequences[0].len();
    Ok((0..horizon)
        .map(|t| {
            let mut acc = Vec2::zero();
            for (wn, seq) in w.iter().zip(sequences) {
                if *wn > 0.0 {
                    acc = acc + seq[t] * *wn;
                }
            }
            rescale(acc, config.push_magnitude, best[t])
        })
        .collect())
}

/// Simulates every sequence through the model from the live buffer and returns the summed
/// per-step goal distance of the predicted object poses.
///
/// Each rollout starts from the last `k` complete tuples plus the pending observation. The
/// predicted pusher moves with the candidate action, expressed in the predicted object
/// frame. The live buffer is never modified.
pub fn rollout_costs<D: Dynamics + ?Sized>(
    model: &D,
    buffer: &HistoryBuffer<f64>,
    current: &Pose2D<f64>,
    sequences: &[ActionSequence],
    goal: &GoalSpec,
    k: usize,
) -> Result<Vec<f64>> {
    let n = sequences.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let horizon = sequences[0].len();
    if sequences.iter().any(|s| s.len() != horizon) {
        return Err(Error::Shape("rollout sequences differ in length".into()));
    }
    let past = buffer.latest(k)?;
    let pending = *buffer.pending().ok_or(Error::Empty("pending observation"))?;
    let lit = <D::Scalar as Scalar>::lit;

    let mut x = Array3::<D::Scalar>::zeros((k + 1 + horizon, n, TUPLE_DIM));
    for (t, tuple) in past.iter().enumerate() {
        let a = tuple.to_array().map(|v| lit(v));
        for r in 0..n {
            for c in 0..TUPLE_DIM {
                x[(t, r, c)] = a[c];
            }
        }
    }
    let mut pusher: Vec<Vec2<f64>> = vec![Vec2::new(pending.px, pending.py); n];
    let pend = pending.to_array().map(|v| lit(v));
    for r in 0..n {
        for c in 0..5 {
            x[(k, r, c)] = pend[c];
        }
    }

    // poses relative to the goal keep the integration well conditioned
    let start = Pose2D {
        x: goal.target.to_local(current.position()).x,
        y: goal.target.to_local(current.position()).y,
        theta: wrap_angle(current.theta - goal.target.theta),
    };
    let mut poses = vec![start; n];
    let mut costs = vec![0.0; n];
    let (wx, wy, wt) = goal.weights;
    for t in 0..horizon {
        let row = k + t;
        for (r, seq) in sequences.iter().enumerate() {
            x[(row, r, 5)] = lit(seq[t].x);
            x[(row, r, 6)] = lit(seq[t].y);
        }
        let window = x.slice(s![t..=row, .., ..]).to_owned();
        let pred: Array2<D::Scalar> = model.predict_batch(&window)?;
        for r in 0..n {
            let (dx, dy, dth) = (pred[(r, 0)].as_f64(), pred[(r, 1)].as_f64(), pred[(r, 2)].as_f64());
            poses[r] = poses[r].compose(dx, dy, dth);
            let p = poses[r];
            costs[r] += wx * p.x.abs() + wy * p.y.abs() + wt * p.theta.abs();
            let next = (pusher[r] + sequences[r][t] - Vec2::new(dx, dy)).rotate(-dth);
            pusher[r] = next;
            if row + 1 < x.dim().0 {
                for (c, v) in [dx, dy, dth, next.x, next.y].into_iter().enumerate() {
                    x[(row + 1, r, c)] = lit(v);
                }
            }
        }
    }
    Ok(costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(samples: usize) -> RmppiConfig {
        RmppiConfig { samples, ..Default::default() }
    }

    fn random_set(n: usize, seed: u64) -> (Vec<f64>, Vec<ActionSequence>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seqs = sample_rollouts(&forward_sequence(5, 0.005), &config(n), &mut rng);
        let costs = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        (costs, seqs)
    }

    #[test]
    fn weights_sum_to_one() {
        for seed in 0..20 {
            let (costs, _) = random_set(300, seed);
            for lambda in [1e-6, 1e-3, 0.1, 10.0] {
                let w = mppi_weights(&costs, lambda).unwrap();
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(w.iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn small_temperature_selects_argmin() {
        let (costs, seqs) = random_set(200, 4);
        let cfg = RmppiConfig { lambda: 1e-6, ..config(200) };
        let best = (0..200).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
        let u = mppi_update(&costs, &seqs, &cfg).unwrap();
        for (a, b) in u.iter().zip(&seqs[best]) {
            assert!((a.x - b.x).abs() < 1e-6 && (a.y - b.y).abs() < 1e-6);
        }
    }

    #[test]
    fn single_sample_passes_through() {
        let (costs, seqs) = random_set(1, 5);
        assert_eq!(mppi_update(&costs, &seqs, &config(1)).unwrap(), seqs[0]);
    }

    #[test]
    fn equal_costs_average_uniformly() {
        let (_, seqs) = random_set(50, 6);
        let costs = vec![0.7; 50];
        let cfg = config(50);
        let u = mppi_update(&costs, &seqs, &cfg).unwrap();
        for t in 0..5 {
            let mean = seqs.iter().fold(Vec2::zero(), |acc, s| acc + s[t] * (1.0 / 50.0));
            let expected = mean.normalized().unwrap() * cfg.push_magnitude;
            assert!((u[t].x - expected.x).abs() < 1e-15 && (u[t].y - expected.y).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_costs() {
        let (_, seqs) = random_set(3, 7);
        assert!(mppi_update(&[f64::NAN, f64::INFINITY, f64::NAN], &seqs, &config(3)).is_err());
        let u = mppi_update(&[f64::NAN, 0.5, f64::INFINITY], &seqs, &config(3)).unwrap();
        assert_eq!(u, seqs[1]);
    }

    #[test]
    fn samples_have_push_magnitude() {
        let (_, seqs) = random_set(500, 8);
        for a in seqs.iter().flatten() {
            assert!((a.norm() - 0.005).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_noise_returns_nominal() {
        let nominal: ActionSequence = (0..5).map(|t| Vec2::new(0.003, 0.001 * t as f64).normalized().unwrap() * 0.005).collect();
        let cfg = RmppiConfig { noise_sigma: 1e-300, ..config(10) };
        let seqs = sample_rollouts(&nominal, &cfg, &mut ChaCha8Rng::seed_from_u64(0));
        for s in seqs {
            for (a, b) in s.iter().zip(&nominal) {
                assert!((a.x - b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn perturbation_std_matches_sigma() {
        let p = sample_perturbations(50_000, 1, 0.4, &mut ChaCha8Rng::seed_from_u64(1));
        let n = p.len() as f64;
        let mean = p.sum() / n;
        let std = (p.mapv(|v| (v - mean) * (v - mean)).sum() / n).sqrt();
        assert!((std / 0.4 - 1.0).abs() < 0.02, "{std}");
        assert!(mean.abs() < 0.01);
    }
}
