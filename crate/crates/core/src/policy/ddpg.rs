//! DDPG with hindsight relabeling on the sparse pushing reward.
//!
//! Both networks read an 8-value encoding of the MDP state taken in the object frame: goal
//! position, heading error, pusher position, the heading error as a unit vector and the goal
//! distance. The actor outputs an object-frame push in `[-1, 1]^2`, scaled by the push
//! magnitude and rotated into the world frame when executed.

use ndarray::{s, Array2, Axis};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::her::her_relabel;
use super::mlp::{Activation, Mlp};
use super::replay::ReplayBuffer;
use super::{state_reward, ActionSource, MdpState, PolicyAction, Transition, ACTION_DIM, MDP_STATE_DIM};
use crate::error::{Error, Result};
use crate::eval::{prototype, sample_task, success, FinalError, TaskSpec, ThresholdTier};
use crate::model::{adam_step, AdamConfig, AdamState, Parameters};
use crate::sim::{wrap_angle, ObjectParams, PushAction, PushEnv, SimConfig, Vec2, DEFAULT_PUSH_MAGNITUDE};
use crate::Scalar;

/// Length unit of the position features, meters.
pub const FEATURE_SCALE: f64 = 0.1;

/// Network input for `state`.
pub fn features<S: Scalar>(state: &MdpState<S>) -> [S; MDP_STATE_DIM] {
    let o = state.object;
    let inv = S::lit(1.0 / FEATURE_SCALE);
    let g = o.to_local(state.goal.position()) * inv;
    let p = o.to_local(state.pusher) * inv;
    let dth = wrap_angle(state.goal.theta - o.theta);
    [g.x, g.y, dth, p.x, p.y, dth.cos(), dth.sin(), g.norm()]
}

/// World-frame command for a normalized object-frame actor output.
pub fn to_world_action<S: Scalar>(raw: [S; ACTION_DIM], state: &MdpState<S>, push_magnitude: f64) -> PolicyAction<S> {
    let m = S::lit(push_magnitude);
    let w = Vec2::new(raw[0] * m, raw[1] * m).rotate(state.object.theta);
    PolicyAction { x: w.x, y: w.y }.clipped(m)
}

/// Inverse of [`to_world_action`] up to clipping.
pub fn to_raw_action<S: Scalar>(action: &PolicyAction<S>, state: &MdpState<S>, push_magnitude: f64) -> [S; ACTION_DIM] {
    let local = Vec2::new(action.x, action.y).rotate(-state.object.theta) * S::lit(1.0 / push_magnitude);
    [local.x, local.y]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    /// Hidden widths shared by actor and critic.
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Penalty on the squared normalized actor output.
    pub action_l2: f64,
    pub push_magnitude: f64,
    /// Gaussian exploration noise on the normalized action.
    pub noise_std: f64,
    /// Probability of a uniformly random exploratory action.
    pub random_eps: f64,
    /// Threshold of the sparse reward.
    pub goal_tier: ThresholdTier,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            gamma: 0.98,
            tau: 0.005,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            action_l2: 1.0,
            push_magnitude: DEFAULT_PUSH_MAGNITUDE,
            noise_std: 0.2,
            random_eps: 0.3,
            goal_tier: ThresholdTier::Mid,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("policy: {m}")));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) || !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("gamma must lie in [0, 1] and tau in (0, 1]");
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0 && self.action_l2 >= 0.0) {
            return bad("learning rates and action_l2 must be non-negative");
        }
        if !(self.push_magnitude > 0.0) || !(self.noise_std >= 0.0) || !(0.0..=1.0).contains(&self.random_eps) {
            return bad("push_magnitude must be positive, noise_std non-negative, random_eps in [0, 1]");
        }
        Ok(())
    }

    /// Bound on the discounted return of `±1` rewards.
    pub fn return_bound(&self) -> f64 {
        if self.gamma < 1.0 {
            1.0 / (1.0 - self.gamma)
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<S> {
    pub config: AgentConfig,
    pub actor: Mlp<S>,
    pub critic: Mlp<S>,
    pub actor_target: Mlp<S>,
    pub critic_target: Mlp<S>,
    pub actor_opt: AdamState<Mlp<S>>,
    pub critic_opt: AdamState<Mlp<S>>,
}

impl<S: Scalar> Agent<S> {
    /// Fresh networks; targets start as copies of the mains.
    pub fn new(config: AgentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![MDP_STATE_DIM];
        sizes.extend(&config.hidden);
        sizes.push(ACTION_DIM);
        let actor = Mlp::new(&sizes, Activation::Tanh, 3e-3, &mut rng);
        sizes[0] = MDP_STATE_DIM + ACTION_DIM;
        *sizes.last_mut().unwrap() = 1;
        let critic = Mlp::new(&sizes, Activation::Identity, 3e-3, &mut rng);
        Ok(Self {
            actor_opt: AdamState::new(&actor),
            critic_opt: AdamState::new(&critic),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            config,
        })
    }

    /// Normalized actor output for one state.
    pub fn act_raw(&self, state: &MdpState<S>) -> [S; ACTION_DIM] {
        let x = Array2::from_shape_vec((1, MDP_STATE_DIM), features(state).to_vec()).unwrap();
        let y = self.actor.forward(&x);
        [y[(0, 0)], y[(0, 1)]]
    }

    /// Critic value of `(state, action)` for a world-frame action.
    pub fn q_value(&self, state: &MdpState<S>, action: &PolicyAction<S>) -> S {
        let x = critic_input(&feature_matrix(std::slice::from_ref(state)), &raw_matrix(&[(*state, *action)], self.config.push_magnitude));
        self.critic.forward(&x)[(0, 0)]
    }
}

/// Actor output, optionally with exploration, as a clipped world-frame command.
pub fn policy_action<S: Scalar, R: Rng + ?Sized>(agent: &Agent<S>, state: &MdpState<S>, explore: bool, rng: &mut R) -> PolicyAction<S> {
    let cfg = &agent.config;
    let mut raw = agent.act_raw(state);
    if explore {
        if rng.gen::<f64>() < cfg.random_eps {
            raw = [S::lit(rng.gen_range(-1.0..=1.0)), S::lit(rng.gen_range(-1.0..=1.0))];
        } else {
            for v in raw.iter_mut() {
                let n: f64 = rng.sample(StandardNormal);
                *v = (*v + S::lit(cfg.noise_std * n)).max(-S::one()).min(S::one());
            }
        }
    }
    to_world_action(raw, state, cfg.push_magnitude)
}

fn feature_matrix<S: Scalar>(states: &[MdpState<S>]) -> Array2<S> {
    let mut x = Array2::zeros((states.len(), MDP_STATE_DIM));
    for (mut row, s) in x.rows_mut().into_iter().zip(states) {
        for (d, v) in row.iter_mut().zip(features(s)) {
            *d = v;
        }
    }
    x
}

fn raw_matrix<S: Scalar>(pairs: &[(MdpState<S>, PolicyAction<S>)], push_magnitude: f64) -> Array2<S> {
    let mut a = Array2::zeros((pairs.len(), ACTION_DIM));
    for (mut row, (s, act)) in a.rows_mut().into_iter().zip(pairs) {
        let r = to_raw_action(act, s, push_magnitude);
        row[0] = r[0];
        row[1] = r[1];
    }
    a
}

fn critic_input<S: Scalar>(feats: &Array2<S>, actions: &Array2<S>) -> Array2<S> {
    ndarray::concatenate(Axis(1), &[feats.view(), actions.view()]).expect("row counts agree")
}

/// Losses measured before the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    /// Mean squared Bellman residual.
    pub critic_loss: f64,
    /// `-mean Q(s, pi(s)) + action_l2 * mean(pi(s)^2)`.
    pub actor_loss: f64,
    pub mean_target: f64,
}

/// Bellman targets `r + gamma * Q'(s', pi'(s'))` for non-terminal transitions, clamped to the
/// return bound.
pub fn critic_targets<S: Scalar>(agent: &Agent<S>, batch: &[Transition<S>]) -> Vec<f64> {
    let next: Vec<MdpState<S>> = batch.iter().map(|t| t.next_state).collect();
    let nf = feature_matrix(&next);
    let na = agent.actor_target.forward(&nf);
    let q = agent.critic_target.forward(&critic_input(&nf, &na));
    let bound = agent.config.return_bound();
    batch
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let boot = if t.done { 0.0 } else { agent.config.gamma * q[(i, 0)].as_f64() };
            (t.reward.as_f64() + boot).clamp(-bound, bound)
        })
        .collect()
}

/// One critic step toward the clamped Bellman targets, one actor step up the critic, then a
/// soft update of both targets.
pub fn ddpg_update<S: Scalar>(agent: &mut Agent<S>, batch: &[Transition<S>]) -> Result<UpdateStats> {
    if batch.is_empty() {
        return Err(Error::Empty("minibatch"));
    }
    let b = batch.len();
    let bs = S::lit(b as f64);
    let y = critic_targets(agent, batch);
    let states: Vec<MdpState<S>> = batch.iter().map(|t| t.state).collect();
    let feats = feature_matrix(&states);
    let pairs: Vec<(MdpState<S>, PolicyAction<S>)> = batch.iter().map(|t| (t.state, t.action)).collect();
    let actions = raw_matrix(&pairs, agent.config.push_magnitude);

    // critic
    let c_cache = agent.critic.forward_cached(&critic_input(&feats, &actions));
    let q = c_cache.activations.last().unwrap();
    let mut dq = Array2::zeros((b, 1));
    let mut critic_loss = 0.0;
    for i in 0..b {
        let e = q[(i, 0)] - S::lit(y[i]);
        critic_loss += e.as_f64() * e.as_f64();
        dq[(i, 0)] = S::lit(2.0) * e / bs;
    }
    critic_loss /= b as f64;
    let (c_grads, _) = agent.critic.backward(&c_cache, &dq);

    // actor, through the critic before its update
    let a_cache = agent.actor.forward_cached(&feats);
    let pi = a_cache.activations.last().unwrap().clone();
    let qa_cache = agent.critic.forward_cached(&critic_input(&feats, &pi));
    let qa = qa_cache.activations.last().unwrap();
    let l2 = S::lit(agent.config.action_l2);
    let n_act = S::lit((b * ACTION_DIM) as f64);
    let actor_loss = -qa.mean().unwrap().as_f64() + agent.config.action_l2 * pi.mapv(|v| v * v).mean().unwrap().as_f64();
    let (_, d_in) = agent.critic.backward(&qa_cache, &Array2::from_elem((b, 1), -S::one() / bs));
    let mut d_pi = d_in.slice(s![.., MDP_STATE_DIM..]).to_owned();
    d_pi.zip_mut_with(&pi, |d, &a| *d += S::lit(2.0) * l2 * a / n_act);
    let (a_grads, _) = agent.actor.backward(&a_cache, &d_pi);

    if !c_grads.all_finite() || !a_grads.all_finite() {
        return Err(Error::NonFinite("policy gradients"));
    }
    let c_cfg = AdamConfig { learning_rate: agent.config.critic_lr, ..Default::default() };
    let a_cfg = AdamConfig { learning_rate: agent.config.actor_lr, ..Default::default() };
    adam_step(&mut agent.critic, &c_grads, &mut agent.critic_opt, &c_cfg);
    adam_step(&mut agent.actor, &a_grads, &mut agent.actor_opt, &a_cfg);
    let tau = S::lit(agent.config.tau);
    agent.critic_target.soft_update(&agent.critic, tau);
    agent.actor_target.soft_update(&agent.actor, tau);
    Ok(UpdateStats { critic_loss, actor_loss, mean_target: y.iter().sum::<f64>() / b as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdpgConfig {
    pub agent: AgentConfig,
    pub episodes: usize,
    pub updates_per_episode: usize,
    pub batch_size: usize,
    pub k_future: usize,
    pub replay_capacity: usize,
    pub max_steps: usize,
    /// Training object.
    pub object: ObjectParams,
    pub sim: SimConfig,
    pub task: TaskSpec,
    /// Greedy evaluation every this many episodes; 0 disables it.
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            agent: AgentConfig::default(),
            episodes: 2000,
            updates_per_episode: 40,
            batch_size: 256,
            k_future: 4,
            replay_capacity: 1_000_000,
            max_steps: 60,
            object: prototype().params,
            sim: SimConfig::default(),
            task: TaskSpec::default(),
            eval_every: 100,
            eval_episodes: 20,
            seed: 0,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        self.object.validate()?;
        self.sim.validate()?;
        if self.batch_size == 0 || self.replay_capacity == 0 || self.max_steps == 0 {
            return Err(Error::Config("policy: batch_size, replay_capacity and max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainPolicyReport {
    /// `(episodes trained, greedy success rate at the reward tier)`.
    pub success_curve: Vec<(usize, f64)>,
    /// Mean critic loss per training episode with updates.
    pub critic_loss: Vec<f64>,
    pub transitions: usize,
}

/// Plays one episode on `env`; returns the transitions and whether the goal was reached.
pub fn play_episode<S: Scalar, R: Rng + ?Sized>(agent: &Agent<S>, mut env: PushEnv<S>, max_steps: usize, explore: bool, rng: &mut R) -> (Vec<Transition<S>>, bool) {
    let tier = agent.config.goal_tier;
    let mut out = Vec::with_capacity(max_steps);
    for _ in 0..max_steps {
        let s = MdpState::from_env(&env);
        let a = policy_action(agent, &s, explore, rng);
        env.apply(a.to_push(&s.object).as_ref());
        let ns = MdpState::from_env(&env);
        let reward = state_reward(&ns, tier);
        let done = reward > S::zero();
        out.push(Transition { state: s, action: a, reward, next_state: ns, done, achieved_goal: ns.object });
        if done {
            break;
        }
    }
    let reached = success(&FinalError::between(&env.state().object, &env.goal), tier);
    (out, reached)
}

fn task_env<S: Scalar, R: Rng + ?Sized>(cfg: &DdpgConfig, rng: &mut R) -> Result<PushEnv<S>> {
    let (start, goal) = sample_task::<S, R>(rng, &cfg.object, &cfg.sim, &cfg.task);
    PushEnv::behind(cfg.sim, cfg.object, start, goal)
}

/// Greedy success rate on `episodes` tasks drawn from `seed`.
pub fn evaluate_policy<S: Scalar>(agent: &Agent<S>, cfg: &DdpgConfig, episodes: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = 0;
    for _ in 0..episodes {
        let env = task_env(cfg, &mut rng)?;
        ok += play_episode(agent, env, cfg.max_steps, false, &mut rng).1 as usize;
    }
    Ok(if episodes == 0 { 0.0 } else { ok as f64 / episodes as f64 })
}

/// Episodic DDPG+HER training on one object. Every episode is relabeled and stored, then
/// `updates_per_episode` minibatch updates follow.
pub fn train_policy<S: Scalar>(cfg: &DdpgConfig) -> Result<(Agent<S>, TrainPolicyReport)> {
    use crate::seed::derive_seed;
    cfg.validate()?;
    let seed = |i| derive_seed(cfg.seed, crate::seed::stream::TRAIN_POLICY, i);
    let mut agent = Agent::new(cfg.agent.clone(), seed(0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed(1));
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut report = TrainPolicyReport::default();
    for ep in 0..cfg.episodes {
        let env = task_env(cfg, &mut rng)?;
        let (transitions, _) = play_episode(&agent, env, cfg.max_steps, true, &mut rng);
        let relabeled = her_relabel(&transitions, cfg.k_future, cfg.agent.goal_tier, &mut rng);
        report.transitions += transitions.len() + relabeled.len();
        replay.extend(transitions);
        replay.extend(relabeled);
        if cfg.updates_per_episode > 0 {
            let mut loss = 0.0;
            for _ in 0..cfg.updates_per_episode {
                let batch = replay.sample(cfg.batch_size, &mut rng);
                loss += ddpg_update(&mut agent, &batch)?.critic_loss;
            }
            let loss = loss / cfg.updates_per_episode as f64;
            if !loss.is_finite() {
                return Err(Error::Diverged(ep));
            }
            report.critic_loss.push(loss);
        }
        if cfg.eval_every > 0 && (ep + 1) % cfg.eval_every == 0 {
            report.success_curve.push((ep + 1, evaluate_policy(&agent, cfg, cfg.eval_episodes, seed(2))?));
        }
    }
    Ok((agent, report))
}

/// A trained agent driving episodes of `f64` environments.
pub struct PolicySource<'a, S> {
    pub agent: &'a Agent<S>,
    pub explore: bool,
}

impl<S: Scalar> ActionSource<f64> for PolicySource<'_, S> {
    fn next_action(&mut self, env: &PushEnv<f64>, rng: &mut dyn RngCore) -> Option<PushAction<f64>> {
        let st = MdpState::from_env(env);
        let cast = MdpState { object: st.object.cast(), pusher: st.pusher.cast(), goal: st.goal.cast() };
        let a = policy_action(self.agent, &cast, self.explore, rng);
        PolicyAction { x: a.x.as_f64(), y: a.y.as_f64() }.to_push(&st.object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Pose2D;

    fn tiny() -> AgentConfig {
        AgentConfig { hidden: vec![4], ..Default::default() }
    }

    fn transition(reward: f64, done: bool) -> Transition<f64> {
        let s = MdpState { object: Pose2D::new(0.3, 0.4, 0.2), pusher: Vec2::new(0.24, 0.4), goal: Pose2D::new(0.45, 0.42, 0.3) };
        let ns = MdpState { object: Pose2D::new(0.305, 0.4, 0.21), ..s };
        Transition { state: s, action: PolicyAction { x: 0.004, y: -0.001 }, reward, next_state: ns, done, achieved_goal: ns.object }
    }

    #[test]
    fn features_are_frame_invariant() {
        let s = transition(-1.0, false).state;
        let f = features(&s);
        // rigidly move and rotate the whole scene
        let (c, sn) = (0.7f64.cos(), 0.7f64.sin());
        let tr = |p: Vec2<f64>| Vec2::new(c * p.x - sn * p.y + 0.1, sn * p.x + c * p.y - 0.2);
        let pose = |p: Pose2D<f64>| {
            let q = tr(p.position());
            Pose2D::new(q.x, q.y, p.theta + 0.7)
        };
        let moved = MdpState { object: pose(s.object), pusher: tr(s.pusher), goal: pose(s.goal) };
        for (a, b) in f.iter().zip(features(&moved)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_action_round_trip() {
        let s = transition(-1.0, false).state;
        let a = to_world_action([0.3, -0.5], &s, 0.005);
        let r = to_raw_action(&a, &s, 0.005);
        assert!((r[0] - 0.3).abs() < 1e-12 && (r[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn tau_one_copies_mains() {
        let mut agent = Agent::<f64>::new(AgentConfig { tau: 1.0, ..tiny() }, 1).unwrap();
        ddpg_update(&mut agent, &[transition(-1.0, false), transition(1.0, true)]).unwrap();
        assert_eq!(agent.actor_target, agent.actor);
        assert_eq!(agent.critic_target, agent.critic);
    }

    #[test]
    fn zero_discount_targets_are_rewards() {
        let agent = Agent::<f64>::new(AgentConfig { gamma: 0.0, ..tiny() }, 2).unwrap();
        assert_eq!(critic_targets(&agent, &[transition(-1.0, false), transition(1.0, false)]), vec![-1.0, 1.0]);
    }

    #[test]
    fn targets_are_clamped_to_return_bound() {
        let mut agent = Agent::<f64>::new(AgentConfig { gamma: 0.5, ..tiny() }, 3).unwrap();
        // a critic that always says 100
        let last = agent.critic_target.layers.len() - 1;
        agent.critic_target.layers[last].b[0] = 100.0;
        agent.critic_target.layers[last].w.fill(0.0);
        assert_eq!(critic_targets(&agent, &[transition(-1.0, false)]), vec![2.0]);
        assert_eq!(critic_targets(&agent, &[transition(-1.0, true)]), vec![-1.0]);
    }

    #[test]
    fn critic_loss_matches_hand_computed_residual() {
        // one hidden unit per net; weights chosen so every value is easy to follow
        let mut agent = Agent::<f64>::new(AgentConfig { hidden: vec![1], gamma: 0.9, ..Default::default() }, 4).unwrap();
        let set = |net: &mut Mlp<f64>, w0: f64, b0: f64, w1: f64, b1: f64| {
            net.layers[0].w.fill(w0);
            net.layers[0].b.fill(b0);
            net.layers[1].w.fill(w1);
            net.layers[1].b.fill(b1);
        };
        set(&mut agent.actor_target, 0.0, 0.0, 0.0, 0.0);
        set(&mut agent.critic_target, 0.0, 2.0, 1.5, 0.5);
        set(&mut agent.critic, 0.0, 1.0, -1.0, 0.25);
        // target net: relu(2) * 1.5 + 0.5 = 3.5; y = -1 + 0.9 * 3.5 = 2.15
        // main net: relu(1) * -1 + 0.25 = -0.75; residual^2 = 2.9^2
        let stats = ddpg_update(&mut agent, &[transition(-1.0, false)]).unwrap();
        assert!((stats.mean_target - 2.15).abs() < 1e-12);
        assert!((stats.critic_loss - 2.9 * 2.9).abs() < 1e-12);
    }

    #[test]
    fn critic_regresses_toward_fixed_targets() {
        let mut agent = Agent::<f64>::new(AgentConfig { gamma: 0.0, hidden: vec![16], critic_lr: 1e-2, ..Default::default() }, 5).unwrap();
        let batch = [transition(1.0, true), transition(1.0, false)];
        let first = ddpg_update(&mut agent, &batch).unwrap().critic_loss;
        let mut last = first;
        for _ in 0..200 {
            last = ddpg_update(&mut agent, &batch).unwrap().critic_loss;
        }
        assert!(last < 1e-3 * first, "{first} -> {last}");
    }

    #[test]
    fn actor_climbs_the_critic() {
        // critic fixed to prefer raw action x = +1: Q = a_x
        let mut agent = Agent::<f64>::new(AgentConfig { hidden: vec![8], critic_lr: 0.0, action_l2: 0.0, actor_lr: 1e-2, ..Default::default() }, 6).unwrap();
        agent.critic = Mlp {
            layers: vec![
                crate::model::Dense { w: Array2::from_shape_fn((10, 1), |(i, _)| if i == 8 { 1.0 } else { 0.0 }), b: ndarray::arr1(&[2.0]) },
                crate::model::Dense { w: Array2::from_elem((1, 1), 1.0), b: ndarray::arr1(&[-2.0]) },
            ],
            output: Activation::Identity,
        };
        agent.critic_opt = AdamState::new(&agent.critic);
        let batch = [transition(-1.0, false)];
        let s = batch[0].state;
        let before = agent.act_raw(&s)[0];
        for _ in 0..100 {
            ddpg_update(&mut agent, &batch).unwrap();
        }
        let after = agent.act_raw(&s)[0];
        assert!(after > before + 0.5, "{before} -> {after}");
    }

    #[test]
    fn exploration_is_bounded_and_has_the_configured_noise() {
        let agent = Agent::<f64>::new(AgentConfig { noise_std: 0.05, random_eps: 0.0, ..tiny() }, 7).unwrap();
        let mut s = transition(-1.0, false).state;
        s.object.theta = 0.0;
        let mean = agent.act_raw(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| policy_action(&agent, &s, true, &mut rng).x / 0.005 - mean[0]).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64).sqrt();
        assert!((sd / 0.05 - 1.0).abs() < 0.03, "{sd}");
        assert!(m.abs() < 2e-3);
        let wild = Agent::<f64>::new(AgentConfig { noise_std: 1e6, random_eps: 0.5, ..tiny() }, 7).unwrap();
        for _ in 0..1000 {
            let a = policy_action(&wild, &s, true, &mut rng);
            assert!(a.x.abs() <= 0.005 && a.y.abs() <= 0.005);
        }
        let greedy = policy_action(&agent, &s, false, &mut rng);
        assert_eq!(greedy, policy_action(&agent, &s, false, &mut rng));
    }

    #[test]
    fn zero_episodes_returns_initialization() {
        let cfg = DdpgConfig { agent: tiny(), episodes: 0, seed: 9, ..Default::default() };
        let (agent, report) = train_policy::<f64>(&cfg).unwrap();
        let fresh = Agent::<f64>::new(tiny(), crate::seed::derive_seed(9, crate::seed::stream::TRAIN_POLICY, 0)).unwrap();
        assert_eq!(agent, fresh);
        assert!(report.success_curve.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = DdpgConfig { agent: AgentConfig { hidden: vec![16, 16], ..Default::default() }, episodes: 6, updates_per_episode: 5, batch_size: 32, eval_every: 3, eval_episodes: 2, seed: 10, ..Default::default() };
        let (a, ra) = train_policy::<f64>(&cfg).unwrap();
        let (b, rb) = train_policy::<f64>(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(ra.success_curve.len(), 2);
        assert!(a.actor.num_params() > 0);
    }
}
