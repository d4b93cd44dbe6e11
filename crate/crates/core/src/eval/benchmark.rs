//! Seeded benchmark runs over a set of objects.
//!
//! Report file, one record per line:
//!
//! ```text
//! rmppi-benchmark v1 controller=<name> config=<hash> seed=<seed> objects=<n> episodes=<per object>
//! episode <object> <index> steps <n> error <e_x> <e_y> <e_theta> score <s> success <tight> <mid> <loose>
//! object <name> episodes <n> rate <tight> <mid> <loose> score <mean>
//! ```
//!
//! `success` flags are `0`/`1`; rates are fractions in `[0, 1]`. All `episode` lines come
//! first, sorted by object then episode index, followed by one `object` line per object.

use std::fmt::Write as _;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixtures::{sample_task, Fixture, TaskSpec};
use super::metrics::{score, success, FinalError, ThresholdTier};
use crate::control::{control_episode, Dynamics, GoalSpec, RmppiConfig};
use crate::dataset::{run_episode, Episode};
use crate::error::{Error, Result};
use crate::policy::ActionSource;
use crate::seed::{derive_seed, stream};
use crate::sim::{PushAction, PushEnv, SimConfig, Vec2, DEFAULT_PUSH_MAGNITUDE};
use crate::textfmt::num;

/// Runs one episode from a prepared environment. `seed` drives any randomness.
pub trait Controller: Sync {
    fn name(&self) -> String;
    fn run(&self, env: PushEnv<f64>, seed: u64) -> Result<Episode<f64>>;
}

/// RMPPI with a given dynamics model.
pub struct RmppiController<'a, D: ?Sized> {
    pub model: &'a D,
    pub config: RmppiConfig,
}

impl<D: Dynamics + ?Sized> Controller for RmppiController<'_, D> {
    fn name(&self) -> String {
        "rmppi".into()
    }

    fn run(&self, env: PushEnv<f64>, seed: u64) -> Result<Episode<f64>> {
        let goal = GoalSpec::new(env.goal);
        control_episode(env, self.model, &goal, &self.config, &mut ChaCha8Rng::seed_from_u64(seed), None)
    }
}

/// Runs an [`ActionSource`] built fresh for every episode.
pub struct SourceController<F> {
    pub name: String,
    pub make: F,
    pub max_steps: usize,
    pub goal_tier: ThresholdTier,
}

impl<F, A> Controller for SourceController<F>
where
    F: Fn() -> A + Sync,
    A: ActionSource<f64>,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn run(&self, env: PushEnv<f64>, seed: u64) -> Result<Episode<f64>> {
        let mut source = (self.make)();
        Ok(run_episode(env, &mut source, &mut ChaCha8Rng::seed_from_u64(seed), self.max_steps, self.goal_tier))
    }
}

/// Pushes in a uniformly random object-frame direction.
#[derive(Debug, Clone, Copy)]
pub struct RandomPushes {
    pub push_magnitude: f64,
}

impl Default for RandomPushes {
    fn default() -> Self {
        Self { push_magnitude: DEFAULT_PUSH_MAGNITUDE }
    }
}

impl ActionSource<f64> for RandomPushes {
    fn next_action(&mut self, _env: &PushEnv<f64>, rng: &mut dyn RngCore) -> Option<PushAction<f64>> {
        let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        PushAction::new(Vec2::new(a.cos(), a.sin()), self.push_magnitude)
    }
}

/// Never moves the pusher.
#[derive(Debug, Clone, Copy, Default)]
pub struct Idle;

impl ActionSource<f64> for Idle {
    fn next_action(&mut self, _env: &PushEnv<f64>, _rng: &mut dyn RngCore) -> Option<PushAction<f64>> {
        None
    }
}

pub fn random_controller(max_steps: usize, goal_tier: ThresholdTier) -> SourceController<impl Fn() -> RandomPushes + Sync> {
    SourceController { name: "random".into(), make: RandomPushes::default, max_steps, goal_tier }
}

pub fn idle_controller(max_steps: usize, goal_tier: ThresholdTier) -> SourceController<impl Fn() -> Idle + Sync> {
    SourceController { name: "idle".into(), make: || Idle, max_steps, goal_tier }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub episodes_per_object: usize,
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    pub sim: SimConfig,
    pub task: TaskSpec,
    /// Hash of the configuration that produced the run, copied into the report.
    pub config_hash: String,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self { episodes_per_object: 20, seed: 0, jobs: 1, sim: SimConfig::default(), task: TaskSpec::default(), config_hash: "none".into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub index: usize,
    pub steps: usize,
    pub error: FinalError<f64>,
    pub score: f64,
}

impl EpisodeResult {
    pub fn success(&self, tier: ThresholdTier) -> bool {
        success(&self.error, tier)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectReport {
    pub name: String,
    pub episodes: Vec<EpisodeResult>,
    /// Full trajectories in episode order.
    pub traces: Vec<Episode<f64>>,
}

impl ObjectReport {
    pub fn success_rate(&self, tier: ThresholdTier) -> f64 {
        rate(self.episodes.iter(), tier)
    }

    pub fn mean_score(&self) -> f64 {
        mean(self.episodes.iter().map(|e| e.score))
    }
}

fn rate<'a>(eps: impl Iterator<Item = &'a EpisodeResult>, tier: ThresholdTier) -> f64 {
    let (mut ok, mut n) = (0usize, 0usize);
    for e in eps {
        n += 1;
        ok += e.success(tier) as usize;
    }
    if n == 0 {
        0.0
    } else {
        ok as f64 / n as f64
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub controller: String,
    pub config_hash: String,
    pub seed: u64,
    pub episodes_per_object: usize,
    /// In the order the objects were given.
    pub objects: Vec<ObjectReport>,
}

impl BenchmarkReport {
    pub fn object(&self, name: &str) -> Option<&ObjectReport> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// Success rate over every episode of every object.
    pub fn success_rate(&self, tier: ThresholdTier) -> f64 {
        rate(self.objects.iter().flat_map(|o| &o.episodes), tier)
    }

    pub fn mean_score(&self) -> f64 {
        mean(self.objects.iter().flat_map(|o| &o.episodes).map(|e| e.score))
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("controller {}  seed {}  episodes/object {}\n", self.controller, self.seed, self.episodes_per_object);
        let _ = writeln!(out, "{:<8} {:>8} {:>8} {:>8} {:>12}", "object", "tight", "mid", "loose", "mean score");
        for o in &self.objects {
            let r = |t| 100.0 * o.success_rate(t);
            let _ = writeln!(
                out,
                "{:<8} {:>7.1}% {:>7.1}% {:>7.1}% {:>12.3}",
                o.name,
                r(ThresholdTier::Tight),
                r(ThresholdTier::Mid),
                r(ThresholdTier::Loose),
                o.mean_score()
            );
        }
        out
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "rmppi-benchmark v1 controller={} config={} seed={} objects={} episodes={}",
            self.controller,
            self.config_hash,
            self.seed,
            self.objects.len(),
            self.episodes_per_object
        )?;
        let flag = |b: bool| if b { 1 } else { 0 };
        for o in &self.objects {
            for e in &o.episodes {
                writeln!(
                    w,
                    "episode {} {} steps {} error {} {} {} score {} success {} {} {}",
                    o.name,
                    e.index,
                    e.steps,
                    num(e.error.e_x),
                    num(e.error.e_y),
                    num(e.error.e_theta),
                    num(e.score),
                    flag(e.success(ThresholdTier::Tight)),
                    flag(e.success(ThresholdTier::Mid)),
                    flag(e.success(ThresholdTier::Loose))
                )?;
            }
        }
        for o in &self.objects {
            writeln!(
                w,
                "object {} episodes {} rate {} {} {} score {}",
                o.name,
                o.episodes.len(),
                num(o.success_rate(ThresholdTier::Tight)),
                num(o.success_rate(ThresholdTier::Mid)),
                num(o.success_rate(ThresholdTier::Loose)),
                num(o.mean_score())
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Side-by-side success rates of several reports over the same objects, one row per
/// tier and controller.
pub fn comparison_table(reports: &[&BenchmarkReport], tiers: &[ThresholdTier]) -> String {
    let Some(first) = reports.first() else { return String::new() };
    let mut out = format!("{:<8} {:<10}", "tier", "method");
    for o in &first.objects {
        let _ = write!(out, " {:>8}", o.name);
    }
    out.push('\n');
    for &tier in tiers {
        for r in reports {
            let _ = write!(out, "{:<8} {:<10}", tier.name(), r.controller);
            for o in &first.objects {
                match r.object(&o.name) {
                    Some(x) => {
                        let _ = write!(out, " {:>7.1}%", 100.0 * x.success_rate(tier));
                    }
                    None => out.push_str("        -"),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Seeds of task `episode` on object `object`: `(task, control)`.
pub fn task_seeds(seed: u64, object: usize, episode: usize) -> (u64, u64) {
    let index = ((object as u32) << 20) | episode as u32;
    (derive_seed(seed, stream::BENCHMARK_TASKS, index), derive_seed(seed, stream::BENCHMARK_CONTROL, index))
}

/// Start environment of one benchmark task; identical for every controller.
pub fn benchmark_env(fixture: &Fixture, object: usize, episode: usize, cfg: &BenchmarkConfig) -> Result<PushEnv<f64>> {
    let (task_seed, _) = task_seeds(cfg.seed, object, episode);
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed);
    let (start, goal) = sample_task(&mut rng, &fixture.params, &cfg.sim, &cfg.task);
    PushEnv::behind(cfg.sim, fixture.params, start, goal)
}

/// Maps `f` over `0..n` on `jobs` threads and returns the results in index order.
pub fn parallel_map<T: Send, F: Fn(usize) -> Result<T> + Sync>(n: usize, jobs: usize, f: F) -> Result<Vec<T>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= n {
            break;
        }
        let r = f(i);
        slots.lock().unwrap()[i] = Some(r);
    };
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(&worker);
            }
        });
    }
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every index is visited")).collect()
}

/// Runs `episodes_per_object` seeded tasks on every object. Tasks depend only on the seed,
/// the object position in `objects` and the episode index.
pub fn run_benchmark<C: Controller + ?Sized>(controller: &C, objects: &[Fixture], cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if objects.is_empty() {
        return Err(Error::Empty("benchmark object set"));
    }
    let per = cfg.episodes_per_object;
    let runs = parallel_map(objects.len() * per, cfg.jobs, |i| {
        let (o, e) = (i / per, i % per);
        let env = benchmark_env(&objects[o], o, e, cfg)?;
        let (_, control_seed) = task_seeds(cfg.seed, o, e);
        controller.run(env, control_seed)
    })?;
    let mut runs = runs.into_iter();
    let objects = objects
        .iter()
        .map(|f| {
            let traces: Vec<Episode<f64>> = runs.by_ref().take(per).collect();
            let episodes = traces
                .iter()
                .enumerate()
                .map(|(index, ep)| {
                    let error = ep.final_error();
                    EpisodeResult { index, steps: ep.steps.len(), error, score: score(&error) }
                })
                .collect();
            ObjectReport { name: f.name.clone(), episodes, traces }
        })
        .collect();
    Ok(BenchmarkReport { controller: controller.name(), config_hash: cfg.config_hash.clone(), seed: cfg.seed, episodes_per_object: per, objects })
}

/// Mean benchmark score per `(K, T)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    pub ks: Vec<usize>,
    pub ts: Vec<usize>,
    /// `scores[i][j]` belongs to `ks[i]`, `ts[j]`.
    pub scores: Vec<Vec<f64>>,
}

impl ScoreGrid {
    pub fn get(&self, k: usize, t: usize) -> Option<f64> {
        let i = self.ks.iter().position(|&v| v == k)?;
        let j = self.ts.iter().position(|&v| v == t)?;
        Some(self.scores[i][j])
    }

    /// Cell with the highest score: `(K, T, score)`.
    pub fn best(&self) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, row) in self.scores.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                if best.map_or(true, |b| s > b.2) {
                    best = Some((self.ks[i], self.ts[j], s));
                }
            }
        }
        best
    }

    /// `rmppi-sweep v1 config=<hash>`, a header row `K\T t_1 .. t_m`, then one row per K.
    pub fn write<W: Write>(&self, mut w: W, config_hash: &str) -> Result<()> {
        writeln!(w, "rmppi-sweep v1 config={config_hash} ks={} ts={}", self.ks.len(), self.ts.len())?;
        let mut head = String::from("K\\T");
        for t in &self.ts {
            let _ = write!(head, " {t}");
        }
        writeln!(w, "{head}")?;
        for (k, row) in self.ks.iter().zip(&self.scores) {
            let mut line = k.to_string();
            for s in row {
                line.push(' ');
                line.push_str(&num(*s));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the same benchmark for every `(K, T)` pair. `models` pairs each K with the model
/// trained on windows of `K + 1` tuples.
pub fn sweep_kt<D: Dynamics>(models: &[(usize, &D)], horizons: &[usize], base: &RmppiConfig, objects: &[Fixture], cfg: &BenchmarkConfig) -> Result<ScoreGrid> {
    if models.is_empty() || horizons.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    let mut scores = Vec::with_capacity(models.len());
    for &(k, model) in models {
        let mut row = Vec::with_capacity(horizons.len());
        for &t in horizons {
            let controller = RmppiController { model, config: RmppiConfig { history_k: k, horizon: t, ..base.clone() } };
            row.push(run_benchmark(&controller, objects, cfg)?.mean_score());
        }
        scores.push(row);
    }
    Ok(ScoreGrid { ks: models.iter().map(|m| m.0).collect(), ts: horizons.to_vec(), scores })
}
