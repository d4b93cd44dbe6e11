//! The pipeline commands. Each one is a function of (config, input files, seed) and
//! rewrites its outputs identically on every run; the returned string is a summary for
//! the terminal.
//!
//! Files written besides the core formats:
//!
//! ```text
//! <weights>.curve   rmppi-curve v1 config=<hash> steps=<n> best_step=<s>
//!                   train <step> <loss>
//!                   validation <step> <loss>
//! <agent>.curve     rmppi-policy-curve v1 config=<hash> episodes=<n> transitions=<n>
//!                   success <episodes trained> <rate>
//!                   critic <episode> <mean loss>
//! goals file        rmppi-goals v1 config=<hash> tasks=<n>
//!                   task <name> start <x> <y> <theta> goal <x> <y> <theta>
//! push report       rmppi-push v1 config=<hash> model=<hash> seed=<seed> episodes=<n>
//!                   episode <object> <task> steps <n> terminal <kind>
//!                       error <e_x> <e_y> <e_theta> score <s> success <tight> <mid> <loose>
//! comparison        rmppi-comparison v1 config=<hash> model=<hash> agent=<hash> seed=<seed>
//!                   followed by the rendered table
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rmppi_core::control::{control_episode, write_rollout_dump, Dynamics, GoalSpec};
use rmppi_core::dataset::format::{read_dataset, write_dataset};
use rmppi_core::dataset::{build_training_set, collect_episode, sample_object, Episode, TrainingSequence};
use rmppi_core::eval::{
    comparison_table, parallel_map, run_benchmark, score, success, sweep_kt, BenchmarkReport, Fixture, FinalError, RmppiController,
    SourceController, ThresholdTier,
};
use rmppi_core::model::{read_weights, train, write_weights, ModelWeights, TrainingCurve};
use rmppi_core::policy::{read_agent, train_policy, write_agent, ActionSource, Agent, PolicySource, ScriptedGenerator, TrainPolicyReport};
use rmppi_core::seed::stream;
use rmppi_core::sim::{Pose2D, PushEnv};
use rmppi_core::textfmt::{num, Tokens};
use rmppi_core::Scalar;

use crate::config::{Config, Precision};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

/// Runs `write` into a fresh file at `path`, labelling failures with the path.
fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> rmppi_core::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    write(&mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn warn_hash(what: &str, found: &str, cfg: &Config) {
    if found != cfg.hash() {
        eprintln!("warning: {what} was produced under config {found}, current config is {}", cfg.hash());
    }
}

pub fn load_model<S: Scalar>(path: &Path) -> Result<(String, ModelWeights<S>)> {
    read_weights(open(path)?).map_err(|e| io_err(path, e))
}

/// Agents are always evaluated in `f64`.
pub fn load_agent(path: &Path) -> Result<(String, Agent<f64>)> {
    read_agent(open(path)?).map_err(|e| io_err(path, e))
}

/// Samples `dataset.objects` objects and records `dataset.episodes_per_object` episodes on
/// each. Object `i` draws everything from its own derived seed, so `jobs` never changes
/// the output.
pub fn collect(cfg: &Config, out: &Path, agent: Option<&Path>, jobs: usize) -> Result<String> {
    let collect = cfg.collect_config()?;
    let ranges = cfg.param_ranges()?;
    let policy = match (cfg.dataset.generator.as_str(), agent) {
        ("policy", Some(p)) => {
            let (hash, a) = load_agent(p)?;
            warn_hash("agent", &hash, cfg);
            Some(a)
        }
        ("policy", None) => return Err(CliError::Config("dataset.generator = \"policy\" needs --agent".into())),
        _ => None,
    };
    let scripted = ScriptedGenerator { noise_std: cfg.dataset.generator_noise, push_magnitude: cfg.control.push_magnitude, ..Default::default() };
    let per_object = parallel_map(cfg.dataset.objects, jobs, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.component_seed(stream::COLLECT, i as u32));
        let params = sample_object(&mut rng, &ranges);
        let mut gen: Box<dyn ActionSource<f64>> = match &policy {
            Some(a) => Box::new(PolicySource { agent: a, explore: true }),
            None => Box::new(scripted),
        };
        (0..cfg.dataset.episodes_per_object).map(|_| collect_episode::<f64, _, _>(&params, gen.as_mut(), &mut rng, &collect)).collect::<rmppi_core::Result<Vec<_>>>()
    })?;
    let episodes: Vec<Episode<f64>> = per_object.into_iter().flatten().collect();
    write_file(out, |w| write_dataset(w, &cfg.hash(), &episodes))?;
    let steps: usize = episodes.iter().map(|e| e.steps.len()).sum();
    let reached = episodes.iter().filter(|e| e.terminal == rmppi_core::dataset::Terminal::GoalReached).count();
    let windows = build_training_set(&episodes, cfg.model.history_k).map(|s| s.len()).unwrap_or(0);
    Ok(format!(
        "collected {} episodes on {} objects: {steps} pushes, {reached} reached the goal, {windows} training windows at K={}\nwrote {}",
        episodes.len(),
        cfg.dataset.objects,
        cfg.model.history_k,
        out.display()
    ))
}

fn cast_set<S: Scalar>(set: &[TrainingSequence<f64>]) -> Vec<TrainingSequence<S>> {
    set.iter().map(|s| TrainingSequence { input: s.input.iter().map(|t| t.cast()).collect(), target: s.target.map(S::lit) }).collect()
}

fn write_curve(path: &Path, cfg: &Config, curve: &TrainingCurve) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "rmppi-curve v1 config={} steps={} best_step={}", cfg.hash(), curve.train_loss.len(), curve.best_step)?;
        for (i, l) in curve.train_loss.iter().enumerate() {
            writeln!(w, "train {} {}", i + 1, num(*l))?;
        }
        for (s, l) in &curve.validation {
            writeln!(w, "validation {s} {}", num(*l))?;
        }
        Ok(())
    })
}

fn train_and_write<S: Scalar>(set: &[TrainingSequence<f64>], cfg: &Config, out: &Path) -> Result<TrainingCurve> {
    let (weights, curve) = train(&cast_set::<S>(set), &cfg.train_config())?;
    write_file(out, |w| write_weights(w, &weights, &cfg.hash()))?;
    Ok(curve)
}

/// Windows the dataset at `model.history_k` and trains the network. The learning curve is
/// written next to the weights as `<out>.curve`.
pub fn train_model(cfg: &Config, dataset: &Path, out: &Path) -> Result<String> {
    let (hash, episodes) = read_dataset::<f64, _>(open(dataset)?).map_err(|e| io_err(dataset, e))?;
    warn_hash("dataset", &hash, cfg);
    let k = cfg.model.history_k;
    let set = build_training_set(&episodes, k)?;
    if set.is_empty() {
        return Err(CliError::Config(format!("no episode in {} is long enough for windows of K + 1 = {} tuples", dataset.display(), k + 1)));
    }
    let curve = match cfg.model_precision() {
        Precision::F32 => train_and_write::<f32>(&set, cfg, out)?,
        Precision::F64 => train_and_write::<f64>(&set, cfg, out)?,
    };
    let curve_path = with_suffix(out, ".curve");
    write_curve(&curve_path, cfg, &curve)?;
    let best = curve.validation.iter().find(|(s, _)| *s == curve.best_step).map(|v| v.1);
    Ok(format!(
        "trained on {} windows (K={k}) for {} steps; best validation loss {} at step {}\nwrote {} and {}",
        set.len(),
        curve.train_loss.len(),
        best.map(num).unwrap_or_else(|| "-".into()),
        curve.best_step,
        out.display(),
        curve_path.display()
    ))
}

fn policy_curve(path: &Path, cfg: &Config, report: &TrainPolicyReport) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "rmppi-policy-curve v1 config={} episodes={} transitions={}", cfg.hash(), cfg.policy.episodes, report.transitions)?;
        for (e, r) in &report.success_curve {
            writeln!(w, "success {e} {}", num(*r))?;
        }
        for (i, l) in report.critic_loss.iter().enumerate() {
            writeln!(w, "critic {} {}", i + 1, num(*l))?;
        }
        Ok(())
    })
}

fn train_policy_as<S: Scalar>(cfg: &Config, out: &Path) -> Result<TrainPolicyReport> {
    let (agent, report) = train_policy::<S>(&cfg.ddpg_config(cfg.seed)?)?;
    write_file(out, |w| write_agent(w, &agent, &cfg.hash()))?;
    Ok(report)
}

/// DDPG with hindsight relabeling on the prototype object.
pub fn train_policy_cmd(cfg: &Config, out: &Path) -> Result<String> {
    let report = match cfg.policy_precision() {
        Precision::F32 => train_policy_as::<f32>(cfg, out)?,
        Precision::F64 => train_policy_as::<f64>(cfg, out)?,
    };
    let curve_path = with_suffix(out, ".curve");
    policy_curve(&curve_path, cfg, &report)?;
    let last = report.success_curve.last().map(|(e, r)| format!("greedy success {:.1}% after {e} episodes", 100.0 * r)).unwrap_or_else(|| "no evaluation".into());
    Ok(format!("trained {} episodes, {} transitions; {last}\nwrote {} and {}", cfg.policy.episodes, report.transitions, out.display(), curve_path.display()))
}

/// A named start/goal pair from a goals file.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub start: Pose2D<f64>,
    pub goal: Pose2D<f64>,
}

/// Left, middle and right arc goals from the `eval.goals_*` settings.
pub fn default_tasks(cfg: &Config) -> Vec<Task> {
    let [x, y, t] = cfg.eval.goals_start;
    let start = Pose2D::new(x, y, t);
    rmppi_core::eval::named_goals(&start, cfg.eval.goals_length, cfg.eval.goals_turn).into_iter().map(|(n, goal)| Task { name: n.into(), start, goal }).collect()
}

pub fn write_tasks<W: Write>(mut w: W, cfg: &Config, tasks: &[Task]) -> rmppi_core::Result<()> {
    writeln!(w, "rmppi-goals v1 config={} tasks={}", cfg.hash(), tasks.len())?;
    for t in tasks {
        let p = |p: &Pose2D<f64>| format!("{} {} {}", num(p.x), num(p.y), num(p.theta));
        writeln!(w, "task {} start {} goal {}", t.name, p(&t.start), p(&t.goal))?;
    }
    Ok(())
}

pub fn read_tasks<R: BufRead>(r: R) -> rmppi_core::Result<Vec<Task>> {
    let bad = |d: String| rmppi_core::Error::Format { what: "goals file", detail: d };
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    if !header.starts_with("rmppi-goals v1") {
        return Err(bad(format!("bad header `{header}`")));
    }
    let mut tasks = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut t = Tokens::new(&line, "goals file");
        t.expect("task")?;
        let name = t.word()?.to_string();
        t.expect("start")?;
        let start = Pose2D::new(t.f64()?, t.f64()?, t.f64()?);
        t.expect("goal")?;
        let goal = Pose2D::new(t.f64()?, t.f64()?, t.f64()?);
        t.finish()?;
        tasks.push(Task { name, start, goal });
    }
    if tasks.is_empty() {
        return Err(bad("no tasks".into()));
    }
    Ok(tasks)
}

/// Writes the default left/middle/right goals file.
pub fn goals(cfg: &Config, out: &Path) -> Result<String> {
    let tasks = default_tasks(cfg);
    write_file(out, |w| write_tasks(w, cfg, &tasks))?;
    Ok(format!("wrote {} tasks to {}", tasks.len(), out.display()))
}

fn push_with<D: Dynamics>(cfg: &Config, model: &D, model_hash: &str, tasks: &[Task], out: &Path, dump: bool, jobs: usize) -> Result<String> {
    let fixtures = cfg.fixtures()?;
    let control = cfg.rmppi_config()?;
    let sim = cfg.sim_config();
    let runs: Vec<(usize, usize)> = (0..fixtures.len()).flat_map(|o| (0..tasks.len()).map(move |t| (o, t))).collect();
    let results = parallel_map(runs.len(), jobs, |i| {
        let (o, t) = runs[i];
        let task = &tasks[t];
        let env = PushEnv::behind(sim, fixtures[o].params, task.start, task.goal)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.component_seed(stream::PUSH, i as u32));
        let mut records = Vec::new();
        let ep = control_episode(env, model, &GoalSpec::new(task.goal), &control, &mut rng, dump.then_some(&mut records))?;
        Ok((ep, records))
    })?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let hash = cfg.hash();
    let episodes: Vec<Episode<f64>> = results.iter().map(|r| r.0.clone()).collect();
    write_file(&out.join("traces.txt"), |w| write_dataset(w, &hash, &episodes))?;
    let mut summary = String::new();
    write_file(&out.join("report.txt"), |w| {
        writeln!(w, "rmppi-push v1 config={hash} model={model_hash} seed={} episodes={}", cfg.seed, episodes.len())?;
        for (&(o, t), ep) in runs.iter().zip(&episodes) {
            let err: FinalError<f64> = ep.final_error();
            let flag = |tier| if success(&err, tier) { "1" } else { "0" };
            writeln!(
                w,
                "episode {} {} steps {} terminal {} error {} {} {} score {} success {} {} {}",
                fixtures[o].name,
                tasks[t].name,
                ep.steps.len(),
                ep.terminal.name(),
                num(err.e_x),
                num(err.e_y),
                num(err.e_theta),
                num(score(&err)),
                flag(ThresholdTier::Tight),
                flag(ThresholdTier::Mid),
                flag(ThresholdTier::Loose)
            )?;
            summary.push_str(&format!(
                "{:<4} {:<8} {:>3} steps  {:<11}  e_x {:.4}  e_y {:.4}  e_theta {:.4}\n",
                fixtures[o].name,
                tasks[t].name,
                ep.steps.len(),
                ep.terminal.name(),
                err.e_x,
                err.e_y,
                err.e_theta
            ));
        }
        Ok(())
    })?;
    if dump {
        let dir = out.join("rollouts");
        for (&(o, t), r) in runs.iter().zip(&results) {
            write_file(&dir.join(format!("{}_{}.txt", fixtures[o].name, tasks[t].name)), |w| write_rollout_dump(w, &hash, &r.1))?;
        }
    }
    summary.push_str(&format!("wrote {}", out.display()));
    Ok(summary)
}

/// Runs RMPPI from every task of the goals file on every `eval.objects` fixture.
pub fn push(cfg: &Config, model: &Path, goals_file: &Path, out: &Path, dump: bool, jobs: usize) -> Result<String> {
    let tasks = read_tasks(open(goals_file)?).map_err(|e| io_err(goals_file, e))?;
    match cfg.model_precision() {
        Precision::F32 => {
            let (h, m) = load_model::<f32>(model)?;
            warn_hash("model", &h, cfg);
            push_with(cfg, &m, &h, &tasks, out, dump, jobs)
        }
        Precision::F64 => {
            let (h, m) = load_model::<f64>(model)?;
            warn_hash("model", &h, cfg);
            push_with(cfg, &m, &h, &tasks, out, dump, jobs)
        }
    }
}

/// Randomized objects for the sweep, drawn from the dataset parameter ranges.
pub fn sweep_objects(cfg: &Config) -> Result<Vec<Fixture>> {
    let ranges = cfg.param_ranges()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.component_seed(stream::OBJECTS, 0));
    Ok((0..cfg.eval.sweep_objects).map(|i| Fixture { name: format!("R{i:03}"), params: sample_object(&mut rng, &ranges) }).collect())
}

/// Path of the `K` model inside a sweep directory.
pub fn sweep_model_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("model_k{k}.bin"))
}

fn sweep_with<S: Scalar>(cfg: &Config, dir: &Path, out: &Path, jobs: usize) -> Result<String> {
    let mut models = Vec::new();
    for &k in &cfg.eval.sweep_k {
        let path = sweep_model_path(dir, k);
        if !path.exists() {
            return Err(CliError::Io(format!("{}: missing weights for K={k}", path.display())));
        }
        let (h, m) = load_model::<S>(&path)?;
        if h != cfg.hash() {
            eprintln!("note: {} was trained under config {h}", path.display());
        }
        models.push((k, m));
    }
    let refs: Vec<(usize, &ModelWeights<S>)> = models.iter().map(|(k, m)| (*k, m)).collect();
    let objects = sweep_objects(cfg)?;
    let bench = cfg.benchmark_config(cfg.seed, cfg.eval.sweep_episodes, jobs);
    let grid = sweep_kt(&refs, &cfg.eval.sweep_t, &cfg.rmppi_config()?, &objects, &bench)?;
    write_file(out, |w| grid.write(w, &cfg.hash()))?;
    let mut text = String::from("K\\T");
    for t in &grid.ts {
        text.push_str(&format!(" {t:>8}"));
    }
    text.push('\n');
    for (k, row) in grid.ks.iter().zip(&grid.scores) {
        text.push_str(&format!("{k:<3}"));
        for s in row {
            text.push_str(&format!(" {s:>8.3}"));
        }
        text.push('\n');
    }
    if let Some((k, t, s)) = grid.best() {
        text.push_str(&format!("best K={k} T={t} score {s:.3}\n"));
    }
    text.push_str(&format!("wrote {}", out.display()));
    Ok(text)
}

/// Mean benchmark score for every `(K, T)` in `eval.sweep_k x eval.sweep_t`, using
/// `<dir>/model_k<K>.bin` for each `K`.
pub fn sweep(cfg: &Config, dir: &Path, out: &Path, jobs: usize) -> Result<String> {
    match cfg.model_precision() {
        Precision::F32 => sweep_with::<f32>(cfg, dir, out, jobs),
        Precision::F64 => sweep_with::<f64>(cfg, dir, out, jobs),
    }
}

fn eval_with<D: Dynamics>(cfg: &Config, model: &D, model_hash: &str, agent: &Agent<f64>, agent_hash: &str, out: &Path, jobs: usize) -> Result<String> {
    let fixtures = cfg.fixtures()?;
    let bench = cfg.benchmark_config(cfg.seed, cfg.eval.episodes_per_object, jobs);
    let control = cfg.rmppi_config()?;
    let (max_steps, goal_tier) = (control.max_steps, control.goal_tier);
    let rm: BenchmarkReport = run_benchmark(&RmppiController { model, config: control }, &fixtures, &bench)?;
    let baseline = SourceController { name: "ddpg".into(), make: || PolicySource { agent, explore: false }, max_steps, goal_tier };
    let pol = run_benchmark(&baseline, &fixtures, &bench)?;
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_file(&out.join("rmppi.txt"), |w| rm.write(w))?;
    write_file(&out.join("ddpg.txt"), |w| pol.write(w))?;
    let table = comparison_table(&[&rm, &pol], &cfg.tiers());
    write_file(&out.join("comparison.txt"), |w| {
        writeln!(w, "rmppi-comparison v1 config={} model={model_hash} agent={agent_hash} seed={}", cfg.hash(), cfg.seed)?;
        w.write_all(table.as_bytes())?;
        Ok(())
    })?;
    Ok(format!("{table}wrote {}", out.display()))
}

/// RMPPI against the model-free policy on the `eval.objects` fixtures, same tasks and seeds.
pub fn eval(cfg: &Config, model: &Path, agent: &Path, out: &Path, jobs: usize) -> Result<String> {
    let (agent_hash, agent) = load_agent(agent)?;
    warn_hash("agent", &agent_hash, cfg);
    let check = |model_hash: &str| {
        warn_hash("model", model_hash, cfg);
        if model_hash != agent_hash {
            eprintln!("warning: model (config {model_hash}) and agent (config {agent_hash}) come from different configs");
        }
    };
    match cfg.model_precision() {
        Precision::F32 => {
            let (h, m) = load_model::<f32>(model)?;
            check(&h);
            eval_with(cfg, &m, &h, &agent, &agent_hash, out, jobs)
        }
        Precision::F64 => {
            let (h, m) = load_model::<f64>(model)?;
            check(&h);
            eval_with(cfg, &m, &h, &agent, &agent_hash, out, jobs)
        }
    }
}
