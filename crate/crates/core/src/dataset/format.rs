//! Line-oriented dataset file.
//!
//! ```text
//! rmppi-dataset v1 config=<hash> episodes=<count>
//! episode <index> params <length> <width> <height> <mass> <mu_slide> <mu_rot> <damping>
//!     start <x> <y> <theta> goal <x> <y> <theta> terminal <GoalReached|StepLimit>
//!     final <obj_x> <obj_y> <obj_theta> <pusher_x> <pusher_y> <contact>
//!     steps <n> { <obj_x> <obj_y> <obj_theta> <pusher_x> <pusher_y> <contact>
//!                 <dir_x> <dir_y> <magnitude>
//!                 <dx> <dy> <dtheta> <px> <py> <ax> <ay> } * n
//! ```
//!
//! Each episode is one line (wrapped above for reading). Reals are rendered with 9
//! significant digits (`5.00000000e-3`), `contact` is `0` or `1`, tokens are separated by
//! single spaces.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{Episode, EpisodeStep, StateTuple, Terminal};
use crate::error::{Error, Result};
use crate::sim::{ObjectParams, Pose2D, PushAction, Vec2, WorldState};
use crate::textfmt::{num, Tokens};
use crate::Scalar;

pub const MAGIC: &str = "rmppi-dataset";
pub const VERSION: u32 = 1;

fn push_nums(out: &mut String, values: &[f64]) {
    for v in values {
        out.push(' ');
        out.push_str(&num(*v));
    }
}

fn push_world<S: Scalar>(out: &mut String, w: &WorldState<S>) {
    push_nums(out, &[w.object.x.as_f64(), w.object.y.as_f64(), w.object.theta.as_f64(), w.pusher.x.as_f64(), w.pusher.y.as_f64()]);
    out.push_str(if w.in_contact { " 1" } else { " 0" });
}

/// Renders one episode record (without the trailing newline).
pub fn episode_record<S: Scalar>(index: usize, ep: &Episode<S>) -> String {
    let mut out = String::with_capacity(256 + ep.steps.len() * 260);
    let _ = write!(out, "episode {index} params");
    let p = &ep.params;
    push_nums(&mut out, &[p.length, p.width, p.height, p.mass, p.mu_slide, p.mu_rot, p.damping]);
    out.push_str(" start");
    push_nums(&mut out, &[ep.start.x.as_f64(), ep.start.y.as_f64(), ep.start.theta.as_f64()]);
    out.push_str(" goal");
    push_nums(&mut out, &[ep.goal.x.as_f64(), ep.goal.y.as_f64(), ep.goal.theta.as_f64()]);
    let _ = write!(out, " terminal {} final", ep.terminal.name());
    push_world(&mut out, &ep.final_state);
    let _ = write!(out, " steps {}", ep.steps.len());
    for s in &ep.steps {
        push_world(&mut out, &s.state);
        push_nums(&mut out, &[s.action.direction.x.as_f64(), s.action.direction.y.as_f64(), s.action.magnitude.as_f64()]);
        push_nums(&mut out, &s.tuple.to_array().map(|v| v.as_f64()));
    }
    out
}

pub fn header(config_hash: &str, episodes: usize) -> String {
    format!("{MAGIC} v{VERSION} config={config_hash} episodes={episodes}")
}

pub fn write_dataset<S: Scalar, W: Write>(mut w: W, config_hash: &str, episodes: &[Episode<S>]) -> Result<()> {
    writeln!(w, "{}", header(config_hash, episodes.len()))?;
    for (i, ep) in episodes.iter().enumerate() {
        writeln!(w, "{}", episode_record(i, ep))?;
    }
    w.flush()?;
    Ok(())
}

fn read_world<S: Scalar>(t: &mut Tokens) -> Result<WorldState<S>> {
    let (ox, oy, ot, px, py) = (t.f64()?, t.f64()?, t.f64()?, t.f64()?, t.f64()?);
    let in_contact = match t.word()? {
        "1" => true,
        "0" => false,
        w => return Err(Error::Format { what: "dataset", detail: format!("bad contact flag `{w}`") }),
    };
    Ok(WorldState {
        object: Pose2D { x: S::lit(ox), y: S::lit(oy), theta: S::lit(ot) },
        pusher: Vec2::new(S::lit(px), S::lit(py)),
        in_contact,
    })
}

fn read_pose<S: Scalar>(t: &mut Tokens) -> Result<Pose2D<S>> {
    Ok(Pose2D { x: S::lit(t.f64()?), y: S::lit(t.f64()?), theta: S::lit(t.f64()?) })
}

/// Parses one episode record; returns its index and the episode.
pub fn parse_episode<S: Scalar>(line: &str) -> Result<(usize, Episode<S>)> {
    let mut t = Tokens::new(line, "dataset");
    t.expect("episode")?;
    let index = t.usize()?;
    t.expect("params")?;
    let params = ObjectParams {
        length: t.f64()?,
        width: t.f64()?,
        height: t.f64()?,
        mass: t.f64()?,
        mu_slide: t.f64()?,
        mu_rot: t.f64()?,
        damping: t.f64()?,
    };
    t.expect("start")?;
    let start = read_pose(&mut t)?;
    t.expect("goal")?;
    let goal = read_pose(&mut t)?;
    t.expect("terminal")?;
    let terminal = match t.word()? {
        "GoalReached" => Terminal::GoalReached,
        "StepLimit" => Terminal::StepLimit,
        w => return Err(Error::Format { what: "dataset", detail: format!("bad terminal `{w}`") }),
    };
    t.expect("final")?;
    let final_state = read_world(&mut t)?;
    t.expect("steps")?;
    let n = t.usize()?;
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        let state = read_world(&mut t)?;
        let action = PushAction { direction: Vec2::new(S::lit(t.f64()?), S::lit(t.f64()?)), magnitude: S::lit(t.f64()?) };
        let mut a = [S::zero(); 7];
        for v in a.iter_mut() {
            *v = S::lit(t.f64()?);
        }
        steps.push(EpisodeStep { state, action, tuple: StateTuple::from_array(a) });
    }
    t.finish()?;
    Ok((index, Episode { params, start, goal, steps, final_state, terminal }))
}

/// Reads a dataset file; returns the header's config hash and the episodes.
pub fn read_dataset<S: Scalar, R: BufRead>(r: R) -> Result<(String, Vec<Episode<S>>)> {
    let mut lines = r.lines();
    let head = lines.next().ok_or(Error::Empty("dataset file"))??;
    let mut t = Tokens::new(&head, "dataset header");
    t.expect(MAGIC)?;
    let version = t.word()?;
    if version != format!("v{VERSION}") {
        return Err(Error::Format { what: "dataset header", detail: format!("unsupported version `{version}`") });
    }
    let hash = t
        .word()?
        .strip_prefix("config=")
        .ok_or_else(|| Error::Format { what: "dataset header", detail: "missing config hash".into() })?
        .to_string();
    let count: usize = t
        .word()?
        .strip_prefix("episodes=")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::Format { what: "dataset header", detail: "missing episode count".into() })?;
    let mut episodes = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (index, ep) = parse_episode(&line)?;
        if index != episodes.len() {
            return Err(Error::Format { what: "dataset", detail: format!("episode {index} out of order") });
        }
        episodes.push(ep);
    }
    if episodes.len() != count {
        return Err(Error::Format { what: "dataset", detail: format!("header says {count} episodes, found {}", episodes.len()) });
    }
    Ok((hash, episodes))
}
