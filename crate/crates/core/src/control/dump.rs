//! Rollout dump, one line per sampled sequence:
//!
//! ```text
//! rmppi-rollouts v1 config=<hash> steps=<records>
//! step <s> optimal <ax_1> <ay_1> ... <ax_T> <ay_T>
//! sample <s> <n> cost <c> <ax_1> <ay_1> ... <ax_T> <ay_T>
//! ```
//!
//! Actions are object-frame push displacements at each horizon step.

use std::io::Write;

use super::ActionSequence;
use crate::error::Result;
use crate::textfmt::num;

/// Everything sampled at one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutRecord {
    /// Episode step index at which the decision was taken.
    pub step: usize,
    pub sequences: Vec<ActionSequence>,
    pub costs: Vec<f64>,
    pub optimal: ActionSequence,
}

fn push_seq(out: &mut String, seq: &ActionSequence) {
    for a in seq {
        out.push(' ');
        out.push_str(&num(a.x));
        out.push(' ');
        out.push_str(&num(a.y));
    }
}

pub fn write_rollout_dump<W: Write>(mut w: W, config_hash: &str, records: &[RolloutRecord]) -> Result<()> {
    writeln!(w, "rmppi-rollouts v1 config={config_hash} steps={}", records.len())?;
    for r in records {
        let mut line = format!("step {} optimal", r.step);
        push_seq(&mut line, &r.optimal);
        writeln!(w, "{line}")?;
        for (n, (seq, c)) in r.sequences.iter().zip(&r.costs).enumerate() {
            let mut line = format!("sample {} {n} cost {}", r.step, num(*c));
            push_seq(&mut line, seq);
            writeln!(w, "{line}")?;
        }
    }
    w.flush()?;
    Ok(())
}
