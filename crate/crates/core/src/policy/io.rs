//! Agent file layout, little-endian, same container conventions as the weights file:
//!
//! ```text
//! magic            8 bytes  "RMPPIAGT"
//! version          u32
//! config hash      u32 length, then UTF-8 bytes
//! hidden widths    u32 count, then u32 each
//! hyperparameters  f64 x 8: gamma, tau, actor_lr, critic_lr, action_l2,
//!                  push_magnitude, noise_std, random_eps
//! goal tier        u32 (0 tight, 1 mid, 2 loose)
//! networks         f64, each layer's w (row-major) then b, in this order:
//!                  actor, critic, actor_target, critic_target,
//!                  actor Adam m, actor Adam v, critic Adam m, critic Adam v
//! Adam steps       u64 x 2: actor, critic
//! ```

use std::io::{Read, Write};

use super::ddpg::{Agent, AgentConfig};
use crate::error::{Error, Result};
use crate::eval::ThresholdTier;
use crate::model::Parameters;
use crate::Scalar;

pub const AGENT_MAGIC: &[u8; 8] = b"RMPPIAGT";
pub const AGENT_VERSION: u32 = 1;

fn bad(detail: impl Into<String>) -> Error {
    Error::Format { what: "agent file", detail: detail.into() }
}

fn nets<S: Scalar>(a: &Agent<S>) -> [&super::mlp::Mlp<S>; 8] {
    [&a.actor, &a.critic, &a.actor_target, &a.critic_target, &a.actor_opt.m, &a.actor_opt.v, &a.critic_opt.m, &a.critic_opt.v]
}

pub fn write_agent<S: Scalar, W: Write>(mut w: W, agent: &Agent<S>, config_hash: &str) -> Result<()> {
    let c = &agent.config;
    w.write_all(AGENT_MAGIC)?;
    w.write_all(&AGENT_VERSION.to_le_bytes())?;
    w.write_all(&(config_hash.len() as u32).to_le_bytes())?;
    w.write_all(config_hash.as_bytes())?;
    w.write_all(&(c.hidden.len() as u32).to_le_bytes())?;
    for &h in &c.hidden {
        w.write_all(&(h as u32).to_le_bytes())?;
    }
    for v in [c.gamma, c.tau, c.actor_lr, c.critic_lr, c.action_l2, c.push_magnitude, c.noise_std, c.random_eps] {
        w.write_all(&v.to_le_bytes())?;
    }
    let tier = ThresholdTier::ALL.iter().position(|&t| t == c.goal_tier).unwrap() as u32;
    w.write_all(&tier.to_le_bytes())?;
    for net in nets(agent) {
        for v in net.tensors().into_iter().flatten() {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    w.write_all(&agent.actor_opt.t.to_le_bytes())?;
    w.write_all(&agent.critic_opt.t.to_le_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_bytes<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|_| bad("truncated file"))?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_bytes(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let v = f64::from_le_bytes(read_bytes(r)?);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad("non-finite value"))
    }
}

/// Reads an agent file; returns the embedded config hash and the agent.
pub fn read_agent<S: Scalar, R: Read>(mut r: R) -> Result<(String, Agent<S>)> {
    if &read_bytes::<_, 8>(&mut r)? != AGENT_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != AGENT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = read_u32(&mut r)? as usize;
    if len > 4096 {
        return Err(bad("config hash too long"));
    }
    let mut hash = vec![0u8; len];
    r.read_exact(&mut hash).map_err(|_| bad("truncated header"))?;
    let hash = String::from_utf8(hash).map_err(|_| bad("config hash is not UTF-8"))?;
    let layers = read_u32(&mut r)? as usize;
    if layers == 0 || layers > 16 {
        return Err(bad("hidden layer count out of range"));
    }
    let mut hidden = Vec::with_capacity(layers);
    for _ in 0..layers {
        let h = read_u32(&mut r)? as usize;
        if h == 0 || h > 1 << 16 {
            return Err(bad("layer width out of range"));
        }
        hidden.push(h);
    }
    let mut h = [0.0; 8];
    for v in h.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let tier = *ThresholdTier::ALL.get(read_u32(&mut r)? as usize).ok_or_else(|| bad("unknown goal tier"))?;
    let config = AgentConfig {
        hidden,
        gamma: h[0],
        tau: h[1],
        actor_lr: h[2],
        critic_lr: h[3],
        action_l2: h[4],
        push_magnitude: h[5],
        noise_std: h[6],
        random_eps: h[7],
        goal_tier: tier,
    };
    config.validate().map_err(|e| bad(e.to_string()))?;
    let mut agent = Agent::<S>::new(config, 0)?;
    for net in [
        &mut agent.actor,
        &mut agent.critic,
        &mut agent.actor_target,
        &mut agent.critic_target,
        &mut agent.actor_opt.m,
        &mut agent.actor_opt.v,
        &mut agent.critic_opt.m,
        &mut agent.critic_opt.v,
    ] {
        for t in net.tensors_mut() {
            for v in t.iter_mut() {
                *v = S::lit(read_f64(&mut r)?);
            }
        }
    }
    agent.actor_opt.t = u64::from_le_bytes(read_bytes(&mut r)?);
    agent.critic_opt.t = u64::from_le_bytes(read_bytes(&mut r)?);
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok((hash, agent))
}
