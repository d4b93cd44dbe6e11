use super::motion::{push_response, Face, LimitSurface, Twist};
use super::{ObjectParams, Pose2D, PushAction, SimConfig, Vec2, WorldState};
use crate::dataset::StateTuple;
use crate::error::{Error, Result};
use crate::Scalar;

/// Signed distance from an object-frame point to the rectangle with half extents `half`;
/// negative inside.
pub fn signed_distance<S: Scalar>(p: Vec2<S>, half: Vec2<S>) -> S {
    let qx = p.x.abs() - half.x;
    let qy = p.y.abs() - half.y;
    let outside = Vec2::new(qx.max(S::zero()), qy.max(S::zero())).norm();
    outside + qx.max(qy).min(S::zero())
}

fn object_inside_workspace(pose: &Pose2D<f64>, params: &ObjectParams, config: &SimConfig) -> bool {
    let half = params.half_extents::<f64>();
    [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
        .iter()
        .all(|&(sx, sy)| {
            let c = pose.to_world(Vec2::new(sx * half.x, sy * half.y));
            config.contains(c.x, c.y)
        })
}

/// Places the object at `start` and the pusher at `pusher_offset` (object frame).
pub fn reset<S: Scalar>(
    config: &SimConfig,
    params: &ObjectParams,
    start: Pose2D<S>,
    goal: Pose2D<S>,
    pusher_offset: Vec2<S>,
) -> Result<WorldState<S>> {
    params.validate()?;
    if !start.is_finite() || !goal.is_finite() || !pusher_offset.is_finite() {
        return Err(Error::NonFinite("reset"));
    }
    let start64 = start.cast::<f64>();
    if !object_inside_workspace(&start64, params, config) {
        return Err(Error::InvalidPose(format!("start {start64:?} overlaps the workspace walls")));
    }
    if !config.contains(goal.x.as_f64(), goal.y.as_f64()) {
        return Err(Error::InvalidPose(format!("goal {:?} outside the workspace", goal.cast::<f64>())));
    }
    let half = params.half_extents::<S>();
    let depth = signed_distance(pusher_offset, half);
    let tol = S::lit(config.contact_tolerance);
    if depth < -tol {
        return Err(Error::PusherInsideObject(-depth.as_f64()));
    }
    let object = Pose2D::new(start.x.snap(), start.y.snap(), start.theta);
    let pusher = object.to_world(pusher_offset).snap();
    if !config.contains(pusher.x.as_f64(), pusher.y.as_f64()) {
        return Err(Error::InvalidPose("pusher outside the workspace".into()));
    }
    let local = object.to_local(pusher);
    Ok(WorldState { object, pusher, in_contact: signed_distance(local, half) <= tol })
}

/// Flags raised while stepping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// The pusher target was clamped to the workspace boundary.
    pub clamped: bool,
    /// The pusher could not supply the force needed and stopped at the contact.
    pub stalled: bool,
    /// The object moved during the step.
    pub pushed: bool,
}

/// Entry of the object-frame segment `a -> a + d` into the rectangle: `(t, face)`.
fn segment_entry<S: Scalar>(a: Vec2<S>, d: Vec2<S>, half: Vec2<S>) -> Option<(S, Face)> {
    let eps = S::lit(1e-12) * (half.x + half.y);
    let mut t_in = S::neg_infinity();
    let mut t_out = S::infinity();
    let mut face = Face::Rear;
    for (p, dp, h, lo_face, hi_face) in [(a.x, d.x, half.x, Face::Rear, Face::Front), (a.y, d.y, half.y, Face::Right, Face::Left)] {
        if dp == S::zero() {
            if p <= -h + eps || p >= h - eps {
                return None;
            }
            continue;
        }
        let t1 = (-h - p) / dp;
        let t2 = (h - p) / dp;
        let (enter, leave, f) = if dp > S::zero() { (t1, t2, lo_face) } else { (t2, t1, hi_face) };
        if enter > t_in {
            t_in = enter;
            face = f;
        }
        t_out = t_out.min(leave);
    }
    if t_in >= t_out || t_in >= S::one() || t_out <= S::zero() {
        return None;
    }
    if t_in < S::zero() {
        // start already on or inside the boundary: the nearest face decides
        face = Face::ALL.into_iter().fold(Face::Rear, |best, f| if f.outside_distance(a, half) > best.outside_distance(a, half) { f } else { best });
    }
    // Moving tangentially along a face never enters the interior; the relative threshold
    // keeps rounding in the frame change from turning a slide into a push.
    let inward = d.dot(face.inward_normal());
    if !(inward > S::epsilon().sqrt() * d.norm()) {
        return None;
    }
    Some((t_in.max(S::zero()), face))
}

fn apply_twist<S: Scalar>(pose: &Pose2D<S>, twist: &Twist<S>) -> Pose2D<S> {
    let d = twist.body_translation().rotate(pose.theta).snap();
    Pose2D::new(pose.x + d.x, pose.y + d.y, pose.theta + twist.omega)
}

/// Moves the object out along the shallowest face if the pusher ended up inside it.
fn resolve_penetration<S: Scalar>(pose: &Pose2D<S>, pusher: Vec2<S>, half: Vec2<S>) -> Pose2D<S> {
    let p = pose.to_local(pusher);
    if signed_distance(p, half) >= S::zero() {
        return *pose;
    }
    let mut best = (S::infinity(), Face::Rear);
    for face in Face::ALL {
        let depth = -face.outside_distance(p, half);
        if depth < best.0 {
            best = (depth, face);
        }
    }
    let shift = (best.1.inward_normal::<S>() * best.0).rotate(pose.theta).snap();
    Pose2D { x: pose.x + shift.x, y: pose.y + shift.y, theta: pose.theta }
}

/// Advances the world by one push.
pub fn step<S: Scalar>(state: &WorldState<S>, params: &ObjectParams, config: &SimConfig, action: &PushAction<S>) -> WorldState<S> {
    step_with_report(state, params, config, action).0
}

/// [`step`] plus the flags raised on the way.
pub fn step_with_report<S: Scalar>(
    state: &WorldState<S>,
    params: &ObjectParams,
    config: &SimConfig,
    action: &PushAction<S>,
) -> (WorldState<S>, StepReport) {
    let mut report = StepReport::default();
    let half = params.half_extents::<S>();
    let ls = LimitSurface::<S>::new(params);
    let mu = S::lit(config.contact_friction);
    let f_limit = S::lit(config.max_pusher_force);
    let retention = S::lit(params.damping);
    let magnitude = action.magnitude.max(S::zero()).min(S::lit(config.max_step));
    let Some(dir) = action.direction.normalized() else {
        return (*state, report);
    };
    if magnitude == S::zero() {
        return (*state, report);
    }

    let start = state.pusher;
    let raw = dir.rotate(state.object.theta) * magnitude;
    let (lo, hi) = (config.workspace_min, config.workspace_max);
    let clip = |v: S, p: S, lo: f64, hi: f64| v.max(S::lit(lo) - p).min(S::lit(hi) - p);
    let total = Vec2::new(clip(raw.x, start.x, lo.0, hi.0), clip(raw.y, start.y, lo.1, hi.1));
    report.clamped = total != raw;

    let n = (magnitude.as_f64() / config.max_substep).ceil().max(1.0) as usize;
    let mut object = state.object;
    let mut pusher = start;
    let mut residual: Option<(Twist<S>, usize)> = None;
    for k in 1..=n {
        let target = start + (total * S::lit(k as f64 / n as f64)).snap();
        let a = object.to_local(pusher);
        let b = object.to_local(target);
        let d = b - a;
        match segment_entry(a, d, half) {
            Some((t, face)) => {
                let contact = face.project(a + d * t, half);
                let push = d * (S::one() - t);
                let resp = push_response(contact, face.inward_normal(), push, &ls, mu);
                if resp.force > f_limit {
                    report.stalled = true;
                    pusher = object.to_world(contact).snap();
                    object = resolve_penetration(&object, pusher, half);
                    break;
                }
                if !resp.twist.is_zero() {
                    object = apply_twist(&object, &resp.twist);
                    report.pushed = true;
                    residual = Some((resp.twist, 0));
                }
                pusher = target;
                object = resolve_penetration(&object, pusher, half);
            }
            None => {
                if let Some((twist, count)) = residual {
                    let count = count + 1;
                    let coast = twist.scaled(retention.powi(count as i32));
                    object = apply_twist(&object, &coast);
                    residual = Some((twist, count));
                }
                pusher = target;
                object = resolve_penetration(&object, pusher, half);
            }
        }
    }
    let in_contact = signed_distance(object.to_local(pusher), half) <= S::lit(config.contact_tolerance);
    (WorldState { object, pusher, in_contact }, report)
}

/// Encodes the transition `prev -> curr` and the action about to be applied at `curr` as a
/// state tuple. Increments are expressed in the previous object frame; the pusher and the
/// action in the current one. Passing the same state twice yields zero increments.
pub fn observe_state_tuple<S: Scalar>(prev: &WorldState<S>, curr: &WorldState<S>, action: &PushAction<S>) -> StateTuple<S> {
    let delta = (curr.object.position() - prev.object.position()).rotate(-prev.object.theta);
    let dtheta = super::wrap_angle(curr.object.theta - prev.object.theta);
    let p = curr.pusher_local();
    let a = action.displacement();
    StateTuple { dx: delta.x, dy: delta.y, dtheta, px: p.x, py: p.y, ax: a.x, ay: a.y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use crate::sim::wrap_angle;

    fn square() -> ObjectParams {
        ObjectParams { length: 0.12, width: 0.12, height: 0.025, mass: 0.2, mu_slide: 0.4, mu_rot: 0.005, damping: 0.012 }
    }

    fn start_state(offset: Vec2<f64>) -> WorldState<f64> {
        let p = Pose2D::new(0.5, 0.5, 0.3);
        reset(&SimConfig::default(), &square(), p, Pose2D::new(0.8, 0.6, 0.0), offset).unwrap()
    }

    #[test]
    fn pusher_on_rear_midpoint_is_in_contact() {
        assert!(start_state(Vec2::new(-0.06, 0.0)).in_contact);
    }

    #[test]
    fn pusher_behind_object_is_not_in_contact() {
        assert!(!start_state(Vec2::new(-0.16, 0.0)).in_contact);
    }

    #[test]
    fn reset_rejects_pusher_inside_and_walls() {
        let cfg = SimConfig::default();
        let r = reset(&cfg, &square(), Pose2D::new(0.5, 0.5, 0.0), Pose2D::new(0.6, 0.5, 0.0), Vec2::new(-0.03, 0.0));
        assert!(matches!(r, Err(Error::PusherInsideObject(_))));
        let r = reset(&cfg, &square(), Pose2D::new(0.03, 0.5, 0.0), Pose2D::new(0.6, 0.5, 0.0), Vec2::new(-0.07, 0.0));
        assert!(matches!(r, Err(Error::InvalidPose(_))));
    }

    #[test]
    fn non_contact_push_leaves_object_untouched() {
        let s0 = start_state(Vec2::new(-0.16, 0.0));
        let s1 = step(&s0, &square(), &SimConfig::default(), &PushAction::forward(0.005));
        assert_eq!(s1.object, s0.object);
        assert!(!s1.in_contact);
    }

    #[test]
    fn central_push_on_square_has_no_rotation() {
        let s0 = start_state(Vec2::new(-0.06, 0.0));
        let mut s = s0;
        for _ in 0..10 {
            s = step(&s, &square(), &SimConfig::default(), &PushAction::forward(0.005));
        }
        assert!(wrap_angle(s.object.theta - s0.object.theta).abs() < 1e-9);
        let moved = (s.object.position() - s0.object.position()).norm();
        assert!((moved - 0.05).abs() < 1e-9, "moved {moved}");
        assert!(s.in_contact);
    }

    #[test]
    fn off_center_push_rotation_agrees_with_fine_integration() {
        let s0 = start_state(Vec2::new(-0.06, 0.025));
        let coarse = step(&s0, &square(), &SimConfig::default(), &PushAction::forward(0.005));
        let fine_cfg = SimConfig { max_substep: 0.0005 / 100.0, ..SimConfig::default() };
        let fine = step(&s0, &square(), &fine_cfg, &PushAction::forward(0.005));
        let d_coarse = wrap_angle(coarse.object.theta - s0.object.theta);
        let d_fine = wrap_angle(fine.object.theta - s0.object.theta);
        // contact at +y pushing along +x: torque about the centroid is negative
        assert!(d_fine < 0.0 && d_coarse < 0.0);
        assert!((d_coarse - d_fine).abs() < 0.02 * d_fine.abs(), "{d_coarse} vs {d_fine}");
    }

    #[test]
    fn heavy_object_stalls() {
        let heavy = ObjectParams { mass: 0.8, mu_slide: 1.0, ..square() };
        let cfg = SimConfig::default();
        let s0 = reset(&cfg, &heavy, Pose2D::new(0.5, 0.5, 0.0), Pose2D::new(0.8, 0.5, 0.0), Vec2::new(-0.06, 0.0)).unwrap();
        let (s1, rep) = step_with_report(&s0, &heavy, &cfg, &PushAction::forward(0.005));
        assert!(rep.stalled);
        assert_eq!(s1.object, s0.object);
        assert!(s1.in_contact);
    }

    #[test]
    fn first_tuple_has_zero_increments() {
        let s = start_state(Vec2::new(-0.06, 0.0));
        let t = observe_state_tuple(&s, &s, &PushAction::forward(0.005));
        assert_eq!((t.dx, t.dy, t.dtheta), (0.0, 0.0, 0.0));
        assert!((t.px + 0.06).abs() < 1e-12);
        assert_eq!((t.ax, t.ay), (0.005, 0.0));
    }

    #[test]
    fn increments_are_in_previous_object_frame() {
        let d = 0.01;
        let prev = WorldState { object: Pose2D::new(0.5, 0.5, FRAC_PI_2), pusher: Vec2::new(0.5, 0.3), in_contact: false };
        let curr = WorldState { object: Pose2D::new(0.5 + d, 0.5, FRAC_PI_2), ..prev };
        let t = observe_state_tuple(&prev, &curr, &PushAction::forward(0.005));
        assert!(t.dx.abs() < 1e-15);
        assert!((t.dy + d).abs() < 1e-15);
        assert_eq!(t.dtheta, 0.0);
    }

    #[test]
    fn pure_rotation_increment() {
        let prev = WorldState { object: Pose2D::new(0.5, 0.5, 0.2), pusher: Vec2::new(0.3, 0.3), in_contact: false };
        let curr = WorldState { object: Pose2D::new(0.5, 0.5, 0.3), ..prev };
        let t: StateTuple<f64> = observe_state_tuple(&prev, &curr, &PushAction::forward(0.005));
        assert_eq!((t.dx, t.dy), (0.0, 0.0));
        assert!((t.dtheta - 0.1).abs() < 1e-15);
    }
}
