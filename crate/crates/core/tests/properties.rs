use proptest::prelude::*;
use rmppi_core::control::mppi_weights;
use rmppi_core::sim::{observe_state_tuple, signed_distance, step, wrap_angle, ObjectParams, Pose2D, PushAction, SimConfig, Vec2, WorldState};
use rmppi_core::Scalar;

fn wide() -> SimConfig {
    SimConfig { workspace_min: (-10.0, -10.0), workspace_max: (10.0, 10.0), ..Default::default() }
}

fn object() -> impl Strategy<Value = ObjectParams> {
    (0.08..0.25f64, 0.01..0.8f64, 0.1..1.0f64, 0.001..0.01f64, 0.01..0.015f64).prop_map(|(size, mass, mu_slide, mu_rot, damping)| ObjectParams {
        length: size,
        width: size,
        height: 0.025,
        mass,
        mu_slide,
        mu_rot,
        damping,
    })
}

/// Object pose on the lattice and a pusher on a face or up to 3 cm outside it.
fn scene() -> impl Strategy<Value = (ObjectParams, WorldState<f64>)> {
    (object(), -1.0..1.0f64, -1.0..1.0f64, -3.1..3.1f64, 0..4usize, -1.0..1.0f64, prop_oneof![Just(0.0), 0.0..0.03f64]).prop_map(
        |(params, x, y, theta, side, s, gap)| {
            let object = Pose2D::new(x.snap(), y.snap(), theta);
            let half = params.half_extents::<f64>();
            let local = match side {
                0 => Vec2::new(-half.x - gap, s * half.y),
                1 => Vec2::new(half.x + gap, s * half.y),
                2 => Vec2::new(s * half.x, -half.y - gap),
                _ => Vec2::new(s * half.x, half.y + gap),
            };
            let pusher = object.to_world(local).snap();
            let in_contact = signed_distance(object.to_local(pusher), half) <= 1e-6;
            (params, WorldState { object, pusher, in_contact })
        },
    )
}

fn push() -> impl Strategy<Value = PushAction<f64>> {
    (-3.14..3.14f64, 1e-4..0.01f64).prop_map(|(a, m)| PushAction::new(Vec2::new(a.cos(), a.sin()), m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn pusher_never_penetrates((params, state) in scene(), action in push()) {
        let next = step(&state, &params, &wide(), &action);
        let d = signed_distance(next.object.to_local(next.pusher), params.half_extents());
        prop_assert!(d >= -1e-6, "penetration {}", -d);
    }

    #[test]
    fn rigid_motion_of_the_world_commutes_with_step((params, state) in scene(), action in push(), phi in -3.0..3.0f64, sx in -1.0..1.0f64, sy in -1.0..1.0f64) {
        let map = |p: Vec2<f64>| p.rotate(phi) + Vec2::new(sx, sy);
        let o = map(state.object.position());
        let moved = WorldState { object: Pose2D::new(o.x, o.y, state.object.theta + phi), pusher: map(state.pusher), ..state };
        let a = step(&state, &params, &wide(), &action);
        let b = step(&moved, &params, &wide(), &action);
        prop_assert!((b.object.position() - map(a.object.position())).norm() < 1e-9);
        prop_assert!((b.pusher - map(a.pusher)).norm() < 1e-9);
        prop_assert!(wrap_angle(b.object.theta - a.object.theta - phi).abs() < 1e-9);
    }

    #[test]
    fn pushing_away_leaves_the_object_in_place((params, state) in scene(), m in 1e-4..0.01f64) {
        let half = params.half_extents::<f64>();
        let p = state.object.to_local(state.pusher);
        let out = if p.x.abs() / half.x >= p.y.abs() / half.y { Vec2::new(p.x.signum(), 0.0) } else { Vec2::new(0.0, p.y.signum()) };
        let next = step(&state, &params, &wide(), &PushAction::new(out, m).unwrap());
        prop_assert_eq!(next.object, state.object);
    }

    #[test]
    fn tuples_ignore_lattice_translations((params, state) in scene(), action in push(), ox in -3.0..3.0f64, oy in -3.0..3.0f64) {
        let offset = Vec2::new(ox, oy).snap();
        let next = step(&state, &params, &wide(), &action);
        let moved = state.translated(offset);
        let moved_next = step(&moved, &params, &wide(), &action);
        prop_assert_eq!(moved_next, next.translated(offset));
        prop_assert_eq!(observe_state_tuple(&moved, &moved_next, &action), observe_state_tuple(&state, &next, &action));
    }

    #[test]
    fn single_precision_tuples_ignore_lattice_translations((params, state) in scene(), action in push(), ox in -3.0..3.0f64, oy in -3.0..3.0f64) {
        let s32 = WorldState { object: Pose2D::new(state.object.x.snap() as f32, state.object.y.snap() as f32, state.object.theta as f32), pusher: state.pusher.cast::<f32>(), in_contact: state.in_contact };
        let s32 = WorldState { object: Pose2D::new(s32.object.x.snap(), s32.object.y.snap(), s32.object.theta), pusher: s32.pusher.snap(), ..s32 };
        let a32 = PushAction { direction: action.direction.cast::<f32>(), magnitude: action.magnitude as f32 };
        let offset = Vec2::new(ox as f32, oy as f32).snap();
        let next = step(&s32, &params, &wide(), &a32);
        let moved = s32.translated(offset);
        let moved_next = step(&moved, &params, &wide(), &a32);
        prop_assert_eq!(observe_state_tuple(&moved, &moved_next, &a32), observe_state_tuple(&s32, &next, &a32));
    }

    #[test]
    fn mppi_weights_form_a_distribution(costs in prop::collection::vec(0.0..50.0f64, 1..300), lambda in 1e-6..100.0f64) {
        let w = mppi_weights(&costs, lambda).unwrap();
        prop_assert_eq!(w.len(), costs.len());
        prop_assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // the cheapest sample carries the largest weight
        let best = (0..costs.len()).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
        prop_assert!(w.iter().all(|&v| v <= w[best]));
    }
}
