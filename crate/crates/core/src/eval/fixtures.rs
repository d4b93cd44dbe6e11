//! Named test objects and the benchmark task generator.

use rand::Rng;

use crate::dataset::sample_object;
use crate::sim::{ObjectParams, ParamRanges, Pose2D, SimConfig, GRAVITY, OBJECT_HEIGHT};
use crate::Scalar;

/// A named object used by benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub params: ObjectParams,
}

/// `(name, mass kg, length m, width m, sliding friction force N)` of the measured objects.
const MEASURED: [(&str, f64, f64, f64, f64); 6] = [
    ("A", 0.016, 0.116, 0.116, 0.05),
    ("B", 0.615, 0.168, 0.237, 1.4),
    ("C", 0.565, 0.198, 0.198, 1.1),
    ("D", 0.587, 0.166, 0.228, 1.8),
    ("E", 0.506, 0.153, 0.462, 0.9),
    ("P", 0.015, 0.120, 0.120, 0.05),
];

/// Sliding coefficient that produces `force` for `mass`, clamped into the randomization range.
pub fn mu_from_friction_force(force: f64, mass: f64) -> f64 {
    let (lo, hi) = ParamRanges::DEFAULT.mu_slide;
    (force / (mass * GRAVITY)).clamp(lo, hi)
}

fn build(name: &'static str, mass: f64, length: f64, width: f64, force: f64) -> Fixture {
    let r = ParamRanges::DEFAULT;
    let mid = |(lo, hi): (f64, f64)| 0.5 * (lo + hi);
    Fixture {
        name: name.to_string(),
        params: ObjectParams {
            length: length.clamp(r.size.0, r.size.1),
            width: width.clamp(r.size.0, r.size.1),
            height: OBJECT_HEIGHT,
            mass,
            mu_slide: mu_from_friction_force(force, mass),
            mu_rot: mid(r.mu_rot),
            damping: mid(r.damping),
        },
    }
}

/// Objects drawn from the randomization ranges, named `R000`, `R001`, ...
pub fn random_objects<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<Fixture> {
    (0..count).map(|i| Fixture { name: format!("R{i:03}"), params: sample_object(rng, &ParamRanges::DEFAULT) }).collect()
}

/// Fixture by name (`A`..`E`, `P`).
pub fn fixture(name: &str) -> Option<Fixture> {
    MEASURED.iter().find(|m| m.0.eq_ignore_ascii_case(name)).map(|&(n, m, l, w, f)| build(n, m, l, w, f))
}

/// The five test objects `A`..`E`.
pub fn test_objects() -> Vec<Fixture> {
    MEASURED[..5].iter().map(|&(n, m, l, w, f)| build(n, m, l, w, f)).collect()
}

/// The object the model-free policy is trained on.
pub fn prototype() -> Fixture {
    fixture("P").unwrap()
}

/// Benchmark task shape: the goal lies on a constant-curvature arc ahead of the start pose,
/// so a pusher behind the object can reach it without switching sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    /// Arc length range, meters.
    pub distance: (f64, f64),
    /// Largest absolute heading change along the arc, radians.
    pub max_turn: f64,
    /// Clearance kept between the start/goal footprint and the workspace border.
    pub margin: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        Self { distance: (0.10, 0.20), max_turn: 0.3, margin: 0.02 }
    }
}

/// Pose reached by driving `length` along an arc that turns by `turn`.
pub fn arc_goal<S: Scalar>(start: &Pose2D<S>, length: f64, turn: f64) -> Pose2D<S> {
    let (dx, dy) = if turn.abs() < 1e-9 {
        (length, 0.5 * length * turn)
    } else {
        let r = length / turn;
        (r * turn.sin(), r * (1.0 - turn.cos()))
    };
    start.compose(S::lit(dx), S::lit(dy), S::lit(turn))
}

/// `left`, `middle` and `right` goals at arc length `length`.
pub fn named_goals<S: Scalar>(start: &Pose2D<S>, length: f64, turn: f64) -> [(&'static str, Pose2D<S>); 3] {
    [("left", arc_goal(start, length, turn)), ("middle", arc_goal(start, length, 0.0)), ("right", arc_goal(start, length, -turn))]
}

/// Random start pose and arc goal with both footprints inside the workspace.
pub fn sample_task<S: Scalar, R: Rng + ?Sized>(rng: &mut R, params: &ObjectParams, sim: &SimConfig, spec: &TaskSpec) -> (Pose2D<S>, Pose2D<S>) {
    let m = params.half_diagonal() + spec.margin;
    let (lo, hi) = (sim.workspace_min, sim.workspace_max);
    let inside = |p: &Pose2D<S>| {
        let (x, y) = (p.x.as_f64(), p.y.as_f64());
        x >= lo.0 + m && x <= hi.0 - m && y >= lo.1 + m && y <= hi.1 - m
    };
    loop {
        let x = rng.gen_range(lo.0 + m..=hi.0 - m);
        let y = rng.gen_range(lo.1 + m..=hi.1 - m);
        let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let length = rng.gen_range(spec.distance.0..=spec.distance.1);
        let turn = rng.gen_range(-spec.max_turn..=spec.max_turn);
        let start = Pose2D::new(S::lit(x).snap(), S::lit(y).snap(), S::lit(theta));
        let goal = arc_goal(&start, length, turn);
        if inside(&goal) {
            return (start, goal);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_are_valid_objects() {
        for f in test_objects().into_iter().chain([prototype()]) {
            f.params.validate().unwrap();
        }
        assert_eq!(test_objects().iter().map(|f| f.name.as_str()).collect::<String>(), "ABCDE");
    }

    #[test]
    fn friction_mapping() {
        let c = fixture("c").unwrap().params;
        assert!((c.mu_slide - 1.1 / (0.565 * 9.81)).abs() < 1e-12);
        assert_eq!((c.length, c.width, c.mass), (0.198, 0.198, 0.565));
        let p = prototype().params;
        assert!((p.mu_slide - 0.05 / (0.015 * 9.81)).abs() < 1e-12);
        // E is wider than any randomized object and is clamped to the range
        assert_eq!(fixture("E").unwrap().params.width, 0.25);
        assert_eq!(mu_from_friction_force(5.0, 0.01), 1.0);
        assert_eq!(mu_from_friction_force(0.001, 0.8), 0.1);
        assert!(fixture("Q").is_none());
    }

    #[test]
    fn straight_arc_is_a_line() {
        let s = Pose2D::new(0.5, 0.5, 0.3);
        let g = arc_goal(&s, 0.1, 0.0);
        assert!((g.x - (0.5 + 0.1 * 0.3f64.cos())).abs() < 1e-15);
        assert!((g.y - (0.5 + 0.1 * 0.3f64.sin())).abs() < 1e-15);
        assert_eq!(g.theta, 0.3);
    }

    #[test]
    fn arc_matches_integrated_path() {
        let s = Pose2D::new(0.2, 0.3, -1.0);
        let (len, turn) = (0.15, 0.3);
        let n = 100_000;
        let mut p = s;
        for _ in 0..n {
            p = p.compose(len / n as f64, 0.0, turn / n as f64);
        }
        let g = arc_goal(&s, len, turn);
        assert!((p.x - g.x).abs() < 1e-6 && (p.y - g.y).abs() < 1e-6 && (p.theta - g.theta).abs() < 1e-9);
        // continuity at zero turn
        let a = arc_goal(&s, len, 1e-10);
        let b = arc_goal(&s, len, 2e-9);
        assert!((a.position() - b.position()).norm() < 1e-9);
    }

    #[test]
    fn left_and_right_mirror() {
        let s: Pose2D<f64> = Pose2D::new(0.5, 0.5, 0.0);
        let [(_, l), (_, m), (_, r)] = named_goals(&s, 0.15, 0.25);
        assert!((l.y - 0.5 + (r.y - 0.5)).abs() < 1e-15);
        assert!((l.x - r.x).abs() < 1e-15);
        assert!((m.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tasks_stay_in_workspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sim = SimConfig::default();
        let spec = TaskSpec::default();
        for f in test_objects() {
            for _ in 0..200 {
                let (s, g): (Pose2D<f64>, Pose2D<f64>) = sample_task(&mut rng, &f.params, &sim, &spec);
                let m = f.params.half_diagonal();
                for p in [s, g] {
                    assert!(p.x > m && p.x < 1.0 - m && p.y > m && p.y < 1.0 - m);
                }
                let d = (g.position() - s.position()).norm();
                assert!(d > 0.09 && d <= 0.2 + 1e-12);
                assert!(crate::sim::wrap_angle(g.theta - s.theta).abs() <= 0.3 + 1e-12);
            }
        }
    }
}
