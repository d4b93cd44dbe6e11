use super::{ObjectParams, SimConfig, Vec2, GRAVITY};
use crate::Scalar;

/// Mean distance from the center of a uniform `length x width` rectangle to its points.
pub fn mean_support_radius(length: f64, width: f64) -> f64 {
    let a = 0.5 * length;
    let b = 0.5 * width;
    let d = a.hypot(b);
    let integral = (2.0 * a * b * d + a.powi(3) * ((b + d) / a).ln() + b.powi(3) * ((a + d) / b).ln()) / 6.0;
    integral / (a * b)
}

/// Ellipsoidal approximation of the support friction limit surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSurface<S> {
    pub f_max: S,
    pub m_max: S,
}

impl<S: Scalar> LimitSurface<S> {
    pub fn new(params: &ObjectParams) -> Self {
        let normal_force = params.mass * GRAVITY;
        let f_max = params.mu_slide * normal_force;
        let m_max = f_max * mean_support_radius(params.length, params.width) + params.mu_rot * normal_force;
        Self { f_max: S::lit(f_max), m_max: S::lit(m_max) }
    }

    /// Squared ratio `(m_max / f_max)^2`.
    #[inline]
    pub fn radius_sq(&self) -> S {
        let r = self.m_max / self.f_max;
        r * r
    }

    /// Scale bringing the wrench `(f, m)` onto the surface.
    pub fn scale_to_surface(&self, f: Vec2<S>, m: S) -> S {
        let h = (f.x * f.x + f.y * f.y) / (self.f_max * self.f_max) + m * m / (self.m_max * self.m_max);
        S::one() / h.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    /// x = -length/2, inward normal +x.
    Rear,
    /// x = +length/2, inward normal -x.
    Front,
    /// y = -width/2, inward normal +y.
    Right,
    /// y = +width/2, inward normal -y.
    Left,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Rear, Face::Front, Face::Right, Face::Left];

    pub fn inward_normal<S: Scalar>(self) -> Vec2<S> {
        let (o, z) = (S::one(), S::zero());
        match self {
            Face::Rear => Vec2::new(o, z),
            Face::Front => Vec2::new(-o, z),
            Face::Right => Vec2::new(z, o),
            Face::Left => Vec2::new(z, -o),
        }
    }

    /// Distance from `p` to the face's supporting line, positive outside.
    pub fn outside_distance<S: Scalar>(self, p: Vec2<S>, half: Vec2<S>) -> S {
        match self {
            Face::Rear => -half.x - p.x,
            Face::Front => p.x - half.x,
            Face::Right => -half.y - p.y,
            Face::Left => p.y - half.y,
        }
    }

    /// Projects `p` onto the face segment.
    pub fn project<S: Scalar>(self, p: Vec2<S>, half: Vec2<S>) -> Vec2<S> {
        let cx = p.x.max(-half.x).min(half.x);
        let cy = p.y.max(-half.y).min(half.y);
        match self {
            Face::Rear => Vec2::new(-half.x, cy),
            Face::Front => Vec2::new(half.x, cy),
            Face::Right => Vec2::new(cx, -half.y),
            Face::Left => Vec2::new(cx, half.y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMode {
    Separating,
    Sticking,
    Sliding,
}

/// Body-frame object displacement `(v, omega)` produced by one push increment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist<S> {
    pub v: Vec2<S>,
    pub omega: S,
}

impl<S: Scalar> Twist<S> {
    pub fn zero() -> Self {
        Self { v: Vec2::zero(), omega: S::zero() }
    }

    pub fn scaled(self, k: S) -> Self {
        Self { v: self.v * k, omega: self.omega * k }
    }

    pub fn is_zero(&self) -> bool {
        self.v.x == S::zero() && self.v.y == S::zero() && self.omega == S::zero()
    }

    /// Body-frame translation of the SE(2) exponential of this twist.
    pub fn body_translation(&self) -> Vec2<S> {
        let w = self.omega;
        if w.abs() < S::lit(1e-12) {
            return self.v;
        }
        let (s, c) = w.sin_cos();
        let one_minus_c = S::one() - c;
        Vec2::new((s * self.v.x - one_minus_c * self.v.y) / w, (one_minus_c * self.v.x + s * self.v.y) / w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushResponse<S> {
    pub twist: Twist<S>,
    pub mode: ContactMode,
    /// Pusher force magnitude needed to drive the object, newtons.
    pub force: S,
}

impl<S: Scalar> PushResponse<S> {
    fn separating() -> Self {
        Self { twist: Twist::zero(), mode: ContactMode::Separating, force: S::zero() }
    }
}

/// Quasi-static response to pushing at `contact` (object frame) on a face with inward unit
/// normal `normal` by the displacement `push`.
///
/// With `r^2 = (m_max/f_max)^2` the twist is `k * (f, (c x f) / r^2)`, so the contact point
/// moves with `k * A f` where `A = I + [cy^2, -cx cy; -cx cy, cx^2] / r^2`. Sticking solves
/// `A f = push`; otherwise `f` sits on the friction cone edge and only the normal
/// velocity component is matched.
pub fn push_response<S: Scalar>(
    contact: Vec2<S>,
    normal: Vec2<S>,
    push: Vec2<S>,
    ls: &LimitSurface<S>,
    mu: S,
) -> PushResponse<S> {
    let push_n = push.dot(normal);
    if !(push_n > S::zero()) {
        return PushResponse::separating();
    }
    let r2 = ls.radius_sq();
    let (cx, cy) = (contact.x, contact.y);
    let apply_a = |f: Vec2<S>| {
        let m = contact.cross(f);
        Vec2::new(f.x - cy * m / r2, f.y + cx * m / r2)
    };
    let det = S::one() + (cx * cx + cy * cy) / r2;
    let stick = Vec2::new(
        ((S::one() + cx * cx / r2) * push.x + cx * cy / r2 * push.y) / det,
        (cx * cy / r2 * push.x + (S::one() + cy * cy / r2) * push.y) / det,
    );
    let tangent = normal.perp();
    let (f_n, f_t) = (stick.dot(normal), stick.dot(tangent));

    let (f, k, mode) = if f_n > S::zero() && f_t.abs() <= mu * f_n {
        (stick, S::one(), ContactMode::Sticking)
    } else {
        let sign = if f_t >= S::zero() { S::one() } else { -S::one() };
        let edge = normal + tangent * (mu * sign);
        let along = apply_a(edge).dot(normal);
        if !(along > S::zero()) {
            return PushResponse::separating();
        }
        (edge, push_n / along, ContactMode::Sliding)
    };
    let m = contact.cross(f);
    let twist = Twist { v: f * k, omega: k * m / r2 };
    let force = ls.scale_to_surface(f, m) * f.norm();
    PushResponse { twist, mode, force }
}

/// Face of the rectangle with half extents `half` that `p` lies on (or is nearest to). At a
/// corner the face whose inward normal best aligns with `push` wins.
pub(crate) fn face_at<S: Scalar>(p: Vec2<S>, half: Vec2<S>, push: Vec2<S>) -> Face {
    let tol = S::lit(1e-9) * (half.x + half.y);
    let mut best = Face::Rear;
    let mut best_key = (false, S::neg_infinity());
    for face in Face::ALL {
        let on = face.outside_distance(p, half).abs() <= tol;
        let align = push.dot(face.inward_normal());
        let closeness = -face.outside_distance(p, half).abs();
        let key = if on { (true, align) } else { (false, closeness) };
        if key.0 && !best_key.0 || key.0 == best_key.0 && key.1 > best_key.1 {
            best = face;
            best_key = key;
        }
    }
    best
}

/// Object twist for a push of `push_velocity` at `contact_point`, both in the object frame.
pub fn motion_model<S: Scalar>(
    contact_point: Vec2<S>,
    push_velocity: Vec2<S>,
    params: &ObjectParams,
    config: &SimConfig,
) -> (Vec2<S>, S) {
    if push_velocity.x == S::zero() && push_velocity.y == S::zero() {
        return (Vec2::zero(), S::zero());
    }
    let half = params.half_extents::<S>();
    let face = face_at(contact_point, half, push_velocity);
    let ls = LimitSurface::new(params);
    let resp = push_response(contact_point, face.inward_normal(), push_velocity, &ls, S::lit(config.contact_friction));
    (resp.twist.v, resp.twist.omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ObjectParams {
        ObjectParams {
            length: 0.12,
            width: 0.12,
            height: 0.025,
            mass: 0.2,
            mu_slide: 0.4,
            mu_rot: 0.005,
            damping: 0.012,
        }
    }

    #[test]
    fn support_radius_matches_quadrature() {
        for &(l, w) in &[(0.12, 0.12), (0.08, 0.25), (0.2, 0.1)] {
            let n = 400;
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x = (i as f64 + 0.5) / n as f64 * l - 0.5 * l;
                    let y = (j as f64 + 0.5) / n as f64 * w - 0.5 * w;
                    acc += x.hypot(y);
                }
            }
            let mean = acc / (n * n) as f64;
            assert!((mean - mean_support_radius(l, w)).abs() < 1e-6, "{l}x{w}");
        }
    }

    #[test]
    fn zero_push_gives_zero_twist() {
        let (v, w) = motion_model(Vec2::new(-0.06, 0.0), Vec2::zero(), &params(), &SimConfig::default());
        assert_eq!((v.x, v.y, w), (0.0, 0.0, 0.0));
    }

    #[test]
    fn central_normal_push_translates() {
        let (v, w): (Vec2<f64>, f64) = motion_model(Vec2::new(-0.06, 0.0), Vec2::new(0.001, 0.0), &params(), &SimConfig::default());
        assert_eq!(w, 0.0);
        assert!((v.x - 0.001).abs() < 1e-15);
        assert_eq!(v.y, 0.0);
    }

    #[test]
    fn pulling_away_is_separating() {
        let ls = LimitSurface::<f64>::new(&params());
        let r = push_response(Vec2::new(-0.06, 0.01), Vec2::new(1.0, 0.0), Vec2::new(-0.001, 0.0), &ls, 0.3);
        assert_eq!(r.mode, ContactMode::Separating);
        assert!(r.twist.is_zero());
    }

    #[test]
    fn sticking_contact_point_follows_pusher() {
        let ls = LimitSurface::<f64>::new(&params());
        let c = Vec2::new(-0.06, 0.02);
        let push = Vec2::new(0.001, 0.0001);
        let r = push_response(c, Vec2::new(1.0, 0.0), push, &ls, 0.3);
        assert_eq!(r.mode, ContactMode::Sticking);
        let vc = r.twist.v + c.perp() * r.twist.omega;
        assert!((vc - push).norm() < 1e-15);
    }

    #[test]
    fn sliding_matches_normal_velocity_only() {
        let ls = LimitSurface::<f64>::new(&params());
        let c = Vec2::new(-0.06, 0.0);
        let push = Vec2::new(0.001, 0.002);
        let r = push_response(c, Vec2::new(1.0, 0.0), push, &ls, 0.3);
        assert_eq!(r.mode, ContactMode::Sliding);
        let vc = r.twist.v + c.perp() * r.twist.omega;
        assert!((vc.x - push.x).abs() < 1e-15);
        // the pusher slips along +y relative to the object
        assert!(push.y - vc.y > 0.0);
    }

    #[test]
    fn off_center_push_turns_away_from_contact_side() {
        let (_, w) = motion_model(Vec2::new(-0.06, 0.03), Vec2::new(0.001, 0.0), &params(), &SimConfig::default());
        assert!(w < 0.0);
        let (_, w) = motion_model(Vec2::new(-0.06, -0.03), Vec2::new(0.001, 0.0), &params(), &SimConfig::default());
        assert!(w > 0.0);
    }

    /// Maximum-power oracle: the support wrench dissipating the most power for the computed
    /// twist, found by dense sampling of the ellipsoid, must be parallel to the pusher wrench.
    #[test]
    fn corner_push_matches_max_power_on_sampled_limit_surface() {
        let p = params();
        let cfg = SimConfig::default();
        let ls = LimitSurface::<f64>::new(&p);
        let corner = Vec2::new(-0.06, 0.06);
        let s = std::f64::consts::FRAC_1_SQRT_2 * 0.001;
        let push = Vec2::new(s, -s);
        let (v, w) = motion_model(corner, push, &p, &cfg);

        let best = |lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64, n: usize| {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            for i in 0..=n {
                let a = lo_a + (hi_a - lo_a) * i as f64 / n as f64;
                for j in 0..=n {
                    let b = lo_b + (hi_b - lo_b) * j as f64 / n as f64;
                    let f = (ls.f_max * a.sin() * b.cos(), ls.f_max * a.sin() * b.sin(), ls.m_max * a.cos());
                    let power = f.0 * v.x + f.1 * v.y + f.2 * w;
                    if power > best.0 {
                        best = (power, a, b);
                    }
                }
            }
            best
        };
        let pi = std::f64::consts::PI;
        let (_, mut a, mut b) = best(0.0, pi, -pi, pi, 1000);
        let mut span = pi / 500.0;
        for _ in 0..6 {
            let r = best(a - span, a + span, b - span, b + span, 40);
            a = r.1;
            b = r.2;
            span /= 10.0;
        }
        let sampled = [ls.f_max * a.sin() * b.cos(), ls.f_max * a.sin() * b.sin(), ls.m_max * a.cos()];

        let face = face_at(corner, p.half_extents(), push);
        let resp = push_response(corner, face.inward_normal(), push, &ls, cfg.contact_friction);
        let f = resp.twist.v;
        let m = corner.cross(f);
        let k = ls.scale_to_surface(f, m);
        let expected = [f.x * k, f.y * k, m * k];
        let scale = (expected.iter().map(|e| e * e).sum::<f64>()).sqrt();
        for i in 0..3 {
            let rel = (sampled[i] - expected[i]).abs() / scale;
            assert!(rel < 1e-3, "component {i}: {} vs {}", sampled[i], expected[i]);
        }
    }
}
