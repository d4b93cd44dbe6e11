use std::ops::{Add, Mul, Neg, Sub};

use crate::Scalar;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<S: Scalar>(a: S) -> S {
    let pi = S::PI();
    let two_pi = pi + pi;
    if a > -pi && a <= pi {
        return a;
    }
    let mut r = (a + pi) % two_pi;
    if r < S::zero() {
        r += two_pi;
    }
    let r = r - pi;
    if r <= -pi {
        r + two_pi
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    #[inline]
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by `angle`.
    #[inline]
    pub fn rotate(self, angle: S) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit vector, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > S::zero() && n.is_finite() {
            Some(Self::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn snap(self) -> Self {
        Self::new(self.x.snap(), self.y.snap())
    }

    pub fn cast<T: Scalar>(self) -> Vec2<T> {
        Vec2::new(T::lit(self.x.as_f64()), T::lit(self.y.as_f64()))
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Mul<S> for Vec2<S> {
    type Output = Self;
    #[inline]
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Planar pose of the object's geometric center in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D<S> {
    pub x: S,
    pub y: S,
    pub theta: S,
}

impl<S: Scalar> Pose2D<S> {
    /// Builds a pose, wrapping `theta` into `(-pi, pi]`.
    pub fn new(x: S, y: S, theta: S) -> Self {
        Self { x, y, theta: wrap_angle(theta) }
    }

    #[inline]
    pub fn position(&self) -> Vec2<S> {
        Vec2::new(self.x, self.y)
    }

    /// Expresses a world point in this pose's frame.
    #[inline]
    pub fn to_local(&self, p: Vec2<S>) -> Vec2<S> {
        (p - self.position()).rotate(-self.theta)
    }

    /// Maps a point of this pose's frame to the world.
    #[inline]
    pub fn to_world(&self, p: Vec2<S>) -> Vec2<S> {
        p.rotate(self.theta) + self.position()
    }

    /// Composes a body-frame increment `(dx, dy, dtheta)` onto this pose.
    pub fn compose(&self, dx: S, dy: S, dtheta: S) -> Self {
        let d = Vec2::new(dx, dy).rotate(self.theta);
        Self::new(self.x + d.x, self.y + d.y, self.theta + dtheta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn cast<T: Scalar>(&self) -> Pose2D<T> {
        Pose2D { x: T::lit(self.x.as_f64()), y: T::lit(self.y.as_f64()), theta: T::lit(self.theta.as_f64()) }
    }
}
