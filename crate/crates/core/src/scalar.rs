use std::fmt::{Debug, Display};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type the numerical code is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + LinalgScalar + ScalarOperand + Debug + Display + Default + Send + Sync + 'static
{
    /// World coordinates are kept on a lattice of `2^-WORLD_LATTICE_BITS` meters so that
    /// sums and differences of positions are exact.
    const WORLD_LATTICE_BITS: i32;

    /// Converts an `f64` literal or computed constant.
    fn lit(v: f64) -> Self;
    fn as_f64(self) -> f64;

    /// Hyperbolic tangent used by the recurrent layers. `f32` overrides it with a
    /// branch-free rational approximation that vectorizes.
    #[inline]
    fn tanh_fast(self) -> Self {
        self.tanh()
    }

    /// Rounds to the nearest world lattice point.
    #[inline]
    fn snap(self) -> Self {
        let scale = Self::lit(2f64.powi(Self::WORLD_LATTICE_BITS));
        (self * scale).round() / scale
    }
}

impl Scalar for f32 {
    const WORLD_LATTICE_BITS: i32 = 18;

    /// Odd 13/6 rational fit on `[-7.9053, 7.9053]`, within a few ulp of `tanh`.
    #[inline]
    fn tanh_fast(self) -> Self {
        let x = self.max(-7.905_311).min(7.905_311);
        let x2 = x * x;
        let mut p = x2 * -2.760_768_5e-16 + 2.000_187_9e-13;
        p = x2 * p + -8.604_671_5e-11;
        p = x2 * p + 5.122_297e-8;
        p = x2 * p + 1.485_722_4e-5;
        p = x2 * p + 6.372_619_3e-4;
        p = x2 * p + 4.893_524_6e-3;
        p *= x;
        let mut q = x2 * 1.198_258_4e-6 + 1.185_347_1e-4;
        q = x2 * q + 2.268_434_6e-3;
        q = x2 * q + 4.893_525e-3;
        p / q
    }

    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const WORLD_LATTICE_BITS: i32 = 40;

    #[inline]
    fn lit(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_tanh_tracks_libm() {
        let mut worst = 0.0f64;
        for i in -200_000..=200_000 {
            let x = i as f32 * 1e-4;
            let err = (x.tanh_fast() as f64 - (x as f64).tanh()).abs();
            worst = worst.max(err);
        }
        assert!(worst < 5e-7, "{worst}");
        assert_eq!(100f32.tanh_fast(), 1.0);
        assert_eq!((-100f32).tanh_fast(), -1.0);
        assert_eq!(0.3f64.tanh_fast(), 0.3f64.tanh());
    }
}
