//! Floating point abstraction used throughout the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the kinematics is computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values at all, which no implementor does.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal not representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// Wraps an angle into `[0, 2π)`.
    fn wrap_angle(self) -> Self {
        let tau = Self::TAU();
        let w = self % tau;
        let w = if w < Self::zero() { w + tau } else { w };
        // -tiny % tau + tau rounds to tau
        if w >= tau {
            Self::zero()
        } else {
            w
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert_eq!((3.0 * PI).wrap_angle(), PI);
        assert!(((-PI / 2.0).wrap_angle() - 1.5 * PI).abs() < 1e-15);
        assert_eq!((-1e-300f64).wrap_angle(), 0.0);
        assert_eq!((2.0 * PI).wrap_angle(), 0.0);
        assert_eq!(0.5f32.wrap_angle(), 0.5);
    }
}
