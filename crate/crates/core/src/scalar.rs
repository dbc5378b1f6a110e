//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the simulator math is written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is unrepresentable,
    /// which cannot happen for finite literals in either supported width.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a % two_pi;
    if w > T::PI() {
        w = w - two_pi;
    } else if w <= -T::PI() {
        w = w + two_pi;
    }
    w
}

/// Normalises an angle into `[0, 2pi)`.
pub fn normalize_heading<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut h = a % two_pi;
    if h < T::zero() {
        h = h + two_pi;
    }
    if h >= two_pi {
        h = h - two_pi;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_range() {
        for k in -50..50 {
            let a = k as f64 * 0.37;
            let w = wrap_angle(a);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            let turns = (a - w) / (2.0 * std::f64::consts::PI);
            assert!((turns - turns.round()).abs() < 1e-9);
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
    }

    #[test]
    fn heading_normalised() {
        assert_eq!(normalize_heading(-0.0f32), 0.0);
        let h = normalize_heading(-std::f64::consts::FRAC_PI_2);
        assert!((h - 1.5 * std::f64::consts::PI).abs() < 1e-12);
    }
}
