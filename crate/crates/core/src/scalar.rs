//! Floating-point abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for messages and sufficient statistics.
///
/// Implemented for `f32` and `f64`. Counts stay integral; everything derived
/// from messages is carried in `T`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Lossy conversion used for counts and configuration values.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Real")
    }

    fn of_count(x: u32) -> Self {
        Self::of(f64::from(x))
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Value as it travels on the wire (4-byte IEEE single).
    fn to_wire(self) -> f32 {
        self.to_f32().unwrap_or(f32::NAN)
    }

    fn from_wire(v: f32) -> Self {
        Self::of(f64::from(v))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `max_i |a_i - b_i| / max_i |b_i|`, the norm-relative difference used by the
/// equivalence checks. Returns the absolute difference when `b` is all zeros.
pub fn relative_diff<T: Real>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_diff on slices of different length");
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        num = num.max((x.as_f64() - y.as_f64()).abs());
        den = den.max(y.as_f64().abs());
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_diff_scales_by_reference() {
        let a = [1.0f64, 2.0, 4.0];
        let b = [1.0f64, 2.0, 4.000004];
        assert!((relative_diff(&a, &b) - 1e-6).abs() < 1e-9);
        assert_eq!(relative_diff(&[0.5f32], &[0.0f32]), 0.5);
    }

    #[test]
    fn wire_roundtrip_is_single_precision() {
        let v = 0.1f64;
        let back = f64::from_wire(v.to_wire());
        assert!((back - v).abs() < 1e-8);
        assert_ne!(back, v);
    }
}
