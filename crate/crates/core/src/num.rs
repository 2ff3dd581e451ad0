//! Scalar abstraction shared by the scoring and optimisation code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable for metric, table and fitness values.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn from_usize<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Geometric mean computed as `exp(mean(ln w))` with each weight clamped to
/// at least `1e-9`. Returns `None` for an empty input.
pub fn geometric_mean<T: Scalar, I: IntoIterator<Item = T>>(weights: I) -> Option<T> {
    let floor = lit::<T>(1e-9);
    let mut n = 0usize;
    let mut acc = T::zero();
    for w in weights {
        acc = acc + w.max(floor).ln();
        n += 1;
    }
    (n > 0).then(|| (acc / from_usize(n)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_mean_matches_hand_values() {
        let g: f64 = geometric_mean([0.25, 1.0]).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        let g32: f32 = geometric_mean([0.25f32, 1.0]).unwrap();
        assert!((g32 - 0.5).abs() < 1e-6);
        assert!(geometric_mean::<f64, _>(std::iter::empty()).is_none());
    }

    #[test]
    fn zero_weight_is_clamped() {
        let g: f64 = geometric_mean([0.0, 1.0]).unwrap();
        assert!((g - 1e-9f64.sqrt()).abs() < 1e-15);
    }
}
