//! Scalar abstraction for the numeric core.
//!
//! All similarity and aggregation math is generic over a floating-point
//! scalar so the pipeline can run in `f32` or `f64`. The CLI and the
//! canonical report format use [`crate::Score`] (`f64`).

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable throughout the pipeline: vector entries,
/// pertinence scores, thresholds, and aggregated results.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Clamps into `[0, 1]`, the range of pertinence scores.
    fn clamp_unit(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + AddAssign
        + Sum
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_unit_bounds() {
        assert_eq!((-0.5f64).clamp_unit(), 0.0);
        assert_eq!(1.5f64.clamp_unit(), 1.0);
        assert_eq!(0.25f32.clamp_unit(), 0.25);
    }
}
