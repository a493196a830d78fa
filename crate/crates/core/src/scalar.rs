//! Scalar abstraction: every kernel in this crate is generic over the
//! floating-point type, with `f64` aliases exported at the crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type usable by the solver and its kernels.
///
/// `RealField` supplies field arithmetic, ordering, and the elementary
/// functions used by the eigensolvers; the `num-traits` bounds convert the
/// `f64` literals in which tolerances and defaults are naturally written.
pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy {
    /// Convert an `f64` constant (tolerance, default, literal) into `Self`.
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant must be representable")
    }

    /// View this value as `f64` for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {}
impl Scalar for f32 {}
