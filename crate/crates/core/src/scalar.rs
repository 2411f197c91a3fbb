//! Floating scalar abstraction for the analytic kernels.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar the analytic kernels are generic over.
///
/// Everything required downstream is a bound here, so instantiating the
/// kernels at f32 for a smoke test or at f64 for production needs no code
/// change. Tolerances stated as f64 literals are converted with
/// `from_f64`, which is lossy at f32; certified results are only claimed
/// for f64 (see the crate-root aliases).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion of tolerance literals.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("tolerance literal not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
