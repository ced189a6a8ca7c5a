//! Scalar abstraction for the numeric core.
//!
//! Datasets and the distance/estimation machinery are generic over [`Real`]
//! so the same code paths serve the f32 pixel pipeline and f64 synthetic
//! experiments. Distance accumulation always happens in f64 regardless of
//! the storage scalar.

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable as dataset storage: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Raw bit pattern, for bit-exact row comparison and hashing.
    fn to_bits_u64(self) -> u64;

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }
}

impl Real for f32 {
    fn to_bits_u64(self) -> u64 {
        self.to_bits() as u64
    }
}

impl Real for f64 {
    fn to_bits_u64(self) -> u64 {
        self.to_bits()
    }
}
