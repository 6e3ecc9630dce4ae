//! Scalar abstraction shared by the analytic modules.
//!
//! Everything that is closed-form (unit conversions, spectral integration,
//! coincidence and key-rate formulas) is written against [`Real`], so the
//! same code runs in `f32` for quick landscapes and `f64` for validation.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance the adaptive quadrature aims for in this precision.
    const QUAD_RTOL: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Gauss error function.
    fn erf(self) -> Self;
}

impl Real for f32 {
    const QUAD_RTOL: f64 = 1e-5;

    fn erf(self) -> Self {
        libm::erff(self)
    }
}

impl Real for f64 {
    const QUAD_RTOL: f64 = 1e-9;

    fn erf(self) -> Self {
        libm::erf(self)
    }
}
