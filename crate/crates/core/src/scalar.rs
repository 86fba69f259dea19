//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the motor, observer and controller math is written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sign of `x` as -1, 0 or +1, with zero for anything inside `[-deadband, deadband]`.
pub fn sign_with_deadband<T: Real>(x: T, deadband: T) -> i8 {
    if x > deadband {
        1
    } else if x < -deadband {
        -1
    } else {
        0
    }
}
