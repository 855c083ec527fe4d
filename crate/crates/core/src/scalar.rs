use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the spectral and gap routines are written against.
///
/// Tolerances are part of the trait because the solver thresholds only make
/// sense relative to the precision of the underlying type.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative Newton correction below which a root counts as converged.
    fn newton_tol() -> Self;

    /// Derivative magnitude below which a Newton step is refused.
    fn tiny_derivative() -> Self;

    /// Slack allowed on the total mass of a probability vector.
    fn mass_tol() -> Self;

    /// Radius (relative to `max(1, |λ|)`) under which two roots are the same root.
    fn dedup_radius() -> Self;

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / Self::two()
    }

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("integer representable in scalar type")
    }

    #[inline]
    fn from_i128_lossy(x: i128) -> Self {
        Self::from_i128(x).expect("integer representable in scalar type")
    }

    #[inline]
    fn pi_squared() -> Self {
        Self::PI() * Self::PI()
    }
}

impl Real for f64 {
    #[inline]
    fn newton_tol() -> Self {
        1e-13
    }

    #[inline]
    fn tiny_derivative() -> Self {
        1e-300
    }

    #[inline]
    fn mass_tol() -> Self {
        1e-12
    }

    #[inline]
    fn dedup_radius() -> Self {
        1e-8
    }
}

impl Real for f32 {
    #[inline]
    fn newton_tol() -> Self {
        2e-6
    }

    #[inline]
    fn tiny_derivative() -> Self {
        1e-35
    }

    #[inline]
    fn mass_tol() -> Self {
        1e-5
    }

    #[inline]
    fn dedup_radius() -> Self {
        1e-4
    }
}
