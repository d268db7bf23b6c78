//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algebra lives over `Complex<T>` for a real field `T`. The bound set is
//! what nalgebra's decompositions need plus the `num-traits` conversions used
//! to write literals and report values.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar field: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into the field.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the field.
    fn epsilon() -> Self;
}

impl Real for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<C<T>>;
/// Dense complex column vector.
pub type CVec<T> = DVector<C<T>>;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn zero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn one<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Largest entry modulus; zero for empty input.
pub fn max_abs<'a, T: Real>(it: impl IntoIterator<Item = &'a C<T>>) -> T {
    it.into_iter()
        .map(|z| z.modulus())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}
