//! Scalar abstraction: every quantity in this crate is generic over the real
//! floating-point type underlying states and operators. Matrix entries are
//! `Complex<T>`; moments, angles and variances are plain `T`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Real floating-point scalar backing all linear algebra in this crate.
///
/// Implemented for `f32` and `f64`. The `nalgebra::RealField` supertrait
/// supplies the elementary functions; the num-traits conversions make
/// tolerance constants and I/O independent of the concrete type.
pub trait Scalar:
    nalgebra::RealField
    + num_traits::FromPrimitive
    + num_traits::NumCast
    + std::iter::Sum
    + Copy
    + Default
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon of the concrete type.
    fn machine_epsilon() -> Self;

    /// Lossy conversion from an `f64` literal (tolerances, grid bounds, ...).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert to Scalar")
    }

    /// Lossy widening/narrowing to `f64` for reporting and integer-ish logic.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("Scalar must convert to f64")
    }
}

impl Scalar for f32 {
    fn machine_epsilon() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn machine_epsilon() -> Self {
        f64::EPSILON
    }
}

/// Dense complex matrix over the real scalar `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over the real scalar `T`.
pub type CVector<T> = DVector<Complex<T>>;

/// A tolerance constant, floored at a small multiple of the machine epsilon so
/// that `f32` instantiations do not demand `f64`-grade agreement. For `f64`
/// the floor is inactive and the constant is used verbatim.
pub(crate) fn tol<T: Scalar>(value: f64) -> T {
    let floor = T::machine_epsilon() * T::of(256.0);
    nalgebra::RealField::max(T::of(value), floor)
}

/// Complex unit with zero imaginary part.
pub(crate) fn cx<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
