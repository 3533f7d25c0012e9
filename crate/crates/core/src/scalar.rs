//! Scalar abstraction shared by the numerical modules.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything transcendental comes from [`RealField`]; conversions go through
/// num-traits. The tolerance hooks scale the library's contract checks to the
/// precision of the type (the documented 1e-10/1e-12 contracts are the `f64`
/// values).
pub trait Real: RealField + Copy + ToPrimitive {
    /// Coefficients with modulus below this are dropped on canonicalization.
    fn prune_tol() -> Self;
    /// Allowed deviation of a state norm from one.
    fn norm_tol() -> Self;
    /// Generic numerical-contract tolerance (PSD floor, trace, reality checks).
    fn contract_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn prune_tol() -> Self {
        1e-12
    }
    fn norm_tol() -> Self {
        1e-10
    }
    fn contract_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn prune_tol() -> Self {
        1e-6
    }
    fn norm_tol() -> Self {
        1e-5
    }
    fn contract_tol() -> Self {
        1e-4
    }
}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
