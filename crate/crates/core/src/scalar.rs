use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar field the engine is generic over. Implemented for every float type
/// with the usual `num-traits` surface (f32, f64, double-double types, ...).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Literal conversion; panics only if the type cannot hold an f64, which
    /// no supported scalar does.
    #[inline]
    fn lit(x: f64) -> Self {
        // NumCast rather than FromPrimitive::from_f64, whose default
        // implementation truncates to an integer
        <Self as num_traits::NumCast>::from(x).expect("scalar cannot represent f64 literal")
    }

    /// Unit roundoff measured from the arithmetic, |3(4/3 − 1) − 1|; some
    /// extended types report `epsilon()` as the smallest positive value.
    #[inline]
    fn precision() -> Self {
        let three = Self::lit(3.0);
        let e = (three * (Self::lit(4.0) / three - Self::one()) - Self::one()).abs();
        if e > Self::zero() {
            e.max(Self::epsilon())
        } else {
            Self::epsilon()
        }
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar cannot represent integer")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("scalar cannot represent integer")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

pub type C<T> = Complex<T>;

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn ci<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn creal<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// e^{iφ} for real φ.
#[inline]
pub fn cis<T: Real>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}

/// Frequency vector dot wave vector.
#[inline]
pub fn dot_k<T: Real>(omega: &[T], k: &[i32]) -> T {
    omega
        .iter()
        .zip(k)
        .fold(T::zero(), |acc, (&w, &kj)| acc + w * T::from_int(kj as i64))
}

pub fn norm_l1<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x.abs())
}
