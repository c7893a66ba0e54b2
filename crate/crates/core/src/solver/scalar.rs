//! Integer arithmetic used by the search: `i128` when every sum fits, `BigInt`
//! otherwise.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) trait Scalar: Clone + Ord + Debug + Send + Sync {
    fn zero() -> Self;
    fn from_big(b: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    /// Ceiling of `self / o` for `o > 0`.
    fn div_ceil(&self, o: &Self) -> Self;

    fn is_negative(&self) -> bool {
        self.cmp(&Self::zero()) == Ordering::Less
    }

    fn is_positive(&self) -> bool {
        self.cmp(&Self::zero()) == Ordering::Greater
    }

    fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("value checked to fit")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ceil(&self, o: &Self) -> Self {
        Integer::div_ceil(self, o)
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_ceil(&self, o: &Self) -> Self {
        Integer::div_ceil(self, o)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
}

/// Largest magnitude allowed for any sum on the `i128` path. Products of two
/// such values still fit.
pub(crate) fn fits_fast(b: &BigInt) -> bool {
    Signed::abs(b).bits() <= 62
}
