//! Gaussian rationals: exact complex numbers with rational parts.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComplexRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl ComplexRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_integer(v: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(v)),
            BigRational::zero(),
        )
    }

    pub fn from_gaussian(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    /// Builds `re_num/re_den + i·im_num/im_den`. Zero denominators are rejected.
    pub fn from_fractions(re: (i64, i64), im: (i64, i64)) -> Option<Self> {
        if re.1 == 0 || im.1 == 0 {
            return None;
        }
        Some(Self::new(
            BigRational::new(re.0.into(), re.1.into()),
            BigRational::new(im.0.into(), im.1.into()),
        ))
    }

    pub fn from_rational(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        Self::new(&self.re * &k, &self.im * &k)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Numerator/denominator pairs for the config schema.
    pub fn to_fraction_pairs(&self) -> ([String; 2], [String; 2]) {
        (
            [self.re.numer().to_string(), self.re.denom().to_string()],
            [self.im.numer().to_string(), self.im.denom().to_string()],
        )
    }

    pub fn from_fraction_strings(re: &[String; 2], im: &[String; 2]) -> Option<Self> {
        let parse = |p: &[String; 2]| -> Option<BigRational> {
            let n: BigInt = p[0].trim().parse().ok()?;
            let d: BigInt = p[1].trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        };
        Some(Self::new(parse(re)?, parse(im)?))
    }
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}-{}i)", self.re, -self.im.clone())
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

impl<'a> Add<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn add(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl<'a> Sub<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn sub(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl<'a> Mul<&'a ComplexRational> for &'a ComplexRational {
    type Output = ComplexRational;
    fn mul(self, o: &ComplexRational) -> ComplexRational {
        ComplexRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re, -self.im)
    }
}

impl Neg for &ComplexRational {
    type Output = ComplexRational;
    fn neg(self) -> ComplexRational {
        ComplexRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl AddAssign<&ComplexRational> for ComplexRational {
    fn add_assign(&mut self, o: &ComplexRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_products() {
        let a = ComplexRational::from_gaussian(1, 2);
        let b = ComplexRational::from_gaussian(3, -1);
        assert_eq!(&a * &b, ComplexRational::from_gaussian(5, 5));
        assert_eq!(ComplexRational::i().pow(4), ComplexRational::one());
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, ComplexRational::one());
    }

    #[test]
    fn fraction_pairs_round_trip() {
        let a = ComplexRational::from_fractions((3, -6), (7, 4)).unwrap();
        let (re, im) = a.to_fraction_pairs();
        assert_eq!(ComplexRational::from_fraction_strings(&re, &im).unwrap(), a);
        assert!(ComplexRational::from_fractions((1, 0), (0, 1)).is_none());
    }
}
