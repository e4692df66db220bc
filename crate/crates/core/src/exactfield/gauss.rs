use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::element::rational_to_string;
use super::FieldElement;

/// An element of Q(i) as a pair of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRational::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn zero() -> Self {
        GaussRational::from_ints(0, 0)
    }

    pub fn one() -> Self {
        GaussRational::from_ints(1, 0)
    }

    /// Read an element of Q or Q(i) (one or two flattened coordinates).
    pub fn from_element(x: &FieldElement) -> Self {
        let c = x.coords();
        match c.len() {
            1 => GaussRational::new(c[0].clone(), BigRational::zero()),
            2 => GaussRational::new(c[0].clone(), c[1].clone()),
            n => panic!("element of degree {n} is not in Q(i)"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2 = re^2 + im^2
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(GaussRational::new(&self.re / &n, -&self.im / &n))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.clone() * i)
    }

    pub fn integer_parts(&self) -> Option<(BigInt, BigInt)> {
        if !self.is_gaussian_integer() {
            return None;
        }
        Some((self.re.numer().clone(), self.im.numer().clone()))
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
}

impl Add for GaussRational {
    type Output = GaussRational;
    fn add(self, o: Self) -> Self {
        GaussRational::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for GaussRational {
    type Output = GaussRational;
    fn sub(self, o: Self) -> Self {
        GaussRational::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for GaussRational {
    type Output = GaussRational;
    fn mul(self, o: Self) -> Self {
        GaussRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> Self {
        GaussRational::new(-self.re, -self.im)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", rational_to_string(&self.re), rational_to_string(&self.im))
    }
}
