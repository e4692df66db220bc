use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element of a tower field in the flattened power basis.
///
/// Coordinates are `num[k] / den` with `den > 0` and the whole vector reduced,
/// so two elements are equal iff their representations are equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub(crate) field: Arc<str>,
    pub(crate) num: Vec<BigInt>,
    pub(crate) den: BigInt,
}

impl FieldElement {
    pub(crate) fn from_parts(field: Arc<str>, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        normalize(&mut num, &mut den);
        FieldElement { field, num, den }
    }

    pub fn field_id(&self) -> &str {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coords(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|n| BigRational::new(n.clone(), self.den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// True when the element is a rational number (all non-constant coordinates vanish).
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Coordinates have denominator one. For the catalog towers the power basis
    /// spans a suborder, so this is sufficient but not necessary for integrality.
    pub fn has_integral_coords(&self) -> bool {
        self.den.is_one()
    }

    /// Canonical text form of each coordinate, e.g. `["1/2", "-3", "0"]`.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords().iter().map(rational_to_string).collect()
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.field, self.to_strings())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_strings().join(", "))
    }
}

pub(crate) fn normalize(num: &mut [BigInt], den: &mut BigInt) {
    assert!(!den.is_zero(), "zero denominator");
    if num.iter().all(Zero::is_zero) {
        *den = BigInt::one();
        return;
    }
    let mut g = den.abs();
    for n in num.iter() {
        if g.is_one() {
            break;
        }
        if !n.is_zero() {
            g = g.gcd(n);
        }
    }
    if den.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for n in num.iter_mut() {
            *n = &*n / &g;
        }
        *den = &*den / &g;
    }
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            Some(BigRational::new(a, b))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}
