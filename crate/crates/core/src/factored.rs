//! Positive integers kept in factored form.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A positive integer as a map prime -> exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Factored(pub BTreeMap<u64, u32>);

impl Factored {
    pub fn one() -> Self {
        Factored(BTreeMap::new())
    }

    pub fn prime_power(p: u64, e: u32) -> Self {
        let mut m = BTreeMap::new();
        if e > 0 {
            m.insert(p, e);
        }
        Factored(m)
    }

    pub fn from_pairs(pairs: &[(u64, u32)]) -> Self {
        let mut f = Factored::one();
        for &(p, e) in pairs {
            f = f.mul(&Factored::prime_power(p, e));
        }
        f
    }

    /// Factor |n| by trial division. Panics on zero or on a cofactor above 2^64
    /// that trial division up to 10^6 cannot split.
    pub fn from_bigint(n: &BigInt) -> Self {
        assert!(!n.is_zero(), "cannot factor zero");
        Factored::from_biguint(&n.magnitude().clone())
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        let mut n = n.clone();
        let mut m = BTreeMap::new();
        let mut d: u64 = 2;
        while d < 1_000_000 && BigUint::from(d) * BigUint::from(d) <= n {
            let bd = BigUint::from(d);
            let mut e = 0;
            while (&n % &bd).is_zero() {
                n /= &bd;
                e += 1;
            }
            if e > 0 {
                m.insert(d, e);
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if !n.is_one() {
            let r = n.to_u64().expect("cofactor too large to factor");
            *m.entry(r).or_insert(0) += 1;
        }
        Factored(m)
    }

    pub fn from_u64(n: u64) -> Self {
        Factored::from_biguint(&BigUint::from(n))
    }

    pub fn value(&self) -> BigUint {
        self.0.iter().fold(BigUint::one(), |acc, (&p, &e)| acc * BigUint::from(p).pow(e))
    }

    pub fn mul(&self, o: &Factored) -> Factored {
        let mut m = self.0.clone();
        for (&p, &e) in &o.0 {
            *m.entry(p).or_insert(0) += e;
        }
        Factored(m)
    }

    pub fn pow(&self, k: u32) -> Factored {
        Factored(self.0.iter().filter(|_| k > 0).map(|(&p, &e)| (p, e * k)).collect())
    }

    pub fn divides(&self, o: &Factored) -> bool {
        self.0.iter().all(|(p, e)| o.0.get(p).is_some_and(|f| f >= e))
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    /// Text form such as `2^4*17^6`, or `1`.
    pub fn to_text(&self) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn gcd_value(&self, o: &Factored) -> BigUint {
        self.value().gcd(&o.value())
    }
}

impl fmt::Display for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_value() {
        let f = Factored::from_u64(2u64.pow(6) * 3u64.pow(4) * 13);
        assert_eq!(f, Factored::from_pairs(&[(2, 6), (3, 4), (13, 1)]));
        assert_eq!(f.value(), BigUint::from(2u64.pow(6) * 3u64.pow(4) * 13));
        assert_eq!(f.to_text(), "2^6*3^4*13");
        assert_eq!(Factored::from_u64(1), Factored::one());
    }
}
