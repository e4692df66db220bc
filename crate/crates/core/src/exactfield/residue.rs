use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{Field, FieldElement, FieldError, Result};

/// The finite field F_p[x]/(m) for a monic irreducible m of degree f.
/// Elements are coefficient vectors of length f, low degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u64,
    modulus: Vec<u64>,
}

pub type Fq = Vec<u64>;

impl ResidueField {
    /// `modulus` is monic, low degree first. For f = 1 pass `[0, 1]`.
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(FieldError::Invalid(format!("residue characteristic {p} is not prime")));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::Invalid("residue modulus must be monic with reduced coefficients".into()));
        }
        let f = ResidueField { p, modulus };
        if !f.modulus_irreducible() {
            return Err(FieldError::Invalid("residue modulus is reducible".into()));
        }
        Ok(f)
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        ResidueField::new(p, vec![0, 1])
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Fq {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> Fq {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> Fq {
        let mut e = self.zero();
        e[0] = v % self.p;
        e
    }

    pub fn from_bigint(&self, v: &BigInt) -> Fq {
        let r = v.mod_floor(&BigInt::from(self.p));
        self.from_u64(r.to_u64().unwrap())
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Fq {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Fq {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub fn scale(&self, a: &[u64], k: u64) -> Fq {
        a.iter().map(|x| mulmod(*x, k % self.p, self.p)).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Fq {
        let f = self.degree();
        let p = self.p;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mulmod(*x, *y, p)) % p;
            }
        }
        for k in (f..2 * f - 1).rev() {
            let t = prod[k];
            if t == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..f {
                let s = mulmod(t, self.modulus[i], p);
                prod[k - f + i] = (prod[k - f + i] + p - s) % p;
            }
        }
        prod.truncate(f);
        prod
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Fq {
        let mut acc = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &[u64]) -> Option<Fq> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.size() - 2))
        }
    }

    /// Integer code sum c_i p^i in [0, q).
    pub fn encode(&self, a: &[u64]) -> u64 {
        a.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn decode(&self, mut v: u64) -> Fq {
        let mut e = self.zero();
        for c in e.iter_mut() {
            *c = v % self.p;
            v /= self.p;
        }
        e
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: &[u64]) -> u64 {
        assert!(!self.is_zero(a));
        let n = self.size() - 1;
        let mut ord = n;
        for (r, _) in factor_u64(n) {
            while ord % r == 0 && self.pow(a, ord / r) == self.one() {
                ord /= r;
            }
        }
        ord
    }

    /// Membership in the subgroup of m-th powers of the multiplicative group.
    pub fn is_mth_power(&self, a: &[u64], m: u64) -> bool {
        let n = self.size() - 1;
        let g = m.gcd(&n);
        self.pow(a, n / g) == self.one()
    }

    fn modulus_irreducible(&self) -> bool {
        let f = self.degree();
        if f == 1 {
            return true;
        }
        // trial division by every monic polynomial of degree <= f/2
        for d in 1..=f / 2 {
            let count = self.p.checked_pow(d as u32).expect("residue field too large");
            assert!(count <= 1 << 22, "residue field too large for irreducibility check");
            for code in 0..count {
                let mut g = Vec::with_capacity(d + 1);
                let mut c = code;
                for _ in 0..d {
                    g.push(c % self.p);
                    c /= self.p;
                }
                g.push(1);
                if poly_rem_is_zero(&self.modulus, &g, self.p) {
                    return false;
                }
            }
        }
        true
    }
}

fn poly_rem_is_zero(a: &[u64], g: &[u64], p: u64) -> bool {
    let mut r = a.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let t = *r.last().unwrap();
        let k = r.len() - 1 - dg;
        for (i, gi) in g.iter().enumerate() {
            r[k + i] = (r[k + i] + p - mulmod(t, *gi, p)) % p;
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Catalog description of a prime of some tower field, before validation.
#[derive(Clone, Debug)]
pub struct PrimeSpec {
    pub label: String,
    pub generator: FieldElement,
    pub residue_char: u64,
    pub residue_size: u64,
    /// e of the prime in the extension used by non-norm tests
    pub ramification_index: u32,
    pub residue_degree: u32,
    /// [K:k] of the local extension used by non-norm tests
    pub extension_degree: u32,
    /// e of this prime over the prime below it in the centre F, when known
    pub base_ramification_index: Option<u32>,
    pub modulus: Vec<u64>,
    /// image in the residue field of each tower generator, bottom first
    pub generator_images: Vec<Fq>,
}

/// A prime of a tower field with an explicit reduction map to its residue field.
#[derive(Clone, Debug)]
pub struct LocalPrimeData {
    pub label: String,
    pub field: String,
    pub generator: FieldElement,
    pub residue_char: u64,
    pub residue_size: u64,
    pub ramification_index: u32,
    pub residue_degree: u32,
    pub extension_degree: u32,
    pub base_ramification_index: Option<u32>,
    pub residue: ResidueField,
    pub generator_images: Vec<Fq>,
    monomials: Vec<Fq>,
}

impl LocalPrimeData {
    pub(crate) fn new(field: &Field, spec: PrimeSpec) -> Result<Self> {
        let bad = |m: String| FieldError::Invalid(format!("prime {}: {m}", spec.label));
        field.check(&spec.generator)?;
        let residue = ResidueField::new(spec.residue_char, spec.modulus.clone())?;
        if residue.size() != spec.residue_size {
            return Err(bad(format!("q = {} is not p^f = {}", spec.residue_size, residue.size())));
        }
        if residue.degree() != spec.residue_degree as usize {
            return Err(bad("residue degree does not match modulus degree".into()));
        }
        if spec.ramification_index == 0 || spec.extension_degree % spec.ramification_index != 0 {
            return Err(bad("ramification index must divide the local degree".into()));
        }
        if spec.generator_images.len() != field.depth() {
            return Err(bad(format!("expected {} generator images", field.depth())));
        }
        for im in &spec.generator_images {
            if im.len() != residue.degree() || im.iter().any(|&c| c >= spec.residue_char) {
                return Err(bad("generator image is not a reduced residue".into()));
            }
        }
        let n = field.abs_degree();
        let monomials: Vec<Fq> = (0..n)
            .map(|k| {
                let exps = field.monomial_exponents(k);
                exps.iter().enumerate().fold(residue.one(), |acc, (j, &e)| {
                    residue.mul(&acc, &residue.pow(&spec.generator_images[j], e as u64))
                })
            })
            .collect();
        let p = LocalPrimeData {
            label: spec.label.clone(),
            field: field.id().to_string(),
            generator: spec.generator.clone(),
            residue_char: spec.residue_char,
            residue_size: spec.residue_size,
            ramification_index: spec.ramification_index,
            residue_degree: spec.residue_degree,
            extension_degree: spec.extension_degree,
            base_ramification_index: spec.base_ramification_index,
            residue,
            generator_images: spec.generator_images,
            monomials,
        };
        for level in 1..=field.depth() {
            let r = p.reduce_unchecked(&field.min_poly_residual(level))?;
            if !p.residue.is_zero(&r) {
                return Err(bad(format!("images violate the minimal polynomial at level {level}")));
            }
        }
        let g = p.reduce_unchecked(&p.generator)?;
        if !p.residue.is_zero(&g) {
            return Err(bad("generator does not reduce to zero".into()));
        }
        Ok(p)
    }

    fn reduce_unchecked(&self, x: &FieldElement) -> Result<Fq> {
        let f = &self.residue;
        let pb = BigInt::from(self.residue_char);
        if (&x.den % &pb).is_zero() {
            return Err(FieldError::NotIntegralAtPrime(self.label.clone()));
        }
        let mut acc = f.zero();
        for (c, m) in x.num.iter().zip(&self.monomials) {
            if c.is_zero() {
                continue;
            }
            let k = c.mod_floor(&pb).to_u64().unwrap();
            acc = f.add(&acc, &f.scale(m, k));
        }
        let d = f.from_bigint(&x.den);
        Ok(f.mul(&acc, &f.inv(&d).unwrap()))
    }

    /// Reduce x modulo this prime. Requires the denominator to be prime to p.
    pub fn reduce(&self, x: &FieldElement) -> Result<Fq> {
        if x.field_id() != self.field {
            return Err(FieldError::Mismatch(x.field_id().into(), self.field.clone()));
        }
        self.reduce_unchecked(x)
    }

    /// Reduction encoded as an integer in [0, q).
    pub fn reduce_code(&self, x: &FieldElement) -> Result<u64> {
        Ok(self.residue.encode(&self.reduce(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f729_irreducible_and_primitive() {
        let f = ResidueField::new(3, vec![2, 0, 0, 0, 0, 1, 1]).unwrap();
        assert_eq!(f.size(), 729);
        let x = vec![0, 1, 0, 0, 0, 0];
        assert_eq!(f.order(&x), 728);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 + 1 = (x+2)(x+3) mod 5
        assert!(ResidueField::new(5, vec![1, 0, 1]).is_err());
        assert!(ResidueField::new(7, vec![1, 0, 1]).is_ok());
    }

    #[test]
    fn order_and_powers_mod_13() {
        let f = ResidueField::prime_field(13).unwrap();
        let four = f.from_u64(4);
        assert_eq!(f.order(&four), 6);
        assert!(!f.is_mth_power(&four, 3));
        assert!(f.is_mth_power(&four, 2));
    }
}
