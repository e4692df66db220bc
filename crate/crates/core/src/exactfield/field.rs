use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::element::FieldElement;
use super::residue::{LocalPrimeData, PrimeSpec};
use super::{ArithOp, FieldError, GaussRational, Result};

/// One extension step: adjoin a root of a monic integral polynomial over the
/// previous prefix field.
#[derive(Clone, Debug)]
struct Level {
    degree: usize,
    /// absolute degree of the prefix below this level
    below: usize,
    /// integral coefficients c_0..c_{d-1} over the prefix (leading 1 implicit)
    coeffs: Vec<Vec<BigInt>>,
}

#[derive(Clone)]
struct FieldData {
    id: Arc<str>,
    base: Option<Field>,
    levels: Vec<Level>,
    abs_degree: usize,
    integral_basis: Vec<FieldElement>,
    sigma: Option<Automorphism>,
    named: Vec<(String, Automorphism)>,
    primes: Vec<LocalPrimeData>,
    embedding_hint: Option<(f64, f64)>,
}

/// A field in a tower over Q. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<FieldData>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({}, degree {})", self.0.id, self.0.abs_degree)
    }
}

/// A field automorphism stored as a Q-linear map on the flattened power basis.
#[derive(Clone, Debug)]
pub struct Automorphism {
    field: Arc<str>,
    images: Vec<FieldElement>,
    /// column k = numerators of the image of monomial k, over `den`
    cols: Vec<Vec<BigInt>>,
    den: BigInt,
}

impl Automorphism {
    pub fn images(&self) -> &[FieldElement] {
        &self.images
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        assert_eq!(x.field, self.field, "automorphism applied to foreign element");
        let n = x.num.len();
        let mut out = vec![BigInt::zero(); n];
        for (k, c) in x.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, m) in out.iter_mut().zip(&self.cols[k]) {
                if !m.is_zero() {
                    *o += c * m;
                }
            }
        }
        FieldElement::from_parts(x.field.clone(), out, &x.den * &self.den)
    }

    pub fn is_identity(&self) -> bool {
        self.den.is_one()
            && self.cols.iter().enumerate().all(|(k, col)| {
                col.iter()
                    .enumerate()
                    .all(|(j, v)| if j == k { v.is_one() } else { v.is_zero() })
            })
    }
}

impl Field {
    /// The rational numbers.
    pub fn rationals() -> Field {
        Field(Arc::new(FieldData {
            id: Arc::from("Q"),
            base: None,
            levels: Vec::new(),
            abs_degree: 1,
            integral_basis: vec![FieldElement::from_parts(
                Arc::from("Q"),
                vec![BigInt::one()],
                BigInt::one(),
            )],
            sigma: None,
            named: Vec::new(),
            primes: Vec::new(),
            embedding_hint: None,
        }))
    }

    /// Q(i) with the power basis {1, i}, complex conjugation as generator and i embedded as +i.
    pub fn gaussian() -> Field {
        let q = Field::rationals();
        let one = q.one();
        let zero = q.zero();
        let f = Field::extension("Qi", &q, &[one.clone(), zero, one]).expect("x^2+1");
        let f = f.with_embedding_hint(0.0, 1.0);
        let conj = f.from_ints(&[0, -1]).unwrap();
        f.with_sigma(&[conj]).expect("conjugation")
    }

    /// Adjoin a root of the monic polynomial `min_poly` (coefficients low to
    /// high, elements of `base`, leading coefficient 1).
    pub fn extension(id: &str, base: &Field, min_poly: &[FieldElement]) -> Result<Field> {
        if id == "Q" {
            return Err(FieldError::Invalid("id Q is reserved".into()));
        }
        if min_poly.len() < 2 {
            return Err(FieldError::Invalid(format!("{id}: minimal polynomial must have degree >= 1")));
        }
        let degree = min_poly.len() - 1;
        for c in min_poly {
            base.check(c)?;
        }
        if !min_poly[degree].is_one() {
            return Err(FieldError::Invalid(format!("{id}: minimal polynomial is not monic")));
        }
        let mut coeffs = Vec::with_capacity(degree);
        for c in &min_poly[..degree] {
            if !c.has_integral_coords() {
                return Err(FieldError::Invalid(format!(
                    "{id}: generator must be an algebraic integer with integral minimal polynomial"
                )));
            }
            coeffs.push(c.num.clone());
        }
        let mut levels = base.0.levels.clone();
        levels.push(Level { degree, below: base.0.abs_degree, coeffs });
        let abs_degree = base.0.abs_degree * degree;
        let idarc: Arc<str> = Arc::from(id);
        let power_basis = (0..degree)
            .map(|j| {
                let mut v = vec![BigInt::zero(); abs_degree];
                v[j * base.0.abs_degree] = BigInt::one();
                FieldElement::from_parts(idarc.clone(), v, BigInt::one())
            })
            .collect();
        let f = Field(Arc::new(FieldData {
            id: idarc,
            base: Some(base.clone()),
            levels,
            abs_degree,
            integral_basis: power_basis,
            sigma: None,
            named: Vec::new(),
            primes: Vec::new(),
            embedding_hint: None,
        }));
        if !f.is_irreducible_hint() {
            return Err(FieldError::Invalid(format!("{id}: minimal polynomial has a root in the base")));
        }
        Ok(f)
    }

    // Cheap sanity check: for degree 2 and 3 a reducible polynomial has a root in the
    // base; detect rational roots only when the base is Q.
    fn is_irreducible_hint(&self) -> bool {
        let lvl = self.0.levels.last().unwrap();
        if lvl.below != 1 || lvl.degree > 3 {
            return true;
        }
        let c0 = &lvl.coeffs[0][0];
        if c0.is_zero() {
            return false;
        }
        // rational roots of a monic integer polynomial divide c0
        let bound = c0.abs();
        let small: Option<i64> = num_traits::ToPrimitive::to_i64(&bound);
        let Some(b) = small else { return true };
        if b > 1_000_000 {
            return true;
        }
        for r in 1..=b {
            if b % r != 0 {
                continue;
            }
            for s in [r, -r] {
                let x = BigInt::from(s);
                let mut acc = BigInt::one();
                for c in lvl.coeffs.iter().rev() {
                    acc = acc * &x + &c[0];
                }
                if acc.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn modify(&self, f: impl FnOnce(&mut FieldData)) -> Field {
        let mut data = (*self.0).clone();
        f(&mut data);
        Field(Arc::new(data))
    }

    pub fn with_embedding_hint(&self, re: f64, im: f64) -> Field {
        self.modify(|d| d.embedding_hint = Some((re, im)))
    }

    /// Set the integral basis of the ring of integers over the base's ring of integers.
    pub fn with_integral_basis(&self, basis: &[FieldElement]) -> Result<Field> {
        if basis.len() != self.degree() {
            return Err(FieldError::BasisLength { expected: self.degree(), got: basis.len() });
        }
        for b in basis {
            self.check(b)?;
        }
        // linear independence over the base: the coefficient matrix over the
        // base must be invertible
        if let Some(base) = &self.0.base {
            let m: Vec<Vec<FieldElement>> = basis.iter().map(|b| self.base_coeffs(b)).collect();
            let det = super::linalg::determinant(base, m)?;
            if det.is_zero() {
                return Err(FieldError::Invalid(format!("{}: integral basis is dependent", self.0.id)));
            }
        }
        let basis = basis.to_vec();
        Ok(self.modify(|d| d.integral_basis = basis))
    }

    /// Set the relative Galois generator over the base from the images of all tower generators.
    pub fn with_sigma(&self, images: &[FieldElement]) -> Result<Field> {
        let a = self.automorphism_from_images(images)?;
        for j in 1..self.depth() {
            if a.images[j - 1] != self.generator(j) {
                return Err(FieldError::Invalid(format!("{}: sigma does not fix the base", self.0.id)));
            }
        }
        let d = self.degree();
        let top = self.generator(self.depth());
        let mut y = top.clone();
        for m in 1..=d {
            y = a.apply(&y);
            if (y == top) != (m == d) {
                return Err(FieldError::Invalid(format!(
                    "{}: sigma must have order exactly {d} over the base",
                    self.0.id
                )));
            }
        }
        Ok(self.modify(|dd| dd.sigma = Some(a)))
    }

    /// Register an extra named automorphism (for example the generator of Gal(E/F)).
    pub fn with_named_automorphism(&self, name: &str, images: &[FieldElement]) -> Result<Field> {
        let a = self.automorphism_from_images(images)?;
        let name = name.to_string();
        Ok(self.modify(|d| {
            d.named.retain(|(n, _)| *n != name);
            d.named.push((name, a));
        }))
    }

    pub fn with_prime(&self, spec: PrimeSpec) -> Result<Field> {
        let p = LocalPrimeData::new(self, spec)?;
        Ok(self.modify(|d| d.primes.push(p)))
    }

    pub fn id(&self) -> &str {
        &self.0.id
    }

    pub(crate) fn id_arc(&self) -> Arc<str> {
        self.0.id.clone()
    }

    pub fn base(&self) -> Option<&Field> {
        self.0.base.as_ref()
    }

    /// Number of extension steps above Q.
    pub fn depth(&self) -> usize {
        self.0.levels.len()
    }

    /// Degree over the base field.
    pub fn degree(&self) -> usize {
        self.0.levels.last().map_or(1, |l| l.degree)
    }

    pub fn abs_degree(&self) -> usize {
        self.0.abs_degree
    }

    pub fn level_degrees(&self) -> Vec<usize> {
        self.0.levels.iter().map(|l| l.degree).collect()
    }

    pub fn integral_basis(&self) -> &[FieldElement] {
        &self.0.integral_basis
    }

    pub fn sigma(&self) -> Result<&Automorphism> {
        self.0.sigma.as_ref().ok_or_else(|| FieldError::NoGenerator(self.0.id.to_string()))
    }

    pub fn has_sigma(&self) -> bool {
        self.0.sigma.is_some()
    }

    pub fn named_automorphism(&self, name: &str) -> Result<&Automorphism> {
        self.0
            .named
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| FieldError::UnknownAutomorphism(name.to_string()))
    }

    pub fn named_automorphisms(&self) -> impl Iterator<Item = (&str, &Automorphism)> {
        self.0.named.iter().map(|(n, a)| (n.as_str(), a))
    }

    pub fn primes(&self) -> &[LocalPrimeData] {
        &self.0.primes
    }

    pub fn prime(&self, label: &str) -> Option<&LocalPrimeData> {
        self.0.primes.iter().find(|p| p.label == label)
    }

    pub fn embedding_hint(&self) -> Option<(f64, f64)> {
        self.0.embedding_hint
    }

    /// Coefficients c_0..c_d of the minimal polynomial of the top generator over the base.
    pub fn min_poly(&self) -> Vec<FieldElement> {
        let base = self.base().cloned().unwrap_or_else(Field::rationals);
        match self.0.levels.last() {
            None => vec![self.zero(), self.one()],
            Some(l) => {
                let mut v: Vec<FieldElement> = l
                    .coeffs
                    .iter()
                    .map(|c| FieldElement::from_parts(base.id_arc(), c.clone(), BigInt::one()))
                    .collect();
                v.push(base.one());
                v
            }
        }
    }

    /// The prefix field at the given depth (0 = Q).
    pub fn prefix(&self, depth: usize) -> Field {
        assert!(depth <= self.depth());
        let mut f = self.clone();
        while f.depth() > depth {
            f = f.base().unwrap().clone();
        }
        f
    }

    /// The chain Q, K_1, …, self.
    pub fn chain(&self) -> Vec<Field> {
        (0..=self.depth()).map(|d| self.prefix(d)).collect()
    }

    pub fn is_subfield(&self, sub: &Field) -> bool {
        sub.depth() <= self.depth() && self.prefix(sub.depth()).id() == sub.id()
    }

    fn check_subfield(&self, sub: &Field) -> Result<()> {
        if self.is_subfield(sub) {
            Ok(())
        } else {
            Err(FieldError::NotSubfield(sub.id().into(), self.id().into()))
        }
    }

    pub fn check(&self, x: &FieldElement) -> Result<()> {
        if *x.field != *self.0.id || x.num.len() != self.0.abs_degree {
            return Err(FieldError::Mismatch(x.field.to_string(), self.0.id.to_string()));
        }
        Ok(())
    }

    fn check2(&self, a: &FieldElement, b: &FieldElement) -> Result<()> {
        self.check(a)?;
        self.check(b)
    }

    // ---------------------------------------------------------------- constructors

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.0.id.clone(),
            num: vec![BigInt::zero(); self.0.abs_degree],
            den: BigInt::one(),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> FieldElement {
        self.from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(&self, r: &BigRational) -> FieldElement {
        let mut num = vec![BigInt::zero(); self.0.abs_degree];
        num[0] = r.numer().clone();
        FieldElement::from_parts(self.0.id.clone(), num, r.denom().clone())
    }

    /// Build from integer flattened coordinates.
    pub fn from_ints(&self, coords: &[i64]) -> Result<FieldElement> {
        let r: Vec<BigRational> = coords.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        self.from_coords(&r)
    }

    /// Build from rational flattened coordinates.
    pub fn from_coords(&self, coords: &[BigRational]) -> Result<FieldElement> {
        if coords.len() != self.0.abs_degree {
            return Err(FieldError::Invalid(format!(
                "{}: expected {} coordinates, got {}",
                self.0.id,
                self.0.abs_degree,
                coords.len()
            )));
        }
        let mut den = BigInt::one();
        for c in coords {
            den = den.lcm(c.denom());
        }
        let num = coords.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Ok(FieldElement::from_parts(self.0.id.clone(), num, den))
    }

    pub fn from_numerators(&self, num: Vec<BigInt>, den: BigInt) -> Result<FieldElement> {
        if num.len() != self.0.abs_degree || den.is_zero() {
            return Err(FieldError::Invalid(format!("{}: bad numerator vector", self.0.id)));
        }
        Ok(FieldElement::from_parts(self.0.id.clone(), num, den))
    }

    /// The generator adjoined at tower level `level` (1-based), as an element of this field.
    pub fn generator(&self, level: usize) -> FieldElement {
        assert!(level >= 1 && level <= self.depth());
        let mut num = vec![BigInt::zero(); self.0.abs_degree];
        num[self.0.levels[level - 1].below] = BigInt::one();
        FieldElement::from_parts(self.0.id.clone(), num, BigInt::one())
    }

    /// Embed an element of a prefix field.
    pub fn lift(&self, x: &FieldElement) -> Result<FieldElement> {
        if *x.field == *self.0.id {
            return Ok(x.clone());
        }
        let d = (0..self.depth())
            .find(|&d| *self.prefix(d).0.id == *x.field)
            .ok_or_else(|| FieldError::NotSubfield(x.field.to_string(), self.0.id.to_string()))?;
        let sub = self.prefix(d);
        sub.check(x)?;
        let mut num = x.num.clone();
        num.resize(self.0.abs_degree, BigInt::zero());
        Ok(FieldElement { field: self.0.id.clone(), num, den: x.den.clone() })
    }

    /// Express an element of this field lying in the prefix `sub` as an element of `sub`.
    pub fn project(&self, x: &FieldElement, sub: &Field) -> Result<FieldElement> {
        self.check(x)?;
        self.check_subfield(sub)?;
        let m = sub.abs_degree();
        if x.num[m..].iter().any(|c| !c.is_zero()) {
            return Err(FieldError::NotInSubfield(sub.id().into()));
        }
        Ok(FieldElement::from_parts(sub.id_arc(), x.num[..m].to_vec(), x.den.clone()))
    }

    /// Coefficients of x in the relative power basis over the base.
    pub fn base_coeffs(&self, x: &FieldElement) -> Vec<FieldElement> {
        let base = self.base().expect("Q has no base");
        let m = base.abs_degree();
        x.num
            .chunks(m)
            .map(|ch| FieldElement::from_parts(base.id_arc(), ch.to_vec(), x.den.clone()))
            .collect()
    }

    pub fn from_base_coeffs(&self, coeffs: &[FieldElement]) -> Result<FieldElement> {
        let base = self.base().ok_or_else(|| FieldError::Invalid("Q has no base".into()))?;
        if coeffs.len() != self.degree() {
            return Err(FieldError::BasisLength { expected: self.degree(), got: coeffs.len() });
        }
        let mut acc = self.zero();
        for (j, c) in coeffs.iter().enumerate() {
            base.check(c)?;
            let t = self.mul(&self.lift(c)?, &self.pow(&self.generator(self.depth()), j as u64))?;
            acc = self.add(&acc, &t)?;
        }
        Ok(acc)
    }

    // ---------------------------------------------------------------- arithmetic

    pub fn arith(&self, op: ArithOp, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b),
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check2(a, b)?;
        Ok(add_raw(a, b, false))
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check2(a, b)?;
        Ok(add_raw(a, b, true))
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement { field: a.field.clone(), num: a.num.iter().map(|c| -c).collect(), den: a.den.clone() }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check2(a, b)?;
        let num = mul_int(&self.0.levels, &a.num, &b.num);
        Ok(FieldElement::from_parts(self.0.id.clone(), num, &a.den * &b.den))
    }

    pub fn scale(&self, a: &FieldElement, r: &BigRational) -> FieldElement {
        let num = a.num.iter().map(|c| c * r.numer()).collect();
        FieldElement::from_parts(a.field.clone(), num, &a.den * r.denom())
    }

    pub fn pow(&self, a: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base).unwrap();
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base).unwrap();
            }
        }
        acc
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.inv_nonzero(a))
    }

    fn inv_nonzero(&self, a: &FieldElement) -> FieldElement {
        let Some(base) = self.base() else {
            return FieldElement::from_parts(self.0.id.clone(), vec![a.den.clone()], a.num[0].clone());
        };
        // extended Euclid in base[X] between the minimal polynomial and a(X)
        let mut r0 = self.min_poly();
        let mut r1 = trim(base, self.base_coeffs(a));
        let mut s0: Vec<FieldElement> = Vec::new();
        let mut s1 = vec![base.one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(base, &r0, &r1);
            let s2 = poly_sub(base, &s0, &poly_mul(base, &q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        assert_eq!(r0.len(), 1, "minimal polynomial of {} is reducible", self.0.id);
        let c = base.inv_nonzero(&r0[0]);
        let mut coeffs: Vec<FieldElement> = s0.iter().map(|s| base.mul(s, &c).unwrap()).collect();
        coeffs.resize(self.degree(), base.zero());
        // s0 has degree < d and represents a^{-1} directly in the relative power basis
        let mut num = Vec::with_capacity(self.0.abs_degree);
        let mut den = BigInt::one();
        for c in &coeffs {
            den = den.lcm(&c.den);
        }
        for c in &coeffs {
            let f = &den / &c.den;
            num.extend(c.num.iter().map(|v| v * &f));
        }
        FieldElement::from_parts(self.0.id.clone(), num, den)
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check2(a, b)?;
        let bi = self.inv(b)?;
        self.mul(a, &bi)
    }

    // ---------------------------------------------------------------- automorphisms

    /// Build the Q-linear map sending the tower generators to `images`.
    /// Fails unless every minimal polynomial relation is preserved.
    pub fn automorphism_from_images(&self, images: &[FieldElement]) -> Result<Automorphism> {
        if images.len() != self.depth() {
            return Err(FieldError::Invalid(format!(
                "{}: automorphism needs {} generator images, got {}",
                self.0.id,
                self.depth(),
                images.len()
            )));
        }
        for im in images {
            self.check(im)?;
        }
        let n = self.0.abs_degree;
        let mut monos: Vec<FieldElement> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.one();
            for (j, lvl) in self.0.levels.iter().enumerate() {
                let e = (k / lvl.below) % lvl.degree;
                if e > 0 {
                    acc = self.mul(&acc, &self.pow(&images[j], e as u64))?;
                }
            }
            monos.push(acc);
        }
        let mut den = BigInt::one();
        for m in &monos {
            den = den.lcm(&m.den);
        }
        let cols = monos
            .iter()
            .map(|m| {
                let f = &den / &m.den;
                m.num.iter().map(|v| v * &f).collect()
            })
            .collect();
        let a = Automorphism { field: self.0.id.clone(), images: images.to_vec(), cols, den };
        // relation check at every level
        for (j, lvl) in self.0.levels.iter().enumerate() {
            let img = &images[j];
            let mut acc = self.pow(img, lvl.degree as u64);
            for (i, c) in lvl.coeffs.iter().enumerate() {
                let mut cnum = c.clone();
                cnum.resize(n, BigInt::zero());
                let cl = FieldElement::from_parts(self.0.id.clone(), cnum, BigInt::one());
                let t = self.mul(&a.apply(&cl), &self.pow(img, i as u64))?;
                acc = self.add(&acc, &t)?;
            }
            if !acc.is_zero() {
                return Err(FieldError::Invalid(format!(
                    "{}: generator images do not satisfy the minimal polynomial at level {}",
                    self.0.id,
                    j + 1
                )));
            }
        }
        Ok(a)
    }

    /// Compose: (a ∘ b)(x) = a(b(x)).
    pub fn compose(&self, a: &Automorphism, b: &Automorphism) -> Result<Automorphism> {
        let images: Vec<FieldElement> = b.images.iter().map(|im| a.apply(im)).collect();
        self.automorphism_from_images(&images)
    }

    pub fn automorphism_pow(&self, a: &Automorphism, k: usize) -> Result<Automorphism> {
        let mut acc = self.identity_automorphism();
        for _ in 0..k {
            acc = self.compose(a, &acc)?;
        }
        Ok(acc)
    }

    pub fn identity_automorphism(&self) -> Automorphism {
        let images: Vec<FieldElement> = (1..=self.depth()).map(|j| self.generator(j)).collect();
        self.automorphism_from_images(&images).expect("identity")
    }

    /// Order of an automorphism as a group element.
    pub fn automorphism_order(&self, a: &Automorphism) -> usize {
        let gens: Vec<FieldElement> = (1..=self.depth()).map(|j| self.generator(j)).collect();
        let mut cur = gens.clone();
        for k in 1..=self.abs_degree() {
            cur = cur.iter().map(|c| a.apply(c)).collect();
            if cur == gens {
                return k;
            }
        }
        unreachable!("automorphism order exceeds field degree")
    }

    /// Apply the relative Galois generator `power` times.
    pub fn apply_automorphism(&self, power: usize, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        let s = self.sigma()?;
        let mut y = x.clone();
        for _ in 0..power % self.degree() {
            y = s.apply(&y);
        }
        Ok(y)
    }

    // ---------------------------------------------------------------- norms and traces

    /// N_{self/sub}(x) as an element of `sub`, via Galois products level by level.
    pub fn relative_norm(&self, sub: &Field, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.check_subfield(sub)?;
        let mut cur = x.clone();
        let mut f = self.clone();
        while f.depth() > sub.depth() {
            let s = f.sigma()?;
            let mut prod = cur.clone();
            let mut y = cur.clone();
            for _ in 1..f.degree() {
                y = s.apply(&y);
                prod = f.mul(&prod, &y)?;
            }
            let b = f.base().unwrap().clone();
            cur = f.project(&prod, &b)?;
            f = b;
        }
        Ok(cur)
    }

    /// Tr_{self/sub}(x) as an element of `sub`.
    pub fn relative_trace(&self, sub: &Field, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.check_subfield(sub)?;
        let mut cur = x.clone();
        let mut f = self.clone();
        while f.depth() > sub.depth() {
            let s = f.sigma()?;
            let mut sum = cur.clone();
            let mut y = cur.clone();
            for _ in 1..f.degree() {
                y = s.apply(&y);
                sum = f.add(&sum, &y)?;
            }
            let b = f.base().unwrap().clone();
            cur = f.project(&sum, &b)?;
            f = b;
        }
        Ok(cur)
    }

    pub fn absolute_norm(&self, x: &FieldElement) -> Result<BigRational> {
        let n = self.relative_norm(&Field::rationals(), x)?;
        Ok(n.as_rational().unwrap())
    }

    pub fn absolute_trace(&self, x: &FieldElement) -> Result<BigRational> {
        let t = self.relative_trace(&Field::rationals(), x)?;
        Ok(t.as_rational().unwrap())
    }

    /// Norm down to Q(i) when Q(i) is the first level of this tower.
    pub fn norm_to_gaussian(&self, x: &FieldElement) -> Result<GaussRational> {
        if self.depth() == 0 || self.prefix(1).id() != "Qi" {
            return Err(FieldError::NotSubfield("Qi".into(), self.id().into()));
        }
        let qi = self.prefix(1);
        let n = self.relative_norm(&qi, x)?;
        Ok(GaussRational::from_element(&n))
    }

    /// Relative degree [self : sub].
    pub fn relative_degree(&self, sub: &Field) -> Result<usize> {
        self.check_subfield(sub)?;
        Ok(self.abs_degree() / sub.abs_degree())
    }

    /// det[Tr_{self/sub}(b_i b_j)] as an element of `sub`.
    pub fn trace_form_discriminant(&self, sub: &Field, basis: &[FieldElement]) -> Result<FieldElement> {
        let d = self.relative_degree(sub)?;
        if basis.len() != d {
            return Err(FieldError::BasisLength { expected: d, got: basis.len() });
        }
        let mut m: Vec<Vec<FieldElement>> = vec![Vec::with_capacity(d); d];
        for i in 0..d {
            for j in 0..d {
                let t = if j < i {
                    m[j][i].clone()
                } else {
                    self.relative_trace(sub, &self.mul(&basis[i], &basis[j])?)?
                };
                m[i].push(t);
            }
        }
        super::linalg::determinant(sub, m)
    }

    /// O_sub-basis of O_self obtained by multiplying the relative integral bases
    /// of every level between `sub` and `self`.
    pub fn integral_basis_over(&self, sub: &Field) -> Result<Vec<FieldElement>> {
        self.check_subfield(sub)?;
        let mut basis = vec![sub.one()];
        let mut cur = sub.clone();
        for f in self.chain().into_iter().skip(sub.depth() + 1) {
            let mut next = Vec::with_capacity(basis.len() * f.degree());
            for e in f.integral_basis() {
                for b in &basis {
                    next.push(f.mul(e, &f.lift(b)?)?);
                }
            }
            basis = next;
            cur = f;
        }
        debug_assert_eq!(cur.id(), self.id());
        Ok(basis)
    }

    /// Coordinates of x in the Z-basis of the ring of integers given by the catalog integral bases.
    pub fn integral_coordinates(&self, x: &FieldElement) -> Result<Vec<BigRational>> {
        self.check(x)?;
        let basis = self.integral_basis_over(&Field::rationals())?;
        let n = self.abs_degree();
        let cols: Vec<Vec<BigRational>> = basis.iter().map(|b| b.coords()).collect();
        let m = (0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect();
        super::linalg::solve_rational(m, x.coords())
            .ok_or_else(|| FieldError::Invalid(format!("{}: integral basis is singular", self.0.id)))
    }

    /// Membership in the ring of integers spanned by the catalog integral bases.
    pub fn is_integral(&self, x: &FieldElement) -> Result<bool> {
        Ok(self.integral_coordinates(x)?.iter().all(|c| c.is_integer()))
    }

    /// Evaluate the minimal polynomial of level `level` at its generator (must be zero).
    pub fn min_poly_residual(&self, level: usize) -> FieldElement {
        let lvl = &self.0.levels[level - 1];
        let g = self.generator(level);
        let mut acc = self.pow(&g, lvl.degree as u64);
        for (i, c) in lvl.coeffs.iter().enumerate() {
            let mut cnum = c.clone();
            cnum.resize(self.0.abs_degree, BigInt::zero());
            let cl = FieldElement::from_parts(self.0.id.clone(), cnum, BigInt::one());
            acc = self.add(&acc, &self.mul(&cl, &self.pow(&g, i as u64)).unwrap()).unwrap();
        }
        acc
    }

    /// Exponent vector of power-basis monomial `k` (one entry per level).
    pub fn monomial_exponents(&self, k: usize) -> Vec<usize> {
        self.0.levels.iter().map(|l| (k / l.below) % l.degree).collect()
    }
}

fn add_raw(a: &FieldElement, b: &FieldElement, subtract: bool) -> FieldElement {
    if a.den == b.den {
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| if subtract { x - y } else { x + y })
            .collect();
        return FieldElement::from_parts(a.field.clone(), num, a.den.clone());
    }
    let l = a.den.lcm(&b.den);
    let fa = &l / &a.den;
    let fb = &l / &b.den;
    let num = a
        .num
        .iter()
        .zip(&b.num)
        .map(|(x, y)| if subtract { x * &fa - y * &fb } else { x * &fa + y * &fb })
        .collect();
    FieldElement::from_parts(a.field.clone(), num, l)
}

/// Product of two integral numerator vectors, reduced level by level.
fn mul_int(levels: &[Level], a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let Some((top, rest)) = levels.split_last() else {
        return vec![&a[0] * &b[0]];
    };
    let m = top.below;
    let d = top.degree;
    let mut prod: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); m]; 2 * d - 1];
    let nonzero = |v: &[BigInt]| v.iter().any(|c| !c.is_zero());
    for i in 0..d {
        let ai = &a[i * m..(i + 1) * m];
        if !nonzero(ai) {
            continue;
        }
        for j in 0..d {
            let bj = &b[j * m..(j + 1) * m];
            if !nonzero(bj) {
                continue;
            }
            let t = mul_int(rest, ai, bj);
            for (p, v) in prod[i + j].iter_mut().zip(t) {
                *p += v;
            }
        }
    }
    for k in (d..2 * d - 1).rev() {
        let t = std::mem::take(&mut prod[k]);
        if !nonzero(&t) {
            continue;
        }
        for (i, c) in top.coeffs.iter().enumerate() {
            if !nonzero(c) {
                continue;
            }
            let s = mul_int(rest, &t, c);
            for (p, v) in prod[k - d + i].iter_mut().zip(s) {
                *p -= v;
            }
        }
    }
    prod.truncate(d);
    prod.into_iter().flatten().collect()
}

// ---------------------------------------------------------------- polynomials over a field

fn trim(f: &Field, mut p: Vec<FieldElement>) -> Vec<FieldElement> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    let _ = f;
    p
}

fn poly_sub(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => f.sub(x, y).unwrap(),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => f.neg(y),
            (None, None) => unreachable!(),
        })
        .collect();
    trim(f, out)
}

fn poly_mul(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y).unwrap()).unwrap();
        }
    }
    trim(f, out)
}

fn poly_divmod(f: &Field, a: &[FieldElement], b: &[FieldElement]) -> (Vec<FieldElement>, Vec<FieldElement>) {
    let mut r = trim(f, a.to_vec());
    let db = b.len() - 1;
    let lead_inv = f.inv_nonzero(&b[db]);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![f.zero(); r.len() - db];
    while r.len() >= b.len() {
        let k = r.len() - 1 - db;
        let c = f.mul(r.last().unwrap(), &lead_inv).unwrap();
        for (i, bi) in b.iter().enumerate() {
            r[k + i] = f.sub(&r[k + i], &f.mul(&c, bi).unwrap()).unwrap();
        }
        q[k] = c;
        r = trim(f, r);
    }
    (trim(f, q), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi_alpha() -> Field {
        let qi = Field::gaussian();
        let mp = [qi.from_ints(&[0, -1]).unwrap(), qi.one(), qi.one()];
        Field::extension("La", &qi, &mp).unwrap()
    }

    #[test]
    fn alpha_squared() {
        let l = qi_alpha();
        let a = l.generator(2);
        // alpha^2 = -alpha + i
        assert_eq!(l.mul(&a, &a).unwrap(), l.from_ints(&[0, 1, -1, 0]).unwrap());
    }

    #[test]
    fn i_over_alpha() {
        let l = qi_alpha();
        let i = l.generator(1);
        let a = l.generator(2);
        assert_eq!(l.div(&i, &a).unwrap(), l.from_ints(&[1, 0, 1, 0]).unwrap());
    }

    #[test]
    fn rejects_non_monic_and_rational_roots() {
        let q = Field::rationals();
        assert!(Field::extension("X", &q, &[q.from_int(-1), q.zero(), q.from_int(2)]).is_err());
        assert!(Field::extension("X", &q, &[q.from_int(-4), q.zero(), q.one()]).is_err());
    }

    #[test]
    fn rejects_bad_sigma() {
        let q = Field::rationals();
        let f = Field::extension("W", &q, &[q.one(), q.one(), q.one()]).unwrap();
        // omega -> omega is the identity, not of order 2
        assert!(f.with_sigma(&[f.generator(1)]).is_err());
        // omega -> 1 + omega does not satisfy x^2+x+1
        assert!(f.with_sigma(&[f.from_ints(&[1, 1]).unwrap()]).is_err());
        assert!(f.with_sigma(&[f.from_ints(&[-1, -1]).unwrap()]).is_ok());
    }

    #[test]
    fn mismatch_and_zero_division() {
        let l = qi_alpha();
        let q = Field::rationals();
        assert!(matches!(l.add(&l.one(), &q.one()), Err(FieldError::Mismatch(..))));
        assert_eq!(l.inv(&l.zero()), Err(FieldError::DivisionByZero));
    }
}
