//! Cyclic algebras (E/L, sigma, gamma) with u^n_r = gamma and x u = u sigma(x),
//! their natural orders, discriminants and non-norm certificates.

mod discriminant;
mod nonnorm;

use std::fmt;

use thiserror::Error;

use crate::catalog::Setup;
use crate::exactfield::{linalg, Field, FieldElement, FieldError};

pub use discriminant::{
    balance_d, discriminant_formula, discriminant_traceform, field_discriminants, lambda_bound, minimal_disc_bound,
    verify_setup, Agreement, DiscriminantReport, FieldDiscriminants, LambdaValue,
};
pub use nonnorm::{
    division_check, unit_exhaustion, verify_non_norm, DivisionCheck, EvidenceData, NonNormEvidence, UnitExhaustion,
    UnitSpotCheck,
};

#[derive(Debug, Error)]
pub enum CdaError {
    #[error("gamma = 0")]
    ZeroGamma,
    #[error("gamma is not integral")]
    NonIntegralGamma,
    #[error("sigma has order {got}, expected {expected}")]
    SigmaOrder { expected: usize, got: usize },
    #[error("algebra mismatch: {0} vs {1}")]
    Mismatch(String, String),
    #[error("formula value {formula} differs from trace-form value {traceform}")]
    DiscriminantMismatch { formula: String, traceform: String },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, CdaError>;

/// The cyclic algebra of a setup. Cheap to clone.
#[derive(Clone, Debug)]
pub struct CyclicAlgebra {
    id: String,
    e: Field,
    l: Field,
    f: Field,
    n_r: usize,
    gamma: FieldElement,
    gamma_e: FieldElement,
}

/// c = c_0 + u c_1 + ... + u^{n_r-1} c_{n_r-1} with c_i in E.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    algebra: String,
    coords: Vec<FieldElement>,
}

impl AlgebraElement {
    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    pub fn algebra_id(&self) -> &str {
        &self.algebra
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "u^{i}*({c})")?;
        }
        write!(f, "]")
    }
}

pub fn build_algebra(setup: &Setup) -> Result<CyclicAlgebra> {
    CyclicAlgebra::new(&setup.id, &setup.e, &setup.f, &setup.gamma)
}

impl CyclicAlgebra {
    /// `e` must carry sigma for its top step; L is its base. `centre` is the
    /// field the discriminants are pushed down to.
    pub fn new(id: &str, e: &Field, centre: &Field, gamma: &FieldElement) -> Result<Self> {
        let l = e.base().ok_or_else(|| CdaError::Unsupported("E must be an extension".into()))?.clone();
        l.check(gamma)?;
        if !l.is_subfield(centre) {
            return Err(FieldError::NotSubfield(centre.id().into(), l.id().into()).into());
        }
        let n_r = e.degree();
        let order = e.automorphism_order(e.sigma()?);
        if order != n_r {
            return Err(CdaError::SigmaOrder { expected: n_r, got: order });
        }
        if gamma.is_zero() {
            return Err(CdaError::ZeroGamma);
        }
        if !l.is_integral(gamma)? {
            return Err(CdaError::NonIntegralGamma);
        }
        Ok(CyclicAlgebra {
            id: id.to_string(),
            gamma_e: e.lift(gamma)?,
            e: e.clone(),
            l,
            f: centre.clone(),
            n_r,
            gamma: gamma.clone(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn index(&self) -> usize {
        self.n_r
    }

    pub fn e(&self) -> &Field {
        &self.e
    }

    pub fn l(&self) -> &Field {
        &self.l
    }

    pub fn centre(&self) -> &Field {
        &self.f
    }

    pub fn gamma(&self) -> &FieldElement {
        &self.gamma
    }

    pub fn sigma_pow(&self, j: usize, x: &FieldElement) -> FieldElement {
        self.e.apply_automorphism(j, x).expect("element of E")
    }

    fn check(&self, c: &AlgebraElement) -> Result<()> {
        if c.algebra != self.id {
            return Err(CdaError::Mismatch(c.algebra.clone(), self.id.clone()));
        }
        Ok(())
    }

    pub fn element(&self, coords: Vec<FieldElement>) -> Result<AlgebraElement> {
        if coords.len() != self.n_r {
            return Err(FieldError::BasisLength { expected: self.n_r, got: coords.len() }.into());
        }
        let coords = coords.iter().map(|c| self.e.lift(c)).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(AlgebraElement { algebra: self.id.clone(), coords })
    }

    /// The element u^i x.
    pub fn monomial(&self, i: usize, x: &FieldElement) -> Result<AlgebraElement> {
        let mut coords = vec![self.e.zero(); self.n_r];
        coords[i % self.n_r] = self.e.lift(x)?;
        let c = AlgebraElement { algebra: self.id.clone(), coords };
        if i >= self.n_r {
            let g = self.monomial(0, &self.gamma_e)?;
            let mut out = c;
            for _ in 0..i / self.n_r {
                out = self.mul(&g, &out)?;
            }
            return Ok(out);
        }
        Ok(c)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { algebra: self.id.clone(), coords: vec![self.e.zero(); self.n_r] }
    }

    pub fn one(&self) -> AlgebraElement {
        self.monomial(0, &self.e.one()).unwrap()
    }

    pub fn u(&self) -> AlgebraElement {
        self.monomial(1 % self.n_r.max(1), &self.e.one()).unwrap()
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        self.check(b)?;
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| self.e.add(x, y)).collect::<std::result::Result<_, _>>()?;
        Ok(AlgebraElement { algebra: self.id.clone(), coords })
    }

    pub fn sub(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        self.check(b)?;
        let coords = a.coords.iter().zip(&b.coords).map(|(x, y)| self.e.sub(x, y)).collect::<std::result::Result<_, _>>()?;
        Ok(AlgebraElement { algebra: self.id.clone(), coords })
    }

    /// (u^i a)(u^j b) = u^{i+j} sigma^j(a) b, with u^{n_r} = gamma.
    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(a)?;
        self.check(b)?;
        let n = self.n_r;
        let mut out = vec![self.e.zero(); n];
        for (j, bj) in b.coords.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            for (i, ai) in a.coords.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                let mut t = self.e.mul(&self.sigma_pow(j, ai), bj)?;
                if i + j >= n {
                    t = self.e.mul(&t, &self.gamma_e)?;
                }
                let k = (i + j) % n;
                out[k] = self.e.add(&out[k], &t)?;
            }
        }
        Ok(AlgebraElement { algebra: self.id.clone(), coords: out })
    }

    pub fn pow(&self, a: &AlgebraElement, e: u32) -> Result<AlgebraElement> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// Left-regular representation: entry (i, j) is sigma^j(c_{i-j}), times
    /// gamma above the diagonal.
    pub fn left_representation(&self, c: &AlgebraElement) -> Result<Vec<Vec<FieldElement>>> {
        self.check(c)?;
        let n = self.n_r;
        let twisted: Vec<Vec<FieldElement>> =
            (0..n).map(|j| c.coords.iter().map(|x| self.sigma_pow(j, x)).collect()).collect();
        let mut m = vec![vec![self.e.zero(); n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let k = (i + n - j) % n;
                let v = twisted[j][k].clone();
                *entry = if i < j { self.e.mul(&self.gamma_e, &v)? } else { v };
            }
        }
        Ok(m)
    }

    /// det of the left representation, as an element of L.
    pub fn reduced_norm(&self, c: &AlgebraElement) -> Result<FieldElement> {
        let m = self.left_representation(c)?;
        let d = linalg::determinant(&self.e, m)?;
        Ok(self.e.project(&d, &self.l)?)
    }

    /// Trace of the left representation, as an element of L.
    pub fn reduced_trace(&self, c: &AlgebraElement) -> Result<FieldElement> {
        self.check(c)?;
        Ok(self.e.relative_trace(&self.l, &c.coords[0])?)
    }

    /// u^i e_j for i < n_r and e_j an O_F-basis of O_E; i varies slowest.
    pub fn natural_order_basis(&self) -> Result<Vec<AlgebraElement>> {
        let eb = self.e.integral_basis_over(&self.f)?;
        let mut out = Vec::with_capacity(self.n_r * eb.len());
        for i in 0..self.n_r {
            for b in &eb {
                out.push(self.monomial(i, b)?);
            }
        }
        Ok(out)
    }

    /// Combination sum_k coeffs[k] * basis[k] with coefficients in F.
    pub fn combine(&self, basis: &[AlgebraElement], coeffs: &[FieldElement]) -> Result<AlgebraElement> {
        if basis.len() != coeffs.len() {
            return Err(FieldError::BasisLength { expected: basis.len(), got: coeffs.len() }.into());
        }
        let mut acc = self.zero();
        for (b, c) in basis.iter().zip(coeffs) {
            if c.is_zero() {
                continue;
            }
            let c = self.e.lift(c)?;
            let scaled = AlgebraElement {
                algebra: self.id.clone(),
                coords: b.coords.iter().map(|x| self.e.mul(&c, x)).collect::<std::result::Result<_, _>>()?,
            };
            acc = self.add(&acc, &scaled)?;
        }
        Ok(acc)
    }
}

/// Primes dividing n, ascending.
pub(crate) fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn golden() -> (Setup, CyclicAlgebra) {
        let s = catalog::reference_catalog().into_iter().next().unwrap();
        let a = build_algebra(&s).unwrap();
        (s, a)
    }

    #[test]
    fn golden_u_matrix_and_norm() {
        let (s, a) = golden();
        let m = a.left_representation(&a.u()).unwrap();
        let i = s.e.generator(1);
        assert_eq!(m, vec![vec![s.e.zero(), i.clone()], vec![s.e.one(), s.e.zero()]]);
        assert_eq!(a.reduced_norm(&a.u()).unwrap(), s.l.from_ints(&[0, -1]).unwrap());
        assert_eq!(a.reduced_trace(&a.one()).unwrap(), s.l.from_int(2));
        assert_eq!(a.natural_order_basis().unwrap().len(), 4);
    }

    #[test]
    fn u_power_is_gamma() {
        for s in catalog::default_catalog() {
            let a = build_algebra(&s).unwrap();
            let un = a.pow(&a.u(), s.n_r as u32).unwrap();
            assert_eq!(un, a.monomial(0, &s.gamma).unwrap(), "{}", s.id);
        }
    }

    #[test]
    fn zero_gamma_rejected() {
        let (s, _) = golden();
        assert!(matches!(CyclicAlgebra::new("g", &s.e, &s.f, &s.l.zero()), Err(CdaError::ZeroGamma)));
        let half = s.l.from_numerators(vec![1.into(), 0.into()], 2.into()).unwrap();
        assert!(matches!(CyclicAlgebra::new("g", &s.e, &s.f, &half), Err(CdaError::NonIntegralGamma)));
    }

    #[test]
    fn prime_divisors_small() {
        assert_eq!(prime_divisors(2), vec![2]);
        assert_eq!(prime_divisors(12), vec![2, 3]);
        assert_eq!(prime_divisors(1), Vec::<usize>::new());
    }
}
