//! Complex embedding of a tower field: each generator is a certified root of
//! its minimal polynomial, picked by the catalog's hint.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::ball::CBall;
use super::{Result, StError};
use crate::exactfield::{Field, FieldElement};

#[derive(Clone, Debug)]
pub struct Embedding {
    field: Field,
    prec: u32,
    generators: Vec<CBall>,
    monomials: Vec<CBall>,
}

/// All roots of a monic polynomial (coefficients low degree first, leading 1 omitted).
pub fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len();
    let eval = |z: Complex64| coeffs.iter().rev().fold(Complex64::new(1.0, 0.0), |acc, c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

fn eval_balls(coeffs: &[CBall], x: &CBall) -> (CBall, CBall) {
    // monic: x^d + sum c_i x^i, Horner for f and f'
    let p = x.prec();
    let d = coeffs.len();
    let mut f = CBall::from_int(1, p);
    let mut df = CBall::zero(p);
    for i in (0..d).rev() {
        df = df.mul(x).add(&f);
        f = f.mul(x).add(&coeffs[i]);
    }
    (f, df)
}

impl Embedding {
    pub fn new(field: &Field, prec: u32) -> Result<Embedding> {
        let mut monomials = vec![CBall::from_int(1, prec)];
        let mut generators = Vec::new();
        for (lvl, sub) in field.chain().into_iter().enumerate().skip(1) {
            let coeffs_exact = sub.min_poly();
            let d = sub.degree();
            let coeffs: Vec<CBall> =
                coeffs_exact[..d].iter().map(|c| embed_with(&monomials, c, prec)).collect();
            let cf: Vec<Complex64> = coeffs.iter().map(|c| c.mid()).collect();
            let roots = durand_kerner(&cf);
            let hint = sub
                .embedding_hint()
                .map(|(re, im)| Complex64::new(re, im))
                .ok_or_else(|| StError::Embedding(format!("{} has no embedding hint", sub.id())))?;
            let (ri, &r0) = roots
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - hint).norm().partial_cmp(&(b.1 - hint).norm()).unwrap())
                .unwrap();
            let sep = roots
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != ri)
                .map(|(_, r)| (r - r0).norm())
                .fold(f64::INFINITY, f64::min);
            if (hint - r0).norm() >= sep / 2.0 {
                return Err(StError::Embedding(format!("hint for {} does not single out a root", sub.id())));
            }
            // Newton on midpoints, then certify with the n|f|/|f'| bound
            let mids: Vec<CBall> = coeffs.iter().map(|c| c.exact_mid()).collect();
            let mut x = CBall::from_c64(r0, prec).exact_mid();
            for _ in 0..12 {
                let (f, df) = eval_balls(&mids, &x);
                let inv = df.exact_mid().inv().ok_or_else(|| StError::Embedding("vanishing derivative".into()))?;
                x = x.sub(&f.exact_mid().mul(&inv)).exact_mid();
            }
            let (f, df) = eval_balls(&coeffs, &x);
            let lo = df.abs_lower_raw();
            if lo.is_zero() {
                return Err(StError::Embedding(format!("derivative of {} not bounded away from zero", sub.id())));
            }
            let up = f.abs_upper_raw() * BigInt::from(d);
            let rad = (up << prec) / &lo + BigInt::one();
            let g = x.with_radius(&rad);
            if g.radius() * 4.0 >= sep || (g.mid() - r0).norm() * 4.0 >= sep {
                return Err(StError::Embedding(format!(
                    "precision {prec} too low to separate the conjugates of the generator of {}",
                    sub.id()
                )));
            }
            let mut next = Vec::with_capacity(monomials.len() * d);
            let mut pw = CBall::from_int(1, prec);
            for _ in 0..d {
                for m in &monomials {
                    next.push(m.mul(&pw));
                }
                pw = pw.mul(&g);
            }
            debug_assert_eq!(lvl, generators.len() + 1);
            generators.push(g);
            monomials = next;
        }
        Ok(Embedding { field: field.clone(), prec, generators, monomials })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Embedded generator of tower level `level` (1-based).
    pub fn generator(&self, level: usize) -> &CBall {
        &self.generators[level - 1]
    }

    /// Embed an element of this field or of a prefix of it.
    pub fn embed(&self, x: &FieldElement) -> Result<CBall> {
        let x = self.field.lift(x)?;
        Ok(embed_with(&self.monomials, &x, self.prec))
    }

    pub fn embed_f64(&self, x: &FieldElement) -> Result<Complex64> {
        Ok(self.embed(x)?.mid())
    }
}

fn embed_with(monomials: &[CBall], x: &FieldElement, prec: u32) -> CBall {
    let mut acc = CBall::zero(prec);
    for (c, m) in x.numerators().iter().zip(monomials) {
        if !c.is_zero() {
            acc = acc.add(&m.scale_int(c));
        }
    }
    if x.denominator().is_one() {
        acc
    } else {
        acc.div_int(x.denominator())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durand_kerner_cubic() {
        // (x-1)(x-2)(x+3) = x^3 - 7x + 6
        let c = |v: f64| Complex64::new(v, 0.0);
        let mut r: Vec<f64> = durand_kerner(&[c(6.0), c(-7.0), c(0.0)]).iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in r.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gaussian_generator_is_i() {
        let e = Embedding::new(&Field::gaussian(), 128).unwrap();
        let i = e.generator(1);
        assert!((i.mid() - Complex64::new(0.0, 1.0)).norm() < 1e-30);
        assert!(i.radius() < 1e-30);
    }
}
