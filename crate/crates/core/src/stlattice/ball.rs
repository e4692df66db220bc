//! Fixed-point balls: a real value is mid * 2^-prec with absolute error at most
//! rad * 2^-prec. Every operation widens the radius to stay conservative.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RBall {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

fn ceil_shr(x: &BigInt, p: u32) -> BigInt {
    let d = BigInt::one() << p;
    x.div_ceil(&d)
}

fn big_to_f64(x: &BigInt, prec: u32) -> f64 {
    // keep the top 64 bits to avoid overflow of huge integers
    let bits = x.bits();
    if bits > 1000 {
        let shift = bits - 64;
        let top = (x >> shift).to_f64().unwrap();
        return top * 2f64.powi(shift as i32 - prec as i32);
    }
    x.to_f64().unwrap() * 2f64.powi(-(prec as i32))
}

impl RBall {
    pub fn zero(prec: u32) -> Self {
        RBall { mid: BigInt::zero(), rad: BigInt::zero(), prec }
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        RBall { mid: v << prec, rad: BigInt::zero(), prec }
    }

    /// num/den rounded to the grid.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero());
        let (q, r) = (num << prec).div_mod_floor(den);
        RBall { mid: q, rad: if r.is_zero() { BigInt::zero() } else { BigInt::one() }, prec }
    }

    /// Grid point nearest to v, with a one-unit radius.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        let mid = BigInt::from_f64((v * 2f64.powi(prec as i32)).round()).expect("finite value");
        RBall { mid, rad: BigInt::one(), prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_raw(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_raw(&self) -> &BigInt {
        &self.rad
    }

    pub fn add(&self, o: &RBall) -> RBall {
        RBall { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn sub(&self, o: &RBall) -> RBall {
        RBall { mid: &self.mid - &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn neg(&self) -> RBall {
        RBall { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, o: &RBall) -> RBall {
        let p = self.prec;
        let prod = &self.mid * &o.mid;
        let mid = &prod >> p;
        let exact = (&mid << p) == prod;
        let err = self.mid.abs() * &o.rad + o.mid.abs() * &self.rad + &self.rad * &o.rad;
        let rad = ceil_shr(&err, p) + if exact { 0 } else { 1 };
        RBall { mid, rad, prec: p }
    }

    pub fn scale_int(&self, k: &BigInt) -> RBall {
        RBall { mid: &self.mid * k, rad: &self.rad * k.abs(), prec: self.prec }
    }

    pub fn div_int(&self, k: &BigInt) -> RBall {
        assert!(!k.is_zero());
        let ka = k.abs();
        let mid = if k.sign() == Sign::Minus { -&self.mid } else { self.mid.clone() };
        RBall { mid: mid.div_floor(&ka), rad: self.rad.div_ceil(&ka) + 1, prec: self.prec }
    }

    /// None when the divisor ball contains zero.
    pub fn div(&self, o: &RBall) -> Option<RBall> {
        let p = self.prec;
        let bm = o.mid.abs();
        if bm <= o.rad {
            return None;
        }
        let mid = (&self.mid << p).div_floor(&o.mid);
        let num = (self.mid.abs() * &o.rad + &bm * &self.rad) << p;
        let den = &bm * (&bm - &o.rad);
        Some(RBall { mid, rad: num.div_ceil(&den) + 1, prec: p })
    }

    /// None unless the ball is strictly positive.
    pub fn sqrt(&self) -> Option<RBall> {
        if !self.is_positive() {
            return None;
        }
        let p = self.prec;
        let mid = (&self.mid << p).sqrt();
        let lo = (&self.mid - &self.rad) << p;
        let s = lo.sqrt();
        if s.is_zero() {
            return None;
        }
        let rad = (&self.rad << p).div_ceil(&(s * 2)) + 1;
        Some(RBall { mid, rad, prec: p })
    }

    pub fn is_positive(&self) -> bool {
        self.mid > self.rad
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn mid(&self) -> f64 {
        big_to_f64(&self.mid, self.prec)
    }

    pub fn radius(&self) -> f64 {
        big_to_f64(&self.rad, self.prec)
    }

    /// Upper bound of |x| on the grid.
    pub fn abs_upper_raw(&self) -> BigInt {
        self.mid.abs() + &self.rad
    }

    /// Lower bound of |x| on the grid (zero if the ball straddles zero).
    pub fn abs_lower_raw(&self) -> BigInt {
        let d = self.mid.abs() - &self.rad;
        if d.is_negative() {
            BigInt::zero()
        } else {
            d
        }
    }

    /// Natural log of the midpoint, robust to huge values.
    pub fn ln_mid(&self) -> f64 {
        let bits = self.mid.bits() as i64;
        if bits < 60 {
            return self.mid().ln();
        }
        let shift = (bits - 60) as u64;
        let top = (&self.mid >> shift).to_f64().unwrap();
        top.ln() + (shift as f64 - self.prec as f64) * std::f64::consts::LN_2
    }

    /// Widen the radius by `extra` grid units.
    pub fn widen(&self, extra: &BigInt) -> RBall {
        RBall { mid: self.mid.clone(), rad: &self.rad + extra, prec: self.prec }
    }
}

/// Complex ball as a pair of real balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CBall {
    pub re: RBall,
    pub im: RBall,
}

impl CBall {
    pub fn zero(prec: u32) -> Self {
        CBall { re: RBall::zero(prec), im: RBall::zero(prec) }
    }

    pub fn from_int(v: i64, prec: u32) -> Self {
        CBall { re: RBall::from_int(&BigInt::from(v), prec), im: RBall::zero(prec) }
    }

    pub fn from_c64(z: Complex64, prec: u32) -> Self {
        CBall { re: RBall::from_f64(z.re, prec), im: RBall::from_f64(z.im, prec) }
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> CBall {
        CBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> CBall {
        CBall { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        CBall {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> CBall {
        CBall { re: self.re.scale_int(k), im: self.im.scale_int(k) }
    }

    pub fn div_int(&self, k: &BigInt) -> CBall {
        CBall { re: self.re.div_int(k), im: self.im.div_int(k) }
    }

    /// 1/z, or None when the ball may contain zero.
    pub fn inv(&self) -> Option<CBall> {
        let n = self.abs2();
        Some(CBall { re: self.re.div(&n)?, im: self.im.neg().div(&n)? })
    }

    pub fn abs2(&self) -> RBall {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn mid(&self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    /// Larger of the two component radii.
    pub fn radius(&self) -> f64 {
        self.re.radius().max(self.im.radius())
    }

    /// Upper bound of |z| on the grid (|re| + |im|).
    pub fn abs_upper_raw(&self) -> BigInt {
        self.re.abs_upper_raw() + self.im.abs_upper_raw()
    }

    /// Lower bound of |z| on the grid.
    pub fn abs_lower_raw(&self) -> BigInt {
        self.re.abs_lower_raw().max(self.im.abs_lower_raw())
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// Same midpoint, radius replaced by `rad` units on both components.
    pub fn with_radius(&self, rad: &BigInt) -> CBall {
        CBall {
            re: RBall { mid: self.re.mid.clone(), rad: rad.clone(), prec: self.re.prec },
            im: RBall { mid: self.im.mid.clone(), rad: rad.clone(), prec: self.im.prec },
        }
    }

    pub fn exact_mid(&self) -> CBall {
        self.with_radius(&BigInt::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses_truth() {
        let p = 128;
        let third = RBall::from_ratio(&1.into(), &3.into(), p);
        let one = third.add(&third).add(&third);
        assert!((one.mid() - 1.0).abs() < 1e-30);
        assert!(!one.contains_zero());
        let two = RBall::from_int(&2.into(), p);
        let r2 = two.sqrt().unwrap();
        let back = r2.mul(&r2);
        assert!((back.mid() - 2.0).abs() <= back.radius() + 1e-35);
        let q = one.div(&third).unwrap();
        assert!((q.mid() - 3.0).abs() < 1e-30);
        assert!(RBall::zero(p).div(&RBall::zero(p)).is_none());
    }

    #[test]
    fn complex_inverse() {
        let p = 96;
        let z = CBall::from_c64(Complex64::new(3.0, 4.0), p);
        let w = z.inv().unwrap();
        let one = z.mul(&w);
        assert!((one.mid() - Complex64::new(1.0, 0.0)).norm() < 1e-20);
    }

    #[test]
    fn ln_of_huge_value() {
        let x = RBall::from_int(&(BigInt::one() << 400u32), 64);
        assert!((x.ln_mid() - 400.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
