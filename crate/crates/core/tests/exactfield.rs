use std::sync::OnceLock;

use natord::catalog::{self, Setup};
use natord::exactfield::{linalg, ArithOp, Field, FieldElement};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

fn setups() -> &'static Vec<Setup> {
    static S: OnceLock<Vec<Setup>> = OnceLock::new();
    S.get_or_init(|| {
        let mut v = catalog::default_catalog();
        v.extend(catalog::reference_catalog());
        v
    })
}

fn setup(id: &str) -> &'static Setup {
    catalog::find(setups(), id).unwrap()
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn abs_norm(f: &Field, x: &FieldElement) -> BigRational {
    f.absolute_norm(x).unwrap().abs()
}

#[test]
fn alpha_relation_and_division() {
    let s = setup("Qi-2-2");
    let l = &s.l;
    let i = l.generator(1);
    let a = l.generator(2);
    let minus_a_plus_i = l.sub(&i, &a).unwrap();
    assert_eq!(l.arith(ArithOp::Mul, &a, &a).unwrap(), minus_a_plus_i);
    let a1 = l.add(&a, &l.one()).unwrap();
    assert_eq!(l.arith(ArithOp::Div, &i, &a).unwrap(), a1);
    assert_eq!(l.mul(&a, &a1).unwrap(), i);
    let x = l.from_ints(&[3, -1, 2, 5]).unwrap();
    assert_eq!(l.mul(&x, &l.one()).unwrap(), x);
}

#[test]
fn galois_action_on_zeta5() {
    let s = setup("Q-2-2");
    let e = &s.e;
    let z = e.generator(2);
    assert_eq!(e.apply_automorphism(1, &z).unwrap(), e.pow(&z, 4));
    assert_eq!(e.apply_automorphism(0, &z).unwrap(), z);
    assert_eq!(e.apply_automorphism(2, &z).unwrap(), z);
}

#[test]
fn relative_norm_examples() {
    let s = setup("Q-2-2");
    assert!(s.e.relative_norm(&s.l, &s.e.generator(2)).unwrap().is_one());

    let s = setup("Qi-2-2");
    let qi = &s.f;
    let n = s.l.relative_norm(qi, &s.l.generator(2)).unwrap();
    assert_eq!(n, qi.from_ints(&[0, -1]).unwrap());
    let g = s.e.lift(&s.gamma).unwrap();
    let ng = s.e.relative_norm(&s.l, &g).unwrap();
    assert_eq!(ng, s.l.pow(&s.gamma, 2));
}

#[test]
fn absolute_norm_examples() {
    let s = setup("Q-2-2");
    assert_eq!(s.l.absolute_norm(&s.l.from_int(-4)).unwrap(), rat(16));
    assert_eq!(s.e.absolute_norm(&s.e.one()).unwrap(), rat(1));
    let qi = Field::gaussian();
    assert_eq!(qi.absolute_norm(&qi.from_ints(&[1, 1]).unwrap()).unwrap(), rat(2));
}

#[test]
fn trace_examples() {
    let s = setup("Q-2");
    let w = s.e.generator(1);
    assert_eq!(s.e.relative_trace(&s.l, &w).unwrap(), s.l.from_int(-1));
    for s in setups() {
        let t = s.e.relative_trace(&s.l, &s.e.one()).unwrap();
        assert_eq!(t, s.l.from_int(s.n_r as i64), "{}", s.id);
    }
}

#[test]
fn trace_form_discriminant_examples() {
    let s = setup("Q-2");
    let d = s.e.trace_form_discriminant(&s.l, s.e.integral_basis()).unwrap();
    assert_eq!(d, s.l.from_int(-3));

    let qi = Field::gaussian();
    let q = Field::rationals();
    assert_eq!(qi.trace_form_discriminant(&q, qi.integral_basis()).unwrap(), q.from_int(-4));

    // Q(zeta12) over Q(i) with basis {1, (i + sqrt3)/2}
    let s = setup("Qi-2-3");
    let d = s.l.trace_form_discriminant(&s.f, s.l.integral_basis()).unwrap();
    assert_eq!(abs_norm(&s.f, &d), rat(9));

    assert!(s.e.trace_form_discriminant(&s.l, &s.e.integral_basis()[..2]).is_err());
}

fn rel_disc_norm(e: &Field, sub: &Field) -> BigRational {
    let basis = e.integral_basis_over(sub).unwrap();
    let d = e.trace_form_discriminant(sub, &basis).unwrap();
    abs_norm(sub, &d)
}

#[test]
fn relative_discriminants_of_the_towers() {
    let pow = |b: i64, e: u32| rat(b.pow(e));
    let s = setup("Qi-2-3");
    assert_eq!(rel_disc_norm(&s.e, &s.l), pow(13, 4));
    assert_eq!(rel_disc_norm(&s.l, &s.f), pow(3, 2));
    assert_eq!(rel_disc_norm(&s.e, &s.f), pow(3, 6) * pow(13, 4));
    let s = setup("Qi-3-2");
    assert_eq!(rel_disc_norm(&s.e, &s.l), pow(3, 6));
    assert_eq!(rel_disc_norm(&s.l, &s.f), pow(13, 2));
    assert_eq!(rel_disc_norm(&s.e, &s.f), pow(3, 6) * pow(13, 4));
    let s = setup("Qi-2-2");
    assert_eq!(rel_disc_norm(&s.e, &s.l), pow(17, 1));
    assert_eq!(rel_disc_norm(&s.e, &s.f), pow(17, 3));
    let s = setup("Q-2-2");
    assert_eq!(rel_disc_norm(&s.e, &s.l), pow(5, 1));
    assert_eq!(rel_disc_norm(&s.e, &s.f), pow(5, 3));
    let s = setup("Golden");
    assert_eq!(rel_disc_norm(&s.e, &s.l), pow(5, 2));
}

#[test]
fn residue_examples() {
    let s = setup("Qi-2-3");
    let q13 = s.l.prime("q13").unwrap();
    assert_eq!(q13.reduce_code(&s.gamma).unwrap(), 4);
    assert_eq!(q13.reduce_code(&s.l.zero()).unwrap(), 0);
    let s = setup("Qi-2-2");
    let p17 = s.l.prime("p17").unwrap();
    let r = p17.reduce_code(&s.l.generator(1)).unwrap();
    assert!(r == 4 || r == 13);
    assert_eq!(r * r % 17, 16);
    let half = s.l.from_coords(&[BigRational::new(1.into(), 17.into()), rat(0), rat(0), rat(0)]).unwrap();
    assert!(p17.reduce(&half).is_err());
}

#[test]
fn minimal_polynomials_vanish() {
    for s in setups() {
        for level in 1..=s.e.depth() {
            assert!(s.e.min_poly_residual(level).is_zero(), "{} level {level}", s.id);
        }
    }
}

#[test]
fn catalog_gammas_are_integral() {
    for s in setups() {
        assert!(s.l.is_integral(&s.gamma).unwrap(), "{}", s.id);
        let coords = s.l.integral_coordinates(&s.gamma).unwrap();
        assert!(coords.iter().all(|c| c.is_integer()));
    }
}

/// Determinant of multiplication by x on the flattened Q-basis.
fn norm_by_determinant(f: &Field, x: &FieldElement) -> BigRational {
    let n = f.abs_degree();
    let q = Field::rationals();
    let cols: Vec<Vec<BigRational>> = (0..n)
        .map(|k| {
            let mut v = vec![0i64; n];
            v[k] = 1;
            f.mul(x, &f.from_ints(&v).unwrap()).unwrap().coords()
        })
        .collect();
    let m = (0..n).map(|r| (0..n).map(|c| q.from_rational(&cols[c][r])).collect()).collect();
    linalg::determinant(&q, m).unwrap().as_rational().unwrap()
}

fn element(f: &Field, coords: &[i64], den: i64) -> FieldElement {
    let n = f.abs_degree();
    let num: Vec<BigInt> = coords.iter().cycle().take(n).map(|&c| BigInt::from(c)).collect();
    f.from_numerators(num, BigInt::from(den)).unwrap()
}

fn field_strategy() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>, Vec<i64>, i64)> {
    let n = setups().len();
    (
        0..n,
        prop::collection::vec(-3i64..=3, 12),
        prop::collection::vec(-3i64..=3, 12),
        prop::collection::vec(-3i64..=3, 12),
        1i64..=3,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((k, a, b, c, den) in field_strategy()) {
        let f = &setups()[k].e;
        let (a, b, c) = (element(f, &a, den), element(f, &b, 1), element(f, &c, 1));
        prop_assert_eq!(f.mul(&a, &b).unwrap(), f.mul(&b, &a).unwrap());
        prop_assert_eq!(f.mul(&f.mul(&a, &b).unwrap(), &c).unwrap(), f.mul(&a, &f.mul(&b, &c).unwrap()).unwrap());
        let lhs = f.mul(&a, &f.add(&b, &c).unwrap()).unwrap();
        let rhs = f.add(&f.mul(&a, &b).unwrap(), &f.mul(&a, &c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        if !a.is_zero() {
            prop_assert!(f.mul(&a, &f.inv(&a).unwrap()).unwrap().is_one());
        }
    }

    #[test]
    fn sigma_has_the_right_order((k, a, _b, _c, den) in field_strategy()) {
        let s = &setups()[k];
        let x = element(&s.e, &a, den);
        prop_assert_eq!(s.e.apply_automorphism(s.n_r, &x).unwrap(), x.clone());
        let mut y = x.clone();
        for _ in 0..s.n * s.n_r {
            y = s.tau.apply(&y);
        }
        prop_assert_eq!(y, x);
    }

    #[test]
    fn norm_multiplicative_trace_additive((k, a, b, _c, den) in field_strategy()) {
        let s = &setups()[k];
        let (x, y) = (element(&s.e, &a, den), element(&s.e, &b, 1));
        let nxy = s.e.relative_norm(&s.l, &s.e.mul(&x, &y).unwrap()).unwrap();
        let nx = s.e.relative_norm(&s.l, &x).unwrap();
        let ny = s.e.relative_norm(&s.l, &y).unwrap();
        prop_assert_eq!(nxy, s.l.mul(&nx, &ny).unwrap());
        let txy = s.e.relative_trace(&s.l, &s.e.add(&x, &y).unwrap()).unwrap();
        let tx = s.e.relative_trace(&s.l, &x).unwrap();
        let ty = s.e.relative_trace(&s.l, &y).unwrap();
        prop_assert_eq!(txy, s.l.add(&tx, &ty).unwrap());
    }

    #[test]
    fn norm_tower_consistency((k, a, _b, _c, den) in field_strategy()) {
        let s = &setups()[k];
        let x = element(&s.e, &a, den);
        let direct = s.e.absolute_norm(&x).unwrap();
        let via_l = s.l.absolute_norm(&s.e.relative_norm(&s.l, &x).unwrap()).unwrap();
        prop_assert_eq!(&direct, &via_l);
        prop_assert_eq!(direct, norm_by_determinant(&s.e, &x));
    }

    #[test]
    fn residue_map_is_multiplicative((k, a, b, _c, _den) in field_strategy()) {
        let s = &setups()[k];
        for p in s.l.primes() {
            let (x, y) = (element(&s.l, &a, 1), element(&s.l, &b, 1));
            let r = &p.residue;
            let lhs = p.reduce(&s.l.mul(&x, &y).unwrap()).unwrap();
            let rhs = r.mul(&p.reduce(&x).unwrap(), &p.reduce(&y).unwrap());
            prop_assert_eq!(lhs, rhs);
            let lhs = p.reduce(&s.l.add(&x, &y).unwrap()).unwrap();
            prop_assert_eq!(lhs, r.add(&p.reduce(&x).unwrap(), &p.reduce(&y).unwrap()));
        }
    }
}
