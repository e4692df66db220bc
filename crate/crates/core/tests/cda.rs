use std::sync::OnceLock;

use natord::catalog::{self, BaseField, Setup};
use natord::cda::{
    self, build_algebra, minimal_disc_bound, AlgebraElement, CdaError, CyclicAlgebra, EvidenceData,
};
use natord::exactfield::{Field, FieldElement};
use natord::Factored;
use proptest::prelude::*;

struct Ctx {
    setup: Setup,
    alg: CyclicAlgebra,
    basis: Vec<AlgebraElement>,
}

fn all() -> &'static Vec<Ctx> {
    static S: OnceLock<Vec<Ctx>> = OnceLock::new();
    S.get_or_init(|| {
        let mut v = catalog::default_catalog();
        v.extend(catalog::reference_catalog());
        v.into_iter()
            .map(|setup| {
                let alg = build_algebra(&setup).unwrap();
                let basis = alg.natural_order_basis().unwrap();
                Ctx { setup, alg, basis }
            })
            .collect()
    })
}

fn ctx(id: &str) -> &'static Ctx {
    all().iter().find(|c| c.setup.id == id).unwrap()
}

fn f(p: &[(u64, u32)]) -> Factored {
    Factored::from_pairs(p)
}

/// Integer combination of the natural-order basis; two integers per basis
/// element when the centre is Q(i).
fn order_element(c: &Ctx, ints: &[i64]) -> AlgebraElement {
    let fc = c.alg.centre();
    let per = fc.abs_degree();
    let coeffs: Vec<FieldElement> = (0..c.basis.len())
        .map(|k| {
            let v: Vec<i64> = (0..per).map(|t| ints[(k * per + t) % ints.len()]).collect();
            fc.from_ints(&v).unwrap()
        })
        .collect();
    c.alg.combine(&c.basis, &coeffs).unwrap()
}

fn mat_mul(e: &Field, a: &[Vec<FieldElement>], b: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(e.zero(), |acc, k| e.add(&acc, &e.mul(&a[i][k], &b[k][j]).unwrap()).unwrap()))
                .collect()
        })
        .collect()
}

#[test]
fn discriminant_values() {
    let expected = [
        ("Q-2", f(&[(2, 2), (3, 2)])),
        ("Q-2-2", f(&[(2, 8), (5, 6)])),
        ("Qi-2-2", f(&[(2, 4), (17, 6)])),
        ("Qi-2-3", f(&[(3, 18), (13, 12)])),
        ("Qi-3-2", f(&[(2, 6), (3, 12), (13, 8)])),
        ("Golden", f(&[(5, 4)])),
    ];
    for (id, want) in expected {
        let s = &ctx(id).setup;
        assert_eq!(cda::discriminant_formula(s).unwrap(), want, "{id}");
        assert_eq!(cda::discriminant_traceform(s).unwrap(), want, "{id}");
    }
}

#[test]
fn reports_flag_the_printed_disagreements() {
    let r = cda::verify_setup(&ctx("Q-2").setup).unwrap();
    assert!(r.claims_agree() && r.bound_attained && r.division.is_division);

    let r = cda::verify_setup(&ctx("Q-2-2").setup).unwrap();
    let table = r.table.as_ref().unwrap();
    assert_eq!(table.claimed, f(&[(2, 4), (5, 6)]));
    assert!(!table.agrees);

    let r = cda::verify_setup(&ctx("Qi-2-2").setup).unwrap();
    assert_eq!(r.table.as_ref().unwrap().claimed, f(&[(2, 4), (17, 3)]));
    assert!(!r.table.as_ref().unwrap().agrees);
    assert!(r.theorem.as_ref().unwrap().agrees);
    assert_eq!(r.balance_d, Some(f(&[(2, 2), (17, 3)])));
    assert!(r.competitor.as_ref().unwrap().beaten);

    for id in ["Qi-2-3", "Qi-3-2"] {
        let r = cda::verify_setup(&ctx(id).setup).unwrap();
        assert!(r.table.unwrap().agrees && r.theorem.unwrap().agrees, "{id}");
    }
}

#[test]
fn natural_order_sizes() {
    assert_eq!(ctx("Q-2").basis.len(), 4);
    assert_eq!(ctx("Golden").basis.len(), 4);
    assert_eq!(ctx("Qi-2-3").basis.len(), 18);
    assert_eq!(ctx("Qi-3-2").basis.len(), 12);
    let c = ctx("Q-2");
    let w = c.setup.e.generator(1);
    let want = vec![
        c.alg.one(),
        c.alg.monomial(0, &w).unwrap(),
        c.alg.u(),
        c.alg.monomial(1, &w).unwrap(),
    ];
    assert_eq!(c.basis, want);
}

#[test]
fn representation_examples() {
    for c in all() {
        let (e, a) = (&c.setup.e, &c.alg);
        let n = c.setup.n_r;
        let one = a.left_representation(&a.one()).unwrap();
        for (i, row) in one.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(x.is_one(), i == j);
                assert!(i == j || x.is_zero());
            }
        }
        assert_eq!(a.reduced_trace(&a.one()).unwrap(), c.setup.l.from_int(n as i64));
        // scalar case: diagonal of sigma-conjugates, norm N_{E/L}
        let x = e.from_ints(&vec![1, 2, -1, 3, 0, 1, 2, -2, 1, 1, 0, 1][..e.abs_degree()]).unwrap();
        let cx = a.monomial(0, &x).unwrap();
        let m = a.left_representation(&cx).unwrap();
        for (j, row) in m.iter().enumerate() {
            assert_eq!(row[j], e.apply_automorphism(j, &x).unwrap());
        }
        assert_eq!(a.reduced_norm(&cx).unwrap(), e.relative_norm(&c.setup.l, &x).unwrap());
        // rho(u)^n = gamma * I
        let ru = a.left_representation(&a.u()).unwrap();
        let mut acc = ru.clone();
        for _ in 1..n {
            acc = mat_mul(e, &acc, &ru);
        }
        let g = e.lift(&c.setup.gamma).unwrap();
        for (i, row) in acc.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, if i == j { g.clone() } else { e.zero() });
            }
        }
    }
}

#[test]
fn bound_examples_and_consistency() {
    assert_eq!(minimal_disc_bound(&[2, 3], 2), Factored::from_u64(36));
    assert_eq!(minimal_disc_bound(&[5, 4], 2), Factored::from_u64(400));
    assert_eq!(minimal_disc_bound(&[4, 9], 1), Factored::one());
    for c in all() {
        let r = cda::verify_setup(&c.setup).unwrap();
        assert!(r.bound_holds, "{}", c.setup.id);
        assert_eq!(r.bound_attained, c.setup.id == "Q-2");
    }
}

#[test]
fn lambda_values() {
    let l = |id: &str| cda::lambda_bound(&ctx(id).setup).unwrap();
    assert_eq!(l("Q-2").value, "2");
    assert!(l("Q-2").above_one);
    assert_eq!(l("Q-2").printed_matches, Some(true));
    assert_eq!(l("Q-2-2").value, "4");
    let q = l("Qi-2-3");
    assert_eq!(q.value, "1296/28561");
    assert!(!q.above_one && q.printed_matches == Some(true));
    let q = l("Qi-3-2");
    assert_eq!(q.value, "104/729");
    assert_eq!(q.printed_matches, Some(false));
    let q = l("Qi-2-2");
    assert_eq!(q.value, "20/17");
    assert_eq!(q.printed.as_deref(), Some("20^2/17^6"));
}

#[test]
fn balance_quantity() {
    assert_eq!(cda::balance_d(&ctx("Qi-3-2").setup).unwrap(), f(&[(2, 3), (3, 6), (13, 4)]));
    // unit gamma: just the field discriminant
    assert_eq!(cda::balance_d(&ctx("Qi-2-3").setup).unwrap(), f(&[(3, 6), (13, 4)]));
    assert!(cda::balance_d(&ctx("Q-2").setup).is_err());
}

#[test]
fn mod_three_obstruction() {
    let c = ctx("Q-2");
    let ev = cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap();
    assert!(ev.conclusion);
    assert_eq!(ev.data, EvidenceData::ModPObstruction { p: 3, radicand: "-3".into(), x: "2".into() });
    assert!(ev.recheck(&c.alg));
    // 1 = N(1) must not be certified
    let ev = cda::verify_non_norm(&c.setup, &c.setup.l.one()).unwrap();
    assert!(!ev.conclusion && ev.recheck(&c.alg));
}

#[test]
fn residue_of_order_six_at_thirteen() {
    let c = ctx("Qi-2-3");
    let ev = cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap();
    assert!(ev.conclusion);
    match &ev.data {
        EvidenceData::ResidueSubgroup { prime, residue_code, order, local_degree, .. } => {
            assert_eq!((prime.as_str(), *residue_code, *order, *local_degree), ("q13", 4, 6, 3));
        }
        other => panic!("{other:?}"),
    }
    assert!(ev.recheck(&c.alg));
}

#[test]
fn tampered_certificates_fail_recheck() {
    let c = ctx("Qi-2-3");
    let mut ev = cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap();
    if let EvidenceData::ResidueSubgroup { residue, order, .. } = &mut ev.data {
        // 5 = 8^3 is a cube mod 13
        *residue = vec![5];
        *order = 4;
    }
    assert!(!ev.data.conclusion());
    assert!(!ev.recheck(&c.alg));

    let c = ctx("Q-2-2");
    let mut ev = cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap();
    assert!(ev.recheck(&c.alg));
    if let EvidenceData::CompositeFactor { unit, .. } = &mut ev.data {
        *unit = vec!["1".into(), "0".into()];
    }
    assert!(!ev.recheck(&c.alg));
}

#[test]
fn composite_factor_with_unit_square() {
    let c = ctx("Q-2-2");
    let ev = cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap();
    assert!(ev.conclusion);
    match &ev.data {
        EvidenceData::CompositeFactor { factor_norm, unit, inner, .. } => {
            assert_eq!(factor_norm, &vec!["4".to_string(), "0".into()]);
            assert_eq!(unit, &vec!["-1".to_string(), "0".into()]);
            assert!(matches!(inner.data, EvidenceData::UnitSquareArgument { .. }));
        }
        other => panic!("{other:?}"),
    }
    // the totally positive unit phi^2 is not certified
    let phi = c.setup.l.generator(1);
    let ev = cda::verify_non_norm(&c.setup, &c.setup.l.pow(&phi, 2)).unwrap();
    assert!(!ev.conclusion);
}

#[test]
fn qi_2_2_units_cannot_be_certified() {
    let c = ctx("Qi-2-2");
    let ue = cda::unit_exhaustion(&c.setup).unwrap();
    assert!(ue.totally_ramified_over_centre);
    assert_eq!(ue.centre_unit_residues, vec![1, 4, 13, 16]);
    assert_eq!(ue.possible_unit_residues, vec![1, 2, 4, 8, 9, 13, 15, 16]);
    assert!(ue.all_in_norm_subgroup);
    assert_eq!(ue.spot_checks.len(), 25);
    assert!(ue.spot_checks.iter().all(|s| !s.conclusive));
    assert!(ue.cannot_conclude_for_every_unit);
    // gamma = 1 + i is certified at the same prime
    assert!(cda::verify_non_norm(&c.setup, &c.setup.gamma).unwrap().conclusion);
}

#[test]
fn every_setup_is_a_division_algebra() {
    for c in all() {
        let d = cda::division_check(&c.setup).unwrap();
        assert!(d.is_division, "{}", c.setup.id);
        assert_eq!(d.checks.len(), 1);
        assert_eq!(d.checks[0].0, c.setup.n_r as u64);
        for (_, ev) in &d.checks {
            assert!(ev.recheck(&c.alg), "{}", c.setup.id);
        }
    }
}

#[test]
fn degenerate_gamma_is_rejected() {
    let s = &ctx("Golden").setup;
    let err = CyclicAlgebra::new("g", &s.e, &s.f, &s.l.zero()).unwrap_err();
    assert!(matches!(err, CdaError::ZeroGamma));
    assert_eq!(s.base, BaseField::Qi);
}

#[test]
fn reports_serialize() {
    let r = cda::verify_setup(&ctx("Qi-2-2").setup).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: cda::DiscriminantReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert!(text.contains("\"formula\":{\"2\":4,\"17\":6}"));
}

fn pair_strategy() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
    (0..all().len(), prop::collection::vec(-3i64..=3, 36), prop::collection::vec(-3i64..=3, 36))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn representation_is_a_homomorphism((k, a, b) in pair_strategy()) {
        let c = &all()[k];
        let (x, y) = (order_element(c, &a), order_element(c, &b));
        let alg = &c.alg;
        let e = alg.e();
        let (rx, ry) = (alg.left_representation(&x).unwrap(), alg.left_representation(&y).unwrap());
        let rsum = alg.left_representation(&alg.add(&x, &y).unwrap()).unwrap();
        for i in 0..rx.len() {
            for j in 0..rx.len() {
                prop_assert_eq!(&rsum[i][j], &e.add(&rx[i][j], &ry[i][j]).unwrap());
            }
        }
        let xy = alg.mul(&x, &y).unwrap();
        prop_assert_eq!(alg.left_representation(&xy).unwrap(), mat_mul(e, &rx, &ry));
        let nxy = alg.reduced_norm(&xy).unwrap();
        let l = alg.l();
        prop_assert_eq!(nxy, l.mul(&alg.reduced_norm(&x).unwrap(), &alg.reduced_norm(&y).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn nonzero_order_elements_have_nonzero_integral_norm((k, a, _b) in pair_strategy()) {
        let c = &all()[k];
        let x = order_element(c, &a);
        prop_assume!(!x.is_zero());
        let nr = c.alg.reduced_norm(&x).unwrap();
        prop_assert!(!nr.is_zero());
        prop_assert!(c.alg.l().is_integral(&nr).unwrap());
    }
}
