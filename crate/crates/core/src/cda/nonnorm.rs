//! Non-norm certificates. Every method is sound but incomplete: it either
//! confirms that an element of L is not a norm from E, or gives up.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{build_algebra, prime_divisors, CdaError, CyclicAlgebra, Result};
use crate::catalog::{BaseField, NonNormMethod, Setup};
use crate::exactfield::{parse_rational, rational_to_string, FieldElement, LocalPrimeData, ResidueField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvidenceData {
    /// E = Q(sqrt d): x = a^2 - d b^2 has no primitive solution mod p when
    /// p || d, p does not divide x, and x is a non-square mod p.
    ModPObstruction { p: u64, radicand: String, x: String },
    /// Residue of x at a totally tamely ramified prime, tested against the
    /// subgroup of local_degree-th powers.
    ResidueSubgroup {
        prime: String,
        p: u64,
        modulus: Vec<u64>,
        residue: Vec<u64>,
        residue_code: u64,
        order: u64,
        ramification_index: u32,
        local_degree: u32,
    },
    /// L real quadratic, E/L totally imaginary. Elements of L are written
    /// (P + b sqrt(disc))/2 at one real place and (P - b sqrt(disc))/2 at the other.
    UnitSquareArgument { real_disc: String, x: [String; 2], relative_disc: [String; 2] },
    /// x = unit * N_{E/L}(factor); x is a norm iff the unit is.
    CompositeFactor { factor: Vec<String>, factor_norm: Vec<String>, unit: Vec<String>, inner: Box<NonNormEvidence> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonNormEvidence {
    /// the element of L that was tested
    pub element: Vec<String>,
    pub data: EvidenceData,
    /// true: x is certainly not a norm. false: cannot conclude.
    pub conclusion: bool,
    pub detail: String,
}

fn residue_power_test(field: &ResidueField, r: &[u64], m: u64) -> bool {
    let q1 = field.size() - 1;
    let g = m.gcd(&q1);
    field.pow(r, q1 / g) != field.one()
}

/// Sign of P + t sqrt(d) for d > 0.
fn sign_with_root(p: &BigRational, t: &BigRational, d: &BigRational) -> Ordering {
    let zero = BigRational::zero();
    let sp = p.cmp(&zero);
    let st = t.cmp(&zero);
    if st == Ordering::Equal {
        return sp;
    }
    if sp == Ordering::Equal || sp == st {
        return st;
    }
    match (p * p).cmp(&(t * t * d)) {
        Ordering::Greater => sp,
        Ordering::Less => st,
        Ordering::Equal => Ordering::Equal,
    }
}

impl EvidenceData {
    /// Re-derive the conclusion from the stored data alone.
    pub fn conclusion(&self) -> bool {
        match self {
            EvidenceData::ModPObstruction { p, radicand, x } => {
                let (Ok(d), Ok(x)) = (radicand.parse::<BigInt>(), x.parse::<BigInt>()) else { return false };
                let pb = BigInt::from(*p);
                if *p < 3 || !crate::exactfield::is_prime(*p) {
                    return false;
                }
                if !d.is_multiple_of(&pb) || d.is_multiple_of(&(&pb * &pb)) || x.is_multiple_of(&pb) {
                    return false;
                }
                let xm = x.mod_floor(&pb).to_u64().unwrap();
                // only A = C = 0 solves A^2 = x C^2 mod p
                (0..*p).all(|a| (0..*p).all(|c| (a == 0 && c == 0) || (a * a) % p != (xm * c % p * c) % p))
            }
            EvidenceData::ResidueSubgroup { p, modulus, residue, order, ramification_index, local_degree, .. } => {
                let Ok(field) = ResidueField::new(*p, modulus.clone()) else { return false };
                if residue.len() != field.degree() || field.is_zero(residue) {
                    return false;
                }
                let tame_total = ramification_index == local_degree && (*ramification_index as u64) % p != 0;
                tame_total && field.order(residue) == *order && residue_power_test(&field, residue, *local_degree as u64)
            }
            EvidenceData::UnitSquareArgument { real_disc, x, relative_disc } => {
                let parse = |s: &String| parse_rational(s);
                let (Some(d), Some(xp), Some(xb), Some(rp), Some(rb)) =
                    (parse(real_disc), parse(&x[0]), parse(&x[1]), parse(&relative_disc[0]), parse(&relative_disc[1]))
                else {
                    return false;
                };
                if !d.is_positive() {
                    return false;
                }
                let imaginary = [BigRational::from_integer(1.into()), BigRational::from_integer((-1).into())]
                    .iter()
                    .all(|s| sign_with_root(&rp, &(&rb * s), &d) == Ordering::Less);
                let negative_somewhere = [BigRational::from_integer(1.into()), BigRational::from_integer((-1).into())]
                    .iter()
                    .any(|s| sign_with_root(&xp, &(&xb * s), &d) == Ordering::Less);
                imaginary && negative_somewhere
            }
            EvidenceData::CompositeFactor { inner, .. } => inner.data.conclusion(),
        }
    }
}

impl NonNormEvidence {
    /// Re-verify the certificate. Only the composite kind needs the algebra, to
    /// check x = unit * N(factor).
    pub fn recheck(&self, alg: &CyclicAlgebra) -> bool {
        if let EvidenceData::CompositeFactor { factor, unit, inner, .. } = &self.data {
            let parse = |f: &crate::exactfield::Field, v: &[String]| -> Option<FieldElement> {
                let c: Option<Vec<BigRational>> = v.iter().map(|s| parse_rational(s)).collect();
                f.from_coords(&c?).ok()
            };
            let (e, l) = (alg.e(), alg.l());
            let (Some(y), Some(u), Some(x)) = (parse(e, factor), parse(l, unit), parse(l, &self.element)) else {
                return false;
            };
            let Ok(ny) = e.relative_norm(l, &y) else { return false };
            if l.mul(&ny, &u).ok() != Some(x) || inner.element != unit.as_slice() || !inner.recheck(alg) {
                return false;
            }
        }
        self.data.conclusion() == self.conclusion
    }
}

fn rational_element(x: &FieldElement) -> Option<BigRational> {
    x.as_rational()
}

fn mod_p(setup: &Setup, p: u64, x: &FieldElement) -> Result<NonNormEvidence> {
    if setup.l.depth() != 0 || setup.n_r != 2 {
        return Err(CdaError::Unsupported("mod-p obstruction needs a quadratic E over Q".into()));
    }
    let mp = setup.e.min_poly();
    let b = rational_element(&mp[1]).unwrap();
    let c = rational_element(&mp[0]).unwrap();
    let d = &b * &b - BigRational::from_integer(4.into()) * c;
    let xr = rational_element(x).unwrap();
    let (radicand, xs) = (rational_to_string(&d), rational_to_string(&xr));
    let data = EvidenceData::ModPObstruction { p, radicand, x: xs };
    let conclusion = data.conclusion();
    let detail = if conclusion {
        format!("{} is not a square mod {p} and {p} divides the radicand exactly once", rational_to_string(&xr))
    } else {
        format!("mod-{p} test does not apply or finds a solution")
    };
    Ok(NonNormEvidence { element: x.to_strings(), data, conclusion, detail })
}

fn residue_subgroup(setup: &Setup, prime: &LocalPrimeData, x: &FieldElement) -> Result<NonNormEvidence> {
    let r = prime.reduce(x)?;
    let f = &prime.residue;
    let order = if f.is_zero(&r) { 0 } else { f.order(&r) };
    let data = EvidenceData::ResidueSubgroup {
        prime: prime.label.clone(),
        p: prime.residue_char,
        modulus: f.modulus().to_vec(),
        residue_code: f.encode(&r),
        residue: r,
        order,
        ramification_index: prime.ramification_index,
        local_degree: prime.extension_degree,
    };
    let conclusion = data.conclusion();
    let k = prime.extension_degree;
    let detail = if conclusion {
        format!(
            "residue of order {order} in F_{}^* is not a {k}-th power; {} is totally tamely ramified in {}",
            prime.residue_size,
            prime.label,
            setup.e.id()
        )
    } else {
        format!("residue lies in the index-{k} subgroup of F_{}^* (or the test does not apply)", prime.residue_size)
    };
    Ok(NonNormEvidence { element: x.to_strings(), data, conclusion, detail })
}

/// (P, b) with y = (P +- b sqrt(disc))/2 for y in a quadratic field over Q.
fn real_quadratic_parts(l: &crate::exactfield::Field, y: &FieldElement) -> (BigRational, BigRational) {
    let mp = l.min_poly();
    let c1 = rational_element(&mp[1]).unwrap();
    let c = y.coords();
    let two = BigRational::from_integer(2.into());
    (&two * &c[0] - &c[1] * c1, c[1].clone())
}

fn unit_square(setup: &Setup, x: &FieldElement) -> Result<NonNormEvidence> {
    let l = &setup.l;
    if l.depth() != 1 || setup.base != BaseField::Q || setup.n_r != 2 {
        return Err(CdaError::Unsupported("unit-square argument needs E/L quadratic over a real quadratic L".into()));
    }
    let lp = l.min_poly();
    let (c0, c1) = (rational_element(&lp[0]).unwrap(), rational_element(&lp[1]).unwrap());
    let real_disc = &c1 * &c1 - BigRational::from_integer(4.into()) * c0;
    let ep = setup.e.min_poly();
    let rel = l.sub(&l.mul(&ep[1], &ep[1])?, &l.scale(&ep[0], &BigRational::from_integer(4.into())))?;
    let (xp, xb) = real_quadratic_parts(l, x);
    let (rp, rb) = real_quadratic_parts(l, &rel);
    let s = |r: &BigRational| rational_to_string(r);
    let data = EvidenceData::UnitSquareArgument {
        real_disc: s(&real_disc),
        x: [s(&xp), s(&xb)],
        relative_disc: [s(&rp), s(&rb)],
    };
    let conclusion = data.conclusion();
    let detail = if conclusion {
        "negative at a real place of L, while norms from the totally imaginary E are totally positive".to_string()
    } else {
        "totally positive or E/L not totally imaginary; cannot conclude".to_string()
    };
    Ok(NonNormEvidence { element: x.to_strings(), data, conclusion, detail })
}

fn evaluate(setup: &Setup, method: &NonNormMethod, x: &FieldElement) -> Result<NonNormEvidence> {
    match method {
        NonNormMethod::ModP { p } => mod_p(setup, *p, x),
        NonNormMethod::ResidueSubgroup { prime } => {
            let pd = setup.l.prime(prime).ok_or_else(|| CdaError::Unsupported(format!("unknown prime {prime}")))?;
            residue_subgroup(setup, pd, x)
        }
        NonNormMethod::UnitSquare => unit_square(setup, x),
        NonNormMethod::CompositeFactor { factor, inner } => {
            let (e, l) = (&setup.e, &setup.l);
            let ny = e.relative_norm(l, factor)?;
            let unit = l.div(x, &ny)?;
            let inner_ev = evaluate(setup, inner, &unit)?;
            let conclusion = inner_ev.conclusion;
            let detail = format!("x = ({unit}) * N({factor}); {}", inner_ev.detail);
            Ok(NonNormEvidence {
                element: x.to_strings(),
                data: EvidenceData::CompositeFactor {
                    factor: factor.to_strings(),
                    factor_norm: ny.to_strings(),
                    unit: unit.to_strings(),
                    inner: Box::new(inner_ev),
                },
                conclusion,
                detail,
            })
        }
    }
}

/// Test x in L with the setup's certificate method.
pub fn verify_non_norm(setup: &Setup, x: &FieldElement) -> Result<NonNormEvidence> {
    setup.l.check(x)?;
    evaluate(setup, &setup.nonnorm, x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisionCheck {
    pub is_division: bool,
    /// one entry per prime p | n_r, testing gamma^{n_r/p}
    pub checks: Vec<(u64, NonNormEvidence)>,
}

/// The algebra is a division algebra when gamma^{n_r/p} is a non-norm for
/// every prime p | n_r. `is_division = false` means "cannot conclude".
pub fn division_check(setup: &Setup) -> Result<DivisionCheck> {
    build_algebra(setup)?;
    let mut checks = Vec::new();
    for p in prime_divisors(setup.n_r) {
        let x = setup.l.pow(&setup.gamma, (setup.n_r / p) as u64);
        checks.push((p as u64, verify_non_norm(setup, &x)?));
    }
    let is_division = checks.iter().all(|(_, e)| e.conclusion);
    Ok(DivisionCheck { is_division, checks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSpotCheck {
    pub exponents: Vec<i32>,
    pub residue_code: u64,
    pub conclusive: bool,
}

/// Whether any unit of L could serve as a non-norm gamma at the given prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitExhaustion {
    pub prime: String,
    /// residues of the roots of unity of the centre
    pub centre_unit_residues: Vec<u64>,
    /// residues r with r^[L:F] among those
    pub possible_unit_residues: Vec<u64>,
    /// the prime is totally ramified over the centre, so every unit residue
    /// is among `possible_unit_residues`
    pub totally_ramified_over_centre: bool,
    /// every possible unit residue lies in the subgroup of local norms
    pub all_in_norm_subgroup: bool,
    pub spot_checks: Vec<UnitSpotCheck>,
    /// no unit can be certified as a non-norm at this prime
    pub cannot_conclude_for_every_unit: bool,
}

/// Exhaust unit residues at the setup's unit-check prime. When the prime is
/// totally ramified over F, res(eps)^[L:F] = res(N_{L/F}(eps)) and the norm is
/// a root of unity of F, which pins down every possible unit residue.
pub fn unit_exhaustion(setup: &Setup) -> Result<UnitExhaustion> {
    let uc = setup
        .unit_check
        .as_ref()
        .ok_or_else(|| CdaError::Unsupported(format!("{} has no unit check", setup.id)))?;
    let prime = setup.l.prime(&uc.prime).ok_or_else(|| CdaError::Unsupported(format!("unknown prime {}", uc.prime)))?;
    let l = &setup.l;
    let field = &prime.residue;
    let centre_units: Vec<FieldElement> = match setup.base {
        BaseField::Qi => (0..4).map(|k| l.lift(&setup.f.pow(&setup.f.generator(1), k)).unwrap()).collect(),
        BaseField::Q => vec![l.one(), l.from_int(-1)],
    };
    let mut centre_res = Vec::new();
    for u in &centre_units {
        centre_res.push(prime.reduce_code(u)?);
    }
    centre_res.sort_unstable();
    centre_res.dedup();
    let m = setup.n as u64;
    let possible: Vec<u64> = (1..field.size())
        .filter(|&c| centre_res.contains(&field.encode(&field.pow(&field.decode(c), m))))
        .collect();
    let k = prime.extension_degree as u64;
    let all_in = possible.iter().all(|&c| !residue_power_test(field, &field.decode(c), k));
    let total = prime.base_ramification_index == Some(setup.n as u32) && prime.residue_degree == 1;

    let mut spot_checks = Vec::new();
    let inv: Vec<FieldElement> = uc.units.iter().map(|u| l.inv(u)).collect::<std::result::Result<_, _>>()?;
    let nunits = uc.units.len() as u32;
    for idx in 0..5u32.pow(nunits) {
        let exps: Vec<i32> = (0..nunits).map(|j| ((idx / 5u32.pow(j)) % 5) as i32 - 2).collect();
        let mut x = l.one();
        for (j, &e) in exps.iter().enumerate() {
            let base = if e < 0 { &inv[j] } else { &uc.units[j] };
            x = l.mul(&x, &l.pow(base, e.unsigned_abs() as u64))?;
        }
        let ev = residue_subgroup(setup, prime, &x)?;
        let code = match &ev.data {
            EvidenceData::ResidueSubgroup { residue_code, .. } => *residue_code,
            _ => unreachable!(),
        };
        spot_checks.push(UnitSpotCheck { exponents: exps, residue_code: code, conclusive: ev.conclusion });
    }
    let spots_clear = spot_checks.iter().all(|s| !s.conclusive);
    Ok(UnitExhaustion {
        prime: prime.label.clone(),
        centre_unit_residues: centre_res,
        possible_unit_residues: possible,
        totally_ramified_over_centre: total,
        all_in_norm_subgroup: all_in,
        spot_checks,
        cannot_conclude_for_every_unit: total && all_in && spots_clear,
    })
}
