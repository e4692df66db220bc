//! Natural-order discriminants: the closed formula, the trace-form oracle, the
//! lower bound from the two smallest primes, lambda and the balance quantity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{build_algebra, division_check, unit_exhaustion, CdaError, CyclicAlgebra, DivisionCheck, Result, UnitExhaustion};
use crate::catalog::{parse_printed_rational, BaseField, Setup};
use crate::exactfield::{linalg, rational_to_string, Field, FieldElement, FieldError};
use crate::Factored;

fn factored_norm(sub: &Field, x: &FieldElement) -> Result<Factored> {
    let n = sub.absolute_norm(x)?;
    if !n.is_integer() {
        return Err(FieldError::Invalid(format!("norm {n} is not an integer")).into());
    }
    Ok(Factored::from_bigint(&n.to_integer()))
}

/// |Nm| of the relative discriminants along the tower, from trace forms of
/// the catalog integral bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDiscriminants {
    pub e_over_f: Factored,
    pub e_over_l: Factored,
    pub l_over_f: Factored,
}

fn relative_disc(top: &Field, sub: &Field) -> Result<Factored> {
    let basis = top.integral_basis_over(sub)?;
    let d = top.trace_form_discriminant(sub, &basis)?;
    factored_norm(sub, &d)
}

pub fn field_discriminants(setup: &Setup) -> Result<FieldDiscriminants> {
    Ok(FieldDiscriminants {
        e_over_f: relative_disc(&setup.e, &setup.f)?,
        e_over_l: relative_disc(&setup.e, &setup.l)?,
        l_over_f: relative_disc(&setup.l, &setup.f)?,
    })
}

fn gamma_norm(setup: &Setup) -> Result<Factored> {
    factored_norm(&setup.l, &setup.gamma)
}

/// |Nm disc(E/F)|^{n_r} * |Nm(gamma)|^{n_r(n_r-1)}.
pub fn discriminant_formula(setup: &Setup) -> Result<Factored> {
    let d = relative_disc(&setup.e, &setup.f)?;
    let k = setup.n_r as u32;
    Ok(d.pow(k).mul(&gamma_norm(setup)?.pow(k * (k - 1))))
}

/// |Nm det[Tr_{L/F}(trd(x_a x_b))]| over the natural-order basis.
pub fn discriminant_traceform(setup: &Setup) -> Result<Factored> {
    let alg = build_algebra(setup)?;
    traceform_of(&alg)
}

pub(crate) fn traceform_of(alg: &CyclicAlgebra) -> Result<Factored> {
    let basis = alg.natural_order_basis()?;
    let f = alg.centre();
    let n = basis.len();
    let mut m: Vec<Vec<FieldElement>> = vec![vec![f.zero(); n]; n];
    for a in 0..n {
        for b in a..n {
            let p = alg.mul(&basis[a], &basis[b])?;
            let t = alg.e().relative_trace(f, &p.coords()[0])?;
            m[a][b] = t.clone();
            m[b][a] = t;
        }
    }
    let d = linalg::determinant(f, m)?;
    if d.is_zero() {
        return Err(CdaError::Unsupported("natural-order trace form is degenerate".into()));
    }
    factored_norm(f, &d)
}

/// Nm(p1 p2)^{n_r(n_r-1)} for the two smallest prime norms of L.
pub fn minimal_disc_bound(prime_norms: &[u64], n_r: usize) -> Factored {
    let mut norms = prime_norms.to_vec();
    norms.sort_unstable();
    let k = n_r as u32;
    let e = k * k.saturating_sub(1);
    match norms.as_slice() {
        [a, b, ..] => Factored::from_u64(*a).mul(&Factored::from_u64(*b)).pow(e),
        _ => Factored::one(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaValue {
    pub value: String,
    pub above_one: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_matches: Option<bool>,
}

/// Nm(p1 p2)^{n_r-1} / |Nm disc(E/L)|.
pub fn lambda_bound(setup: &Setup) -> Result<LambdaValue> {
    let disc = relative_disc(&setup.e, &setup.l)?;
    let mut norms: Vec<u64> = setup.smallest_primes.iter().map(|p| p.1).collect();
    norms.sort_unstable();
    if norms.len() < 2 {
        return Err(CdaError::Unsupported("two smallest prime norms required".into()));
    }
    let num = BigInt::from(norms[0] * norms[1]).pow(setup.n_r as u32 - 1);
    let lambda = BigRational::new(num, BigInt::from(disc.value()));
    let printed = setup.claimed.lambda_printed.clone();
    let printed_matches = printed.as_deref().map(|p| parse_printed_rational(p) == Some(lambda.clone()));
    Ok(LambdaValue {
        value: rational_to_string(&lambda),
        above_one: lambda > BigRational::one(),
        printed,
        printed_matches,
    })
}

/// |Nm disc(E/Q(i))| * |Nm(gamma)|^{n_r-1}; only defined over Q(i).
pub fn balance_d(setup: &Setup) -> Result<Factored> {
    if setup.base != BaseField::Qi {
        return Err(CdaError::Unsupported(format!("{}: balance quantity needs centre Q(i)", setup.id)));
    }
    let d = relative_disc(&setup.e, &setup.f)?;
    Ok(d.mul(&gamma_norm(setup)?.pow(setup.n_r as u32 - 1)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub claimed: Factored,
    pub agrees: bool,
}

fn agreement(claimed: &Option<Factored>, computed: &Factored) -> Option<Agreement> {
    claimed.as_ref().map(|c| Agreement { claimed: c.clone(), agrees: c == computed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantReport {
    pub setup: String,
    pub centre: String,
    pub n: usize,
    pub n_r: usize,
    pub n_t: usize,
    pub rate: String,
    pub natural_order_rank: usize,
    pub field_discriminants: FieldDiscriminants,
    pub field_disc_e_over_f: Agreement,
    pub field_disc_e_over_l: Agreement,
    pub gamma: Vec<String>,
    pub gamma_norm: Factored,
    pub formula: Factored,
    pub traceform: Factored,
    pub bound: Factored,
    pub bound_holds: bool,
    pub bound_attained: bool,
    pub lambda: LambdaValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_d: Option<Factored>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_printed: Option<Agreement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competitor: Option<Competitor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Agreement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Agreement>,
    pub division: DivisionCheck,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_exhaustion: Option<UnitExhaustion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Competitor {
    pub label: String,
    pub disc_norm: Factored,
    /// balance quantity strictly below the competitor field discriminant
    pub beaten: bool,
}

impl DiscriminantReport {
    /// Every printed value that was supplied matches its recomputation.
    pub fn claims_agree(&self) -> bool {
        let flags = [&self.table, &self.theorem, &self.balance_printed]
            .into_iter()
            .flatten()
            .map(|a| a.agrees)
            .chain([self.field_disc_e_over_f.agrees, self.field_disc_e_over_l.agrees]);
        let lam = self.lambda.printed_matches.unwrap_or(true);
        flags.fold(lam, |acc, f| acc && f)
    }

    /// Claimed discriminants that differ from the computed one.
    pub fn disagreements(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, a) in [("table", &self.table), ("theorem", &self.theorem)] {
            if let Some(a) = a {
                if !a.agrees {
                    out.push(format!("{name} claims {} but computed {}", a.claimed, self.formula));
                }
            }
        }
        if !self.field_disc_e_over_f.agrees {
            out.push(format!(
                "field disc E/F claimed {} but computed {}",
                self.field_disc_e_over_f.claimed, self.field_discriminants.e_over_f
            ));
        }
        if !self.field_disc_e_over_l.agrees {
            out.push(format!(
                "field disc E/L claimed {} but computed {}",
                self.field_disc_e_over_l.claimed, self.field_discriminants.e_over_l
            ));
        }
        if self.lambda.printed_matches == Some(false) {
            out.push(format!(
                "lambda printed {} but computed {}",
                self.lambda.printed.as_deref().unwrap_or(""),
                self.lambda.value
            ));
        }
        if let (Some(b), Some(d)) = (&self.balance_printed, &self.balance_d) {
            if !b.agrees {
                out.push(format!("balance printed {} but computed {d}", b.claimed));
            }
        }
        out
    }
}

/// Recompute everything for one setup. Fails hard when the closed formula and
/// the trace form disagree.
pub fn verify_setup(setup: &Setup) -> Result<DiscriminantReport> {
    let alg = build_algebra(setup)?;
    let fd = field_discriminants(setup)?;
    let formula = discriminant_formula(setup)?;
    let traceform = traceform_of(&alg)?;
    if formula != traceform {
        return Err(CdaError::DiscriminantMismatch { formula: formula.to_text(), traceform: traceform.to_text() });
    }
    let norms: Vec<u64> = setup.smallest_primes.iter().map(|p| p.1).collect();
    let bound = minimal_disc_bound(&norms, setup.n_r);
    let (bv, fv) = (bound.value(), formula.value());
    let balance = match setup.base {
        BaseField::Qi => Some(balance_d(setup)?),
        BaseField::Q => None,
    };
    let competitor = match (&setup.claimed.competitor, &balance) {
        (Some(c), Some(b)) => Some(Competitor {
            label: c.label.clone(),
            disc_norm: c.disc_norm.clone(),
            beaten: b.value() < c.disc_norm.value(),
        }),
        _ => None,
    };
    let balance_printed = match &balance {
        Some(b) => agreement(&setup.claimed.balance_printed, b),
        None => None,
    };
    let c = &setup.claimed;
    Ok(DiscriminantReport {
        setup: setup.id.clone(),
        centre: setup.base.id().to_string(),
        n: setup.n,
        n_r: setup.n_r,
        n_t: setup.n_t,
        rate: rational_to_string(&setup.rate),
        natural_order_rank: alg.natural_order_basis()?.len(),
        field_disc_e_over_f: Agreement { claimed: c.field_disc_e_over_f.clone(), agrees: c.field_disc_e_over_f == fd.e_over_f },
        field_disc_e_over_l: Agreement { claimed: c.field_disc_e_over_l.clone(), agrees: c.field_disc_e_over_l == fd.e_over_l },
        field_discriminants: fd,
        gamma: setup.gamma.to_strings(),
        gamma_norm: gamma_norm(setup)?,
        bound_holds: bv <= fv,
        bound_attained: bv == fv,
        bound,
        lambda: lambda_bound(setup)?,
        balance_d: balance,
        balance_printed,
        competitor,
        table: agreement(&c.table, &formula),
        theorem: agreement(&c.theorem, &formula),
        formula,
        traceform,
        division: division_check(setup)?,
        unit_exhaustion: match &setup.unit_check {
            Some(_) => Some(unit_exhaustion(setup)?),
            None => None,
        },
    })
}
