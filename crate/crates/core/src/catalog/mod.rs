//! The bundled algebra setups, their loader, and the closed-form case formulas
//! used by the minimality enumerations.

mod formulas;
pub mod schema;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactfield::{
    parse_rational, rational_to_string, Automorphism, Field, FieldElement, FieldError, PrimeSpec,
};

pub use formulas::{
    code_rate, enumerate_minimality, quadratic_discriminant, quadratic_prime_norms, quartic_cyclic_discriminant,
    Candidate, Family, MinimalityReport, QuarticCase,
};
pub use schema::*;

pub const DEFAULT_CATALOG: &str = include_str!("default_catalog.json");
pub const REFERENCE_CATALOG: &str = include_str!("reference_catalog.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("no setups")]
    Empty,
    #[error("setup {setup}: unresolvable field reference {field}")]
    Unresolved { setup: String, field: String },
    #[error("setup {setup}: {msg}")]
    Invalid { setup: String, msg: String },
    #[error("setup {setup}: gamma is not integral")]
    NonIntegralGamma { setup: String },
    #[error("setup {setup}: {source}")]
    Field { setup: String, source: FieldError },
}

/// Centre of the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseField {
    Q,
    Qi,
}

impl BaseField {
    pub fn id(self) -> &'static str {
        match self {
            BaseField::Q => "Q",
            BaseField::Qi => "Qi",
        }
    }

    pub fn degree(self) -> usize {
        match self {
            BaseField::Q => 1,
            BaseField::Qi => 2,
        }
    }
}

/// Method selected for the non-norm certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum NonNormMethod {
    /// norm-form congruence at a rational prime (E quadratic over L = Q)
    ModP { p: u64 },
    /// residue of gamma outside the index-[K:k] subgroup at a ramified prime of L
    ResidueSubgroup { prime: String },
    /// gamma = unit * N_{E/L}(factor); the unit is handled by `inner`
    CompositeFactor { factor: FieldElement, inner: Box<NonNormMethod> },
    /// a totally negative unit of a totally real L, with E/L totally imaginary
    UnitSquare,
}

#[derive(Clone, Debug)]
pub struct UnitCheck {
    pub prime: String,
    pub units: Vec<FieldElement>,
}

/// One algebra setup with its field tower fully resolved.
#[derive(Clone, Debug)]
pub struct Setup {
    pub id: String,
    pub base: BaseField,
    pub n: usize,
    pub n_r: usize,
    pub n_t: usize,
    pub f: Field,
    pub l: Field,
    pub e: Field,
    pub gamma: FieldElement,
    pub tau: Automorphism,
    pub claimed: ClaimedDoc,
    pub rate: BigRational,
    pub smallest_primes: Vec<(String, u64)>,
    pub nonnorm: NonNormMethod,
    pub unit_check: Option<UnitCheck>,
    pub notes: Option<String>,
    doc: SetupDoc,
}

impl Setup {
    pub fn doc(&self) -> &SetupDoc {
        &self.doc
    }

    /// Generator of Gal(E/L) used by the algebra.
    pub fn sigma(&self) -> &Automorphism {
        self.e.sigma().expect("validated at load")
    }
}

/// Parse a catalog document. Every setup is resolved and validated.
pub fn load_catalog(text: &str) -> Result<Vec<Setup>, CatalogError> {
    if text.trim().is_empty() {
        return Err(CatalogError::Empty);
    }
    let doc: CatalogDoc = serde_json::from_str(text).map_err(|e| CatalogError::Schema(e.to_string()))?;
    if doc.version != 1 {
        return Err(CatalogError::Schema(format!("unsupported version {}", doc.version)));
    }
    if doc.setups.is_empty() {
        return Err(CatalogError::Empty);
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(doc.setups.len());
    for s in &doc.setups {
        if !seen.insert(s.id.clone()) {
            return Err(CatalogError::Schema(format!("duplicate setup id {}", s.id)));
        }
        out.push(resolve_setup(s)?);
    }
    Ok(out)
}

pub fn default_catalog() -> Vec<Setup> {
    load_catalog(DEFAULT_CATALOG).expect("bundled catalog is valid")
}

/// Reference examples outside the main table (the Golden algebra).
pub fn reference_catalog() -> Vec<Setup> {
    load_catalog(REFERENCE_CATALOG).expect("bundled reference catalog is valid")
}

pub fn find<'a>(setups: &'a [Setup], id: &str) -> Option<&'a Setup> {
    setups.iter().find(|s| s.id == id)
}

/// Canonical JSON text for a list of loaded setups.
pub fn serialize_catalog(setups: &[Setup]) -> String {
    let doc = CatalogDoc { version: 1, setups: setups.iter().map(|s| s.doc.clone()).collect() };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

fn parse_element(field: &Field, doc: &[String]) -> Result<FieldElement, String> {
    let coords: Option<Vec<BigRational>> = doc.iter().map(|s| parse_rational(s)).collect();
    let coords = coords.ok_or_else(|| format!("bad rational in {doc:?}"))?;
    field.from_coords(&coords).map_err(|e| e.to_string())
}

fn element_doc(x: &FieldElement) -> ElementDoc {
    x.coords().iter().map(rational_to_string).collect()
}

fn resolve_setup(s: &SetupDoc) -> Result<Setup, CatalogError> {
    let sid = s.id.clone();
    let invalid = |msg: String| CatalogError::Invalid { setup: sid.clone(), msg };
    let ferr = |source: FieldError| CatalogError::Field { setup: sid.clone(), source };

    if s.n == 0 || s.n_r == 0 {
        return Err(invalid("n and n_r must be positive".into()));
    }
    if s.n_t != s.n * s.n_r {
        return Err(invalid(format!("n_t = {} but n*n_r = {}", s.n_t, s.n * s.n_r)));
    }
    let base = match s.base_field.as_str() {
        "Q" => BaseField::Q,
        "Qi" => BaseField::Qi,
        other => return Err(invalid(format!("centre must be Q or Qi, got {other}"))),
    };

    // build fields in dependency order
    let by_id: HashMap<&str, &FieldDoc> = s.fields.iter().map(|f| (f.id.as_str(), f)).collect();
    if by_id.len() != s.fields.len() {
        return Err(invalid("duplicate field id".into()));
    }
    let mut built: HashMap<String, Field> = HashMap::new();
    built.insert("Q".into(), Field::rationals());
    if !by_id.contains_key("Qi") {
        built.insert("Qi".into(), Field::gaussian());
    }
    let mut canon_fields: Vec<FieldDoc> = Vec::new();
    let mut pending: Vec<&FieldDoc> = s.fields.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for fd in pending {
            match built.get(&fd.base).cloned() {
                Some(b) => {
                    let (f, canon) = build_field(fd, &b).map_err(|m| invalid(format!("field {}: {m}", fd.id)))?;
                    built.insert(fd.id.clone(), f);
                    canon_fields.push(canon);
                }
                None => rest.push(fd),
            }
        }
        if rest.len() == before {
            return Err(CatalogError::Unresolved { setup: sid.clone(), field: rest[0].base.clone() });
        }
        pending = rest;
    }
    let get = |id: &str| {
        built
            .get(id)
            .cloned()
            .ok_or_else(|| CatalogError::Unresolved { setup: sid.clone(), field: id.to_string() })
    };
    // keep the declared order in the canonical document
    canon_fields.sort_by_key(|c| s.fields.iter().position(|f| f.id == c.id));

    let e = get(&s.e)?;
    let l = e
        .chain()
        .into_iter()
        .find(|f| f.id() == s.l)
        .ok_or_else(|| CatalogError::Unresolved { setup: sid.clone(), field: s.l.clone() })?;
    let f = e
        .chain()
        .into_iter()
        .find(|f| f.id() == base.id())
        .ok_or_else(|| invalid(format!("centre {} is not below E", base.id())))?;
    for fd in &s.fields {
        if !e.chain().iter().any(|c| c.id() == fd.id) {
            return Err(invalid(format!("field {} is not on the tower of E", fd.id)));
        }
    }
    if f.depth() > l.depth() {
        return Err(invalid("centre must lie below L".into()));
    }
    if e.base().map(|b| b.id()) != Some(l.id()) {
        return Err(invalid("E must be a single extension step over L".into()));
    }
    if e.degree() != s.n_r {
        return Err(invalid(format!("[E:L] = {} but n_r = {}", e.degree(), s.n_r)));
    }
    let lf = l.relative_degree(&f).map_err(ferr)?;
    if lf != s.n {
        return Err(invalid(format!("[L:F] = {lf} but n = {}", s.n)));
    }
    // every level between F and E needs a relative generator for norms and traces
    for c in e.chain().into_iter().skip(f.depth() + 1) {
        if !c.has_sigma() {
            return Err(invalid(format!("field {} has no sigma", c.id())));
        }
    }
    let sigma = e.sigma().map_err(ferr)?.clone();
    let tau = e.named_automorphism("tau").map_err(ferr)?.clone();
    for j in 1..=f.depth() {
        if tau.images()[j - 1] != e.generator(j) {
            return Err(invalid("tau does not fix the centre".into()));
        }
    }
    if e.automorphism_order(&tau) != s.n * s.n_r {
        return Err(invalid("tau does not generate Gal(E/F)".into()));
    }
    let tau_n = e.automorphism_pow(&tau, s.n).map_err(ferr)?;
    if tau_n.images() != sigma.images() {
        return Err(invalid("tau^n differs from sigma".into()));
    }

    let gamma = parse_element(&l, &s.gamma).map_err(|m| invalid(format!("gamma: {m}")))?;
    if gamma.is_zero() {
        return Err(invalid("gamma = 0".into()));
    }
    if !l.is_integral(&gamma).map_err(ferr)? {
        return Err(CatalogError::NonIntegralGamma { setup: sid.clone() });
    }

    let rate = parse_rational(&s.rate).ok_or_else(|| invalid(format!("bad rate {}", s.rate)))?;
    let expected_rate = code_rate(base, s.n_r);
    if rate != expected_rate {
        return Err(invalid(format!(
            "claimed rate {} differs from the rate formula {}",
            s.rate,
            rational_to_string(&expected_rate)
        )));
    }

    let method = resolve_method(&s.nonnorm, &l, &e).map_err(invalid)?;
    let unit_check = match &s.unit_check {
        None => None,
        Some(u) => {
            if l.prime(&u.prime).is_none() {
                return Err(invalid(format!("unknown prime {}", u.prime)));
            }
            let units = u
                .units
                .iter()
                .map(|x| parse_element(&l, x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            for x in &units {
                let nm = l.absolute_norm(x).map_err(ferr)?;
                if !(nm.is_one() || (-nm).is_one()) || !l.is_integral(x).map_err(ferr)? {
                    return Err(invalid(format!("{x} is not a unit")));
                }
            }
            Some(UnitCheck { prime: u.prime.clone(), units })
        }
    };

    let mut doc = s.clone();
    doc.fields = canon_fields;
    doc.gamma = element_doc(&gamma);
    doc.rate = rational_to_string(&rate);
    if let (Some(fac), NonNormMethod::CompositeFactor { factor, .. }) = (&mut doc.nonnorm.factor, &method) {
        *fac = element_doc(factor);
    }
    if let (Some(uc), Some(u)) = (&mut doc.unit_check, &unit_check) {
        uc.units = u.units.iter().map(element_doc).collect();
    }

    Ok(Setup {
        id: s.id.clone(),
        base,
        n: s.n,
        n_r: s.n_r,
        n_t: s.n_t,
        f,
        l,
        e,
        gamma,
        tau,
        claimed: s.claimed.clone(),
        rate,
        smallest_primes: s.smallest_primes.iter().map(|p| (p.label.clone(), p.norm)).collect(),
        nonnorm: method,
        unit_check,
        notes: s.notes.clone(),
        doc,
    })
}

fn resolve_method(d: &EvidenceDoc, l: &Field, e: &Field) -> Result<NonNormMethod, String> {
    match d.kind.as_str() {
        "mod-p-obstruction" => {
            let p: u64 = d
                .prime
                .as_deref()
                .and_then(|p| p.parse().ok())
                .ok_or("mod-p-obstruction needs a rational prime")?;
            Ok(NonNormMethod::ModP { p })
        }
        "residue-subgroup" => {
            let label = d.prime.clone().ok_or("residue-subgroup needs a prime label")?;
            if l.prime(&label).is_none() {
                return Err(format!("unknown prime {label} of {}", l.id()));
            }
            Ok(NonNormMethod::ResidueSubgroup { prime: label })
        }
        "unit-square-argument" => Ok(NonNormMethod::UnitSquare),
        "composite-factor" => {
            let f = d.factor.as_ref().ok_or("composite-factor needs a factor")?;
            let factor = parse_element(e, f)?;
            if factor.is_zero() {
                return Err("factor must be nonzero".into());
            }
            let inner = EvidenceDoc {
                kind: d.inner.clone().ok_or("composite-factor needs an inner method")?,
                prime: d.prime.clone(),
                factor: None,
                inner: None,
            };
            Ok(NonNormMethod::CompositeFactor { factor, inner: Box::new(resolve_method(&inner, l, e)?) })
        }
        other => Err(format!("unknown non-norm evidence kind {other}")),
    }
}

fn build_field(fd: &FieldDoc, base: &Field) -> Result<(Field, FieldDoc), String> {
    if fd.id == "Qi" {
        let ok = fd.base == "Q" && fd.min_poly == [vec!["1".to_string()], vec!["0".into()], vec!["1".into()]];
        if !ok {
            return Err("Qi must be Q adjoined a root of x^2+1".into());
        }
    }
    let mp = fd
        .min_poly
        .iter()
        .map(|c| parse_element(base, c))
        .collect::<Result<Vec<_>, _>>()?;
    let mut f = Field::extension(&fd.id, base, &mp).map_err(|e| e.to_string())?;
    f = f.with_embedding_hint(fd.embedding[0], fd.embedding[1]);
    let ib = fd
        .integral_basis
        .iter()
        .map(|c| parse_element(&f, c))
        .collect::<Result<Vec<_>, _>>()?;
    f = f.with_integral_basis(&ib).map_err(|e| e.to_string())?;
    let mut canon_auts = Vec::new();
    for a in &fd.automorphisms {
        let images = a.images.iter().map(|c| parse_element(&f, c)).collect::<Result<Vec<_>, _>>()?;
        f = if a.name == "sigma" {
            f.with_sigma(&images)
        } else {
            f.with_named_automorphism(&a.name, &images)
        }
        .map_err(|e| e.to_string())?;
        canon_auts.push(AutomorphismDoc { name: a.name.clone(), images: images.iter().map(element_doc).collect() });
    }
    let mut canon_primes = Vec::new();
    for p in &fd.primes {
        let generator = parse_element(&f, &p.generator)?;
        let spec = PrimeSpec {
            label: p.label.clone(),
            generator: generator.clone(),
            residue_char: p.p,
            residue_size: p.q,
            ramification_index: p.e,
            residue_degree: p.f,
            extension_degree: p.local_degree,
            base_ramification_index: p.base_e,
            modulus: p.modulus.clone(),
            generator_images: p.images.clone(),
        };
        f = f.with_prime(spec).map_err(|e| e.to_string())?;
        let mut cp = p.clone();
        cp.generator = element_doc(&generator);
        canon_primes.push(cp);
    }
    let canon = FieldDoc {
        id: fd.id.clone(),
        base: fd.base.clone(),
        min_poly: mp.iter().map(element_doc).collect(),
        integral_basis: ib.iter().map(element_doc).collect(),
        automorphisms: canon_auts,
        primes: canon_primes,
        embedding: fd.embedding,
    };
    Ok((f, canon))
}

/// Rational value of a printed fraction such as `20^2/17^6` or `6/3`.
pub fn parse_printed_rational(s: &str) -> Option<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let eval = |t: &str| -> Option<BigInt> {
        let mut acc = BigInt::one();
        for part in t.split('*') {
            let part = part.trim();
            let (b, e) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<u32>().ok()?),
                None => (part, 1),
            };
            let b: BigInt = b.parse().ok()?;
            acc *= num_traits::pow(b, e as usize);
        }
        Some(acc)
    };
    let d = eval(den)?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(eval(num)?, d))
}
