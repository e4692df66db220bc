//! Serialized catalog layout. Elements are lists of rational strings in the
//! flattened power basis of the field they belong to.

use serde::{Deserialize, Serialize};

use crate::Factored;

pub type ElementDoc = Vec<String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDoc {
    pub version: u32,
    pub setups: Vec<SetupDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupDoc {
    pub id: String,
    #[serde(rename = "F")]
    pub base_field: String,
    pub n: usize,
    pub n_r: usize,
    pub n_t: usize,
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "E")]
    pub e: String,
    pub fields: Vec<FieldDoc>,
    /// element of L
    pub gamma: ElementDoc,
    pub claimed: ClaimedDoc,
    pub rate: String,
    pub smallest_primes: Vec<PrimeNormDoc>,
    pub nonnorm: EvidenceDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_check: Option<UnitCheckDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub id: String,
    pub base: String,
    /// monic, low degree first, coefficients in the base field
    pub min_poly: Vec<ElementDoc>,
    /// relative basis of the ring of integers over the base ring of integers
    pub integral_basis: Vec<ElementDoc>,
    /// `sigma` generates Gal(field/base); other names are extra automorphisms
    pub automorphisms: Vec<AutomorphismDoc>,
    #[serde(default)]
    pub primes: Vec<PrimeDoc>,
    /// approximate complex value of the generator, selecting the embedding
    pub embedding: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismDoc {
    pub name: String,
    /// image of every tower generator, bottom first
    pub images: Vec<ElementDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeDoc {
    pub label: String,
    pub generator: ElementDoc,
    pub p: u64,
    pub q: u64,
    pub e: u32,
    pub f: u32,
    pub local_degree: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_e: Option<u32>,
    /// monic residue modulus, low degree first
    pub modulus: Vec<u64>,
    /// residue of every tower generator, each a coefficient vector of length f
    pub images: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimedDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Factored>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<Factored>,
    /// |Nm disc(E/F)| as printed
    pub field_disc_e_over_f: Factored,
    /// |Nm disc(E/L)| as printed
    pub field_disc_e_over_l: Factored,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_printed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance_printed: Option<Factored>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub competitor: Option<CompetitorDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetitorDoc {
    pub label: String,
    pub disc_norm: Factored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeNormDoc {
    pub label: String,
    pub norm: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<String>,
    /// element y of E with gamma = unit * N_{E/L}(y)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<ElementDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitCheckDoc {
    pub prime: String,
    /// sample units of L used for spot checks
    pub units: Vec<ElementDoc>,
}
