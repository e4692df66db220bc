//! Complex-matrix lattices from natural orders: embeddings, Gram and volume,
//! minimum-determinant search, normalized metrics and the block-diagonal lattice.

pub mod ball;
pub mod cmat;
pub mod codebook;
pub mod embed;
pub mod lattice;

use thiserror::Error;

use crate::cda::CdaError;
use crate::exactfield::FieldError;

pub use ball::{CBall, RBall};
pub use cmat::CMat;
pub use codebook::{
    min_determinant, Codebook, Constellation, MinDetReport, MAX_CODEBOOK, MAX_SEARCH_POINTS,
};
pub use embed::Embedding;
pub use lattice::{
    block_determinant_identity, gram_and_volume, lattice_basis, lattice_metrics, normalized_metrics, volume_balls,
    BlockIdentity, GramVolume, VolumeBalls, LatticeBasis, LatticeMetrics, Mode, NormalizedMetrics,
};

pub const DEFAULT_PREC: u32 = 128;

#[derive(Debug, Error)]
pub enum StError {
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("gram matrix is not positive definite: pivot {index} is not certified positive")]
    Singular { index: usize },
    #[error("rank {k} exceeds the real dimension {dim} of the matrix space")]
    RankExceedsDimension { k: usize, dim: usize },
    #[error("volume is not bounded away from zero")]
    ZeroVolume,
    #[error("{what} has {size} entries, above the limit {limit}")]
    TooLarge { what: &'static str, size: u128, limit: u128 },
    #[error("empty codebook")]
    Empty,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] CdaError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T> = std::result::Result<T, StError>;
