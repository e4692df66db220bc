//! Cyclic division algebras over number-field towers: exact discriminants of
//! natural orders, non-norm certificates, space-time lattice codes and a
//! small MIMO Rayleigh-fading simulator.

pub mod exactfield;
pub mod catalog;
pub mod factored;
pub mod cda;
pub mod stlattice;
pub mod mimosim;

pub use factored::Factored;
