//! Thin bases of order 2, square roots and word-map covers for finite groups,
//! with exhaustive certification of every cover produced.

pub mod characters;
pub mod corpus;
pub mod cover;
pub mod decompose;
pub mod error;
pub mod group;
pub mod io;
pub mod mask;
pub mod minkowski;
pub mod perm;
pub mod perm_stats;
pub mod report;
pub mod sampler;
pub mod stratified;
pub mod subgroup;
pub mod tail;
pub mod words;

pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupOps};
pub use mask::SubsetMask;
