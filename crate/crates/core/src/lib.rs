//! Certification that a finitely generated subgroup of SU(3,1) has real
//! traces, and construction of an explicit conjugator into SO(3,1) or into
//! the block group SU(1,1)×SU(2).

pub mod cartan;
pub mod config;
pub mod corpus;
pub mod elements;
pub mod engine;
pub mod hermitian;
pub mod json;
pub mod linalg;
pub mod tracefield;
pub mod word;

pub use config::AnalysisConfig;
pub use hermitian::GroupElement;
pub use word::{Letter, Word};
