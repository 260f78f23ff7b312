//! Numerical operator theory on the symmetrized bidisc.
//!
//! The crate classifies commuting matrix pairs `(S, P)` against the closed
//! symmetrized bidisc Γ, solves the fundamental-operator equations, builds
//! the minimal Γ-unitary and Γ-isometric dilations as exactly represented
//! banded block operators and assembles the Toeplitz functional models.

pub mod dilation;
pub mod error;
pub mod fundop;
pub mod gamma;
pub mod model;
pub mod numlin;
pub mod pipeline;
pub mod sample;
pub mod seqop;

pub use error::{Error, Result};
pub use dilation::{build_sznagy, DilationBundle, DilationReport};
pub use fundop::{identity_suite, solve_fundamental, FundamentalPair, IdentityReport};
pub use gamma::{classify_pair, GammaClassification, OperatorPair, Verdict};
pub use model::{build_coisometric_model, pure_gamma_isometry_from_a, ToeplitzPairModel};
pub use numlin::{ComplexMatrix, ComplexVector, DefectData, MatrixJson};
pub use pipeline::{Generator, RunReport, Scenario, SweepAggregate, Tolerances};
pub use seqop::{FiniteVector, SeqOperator, SlotLayout};
