//! Exact-arithmetic engine for cluster patterns and scattering diagrams.
//!
//! Everything is computed over arbitrary-precision integers and rationals;
//! there is no floating point anywhere in this crate.
//!
//! The main layers, bottom up:
//!
//! * [`matrix`] — integer matrix primitives: skew-symmetrizers, the masked
//!   operators `[A]_+`, `A^{•k}`, `A^{k•}`, the sign matrices `J_k`, and
//!   exchange-matrix mutation.
//! * [`poly`] — exponent-keyed multivariate (Laurent) polynomials over
//!   big integers, with exact division and subtraction-free rationals.
//! * [`pattern`] — C-, G-, and F-patterns along walks of the n-regular tree,
//!   with definitional, signed-fast, and dual mutations.
//! * [`separation`] — cluster variables via separation formulas, direct
//!   mutation oracles, tropicalization, and the tropical/nontropical
//!   decomposition of mutation maps.
//! * [`fan`] — G-cones and G-fans, exact polyhedral fan verification, and
//!   the piecewise-linear maps between fans.
//! * [`scattering`] — walls, wall-crossing automorphisms, path-ordered
//!   products, rank-2 consistent completion, and diagram mutation.
//! * [`theta`] — broken-line enumeration and theta functions on rank-2
//!   consistent diagrams.
//! * [`corpus`] — seeded random generators for exchange matrices and walks,
//!   shared by the test suites and the CLI verifier.

pub mod corpus;
pub mod fan;
pub mod matrix;
pub mod pattern;
pub mod poly;
pub mod scattering;
pub mod separation;
pub mod theta;

pub use matrix::{find_skew_symmetrizer, ExchangeMatrix, IntMatrix, SkewSymmetrizer};
pub use pattern::{evaluate_walk, PatternPoint, Walk};

/// Errors reported by the engine.
///
/// Exact arithmetic cannot produce approximation failures; every variant
/// below is either a usage error or the signal of a violated theorem
/// (which would mean an implementation bug).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not skew-symmetrizable")]
    NotSkewSymmetrizable,
    #[error("direction {k} out of range for rank {n}")]
    DirectionOutOfRange { k: usize, n: usize },
    #[error("c-vector {i} has mixed signs (sign-coherence violated)")]
    MixedSigns { i: usize },
    #[error("c-vector {i} is zero (unimodularity violated)")]
    ZeroColumn { i: usize },
    #[error("inexact polynomial division: {0}")]
    InexactDivision(String),
    #[error("matrix is singular; operation requires det != 0")]
    SingularMatrix,
    #[error("rank {n} unsupported here (limit {limit})")]
    RankUnsupported { n: usize, limit: usize },
    #[error("point is non-generic for this diagram: {0}")]
    NonGenericPoint(String),
    #[error("curve is not admissible: {0}")]
    NotAdmissible(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
