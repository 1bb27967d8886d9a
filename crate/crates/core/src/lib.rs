//! Combinatorial and algebraic tools for the algebraic matroid of the
//! variety of `m x n` matrices of rank at most `r`.
//!
//! * [`pattern`]: support patterns, I/O and degree reductions.
//! * [`slmf`]: linkage-matching-field supports and the relaxed counting
//!   condition.
//! * [`partition`]: column partitions into relaxed SLMFs, the truncation
//!   matroid and base packing.
//! * [`oracle`]: randomized Jacobian-rank certificates over GF(p).
//! * [`grassmann`]: Plücker coordinates and the sparse orthogonal basis.
//! * [`completion`]: exact rank-`r` completion from observed entries.
//! * [`lab`]: exhaustive enumeration and consistency census.
//!
//! The linear algebra in [`grassmann`] and [`completion`] is generic over
//! [`Field`]; [`Gf`] and [`Rational`] are the two concrete backends.

pub mod bits;
pub mod completion;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod grassmann;
pub mod lab;
pub mod matching;
pub mod matrix;
pub mod oracle;
pub mod partition;
pub mod pattern;
pub mod rng;
pub mod slmf;

pub use error::{Error, Result};
pub use field::{Field, Fp};
pub use matrix::Matrix;
pub use partition::PartitionCertificate;
pub use pattern::{Format, ReductionStep, SupportPattern};
pub use slmf::{RelaxedParams, Slmf, ViolationWitness};

/// The default prime `2^31 - 1`.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Prime field GF(2^31 - 1).
pub type Gf = Fp<DEFAULT_PRIME>;

/// Exact rationals.
pub type Rational = num_rational::BigRational;

pub type GfMatrix = Matrix<Gf>;
pub type RationalMatrix = Matrix<Rational>;

pub type GfPlucker = grassmann::PluckerVector<Gf>;
pub type RationalPlucker = grassmann::PluckerVector<Rational>;
