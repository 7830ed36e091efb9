//! Exact q-expansions, minimal polynomials and CM values of generalized
//! lambda functions Λ(τ;Q₁,Q₂) on the principal congruence subgroup Γ(N).
//!
//! The exact core is generic over a coefficient [`Scalar`]; the aliases
//! below fix the two rings used in practice.

pub mod arith;
pub mod cli;
pub mod cmval;
pub mod counts;
pub mod cyclotomic;
pub mod error;
pub mod forms;
pub mod lambda;
pub mod minpoly;
pub mod modgroup;
pub mod poly;
pub mod qseries;
pub mod scalar;

pub use cyclotomic::{CycCtx, CycNum};
pub use error::{Error, Result};
pub use qseries::QSeries;
pub use scalar::{ExactScalar, FieldScalar, Scalar};

/// Elements of K_N = Q(ζ_N).
pub type Cyc = CycNum<num_rational::BigRational>;
/// Elements of O_N = Z[ζ_N].
pub type CycInt = CycNum<num_bigint::BigInt>;
/// Double-precision complex numbers used by the numeric evaluators.
pub type C64 = num_complex::Complex64;
/// Series with coefficients in K_N.
pub type Series = QSeries<num_rational::BigRational>;
/// Series with coefficients in O_N.
pub type IntSeries = QSeries<num_bigint::BigInt>;
