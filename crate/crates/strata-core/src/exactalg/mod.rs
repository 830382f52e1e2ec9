//! Exact arithmetic foundation: arbitrary-precision rationals, number
//! fields presented as quotient rings `Q[z]/(m(z))`, and exact linear
//! algebra over any supported field.
//!
//! Coefficient order is constant-term-first everywhere (polynomials and
//! field elements): stable serialization, no degree-dependent reindexing.
//!
//! Number-field arithmetic deliberately works in the quotient ring even when
//! `m` is not known to be irreducible; irreducibility is never assumed up
//! front, only discovered through inversion failures (`ZeroDivisor`). An
//! identity that holds in the full quotient ring holds for every root of `m`.

mod linalg;
mod numfield;
mod poly;
mod rational;

pub use linalg::{det_division_free, exact_det, exact_nullspace, exact_rank, q_integer_normalize, RingElem};
pub use numfield::{FieldElement, NumFieldError, NumberField};
pub use poly::Poly;
pub use rational::Rational;
