//! Scalar arithmetic and number-theoretic helpers shared by every other
//! module: the [`Real`] scalar, continued fractions, and reference series.

pub mod cf;
pub mod real;
pub mod sums;

pub use cf::{
    cf_expand, convergents, floor_inequality, near_approaches, shifted_convergent_relations,
    ContinuedFraction, Convergent, FloorInequality, NearApproaches, ShiftRelationRow,
};
pub use real::{parse_decimal, Approx, Real, Surd};
pub use sums::{koebe_tail, reference_sums, totient, ReferenceSums};
