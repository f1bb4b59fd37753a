//! Exact computation in Henselian valued fields of rank one.
//!
//! The crate provides, over Q_p and over the Laurent-series fields F_p((t))
//! and Q((t)):
//!
//! - valued-field arithmetic with valuation, residue, angular component and
//!   restricted division ([`field`]);
//! - Hensel lifting of approximate polynomial roots and decision procedures
//!   for the n-th power predicates, with coset representatives and indices
//!   of K^x modulo n-th powers ([`hensel`]);
//! - one-variable cells (center, valuation window, power coset) with exact
//!   membership, emptiness, Haar measure and coset refinement ([`cells`]);
//! - cell decomposition with preparation of split polynomials, and
//!   decomposition of quantifier-free formulas into cells ([`prepare`]);
//! - the algebra of constructible functions with exact integration and
//!   Igusa-style local zeta functions as rational functions in T = p^(-s)
//!   ([`constructible`]);
//! - brute-force residue-ring oracles that independently verify every
//!   symbolic result ([`oracle`]).
//!
//! Everything is exact: rationals are arbitrary-precision, measures and
//! integrals are rational numbers or explicit divergence markers, and
//! approximate p-adic/Laurent values carry their precision.
//!
//! See `examples/` for a runnable tour, and the `padicell` binary for the
//! command-line interface.

pub mod cells;
pub mod cli;
pub mod constructible;
pub mod error;
pub mod field;
pub mod formula;
pub mod hensel;
pub mod laurent;
pub mod oracle;
pub mod padic;
pub mod poly;
pub mod prepare;
pub mod rat;
pub mod ratfun;
pub mod residue;
pub mod valuation;

pub use cells::{sort_cells, Cell, CellMeasure};
pub use constructible::{igusa_zeta, ConstructibleFunction, Integral, Mode, Piece};
pub use error::{Error, Result};
pub use field::{ArithOp, FieldContext, FieldElement};
pub use formula::QFFormula;
pub use hensel::{coset_of, coset_reps, hensel_lift, is_nth_power, power_index, CosetRep};
pub use laurent::LaurentSeries;
pub use oracle::SampleGrid;
pub use padic::PAdicNumber;
pub use poly::{Poly, SplitPoly};
pub use prepare::{decompose, prepare, prepare_on, select, PreparedCell, PreparedFunction};
pub use rat::Rat;
pub use ratfun::{PolyT, RationalFunctionT};
pub use residue::{ResidueElement, ResidueField};
pub use valuation::Valuation;
