//! Column randomization for large-scale linear programs.
//!
//! A linear program with far more columns than rows can be attacked by
//! sampling a bag of `K` columns according to a randomization scheme and
//! solving the restricted program, instead of generating columns one at a
//! time by pricing. This crate provides:
//!
//! - an exact two-phase revised simplex over explicit sparse columns
//!   ([`lp`]),
//! - column oracles and instance generators for cutting stock, ranking-based
//!   choice estimation, discounted MDPs, and covering/packing programs
//!   ([`oracles`]),
//! - i.i.d. and groupwise randomization schemes with dependency-graph
//!   bookkeeping ([`sampling`]),
//! - the column-randomized solve pipeline, near-feasibility program, and the
//!   box-constrained distributional counterpart ([`cr`]),
//! - a column-generation baseline with exact pricing per family ([`colgen`]),
//! - optimality-gap guarantee terms and their empirical validation
//!   ([`bounds`]).

pub mod bounds;
pub mod colgen;
pub mod cr;
pub mod lp;
pub mod oracles;
pub mod rng;
pub mod sampling;
