//! Exact-arithmetic library for secant degeneracy indices of strata of
//! binary forms.
//!
//! The crate computes certified lower/upper bounds on the secant degeneracy
//! index of a stratum `S_mu` of binary forms, constructs and verifies exact
//! secant degeneracy relations (including the known algebraic-number
//! identities for two-part strata), classifies partitions as growing or
//! stabilising, and runs a floating-point evidence search for open cases.
//!
//! Module map:
//! - [`exactalg`]: rationals, number fields as quotient rings, exact linear
//!   algebra;
//! - [`forms`]: binary forms in factored and expanded representation,
//!   radicals, GCDs, Wronskians;
//! - [`partitions`]: jump data, the subset-difference minimum `h̄`,
//!   coarsenings, shifts;
//! - [`bounds`]: the certified bounds bracket;
//! - [`orbits`]: orbit matrices and ranks, the 3-part Wronskian classifier,
//!   the parking condition and search;
//! - [`relations`]: the relation data model, verification, constructions,
//!   and the built-in certificate library;
//! - [`numsearch`]: floating-point relation discovery and exactification;
//! - [`wire`]: JSON wire formats.

pub mod bounds;
pub mod exactalg;
pub mod forms;
pub mod numsearch;
pub mod orbits;
pub mod partitions;
pub mod relations;
pub mod wire;
