//! Exact symbolic calculator for quasi vertex Lie algebras.
//!
//! The library takes a Lie algebra presented by a finite set of generating
//! currents, group-scaled structure constants and current relations, verifies
//! the defining axioms, constructs the derived Lie algebras for every integer
//! twist, builds the enveloping vertex algebra of the twist-zero algebra with
//! its group action, and checks the correspondence between restricted modules
//! and coordinated quasi modules — all over the exact field
//! Q(zeta_T)(q_1..q_k), with every claim scoped to an explicit finite window.

pub mod currents;
pub mod enveloping;
pub mod error;
pub mod examples;
pub mod linalg;
pub mod phi_modules;
pub mod qvla;
pub mod report;
pub mod scalars;

pub use error::QvlaError;
