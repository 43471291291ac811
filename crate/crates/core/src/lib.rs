//! Bound states of free and confined one-electron systems, and the
//! virial-like identity between kinetic and potential fluctuations.
//!
//! The crate is organised bottom-up: [`specfun`] supplies the confluent
//! hypergeometric function, [`model`] describes the systems, [`grid`] and
//! [`eigensolve`] produce eigenstates, [`observables`] turns them into
//! moments and [`VirialReport`](observables::VirialReport)s, and
//! [`report`] compares those against the tabulated reference values.

pub mod cli;
pub mod eigensolve;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{Boundary, Domain, StateSpec, SystemKind, SystemSpec};
pub use eigensolve::{Eigenstate, TruncationPolicy};
pub use observables::{ExpectationSet, VirialReport};
