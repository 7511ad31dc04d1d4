//! Exact computational toolkit for solvable linear groups over small finite
//! fields: group construction and enumeration, orbit and stabilizer analysis,
//! quasi-primitive structure decompositions, counting-bound auditors,
//! character tables with p-block distributions, and theorem-level verifiers
//! driven by a reproducible corpus runner.

pub mod error;
pub mod gf;
pub mod grp;
pub mod families;
pub mod action;
pub mod qp;
pub mod bounds;
pub mod chartab;
pub mod verify;
pub mod corpus;

pub use error::{Error, Result};
