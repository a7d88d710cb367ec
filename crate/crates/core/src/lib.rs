//! Decision procedures for Frankl-completeness of union-closed set families.
//!
//! The crate decides whether a family `A` is FC (every union-closed
//! superfamily has a majority element in `U(A)`) through an exact
//! cutting-plane loop over the Poonen polyhedron, enumerates isomorph-free
//! Non-FC families, and emits certificates that [`verify`] re-checks with
//! exact arithmetic.

pub mod canon;
pub mod enumfam;
pub mod fcsolve;
pub mod ratlp;
pub mod sepip;
pub mod setfam;
pub mod verify;

pub use setfam::{Family, MemberSet};
