//! Finite-dimensional Frobenius C*-algebras and local adjunctions.
//!
//! A Frobenius structure is a unital inclusion `η: A → C` of finite-dimensional
//! C*-algebras together with a faithful conditional-expectation-like map
//! `ε: C → A` that admits a quasi-basis. A local adjunction is a C*-correspondence
//! `G` whose left action lands in the compacts and whose dual is again a
//! correspondence. The [`construct`] module builds each from the other, and
//! [`iso`] verifies that the two constructions are mutually inverse up to
//! isomorphism.
//!
//! Everything is concrete: algebras are direct sums of matrix blocks
//! ([`algebra`]), Hilbert modules are stored by their right action and gram
//! tensors ([`hilbert_module`]), and all checks return numeric residuals.
//! [`instances`] provides parametric families and seeded random instances.

pub mod adjunction;
pub mod algebra;
pub mod construct;
pub mod correspondence;
pub mod decompose;
pub mod error;
pub mod frobenius;
pub mod hilbert_module;
pub mod instances;
pub mod iso;
pub mod linalg;
pub mod schema;

pub use algebra::{Algebra, Element, PositiveFunctional, StarHom};
pub use error::{Error, Result};
pub use frobenius::FrobeniusStructure;
pub use hilbert_module::{HilbertModule, ModuleMap};
