//! Exact computations with quiver Hecke algebras and their graded modules.

pub mod cartan;
pub mod categories;
pub mod character;
pub mod conv;
pub mod corpus;
pub mod det;
pub mod klr;
pub mod linalg;
pub mod localization;
pub mod module;
pub mod radical;
pub mod rmatrix;
pub mod scenarios;
pub mod suite;
