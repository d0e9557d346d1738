//! Trilinear-aggregation matrix multiplication algorithms: exact
//! construction, algebraic transformations, verification, recursive
//! execution and complexity analysis.

pub mod algorithm;
pub mod analysis;
pub mod decomposed;
pub mod dense;
pub mod domain;
pub mod engine;
pub mod error;
pub mod field;
pub mod generator;
pub mod io;
pub mod ops;
pub mod rational;
pub mod sparse;
pub mod strassen;
pub mod vectorize;
pub mod verifier;

pub use algorithm::{BilinearAlgorithm, Certificate, Dims, RowTag, TraceCell};
pub use decomposed::DecomposedAlgorithm;
pub use dense::Matrix;
pub use domain::{Domain, FloatDomain, PrimeDomain, RationalDomain};
pub use error::{Error, Result};
pub use field::PrimeField;
pub use generator::{Family, Generated, New25b};
pub use rational::Rational;
pub use sparse::SparseMatrix;
