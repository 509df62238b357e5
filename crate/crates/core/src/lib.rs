//! Numerical laboratory for elliptic Stark conjectures on CM curves:
//! elliptic dilogarithms, Kronecker-Eisenstein series, regulators of
//! torsion-supported K₂ symbols, Dedekind determinants and partial Hecke
//! L-values over class-number-one imaginary quadratic fields.

pub mod chartheory;
pub mod checks;
pub mod error;
pub mod heckefield;
pub mod json;
pub mod kronecker;
pub mod lattice;
pub mod numerics;
pub mod par;
pub mod stark;
pub mod symbols;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex<f64>;
