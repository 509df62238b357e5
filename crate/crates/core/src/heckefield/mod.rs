//! Class-number-one imaginary quadratic fields: ring arithmetic, ray class
//! groups for a principal modulus, Hecke characters φ((λ)) = φ_fin(λ)·λ and
//! their partial L-functions.

mod field;
mod hecke;
mod ray;

pub use field::{ImagQuadField, OkElem, CLASS_NUMBER_ONE};
pub use hecke::{
    area_of_class_lattice, deriv0_on_finer_modulus, hecke_character, hecke_characters,
    multiplier_matrix, nu, omega_lattice, partial_l_deriv0, partial_l_deriv0_all,
    partial_l_deriv0_at, partial_l_direct, partial_l_direct_all, partial_l_kronecker,
    partial_l_kronecker_at, twist_factor, twist_identity, type_r_scan, HeckeCharData, PartialLSpec,
    TwistIdentity, TypeRScan, TypeRWitness,
};
pub use ray::{
    coprime, smith_quotient, AbelianPresentation, RayClassGroupData, ResidueRing, ResidueUnitGroup,
};
