//! Submodule codes over finite principal ideal rings.
//!
//! The kernel provides exact arithmetic in `Z_m`, `Z_p[i]`, and their
//! products; row-echelon and reduced row-echelon forms of matrices over
//! those rings; submodules of an ambient module as canonical values with a
//! length-based distance; code constructions (partial spreads over chain
//! rings, tensor lifts, products and stacked products over product rings)
//! with cardinality bounds; and a seeded simulator for the matrix channel
//! `Y = A X + Z` including the error-trapping codebook.

pub mod channel;
pub mod codes;
pub mod error;
pub mod field;
pub mod matrix;
pub mod ring;
pub mod submodule;
pub mod textio;

pub use error::{Error, Result};
pub use matrix::{
    check_row_echelon, leading_position, member, row_echelon, rref, EchelonCheck, EchelonMatrix,
    Matrix,
};
pub use ring::{ChainComponent, Element, Ring, RingSpec, Value};
pub use submodule::{enumerate_submodules, Ambient, SubModule};
