//! Exact-diagonalization toolkit for quantum energy teleportation on short
//! spin chains.
//!
//! Site 0 is the least significant bit of a basis index and bit value 0 is
//! the `Z = +1` state. Everything numeric is generic over [`scalar::Real`]
//! (`f64` and `f32`); the aliases below fix `f64`, which the shot sampler,
//! sweeps and the Table-1 driver use throughout.

pub mod eigensolve;
pub mod entanglement;
pub mod error;
pub mod models;
pub mod pauli;
pub mod qet;
pub mod scalar;
pub mod shots;
pub mod sweep;
pub mod table1;

pub use error::{Error, Result};
pub use pauli::Axis;

pub type Complex = scalar::C<f64>;
pub type PauliTerm = pauli::PauliTerm<f64>;
pub type OperatorSum = pauli::OperatorSum<f64>;
pub type SpinChainModel = models::SpinChainModel<f64>;
pub type GroundState = eigensolve::GroundState<f64>;
pub type QetResult = qet::QetResult<f64>;
pub type FermionChainSpec = models::FermionChainSpec<f64>;
