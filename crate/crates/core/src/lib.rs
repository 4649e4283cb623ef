//! Variational recompilation of quantum circuits on a dense state-vector
//! simulator.
//!
//! A circuit `A` acting on a known input state is recompiled into a
//! parameterised template `B` by imaginary-time evolution under McLachlan's
//! variational principle, minimising a Hamiltonian whose unique ground state
//! is the input. Supporting pieces cover Pauli algebra, circuits with
//! analytic derivatives, exact and Trotterised dynamics, and gate
//! elimination.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` and `*32` aliases name the concrete types.

pub mod circuit;
pub mod data;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod mclachlan;
pub mod pauli;
pub mod recompiler;
pub mod scalar;
pub mod state;

pub use circuit::{Angle, Circuit, DerivativeMethod, Gate, GateKind, ParamVector};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use scalar::{Cplx, Real};
pub use state::StateVector;

pub type StateVector64 = StateVector<f64>;
pub type StateVector32 = StateVector<f32>;
pub type Circuit64 = Circuit<f64>;
pub type Circuit32 = Circuit<f32>;
pub type ParamVector64 = ParamVector<f64>;
pub type ParamVector32 = ParamVector<f32>;
pub type PauliSum64 = PauliSum<f64>;
pub type PauliSum32 = PauliSum<f32>;
