//! Bundled Hamiltonians, circuits and parameter tables.

use crate::circuit::{Circuit, ParamVector};
use crate::pauli::PauliSum;
use crate::scalar::Real;

/// Coefficients of the 7-qubit spin network: local fields, then the XX, YY
/// and ZZ couplings over its eight edges.
pub const SPIN_NETWORK: &str = include_str!("../data/hamil_sim.txt");
/// Six Trotter cycles of the spin network, one parameter per gate.
pub const CIRCUIT_A: &str = include_str!("../data/circuit_a.circ");
/// Angles for [`CIRCUIT_A`] simulating the network up to `t = 1.75`.
pub const CIRCUIT_A_PARAMS: &str = include_str!("../data/circuit_a.params");
/// Hexagonal recompilation template: X, Y, Z rotations and ZZ couplings on a
/// centred hexagon.
pub const TEMPLATE_B: &str = include_str!("../data/template_b.circ");
/// Recompilation Hamiltonian whose unique ground state is `|1⟩|+⟩^6`.
pub const H_REC: &str = include_str!("../data/hrec.txt");
/// 5-qubit, 15-gate circuit with controlled-Y couplings around a ring.
pub const RING5: &str = include_str!("../data/ring5.circ");

/// Input state of the spin-network experiments.
pub const NETWORK_INPUT: &str = "1++++++";

pub fn spin_network<T: Real>() -> PauliSum<T> {
    PauliSum::parse(SPIN_NETWORK).expect("bundled Hamiltonian parses")
}

pub fn circuit_a<T: Real>() -> Circuit<T> {
    Circuit::parse(CIRCUIT_A).expect("bundled circuit parses")
}

pub fn circuit_a_params<T: Real>() -> ParamVector<T> {
    ParamVector::parse(CIRCUIT_A_PARAMS).expect("bundled parameters parse")
}

pub fn template_b<T: Real>() -> Circuit<T> {
    Circuit::parse(TEMPLATE_B).expect("bundled circuit parses")
}

pub fn h_rec<T: Real>() -> PauliSum<T> {
    PauliSum::parse(H_REC).expect("bundled Hamiltonian parses")
}

pub fn ring5<T: Real>() -> Circuit<T> {
    Circuit::parse(RING5).expect("bundled circuit parses")
}
