//! Spin-network dynamics: Trotter circuits, variational real-time simulation
//! and circuit extension.

use crate::circuit::{Circuit, ParamVector};
use crate::data;
use crate::error::{Error, Result};
use crate::exact::ExactPropagator;
use crate::mclachlan::{evolve, EvolutionConfig, SolverConfig};
use crate::pauli::PauliSum;
use crate::scalar::Real;
use crate::state::StateVector;

/// A Hamiltonian together with the state its dynamics start from.
#[derive(Clone, Debug)]
pub struct SpinSystem<T> {
    pub h: PauliSum<T>,
    pub input: StateVector<T>,
}

impl<T: Real> SpinSystem<T> {
    pub fn new(h: PauliSum<T>, input: StateVector<T>) -> Result<Self> {
        if h.min_qubits() > input.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: h.min_qubits() - 1,
                n_qubits: input.n_qubits(),
            });
        }
        Ok(Self { h, input })
    }

    /// The bundled 7-qubit network started from `|1⟩|+⟩^6`.
    pub fn network() -> Self {
        Self {
            h: data::spin_network(),
            input: StateVector::from_basis_spec(data::NETWORK_INPUT).expect("valid spec"),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.input.n_qubits()
    }

    /// Number of non-identity terms, i.e. gates per Trotter cycle.
    pub fn cycle_len(&self) -> usize {
        self.cycle_terms().count()
    }

    fn cycle_terms(&self) -> impl Iterator<Item = &(T, crate::pauli::PauliString)> {
        self.h.terms().iter().filter(|(_, p)| !p.is_identity())
    }

    pub fn propagator(&self) -> Result<ExactPropagator<T>> {
        ExactPropagator::new(&self.h, self.n_qubits())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    Fixed,
    /// Every second cycle runs its gates in reverse.
    Alternating,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterSpec<T> {
    pub cycles: usize,
    pub time: T,
    pub ordering: Ordering,
}

/// One cycle per `1/q` of the evolution, one gate per Hamiltonian term in the
/// order the terms are stored. Term `j` with coefficient `C_j` gets angle
/// `2·C_j·t/q`. Each gate has its own parameter.
pub fn build_trotter_circuit<T: Real>(sys: &SpinSystem<T>, spec: &TrotterSpec<T>) -> Result<(Circuit<T>, ParamVector<T>)> {
    if spec.cycles == 0 {
        return Err(Error::Config("Trotter circuit needs at least one cycle".into()));
    }
    let q = T::lit(spec.cycles as f64);
    let terms: Vec<_> = sys.cycle_terms().collect();
    let mut circuit = Circuit::new(sys.n_qubits(), 0);
    let mut params = Vec::with_capacity(terms.len() * spec.cycles);
    for cycle in 0..spec.cycles {
        let reverse = spec.ordering == Ordering::Alternating && cycle % 2 == 1;
        let order: Box<dyn Iterator<Item = &&(T, _)>> = if reverse {
            Box::new(terms.iter().rev())
        } else {
            Box::new(terms.iter())
        };
        for (c, p) in order {
            circuit.push_bound(p.clone())?;
            params.push(T::lit(2.0) * *c * spec.time / q);
        }
    }
    Ok((circuit, ParamVector::new(params)))
}

/// Appends `k` cycles of the canonical layout, bound to fresh parameters that
/// start at `1e-8`.
pub fn append_trotter_cycles<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    sys: &SpinSystem<T>,
    k: usize,
) -> Result<(Circuit<T>, ParamVector<T>)> {
    if params.len() != circuit.n_params() {
        return Err(Error::Dimension {
            expected: circuit.n_params(),
            found: params.len(),
        });
    }
    let mut out = circuit.clone();
    let mut p = params.to_vec();
    for _ in 0..k {
        for (_, term) in sys.cycle_terms() {
            out.push_bound(term.clone())?;
            p.push(T::lit(1e-8));
        }
    }
    Ok((out, ParamVector::new(p)))
}

/// For a `q`-cycle layout, sums the `q` parameters belonging to each term.
pub fn sum_params_by_term<T: Real>(params: &[T], n_terms: usize, q: usize) -> Result<Vec<T>> {
    if n_terms * q != params.len() {
        return Err(Error::Dimension {
            expected: n_terms * q,
            found: params.len(),
        });
    }
    Ok((0..n_terms)
        .map(|j| (0..q).map(|c| params[c * n_terms + j]).sum())
        .collect())
}

/// Fidelity of `C(p)|in⟩` against exact evolution for time `t`.
pub fn fidelity_vs_exact<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    sys: &SpinSystem<T>,
    propagator: &ExactPropagator<T>,
    t: T,
) -> Result<T> {
    let target = propagator.evolve(&sys.input, t)?;
    circuit.apply(params, &sys.input)?.fidelity(&target)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiRow<T> {
    pub iteration: usize,
    pub time: T,
    pub fidelity: T,
    pub params: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiTrace<T> {
    pub rows: Vec<LiRow<T>>,
    /// Steps where the linear solve discarded every direction.
    pub degenerate_steps: usize,
}

impl<T: Real> LiTrace<T> {
    pub fn last(&self) -> &LiRow<T> {
        self.rows.last().expect("initial row present")
    }
}

/// Variational real-time simulation: evolves every parameter of `circuit`
/// for `iterations` steps of `dt` and scores each step against exact
/// evolution.
pub fn li_realtime<T: Real>(
    circuit: &Circuit<T>,
    initial: &[T],
    sys: &SpinSystem<T>,
    iterations: usize,
    dt: T,
    solver: &SolverConfig<T>,
) -> Result<LiTrace<T>> {
    let propagator = sys.propagator()?;
    let cfg = EvolutionConfig {
        step: dt,
        max_iterations: iterations,
        ..EvolutionConfig::real_time()
    };
    let free: Vec<usize> = (0..circuit.n_params()).collect();
    let mut observer = |it: usize, _: &[T], state: &StateVector<T>| -> Result<Vec<T>> {
        let target = propagator.evolve(&sys.input, dt * T::lit(it as f64))?;
        Ok(vec![state.fidelity(&target)?])
    };
    let trace = evolve(circuit, initial, &free, &sys.input, &sys.h, &cfg, solver, &mut observer)?;
    Ok(LiTrace {
        degenerate_steps: trace.degenerate_steps,
        rows: trace
            .rows
            .into_iter()
            .map(|r| LiRow {
                iteration: r.iteration,
                time: dt * T::lit(r.iteration as f64),
                fidelity: r.observed[0],
                params: r.params,
            })
            .collect(),
    })
}

/// The network's canonical cycle layout repeated `q` times, all gates bound.
pub fn cycle_layout<T: Real>(sys: &SpinSystem<T>, q: usize) -> Result<Circuit<T>> {
    let mut c = Circuit::new(sys.n_qubits(), 0);
    for _ in 0..q {
        for (_, term) in sys.cycle_terms() {
            c.push_bound(term.clone())?;
        }
    }
    Ok(c)
}
