//! Dense spectra and exact time evolution for small registers.

use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, SymmetricEigen};
use crate::pauli::PauliSum;
use crate::scalar::{cplx, Real};
use crate::state::StateVector;

/// Largest register handled by dense diagonalisation.
pub const DENSE_LIMIT: usize = 12;

/// Eigendecomposition of a Pauli-sum Hamiltonian, computed once and reused for
/// any number of evolution times.
///
/// A Hermitian `H = A + iB` is diagonalised through the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every
/// eigenvalue doubled.
#[derive(Clone, Debug)]
pub struct ExactPropagator<T> {
    n_qubits: usize,
    eig: SymmetricEigen<T>,
}

impl<T: Real> ExactPropagator<T> {
    pub fn new(h: &PauliSum<T>, n_qubits: usize) -> Result<Self> {
        if n_qubits > DENSE_LIMIT {
            return Err(Error::TooLarge {
                n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let dim = 1usize << n_qubits;
        let mut r = SymMatrix::zeros(2 * dim);
        for j in 0..dim {
            let col = StateVector::basis(n_qubits, j).apply_sum(h)?;
            for (i, z) in col.amplitudes().iter().enumerate() {
                r.set(i, j, z.re);
                r.set(i + dim, j + dim, z.re);
                r.set(i + dim, j, z.im);
                r.set(i, j + dim, -z.im);
            }
        }
        Ok(Self {
            n_qubits,
            eig: SymmetricEigen::new(&r)?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Eigenvalues of `H` in ascending order, with multiplicity.
    pub fn energies(&self) -> Vec<T> {
        self.eig.values.iter().step_by(2).copied().collect()
    }

    /// Ground energy and the lowest energy strictly above it (beyond `tol`).
    pub fn ground_and_gap(&self, tol: T) -> Option<(T, T)> {
        let e = self.energies();
        let e0 = *e.first()?;
        e.iter().find(|&&x| x > e0 + tol).map(|&e1| (e0, e1))
    }

    /// `e^{-iHt}|s⟩`.
    pub fn evolve(&self, s: &StateVector<T>, t: T) -> Result<StateVector<T>> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        let dim = s.dim();
        let w: Vec<T> = s
            .amplitudes()
            .iter()
            .map(|z| z.re)
            .chain(s.amplitudes().iter().map(|z| z.im))
            .collect();
        let c = self.eig.project(&w);
        let x = self.eig.synthesize(&c, |l| (l * t).cos());
        let y = self.eig.synthesize(&c, |l| (l * t).sin());
        // cos(Rt)w - J sin(Rt)w with J = [[0, -1], [1, 0]] standing for i
        let amps = (0..dim)
            .map(|i| cplx(x[i] + y[i + dim], x[i + dim] - y[i]))
            .collect();
        StateVector::from_amplitudes(amps)
    }
}

/// Ground and first-excited energies of `h` on `n_qubits`.
pub fn ground_and_first_excited<T: Real>(h: &PauliSum<T>, n_qubits: usize) -> Result<(T, T)> {
    ExactPropagator::new(h, n_qubits)?
        .ground_and_gap(T::lit(1e-9))
        .ok_or_else(|| Error::Config("Hamiltonian has a single energy level".into()))
}
