//! Dense state vectors and the in-place kernels that act on them.
//!
//! Qubit `q` is bit `q` of the amplitude index, so qubit 0 is the
//! least-significant bit.

use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pauli::{PauliMasks, PauliString, PauliSum};
use crate::scalar::{cplx, mul_i_pow, Cplx, Real};

/// Largest register handled by the dense representation.
pub const MAX_QUBITS: usize = 24;

/// Dense vector of `2^n_qubits` complex amplitudes.
///
/// Not necessarily normalised: derivative vectors share this type. Operations
/// that require a normalised input say so.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amps: Vec<Cplx<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "register too large for dense simulation");
        let mut amps = vec![Cplx::zero(); 1 << n_qubits];
        amps[index] = Cplx::one();
        Self { n_qubits, amps }
    }

    /// All-zero (unphysical) vector, used as an accumulator.
    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amps: vec![Cplx::zero(); 1 << n_qubits],
        }
    }

    pub fn from_amplitudes(amps: Vec<Cplx<T>>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Dimension {
                expected: len.next_power_of_two().max(1),
                found: len,
            });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Product state from one symbol per qubit over `0`, `1`, `+`, `-`.
    /// The first character describes qubit 0.
    pub fn from_basis_spec(spec: &str) -> Result<Self> {
        let mut factors = Vec::new();
        let r = T::FRAC_1_SQRT_2();
        for (position, symbol) in spec.chars().enumerate() {
            let f = match symbol {
                '0' => [T::one(), T::zero()],
                '1' => [T::zero(), T::one()],
                '+' => [r, r],
                '-' => [r, -r],
                _ => return Err(Error::BasisSymbol { position, symbol }),
            };
            factors.push(f);
        }
        let n = factors.len();
        if n > MAX_QUBITS {
            return Err(Error::TooLarge {
                n_qubits: n,
                limit: MAX_QUBITS,
            });
        }
        let amps = (0..1usize << n)
            .map(|b| {
                let re = factors
                    .iter()
                    .enumerate()
                    .fold(T::one(), |acc, (q, f)| acc * f[b >> q & 1]);
                cplx(re, T::zero())
            })
            .collect();
        Ok(Self { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Cplx<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Cplx<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalised(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= norm_tolerance::<T>()
    }

    pub fn normalised(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > T::zero() {
            for a in &mut self.amps {
                *a = *a / n;
            }
        }
        self
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Cplx<T>> {
        self.check_same_dim(other)?;
        Ok(inner_product(&self.amps, &other.amps))
    }

    /// `|⟨a|b⟩|²`. Meaningful for normalised inputs; symmetric and blind to
    /// the global phase of either argument.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn scaled(mut self, z: Cplx<T>) -> Self {
        for a in &mut self.amps {
            *a = *a * z;
        }
        self
    }

    /// `self += z · other`.
    pub fn add_scaled(&mut self, z: Cplx<T>, other: &Self) -> Result<()> {
        self.check_same_dim(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a = *a + z * *b;
        }
        Ok(())
    }

    /// Returns `P|self⟩`.
    pub fn apply_pauli_string(&self, p: &PauliString) -> Result<Self> {
        p.check_range(self.n_qubits)?;
        let mut out = self.clone();
        apply_pauli(&mut out.amps, p.masks(), 0);
        Ok(out)
    }

    /// Returns `H|self⟩` (not normalised).
    pub fn apply_sum(&self, h: &PauliSum<T>) -> Result<Self> {
        let mut out = Self::zeros(self.n_qubits);
        for (c, p) in h.terms() {
            p.check_range(self.n_qubits)?;
            accumulate_pauli(&mut out.amps, &self.amps, p.masks(), *c);
        }
        Ok(out)
    }

    /// `⟨s|H|s⟩` for a normalised state. The imaginary residue is discarded.
    pub fn expectation(&self, h: &PauliSum<T>) -> Result<T> {
        if !self.is_normalised() {
            return Err(Error::NotNormalised {
                norm_sqr: self.norm_sqr().as_f64(),
            });
        }
        let mut e = T::zero();
        for (c, p) in h.terms() {
            p.check_range(self.n_qubits)?;
            e = e + *c * pauli_expectation(&self.amps, p.masks()).re;
        }
        Ok(e)
    }
}

impl<T> Index<usize> for StateVector<T> {
    type Output = Cplx<T>;
    fn index(&self, i: usize) -> &Cplx<T> {
        &self.amps[i]
    }
}

impl<T> IndexMut<usize> for StateVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Cplx<T> {
        &mut self.amps[i]
    }
}

/// Normalisation slack used by contract checks.
pub fn norm_tolerance<T: Real>() -> T {
    (T::epsilon() * T::lit(1e4)).max(T::lit(1e-10))
}

pub(crate) fn inner_product<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re = re + x.re * y.re + x.im * y.im;
        im = im + x.re * y.im - x.im * y.re;
    }
    cplx(re, im)
}

/// Phase picked up by basis state `b` under `P`: `i^n_y (-1)^popcount(b & z)`,
/// returned as a power of `i`.
#[inline]
fn phase_pow(b: usize, m: PauliMasks) -> u32 {
    m.n_y + 2 * ((b & m.z).count_ones() & 1)
}

/// In place `ψ ← P ψ` on the subspace where every bit of `control` is set;
/// amplitudes outside it are untouched.
pub(crate) fn apply_pauli<T: Real>(amps: &mut [Cplx<T>], m: PauliMasks, control: usize) {
    if m.x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            if b & control == control {
                *a = mul_i_pow(*a, phase_pow(b, m));
            }
        }
        return;
    }
    let hb = 1usize << (usize::BITS - 1 - m.x.leading_zeros());
    for b in 0..amps.len() {
        if b & hb != 0 || b & control != control {
            continue;
        }
        let b2 = b ^ m.x;
        let lo = amps[b];
        let hi = amps[b2];
        amps[b] = mul_i_pow(hi, phase_pow(b2, m));
        amps[b2] = mul_i_pow(lo, phase_pow(b, m));
    }
}

/// Zeroes every amplitude outside the `control` subspace.
pub(crate) fn project_control<T: Real>(amps: &mut [Cplx<T>], control: usize) {
    if control == 0 {
        return;
    }
    for (b, a) in amps.iter_mut().enumerate() {
        if b & control != control {
            *a = Cplx::zero();
        }
    }
}

/// `out += c · P src`.
fn accumulate_pauli<T: Real>(out: &mut [Cplx<T>], src: &[Cplx<T>], m: PauliMasks, c: T) {
    for (b, a) in src.iter().enumerate() {
        let v = mul_i_pow(*a, phase_pow(b, m));
        out[b ^ m.x] = out[b ^ m.x] + v * c;
    }
}

/// `⟨s|P|s⟩`.
fn pauli_expectation<T: Real>(s: &[Cplx<T>], m: PauliMasks) -> Cplx<T> {
    let mut acc = Cplx::zero();
    for (b, a) in s.iter().enumerate() {
        let v = mul_i_pow(*a, phase_pow(b, m));
        acc = acc + s[b ^ m.x].conj() * v;
    }
    acc
}

/// In place `ψ ← exp(-i θ/2 P) ψ` on the subspace where every bit of
/// `control` is set.
pub(crate) fn apply_rotation<T: Real>(
    amps: &mut [Cplx<T>],
    m: PauliMasks,
    theta: T,
    control: usize,
) {
    let half = theta * T::lit(0.5);
    let (s, c) = half.sin_cos();
    if m.x == 0 {
        // diagonal: eigenvalue ±1 gives phase e^{∓iθ/2}
        let plus = cplx(c, -s);
        let minus = cplx(c, s);
        for (b, a) in amps.iter_mut().enumerate() {
            if b & control == control {
                *a = *a * if phase_pow(b, m) & 2 == 0 { plus } else { minus };
            }
        }
        return;
    }
    let hb = 1usize << (usize::BITS - 1 - m.x.leading_zeros());
    // -i s as a complex factor
    let mis = cplx(T::zero(), -s);
    for b in 0..amps.len() {
        if b & hb != 0 || b & control != control {
            continue;
        }
        let b2 = b ^ m.x;
        let lo = amps[b];
        let hi = amps[b2];
        amps[b] = lo * c + mis * mul_i_pow(hi, phase_pow(b2, m));
        amps[b2] = hi * c + mis * mul_i_pow(lo, phase_pow(b, m));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use approx::assert_abs_diff_eq;

    type S = StateVector<f64>;

    fn c(re: f64, im: f64) -> Cplx<f64> {
        cplx(re, im)
    }

    #[test]
    fn basis_spec_00() {
        let s = S::from_basis_spec("00").unwrap();
        assert_eq!(s.amplitudes(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
    }

    #[test]
    fn basis_spec_1plus_is_lsb_first() {
        let s = S::from_basis_spec("1+").unwrap();
        let r = 0.5f64.sqrt();
        let expected = [0.0, r, 0.0, r];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn basis_spec_network_input() {
        let s = S::from_basis_spec("1++++++").unwrap();
        assert_eq!(s.dim(), 128);
        for (b, a) in s.amplitudes().iter().enumerate() {
            let e = if b & 1 == 1 { 0.125 } else { 0.0 };
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
        }
        assert!(s.is_normalised());
    }

    #[test]
    fn basis_spec_rejects_bad_symbol() {
        let err = S::from_basis_spec("01x+").unwrap_err();
        assert_eq!(
            err,
            Error::BasisSymbol {
                position: 2,
                symbol: 'x'
            }
        );
    }

    #[test]
    fn single_qubit_paulis() {
        let zero = S::zero(1);
        let one = S::basis(1, 1);
        let x = zero.apply_pauli_string(&PauliString::single(0, Pauli::X)).unwrap();
        assert_eq!(x, one);
        let z = one.apply_pauli_string(&PauliString::single(0, Pauli::Z)).unwrap();
        assert_eq!(z.amplitudes(), &[c(0., 0.), c(-1., 0.)]);
        let y = zero.apply_pauli_string(&PauliString::single(0, Pauli::Y)).unwrap();
        assert_eq!(y.amplitudes(), &[c(0., 0.), c(0., 1.)]);
        let y1 = one.apply_pauli_string(&PauliString::single(0, Pauli::Y)).unwrap();
        assert_eq!(y1.amplitudes(), &[c(0., -1.), c(0., 0.)]);
    }

    #[test]
    fn pauli_out_of_range() {
        let err = S::zero(2)
            .apply_pauli_string(&PauliString::single(2, Pauli::X))
            .unwrap_err();
        assert_eq!(err, Error::QubitOutOfRange { qubit: 2, n_qubits: 2 });
    }

    #[test]
    fn expectation_sum_z() {
        let h = PauliSum::<f64>::sum_z(3);
        assert_abs_diff_eq!(S::zero(3).expectation(&h).unwrap(), 3.0);
        assert_eq!(S::zero(3).expectation(&PauliSum::new()).unwrap(), 0.0);
    }

    #[test]
    fn expectation_recompilation_hamiltonian() {
        let h = PauliSum::<f64>::product_state_hamiltonian("1++++++").unwrap();
        let s = S::from_basis_spec("1++++++").unwrap();
        assert_abs_diff_eq!(s.expectation(&h).unwrap(), -7.0, epsilon = 1e-12);
        let s0 = S::from_basis_spec("0++++++").unwrap();
        assert_abs_diff_eq!(s0.expectation(&h).unwrap(), -5.0, epsilon = 1e-12);
    }

    #[test]
    fn expectation_rejects_unnormalised() {
        let s = S::zeros(1);
        assert!(matches!(
            s.expectation(&PauliSum::sum_z(1)),
            Err(Error::NotNormalised { .. })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = S::zero(1);
        let one = S::basis(1, 1);
        let plus = S::from_basis_spec("+").unwrap();
        assert_abs_diff_eq!(zero.fidelity(&zero).unwrap(), 1.0);
        assert_abs_diff_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert_abs_diff_eq!(zero.fidelity(&plus).unwrap(), 0.5, epsilon = 1e-15);
        assert!(zero.fidelity(&S::zero(2)).is_err());
    }

    #[test]
    fn apply_sum_matches_expectation() {
        let h = PauliSum::<f64>::parse("0.3 X0Y1\n-0.7 Z1\n0.2 Y0\n").unwrap();
        let s = S::from_basis_spec("+-").unwrap();
        let hs = s.apply_sum(&h).unwrap();
        let e = s.inner(&hs).unwrap();
        assert_abs_diff_eq!(e.re, s.expectation(&h).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_kernel_matches_closed_form() {
        // exp(-iθ/2 Y) on |0⟩ = cos|0⟩ + sin|1⟩
        let mut s = S::zero(1);
        let theta = 0.9f64;
        apply_rotation(s.amplitudes_mut(), PauliString::single(0, Pauli::Y).masks(), theta, 0);
        assert_abs_diff_eq!(s[0].re, (theta / 2.).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(s[1].re, (theta / 2.).sin(), epsilon = 1e-15);
    }
}
