//! Pauli strings, weighted Pauli sums and their plaintext format.
//!
//! A Hamiltonian file holds one term per line: a real coefficient followed by
//! factors such as `Z0`, `X3X4` or `Y1 Y2`. Blank lines and lines starting with
//! `#` are ignored. A line with only a coefficient (or the factor `I`) is an
//! identity term. Qubits are 0-indexed and qubit 0 is the least-significant bit
//! of a state's amplitude index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Tensor product of single-qubit Paulis; identity on every qubit not listed.
///
/// Factors are kept sorted by qubit with no repeats, so structural equality is
/// operator equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    factors: Vec<(usize, Pauli)>,
}

/// Bit-mask form of a Pauli string used by the state-vector kernels.
///
/// `P|b⟩ = i^n_y · (-1)^popcount(b & z) · |b ^ x⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub n_y: u32,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a string from `(qubit, pauli)` pairs; a qubit may appear once.
    pub fn new<I: IntoIterator<Item = (usize, Pauli)>>(factors: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (q, p) in factors {
            if map.insert(q, p).is_some() {
                return Err(Error::InvalidGate(format!(
                    "qubit {q} appears twice in a Pauli string"
                )));
            }
        }
        Ok(Self {
            factors: map.into_iter().collect(),
        })
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        Self {
            factors: vec![(qubit, p)],
        }
    }

    /// Same Pauli on two distinct qubits, e.g. `ZZ` on (a, b).
    pub fn pair(a: usize, b: usize, p: Pauli) -> Self {
        Self::new([(a, p), (b, p)]).expect("pair qubits must differ")
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.factors.iter().map(|&(q, _)| q)
    }

    pub fn contains_qubit(&self, qubit: usize) -> bool {
        self.factors.iter().any(|&(q, _)| q == qubit)
    }

    pub fn max_qubit(&self) -> Option<usize> {
        self.factors.last().map(|&(q, _)| q)
    }

    /// Errors if any factor lies outside an `n_qubits` register.
    pub fn check_range(&self, n_qubits: usize) -> Result<()> {
        match self.max_qubit() {
            Some(q) if q >= n_qubits => Err(Error::QubitOutOfRange { qubit: q, n_qubits }),
            _ => Ok(()),
        }
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks { x: 0, z: 0, n_y: 0 };
        for &(q, p) in &self.factors {
            let bit = 1usize << q;
            match p {
                Pauli::X => m.x |= bit,
                Pauli::Z => m.z |= bit,
                Pauli::Y => {
                    m.x |= bit;
                    m.z |= bit;
                    m.n_y += 1;
                }
            }
        }
        m
    }

    /// Generator label in the circuit format, e.g. `X`, `ZZ`, `XY`.
    pub fn label(&self) -> String {
        self.factors.iter().map(|&(_, p)| p.symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        for &(q, p) in &self.factors {
            write!(f, "{}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = String;

    /// Parses concatenated factors such as `X0X1` or `Z3`; `I` is the identity.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "I" {
            return Ok(Self::identity());
        }
        let mut factors = Vec::new();
        let mut chars = s.char_indices().peekable();
        while let Some((pos, c)) = chars.next() {
            let p = Pauli::from_symbol(c)
                .ok_or_else(|| format!("malformed factor {s:?}: unexpected {c:?} at offset {pos}"))?;
            let mut digits = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d.is_ascii_digit() {
                    digits.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            if digits.is_empty() {
                return Err(format!("malformed factor {s:?}: {c} has no qubit index"));
            }
            let q: usize = digits
                .parse()
                .map_err(|_| format!("malformed factor {s:?}: bad qubit index {digits}"))?;
            factors.push((q, p));
        }
        if factors.is_empty() {
            return Err("empty Pauli string".into());
        }
        PauliString::new(factors).map_err(|e| e.to_string())
    }
}

/// Weighted sum `Σ c_j P_j` of Pauli strings with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum<T> {
    terms: Vec<(T, PauliString)>,
}

impl<T: Real> Default for PauliSum<T> {
    fn default() -> Self {
        Self { terms: Vec::new() }
    }
}

impl<T: Real> PauliSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sum, merging repeated strings while keeping first-seen order.
    pub fn from_terms<I: IntoIterator<Item = (T, PauliString)>>(terms: I) -> Result<Self> {
        let mut sum = Self::new();
        for (c, p) in terms {
            sum.add_term(c, p)?;
        }
        Ok(sum)
    }

    /// Adds `c·P`, folding into an existing identical string.
    pub fn add_term(&mut self, c: T, p: PauliString) -> Result<()> {
        if !c.is_finite() {
            return Err(Error::Config(format!("non-finite coefficient for {p}")));
        }
        match self.terms.iter_mut().find(|(_, q)| *q == p) {
            Some((existing, _)) => *existing = *existing + c,
            None => self.terms.push((c, p)),
        }
        Ok(())
    }

    pub fn terms(&self) -> &[(T, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest register the sum fits in.
    pub fn min_qubits(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|(_, p)| p.max_qubit())
            .max()
            .map_or(0, |q| q + 1)
    }

    /// Sum `Σ σ^z_j` over `n` qubits.
    pub fn sum_z(n: usize) -> Self {
        Self {
            terms: (0..n)
                .map(|q| (T::one(), PauliString::single(q, Pauli::Z)))
                .collect(),
        }
    }

    /// Recompilation Hamiltonian whose unique ground state is the product
    /// state `spec` (over `0`, `1`, `+`, `-`): one single-qubit term per qubit,
    /// `-Z` for `0`, `+Z` for `1`, `-X` for `+`, `+X` for `-`.
    /// Ground energy `-n`, first excited `-n + 2`.
    pub fn product_state_hamiltonian(spec: &str) -> Result<Self> {
        let mut sum = Self::new();
        for (q, c) in spec.chars().enumerate() {
            let (coef, p) = match c {
                '0' => (-T::one(), Pauli::Z),
                '1' => (T::one(), Pauli::Z),
                '+' => (-T::one(), Pauli::X),
                '-' => (T::one(), Pauli::X),
                _ => {
                    return Err(Error::BasisSymbol {
                        position: q,
                        symbol: c,
                    })
                }
            };
            sum.terms.push((coef, PauliString::single(q, p)));
        }
        Ok(sum)
    }

    /// Projector Hamiltonian `1 - |0…0⟩⟨0…0|` expanded over Z strings.
    pub fn zero_projector_complement(n: usize) -> Self {
        let scale = T::lit(1.0 / (1u64 << n) as f64);
        let mut terms = vec![(T::one() - scale, PauliString::identity())];
        for mask in 1usize..(1 << n) {
            let s = PauliString::new(
                (0..n)
                    .filter(|q| mask >> q & 1 == 1)
                    .map(|q| (q, Pauli::Z)),
            )
            .expect("distinct qubits");
            terms.push((-scale, s));
        }
        Self { terms }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sum = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let coef_tok = tokens.next().expect("non-empty line");
            let coef: f64 = coef_tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad coefficient {coef_tok:?}"),
            })?;
            if !coef.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "coefficient must be finite".into(),
                });
            }
            let mut factors = Vec::new();
            for tok in tokens {
                let ps: PauliString = tok.parse().map_err(|msg| Error::Parse {
                    line: line_no,
                    msg,
                })?;
                factors.extend_from_slice(ps.factors());
            }
            let string = PauliString::new(factors).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            sum.add_term(T::lit(coef), string)?;
        }
        Ok(sum)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.terms {
            if p.is_identity() {
                out.push_str(&format!("{c}\n"));
            } else {
                out.push_str(&format!("{c} {p}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_table_rows() {
        let h = PauliSum::<f64>::parse("-0.433333 Z0\n0.730767 X0X1\n").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.terms()[0].0, -0.433333);
        assert_eq!(h.terms()[0].1, PauliString::single(0, Pauli::Z));
        assert_eq!(h.terms()[1].0, 0.730767);
        assert_eq!(h.terms()[1].1, PauliString::pair(0, 1, Pauli::X));
    }

    #[test]
    fn empty_text_is_empty_sum() {
        let h = PauliSum::<f64>::parse("").unwrap();
        assert!(h.is_empty());
        let h = PauliSum::<f64>::parse("# only a comment\n\n").unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn spaced_factors_and_identity() {
        let h = PauliSum::<f64>::parse("1.5 X3 Y4\n2\n-1 I\n").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.terms()[0].1.to_string(), "X3Y4");
        assert!(h.terms()[1].1.is_identity());
        assert_eq!(h.terms()[1].0, 1.0);
    }

    #[test]
    fn duplicate_strings_merge() {
        let h = PauliSum::<f64>::parse("1 Z0Z1\n0.5 Z1 Z0\n").unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].0, 1.5);
    }

    #[test]
    fn malformed_factor_reports_line() {
        let err = PauliSum::<f64>::parse("1 Z0\n2 Q1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = PauliSum::<f64>::parse("1 X\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = PauliSum::<f64>::parse("abc Z0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_qubit_in_term_rejected() {
        let err = PauliSum::<f64>::parse("1 X0Z0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = PauliSum::<f64>::parse("1 X0 Z0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn masks_encode_y_as_x_and_z() {
        let p: PauliString = "X0Y2Z3".parse().unwrap();
        let m = p.masks();
        assert_eq!(m.x, 0b0101);
        assert_eq!(m.z, 0b1100);
        assert_eq!(m.n_y, 1);
        assert_eq!(p.label(), "XYZ");
    }

    #[test]
    fn projector_complement_coefficients() {
        let h = PauliSum::<f64>::zero_projector_complement(2);
        assert_eq!(h.len(), 4);
        assert_eq!(h.terms()[0].0, 0.75);
        assert!(h.terms()[1..].iter().all(|(c, _)| *c == -0.25));
    }
}
