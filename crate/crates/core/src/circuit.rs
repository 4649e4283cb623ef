//! Parameterised circuits of Pauli rotations and singly-controlled rotations.
//!
//! Every rotation is `exp(-i·s·θ/2·P)` with `s = ±1` the inversion sign, so a
//! circuit and its gate-by-gate inverse are driven by the same parameters.
//!
//! Text format, one gate per line (`#` starts a comment line):
//!
//! ```text
//! qubits 7          # optional register size
//! params 149        # optional parameter count
//! Z 0 fixed:-0.00078
//! ZZ 0 1 p17
//! CY 0 1 p4         # Y on qubit 1 controlled on qubit 0
//! X 3 p2 inv        # inverted gate
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Deref, DerefMut};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliMasks, PauliString};
use crate::scalar::{cplx, Real};
use crate::state::{apply_pauli, apply_rotation, project_control, StateVector};

/// Step of the fourth-order central difference.
pub const FD4_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    Rotation { generator: PauliString },
    Controlled { control: usize, generator: PauliString },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle<T> {
    Bound(usize),
    Fixed(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate<T> {
    kind: GateKind,
    angle: Angle<T>,
    inverted: bool,
    masks: PauliMasks,
    control_mask: usize,
}

impl<T: Real> Gate<T> {
    pub fn rotation(generator: PauliString, angle: Angle<T>) -> Result<Self> {
        if generator.is_identity() {
            return Err(Error::InvalidGate("rotation generator is the identity".into()));
        }
        Ok(Self {
            masks: generator.masks(),
            control_mask: 0,
            kind: GateKind::Rotation { generator },
            angle,
            inverted: false,
        })
    }

    pub fn controlled(control: usize, generator: PauliString, angle: Angle<T>) -> Result<Self> {
        if generator.is_identity() {
            return Err(Error::InvalidGate("rotation generator is the identity".into()));
        }
        if generator.contains_qubit(control) {
            return Err(Error::InvalidGate(format!(
                "control qubit {control} lies in the generator's support"
            )));
        }
        Ok(Self {
            masks: generator.masks(),
            control_mask: 1 << control,
            kind: GateKind::Controlled { control, generator },
            angle,
            inverted: false,
        })
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn generator(&self) -> &PauliString {
        match &self.kind {
            GateKind::Rotation { generator } | GateKind::Controlled { generator, .. } => generator,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match self.kind {
            GateKind::Controlled { control, .. } => Some(control),
            GateKind::Rotation { .. } => None,
        }
    }

    pub fn angle(&self) -> Angle<T> {
        self.angle
    }

    pub fn bound_param(&self) -> Option<usize> {
        match self.angle {
            Angle::Bound(k) => Some(k),
            Angle::Fixed(_) => None,
        }
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    /// `+1` or `-1`.
    pub fn sign(&self) -> T {
        if self.inverted {
            -T::one()
        } else {
            T::one()
        }
    }

    /// All qubits touched, control included.
    pub fn support_size(&self) -> usize {
        self.generator().weight() + usize::from(self.control().is_some())
    }

    pub fn max_qubit(&self) -> usize {
        let g = self.generator().max_qubit().unwrap_or(0);
        self.control().map_or(g, |c| c.max(g))
    }

    /// Circuit-format generator label, e.g. `ZZ` or `CY`.
    pub fn label(&self) -> String {
        match self.kind {
            GateKind::Rotation { ref generator } => generator.label(),
            GateKind::Controlled { ref generator, .. } => format!("C{}", generator.label()),
        }
    }

    /// Rotation angle actually applied, sign included.
    pub fn effective_angle(&self, params: &[T]) -> T {
        let raw = match self.angle {
            Angle::Bound(k) => params[k],
            Angle::Fixed(v) => v,
        };
        self.sign() * raw
    }

    /// Period of the gate in its angle up to a global phase: `2π` for plain
    /// rotations, `4π` for controlled ones (a controlled `-1` is a relative phase).
    pub fn identity_period(&self) -> T {
        match self.kind {
            GateKind::Rotation { .. } => T::TAU(),
            GateKind::Controlled { .. } => T::TAU() + T::TAU(),
        }
    }

    pub(crate) fn apply_raw(&self, amps: &mut [num_complex::Complex<T>], params: &[T]) {
        apply_rotation(amps, self.masks, self.effective_angle(params), self.control_mask);
    }

    /// `ψ ← (-i s/2) Π P ψ` with `Π` the control projector: the derivative
    /// generator inserted after this gate.
    fn apply_generator(&self, amps: &mut [num_complex::Complex<T>]) {
        project_control(amps, self.control_mask);
        apply_pauli(amps, self.masks, self.control_mask);
        let f = cplx(T::zero(), -self.sign() * T::lit(0.5));
        for a in amps.iter_mut() {
            *a = *a * f;
        }
    }
}

/// Distance of rotation angle `theta` from the nearest angle at which `gate`
/// is the identity up to global phase.
pub fn gate_distance_to_identity<T: Real>(gate: &Gate<T>, theta: T) -> T {
    nearest_identity_offset(theta, gate.identity_period()).abs()
}

/// `theta - k·period` for the integer `k` minimising its magnitude.
pub fn nearest_identity_offset<T: Real>(theta: T, period: T) -> T {
    theta - (theta / period).round() * period
}

/// Parameter values in radians.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamVector<T>(Vec<T>);

impl<T: Real> ParamVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn filled(n: usize, value: T) -> Self {
        Self(vec![value; n])
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// One value per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad parameter value {tok:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "parameter must be finite".into(),
                    });
                }
                values.push(T::lit(v));
            }
        }
        Ok(Self(values))
    }

    pub fn serialize(&self) -> String {
        self.0.iter().fold(String::new(), |mut s, v| {
            let _ = writeln!(s, "{v:.16e}");
            s
        })
    }
}

impl<T> Deref for ParamVector<T> {
    type Target = Vec<T>;
    fn deref(&self) -> &Vec<T> {
        &self.0
    }
}

impl<T> DerefMut for ParamVector<T> {
    fn deref_mut(&mut self) -> &mut Vec<T> {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for ParamVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeMethod {
    Analytic,
    /// Fourth-order central finite difference with step [`FD4_STEP`].
    Fd4,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub by_generator: BTreeMap<String, usize>,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.by_generator.values().sum()
    }
}

/// Ordered gate list; the first gate is applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T> {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize, n_params: usize) -> Self {
        Self {
            n_qubits,
            n_params,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate<T>) -> Result<()> {
        if gate.max_qubit() >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: gate.max_qubit(),
                n_qubits: self.n_qubits,
            });
        }
        if let Angle::Bound(k) = gate.angle {
            if k >= self.n_params {
                return Err(Error::ParamOutOfRange {
                    index: k,
                    n_params: self.n_params,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends a gate bound to a fresh parameter; returns its index.
    pub fn push_bound(&mut self, generator: PauliString) -> Result<usize> {
        let k = self.n_params;
        self.n_params += 1;
        let gate = Gate::rotation(generator, Angle::Bound(k))?;
        if let Err(e) = self.push(gate) {
            self.n_params -= 1;
            return Err(e);
        }
        Ok(k)
    }

    fn check_inputs(&self, params: &[T], state: &StateVector<T>) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::Dimension {
                expected: self.n_params,
                found: params.len(),
            });
        }
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: state.n_qubits(),
            });
        }
        Ok(())
    }

    /// Returns `C(p)|s⟩`.
    pub fn apply(&self, params: &[T], state: &StateVector<T>) -> Result<StateVector<T>> {
        self.check_inputs(params, state)?;
        let mut out = state.clone();
        self.apply_range(params, out.amplitudes_mut(), 0..self.gates.len());
        Ok(out)
    }

    fn apply_range(
        &self,
        params: &[T],
        amps: &mut [num_complex::Complex<T>],
        range: std::ops::Range<usize>,
    ) {
        for g in &self.gates[range] {
            g.apply_raw(amps, params);
        }
    }

    /// Gate-by-gate inverse: order reversed and every inversion flag flipped,
    /// bindings kept.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            n_params: self.n_params,
            gates: self
                .gates
                .iter()
                .rev()
                .map(|g| Gate {
                    inverted: !g.inverted,
                    ..g.clone()
                })
                .collect(),
        }
    }

    /// Gates of `self` then `other`; `other`'s parameters are shifted after
    /// `self`'s.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let offset = self.n_params;
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().map(|g| {
            let mut g = g.clone();
            if let Angle::Bound(k) = g.angle {
                g.angle = Angle::Bound(k + offset);
            }
            g
        }));
        Ok(Self {
            n_qubits: self.n_qubits,
            n_params: self.n_params + other.n_params,
            gates,
        })
    }

    /// Replaces every bound angle by its value from `params`; the result has no
    /// parameters.
    pub fn bind_all(&self, params: &[T]) -> Result<Self> {
        if params.len() != self.n_params {
            return Err(Error::Dimension {
                expected: self.n_params,
                found: params.len(),
            });
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            n_params: 0,
            gates: self
                .gates
                .iter()
                .map(|g| {
                    let mut g = g.clone();
                    if let Angle::Bound(k) = g.angle {
                        g.angle = Angle::Fixed(params[k]);
                    }
                    g
                })
                .collect(),
        })
    }

    /// Multiplies every fixed angle by `alpha`.
    pub fn scale_fixed(&self, alpha: T) -> Self {
        let mut out = self.clone();
        for g in &mut out.gates {
            if let Angle::Fixed(v) = g.angle {
                g.angle = Angle::Fixed(v * alpha);
            }
        }
        out
    }

    /// Drops every gate bound to parameter `k` and shifts higher indices down.
    pub fn remove_param(&self, k: usize) -> Result<Self> {
        if k >= self.n_params {
            return Err(Error::ParamOutOfRange {
                index: k,
                n_params: self.n_params,
            });
        }
        let gates = self
            .gates
            .iter()
            .filter(|g| g.bound_param() != Some(k))
            .map(|g| {
                let mut g = g.clone();
                if let Angle::Bound(j) = g.angle {
                    if j > k {
                        g.angle = Angle::Bound(j - 1);
                    }
                }
                g
            })
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            n_params: self.n_params - 1,
            gates,
        })
    }

    /// Gates bound to parameter `k`.
    pub fn gates_for_param(&self, k: usize) -> impl Iterator<Item = &Gate<T>> {
        self.gates.iter().filter(move |g| g.bound_param() == Some(k))
    }

    /// Period in parameter `k` after which every gate bound to it is back at
    /// the identity (the largest of their periods).
    pub fn param_identity_period(&self, k: usize) -> T {
        self.gates_for_param(k)
            .map(|g| g.identity_period())
            .fold(T::TAU(), |a, b| a.max(b))
    }

    /// Distance of `params[k]` from an angle at which all its gates are the
    /// identity up to global phase.
    pub fn param_distance_to_identity(&self, params: &[T], k: usize) -> T {
        nearest_identity_offset(params[k], self.param_identity_period(k)).abs()
    }

    pub fn count_gates(&self) -> GateCounts {
        let mut counts = GateCounts::default();
        for g in &self.gates {
            match g.support_size() {
                1 => counts.one_qubit += 1,
                2 => counts.two_qubit += 1,
                _ => {}
            }
            *counts.by_generator.entry(g.label()).or_insert(0) += 1;
        }
        counts
    }

    /// `∂ C(p)|s⟩ / ∂p_k` (unnormalised).
    pub fn state_derivative(
        &self,
        params: &[T],
        input: &StateVector<T>,
        k: usize,
        method: DerivativeMethod,
    ) -> Result<StateVector<T>> {
        self.check_inputs(params, input)?;
        if k >= self.n_params {
            return Err(Error::ParamOutOfRange {
                index: k,
                n_params: self.n_params,
            });
        }
        Ok(self
            .state_derivatives(params, input, &[k], method)?
            .pop()
            .expect("one derivative requested"))
    }

    /// Derivatives with respect to each parameter in `ks`, in that order.
    /// Evaluated in parallel; each vector is computed by a fixed sequence of
    /// operations so the result does not depend on thread scheduling.
    pub fn state_derivatives(
        &self,
        params: &[T],
        input: &StateVector<T>,
        ks: &[usize],
        method: DerivativeMethod,
    ) -> Result<Vec<StateVector<T>>> {
        self.check_inputs(params, input)?;
        if let Some(&k) = ks.iter().find(|&&k| k >= self.n_params) {
            return Err(Error::ParamOutOfRange {
                index: k,
                n_params: self.n_params,
            });
        }
        Ok(match method {
            DerivativeMethod::Analytic => self.analytic_derivatives(params, input, ks),
            DerivativeMethod::Fd4 => ks
                .par_iter()
                .map(|&k| self.fd4_derivative(params, input, k))
                .collect(),
        })
    }

    fn analytic_derivatives(
        &self,
        params: &[T],
        input: &StateVector<T>,
        ks: &[usize],
    ) -> Vec<StateVector<T>> {
        let mut wanted = vec![false; self.n_params];
        for &k in ks {
            wanted[k] = true;
        }
        // state just after every gate bound to a requested parameter
        let mut snapshots: Vec<Option<StateVector<T>>> = vec![None; self.gates.len()];
        let mut psi = input.clone();
        for (i, g) in self.gates.iter().enumerate() {
            g.apply_raw(psi.amplitudes_mut(), params);
            if g.bound_param().is_some_and(|k| wanted[k]) {
                snapshots[i] = Some(psi.clone());
            }
        }
        ks.par_iter()
            .map(|&k| {
                let mut acc = StateVector::zeros(self.n_qubits);
                for (i, g) in self.gates.iter().enumerate() {
                    if g.bound_param() != Some(k) {
                        continue;
                    }
                    let mut d = snapshots[i].clone().expect("snapshot recorded");
                    g.apply_generator(d.amplitudes_mut());
                    self.apply_range(params, d.amplitudes_mut(), i + 1..self.gates.len());
                    acc.add_scaled(cplx(T::one(), T::zero()), &d)
                        .expect("same register");
                }
                acc
            })
            .collect()
    }

    fn fd4_derivative(&self, params: &[T], input: &StateVector<T>, k: usize) -> StateVector<T> {
        let h = T::lit(FD4_STEP);
        let mut p = params.to_vec();
        let mut eval = |shift: T| {
            p[k] = params[k] + shift;
            let mut s = input.clone();
            self.apply_range(&p, s.amplitudes_mut(), 0..self.gates.len());
            s
        };
        let two = T::lit(2.0);
        let p2 = eval(two * h);
        let p1 = eval(h);
        let m1 = eval(-h);
        let m2 = eval(-two * h);
        let denom = T::lit(12.0) * h;
        let eight = T::lit(8.0);
        let amps = p2
            .amplitudes()
            .iter()
            .zip(p1.amplitudes())
            .zip(m1.amplitudes())
            .zip(m2.amplitudes())
            .map(|(((a, b), c), d)| ((*b - *c) * eight - (*a - *d)) / denom)
            .collect();
        StateVector::from_amplitudes(amps).expect("power-of-two length")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n_qubits: Option<usize> = None;
        let mut n_params: Option<usize> = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "qubits" | "params" => {
                    let [_, v] = tokens[..] else {
                        return Err(err(format!("expected `{} N`", tokens[0])));
                    };
                    let v: usize = v.parse().map_err(|_| err(format!("bad count {v:?}")))?;
                    if tokens[0] == "qubits" {
                        n_qubits = Some(v);
                    } else {
                        n_params = Some(v);
                    }
                    continue;
                }
                _ => {}
            }
            gates.push(parse_gate::<T>(&tokens).map_err(err)?);
        }
        let used_qubits = gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0);
        let used_params = gates
            .iter()
            .filter_map(|g| g.bound_param())
            .map(|k| k + 1)
            .max()
            .unwrap_or(0);
        let mut c = Circuit::new(n_qubits.unwrap_or(used_qubits), n_params.unwrap_or(used_params));
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {}\nparams {}\n", self.n_qubits, self.n_params);
        for g in &self.gates {
            out.push_str(&g.label());
            if let Some(c) = g.control() {
                let _ = write!(out, " {c}");
            }
            for q in g.generator().support() {
                let _ = write!(out, " {q}");
            }
            match g.angle {
                Angle::Bound(k) => {
                    let _ = write!(out, " p{k}");
                }
                Angle::Fixed(v) => {
                    let _ = write!(out, " fixed:{v}");
                }
            }
            if g.inverted {
                out.push_str(" inv");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_gate<T: Real>(tokens: &[&str]) -> std::result::Result<Gate<T>, String> {
    let label = tokens[0];
    let (controlled, letters) = match label.strip_prefix('C') {
        Some(rest) => (true, rest),
        None => (false, label),
    };
    let paulis = letters
        .chars()
        .map(|c| Pauli::from_symbol(c).ok_or_else(|| format!("unknown generator {label:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if paulis.is_empty() {
        return Err(format!("unknown generator {label:?}"));
    }
    let n_q = paulis.len() + usize::from(controlled);
    let mut rest = &tokens[1..];
    let inverted = rest.last() == Some(&"inv");
    if inverted {
        rest = &rest[..rest.len() - 1];
    }
    if rest.len() != n_q + 1 {
        return Err(format!(
            "{label} expects {n_q} qubit(s) and one binding, found {} token(s)",
            rest.len()
        ));
    }
    let qubits = rest[..n_q]
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| format!("bad qubit {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let bind = rest[n_q];
    let angle = if let Some(k) = bind.strip_prefix('p') {
        Angle::Bound(k.parse().map_err(|_| format!("bad binding {bind:?}"))?)
    } else if let Some(v) = bind.strip_prefix("fixed:") {
        let v: f64 = v.parse().map_err(|_| format!("bad angle {bind:?}"))?;
        if !v.is_finite() {
            return Err("angle must be finite".into());
        }
        Angle::Fixed(T::lit(v))
    } else {
        return Err(format!("bad binding {bind:?} (expected pN or fixed:VALUE)"));
    };
    let (control, targets) = if controlled {
        (Some(qubits[0]), &qubits[1..])
    } else {
        (None, &qubits[..])
    };
    let generator = PauliString::new(targets.iter().copied().zip(paulis))
        .map_err(|e| e.to_string())?;
    let mut gate = match control {
        Some(c) => Gate::controlled(c, generator, angle),
        None => Gate::rotation(generator, angle),
    }
    .map_err(|e| e.to_string())?;
    gate.inverted = inverted;
    Ok(gate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type C = Circuit<f64>;
    type S = StateVector<f64>;

    fn rot(p: PauliString, k: usize) -> Gate<f64> {
        Gate::rotation(p, Angle::Bound(k)).unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = C::new(2, 0);
        let s = S::from_basis_spec("+1").unwrap();
        assert_eq!(c.apply(&[], &s).unwrap(), s);
    }

    #[test]
    fn rx_pi_on_zero() {
        let mut c = C::new(1, 1);
        c.push(rot(PauliString::single(0, Pauli::X), 0)).unwrap();
        let out = c.apply(&[std::f64::consts::PI], &S::zero(1)).unwrap();
        assert_abs_diff_eq!(out[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn rzz_on_00_is_phase() {
        let mut c = C::new(2, 1);
        c.push(rot(PauliString::pair(0, 1, Pauli::Z), 0)).unwrap();
        let theta = 0.7;
        let out = c.apply(&[theta], &S::zero(2)).unwrap();
        assert_abs_diff_eq!(out[0].re, (theta / 2.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(out[0].im, -(theta / 2.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn controlled_rotation_acts_only_on_control_one() {
        let mut c = C::new(2, 1);
        c.push(Gate::controlled(0, PauliString::single(1, Pauli::Y), Angle::Bound(0)).unwrap())
            .unwrap();
        let pi = std::f64::consts::PI;
        // control 0 in |0⟩: nothing happens
        let out = c.apply(&[pi], &S::zero(2)).unwrap();
        assert_eq!(out, S::zero(2));
        // control in |1⟩: Y rotation by π sends |1,0⟩ (index 1) to |1,1⟩ (index 3)
        let out = c.apply(&[pi], &S::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(out[3].re, 1.0, epsilon = 1e-15);
        assert!(Gate::<f64>::controlled(1, PauliString::single(1, Pauli::Y), Angle::Bound(0)).is_err());
    }

    #[test]
    fn inverse_definition() {
        let mut c = C::new(2, 2);
        c.push(rot(PauliString::single(0, Pauli::Z), 0)).unwrap();
        c.push(rot(PauliString::single(1, Pauli::X), 1)).unwrap();
        let inv = c.inverse();
        assert_eq!(inv.gates()[0].generator(), &PauliString::single(1, Pauli::X));
        assert_eq!(inv.gates()[0].bound_param(), Some(1));
        assert!(inv.gates()[0].is_inverted());
        assert_eq!(inv.gates()[1].generator(), &PauliString::single(0, Pauli::Z));
        assert!(inv.gates()[1].is_inverted());
        assert!(C::new(3, 0).inverse().is_empty());
    }

    #[test]
    fn concat_offsets_params() {
        let mut a = C::new(1, 1);
        a.push(rot(PauliString::single(0, Pauli::Z), 0)).unwrap();
        let mut b = C::new(1, 1);
        b.push(rot(PauliString::single(0, Pauli::X), 0)).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.len(), 2);
        assert_eq!(ab.n_params(), 2);
        assert_eq!(ab.gates()[1].bound_param(), Some(1));
        assert_eq!(C::new(1, 0).concat(&a).unwrap(), a);
        assert!(a.concat(&C::new(2, 0)).is_err());
    }

    #[test]
    fn derivative_of_rz_on_plus() {
        let mut c = C::new(1, 1);
        c.push(rot(PauliString::single(0, Pauli::Z), 0)).unwrap();
        let plus = S::from_basis_spec("+").unwrap();
        let d = c
            .state_derivative(&[0.0], &plus, 0, DerivativeMethod::Analytic)
            .unwrap();
        let r = 0.5f64.sqrt();
        // -(i/2) Z|+⟩
        assert_abs_diff_eq!(d[0].im, -0.5 * r, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1].im, 0.5 * r, epsilon = 1e-15);
        assert_abs_diff_eq!(d.norm_sqr().sqrt(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn unused_param_has_zero_derivative() {
        let mut c = C::new(1, 2);
        c.push(rot(PauliString::single(0, Pauli::X), 0)).unwrap();
        for m in [DerivativeMethod::Analytic, DerivativeMethod::Fd4] {
            let d = c.state_derivative(&[0.3, 0.1], &S::zero(1), 1, m).unwrap();
            assert_eq!(d.norm_sqr(), 0.0);
        }
        assert!(c
            .state_derivative(&[0.3, 0.1], &S::zero(1), 2, DerivativeMethod::Analytic)
            .is_err());
    }

    #[test]
    fn distance_to_identity() {
        let g = rot(PauliString::single(0, Pauli::X), 0);
        assert_abs_diff_eq!(gate_distance_to_identity(&g, 0.0), 0.0);
        assert_abs_diff_eq!(gate_distance_to_identity(&g, std::f64::consts::TAU), 0.0);
        assert_abs_diff_eq!(gate_distance_to_identity(&g, -0.3), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(gate_distance_to_identity(&g, 6.0), std::f64::consts::TAU - 6.0, epsilon = 1e-15);
        let cg = Gate::controlled(0, PauliString::single(1, Pauli::Y), Angle::Bound(0)).unwrap();
        assert_abs_diff_eq!(gate_distance_to_identity(&cg, std::f64::consts::TAU), std::f64::consts::TAU);
    }

    #[test]
    fn parse_examples() {
        let text = "# demo\nZZ 0 1 p17\nX 3 p2\nCY 0 1 p4\nZ 0 fixed:-0.00078\nX 1 p0 inv\n";
        let c = C::parse(text).unwrap();
        assert_eq!(c.n_qubits(), 4);
        assert_eq!(c.n_params(), 18);
        assert_eq!(c.len(), 5);
        assert_eq!(c.gates()[2].control(), Some(0));
        assert_eq!(c.gates()[3].angle(), Angle::Fixed(-0.00078));
        assert!(c.gates()[4].is_inverted());
        let counts = c.count_gates();
        assert_eq!(counts.one_qubit, 3);
        assert_eq!(counts.two_qubit, 2);
        assert_eq!(counts.by_generator["CY"], 1);
        assert_eq!(C::parse(&c.serialize()).unwrap(), c);
        assert!(C::parse("").unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_line() {
        for (text, line) in [
            ("X 0 p0\nQ 1 p1\n", 2),
            ("ZZ 0 p1\n", 1),
            ("X 0 p0\nX 0 q1\n", 2),
            ("\n\nX a p0\n", 3),
            ("XX 1 1 p0\n", 1),
            ("CX 1 1 p0\n", 1),
        ] {
            match C::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(matches!(C::parse("qubits 2\nX 3 p0\n"), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn remove_param_reindexes() {
        let c = C::parse("X 0 p0\nZ 1 p1\nY 0 p2\nZ 0 p1\n").unwrap();
        let r = c.remove_param(1).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.n_params(), 2);
        assert_eq!(r.gates()[1].bound_param(), Some(1));
    }

    #[test]
    fn param_vector_round_trip() {
        let p = ParamVector::new(vec![0.1f64, -2.5e-8, 3.0]);
        assert_eq!(ParamVector::parse(&p.serialize()).unwrap(), p);
        assert!(ParamVector::<f64>::parse("1\nx\n").is_err());
    }
}
