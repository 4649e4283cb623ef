//! McLachlan variational equations `M·λ̇ = V` for real and imaginary time.
//!
//! With `|Ψ(λ)⟩ = C(λ)|in⟩` and `H` the driving Hamiltonian:
//!
//! * `M_kq = 2 Re⟨∂_kΨ|∂_qΨ⟩`
//! * real time: `V_k = 2 Im⟨∂_kΨ|H|Ψ⟩` (Schrödinger evolution `e^{-iHt}`)
//! * imaginary time: `V_k = -2 Re⟨∂_kΨ|H|Ψ⟩` (energy-descending flow)
//!
//! An optional virtual parameter with `∂_gΨ = iΨ` absorbs the global phase.
//! Its rate is solved for and then dropped.

use rayon::prelude::*;

use crate::circuit::{Circuit, DerivativeMethod, ParamVector};
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, SymmetricEigen};
use crate::pauli::PauliSum;
use crate::scalar::{cplx, Real};
use crate::state::{inner_product, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionMode {
    RealTime,
    Imaginary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverConfig<T> {
    /// Truncated SVD; singular values below `rel_tol · σ_max` are dropped.
    Tsvd { rel_tol: T },
    /// Tikhonov regularisation, `λ` chosen at the L-curve corner among the
    /// candidates (a single candidate is used as is).
    Tikhonov { candidates: Vec<T> },
    /// Tikhonov with `points` candidates spaced logarithmically from `σ_max`
    /// down to `max(σ_min, 16·ε·σ_max)`, corner as above.
    TikhonovSpectral { points: usize },
    /// Minimum-norm least squares.
    LeastSquares,
}

impl<T: Real> SolverConfig<T> {
    pub fn tsvd() -> Self {
        SolverConfig::Tsvd {
            rel_tol: T::lit(1e-5),
        }
    }

    /// Three-point L-curve over the singular spectrum.
    pub fn tikhonov() -> Self {
        SolverConfig::TikhonovSpectral { points: 3 }
    }

    /// TSVD for imaginary time, Tikhonov for real time.
    pub fn default_for(mode: EvolutionMode) -> Self {
        match mode {
            EvolutionMode::RealTime => Self::tikhonov(),
            EvolutionMode::Imaginary => Self::tsvd(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverConfig::Tsvd { rel_tol } if !(*rel_tol > T::zero()) => {
                Err(Error::Config("TSVD tolerance must be positive".into()))
            }
            SolverConfig::Tikhonov { candidates } if candidates.is_empty() => {
                Err(Error::Config("Tikhonov needs at least one candidate".into()))
            }
            SolverConfig::Tikhonov { candidates } if candidates.iter().any(|c| !(*c > T::zero())) => {
                Err(Error::Config("Tikhonov candidates must be positive".into()))
            }
            SolverConfig::TikhonovSpectral { points: 0 } => {
                Err(Error::Config("Tikhonov needs at least one candidate".into()))
            }
            _ => Ok(()),
        }
    }
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self::tsvd()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionConfig<T> {
    pub mode: EvolutionMode,
    /// `Δt` (real time) or `Δτ` (imaginary time).
    pub step: T,
    pub max_iterations: usize,
    /// Stop once the energy moved less than `tolerance` over this many
    /// iterations; `0` disables the check.
    pub window: usize,
    pub tolerance: T,
    pub global_phase: bool,
    pub derivative: DerivativeMethod,
    /// Also stop as soon as the energy drops below this value.
    pub stop_below: Option<T>,
}

impl<T: Real> EvolutionConfig<T> {
    pub fn imaginary() -> Self {
        Self {
            mode: EvolutionMode::Imaginary,
            step: T::lit(1e-2),
            max_iterations: 5000,
            window: 50,
            tolerance: T::lit(1e-6),
            global_phase: true,
            derivative: DerivativeMethod::Analytic,
            stop_below: None,
        }
    }

    pub fn real_time() -> Self {
        Self {
            mode: EvolutionMode::RealTime,
            step: T::lit(2.5e-3),
            max_iterations: 700,
            window: 0,
            tolerance: T::zero(),
            global_phase: true,
            derivative: DerivativeMethod::Analytic,
            stop_below: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) {
            return Err(Error::Config("step must be positive".into()));
        }
        Ok(())
    }
}

/// `M`, `V` over the free parameters (plus the trailing global-phase entry
/// when enabled), with the energy of the state they were built at.
#[derive(Clone, Debug)]
pub struct LinearSystem<T> {
    pub matrix: SymMatrix<T>,
    pub vector: Vec<T>,
    /// Circuit parameter index for each row, in row order (phase row excluded).
    pub params: Vec<usize>,
    pub has_phase: bool,
    pub energy: T,
}

impl<T: Real> LinearSystem<T> {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

pub fn build_system<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    free: &[usize],
    input: &StateVector<T>,
    h: &PauliSum<T>,
    cfg: &EvolutionConfig<T>,
) -> Result<LinearSystem<T>> {
    let psi = circuit.apply(params, input)?;
    let h_psi = psi.apply_sum(h)?;
    let energy = inner_product(psi.amplitudes(), h_psi.amplitudes()).re;
    let mut derivs = circuit.state_derivatives(params, input, free, cfg.derivative)?;
    if cfg.global_phase {
        derivs.push(psi.clone().scaled(cplx(T::zero(), T::one())));
    }
    let n = derivs.len();
    let two = T::lit(2.0);
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| two * inner_product(derivs[i].amplitudes(), derivs[j].amplitudes()).re)
                .collect()
        })
        .collect();
    let mut matrix = SymMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            matrix.set(i, i + off, *v);
            matrix.set(i + off, i, *v);
        }
    }
    let vector = derivs
        .par_iter()
        .map(|d| {
            let z = inner_product(d.amplitudes(), h_psi.amplitudes());
            match cfg.mode {
                EvolutionMode::RealTime => two * z.im,
                EvolutionMode::Imaginary => -two * z.re,
            }
        })
        .collect();
    Ok(LinearSystem {
        matrix,
        vector,
        params: free.to_vec(),
        has_phase: cfg.global_phase,
        energy,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub rates: Vec<T>,
    /// Number of retained singular directions.
    pub rank: usize,
    /// Every singular value fell below the threshold; `rates` is zero.
    pub degenerate: bool,
    /// Regularisation strength used by Tikhonov.
    pub lambda: Option<T>,
}

/// Solves `M x = V` with the configured method via the eigendecomposition of
/// the symmetric `M` (its singular values are the eigenvalue magnitudes).
pub fn solve<T: Real>(matrix: &SymMatrix<T>, vector: &[T], solver: &SolverConfig<T>) -> Result<Solution<T>> {
    solver.validate()?;
    let n = matrix.dim();
    if vector.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: vector.len(),
        });
    }
    if n == 0 {
        return Ok(Solution {
            rates: Vec::new(),
            rank: 0,
            degenerate: false,
            lambda: None,
        });
    }
    let eig = SymmetricEigen::new(matrix)?;
    let coeffs = eig.project(vector);
    let sigma_max = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let pinv = |threshold: T| {
        let kept = eig.values.iter().filter(|v| v.abs() >= threshold && v.abs() > T::zero()).count();
        let x = eig.synthesize(&coeffs, |l| {
            if l.abs() >= threshold && l.abs() > T::zero() {
                l.recip()
            } else {
                T::zero()
            }
        });
        Solution {
            rates: x,
            rank: kept,
            degenerate: kept == 0,
            lambda: None,
        }
    };
    Ok(match solver {
        SolverConfig::Tsvd { rel_tol } => pinv(*rel_tol * sigma_max),
        SolverConfig::LeastSquares => pinv(T::epsilon() * T::lit(n as f64) * sigma_max),
        SolverConfig::Tikhonov { .. } | SolverConfig::TikhonovSpectral { .. } => {
            let candidates = match solver {
                SolverConfig::Tikhonov { candidates } => candidates.clone(),
                SolverConfig::TikhonovSpectral { points } => spectral_candidates(&eig.values, *points),
                _ => unreachable!(),
            };
            let lambda = if candidates.len() < 3 {
                candidates[0]
            } else {
                lcurve_corner(&eig, &coeffs, &candidates)
            };
            let mu2 = lambda * lambda;
            let x = eig.synthesize(&coeffs, |l| l / (l * l + mu2));
            Solution {
                rates: x,
                rank: n,
                degenerate: sigma_max == T::zero(),
                lambda: Some(lambda),
            }
        }
    })
}

fn spectral_candidates<T: Real>(values: &[T], points: usize) -> Vec<T> {
    let sigma_max = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let sigma_min = values.iter().fold(T::infinity(), |m, v| m.min(v.abs()));
    let low = sigma_min.max(T::lit(16.0) * T::epsilon() * sigma_max);
    if sigma_max == T::zero() {
        return vec![T::one()];
    }
    if points == 1 || !(low < sigma_max) {
        return vec![sigma_max];
    }
    let ratio = (sigma_max / low).powf(T::one() / T::lit((points - 1) as f64));
    let mut out = vec![low; points];
    for i in (0..points - 1).rev() {
        out[i] = out[i + 1] * ratio;
    }
    out
}

/// Picks the candidate at the corner of the L-curve
/// `(log‖Mx_λ − V‖, log‖x_λ‖)`: the middle point of the consecutive triple
/// with the largest Menger curvature.
fn lcurve_corner<T: Real>(eig: &SymmetricEigen<T>, coeffs: &[T], candidates: &[T]) -> T {
    let floor = T::min_positive_value().sqrt();
    let points: Vec<(T, T)> = candidates
        .iter()
        .map(|&lambda| {
            let mu2 = lambda * lambda;
            let mut res = T::zero();
            let mut norm = T::zero();
            for (l, c) in eig.values.iter().zip(coeffs) {
                let d = *l * *l + mu2;
                let x = *l * *c / d;
                let r = *c * mu2 / d;
                norm = norm + x * x;
                res = res + r * r;
            }
            (res.sqrt().max(floor).ln(), norm.sqrt().max(floor).ln())
        })
        .collect();
    let mut best = (T::neg_infinity(), 1usize);
    for i in 1..points.len() - 1 {
        let k = menger_curvature(points[i - 1], points[i], points[i + 1]);
        if k > best.0 {
            best = (k, i);
        }
    }
    candidates[best.1]
}

/// `4·area / (|ab|·|bc|·|ca|)`; zero for collinear or coincident points.
fn menger_curvature<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> T {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let ab = (b.0 - a.0).hypot(b.1 - a.1);
    let bc = (c.0 - b.0).hypot(c.1 - b.1);
    let ca = (a.0 - c.0).hypot(a.1 - c.1);
    let denom = ab * bc * ca;
    if denom > T::zero() {
        (cross + cross).abs() / denom
    } else {
        T::zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub params: ParamVector<T>,
    /// Energy at the parameters the step started from.
    pub energy: T,
    /// Euclidean norm of the free-parameter rates (pinned ones included).
    pub rate_norm: T,
    pub degenerate: bool,
}

/// One explicit Euler step `p ← p + λ̇·step`.
///
/// `pinned` forces the rate of some free parameters; their columns move to the
/// right-hand side before the remaining rates are solved for.
#[allow(clippy::too_many_arguments)]
pub fn step<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    free: &[usize],
    input: &StateVector<T>,
    h: &PauliSum<T>,
    cfg: &EvolutionConfig<T>,
    solver: &SolverConfig<T>,
    pinned: &[(usize, T)],
) -> Result<StepOutcome<T>> {
    cfg.validate()?;
    if let Some(&(k, _)) = pinned.iter().find(|(k, _)| !free.contains(k)) {
        return Err(Error::Config(format!("pinned parameter {k} is not free")));
    }
    let sys = build_system(circuit, params, free, input, h, cfg)?;
    let n = sys.dim();
    let pinned_rate = |row: usize| -> Option<T> {
        if row >= free.len() {
            return None;
        }
        pinned.iter().find(|(k, _)| *k == free[row]).map(|&(_, r)| r)
    };
    let open: Vec<usize> = (0..n).filter(|&r| pinned_rate(r).is_none()).collect();
    let mut rhs: Vec<T> = open.iter().map(|&r| sys.vector[r]).collect();
    for col in 0..n {
        if let Some(rate) = pinned_rate(col) {
            for (v, &r) in rhs.iter_mut().zip(&open) {
                *v = *v - sys.matrix.get(r, col) * rate;
            }
        }
    }
    let reduced = sys.matrix.select(&open);
    let sol = solve(&reduced, &rhs, solver)?;
    let mut rates = vec![T::zero(); free.len()];
    for (r, rate) in rates.iter_mut().enumerate() {
        if let Some(p) = pinned_rate(r) {
            *rate = p;
        }
    }
    for (&r, x) in open.iter().zip(&sol.rates) {
        if r < free.len() {
            rates[r] = *x;
        }
    }
    let mut next = params.to_vec();
    for (&k, rate) in free.iter().zip(&rates) {
        next[k] = next[k] + *rate * cfg.step;
    }
    let rate_norm = rates.iter().map(|r| *r * *r).sum::<T>().sqrt();
    Ok(StepOutcome {
        params: ParamVector::new(next),
        energy: sys.energy,
        rate_norm,
        degenerate: sol.degenerate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub iteration: usize,
    pub energy: T,
    pub params: Vec<T>,
    /// Values returned by the observer, in its column order.
    pub observed: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace<T> {
    pub rows: Vec<TraceRow<T>>,
    pub converged: bool,
    /// Iterations whose linear solve discarded every direction.
    pub degenerate_steps: usize,
}

impl<T: Real> EvolutionTrace<T> {
    pub fn last(&self) -> &TraceRow<T> {
        self.rows.last().expect("trace has an initial row")
    }

    pub fn final_params(&self) -> ParamVector<T> {
        ParamVector::new(self.last().params.clone())
    }

    pub fn final_energy(&self) -> T {
        self.last().energy
    }
}

/// Callback run on every recorded row: `(iteration, params, state)` to extra
/// columns.
pub trait Observer<T> {
    fn observe(&mut self, iteration: usize, params: &[T], state: &StateVector<T>) -> Result<Vec<T>>;
}

impl<T, F> Observer<T> for F
where
    F: FnMut(usize, &[T], &StateVector<T>) -> Result<Vec<T>>,
{
    fn observe(&mut self, iteration: usize, params: &[T], state: &StateVector<T>) -> Result<Vec<T>> {
        self(iteration, params, state)
    }
}

/// Observer recording nothing.
pub fn no_observer<T: Real>(_: usize, _: &[T], _: &StateVector<T>) -> Result<Vec<T>> {
    Ok(Vec::new())
}

/// Repeats [`step`] until `max_iterations` or energy convergence.
#[allow(clippy::too_many_arguments)]
pub fn evolve<T: Real, O: Observer<T>>(
    circuit: &Circuit<T>,
    initial: &[T],
    free: &[usize],
    input: &StateVector<T>,
    h: &PauliSum<T>,
    cfg: &EvolutionConfig<T>,
    solver: &SolverConfig<T>,
    observer: &mut O,
) -> Result<EvolutionTrace<T>> {
    cfg.validate()?;
    solver.validate()?;
    let record = |iteration: usize, params: &[T], observer: &mut O| -> Result<TraceRow<T>> {
        let state = circuit.apply(params, input)?;
        let energy = state.expectation(h)?;
        if !energy.is_finite() {
            return Err(Error::NonFinite { iteration });
        }
        Ok(TraceRow {
            iteration,
            energy,
            params: params.to_vec(),
            observed: observer.observe(iteration, params, &state)?,
        })
    };
    let mut rows = vec![record(0, initial, observer)?];
    let below = |e: T| cfg.stop_below.is_some_and(|b| e < b);
    let mut converged = free.is_empty() || below(rows[0].energy);
    let mut degenerate_steps = 0;
    let mut params = initial.to_vec();
    let mut iteration = 0;
    while !converged && iteration < cfg.max_iterations {
        let out = step(circuit, &params, free, input, h, cfg, solver, &[])?;
        degenerate_steps += usize::from(out.degenerate);
        params = out.params.into_inner();
        iteration += 1;
        rows.push(record(iteration, &params, observer)?);
        converged = below(rows[iteration].energy) || has_converged(&rows, cfg.window, cfg.tolerance);
    }
    Ok(EvolutionTrace {
        rows,
        converged,
        degenerate_steps,
    })
}

/// Energy spread over the last `window` iterations is below `tolerance`.
pub(crate) fn has_converged<T: Real>(rows: &[TraceRow<T>], window: usize, tolerance: T) -> bool {
    if window == 0 || rows.len() <= window {
        return false;
    }
    let tail = &rows[rows.len() - window - 1..];
    let (lo, hi) = tail.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
        (lo.min(r.energy), hi.max(r.energy))
    });
    hi - lo < tolerance
}
