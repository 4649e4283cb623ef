//! Recompilation of a fixed circuit's output state into a parameterised
//! template, by imaginary-time minimisation of a Hamiltonian whose unique
//! ground state is the input state.
//!
//! For source `A`, template `B(φ)` and input `|in⟩`, the ansatz is
//! `B(φ)⁻¹·A|in⟩`. Driving it to the ground state of `H_rec` makes
//! `B(φ)|in⟩ = A|in⟩` up to a global phase.

use crate::circuit::{nearest_identity_offset, Angle, Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::exact::ground_and_first_excited;
use crate::mclachlan::{evolve, step, EvolutionConfig, SolverConfig};
use crate::pauli::PauliSum;
use crate::scalar::Real;
use crate::state::StateVector;

/// Initial value of every template parameter; exactly zero can make the
/// first linear system singular.
pub const INITIAL_PARAM: f64 = 1e-8;

/// Default number of relaxation iterations after each gate elimination.
pub const DEFAULT_RELAX_ITERATIONS: usize = 100;

/// Lower bound on the fidelity with the ground state from a measured energy,
/// `clamp((e1 - E) / (e1 - e0), 0, 1)`.
pub fn fidelity_bound<T: Real>(energy: T, e0: T, e1: T) -> Result<T> {
    if !(e1 > e0) {
        return Err(Error::Config(format!("first excited energy {e1} must exceed ground energy {e0}")));
    }
    Ok(((e1 - energy) / (e1 - e0)).max(T::zero()).min(T::one()))
}

#[derive(Clone, Debug)]
pub struct RecompileJob<T> {
    /// Source circuit with every angle fixed.
    pub source: Circuit<T>,
    pub input: StateVector<T>,
    /// Template with every gate bound to a parameter.
    pub template: Circuit<T>,
    pub h_rec: PauliSum<T>,
    pub e0: T,
    pub e1: T,
    pub evolution: EvolutionConfig<T>,
    pub solver: SolverConfig<T>,
}

impl<T: Real> RecompileJob<T> {
    /// Binds `source_params` into `source` and diagonalises `h_rec` for its two
    /// lowest levels.
    pub fn new(
        source: &Circuit<T>,
        source_params: &[T],
        input: StateVector<T>,
        template: Circuit<T>,
        h_rec: PauliSum<T>,
    ) -> Result<Self> {
        let n = input.n_qubits();
        for c in [source, &template] {
            if c.n_qubits() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: c.n_qubits(),
                });
            }
        }
        if template.gates().iter().any(|g| matches!(g.angle(), Angle::Fixed(_))) {
            return Err(Error::InvalidGate("template gates must all be bound to parameters".into()));
        }
        let (e0, e1) = ground_and_first_excited(&h_rec, n)?;
        Ok(Self {
            source: source.bind_all(source_params)?,
            input,
            template,
            h_rec,
            e0,
            e1,
            evolution: EvolutionConfig::imaginary(),
            solver: SolverConfig::tsvd(),
        })
    }

    pub fn with_evolution(mut self, evolution: EvolutionConfig<T>) -> Self {
        self.evolution = evolution;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig<T>) -> Self {
        self.solver = solver;
        self
    }

    /// `A|in⟩`.
    pub fn target(&self) -> Result<StateVector<T>> {
        self.source.apply(&[], &self.input)
    }

    pub fn defect(&self, energy: T) -> T {
        energy - self.e0
    }
}

/// `A` followed by the gate-by-gate inverse of the template, with every
/// template parameter at its starting value.
pub fn build_ansatz<T: Real>(job: &RecompileJob<T>) -> Result<(Circuit<T>, ParamVector<T>)> {
    let ansatz = job.source.concat(&job.template.inverse())?;
    let n = ansatz.n_params();
    Ok((ansatz, ParamVector::filled(n, T::lit(INITIAL_PARAM))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecompileRow<T> {
    pub iteration: usize,
    pub energy: T,
    pub bound: T,
    /// `F(B(φ)|in⟩, A|in⟩)`.
    pub fidelity: T,
    /// `F(B(φ)⁻¹A|in⟩, |in⟩)`; equal to `fidelity` up to rounding.
    pub ansatz_fidelity: T,
    /// Lure scale applied to the source angles.
    pub stage: T,
    /// Parameter eliminated at this iteration, by its index in the original
    /// template.
    pub removed: Option<usize>,
    /// Template parameters, indexed as in the original template; eliminated
    /// ones read zero.
    pub params: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct RecompileResult<T> {
    pub template: Circuit<T>,
    pub phi: ParamVector<T>,
    pub rows: Vec<RecompileRow<T>>,
    pub converged: bool,
    /// Lure stages that ran out of iterations before reaching the threshold.
    pub stalled_stages: Vec<usize>,
}

impl<T: Real> RecompileResult<T> {
    pub fn last(&self) -> &RecompileRow<T> {
        self.rows.last().expect("trace has an initial row")
    }

    pub fn final_energy(&self) -> T {
        self.last().energy
    }

    pub fn final_fidelity(&self) -> T {
        self.last().fidelity
    }

    /// The template with the recompiled angles bound in.
    pub fn circuit(&self) -> Result<Circuit<T>> {
        self.template.bind_all(&self.phi)
    }
}

/// Scores trace rows for a job whose source is scaled by `stage`.
struct Scorer<'a, T> {
    job: &'a RecompileJob<T>,
    template: &'a Circuit<T>,
    /// Original index of each current template parameter.
    original: &'a [usize],
    n_original: usize,
    target: StateVector<T>,
    stage: T,
}

impl<T: Real> Scorer<'_, T> {
    fn row(&self, iteration: usize, energy: T, params: &[T], ansatz_state: &StateVector<T>) -> Result<RecompileRow<T>> {
        let rebuilt = self.template.apply(params, &self.job.input)?;
        let mut full = vec![T::zero(); self.n_original];
        for (k, v) in self.original.iter().zip(params) {
            full[*k] = *v;
        }
        Ok(RecompileRow {
            iteration,
            energy,
            bound: fidelity_bound(energy, self.job.e0, self.job.e1)?,
            fidelity: rebuilt.fidelity(&self.target)?,
            ansatz_fidelity: ansatz_state.fidelity(&self.job.input)?,
            stage: self.stage,
            removed: None,
            params: full,
        })
    }
}

fn run_stage<T: Real>(
    job: &RecompileJob<T>,
    stage: T,
    start: &[T],
    cfg: &EvolutionConfig<T>,
    iteration_offset: usize,
) -> Result<(Vec<RecompileRow<T>>, bool)> {
    let source = job.source.scale_fixed(stage);
    let ansatz = source.concat(&job.template.inverse())?;
    let original: Vec<usize> = (0..job.template.n_params()).collect();
    let scorer = Scorer {
        job,
        template: &job.template,
        original: &original,
        n_original: original.len(),
        target: source.apply(&[], &job.input)?,
        stage,
    };
    let free = original.clone();
    let mut observer = |it: usize, p: &[T], s: &StateVector<T>| -> Result<Vec<T>> {
        let e = s.expectation(&job.h_rec)?;
        let r = scorer.row(it, e, p, s)?;
        Ok(vec![r.bound, r.fidelity, r.ansatz_fidelity])
    };
    let trace = evolve(&ansatz, start, &free, &job.input, &job.h_rec, cfg, &job.solver, &mut observer)?;
    let rows = trace
        .rows
        .into_iter()
        .map(|r| RecompileRow {
            iteration: r.iteration + iteration_offset,
            energy: r.energy,
            bound: r.observed[0],
            fidelity: r.observed[1],
            ansatz_fidelity: r.observed[2],
            stage,
            removed: None,
            params: r.params,
        })
        .collect();
    Ok((rows, trace.converged))
}

/// Imaginary-time minimisation of `⟨H_rec⟩` over the template parameters.
pub fn recompile<T: Real>(job: &RecompileJob<T>) -> Result<RecompileResult<T>> {
    let (_, start) = build_ansatz(job)?;
    let (rows, converged) = run_stage(job, T::one(), &start, &job.evolution, 0)?;
    let phi = ParamVector::new(rows.last().expect("initial row").params.clone());
    Ok(RecompileResult {
        template: job.template.clone(),
        phi,
        rows,
        converged,
        stalled_stages: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LureConfig<T> {
    pub n_stages: usize,
    /// Advance once the energy is within this of the ground energy.
    pub threshold: T,
    /// Iteration budget of each stage before the last.
    pub stage_iterations: usize,
    /// Give up at the first stalled stage instead of moving on.
    pub halt_on_stall: bool,
}

impl<T: Real> LureConfig<T> {
    pub fn new(n_stages: usize, threshold: T) -> Self {
        Self {
            n_stages,
            threshold,
            stage_iterations: 2000,
            halt_on_stall: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::Config("lure needs at least one stage".into()));
        }
        if !(self.threshold > T::zero()) {
            return Err(Error::Config("lure threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Recompiles the source with its angles scaled by `n/N` for `n = 1..=N`,
/// moving on whenever the energy comes within the threshold of the ground
/// energy. The last stage runs to convergence as in [`recompile`].
pub fn lure_recompile<T: Real>(job: &RecompileJob<T>, lure: &LureConfig<T>) -> Result<RecompileResult<T>> {
    lure.validate()?;
    let (_, mut phi) = build_ansatz(job)?;
    let mut rows: Vec<RecompileRow<T>> = Vec::new();
    let mut stalled = Vec::new();
    let mut converged = false;
    for n in 1..=lure.n_stages {
        let stage = T::lit(n as f64) / T::lit(lure.n_stages as f64);
        let last = n == lure.n_stages;
        let cfg = if last {
            job.evolution.clone()
        } else {
            EvolutionConfig {
                max_iterations: lure.stage_iterations,
                stop_below: Some(job.e0 + lure.threshold),
                ..job.evolution.clone()
            }
        };
        let offset = rows.last().map_or(0, |r| r.iteration);
        let (stage_rows, stage_converged) = run_stage(job, stage, &phi, &cfg, offset)?;
        let first = usize::from(!rows.is_empty());
        rows.extend(stage_rows.into_iter().skip(first));
        phi = ParamVector::new(rows.last().expect("rows recorded").params.clone());
        if last {
            converged = stage_converged;
        } else if !(rows.last().expect("rows recorded").energy < job.e0 + lure.threshold) {
            stalled.push(n);
            if lure.halt_on_stall {
                break;
            }
        }
    }
    Ok(RecompileResult {
        template: job.template.clone(),
        phi,
        rows,
        converged,
        stalled_stages: stalled,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EliminationConfig<T> {
    /// Stop once the defect exceeds this multiple of the starting defect.
    pub defect_factor: T,
    /// Largest change of the driven parameter per iteration, in radians.
    pub max_step: T,
    /// Defect to measure growth against; the defect of the input otherwise.
    pub baseline_defect: Option<T>,
    /// Imaginary-time iterations after each elimination, with every remaining
    /// parameter free.
    pub relax_iterations: usize,
    /// Relaxation ends early once an iteration lowers the energy by less.
    pub relax_tolerance: T,
}

impl<T: Real> Default for EliminationConfig<T> {
    fn default() -> Self {
        Self {
            defect_factor: T::lit(2.0),
            max_step: T::lit(0.1),
            baseline_defect: None,
            relax_iterations: DEFAULT_RELAX_ITERATIONS,
            relax_tolerance: T::lit(1e-7),
        }
    }
}

impl<T: Real> EliminationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.defect_factor > T::one()) {
            return Err(Error::Config("defect factor must exceed 1".into()));
        }
        if !(self.max_step > T::zero()) {
            return Err(Error::Config("maximum step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EliminationResult<T> {
    /// Remaining template gates, parameters re-indexed densely.
    pub template: Circuit<T>,
    pub phi: ParamVector<T>,
    pub rows: Vec<RecompileRow<T>>,
    /// Original indices of the eliminated parameters, in elimination order.
    pub removed: Vec<usize>,
    /// Original index of each remaining parameter.
    pub kept: Vec<usize>,
    pub initial_defect: T,
    pub final_defect: T,
    /// Set when nothing was attempted because the input was already over
    /// the defect limit.
    pub diagnostic: Option<String>,
}

impl<T: Real> EliminationResult<T> {
    pub fn circuit(&self) -> Result<Circuit<T>> {
        self.template.bind_all(&self.phi)
    }
}

/// Repeatedly drives the parameter closest to an identity angle onto it,
/// at a capped rate while the others follow imaginary-time evolution, then
/// deletes its gates. Stops, undoing the last elimination, once the defect
/// exceeds `defect_factor` times the baseline.
pub fn eliminate_gates<T: Real>(
    result: &RecompileResult<T>,
    job: &RecompileJob<T>,
    cfg: &EliminationConfig<T>,
) -> Result<EliminationResult<T>> {
    cfg.validate()?;
    let n_original = result.template.n_params();
    let mut template = result.template.clone();
    let mut phi = result.phi.to_vec();
    let mut kept: Vec<usize> = (0..n_original).collect();
    let target = job.target()?;
    let energy_of = |template: &Circuit<T>, phi: &[T]| -> Result<(T, StateVector<T>)> {
        let ansatz = job.source.concat(&template.inverse())?;
        let s = ansatz.apply(phi, &job.input)?;
        Ok((s.expectation(&job.h_rec)?, s))
    };
    let score = |iteration: usize, template: &Circuit<T>, kept: &[usize], phi: &[T]| -> Result<RecompileRow<T>> {
        let (e, s) = energy_of(template, phi)?;
        Scorer {
            job,
            template,
            original: kept,
            n_original,
            target: target.clone(),
            stage: T::one(),
        }
        .row(iteration, e, phi, &s)
    };
    let mut rows = vec![score(0, &template, &kept, &phi)?];
    let initial_defect = job.defect(rows[0].energy);
    let baseline = cfg.baseline_defect.unwrap_or(initial_defect);
    let limit = cfg.defect_factor * baseline;
    let mut removed = Vec::new();
    let done = |template, phi: Vec<T>, kept, rows: Vec<RecompileRow<T>>, removed, diagnostic| {
        let final_defect = job.defect(rows.last().map_or(T::zero(), |r: &RecompileRow<T>| r.energy));
        Ok(EliminationResult {
            template,
            phi: ParamVector::new(phi),
            rows,
            removed,
            kept,
            initial_defect,
            final_defect,
            diagnostic,
        })
    };
    if initial_defect > limit {
        let msg = format!("defect {initial_defect:e} already exceeds the limit {limit:e}; nothing eliminated");
        return done(template, phi, kept, rows, removed, Some(msg));
    }
    let evo = EvolutionConfig {
        global_phase: true,
        ..job.evolution.clone()
    };
    while template.n_params() > 0 {
        let j = (0..template.n_params())
            .min_by(|&a, &b| {
                let da = template.param_distance_to_identity(&phi, a);
                let db = template.param_distance_to_identity(&phi, b);
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("at least one parameter");
        let period = template.param_identity_period(j);
        let snapshot = (phi.clone(), rows.len());
        let ansatz = job.source.concat(&template.inverse())?;
        let free: Vec<usize> = (0..template.n_params()).collect();
        let mut iteration = rows.last().expect("initial row").iteration;
        let mut drove = false;
        loop {
            let rem = nearest_identity_offset(phi[j], period);
            if rem == T::zero() {
                break;
            }
            let delta = rem.abs().min(cfg.max_step);
            let rate = -rem.signum() * delta / evo.step;
            let out = step(&ansatz, &phi, &free, &job.input, &job.h_rec, &evo, &job.solver, &[(j, rate)])?;
            phi = out.params.into_inner();
            if delta == rem.abs() {
                // land exactly on the identity angle
                phi[j] = phi[j] - nearest_identity_offset(phi[j], period);
            }
            iteration += 1;
            drove = true;
            rows.push(score(iteration, &template, &kept, &phi)?);
        }
        if !drove {
            iteration += 1;
        }
        let reduced = template.remove_param(j)?;
        let mut reduced_phi = phi.clone();
        reduced_phi.remove(j);
        let mut reduced_kept = kept.clone();
        let original = reduced_kept.remove(j);
        let mut row = score(iteration, &reduced, &reduced_kept, &reduced_phi)?;
        row.removed = Some(original);
        if drove {
            rows.pop();
        }
        rows.push(row);
        let reduced_ansatz = job.source.concat(&reduced.inverse())?;
        let reduced_free: Vec<usize> = (0..reduced.n_params()).collect();
        for _ in 0..cfg.relax_iterations {
            let out = step(&reduced_ansatz, &reduced_phi, &reduced_free, &job.input, &job.h_rec, &evo, &job.solver, &[])?;
            reduced_phi = out.params.into_inner();
            iteration += 1;
            let r = score(iteration, &reduced, &reduced_kept, &reduced_phi)?;
            let settled = (out.energy - r.energy).abs() < cfg.relax_tolerance;
            rows.push(r);
            if settled {
                break;
            }
        }
        if job.defect(rows.last().expect("rows recorded").energy) > limit {
            phi = snapshot.0;
            rows.truncate(snapshot.1);
            break;
        }
        template = reduced;
        phi = reduced_phi;
        kept = reduced_kept;
        removed.push(original);
    }
    done(template, phi, kept, rows, removed, None)
}
