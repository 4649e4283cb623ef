use qrecompile::circuit::DerivativeMethod;
use qrecompile::dynamics::{build_trotter_circuit, fidelity_vs_exact, Ordering, SpinSystem, TrotterSpec};
use qrecompile::exact::{ExactPropagator, DENSE_LIMIT};
use qrecompile::mclachlan::{evolve, EvolutionConfig, EvolutionMode, SolverConfig};
use qrecompile::recompiler::{
    eliminate_gates, lure_recompile, recompile as run_recompile, EliminationConfig, LureConfig, RecompileJob,
    RecompileResult,
};
use qrecompile::{Circuit64, ParamVector64, PauliSum64, StateVector64};

use crate::error::CliError;
use crate::output::{float, param_names, recompile_csv, write_file, Csv};
use crate::{inputs, EliminateArgs, EvolutionArgs, ExactArgs, JobArgs, Mode, OrderingArg, RecompileArgs};
use crate::{Derivative, SimulateArgs, Status, TrotterArgs};

fn evolution_config(mode: EvolutionMode, step: f64, args: &EvolutionArgs) -> Result<EvolutionConfig<f64>, CliError> {
    let base = match mode {
        EvolutionMode::RealTime => EvolutionConfig::real_time(),
        EvolutionMode::Imaginary => EvolutionConfig::imaginary(),
    };
    let cfg = EvolutionConfig {
        step,
        global_phase: !args.no_global_phase,
        derivative: match args.derivative {
            Derivative::Analytic => DerivativeMethod::Analytic,
            Derivative::Fd4 => DerivativeMethod::Fd4,
        },
        ..base
    };
    cfg.validate().map_err(|e| CliError::input(e.to_string()))?;
    Ok(cfg)
}

fn check_register(what: &str, n: usize, input: &StateVector64) -> Result<(), CliError> {
    if n != input.n_qubits() {
        return Err(CliError::input(format!(
            "{what} acts on {n} qubits but the input state has {}",
            input.n_qubits()
        )));
    }
    Ok(())
}

fn check_hamiltonian(h: &PauliSum64, input: &StateVector64) -> Result<(), CliError> {
    if h.min_qubits() > input.n_qubits() {
        return Err(CliError::input(format!(
            "Hamiltonian needs {} qubits but the input state has {}",
            h.min_qubits(),
            input.n_qubits()
        )));
    }
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<Status, CliError> {
    let input = inputs::state(&a.input)?;
    let h = inputs::hamiltonian(&a.hamiltonian, input.n_qubits())?;
    check_hamiltonian(&h, &input)?;
    let circuit = inputs::circuit(&a.circuit)?;
    check_register("circuit", circuit.n_qubits(), &input)?;
    let p0 = match &a.params {
        Some(p) => inputs::params(p, circuit.n_params())?,
        None => ParamVector64::filled(circuit.n_params(), qrecompile::recompiler::INITIAL_PARAM),
    };
    let (mode, default_dt, default_solver) = match a.mode {
        Mode::Real => (EvolutionMode::RealTime, 2.5e-3, SolverConfig::tikhonov()),
        Mode::Imag => (EvolutionMode::Imaginary, 1e-2, SolverConfig::tsvd()),
    };
    let dt = a.dt.unwrap_or(default_dt);
    let mut cfg = evolution_config(mode, dt, &a.evolution)?;
    cfg.max_iterations = a.steps;
    if mode == EvolutionMode::Imaginary {
        cfg.window = a.window;
        cfg.tolerance = a.tolerance;
    }
    let solver = inputs::solver(a.evolution.solver.as_deref(), default_solver)?;
    let sys = SpinSystem::new(h, input)?;
    let propagator = if mode == EvolutionMode::RealTime && sys.n_qubits() <= DENSE_LIMIT {
        Some(sys.propagator()?)
    } else {
        None
    };
    let mut observer = |it: usize, _: &[f64], s: &StateVector64| -> qrecompile::Result<Vec<f64>> {
        match &propagator {
            Some(p) => Ok(vec![s.fidelity(&p.evolve(&sys.input, dt * it as f64)?)?]),
            None => Ok(Vec::new()),
        }
    };
    let free: Vec<usize> = (0..circuit.n_params()).collect();
    let trace = if a.steps == 0 {
        None
    } else {
        Some(evolve(&circuit, &p0, &free, &sys.input, &sys.h, &cfg, &solver, &mut observer)?)
    };
    let mut header = vec!["iteration".to_string(), "t".into(), "energy".into()];
    if propagator.is_some() {
        header.push("fidelity".into());
    }
    header.extend(param_names(circuit.n_params()));
    let mut csv = Csv::new(header);
    let mut notes = Vec::new();
    let mut final_params = p0.to_vec();
    if let Some(trace) = &trace {
        for r in &trace.rows {
            let mut fields = vec![r.iteration.to_string(), float(dt * r.iteration as f64), float(r.energy)];
            fields.extend(r.observed.iter().map(|v| float(*v)));
            fields.extend(r.params.iter().map(|v| float(*v)));
            csv.push_row(fields);
        }
        final_params = trace.last().params.clone();
        if mode == EvolutionMode::Imaginary && !trace.converged {
            notes.push(format!("energy not converged after {} iterations", a.steps));
        }
        if trace.degenerate_steps > 0 {
            notes.push(format!("{} steps had a fully truncated linear system", trace.degenerate_steps));
        }
    }
    csv.write(&a.trace)?;
    if let Some(path) = &a.params_out {
        write_file(path, &ParamVector64::new(final_params).serialize())?;
    }
    Ok(status(notes))
}

fn status(notes: Vec<String>) -> Status {
    if notes.is_empty() {
        Status::Ok
    } else {
        Status::Diagnostics(notes)
    }
}

fn build_job(a: &JobArgs, template: Circuit64) -> Result<RecompileJob<f64>, CliError> {
    let input = inputs::state(&a.input)?;
    let source = inputs::circuit(&a.source)?;
    check_register("source circuit", source.n_qubits(), &input)?;
    check_register("template", template.n_qubits(), &input)?;
    let source_params = match a.random_source_params {
        Some(seed) => inputs::random_params(seed, source.n_params()),
        None => inputs::params(&a.source_params, source.n_params())?,
    };
    let h_rec = match &a.hrec {
        Some(name) => inputs::hamiltonian(name, input.n_qubits())?,
        None => PauliSum64::product_state_hamiltonian(&a.input)?,
    };
    check_hamiltonian(&h_rec, &input)?;
    let mut cfg = evolution_config(EvolutionMode::Imaginary, a.dtau, &a.evolution)?;
    cfg.max_iterations = a.max_iterations;
    cfg.window = a.window;
    cfg.tolerance = a.tolerance;
    let solver = inputs::solver(a.evolution.solver.as_deref(), SolverConfig::tsvd())?;
    Ok(RecompileJob::new(&source, &source_params, input, template, h_rec)?
        .with_evolution(cfg)
        .with_solver(solver))
}

fn parse_lure(spec: &str) -> Result<(usize, f64), CliError> {
    let bad = || CliError::input(format!("--lure {spec:?}: expected N:THRESHOLD"));
    let (n, t) = spec.split_once(':').ok_or_else(bad)?;
    Ok((n.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?))
}

fn report(result: &RecompileResult<f64>, e0: f64) {
    let last = result.last();
    println!("iterations = {}", last.iteration);
    println!("energy = {}", float(last.energy));
    println!("defect = {}", float(last.energy - e0));
    println!("bound = {}", float(last.bound));
    println!("fidelity = {}", float(last.fidelity));
}

pub fn recompile(a: RecompileArgs) -> Result<Status, CliError> {
    let template = inputs::circuit(&a.template)?;
    let job = build_job(&a.job, template)?;
    let result = match &a.lure {
        Some(spec) => {
            let (n, threshold) = parse_lure(spec)?;
            let mut lure = LureConfig::new(n, threshold);
            lure.stage_iterations = a.stage_iterations;
            lure.validate().map_err(|e| CliError::input(e.to_string()))?;
            lure_recompile(&job, &lure)?
        }
        None => run_recompile(&job)?,
    };
    recompile_csv(&result.rows, false).write(&a.trace)?;
    write_file(&a.params_out, &result.phi.serialize())?;
    report(&result, job.e0);
    let mut notes = Vec::new();
    if !result.converged {
        notes.push(format!(
            "energy not converged after {} iterations",
            result.last().iteration
        ));
    }
    if !result.stalled_stages.is_empty() {
        notes.push(format!("lure stages {:?} did not reach the threshold", result.stalled_stages));
    }
    Ok(status(notes))
}

pub fn eliminate(a: EliminateArgs) -> Result<Status, CliError> {
    let template = inputs::circuit(&a.recompiled)?;
    let phi = inputs::params(&a.params, template.n_params())?;
    let job = build_job(&a.job, template.clone())?;
    let result = RecompileResult {
        template,
        phi,
        rows: Vec::new(),
        converged: true,
        stalled_stages: Vec::new(),
    };
    let cfg = EliminationConfig {
        defect_factor: a.defect_factor,
        max_step: a.max_dphi,
        baseline_defect: a.baseline_defect,
        relax_iterations: a.relax,
        ..EliminationConfig::default()
    };
    cfg.validate().map_err(|e| CliError::input(e.to_string()))?;
    let out = eliminate_gates(&result, &job, &cfg)?;
    recompile_csv(&out.rows, true).write(&a.trace)?;
    write_file(&a.circuit_out, &out.template.serialize())?;
    if let Some(path) = &a.params_out {
        write_file(path, &out.phi.serialize())?;
    }
    let counts = out.template.count_gates();
    println!("removed = {}", out.removed.len());
    println!("gates = {} ({} one-qubit, {} two-qubit)", counts.total(), counts.one_qubit, counts.two_qubit);
    println!("defect = {} -> {}", float(out.initial_defect), float(out.final_defect));
    println!("fidelity = {}", float(out.rows.last().map_or(f64::NAN, |r| r.fidelity)));
    Ok(status(out.diagnostic.into_iter().collect()))
}

pub fn trotter(a: TrotterArgs) -> Result<Status, CliError> {
    let input = inputs::state(&a.input)?;
    let h = inputs::hamiltonian(&a.hamiltonian, input.n_qubits())?;
    check_hamiltonian(&h, &input)?;
    let sys = SpinSystem::new(h, input)?;
    let spec = TrotterSpec {
        cycles: a.cycles,
        time: a.time,
        ordering: match a.ordering {
            OrderingArg::Fixed => Ordering::Fixed,
            OrderingArg::Alternating => Ordering::Alternating,
        },
    };
    let (circuit, params) = build_trotter_circuit(&sys, &spec).map_err(|e| CliError::input(e.to_string()))?;
    if let Some(path) = &a.out {
        write_file(path, &circuit.serialize())?;
    }
    if let Some(path) = &a.params_out {
        write_file(path, &params.serialize())?;
    }
    let propagator = sys.propagator()?;
    let f = fidelity_vs_exact(&circuit, &params, &sys, &propagator, a.time)?;
    println!("fidelity = {}", float(f));
    Ok(Status::Ok)
}

pub fn exact(a: ExactArgs) -> Result<Status, CliError> {
    let input = inputs::state(&a.input)?;
    let h = inputs::hamiltonian(&a.hamiltonian, input.n_qubits())?;
    check_hamiltonian(&h, &input)?;
    let circuit = inputs::circuit(&a.fidelity_against)?;
    check_register("circuit", circuit.n_qubits(), &input)?;
    let params = match &a.params {
        Some(p) => inputs::params(p, circuit.n_params())?,
        None if circuit.n_params() == 0 => ParamVector64::default(),
        None => {
            return Err(CliError::input(format!(
                "circuit has {} parameters; pass --params",
                circuit.n_params()
            )))
        }
    };
    let propagator = ExactPropagator::new(&h, input.n_qubits())?;
    let target = propagator.evolve(&input, a.time)?;
    let f = circuit.apply(&params, &input)?.fidelity(&target)?;
    println!("fidelity = {}", float(f));
    Ok(Status::Ok)
}
