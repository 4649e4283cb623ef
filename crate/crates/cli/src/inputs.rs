//! Loading files and bundled data named on the command line.

use std::fs;
use std::path::Path;

use qrecompile::data;
use qrecompile::mclachlan::SolverConfig;
use qrecompile::{Circuit64, ParamVector64, PauliSum64, StateVector64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

fn bundled(name: &str) -> Option<&str> {
    name.strip_prefix("bundled:")
}

fn read(name: &str) -> Result<String, CliError> {
    fs::read_to_string(name).map_err(|e| CliError::io(Path::new(name), e))
}

fn unknown(kind: &str, name: &str) -> CliError {
    CliError::input(format!("no bundled {kind} named {name:?}"))
}

pub fn hamiltonian(name: &str, n_qubits: usize) -> Result<PauliSum64, CliError> {
    match bundled(name) {
        Some("network") => Ok(data::spin_network()),
        Some("hrec") => Ok(data::h_rec()),
        Some("projector") => Ok(PauliSum64::zero_projector_complement(n_qubits)),
        Some(other) => Err(unknown("Hamiltonian", other)),
        None => PauliSum64::parse(&read(name)?).map_err(|e| CliError::file(Path::new(name), e)),
    }
}

pub fn circuit(name: &str) -> Result<Circuit64, CliError> {
    match bundled(name) {
        Some("circuit-a") => Ok(data::circuit_a()),
        Some("template-b") => Ok(data::template_b()),
        Some("ring5") => Ok(data::ring5()),
        Some(other) => Err(unknown("circuit", other)),
        None => Circuit64::parse(&read(name)?).map_err(|e| CliError::file(Path::new(name), e)),
    }
}

pub fn params(name: &str, expected: usize) -> Result<ParamVector64, CliError> {
    let p = match bundled(name) {
        Some("circuit-a") => data::circuit_a_params(),
        Some(other) => return Err(unknown("parameter table", other)),
        None => ParamVector64::parse(&read(name)?).map_err(|e| CliError::file(Path::new(name), e))?,
    };
    if p.len() != expected {
        return Err(CliError::input(format!(
            "{name}: expected {expected} parameters, found {}",
            p.len()
        )));
    }
    Ok(p)
}

/// Angles drawn uniformly from `[-π, π)`.
pub fn random_params(seed: u64, n: usize) -> ParamVector64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    ParamVector64::new((0..n).map(|_| rng.gen_range(-pi..pi)).collect())
}

pub fn state(spec: &str) -> Result<StateVector64, CliError> {
    StateVector64::from_basis_spec(spec).map_err(|e| CliError::input(format!("--in {spec:?}: {e}")))
}

pub fn solver(spec: Option<&str>, default: SolverConfig<f64>) -> Result<SolverConfig<f64>, CliError> {
    let Some(spec) = spec else { return Ok(default) };
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::input(format!("--solver {spec:?}: bad number {s:?}")))
    };
    let solver = match (name, arg) {
        ("tsvd", None) => SolverConfig::tsvd(),
        ("tsvd", Some(a)) => SolverConfig::Tsvd { rel_tol: number(a)? },
        ("tikhonov", None) => SolverConfig::tikhonov(),
        ("tikhonov", Some(a)) => SolverConfig::Tikhonov {
            candidates: a.split(',').map(number).collect::<Result<_, _>>()?,
        },
        ("lstsq", None) => SolverConfig::LeastSquares,
        _ => return Err(CliError::input(format!("unknown solver {spec:?}"))),
    };
    solver
        .validate()
        .map_err(|e| CliError::input(format!("--solver {spec:?}: {e}")))?;
    Ok(solver)
}
