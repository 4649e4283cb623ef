use approx::assert_abs_diff_eq;
use qrecompile::dynamics::*;
use qrecompile::exact::ExactPropagator;
use qrecompile::mclachlan::SolverConfig;
use qrecompile::{data, Circuit64, PauliString, PauliSum64, StateVector64};

fn network() -> SpinSystem<f64> {
    SpinSystem::network()
}

fn trotter_fidelity(sys: &SpinSystem<f64>, prop: &ExactPropagator<f64>, q: usize, t: f64, ordering: Ordering) -> f64 {
    let spec = TrotterSpec {
        cycles: q,
        time: t,
        ordering,
    };
    let (c, p) = build_trotter_circuit(sys, &spec).unwrap();
    fidelity_vs_exact(&c, &p, sys, prop, t).unwrap()
}

#[test]
fn bundled_coefficients_have_expected_signs() {
    let sys = network();
    assert_eq!(sys.h.len(), 31);
    for (c, p) in sys.h.terms() {
        if p.weight() == 1 {
            assert!(*c < 0.0, "{p}");
        } else {
            assert!(*c > 0.0, "{p}");
        }
    }
}

#[test]
fn exact_evolution_composes() {
    let sys = network();
    let prop = sys.propagator().unwrap();
    let a = prop.evolve(&prop.evolve(&sys.input, 0.3).unwrap(), 0.45).unwrap();
    let b = prop.evolve(&sys.input, 0.75).unwrap();
    assert_abs_diff_eq!(a.fidelity(&b).unwrap(), 1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(b.norm_sqr(), 1.0, epsilon = 1e-10);
}

#[test]
fn single_term_trotter_angle() {
    let h = PauliSum64::parse("0.8 Z0").unwrap();
    let sys = SpinSystem::new(h, StateVector64::zero(1)).unwrap();
    let spec = TrotterSpec {
        cycles: 1,
        time: 0.5,
        ordering: Ordering::Fixed,
    };
    let (c, p) = build_trotter_circuit(&sys, &spec).unwrap();
    assert_eq!(c.len(), 1);
    assert_abs_diff_eq!(p[0], 0.8, epsilon = 1e-15);
}

#[test]
fn first_network_angle() {
    let spec = TrotterSpec {
        cycles: 6,
        time: 1.75,
        ordering: Ordering::Fixed,
    };
    let (c, p) = build_trotter_circuit(&network(), &spec).unwrap();
    assert_eq!(c.gates()[0].generator(), &PauliString::single(0, qrecompile::Pauli::Z));
    assert_abs_diff_eq!(p[0], -0.2527776, epsilon = 1e-7);
    assert_eq!(c.n_params(), 186);
}

#[test]
fn trotter_layout_matches_bundled_circuit() {
    let spec = TrotterSpec {
        cycles: 6,
        time: 1.0,
        ordering: Ordering::Fixed,
    };
    let (c, _) = build_trotter_circuit(&network(), &spec).unwrap();
    assert_eq!(c.serialize(), data::circuit_a::<f64>().serialize());
    assert_eq!(cycle_layout(&network(), 6).unwrap().serialize(), c.serialize());
}

#[test]
fn alternating_reverses_odd_cycles() {
    let sys = network();
    let spec = TrotterSpec {
        cycles: 2,
        time: 1.0,
        ordering: Ordering::Alternating,
    };
    let (c, p) = build_trotter_circuit(&sys, &spec).unwrap();
    assert_eq!(c.gates()[30].generator(), c.gates()[31].generator());
    assert_eq!(c.gates()[0].generator(), c.gates()[61].generator());
    assert_eq!(p[0], p[61]);
}

#[test]
fn fixed_trotter_improves_with_cycles() {
    let sys = network();
    let prop = sys.propagator().unwrap();
    let mut prev = 0.0;
    for q in [1, 2, 4, 8, 16] {
        let f = trotter_fidelity(&sys, &prop, q, 0.5, Ordering::Fixed);
        assert!(f >= prev - 1e-6, "q={q}: {f} < {prev}");
        prev = f;
    }
    assert!(prev > 0.99);
}

#[test]
fn alternating_beats_fixed() {
    let sys = network();
    let prop = sys.propagator().unwrap();
    let fixed = trotter_fidelity(&sys, &prop, 6, 0.75, Ordering::Fixed);
    let alt = trotter_fidelity(&sys, &prop, 6, 0.75, Ordering::Alternating);
    assert!(alt >= fixed);
    assert!(alt > 0.998);
}

#[test]
fn time_zero_fidelity_is_one() {
    let sys = network();
    let prop = sys.propagator().unwrap();
    assert_abs_diff_eq!(trotter_fidelity(&sys, &prop, 6, 0.0, Ordering::Fixed), 1.0, epsilon = 1e-12);
}

#[test]
fn summed_trotter_angles() {
    let sys = network();
    let t = 0.9;
    let spec = TrotterSpec {
        cycles: 4,
        time: t,
        ordering: Ordering::Fixed,
    };
    let (_, p) = build_trotter_circuit(&sys, &spec).unwrap();
    let sums = sum_params_by_term(&p, 31, 4).unwrap();
    for ((c, _), s) in sys.h.terms().iter().zip(&sums) {
        assert_abs_diff_eq!(*s, 2.0 * c * t, epsilon = 1e-12);
    }
    assert_eq!(sum_params_by_term(&p[..31], 31, 1).unwrap(), p[..31].to_vec());
    assert!(sum_params_by_term(&p, 30, 4).is_err());
}

#[test]
fn appending_cycles() {
    let sys = network();
    let template = data::template_b::<f64>();
    let phi = vec![0.1; template.n_params()];
    let (same, p) = append_trotter_cycles(&template, &phi, &sys, 0).unwrap();
    assert_eq!(same.serialize(), template.serialize());
    assert_eq!(p.len(), phi.len());
    let (c, p) = append_trotter_cycles(&template, &phi, &sys, 3).unwrap();
    assert_eq!(c.n_params(), 149 + 93);
    assert_eq!(&p[..149], &phi[..]);
    assert!(p[149..].iter().all(|v| *v == 1e-8));
    let before = template.count_gates();
    let after = c.count_gates();
    assert_eq!(after.one_qubit - before.one_qubit, 21);
    assert_eq!(after.two_qubit - before.two_qubit, 72);
}

#[test]
fn li_with_zero_hamiltonian_freezes() {
    let c = Circuit64::parse("X 0 p0\nZZ 0 1 p1\n").unwrap();
    let sys = SpinSystem::new(PauliSum64::new(), StateVector64::zero(2)).unwrap();
    let trace = li_realtime(&c, &[0.2, -0.4], &sys, 5, 2.5e-3, &SolverConfig::tikhonov()).unwrap();
    assert_eq!(trace.rows.len(), 6);
    assert_eq!(trace.last().params, vec![0.2, -0.4]);
    let empty = li_realtime(&c, &[0.2, -0.4], &sys, 0, 2.5e-3, &SolverConfig::tikhonov()).unwrap();
    assert_eq!(empty.rows.len(), 1);
}

#[test]
fn li_tracks_at_least_as_well_as_trotter_early_on() {
    let sys = network();
    let prop = sys.propagator().unwrap();
    let layout = cycle_layout(&sys, 6).unwrap();
    let p0 = vec![1e-8; layout.n_params()];
    let dt = 2.5e-3;
    let trace = li_realtime(&layout, &p0, &sys, 100, dt, &SolverConfig::tikhonov()).unwrap();
    for row in trace.rows.iter().step_by(10) {
        let trotter = trotter_fidelity(&sys, &prop, 6, row.time, Ordering::Fixed);
        assert!(row.fidelity >= trotter - 5e-4, "t={}: {} vs {}", row.time, row.fidelity, trotter);
    }
}
