use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;

use pqec_core::circuit::{Circuit, Gate, Pauli, PauliString};
use pqec_core::estimator::{estimate, StrategyConfig};
use pqec_core::injection::{analytics, simulate_rus, ShufflePolicy};
use pqec_core::layout::{k_for, schedule, LayoutKind, LayoutSpec, ScheduleMode};
use pqec_core::noise::{CodeParams, NisqNoiseModel};
use pqec_core::oracle::StateVector;
use pqec_core::stab::Tableau;

fn gate(n: usize, rz: bool) -> impl Strategy<Value = Gate> {
    let angle = 0.05..3.0f64;
    (0..9u8, 0..n, 1..n.max(2), 0..4u8, angle).prop_map(move |(kind, q, shift, quarter, theta)| match kind {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::Sdg(q),
        3 => Gate::X(q),
        4 => Gate::Y(q),
        5 => Gate::Z(q),
        6 if rz => Gate::Rz(q, theta),
        6 => Gate::Rz(q, quarter as f64 * FRAC_PI_2),
        _ if n > 1 => Gate::CX(q, (q + shift) % n),
        _ => Gate::H(q),
    })
}

fn circuit(max_n: usize, max_len: usize, rz: bool) -> impl Strategy<Value = Circuit> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(gate(n, rz), 0..=max_len).prop_map(move |g| Circuit::from_gates(n, g).unwrap())
    })
}

fn paulis(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .map(|mut i| {
            let letters = (0..n)
                .map(|_| {
                    let l = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i % 4];
                    i /= 4;
                    l
                })
                .collect();
            PauliString::new(letters, false)
        })
        .collect()
}

fn code() -> CodeParams {
    CodeParams::default_eft()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tableau_matches_statevector(c in circuit(4, 30, false)) {
        let mut t = Tableau::new(c.width());
        for g in c.gates() {
            t.apply_gate(g).unwrap();
        }
        prop_assert!(t.validate());
        let sv = StateVector::run(&c).unwrap();
        for p in paulis(c.width()) {
            let a = t.expectation(&p).unwrap() as f64;
            prop_assert!((a - sv.expectation(&p)).abs() < 1e-9, "{}", p);
        }
    }

    #[test]
    fn schedules_are_exclusive_and_conserve_volume(c in circuit(12, 60, true), seed in any::<u64>()) {
        let layout = LayoutSpec::proposed(k_for(c.width()), code()).unwrap();
        for mode in [ScheduleMode::Deterministic, ScheduleMode::Stochastic { seed }] {
            let s = schedule(&c, &layout, mode).unwrap();
            s.verify_exclusive().unwrap();
            prop_assert_eq!(s.v_circ, s.v_ops + s.v_idle + s.v_ancilla);
            prop_assert_eq!(s.v_circ, (s.total_patches as u64 * s.t_circ * s.patch_qubits as u64) as f64);
            prop_assert_eq!(s.replay(&c).unwrap().len(), c.len());
        }
    }

    #[test]
    fn dropping_trailing_gates_never_lengthens(c in circuit(10, 50, true), cut in 0usize..50) {
        let layout = LayoutSpec::proposed(k_for(c.width()), code()).unwrap();
        let keep = cut.min(c.len());
        let prefix = Circuit::from_gates(c.width(), c.gates()[..keep].to_vec()).unwrap();
        let full = schedule(&c, &layout, ScheduleMode::Deterministic).unwrap();
        let part = schedule(&prefix, &layout, ScheduleMode::Deterministic).unwrap();
        prop_assert!(part.t_circ <= full.t_circ);
    }

    #[test]
    fn larger_layouts_hold_the_same_circuit(c in circuit(8, 30, true), extra in 1usize..4) {
        let k = k_for(c.width());
        for name in ["compact", "intermediate", "fast", "grid"] {
            let l = LayoutSpec::new(LayoutKind::for_program(name, c.width()).unwrap(), code()).unwrap();
            schedule(&c, &l, ScheduleMode::Deterministic).unwrap().verify_exclusive().unwrap();
        }
        let l = LayoutSpec::proposed(k + extra, code()).unwrap();
        prop_assert!(schedule(&c, &l, ScheduleMode::Deterministic).is_ok());
    }

    #[test]
    fn breakdown_is_log_fidelity(c in circuit(12, 60, true), p in 1e-5..5e-3f64) {
        let nisq = estimate(&c, &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(p).unwrap() }).unwrap();
        let pq = estimate(&c, &StrategyConfig::pqec_for(c.width(), CodeParams::new(11, p).unwrap()).unwrap()).unwrap();
        for r in [&nisq, &pq] {
            prop_assert!(r.fidelity > 0.0 && r.fidelity <= 1.0);
            prop_assert!(((-r.fidelity.ln()) - r.breakdown.total()).abs() < 1e-9);
            let b = &r.breakdown;
            prop_assert!(b.gate >= 0.0 && b.rz >= 0.0 && b.measurement >= 0.0 && b.memory >= 0.0);
        }
        let worse = estimate(&c, &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(p * 1.5).unwrap() }).unwrap();
        prop_assert!(worse.fidelity <= nisq.fidelity);
    }

    #[test]
    fn circuit_json_roundtrip(c in circuit(6, 40, true)) {
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn analytics_stay_consistent(p in 0.0..2e-3f64, d in (1usize..12).prop_map(|h| 2 * h + 1)) {
        if let Ok(a) = analytics(p, d) {
            prop_assert!(a.p_pass > 0.0 && a.p_pass <= 1.0);
            prop_assert!(a.n_trials >= a.expected_trials);
            prop_assert!((0.0..=1.0).contains(&a.p_within));
            prop_assert!((a.alpha + a.beta - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rus_runs_repeat_per_seed(seed in any::<u64>(), b in 1usize..6) {
        let code = code();
        let policy = ShufflePolicy::Naive { b };
        let x = simulate_rus(0.3, policy, &code, 2_000, seed).unwrap();
        let y = simulate_rus(0.3, policy, &code, 2_000, seed).unwrap();
        prop_assert_eq!(&x, &y);
        prop_assert!(x.mean_attempts >= 1.0);
        prop_assert!((0.0..=1.0).contains(&x.stall_free_fraction));
    }
}
