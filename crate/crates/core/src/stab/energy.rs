use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{quarter_turns, Circuit, Gate, Hamiltonian, Pauli};
use crate::error::{Error, Result};
use crate::rng;
use crate::stab::{PauliChannel, Tableau};

/// Memory error attached to a qubit right after gate `after_gate` (index into the circuit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdleSlot {
    pub after_gate: usize,
    pub qubit: usize,
    pub channel: PauliChannel,
}

/// Per-gate-class error channels plus scheduler-supplied idle slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseMap {
    pub one_qubit: PauliChannel,
    pub two_qubit: PauliChannel,
    pub rz: PauliChannel,
    /// Readout flip probability per measured qubit.
    pub measure: f64,
    pub idle: Vec<IdleSlot>,
}

impl NoiseMap {
    pub fn noiseless() -> Self {
        Self {
            one_qubit: PauliChannel::identity(1),
            two_qubit: PauliChannel::identity(2),
            rz: PauliChannel::identity(1),
            measure: 0.0,
            idle: Vec::new(),
        }
    }

    /// Depolarizing gates at the given rates; readout flips at `p_meas`.
    pub fn depolarizing(p_1q: f64, p_2q: f64, p_rz: f64, p_meas: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_meas) {
            return Err(Error::InvalidChannel(format!("readout flip {p_meas}")));
        }
        Ok(Self {
            one_qubit: PauliChannel::depolarizing1(p_1q)?,
            two_qubit: PauliChannel::depolarizing2(p_2q)?,
            rz: PauliChannel::depolarizing1(p_rz)?,
            measure: p_meas,
            idle: Vec::new(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub shots: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub shots: usize,
}

/// Noiseless energy of the stabilizer state prepared by a Clifford circuit.
pub fn ideal_energy(circuit: &Circuit, h: &Hamiltonian) -> Result<f64> {
    let (_, e) = ideal_expectations(circuit, h)?;
    Ok(h.terms().iter().zip(&e).map(|(t, &v)| t.coeff * v as f64).sum())
}

fn ideal_expectations(circuit: &Circuit, h: &Hamiltonian) -> Result<(Tableau, Vec<i8>)> {
    if circuit.width() != h.width() {
        return Err(Error::WidthMismatch {
            expected: h.width(),
            got: circuit.width(),
        });
    }
    let mut t = Tableau::new(circuit.width());
    for g in circuit.gates() {
        if let Gate::MeasureZ(_) = g {
            return Err(Error::UnsupportedGate(
                "energy is evaluated on the unmeasured state".into(),
            ));
        }
        t.apply_gate(g)?;
    }
    let e = h
        .terms()
        .iter()
        .map(|term| t.expectation(&term.pauli))
        .collect::<Result<Vec<_>>>()?;
    Ok((t, e))
}

// Bernoulli(p) over 64 lanes.
fn lane_mask<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 0.05 {
        let mut m = 0u64;
        for b in 0..64 {
            if rng.gen::<f64>() < p {
                m |= 1 << b;
            }
        }
        return m;
    }
    let ln_q = (1.0 - p).ln();
    let mut m = 0u64;
    let mut pos: i64 = -1;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        pos += 1 + (u.ln() / ln_q).floor() as i64;
        if pos >= 64 {
            return m;
        }
        m |= 1 << pos;
    }
}

struct Frame {
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Frame {
    fn inject<R: Rng + ?Sized>(&mut self, ch: &PauliChannel, qubits: &[usize], rng: &mut R) {
        let p = ch.error_probability();
        let mut mask = lane_mask(p, rng);
        while mask != 0 {
            let lane = mask.trailing_zeros();
            mask &= mask - 1;
            let u = rng.gen::<f64>() * p;
            if let Some(s) = ch.pick(u) {
                for (&q, &l) in qubits.iter().zip(s.letters()) {
                    let (bx, bz) = l.bits();
                    self.x[q] ^= (bx as u64) << lane;
                    self.z[q] ^= (bz as u64) << lane;
                }
            }
        }
    }
}

/// Per-shot energies. Pauli noise on a Clifford circuit only flips the signs of
/// the ideal term expectations, so each shot propagates an error frame through the
/// circuit (64 shots per machine word) and reads off the sign flips.
pub fn energy_samples(
    circuit: &Circuit,
    h: &Hamiltonian,
    noise: &NoiseMap,
    cfg: TrajectoryConfig,
) -> Result<Vec<f64>> {
    if cfg.shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let (_, ideal) = ideal_expectations(circuit, h)?;
    let n = circuit.width();
    for slot in &noise.idle {
        if slot.qubit >= n || slot.after_gate >= circuit.len() || slot.channel.arity() != 1 {
            return Err(Error::InvalidChannel(format!(
                "idle slot on qubit {} after gate {}",
                slot.qubit, slot.after_gate
            )));
        }
    }
    if noise.one_qubit.arity() != 1 || noise.rz.arity() != 1 || noise.two_qubit.arity() != 2 {
        return Err(Error::InvalidChannel("gate channel arity mismatch".into()));
    }
    let mut idle_by_gate: Vec<Vec<&IdleSlot>> = vec![Vec::new(); circuit.len()];
    for slot in &noise.idle {
        idle_by_gate[slot.after_gate].push(slot);
    }
    let support: Vec<Vec<(usize, bool, bool)>> = h
        .terms()
        .iter()
        .map(|t| {
            t.pauli
                .letters()
                .iter()
                .enumerate()
                .filter(|(_, &l)| l != Pauli::I)
                .map(|(q, &l)| {
                    let (x, z) = l.bits();
                    (q, x, z)
                })
                .collect()
        })
        .collect();

    let batches = cfg.shots.div_ceil(64);
    let mut out = Vec::with_capacity(cfg.shots);
    for b in 0..batches {
        let mut r = rng::stream(cfg.seed, b as u64);
        let mut f = Frame {
            x: vec![0; n],
            z: vec![0; n],
        };
        for (i, g) in circuit.gates().iter().enumerate() {
            match *g {
                Gate::H(q) => {
                    std::mem::swap(&mut f.x[q], &mut f.z[q]);
                    f.inject(&noise.one_qubit, &[q], &mut r);
                }
                Gate::S(q) | Gate::Sdg(q) => {
                    f.z[q] ^= f.x[q];
                    f.inject(&noise.one_qubit, &[q], &mut r);
                }
                Gate::X(q) | Gate::Y(q) | Gate::Z(q) => f.inject(&noise.one_qubit, &[q], &mut r),
                Gate::CX(c, t) => {
                    f.x[t] ^= f.x[c];
                    f.z[c] ^= f.z[t];
                    f.inject(&noise.two_qubit, &[c, t], &mut r);
                }
                Gate::Rz(q, theta) => {
                    match quarter_turns(theta) {
                        Some(1) | Some(3) => f.z[q] ^= f.x[q],
                        Some(_) => {}
                        None => unreachable!("checked by ideal_expectations"),
                    }
                    f.inject(&noise.rz, &[q], &mut r);
                }
                Gate::MeasureZ(_) => unreachable!("rejected by ideal_expectations"),
            }
            for slot in &idle_by_gate[i] {
                f.inject(&slot.channel, &[slot.qubit], &mut r);
            }
        }
        let readout: Vec<u64> = (0..n).map(|_| lane_mask(noise.measure, &mut r)).collect();
        let lanes = (cfg.shots - b * 64).min(64);
        let mut energies = vec![0.0; lanes];
        for ((term, sup), &e) in h.terms().iter().zip(&support).zip(&ideal) {
            if e == 0 {
                continue;
            }
            let mut flip = 0u64;
            for &(q, px, pz) in sup {
                if px {
                    flip ^= f.z[q];
                }
                if pz {
                    flip ^= f.x[q];
                }
                flip ^= readout[q];
            }
            let v = term.coeff * e as f64;
            for (lane, en) in energies.iter_mut().enumerate() {
                if flip >> lane & 1 == 1 {
                    *en -= v;
                } else {
                    *en += v;
                }
            }
        }
        out.extend(energies);
    }
    Ok(out)
}

/// Monte Carlo mean energy with standard error.
pub fn noisy_energy(
    circuit: &Circuit,
    h: &Hamiltonian,
    noise: &NoiseMap,
    cfg: TrajectoryConfig,
) -> Result<EnergyEstimate> {
    let s = energy_samples(circuit, h, noise, cfg)?;
    Ok(summarize(&s))
}

pub fn summarize(s: &[f64]) -> EnergyEstimate {
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = if s.len() > 1 {
        s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    EnergyEstimate {
        mean,
        std_err: (var / n).sqrt(),
        shots: s.len(),
    }
}

/// CSV rows `seed,shot,energy` with a header line.
pub fn trajectories_csv(seed: u64, samples: &[f64]) -> String {
    let mut s = String::from("seed,shot,energy\n");
    for (i, e) in samples.iter().enumerate() {
        s.push_str(&format!("{seed},{i},{e}\n"));
    }
    s
}

/// Reference path: one full tableau per shot with channels sampled gate by gate.
/// Slow; used to cross-check [`energy_samples`].
pub fn energy_samples_tableau(
    circuit: &Circuit,
    h: &Hamiltonian,
    noise: &NoiseMap,
    cfg: TrajectoryConfig,
) -> Result<Vec<f64>> {
    let mut r = rng::seeded(cfg.seed);
    let mut out = Vec::with_capacity(cfg.shots);
    for _ in 0..cfg.shots {
        let mut t = Tableau::new(circuit.width());
        for (i, g) in circuit.gates().iter().enumerate() {
            t.apply_gate(g)?;
            match *g {
                Gate::CX(c, tq) => noise.two_qubit.apply(&mut t, &[c, tq], &mut r)?,
                Gate::Rz(q, _) => noise.rz.apply(&mut t, &[q], &mut r)?,
                _ => noise.one_qubit.apply(&mut t, &g.qubits(), &mut r)?,
            }
            for slot in noise.idle.iter().filter(|s| s.after_gate == i) {
                slot.channel.apply(&mut t, &[slot.qubit], &mut r)?;
            }
        }
        let mut e = 0.0;
        for term in h.terms() {
            let v = t.expectation(&term.pauli)? as f64;
            if v == 0.0 {
                continue;
            }
            let mut sign = 1.0;
            for _ in 0..term.pauli.weight() {
                if r.gen::<f64>() < noise.measure {
                    sign = -sign;
                }
            }
            e += term.coeff * v * sign;
        }
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
    use std::f64::consts::PI;

    #[test]
    fn ising_all_ones() {
        let h = Hamiltonian::ising(2, 1.0).unwrap();
        let c = Circuit::from_gates(2, vec![Gate::X(0), Gate::X(1)]).unwrap();
        let cfg = TrajectoryConfig { shots: 100, seed: 1 };
        let e = noisy_energy(&c, &h, &NoiseMap::noiseless(), cfg).unwrap();
        assert_eq!(e.mean, -2.0);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn noise_shrinks_energy() {
        let h = Hamiltonian::ising(4, 1.0).unwrap();
        let spec = AnsatzSpec::new(AnsatzKind::Linear, 4, 1)
            .unwrap()
            .with_params(vec![PI, PI, 0.0, PI, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let c = build_ansatz(&spec).unwrap();
        let mut last = f64::INFINITY;
        for p in [0.0, 1e-3, 1e-2, 1e-1] {
            let noise = NoiseMap::depolarizing(p, p, p, p).unwrap();
            let e = noisy_energy(&c, &h, &noise, TrajectoryConfig { shots: 10_000, seed: 4 }).unwrap();
            assert!(e.mean.abs() < last, "p={p}");
            last = e.mean.abs();
        }
    }

    #[test]
    fn frame_matches_tableau_statistics() {
        let h = Hamiltonian::heisenberg(3, 1.0).unwrap();
        let c = Circuit::from_gates(
            3,
            vec![Gate::H(0), Gate::CX(0, 1), Gate::S(1), Gate::CX(1, 2), Gate::H(2), Gate::Rz(0, PI)],
        )
        .unwrap();
        let mut noise = NoiseMap::depolarizing(0.02, 0.05, 0.03, 0.04).unwrap();
        noise.idle.push(IdleSlot {
            after_gate: 2,
            qubit: 0,
            channel: PauliChannel::pauli1(0.0, 0.0, 0.1).unwrap(),
        });
        let cfg = TrajectoryConfig { shots: 20_000, seed: 8 };
        let a = summarize(&energy_samples(&c, &h, &noise, cfg).unwrap());
        let b = summarize(&energy_samples_tableau(&c, &h, &noise, cfg).unwrap());
        let tol = 4.0 * (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn reproducible() {
        let h = Hamiltonian::ising(3, 0.5).unwrap();
        let c = build_ansatz(&AnsatzSpec::new(AnsatzKind::Fche, 3, 1).unwrap()).unwrap();
        let noise = NoiseMap::depolarizing(0.01, 0.01, 0.01, 0.01).unwrap();
        let cfg = TrajectoryConfig { shots: 300, seed: 77 };
        assert_eq!(
            energy_samples(&c, &h, &noise, cfg).unwrap(),
            energy_samples(&c, &h, &noise, cfg).unwrap()
        );
        let csv = trajectories_csv(77, &energy_samples(&c, &h, &noise, cfg).unwrap());
        assert!(csv.starts_with("seed,shot,energy\n77,0,"));
    }

    #[test]
    fn rejects_non_clifford_angle() {
        let h = Hamiltonian::ising(2, 1.0).unwrap();
        let c = Circuit::from_gates(2, vec![Gate::Rz(0, 0.3)]).unwrap();
        let cfg = TrajectoryConfig { shots: 1, seed: 0 };
        assert!(noisy_energy(&c, &h, &NoiseMap::noiseless(), cfg).is_err());
    }
}
