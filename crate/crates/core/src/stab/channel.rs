use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::stab::Tableau;

/// Mixture of Pauli errors; identity carries the remaining probability mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    arity: usize,
    outcomes: Vec<(f64, PauliString)>,
}

impl PauliChannel {
    pub fn new(arity: usize, outcomes: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut total = 0.0;
        for (p, s) in &outcomes {
            if !(p.is_finite() && *p >= 0.0 && *p <= 1.0) {
                return Err(Error::InvalidChannel(format!("probability {p} outside [0,1]")));
            }
            if s.width() != arity {
                return Err(Error::InvalidChannel(format!(
                    "outcome {s} has width {} but arity is {arity}",
                    s.width()
                )));
            }
            total += p;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidChannel(format!("probabilities sum to {total}")));
        }
        let outcomes = outcomes.into_iter().filter(|(p, _)| *p > 0.0).collect();
        Ok(Self { arity, outcomes })
    }

    pub fn identity(arity: usize) -> Self {
        Self {
            arity,
            outcomes: Vec::new(),
        }
    }

    /// X, Y, Z each with probability p/3.
    pub fn depolarizing1(p: f64) -> Result<Self> {
        Self::new(
            1,
            [Pauli::X, Pauli::Y, Pauli::Z]
                .into_iter()
                .map(|l| (p / 3.0, PauliString::new(vec![l], false)))
                .collect(),
        )
    }

    /// Each of the 15 non-identity two-qubit Paulis with probability p/15.
    pub fn depolarizing2(p: f64) -> Result<Self> {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut out = Vec::new();
        for a in letters {
            for b in letters {
                if a == Pauli::I && b == Pauli::I {
                    continue;
                }
                out.push((p / 15.0, PauliString::new(vec![a, b], false)));
            }
        }
        Self::new(2, out)
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::new(1, vec![(p, PauliString::new(vec![Pauli::X], false))])
    }

    /// Single-qubit channel with independent X, Y, Z probabilities.
    pub fn pauli1(px: f64, py: f64, pz: f64) -> Result<Self> {
        Self::new(
            1,
            vec![
                (px, PauliString::new(vec![Pauli::X], false)),
                (py, PauliString::new(vec![Pauli::Y], false)),
                (pz, PauliString::new(vec![Pauli::Z], false)),
            ],
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outcomes(&self) -> &[(f64, PauliString)] {
        &self.outcomes
    }

    /// Total non-identity probability.
    pub fn error_probability(&self) -> f64 {
        self.outcomes.iter().map(|(p, _)| p).sum()
    }

    /// Probability of the given single-qubit letter (arity-1 channels).
    pub fn letter_probability(&self, l: Pauli) -> f64 {
        self.outcomes
            .iter()
            .filter(|(_, s)| s.letters() == [l])
            .map(|(p, _)| p)
            .sum()
    }

    /// Draws one outcome; `None` is the identity.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&PauliString> {
        let u: f64 = rng.gen();
        self.pick(u)
    }

    /// Outcome for a uniform draw `u` in [0,1).
    pub fn pick(&self, u: f64) -> Option<&PauliString> {
        let mut acc = 0.0;
        for (p, s) in &self.outcomes {
            acc += p;
            if u < acc {
                return Some(s);
            }
        }
        None
    }

    /// Samples and applies one outcome on `qubits`.
    pub fn apply<R: Rng + ?Sized>(&self, t: &mut Tableau, qubits: &[usize], rng: &mut R) -> Result<()> {
        if qubits.len() != self.arity {
            return Err(Error::InvalidChannel(format!(
                "arity {} applied to {} qubits",
                self.arity,
                qubits.len()
            )));
        }
        if let Some(s) = self.sample(rng) {
            t.apply_pauli_on(qubits, s)?;
        }
        Ok(())
    }
}

/// Relaxation parameters for the twirled idle channel, in units of clock cycles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationParams {
    pub t1: f64,
    pub t2: f64,
}

impl Default for RelaxationParams {
    /// Placeholder coherence times (not measured values): T1 = 1e4, T2 = 8e3 cycles.
    fn default() -> Self {
        Self { t1: 1.0e4, t2: 8.0e3 }
    }
}

/// Pauli-twirled amplitude and phase damping over `duration` cycles.
///
/// p_x = p_y = (1 − e^{−t/T1})/4, p_z = (1 − e^{−t/T2})/2 − p_x.
pub fn twirled_relaxation_channel(duration: f64, params: RelaxationParams) -> Result<PauliChannel> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!("idle duration {duration}")));
    }
    if params.t1 <= 0.0 || params.t2 <= 0.0 || params.t2 > 2.0 * params.t1 {
        return Err(Error::InvalidParameter("need T1 > 0 and 0 < T2 <= 2 T1".into()));
    }
    let pxy = (1.0 - (-duration / params.t1).exp()) / 4.0;
    let pz = ((1.0 - (-duration / params.t2).exp()) / 2.0 - pxy).max(0.0);
    PauliChannel::pauli1(pxy, pxy, pz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rejects_bad_probabilities() {
        assert!(PauliChannel::depolarizing1(1.5).is_err());
        assert!(PauliChannel::bit_flip(-0.1).is_err());
        assert!(PauliChannel::new(2, vec![(0.1, "X".parse().unwrap())]).is_err());
    }

    #[test]
    fn zero_depolarizing_is_identity() {
        let ch = PauliChannel::depolarizing1(0.0).unwrap();
        let mut rng = seeded(1);
        let mut t = Tableau::new(1);
        t.h(0);
        let before = t.clone();
        for _ in 0..100 {
            ch.apply(&mut t, &[0], &mut rng).unwrap();
        }
        assert_eq!(t, before);
    }

    #[test]
    fn full_depolarizing_mixes() {
        let ch = PauliChannel::depolarizing1(0.75).unwrap();
        let mut rng = seeded(2);
        let shots = 100_000;
        let z: PauliString = "Z".parse().unwrap();
        let mut sum = 0i64;
        for _ in 0..shots {
            let mut t = Tableau::new(1);
            ch.apply(&mut t, &[0], &mut rng).unwrap();
            sum += t.expectation(&z).unwrap() as i64;
        }
        assert!((sum as f64 / shots as f64).abs() < 0.02);
    }

    #[test]
    fn bit_flip_rate() {
        let p = 0.1;
        let ch = PauliChannel::bit_flip(p).unwrap();
        let mut rng = seeded(5);
        let shots = 20_000;
        let mut flips = 0;
        for _ in 0..shots {
            let mut t = Tableau::new(1);
            ch.apply(&mut t, &[0], &mut rng).unwrap();
            flips += t.measure_z(0, &mut rng).unwrap() as usize;
        }
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((flips as f64 / shots as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn twirl_properties() {
        let prm = RelaxationParams::default();
        let zero = twirled_relaxation_channel(0.0, prm).unwrap();
        assert_eq!(zero.error_probability(), 0.0);
        let ch = twirled_relaxation_channel(100.0, prm).unwrap();
        assert!(ch.letter_probability(Pauli::Z) >= ch.letter_probability(Pauli::X));
        let mut last = 0.0;
        for d in [1.0, 10.0, 100.0, 1000.0, 1e4] {
            let e = twirled_relaxation_channel(d, prm).unwrap().error_probability();
            assert!(e > last);
            last = e;
        }
        assert!(twirled_relaxation_channel(-1.0, prm).is_err());
    }
}
