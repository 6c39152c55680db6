//! Dense statevector simulator for small registers. Used as an independent check of
//! the tableau and of exact energies.

use nalgebra::Complex;

use crate::circuit::{Circuit, Gate, Pauli, PauliString};
use crate::error::{Error, Result};

type C = Complex<f64>;

/// Amplitudes over 2^n basis states; qubit q is bit q of the index.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

impl StateVector {
    pub fn new(n: usize) -> Result<Self> {
        if n > 20 {
            return Err(Error::InvalidSize(format!("statevector limited to 20 qubits, got {n}")));
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    fn single(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        let z = C::new(0.0, 0.0);
        let o = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        let r = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        for q in g.qubits() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, width: self.n });
            }
        }
        match *g {
            Gate::H(q) => self.single(q, [[r, r], [r, -r]]),
            Gate::S(q) => self.single(q, [[o, z], [z, i]]),
            Gate::Sdg(q) => self.single(q, [[o, z], [z, -i]]),
            Gate::X(q) => self.single(q, [[z, o], [o, z]]),
            Gate::Y(q) => self.single(q, [[z, -i], [i, z]]),
            Gate::Z(q) => self.single(q, [[o, z], [z, -o]]),
            Gate::Rz(q, t) => {
                let a = C::from_polar(1.0, -t / 2.0);
                let b = C::from_polar(1.0, t / 2.0);
                self.single(q, [[a, z], [z, b]])
            }
            Gate::CX(c, t) => {
                let (cb, tb) = (1 << c, 1 << t);
                for k in 0..self.amps.len() {
                    if k & cb != 0 && k & tb == 0 {
                        self.amps.swap(k, k | tb);
                    }
                }
            }
            Gate::MeasureZ(_) => {
                return Err(Error::UnsupportedGate("statevector oracle is measurement-free".into()))
            }
        }
        Ok(())
    }

    pub fn run(circuit: &Circuit) -> Result<Self> {
        let mut s = Self::new(circuit.width())?;
        for g in circuit.gates() {
            s.apply(g)?;
        }
        Ok(s)
    }

    /// P|ψ⟩ for a signed Pauli string.
    pub fn apply_pauli(&self, p: &PauliString) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.amps.len()];
        let sign = if p.is_negative() { -1.0 } else { 1.0 };
        for (k, &a) in self.amps.iter().enumerate() {
            let mut idx = k;
            let mut ph = C::new(sign, 0.0);
            for (q, &l) in p.letters().iter().enumerate() {
                let set = k >> q & 1 == 1;
                match l {
                    Pauli::I => {}
                    Pauli::X => idx ^= 1 << q,
                    Pauli::Z => {
                        if set {
                            ph = -ph
                        }
                    }
                    Pauli::Y => {
                        idx ^= 1 << q;
                        ph *= if set { C::new(0.0, -1.0) } else { C::new(0.0, 1.0) };
                    }
                }
            }
            out[idx] += ph * a;
        }
        out
    }

    /// Real part of ⟨ψ|P|ψ⟩.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        let pv = self.apply_pauli(p);
        self.amps
            .iter()
            .zip(&pv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell() {
        let c = Circuit::from_gates(2, vec![Gate::H(0), Gate::CX(0, 1)]).unwrap();
        let s = StateVector::run(&c).unwrap();
        assert!((s.expectation(&"XX".parse().unwrap()) - 1.0).abs() < 1e-12);
        assert!((s.expectation(&"YY".parse().unwrap()) + 1.0).abs() < 1e-12);
        assert!(s.expectation(&"ZI".parse().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rz_rotates_plus() {
        let c = Circuit::from_gates(1, vec![Gate::H(0), Gate::Rz(0, std::f64::consts::FRAC_PI_2)]).unwrap();
        let s = StateVector::run(&c).unwrap();
        assert!((s.expectation(&"Y".parse().unwrap()) - 1.0).abs() < 1e-12);
    }
}
