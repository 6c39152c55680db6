use rand::Rng;

use crate::circuit::{canonicalize_rz, Gate, Pauli, PauliString};
use crate::error::{Error, Result};

/// Aaronson–Gottesman stabilizer tableau.
///
/// Rows `0..n` are destabilizers, `n..2n` stabilizers, row `2n` is scratch.
/// Each row stores x and z bits packed into 64-bit words plus a sign bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

#[inline]
fn bit(q: usize) -> (usize, u64) {
    (q / 64, 1u64 << (q % 64))
}

impl Tableau {
    /// |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
        };
        for q in 0..n {
            let (w, m) = bit(q);
            t.xs[q * words + w] |= m;
            t.zs[(n + q) * words + w] |= m;
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn x(&self, row: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.xs[row * self.words + w] & m != 0
    }

    #[inline]
    fn z(&self, row: usize, q: usize) -> bool {
        let (w, m) = bit(q);
        self.zs[row * self.words + w] & m != 0
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                width: self.n,
            });
        }
        Ok(())
    }

    pub fn h(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            if x != 0 && z != 0 {
                self.signs[r] ^= true;
            }
            self.xs[i] = (self.xs[i] & !m) | z;
            self.zs[i] = (self.zs[i] & !m) | x;
        }
    }

    pub fn s(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let x = self.xs[i] & m;
            if x != 0 && self.zs[i] & m != 0 {
                self.signs[r] ^= true;
            }
            self.zs[i] ^= x;
        }
    }

    pub fn sdg(&mut self, q: usize) {
        let (w, m) = bit(q);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let x = self.xs[i] & m;
            if x != 0 && self.zs[i] & m == 0 {
                self.signs[r] ^= true;
            }
            self.zs[i] ^= x;
        }
    }

    /// Conjugation by a Pauli only flips signs of anticommuting rows.
    pub fn pauli(&mut self, q: usize, p: Pauli) {
        let (w, m) = bit(q);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let (x, z) = (self.xs[i] & m != 0, self.zs[i] & m != 0);
            let flip = match p {
                Pauli::I => false,
                Pauli::X => z,
                Pauli::Z => x,
                Pauli::Y => x ^ z,
            };
            self.signs[r] ^= flip;
        }
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        let (wc, mc) = bit(c);
        let (wt, mt) = bit(t);
        for r in 0..2 * self.n {
            let base = r * self.words;
            let xc = self.xs[base + wc] & mc != 0;
            let zc = self.zs[base + wc] & mc != 0;
            let xt = self.xs[base + wt] & mt != 0;
            let zt = self.zs[base + wt] & mt != 0;
            if xc && zt && (xt == zc) {
                self.signs[r] ^= true;
            }
            if xc {
                self.xs[base + wt] ^= mt;
            }
            if zt {
                self.zs[base + wc] ^= mc;
            }
        }
    }

    /// Applies a Clifford gate. Rz is accepted only at π/2 multiples; MeasureZ is rejected
    /// here because it needs randomness (use [`Tableau::measure_z`]).
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for q in gate.qubits() {
            self.check(q)?;
        }
        let g = match canonicalize_rz(*gate) {
            None => return Ok(()),
            Some(g) => g,
        };
        match g {
            Gate::H(q) => self.h(q),
            Gate::S(q) => self.s(q),
            Gate::Sdg(q) => self.sdg(q),
            Gate::X(q) => self.pauli(q, Pauli::X),
            Gate::Y(q) => self.pauli(q, Pauli::Y),
            Gate::Z(q) => self.pauli(q, Pauli::Z),
            Gate::CX(c, t) => {
                if c == t {
                    return Err(Error::SameControlTarget(c));
                }
                self.cx(c, t)
            }
            Gate::Rz(_, theta) => {
                return Err(Error::UnsupportedGate(format!(
                    "rz({theta}) is not a multiple of pi/2"
                )))
            }
            Gate::MeasureZ(_) => {
                return Err(Error::UnsupportedGate("measurement needs an rng".into()))
            }
        }
        Ok(())
    }

    /// Applies a Pauli string (as an error or correction) to the listed qubits.
    pub fn apply_pauli_on(&mut self, qubits: &[usize], p: &PauliString) -> Result<()> {
        if qubits.len() != p.width() {
            return Err(Error::WidthMismatch {
                expected: p.width(),
                got: qubits.len(),
            });
        }
        for (&q, &l) in qubits.iter().zip(p.letters()) {
            self.check(q)?;
            if l != Pauli::I {
                self.pauli(q, l);
            }
        }
        Ok(())
    }

    // Phase exponent (mod 4) contributed by left-multiplying row `h` by row `i`.
    fn phase_sum(&self, h: usize, i: usize) -> i64 {
        let (bh, bi) = (h * self.words, i * self.words);
        let mut pos = 0u32;
        let mut neg = 0u32;
        for w in 0..self.words {
            let x1 = self.xs[bi + w];
            let z1 = self.zs[bi + w];
            let x2 = self.xs[bh + w];
            let z2 = self.zs[bh + w];
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            pos += ((y1 & z2 & !x2) | (xo & z2 & x2) | (zo & x2 & !z2)).count_ones();
            neg += ((y1 & x2 & !z2) | (xo & z2 & !x2) | (zo & x2 & z2)).count_ones();
        }
        pos as i64 - neg as i64
    }

    // Row h <- row i * row h.
    fn rowsum(&mut self, h: usize, i: usize) {
        let g = self.phase_sum(h, i);
        let total = 2 * (self.signs[h] as i64) + 2 * (self.signs[i] as i64) + g;
        self.signs[h] = total.rem_euclid(4) == 2;
        for w in 0..self.words {
            self.xs[h * self.words + w] ^= self.xs[i * self.words + w];
            self.zs[h * self.words + w] ^= self.zs[i * self.words + w];
        }
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            self.xs[dst * self.words + w] = self.xs[src * self.words + w];
            self.zs[dst * self.words + w] = self.zs[src * self.words + w];
        }
        self.signs[dst] = self.signs[src];
    }

    fn clear_row(&mut self, r: usize) {
        for w in 0..self.words {
            self.xs[r * self.words + w] = 0;
            self.zs[r * self.words + w] = 0;
        }
        self.signs[r] = false;
    }

    /// Returns `Some(bit)` if a Z measurement of `q` is deterministic.
    pub fn peek_z(&mut self, q: usize) -> Option<bool> {
        let n = self.n;
        if (n..2 * n).any(|r| self.x(r, q)) {
            return None;
        }
        let scratch = 2 * n;
        self.clear_row(scratch);
        for i in 0..n {
            if self.x(i, q) {
                self.rowsum(scratch, i + n);
            }
        }
        Some(self.signs[scratch])
    }

    /// Z-basis measurement with collapse. Returns the outcome bit (true = |1⟩).
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let n = self.n;
        let Some(p) = (n..2 * n).find(|&r| self.x(r, q)) else {
            return Ok(self.peek_z(q).expect("deterministic"));
        };
        for i in 0..2 * n {
            if i != p && self.x(i, q) {
                self.rowsum(i, p);
            }
        }
        self.copy_row(p - n, p);
        self.clear_row(p);
        let (w, m) = bit(q);
        self.zs[p * self.words + w] |= m;
        let outcome: bool = rng.gen();
        self.signs[p] = outcome;
        Ok(outcome)
    }

    fn anticommutes_row(&self, row: usize, p: &PauliString) -> bool {
        let mut parity = false;
        for (q, &l) in p.letters().iter().enumerate() {
            let (px, pz) = l.bits();
            parity ^= (self.x(row, q) & pz) ^ (self.z(row, q) & px);
        }
        parity
    }

    /// ⟨P⟩ ∈ {−1, 0, +1}.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        if p.width() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                got: p.width(),
            });
        }
        let n = self.n;
        if (n..2 * n).any(|r| self.anticommutes_row(r, p)) {
            return Ok(0);
        }
        // P is ± the product of stabilizers whose destabilizer partner anticommutes with it.
        let mut acc = self.clone();
        let scratch = 2 * n;
        acc.clear_row(scratch);
        for i in 0..n {
            if self.anticommutes_row(i, p) {
                acc.rowsum(scratch, i + n);
            }
        }
        let negative = acc.signs[scratch] != p.is_negative();
        Ok(if negative { -1 } else { 1 })
    }

    /// Row `r` as a signed Pauli string.
    pub fn row(&self, r: usize) -> PauliString {
        let letters = (0..self.n)
            .map(|q| Pauli::from_bits(self.x(r, q), self.z(r, q)))
            .collect();
        PauliString::new(letters, self.signs[r])
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|r| self.row(r)).collect()
    }

    fn commute(&self, a: usize, b: usize) -> bool {
        let mut parity = 0u32;
        for w in 0..self.words {
            let (ai, bi) = (a * self.words + w, b * self.words + w);
            parity += ((self.xs[ai] & self.zs[bi]) ^ (self.zs[ai] & self.xs[bi])).count_ones();
        }
        parity % 2 == 0
    }

    /// Checks the symplectic invariants: stabilizers commute, destabilizers commute,
    /// destabilizer i anticommutes exactly with stabilizer i.
    pub fn validate(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if !self.commute(n + i, n + j) || !self.commute(i, j) {
                    return false;
                }
                if self.commute(i, n + j) != (i != j) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn plus_state() {
        let mut t = Tableau::new(1);
        t.h(0);
        assert_eq!(t.expectation(&ps("X")).unwrap(), 1);
        assert_eq!(t.expectation(&ps("Z")).unwrap(), 0);
    }

    #[test]
    fn bell_state() {
        let mut t = Tableau::new(2);
        t.apply_gate(&Gate::H(0)).unwrap();
        t.apply_gate(&Gate::CX(0, 1)).unwrap();
        assert_eq!(t.expectation(&ps("ZZ")).unwrap(), 1);
        assert_eq!(t.expectation(&ps("ZI")).unwrap(), 0);
        assert_eq!(t.expectation(&ps("XX")).unwrap(), 1);
        assert_eq!(t.expectation(&ps("YY")).unwrap(), -1);
        assert_eq!(t.expectation(&ps("-YY")).unwrap(), 1);
        assert!(t.validate());
    }

    #[test]
    fn rejects_non_clifford() {
        let mut t = Tableau::new(1);
        assert!(matches!(t.apply_gate(&Gate::Rz(0, 0.1)), Err(Error::UnsupportedGate(_))));
        t.apply_gate(&Gate::Rz(0, std::f64::consts::PI)).unwrap();
    }

    #[test]
    fn measurement_rules() {
        let mut rng = seeded(3);
        let mut t = Tableau::new(1);
        for _ in 0..10 {
            assert!(!t.measure_z(0, &mut rng).unwrap());
        }
        let mut ones = 0;
        for _ in 0..10_000 {
            let mut t = Tableau::new(1);
            t.h(0);
            let a = t.measure_z(0, &mut rng).unwrap();
            let b = t.measure_z(0, &mut rng).unwrap();
            assert_eq!(a, b);
            assert!(t.validate());
            ones += a as usize;
        }
        assert!((ones as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn bell_measurements_correlate() {
        let mut rng = seeded(11);
        for _ in 0..200 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cx(0, 1);
            let a = t.measure_z(0, &mut rng).unwrap();
            let b = t.measure_z(1, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn wide_register_crosses_word_boundary() {
        let mut t = Tableau::new(130);
        t.h(0);
        for q in 1..130 {
            t.cx(q - 1, q);
        }
        let mut letters = vec![Pauli::Z; 130];
        assert_eq!(t.expectation(&PauliString::new(letters.clone(), false)).unwrap(), 1);
        letters[0] = Pauli::I;
        assert_eq!(t.expectation(&PauliString::new(letters.clone(), false)).unwrap(), 0);
        letters[1] = Pauli::I;
        assert_eq!(t.expectation(&PauliString::new(letters, true)).unwrap(), -1);
        let xs = PauliString::new(vec![Pauli::X; 130], false);
        assert_eq!(t.expectation(&xs).unwrap(), 1);
        assert!(t.validate());
    }
}
