//! Logical circuits, Pauli observables and Hamiltonians.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// (x, z) symplectic bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Signed Pauli string. Letter `i` acts on qubit `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, negative: bool) -> Self {
        Self { letters, negative }
    }

    pub fn identity(width: usize) -> Self {
        Self::new(vec![Pauli::I; width], false)
    }

    /// Places `ops` on the listed qubits of an otherwise identity string.
    pub fn from_sparse(width: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; width];
        for &(q, p) in ops {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
            letters[q] = p;
        }
        Ok(Self::new(letters, false))
    }

    pub fn width(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// +1 or -1.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn negated(&self) -> Self {
        Self::new(self.letters.clone(), !self.negative)
    }

    /// True when every letter is I or Z.
    pub fn is_diagonal(&self) -> bool {
        self.letters.iter().all(|p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(letters, negative))
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Clifford+Rz gate set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    CX(usize, usize),
    Rz(usize, f64),
    MeasureZ(usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::CX(c, t) => vec![c, t],
            Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::Rz(q, _)
            | Gate::MeasureZ(q) => vec![q],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::CX(..) => "cx",
            Gate::Rz(..) => "rz",
            Gate::MeasureZ(_) => "measure",
        }
    }

    pub fn is_clifford(&self) -> bool {
        match *self {
            Gate::Rz(_, theta) => quarter_turns(theta).is_some(),
            _ => true,
        }
    }

    fn validate(&self, width: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
        }
        if let Gate::CX(c, t) = *self {
            if c == t {
                return Err(Error::SameControlTarget(c));
            }
        }
        if let Gate::Rz(_, theta) = *self {
            if !theta.is_finite() {
                return Err(Error::InvalidParameter("non-finite rotation angle".into()));
            }
        }
        Ok(())
    }
}

/// Returns k in 0..4 when `theta` is k·π/2 modulo 2π (to 1e-9).
pub fn quarter_turns(theta: f64) -> Option<u8> {
    let units = theta / std::f64::consts::FRAC_PI_2;
    let r = units.round();
    if (units - r).abs() > 1e-9 {
        return None;
    }
    Some((r as i64).rem_euclid(4) as u8)
}

/// Replaces π/2-multiple rotations by I, S, Z or Sdg. Other gates are kept.
pub fn canonicalize_rz(gate: Gate) -> Option<Gate> {
    match gate {
        Gate::Rz(q, theta) => match quarter_turns(theta) {
            Some(0) => None,
            Some(1) => Some(Gate::S(q)),
            Some(2) => Some(Gate::Z(q)),
            Some(3) => Some(Gate::Sdg(q)),
            _ => Some(gate),
        },
        g => Some(g),
    }
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    op: String,
    qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle: Option<f64>,
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let angle = match *self {
            Gate::Rz(_, a) => Some(a),
            _ => None,
        };
        GateDoc {
            op: self.name().to_string(),
            qubits: self.qubits(),
            angle,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = GateDoc::deserialize(d)?;
        let one = |doc: &GateDoc| -> std::result::Result<usize, D::Error> {
            match doc.qubits.as_slice() {
                [q] => Ok(*q),
                _ => Err(D::Error::custom(format!("{} takes one qubit", doc.op))),
            }
        };
        Ok(match doc.op.as_str() {
            "h" => Gate::H(one(&doc)?),
            "s" => Gate::S(one(&doc)?),
            "sdg" => Gate::Sdg(one(&doc)?),
            "x" => Gate::X(one(&doc)?),
            "y" => Gate::Y(one(&doc)?),
            "z" => Gate::Z(one(&doc)?),
            "measure" => Gate::MeasureZ(one(&doc)?),
            "rz" => {
                let a = doc
                    .angle
                    .ok_or_else(|| D::Error::custom("rz needs an angle"))?;
                Gate::Rz(one(&doc)?, a)
            }
            "cx" => match doc.qubits.as_slice() {
                [c, t] => Gate::CX(*c, *t),
                _ => return Err(D::Error::custom("cx takes two qubits")),
            },
            other => return Err(D::Error::custom(format!("unknown op {other:?}"))),
        })
    }
}

/// Ordered gate list over a fixed register.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    /// Copy with every π/2-multiple Rz replaced by its Clifford equivalent.
    pub fn canonicalized(&self) -> Result<Self> {
        let mut out = Self::new(self.width);
        for &g in &self.gates {
            if let Some(g2) = canonicalize_rz(g) {
                if let Gate::Rz(_, theta) = g2 {
                    return Err(Error::UnsupportedGate(format!("rz({theta}) is not Clifford")));
                }
                out.gates.push(g2);
            }
        }
        Ok(out)
    }

    /// Rz angles in program order.
    pub fn rz_angles(&self) -> Vec<f64> {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Rz(_, a) => Some(*a),
                _ => None,
            })
            .collect()
    }

    /// Copy with Rz angles replaced in program order.
    pub fn with_rz_angles(&self, angles: &[f64]) -> Result<Self> {
        let n = self.count(|g| matches!(g, Gate::Rz(..)));
        if n != angles.len() {
            return Err(Error::ParamCount {
                expected: n,
                got: angles.len(),
            });
        }
        let mut it = angles.iter();
        let gates = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Rz(q, _) => Gate::Rz(q, *it.next().expect("counted")),
                other => other,
            })
            .collect();
        Self::from_gates(self.width, gates)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            width: usize,
            gates: Vec<Gate>,
        }
        let doc: Doc = serde_json::from_str(s)?;
        Self::from_gates(doc.width, doc.gates)
    }
}

/// One weighted Pauli term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub pauli: PauliString,
}

/// Real-weighted sum of Pauli strings of equal width.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hamiltonian {
    width: usize,
    terms: Vec<Term>,
}

impl Hamiltonian {
    pub fn new(width: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.pauli.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    got: t.pauli.width(),
                });
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
        }
        Ok(Self { width, terms })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Transverse-field Ising chain: J Σ X_i X_{i+1} + Σ Z_i.
    pub fn ising(n: usize, j: f64) -> Result<Self> {
        check_chain(n)?;
        let mut terms = Vec::new();
        if j != 0.0 {
            for i in 0..n - 1 {
                terms.push(term(n, j, &[(i, Pauli::X), (i + 1, Pauli::X)]));
            }
        }
        for i in 0..n {
            terms.push(term(n, 1.0, &[(i, Pauli::Z)]));
        }
        Self::new(n, terms)
    }

    /// Heisenberg chain: Σ (J X_i X_{i+1} + J Y_i Y_{i+1} + Z_i Z_{i+1}).
    pub fn heisenberg(n: usize, j: f64) -> Result<Self> {
        check_chain(n)?;
        let mut terms = Vec::new();
        for i in 0..n - 1 {
            if j != 0.0 {
                terms.push(term(n, j, &[(i, Pauli::X), (i + 1, Pauli::X)]));
                terms.push(term(n, j, &[(i, Pauli::Y), (i + 1, Pauli::Y)]));
            }
            terms.push(term(n, 1.0, &[(i, Pauli::Z), (i + 1, Pauli::Z)]));
        }
        Self::new(n, terms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            width: usize,
            terms: Vec<Term>,
        }
        let doc: Doc = serde_json::from_str(s)?;
        Self::new(doc.width, doc.terms)
    }
}

fn check_chain(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("chain needs at least 2 sites, got {n}")));
    }
    Ok(())
}

fn term(n: usize, coeff: f64, ops: &[(usize, Pauli)]) -> Term {
    Term {
        coeff,
        pauli: PauliString::from_sparse(n, ops).expect("indices below width"),
    }
}
