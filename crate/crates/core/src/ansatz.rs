//! Variational ansatz construction and gate-count formulas.
//!
//! Every layer is an X-rotation sublayer (H·Rz·H on each qubit), an entangler made of
//! single-control multi-target CNOT clusters, and a Z-rotation sublayer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Expected number of consumption attempts per Rz under repeat-until-success.
pub const EXPECTED_ATTEMPTS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Linear,
    Fche,
    BlockedAllToAll,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 3] = [AnsatzKind::Linear, AnsatzKind::Fche, AnsatzKind::BlockedAllToAll];

    pub fn as_str(self) -> &'static str {
        match self {
            AnsatzKind::Linear => "linear",
            AnsatzKind::Fche => "fche",
            AnsatzKind::BlockedAllToAll => "blocked_all_to_all",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(AnsatzKind::Linear),
            "fche" | "fully_connected" => Ok(AnsatzKind::Fche),
            "blocked" | "blocked_all_to_all" => Ok(AnsatzKind::BlockedAllToAll),
            other => Err(Error::UnsupportedAnsatz(other.to_string())),
        }
    }
}

/// Ansatz family, size, depth and rotation angles (radians).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n: usize,
    pub p: usize,
    pub params: Vec<f64>,
}

impl AnsatzSpec {
    /// Spec with all angles zero.
    pub fn new(kind: AnsatzKind, n: usize, p: usize) -> Result<Self> {
        let spec = Self {
            kind,
            n,
            p,
            params: vec![0.0; 2 * n * p],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Result<Self> {
        self.params = params;
        self.validate()?;
        Ok(self)
    }

    pub fn rz_count(&self) -> usize {
        2 * self.n * self.p
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSize(format!("ansatz needs N >= 2, got {}", self.n)));
        }
        if self.p < 1 {
            return Err(Error::InvalidSize("ansatz depth must be at least 1".into()));
        }
        if self.kind == AnsatzKind::BlockedAllToAll && (self.n < 4 || self.n % 2 == 1) {
            return Err(Error::InvalidSize(format!(
                "blocked_all_to_all needs an even N >= 4, got {}",
                self.n
            )));
        }
        if self.params.len() != self.rz_count() {
            return Err(Error::ParamCount {
                expected: self.rz_count(),
                got: self.params.len(),
            });
        }
        Ok(())
    }
}

/// CNOT clusters of one entangling layer as (control, targets), in program order.
pub fn entangler_clusters(kind: AnsatzKind, n: usize) -> Vec<(usize, Vec<usize>)> {
    match kind {
        AnsatzKind::Linear => (0..n).map(|q| (q, vec![(q + 1) % n])).collect(),
        AnsatzKind::Fche => (0..n.saturating_sub(1))
            .map(|c| (c, (c + 1..n).collect()))
            .collect(),
        AnsatzKind::BlockedAllToAll => blocked_clusters(n),
    }
}

// Two blocks of B = N/2 qubits. The first B-2 qubits of each block are "inner" and
// are all-to-all connected; the remaining two per block plus a few inner qubits are
// tied together by 8 linking CNOTs in three clusters.
fn blocked_clusters(n: usize) -> Vec<(usize, Vec<usize>)> {
    let b = n / 2;
    if b == 2 {
        return vec![(0, vec![2, 3]), (1, vec![2, 3]), (2, vec![0, 1]), (3, vec![0, 1])];
    }
    let inner_a: Vec<usize> = (0..b - 2).collect();
    let inner_b: Vec<usize> = (b..2 * b - 2).collect();
    let mut out = Vec::new();
    if b > 3 {
        for i in 0..b - 2 {
            for inner in [&inner_a, &inner_b] {
                let c = inner[i];
                out.push((c, inner.iter().copied().filter(|&j| j != c).collect()));
            }
        }
    }
    out.push((0, vec![b - 2, b - 1, b]));
    out.push((b, vec![1, 2 * b - 2, 2 * b - 1]));
    out.push((1, vec![b + 1, 2 * b - 1]));
    out
}

/// Builds the logical circuit for `spec`.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    let n = spec.n;
    let clusters = entangler_clusters(spec.kind, n);
    let mut c = Circuit::new(n);
    let mut theta = spec.params.iter().copied();
    for _ in 0..spec.p {
        for q in 0..n {
            c.push(Gate::H(q))?;
            c.push(Gate::Rz(q, theta.next().expect("validated")))?;
            c.push(Gate::H(q))?;
        }
        for (ctrl, targets) in &clusters {
            for &t in targets {
                c.push(Gate::CX(*ctrl, t))?;
            }
        }
        for q in 0..n {
            c.push(Gate::Rz(q, theta.next().expect("validated")))?;
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCounts {
    pub cnot_count: usize,
    pub rz_count: usize,
    pub rz_runtime_expected: f64,
}

fn cnot_per_layer(kind: AnsatzKind, n: usize) -> usize {
    match kind {
        AnsatzKind::Linear => n,
        AnsatzKind::Fche => n * (n - 1) / 2,
        AnsatzKind::BlockedAllToAll => n * n / 2 + 20 - 5 * n,
    }
}

pub fn gate_counts(spec: &AnsatzSpec) -> GateCounts {
    let rz = spec.rz_count();
    GateCounts {
        cnot_count: cnot_per_layer(spec.kind, spec.n) * spec.p,
        rz_count: rz,
        rz_runtime_expected: rz as f64 * EXPECTED_ATTEMPTS,
    }
}

/// CNOT growth per runtime-Rz growth. `asymptotic` keeps only the leading term in N.
pub fn cnot_rz_ratio(kind: AnsatzKind, n: usize, asymptotic: bool) -> f64 {
    let nf = n as f64;
    match (kind, asymptotic) {
        (AnsatzKind::Linear, _) => 0.25,
        (AnsatzKind::Fche, false) => (nf - 1.0) / 8.0,
        (AnsatzKind::BlockedAllToAll, false) => nf / 8.0 - 1.25 + 5.0 / nf,
        (_, true) => nf / 8.0,
    }
}
