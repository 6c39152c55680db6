//! Patch layouts and a cycle-level list scheduler for lattice-surgery execution.
//!
//! A clock cycle is one lattice-surgery step. The proposed layout is a block of
//! `4k+4` data patches with two routing channels; comparison layouts are cost models
//! whose per-cluster timings were fitted as effective cycle counts.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::noise::{patch_physical_qubits, CodeParams};
use crate::rng;

pub const FAST_CLUSTER_CYCLES: u64 = 4;
pub const SLOW_CLUSTER_CYCLES: u64 = 8;
pub const ROTATE_CYCLES: u64 = 1;
/// Cycles per consumption attempt.
pub const CONSUME_CYCLES: u64 = 2;
pub const EXPECTED_ATTEMPTS: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayoutKind {
    Proposed { k: usize },
    Compact { n: usize },
    Intermediate { n: usize },
    Fast { n: usize },
    Grid { n: usize },
}

/// Names of the comparison layouts, cheapest first.
pub const COMPARISON_LAYOUTS: [&str; 4] = ["compact", "intermediate", "fast", "grid"];

impl LayoutKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayoutKind::Proposed { .. } => "proposed",
            LayoutKind::Compact { .. } => "compact",
            LayoutKind::Intermediate { .. } => "intermediate",
            LayoutKind::Fast { .. } => "fast",
            LayoutKind::Grid { .. } => "grid",
        }
    }

    /// Layout `name` sized for an `n`-qubit program.
    pub fn for_program(name: &str, n: usize) -> Result<Self> {
        Ok(match name {
            "proposed" => LayoutKind::Proposed { k: k_for(n) },
            "compact" => LayoutKind::Compact { n },
            "intermediate" => LayoutKind::Intermediate { n },
            "fast" => LayoutKind::Fast { n },
            "grid" => LayoutKind::Grid { n },
            _ => return Err(Error::Config(format!("unknown layout {name:?}"))),
        })
    }

    pub fn data_patches(&self) -> usize {
        match *self {
            LayoutKind::Proposed { k } => 4 * k + 4,
            LayoutKind::Compact { n }
            | LayoutKind::Intermediate { n }
            | LayoutKind::Fast { n }
            | LayoutKind::Grid { n } => n,
        }
    }

    pub fn total_patches(&self) -> usize {
        match *self {
            LayoutKind::Proposed { k } => 6 * (k + 2),
            LayoutKind::Compact { n } => (3 * n).div_ceil(2) + 3,
            LayoutKind::Intermediate { n } => 2 * n + 4,
            LayoutKind::Fast { n } => 2 * n + ((8 * n) as f64).sqrt().ceil() as usize + 1,
            LayoutKind::Grid { n } => {
                let s = 2 * (n as f64).sqrt().ceil() as usize + 1;
                s * s
            }
        }
    }

    fn cost(&self) -> Option<ComparisonCost> {
        let (a, b, kappa) = match self {
            LayoutKind::Proposed { .. } => return None,
            LayoutKind::Compact { .. } => (6, 2, 1.15),
            LayoutKind::Intermediate { .. } => (5, 2, 1.05),
            LayoutKind::Fast { .. } => (10, 2, 1.3),
            LayoutKind::Grid { .. } => (9, 2, 1.3),
        };
        Some(ComparisonCost { a, b, kappa })
    }
}

/// Effective cluster cost on a comparison layout: `a` cycles for a single-target
/// CNOT, `a + b` for a multi-target one, stretched by `kappa` (rounded up) while the
/// other half of the bus is busy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCost {
    pub a: u64,
    pub b: u64,
    pub kappa: f64,
}

/// Smallest k whose layout holds `n` data qubits.
pub fn k_for(n: usize) -> usize {
    n.saturating_sub(4).div_ceil(4)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub kind: LayoutKind,
    pub code: CodeParams,
    /// Overrides the number of concurrently usable magic-state slots.
    #[serde(default)]
    pub magic_slots: Option<usize>,
}

impl LayoutSpec {
    pub fn new(kind: LayoutKind, code: CodeParams) -> Result<Self> {
        code.validate()?;
        if kind.data_patches() == 0 {
            return Err(Error::InvalidSize("layout without data patches".into()));
        }
        Ok(Self {
            kind,
            code,
            magic_slots: None,
        })
    }

    pub fn proposed(k: usize, code: CodeParams) -> Result<Self> {
        Self::new(LayoutKind::Proposed { k }, code)
    }

    /// Slots the scheduler actually uses for Rz consumption.
    pub fn magic_slots(&self) -> usize {
        if let Some(m) = self.magic_slots {
            return m.max(1);
        }
        match self.kind {
            LayoutKind::Proposed { k } => k + 4,
            _ => self.kind.data_patches(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutMetrics {
    pub data_patches: usize,
    pub total_patches: usize,
    pub packing_efficiency: f64,
    pub physical_qubits: usize,
    pub max_parallel_magic: usize,
}

pub fn layout_metrics(spec: &LayoutSpec) -> LayoutMetrics {
    let data = spec.kind.data_patches();
    let total = spec.kind.total_patches();
    let max_parallel_magic = match spec.kind {
        LayoutKind::Proposed { k } => 2 * (k / 3),
        _ => spec.magic_slots(),
    };
    LayoutMetrics {
        data_patches: data,
        total_patches: total,
        packing_efficiency: data as f64 / total as f64,
        physical_qubits: total * patch_physical_qubits(spec.code.d),
        max_parallel_magic,
    }
}

/// Largest proposed layout fitting in `budget` physical qubits: returns (k, data qubits).
pub fn max_program(budget: usize, code: &CodeParams) -> Result<(usize, usize)> {
    code.validate()?;
    let per = 6 * patch_physical_qubits(code.d);
    let blocks = budget / per;
    if blocks < 2 {
        return Err(Error::NoFit(format!(
            "{budget} physical qubits cannot hold the smallest layout ({} qubits)",
            2 * per
        )));
    }
    let k = blocks - 2;
    Ok((k, 4 * k + 4))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpeed {
    Fast,
    Slow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum MacroOp {
    CnotCluster {
        control: usize,
        targets: Vec<usize>,
        speed: ClusterSpeed,
    },
    RzConsume {
        qubit: usize,
        magic: usize,
        attempts: u64,
        angle: f64,
    },
    /// First rotation on a fresh qubit, prepared by injecting straight into the data patch.
    RzInject { qubit: usize, angle: f64 },
    PatchRotate { qubit: usize },
    Measure { qubit: usize },
    /// Single-qubit Clifford tracked in software.
    Local { qubit: usize, gate: String },
}

impl MacroOp {
    fn label(&self) -> String {
        match self {
            MacroOp::CnotCluster {
                control,
                targets,
                speed,
            } => {
                let t: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
                let s = match speed {
                    ClusterSpeed::Fast => "fast",
                    ClusterSpeed::Slow => "slow",
                };
                format!("cx {control}->{} ({s})", t.join(","))
            }
            MacroOp::RzConsume {
                qubit,
                magic,
                attempts,
                ..
            } => format!("rz q{qubit} m{magic} x{attempts}"),
            MacroOp::RzInject { qubit, .. } => format!("inject q{qubit}"),
            MacroOp::PatchRotate { qubit } => format!("rotate q{qubit}"),
            MacroOp::Measure { qubit } => format!("measure q{qubit}"),
            MacroOp::Local { qubit, gate } => format!("{gate} q{qubit}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchRef {
    Data(usize),
    Magic(usize),
    Route(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub start: u64,
    pub cycles: u64,
    pub op: MacroOp,
    pub patches: Vec<PatchRef>,
    /// Indices of the circuit gates this op realizes.
    pub gates: Vec<usize>,
}

impl ScheduledOp {
    pub fn end(&self) -> u64 {
        self.start + self.cycles
    }

    /// Data patches engaged by the op.
    pub fn n_op(&self) -> usize {
        self.patches
            .iter()
            .filter(|p| matches!(p, PatchRef::Data(_)))
            .count()
    }
}

/// Idle stretch of a data qubit, placed after circuit gate `after_gate` (or before
/// the qubit's first gate when `None`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdleGap {
    pub qubit: usize,
    pub after_gate: Option<usize>,
    pub cycles: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// Every consumption takes the expected two attempts.
    Deterministic,
    /// Attempts drawn from a fair coin.
    Stochastic { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub layout: LayoutSpec,
    pub timeline: Vec<ScheduledOp>,
    pub t_circ: u64,
    pub patch_qubits: usize,
    pub total_patches: usize,
    /// Physical qubits held by the program.
    pub n_circ: usize,
    /// Patch-cycles (times patch qubits) spent inside ops.
    pub v_ops: f64,
    /// Idle data patch-cycles.
    pub v_idle: f64,
    /// Routing and magic-state area held for the whole run.
    pub v_ancilla: f64,
    pub v_circ: f64,
    /// Idle cycles per data patch.
    pub idle: Vec<u64>,
    pub idle_gaps: Vec<IdleGap>,
    pub rz_consumed: usize,
    pub rz_injected: usize,
}

struct Builder {
    cost: Option<ComparisonCost>,
    n: usize,
    k: usize,
    ready: Vec<u64>,
    fresh: Vec<bool>,
    route_free: Vec<u64>,
    magic_free: Vec<u64>,
    timeline: Vec<ScheduledOp>,
    rng: Option<rng::Rng>,
}

impl Builder {
    fn zone(&self, q: usize) -> usize {
        match self.cost {
            None => usize::from(q >= 2 * self.k),
            Some(_) => usize::from(q >= self.n / 2),
        }
    }

    fn push(&mut self, start: u64, cycles: u64, op: MacroOp, patches: Vec<PatchRef>, gates: Vec<usize>) {
        for p in &patches {
            let end = start + cycles;
            match *p {
                PatchRef::Data(q) => self.ready[q] = end,
                PatchRef::Route(r) => self.route_free[r] = end,
                PatchRef::Magic(m) => self.magic_free[m] = end,
            }
        }
        self.timeline.push(ScheduledOp {
            start,
            cycles,
            op,
            patches,
            gates,
        });
    }

    fn cluster(&mut self, control: usize, targets: Vec<usize>, gates: Vec<usize>) {
        let zc = self.zone(control);
        let crosses = targets.iter().any(|&t| self.zone(t) != zc);
        let mut data: Vec<PatchRef> = std::iter::once(control)
            .chain(targets.iter().copied())
            .map(PatchRef::Data)
            .collect();
        let routes: Vec<usize> = if crosses { vec![0, 1] } else { vec![zc] };
        let speed = if crosses {
            ClusterSpeed::Slow
        } else {
            ClusterSpeed::Fast
        };
        match self.cost {
            None => {
                let t0 = self.ready[control];
                self.push(
                    t0,
                    ROTATE_CYCLES,
                    MacroOp::PatchRotate { qubit: control },
                    vec![PatchRef::Data(control)],
                    vec![],
                );
                let cycles = if crosses {
                    SLOW_CLUSTER_CYCLES
                } else {
                    FAST_CLUSTER_CYCLES
                };
                let start = self.start_of(&data, &routes);
                data.extend(routes.iter().map(|&r| PatchRef::Route(r)));
                self.push(
                    start,
                    cycles,
                    MacroOp::CnotCluster {
                        control,
                        targets,
                        speed,
                    },
                    data,
                    gates,
                );
            }
            Some(c) => {
                let mut cycles = if targets.len() == 1 { c.a } else { c.a + c.b };
                let start = self.start_of(&data, &routes);
                if routes.len() == 1 && self.route_free[1 - routes[0]] > start {
                    cycles = (c.kappa * cycles as f64 - 1e-9).ceil() as u64;
                }
                data.extend(routes.iter().map(|&r| PatchRef::Route(r)));
                self.push(
                    start,
                    cycles,
                    MacroOp::CnotCluster {
                        control,
                        targets,
                        speed,
                    },
                    data,
                    gates,
                );
            }
        }
    }

    fn start_of(&self, data: &[PatchRef], routes: &[usize]) -> u64 {
        let d = data
            .iter()
            .map(|p| match *p {
                PatchRef::Data(q) => self.ready[q],
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        let r = routes.iter().map(|&r| self.route_free[r]).max().unwrap_or(0);
        d.max(r)
    }

    fn rz(&mut self, q: usize, angle: f64, gate: usize) {
        if self.fresh[q] {
            self.fresh[q] = false;
            let t = self.ready[q];
            self.push(
                t,
                0,
                MacroOp::RzInject { qubit: q, angle },
                vec![PatchRef::Data(q)],
                vec![gate],
            );
            return;
        }
        let attempts = match self.rng.as_mut() {
            None => EXPECTED_ATTEMPTS,
            Some(r) => {
                let mut g = 1;
                while !r.gen_bool(0.5) && g < 64 {
                    g += 1;
                }
                g
            }
        };
        // earliest-free slot, lowest index on ties
        let (m, &free) = self
            .magic_free
            .iter()
            .enumerate()
            .min_by_key(|&(i, &f)| (f, i))
            .expect("at least one slot");
        let start = self.ready[q].max(free);
        self.push(
            start,
            CONSUME_CYCLES * attempts,
            MacroOp::RzConsume {
                qubit: q,
                magic: m,
                attempts,
                angle,
            },
            vec![PatchRef::Data(q), PatchRef::Magic(m)],
            vec![gate],
        );
    }
}

/// Greedy program-order list schedule of `circuit` on `layout`.
pub fn schedule(circuit: &Circuit, layout: &LayoutSpec, mode: ScheduleMode) -> Result<Schedule> {
    layout.code.validate()?;
    let n = layout.kind.data_patches();
    if circuit.width() > n {
        return Err(Error::NoFit(format!(
            "{} logical qubits exceed {} data patches of the {} layout",
            circuit.width(),
            n,
            layout.kind.name()
        )));
    }
    let k = match layout.kind {
        LayoutKind::Proposed { k } => k,
        _ => 0,
    };
    let mut b = Builder {
        cost: layout.kind.cost(),
        n,
        k,
        ready: vec![0; n],
        fresh: vec![true; n],
        route_free: vec![0; 2],
        magic_free: vec![0; layout.magic_slots()],
        timeline: Vec::new(),
        rng: match mode {
            ScheduleMode::Deterministic => None,
            ScheduleMode::Stochastic { seed } => Some(rng::seeded(seed)),
        },
    };
    let gates = circuit.gates();
    let mut i = 0;
    while i < gates.len() {
        match gates[i] {
            Gate::CX(c, t) => {
                let mut targets = vec![t];
                let mut idx = vec![i];
                while let Some(&Gate::CX(c2, t2)) = gates.get(i + idx.len()) {
                    if c2 != c || targets.contains(&t2) {
                        break;
                    }
                    targets.push(t2);
                    idx.push(i + idx.len());
                }
                i += idx.len();
                b.fresh[c] = false;
                for &t in &targets {
                    b.fresh[t] = false;
                }
                b.cluster(c, targets, idx);
                continue;
            }
            Gate::Rz(q, theta) => b.rz(q, theta, i),
            Gate::MeasureZ(q) => {
                b.fresh[q] = false;
                let t = b.ready[q];
                b.push(t, 0, MacroOp::Measure { qubit: q }, vec![PatchRef::Data(q)], vec![i]);
            }
            g => {
                let q = g.qubits()[0];
                if !matches!(g, Gate::H(_)) {
                    b.fresh[q] = false;
                }
                let t = b.ready[q];
                b.push(
                    t,
                    0,
                    MacroOp::Local {
                        qubit: q,
                        gate: g.name().to_string(),
                    },
                    vec![PatchRef::Data(q)],
                    vec![i],
                );
            }
        }
        i += 1;
    }
    Ok(finish(layout, b.timeline, n))
}

fn finish(layout: &LayoutSpec, timeline: Vec<ScheduledOp>, n: usize) -> Schedule {
    let t_circ = timeline.iter().map(|o| o.end()).max().unwrap_or(0);
    let pq = patch_physical_qubits(layout.code.d);
    let total = layout.kind.total_patches();
    let mut busy = vec![0u64; n];
    let mut gaps = Vec::new();
    let mut last_end = vec![0u64; n];
    let mut last_gate: Vec<Option<usize>> = vec![None; n];
    let mut v_ops = 0.0;
    for op in &timeline {
        v_ops += (op.cycles * op.n_op() as u64) as f64;
        for p in &op.patches {
            if let PatchRef::Data(q) = *p {
                busy[q] += op.cycles;
                if op.start > last_end[q] {
                    gaps.push(IdleGap {
                        qubit: q,
                        after_gate: last_gate[q],
                        cycles: op.start - last_end[q],
                    });
                }
                last_end[q] = last_end[q].max(op.end());
                if let Some(&g) = op.gates.iter().max() {
                    last_gate[q] = Some(last_gate[q].map_or(g, |l| l.max(g)));
                }
            }
        }
    }
    for q in 0..n {
        if t_circ > last_end[q] && last_gate[q].is_some() {
            gaps.push(IdleGap {
                qubit: q,
                after_gate: last_gate[q],
                cycles: t_circ - last_end[q],
            });
        }
    }
    let idle: Vec<u64> = busy.iter().map(|&b| t_circ - b).collect();
    let v_idle: f64 = idle.iter().map(|&x| x as f64).sum();
    let v_anc = ((total - n) as u64 * t_circ) as f64;
    let pqf = pq as f64;
    Schedule {
        layout: *layout,
        rz_consumed: timeline
            .iter()
            .filter(|o| matches!(o.op, MacroOp::RzConsume { .. }))
            .count(),
        rz_injected: timeline
            .iter()
            .filter(|o| matches!(o.op, MacroOp::RzInject { .. }))
            .count(),
        timeline,
        t_circ,
        patch_qubits: pq,
        total_patches: total,
        n_circ: total * pq,
        v_ops: v_ops * pqf,
        v_idle: v_idle * pqf,
        v_ancilla: v_anc * pqf,
        v_circ: (v_ops + v_idle + v_anc) * pqf,
        idle,
        idle_gaps: gaps,
    }
}

impl Schedule {
    /// Checks that no two ops overlap on a patch or route.
    pub fn verify_exclusive(&self) -> Result<()> {
        let mut spans: std::collections::BTreeMap<PatchRef, Vec<(u64, u64)>> = Default::default();
        for op in &self.timeline {
            if op.cycles == 0 {
                continue;
            }
            for p in &op.patches {
                spans.entry(*p).or_default().push((op.start, op.end()));
            }
        }
        for (p, mut v) in spans {
            v.sort_unstable();
            for w in v.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(Error::InvalidParameter(format!(
                        "{p:?} double-booked in [{}, {})",
                        w[1].0, w[0].1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Circuit replayed in schedule order.
    pub fn replay(&self, circuit: &Circuit) -> Result<Circuit> {
        let mut order: Vec<&ScheduledOp> = self.timeline.iter().filter(|o| !o.gates.is_empty()).collect();
        order.sort_by_key(|o| (o.start, o.gates[0]));
        let mut out = Circuit::new(circuit.width());
        for o in order {
            for &g in &o.gates {
                out.push(circuit.gates()[g])?;
            }
        }
        Ok(out)
    }

    pub fn t_rounds(&self) -> u64 {
        self.t_circ * self.layout.code.d as u64
    }

    pub fn packing_efficiency(&self) -> f64 {
        self.layout.kind.data_patches() as f64 / self.total_patches as f64
    }

    pub fn gantt(&self) -> String {
        let mut s = format!(
            "# layout={} t_circ={} patches={} v_circ={:.0}\n",
            self.layout.kind.name(),
            self.t_circ,
            self.total_patches,
            self.v_circ
        );
        for op in &self.timeline {
            if op.cycles == 0 {
                continue;
            }
            let bar_start = op.start.min(200) as usize;
            let bar_len = op.cycles.min(200 - op.start.min(200)) as usize;
            s.push_str(&format!(
                "{:>6} {:>6}  {:<28} {}{}\n",
                op.start,
                op.end(),
                op.op.label(),
                " ".repeat(bar_start / 4),
                "#".repeat(bar_len.div_ceil(4).max(usize::from(bar_len > 0)))
            ));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const METRICS_CSV_HEADER: &str = "n,kind,layout,t_circ,n_circ,v_circ,pe";

pub fn metrics_csv_row(n: usize, kind: AnsatzKind, s: &Schedule) -> String {
    format!(
        "{},{},{},{},{},{:.0},{:.6}",
        n,
        kind,
        s.layout.kind.name(),
        s.t_circ,
        s.n_circ,
        s.v_circ,
        s.packing_efficiency()
    )
}

/// Schedule of a depth-`p` ansatz on the smallest proposed layout that holds it.
pub fn schedule_ansatz(kind: AnsatzKind, n: usize, p: usize, code: CodeParams) -> Result<Schedule> {
    let c = build_ansatz(&AnsatzSpec::new(kind, n, p)?)?;
    let layout = LayoutSpec::proposed(k_for(n), code)?;
    schedule(&c, &layout, ScheduleMode::Deterministic)
}

pub fn volume_comparison_sizes() -> Vec<usize> {
    (8..=164).step_by(4).collect()
}

/// Mean over `sizes` of V_circ on `layout` divided by V_circ on the proposed layout,
/// for depth-1 circuits of `kind`.
pub fn layout_volume_ratio(kind: AnsatzKind, sizes: &[usize], layout: &str, code: CodeParams) -> Result<f64> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("no sizes".into()));
    }
    let mut acc = 0.0;
    for &n in sizes {
        let c = build_ansatz(&AnsatzSpec::new(kind, n, 1)?)?;
        let prop = schedule(
            &c,
            &LayoutSpec::proposed(k_for(n), code)?,
            ScheduleMode::Deterministic,
        )?;
        let other = schedule(
            &c,
            &LayoutSpec::new(LayoutKind::for_program(layout, n)?, code)?,
            ScheduleMode::Deterministic,
        )?;
        acc += other.v_circ / prop.v_circ;
    }
    Ok(acc / sizes.len() as f64)
}
