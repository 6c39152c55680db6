//! Product-model fidelity estimates for NISQ, pQEC, distillation-based and
//! cultivation-based execution, plus the sweeps built on them.

use serde::{Deserialize, Serialize};

use crate::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::layout::{k_for, schedule, LayoutKind, LayoutSpec, MacroOp, ScheduleMode};
use crate::noise::{
    builtin_factories, patch_physical_qubits, weighted_depth, CodeParams, CultivationSpec, FactorySpec,
    NisqNoiseModel, PqecNoiseModel, SynthesisSpec,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum StrategyConfig {
    Nisq {
        noise: NisqNoiseModel,
    },
    Pqec {
        noise: PqecNoiseModel,
        layout: LayoutSpec,
    },
    Conventional {
        factories: Vec<FactorySpec>,
        synthesis: SynthesisSpec,
        code: CodeParams,
        budget: usize,
        #[serde(default)]
        allow_over_budget: bool,
    },
    Cultivation {
        cultivation: CultivationSpec,
        synthesis: SynthesisSpec,
        code: CodeParams,
        budget: usize,
        #[serde(default)]
        allow_over_budget: bool,
    },
}

impl StrategyConfig {
    pub fn name(&self) -> String {
        match self {
            StrategyConfig::Nisq { .. } => "nisq".into(),
            StrategyConfig::Pqec { .. } => "pqec".into(),
            StrategyConfig::Conventional { factories, .. } => {
                let names: Vec<&str> = factories.iter().map(|f| f.name.as_str()).collect();
                format!("conventional[{}]", names.join("+"))
            }
            StrategyConfig::Cultivation { .. } => "cultivation".into(),
        }
    }

    /// pQEC on the smallest proposed layout holding `n` qubits.
    pub fn pqec_for(n: usize, code: CodeParams) -> Result<Self> {
        Ok(StrategyConfig::Pqec {
            noise: PqecNoiseModel::from_code(&code)?,
            layout: LayoutSpec::proposed(k_for(n), code)?,
        })
    }

    pub fn conventional(factory: FactorySpec, synthesis: SynthesisSpec, code: CodeParams, budget: usize) -> Self {
        StrategyConfig::Conventional {
            factories: vec![factory],
            synthesis,
            code,
            budget,
            allow_over_budget: false,
        }
    }
}

/// Error-budget breakdown as Σ −ln(1 − p) per source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub gate: f64,
    pub rz: f64,
    pub measurement: f64,
    pub memory: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.gate + self.rz + self.measurement + self.memory
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub strategy: String,
    pub fidelity: f64,
    pub breakdown: Breakdown,
    pub t_circ: f64,
    pub qubits_used: usize,
    pub stall_cycles: f64,
    /// Factories or cultivation units provisioned (0 for NISQ and pQEC).
    pub t_sources: usize,
    pub t_count: f64,
    pub over_budget: bool,
}

/// −ln(1 − p) charged `count` times.
fn charge(count: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("error rate {p} outside [0,1]")));
    }
    if count == 0.0 || p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-count * (-p).ln_1p())
}

fn report(strategy: String, b: Breakdown) -> FidelityReport {
    FidelityReport {
        strategy,
        fidelity: (-b.total()).exp(),
        breakdown: b,
        t_circ: 0.0,
        qubits_used: 0,
        stall_cycles: 0.0,
        t_sources: 0,
        t_count: 0.0,
        over_budget: false,
    }
}

struct Counts {
    cx: f64,
    one_q: f64,
    h: f64,
    s: f64,
    pauli: f64,
    rz: f64,
    meas: f64,
}

fn counts(c: &Circuit) -> Counts {
    let mut k = Counts {
        cx: 0.0,
        one_q: 0.0,
        h: 0.0,
        s: 0.0,
        pauli: 0.0,
        rz: 0.0,
        meas: 0.0,
    };
    for g in c.gates() {
        match g {
            Gate::CX(..) => k.cx += 1.0,
            Gate::Rz(..) => k.rz += 1.0,
            Gate::MeasureZ(_) => k.meas += 1.0,
            Gate::H(_) => {
                k.h += 1.0;
                k.one_q += 1.0
            }
            Gate::S(_) | Gate::Sdg(_) => {
                k.s += 1.0;
                k.one_q += 1.0
            }
            _ => {
                k.pauli += 1.0;
                k.one_q += 1.0
            }
        }
    }
    k
}

fn estimate_nisq(c: &Circuit, m: &NisqNoiseModel) -> Result<FidelityReport> {
    let k = counts(c);
    let b = Breakdown {
        gate: charge(k.cx, m.p_cnot)? + charge(k.one_q, m.p_1q)?,
        rz: charge(k.rz, m.p_rz)?,
        measurement: charge(k.meas, m.p_meas)?,
        memory: 0.0,
    };
    let mut r = report("nisq".into(), b);
    r.t_circ = weighted_depth(c, 1.0);
    r.qubits_used = c.width();
    Ok(r)
}

fn estimate_pqec(c: &Circuit, m: &PqecNoiseModel, layout: &LayoutSpec) -> Result<FidelityReport> {
    let s = schedule(c, layout, ScheduleMode::Deterministic)?;
    let k = counts(c);
    let mut attempts = 0.0;
    let mut injected = 0.0;
    let mut rotations = 0.0;
    for op in &s.timeline {
        match op.op {
            MacroOp::RzConsume { attempts: a, .. } => attempts += a as f64,
            MacroOp::RzInject { .. } => injected += 1.0,
            MacroOp::PatchRotate { .. } => rotations += 1.0,
            _ => {}
        }
    }
    // every consumption attempt is one lattice-surgery ZZ measurement
    let b = Breakdown {
        gate: charge(k.cx + attempts, m.cx)? + charge(k.h, m.h)? + charge(k.s, m.s)? + charge(rotations, m.memory)?,
        rz: charge(attempts + injected, m.p_rz_inject)?,
        measurement: charge(k.meas, m.measure)?,
        memory: charge((s.v_idle + s.v_ancilla) / s.patch_qubits as f64, m.memory)?,
    };
    let mut r = report("pqec".into(), b);
    r.t_circ = s.t_circ as f64;
    r.qubits_used = s.n_circ;
    Ok(r)
}

struct Supply {
    units: usize,
    footprint: f64,
    cycles_per_t: f64,
    t_error: f64,
}

#[allow(clippy::too_many_arguments)]
fn estimate_t_based(
    name: String,
    c: &Circuit,
    supply: &dyn Fn(usize) -> Vec<Supply>,
    synthesis: &SynthesisSpec,
    code: &CodeParams,
    budget: usize,
    allow_over_budget: bool,
) -> Result<FidelityReport> {
    let pl = PqecNoiseModel::from_code(code)?;
    let layout = LayoutSpec::proposed(k_for(c.width()), *code)?;
    let pq = patch_physical_qubits(code.d);
    let program = layout.kind.total_patches() * pq;
    let mut over = false;
    if program > budget {
        if !allow_over_budget {
            return Err(Error::NoFit(format!(
                "program needs {program} physical qubits, budget is {budget}"
            )));
        }
        over = true;
    }
    let residual = budget.saturating_sub(program);
    let mut sources = supply(residual);
    let mut units: usize = sources.iter().map(|s| s.units).sum();
    if units == 0 {
        if !allow_over_budget {
            return Err(Error::Config(format!(
                "no T source fits the {residual} residual physical qubits"
            )));
        }
        // provision the cheapest single source anyway
        if let Some(s) = sources
            .iter_mut()
            .min_by(|a, b| a.footprint.total_cmp(&b.footprint))
        {
            s.units = 1;
        }
        units = 1;
        over = true;
    }
    let k = counts(c);
    let t_per = synthesis.t_count_per_rz() as f64;
    let t_count = k.rz * t_per;
    let throughput: f64 = sources.iter().map(|s| s.units as f64 / s.cycles_per_t).sum();
    // T states are drawn in proportion to each source's throughput
    let t_error: f64 = sources
        .iter()
        .map(|s| s.units as f64 / s.cycles_per_t * s.t_error)
        .sum::<f64>()
        / throughput;
    let base = schedule(c, &layout, ScheduleMode::Deterministic)?.t_circ as f64;
    let growth = synthesis.synthesized_depth(c) / weighted_depth(c, 1.0).max(1.0);
    let t_sched = base * growth;
    let t_supply = t_count / throughput;
    let runtime = t_sched.max(t_supply);
    let live = layout.kind.total_patches() as f64;
    let clifford = synthesis.synthesized_gate_count(c) - k.meas - k.pauli;
    let b = Breakdown {
        gate: charge(clifford, pl.cx)?,
        rz: charge(t_count, t_error)?,
        measurement: charge(k.meas, pl.measure)?,
        memory: charge(live * runtime, pl.memory)?,
    };
    let mut r = report(name, b);
    r.t_circ = runtime;
    r.stall_cycles = runtime - t_sched;
    r.t_sources = units;
    r.t_count = t_count;
    r.over_budget = over;
    r.qubits_used = program + sources.iter().map(|s| (s.units as f64 * s.footprint) as usize).sum::<usize>();
    Ok(r)
}

/// Fidelity of `circuit` under `strategy`.
pub fn estimate(circuit: &Circuit, strategy: &StrategyConfig) -> Result<FidelityReport> {
    match strategy {
        StrategyConfig::Nisq { noise } => estimate_nisq(circuit, noise),
        StrategyConfig::Pqec { noise, layout } => estimate_pqec(circuit, noise, layout),
        StrategyConfig::Conventional {
            factories,
            synthesis,
            code,
            budget,
            allow_over_budget,
        } => {
            if factories.is_empty() {
                return Err(Error::Config("no factory configured".into()));
            }
            for f in factories {
                f.validate()?;
            }
            let fs = factories.clone();
            // residual qubits are filled with identical copies of each configured
            // factory type in turn
            let supply = move |residual: usize| {
                let mut left = residual as f64;
                fs.iter()
                    .map(|f| {
                        let n = (left / f.qubit_footprint.value).floor().max(0.0) as usize;
                        left -= n as f64 * f.qubit_footprint.value;
                        Supply {
                            units: n,
                            footprint: f.qubit_footprint.value,
                            cycles_per_t: f.cycles_per_t.value,
                            t_error: f.t_error.value,
                        }
                    })
                    .collect()
            };
            estimate_t_based(
                strategy.name(),
                circuit,
                &supply,
                synthesis,
                code,
                *budget,
                *allow_over_budget,
            )
        }
        StrategyConfig::Cultivation {
            cultivation,
            synthesis,
            code,
            budget,
            allow_over_budget,
        } => {
            cultivation.validate()?;
            let foot = cultivation.footprint_patches.value * patch_physical_qubits(code.d) as f64;
            let cyc = cultivation.expected_cycles_per_t.value;
            let err = cultivation.t_error.value;
            let supply = move |residual: usize| {
                vec![Supply {
                    units: (residual as f64 / foot).floor() as usize,
                    footprint: foot,
                    cycles_per_t: cyc,
                    t_error: err,
                }]
            };
            estimate_t_based(
                strategy.name(),
                circuit,
                &supply,
                synthesis,
                code,
                *budget,
                *allow_over_budget,
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub circuit: String,
    pub n: usize,
    pub strategy: String,
    pub fidelity: f64,
    pub pqec_fidelity: f64,
    /// pQEC fidelity divided by this strategy's fidelity.
    pub pqec_ratio: f64,
    pub over_budget: bool,
    pub t_sources: usize,
}

/// pQEC against distillation with each of `factories`, one row per (circuit, factory).
/// Budgets that cannot hold a factory beside the program still get one, flagged as over budget.
pub fn compare_strategies(
    circuits: &[(String, Circuit)],
    factories: &[FactorySpec],
    synthesis: &SynthesisSpec,
    code: CodeParams,
    budget: usize,
) -> Result<Vec<ComparisonRow>> {
    if factories.is_empty() {
        return Err(Error::Config("need at least one factory to compare against".into()));
    }
    let mut rows = Vec::new();
    for (name, c) in circuits {
        let pq = estimate(c, &StrategyConfig::pqec_for(c.width(), code)?)?;
        for f in factories {
            let conv = estimate(
                c,
                &StrategyConfig::Conventional {
                    factories: vec![f.clone()],
                    synthesis: *synthesis,
                    code,
                    budget,
                    allow_over_budget: true,
                },
            )?;
            rows.push(ComparisonRow {
                circuit: name.clone(),
                n: c.width(),
                strategy: conv.strategy.clone(),
                fidelity: conv.fidelity,
                pqec_fidelity: pq.fidelity,
                pqec_ratio: pq.fidelity / conv.fidelity,
                over_budget: conv.over_budget,
                t_sources: conv.t_sources,
            });
        }
    }
    Ok(rows)
}

pub const COMPARE_CSV_HEADER: &str = "circuit,n,strategy,fidelity,pqec_fidelity,pqec_ratio,over_budget,t_sources";

pub fn compare_csv(rows: &[ComparisonRow]) -> String {
    let mut s = format!("{COMPARE_CSV_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.9},{:.9},{:.6},{},{}\n",
            r.circuit, r.n, r.strategy, r.fidelity, r.pqec_fidelity, r.pqec_ratio, r.over_budget, r.t_sources
        ));
    }
    s
}

/// Depth-1 FCHE circuits of the given sizes, named `fche_<n>`.
pub fn fche_suite(sizes: &[usize]) -> Result<Vec<(String, Circuit)>> {
    sizes
        .iter()
        .map(|&n| Ok((format!("fche_{n}"), build_ansatz(&AnsatzSpec::new(AnsatzKind::Fche, n, 1)?)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinCell {
    pub program_qubits: usize,
    pub device_qubits: usize,
    /// None when the program does not fit.
    pub pqec_wins: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinMatrix {
    pub program_sizes: Vec<usize>,
    pub device_sizes: Vec<usize>,
    /// Row-major: `cells[i * device_sizes.len() + j]`.
    pub cells: Vec<WinCell>,
}

impl WinMatrix {
    pub fn get(&self, i: usize, j: usize) -> &WinCell {
        &self.cells[i * self.device_sizes.len() + j]
    }

    /// Heat-map data: x = device qubits, y = logical qubits, value = win fraction or NA.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("device_qubits,logical_qubits,value\n");
        for c in &self.cells {
            let v = c.pqec_wins.map_or("NA".to_string(), |w| format!("{w:.4}"));
            s.push_str(&format!("{},{},{}\n", c.device_qubits, c.program_qubits, v));
        }
        s
    }
}

/// Depth-1 benchmark circuits used for the win matrix.
pub fn benchmarks(n: usize) -> Result<Vec<Circuit>> {
    let mut out = Vec::new();
    for kind in AnsatzKind::ALL {
        let spec = AnsatzSpec::new(kind, n, 1);
        if let Ok(spec) = spec {
            out.push(build_ansatz(&spec)?);
        }
    }
    Ok(out)
}

/// Fraction of benchmarks where pQEC beats the best distillation configuration that fits.
pub fn win_matrix(
    program_sizes: &[usize],
    device_sizes: &[usize],
    factories: &[FactorySpec],
    synthesis: &SynthesisSpec,
    code: CodeParams,
) -> Result<WinMatrix> {
    if program_sizes.is_empty() || device_sizes.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let pq = patch_physical_qubits(code.d);
    let mut cells = Vec::new();
    for &n in program_sizes {
        let suite = benchmarks(n)?;
        let pqec: Vec<f64> = suite
            .iter()
            .map(|c| Ok(estimate(c, &StrategyConfig::pqec_for(n, code)?)?.fidelity))
            .collect::<Result<_>>()?;
        for &budget in device_sizes {
            let need = LayoutKind::Proposed { k: k_for(n) }.total_patches() * pq;
            if need > budget || suite.is_empty() {
                cells.push(WinCell {
                    program_qubits: n,
                    device_qubits: budget,
                    pqec_wins: None,
                });
                continue;
            }
            let mut wins = 0usize;
            for (c, &fp) in suite.iter().zip(&pqec) {
                let mut best = 0.0f64;
                for f in factories {
                    let s = StrategyConfig::conventional(f.clone(), *synthesis, code, budget);
                    match estimate(c, &s) {
                        Ok(r) => best = best.max(r.fidelity),
                        Err(Error::Config(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
                if fp > best {
                    wins += 1;
                }
            }
            cells.push(WinCell {
                program_qubits: n,
                device_qubits: budget,
                pqec_wins: Some(wins as f64 / suite.len() as f64),
            });
        }
    }
    Ok(WinMatrix {
        program_sizes: program_sizes.to_vec(),
        device_sizes: device_sizes.to_vec(),
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub n: usize,
    pub depth: usize,
    pub nisq_fidelity: f64,
    pub pqec_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverScan {
    pub kind: AnsatzKind,
    pub points: Vec<DepthPoint>,
    /// Per N: (n, NISQ log-fidelity slope per layer, pQEC slope per layer).
    pub slopes: Vec<(usize, f64, f64)>,
    /// Interpolated N where the slopes meet, if they cross inside the scanned range.
    pub crossover_n: Option<f64>,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn crossover_depth_scan(
    kind: AnsatzKind,
    sizes: &[usize],
    depths: &[usize],
    nisq: &NisqNoiseModel,
    code: CodeParams,
) -> Result<CrossoverScan> {
    if depths.len() < 2 {
        return Err(Error::InvalidParameter("need at least two depths".into()));
    }
    let mut points = Vec::new();
    let mut slopes = Vec::new();
    for &n in sizes {
        let (mut xs, mut yn, mut yp) = (vec![], vec![], vec![]);
        for &p in depths {
            let c = build_ansatz(&AnsatzSpec::new(kind, n, p)?)?;
            let fnisq = estimate(&c, &StrategyConfig::Nisq { noise: *nisq })?;
            let fpqec = estimate(&c, &StrategyConfig::pqec_for(n, code)?)?;
            xs.push(p as f64);
            yn.push(-fnisq.breakdown.total());
            yp.push(-fpqec.breakdown.total());
            points.push(DepthPoint {
                n,
                depth: p,
                nisq_fidelity: fnisq.fidelity,
                pqec_fidelity: fpqec.fidelity,
            });
        }
        slopes.push((n, slope(&xs, &yn), slope(&xs, &yp)));
    }
    // NISQ decays faster than pQEC once (nisq slope − pqec slope) turns negative
    let mut crossover_n = None;
    for w in slopes.windows(2) {
        let (n0, a0, b0) = w[0];
        let (n1, a1, b1) = w[1];
        let (d0, d1) = (a0 - b0, a1 - b1);
        if d0 >= 0.0 && d1 < 0.0 {
            crossover_n = Some(n0 as f64 + (n1 - n0) as f64 * d0 / (d0 - d1));
            break;
        }
    }
    Ok(CrossoverScan {
        kind,
        points,
        slopes,
        crossover_n,
    })
}

/// Default comparison set: the three built-in factories.
pub fn default_factories() -> Vec<FactorySpec> {
    builtin_factories()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{injection_error, Tagged};

    fn code() -> CodeParams {
        CodeParams::default_eft()
    }

    fn fche(n: usize) -> Circuit {
        build_ansatz(&AnsatzSpec::new(AnsatzKind::Fche, n, 1).unwrap()).unwrap()
    }

    fn synth() -> SynthesisSpec {
        SynthesisSpec::calibrated(1e-6).unwrap()
    }

    #[test]
    fn noiseless_is_one() {
        let c = fche(8);
        let n = estimate(&c, &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(0.0).unwrap() }).unwrap();
        assert_eq!(n.fidelity, 1.0);
        let p = estimate(
            &c,
            &StrategyConfig::Pqec {
                noise: PqecNoiseModel::noiseless(),
                layout: LayoutSpec::proposed(1, code()).unwrap(),
            },
        )
        .unwrap();
        assert_eq!(p.fidelity, 1.0);
    }

    #[test]
    fn rz_dominates_pqec() {
        let r = estimate(&fche(16), &StrategyConfig::pqec_for(16, code()).unwrap()).unwrap();
        assert!(r.breakdown.rz / r.breakdown.total() >= 0.9);
        assert!(((-r.fidelity.ln()) - r.breakdown.total()).abs() < 1e-12);
    }

    #[test]
    fn per_t_error_small_factory() {
        let f = builtin_factories()[0].clone();
        let c = fche(8);
        let s = synth();
        let r = estimate(&c, &StrategyConfig::conventional(f, s, code(), 10_000)).unwrap();
        let per_t = 1.0 - (-r.breakdown.rz / r.t_count).exp();
        assert!((per_t - 5.4e-4).abs() < 1e-12);
    }

    #[test]
    fn pqec_beats_distillation_at_budget() {
        let rows = compare_strategies(&fche_suite(&[12, 16, 20, 24]).unwrap(), &builtin_factories(), &synth(), code(), 10_000)
            .unwrap();
        for r in &rows {
            assert!(r.pqec_ratio >= 1.0, "{r:?}");
        }
        let mid: Vec<f64> = rows.iter().filter(|r| r.strategy.contains("11_5_5")).map(|r| r.pqec_ratio).collect();
        assert_eq!(mid.len(), 4);
        for w in mid.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(mid.iter().all(|&x| (1.0..=2.5).contains(&x)), "{mid:?}");
    }

    #[test]
    fn sensitivity() {
        let c = fche(10);
        let base = estimate(&c, &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(1e-3).unwrap() }).unwrap();
        let worse = estimate(&c, &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(2e-3).unwrap() }).unwrap();
        assert!(worse.fidelity < base.fidelity);
        let big = estimate(&fche(11), &StrategyConfig::Nisq { noise: NisqNoiseModel::from_p(1e-3).unwrap() }).unwrap();
        assert!(big.fidelity < base.fidelity);
        let p1 = estimate(&c, &StrategyConfig::pqec_for(10, code()).unwrap()).unwrap();
        let p2 = estimate(&c, &StrategyConfig::pqec_for(10, CodeParams::new(11, 2e-3).unwrap()).unwrap()).unwrap();
        assert!(p2.fidelity < p1.fidelity);
    }

    #[test]
    fn conventional_limit_matches_pqec_scale() {
        let c = fche(8);
        let mut s = SynthesisSpec::raw(0.5).unwrap();
        s.c1 = Tagged::assumed(1.0);
        s.gate_factor = Tagged::assumed(1.0);
        assert_eq!(s.t_count_per_rz(), 1);
        let f = FactorySpec {
            name: "ideal".into(),
            d_x: 11,
            d_z: 11,
            d_m: 11,
            qubit_footprint: Tagged::assumed(241.0),
            cycles_per_t: Tagged::assumed(1.0),
            t_error: Tagged::assumed(injection_error(1e-3)),
        };
        let conv = estimate(&c, &StrategyConfig::conventional(f, s, code(), 100_000)).unwrap();
        let pq = estimate(&c, &StrategyConfig::pqec_for(8, code()).unwrap()).unwrap();
        let ratio = conv.breakdown.rz / pq.breakdown.rz;
        // one T per Rz against 1 injection + 2 expected attempts for half the rotations
        assert!((0.5..=1.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn win_matrix_trends() {
        let progs = [8, 12, 16, 20, 24, 32];
        let devs = [5_000, 10_000, 20_000, 50_000, 100_000];
        let m = win_matrix(&progs, &devs, &builtin_factories(), &synth(), code()).unwrap();
        for i in 0..progs.len() {
            let mut last = f64::INFINITY;
            for j in 0..devs.len() {
                if let Some(w) = m.get(i, j).pqec_wins {
                    assert!(w <= last, "row {i}");
                    last = w;
                }
            }
        }
        for j in 0..devs.len() {
            let mut last = f64::NEG_INFINITY;
            for i in 0..progs.len() {
                if let Some(w) = m.get(i, j).pqec_wins {
                    assert!(w >= last, "col {j}");
                    last = w;
                }
            }
        }
        // 32 qubits need 6·9·241 = 13014 qubits
        assert!(m.get(5, 1).pqec_wins.is_none());
        assert!(m.get(5, 2).pqec_wins.is_some());
        assert!(m.to_csv().contains("NA"));
    }

    #[test]
    fn crossover_blocked() {
        let sizes: Vec<usize> = (6..=20).step_by(2).collect();
        let s = crossover_depth_scan(
            AnsatzKind::BlockedAllToAll,
            &sizes,
            &[1, 2, 4, 8],
            &NisqNoiseModel::from_p(1e-3).unwrap(),
            code(),
        )
        .unwrap();
        let x = s.crossover_n.unwrap();
        assert!((12.0..=14.0).contains(&x), "{x}");
        let s8 = s.slopes.iter().find(|r| r.0 == 8).unwrap();
        assert!(s8.1 > s8.2);
        let s16 = s.slopes.iter().find(|r| r.0 == 16).unwrap();
        assert!(s16.1 < s16.2);
    }

    #[test]
    fn no_factory_fits() {
        let big = builtin_factories()[2].clone();
        let r = estimate(&fche(20), &StrategyConfig::conventional(big, synth(), code(), 9_000));
        assert!(matches!(r, Err(Error::Config(_))));
        let r = estimate(&fche(40), &StrategyConfig::conventional(builtin_factories()[0].clone(), synth(), code(), 9_000));
        assert!(matches!(r, Err(Error::NoFit(_))));
    }
}
