//! `pqec`: resource estimates, schedules, injection statistics and VQE runs.

mod config;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use pqec_core::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
use pqec_core::circuit::{Circuit, Hamiltonian};
use pqec_core::estimator::{
    compare_csv, compare_strategies, crossover_depth_scan, estimate, fche_suite, win_matrix, FidelityReport,
    StrategyConfig,
};
use pqec_core::injection::{policy_spacetime, simulate_rus, stats_csv, ShufflePolicy};
use pqec_core::layout::{
    k_for, metrics_csv_row, schedule, LayoutKind, LayoutSpec, ScheduleMode, METRICS_CSV_HEADER,
};
use pqec_core::noise::{
    builtin_factories, factory_by_name, CodeParams, CultivationSpec, FactorySpec, NisqNoiseModel,
    PqecNoiseModel, SynthesisSpec, LOGICAL_CALIBRATION, LOGICAL_PREFACTOR, P_THRESHOLD,
};
use pqec_core::vqe::{clifford_reference, exact_ground_energy, gamma, optimize, GaConfig, Regime, RunRecord};
use pqec_core::Error;

use config::*;

const MODEL_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "pqec", version, about = "Partial-QEC resource estimation and simulation")]
struct Cli {
    /// JSON config file(s), applied in order; flags override them.
    #[arg(long = "config", global = true)]
    config: Vec<PathBuf>,
    /// Write output here (atomically) instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: json or csv (schedule also accepts gantt).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fidelity estimate of one circuit under one strategy.
    Estimate(EstimateFlags),
    /// pQEC against distillation-based execution for FCHE circuits.
    Compare(CompareFlags),
    /// Lattice-surgery schedule of an ansatz circuit.
    Schedule(ScheduleFlags),
    /// Monte Carlo of magic-state provisioning policies.
    ShuffleSim(ShuffleFlags),
    /// Clifford VQE runs and the γ metric.
    Vqe(VqeFlags),
    /// pQEC win fraction over program and device sizes.
    WinMatrix(WinMatrixFlags),
    /// Fidelity-versus-depth scan for NISQ and pQEC.
    Crossover(CrossoverFlags),
    /// Print the resolved configuration of a subcommand.
    PrintConfig {
        /// estimate, compare, schedule, shuffle-sim, vqe, win-matrix or crossover
        experiment: String,
    },
}

#[derive(Args, Serialize, Default)]
struct EstimateFlags {
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<Vec<f64>>,
    #[arg(long)]
    circuit: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long)]
    factory: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "cultivation-cycles")]
    cultivation_cycles: Option<f64>,
    #[arg(long = "cultivation-error")]
    cultivation_error: Option<f64>,
    #[arg(long = "allow-over-budget", num_args = 0..=1, default_missing_value = "true")]
    allow_over_budget: Option<bool>,
}

#[derive(Args, Serialize, Default)]
struct CompareFlags {
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_delimiter = ';')]
    factories: Option<Vec<String>>,
}

#[derive(Args, Serialize, Default)]
struct ScheduleFlags {
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "magic-slots")]
    magic_slots: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    stochastic: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize, Default)]
struct ShuffleFlags {
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Serialize, Default)]
struct VqeFlags {
    #[arg(long)]
    hamiltonian: Option<String>,
    #[arg(long)]
    j: Option<f64>,
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long = "mutation-rate")]
    mutation_rate: Option<f64>,
    #[arg(long = "elite-fraction")]
    elite_fraction: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long = "final-shots")]
    final_shots: Option<usize>,
}

#[derive(Args, Serialize, Default)]
struct WinMatrixFlags {
    #[arg(long, value_delimiter = ',')]
    programs: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    devices: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Serialize, Default)]
struct CrossoverFlags {
    #[arg(long)]
    ansatz: Option<String>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    #[arg(long = "p-phys")]
    p_phys: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
}

/// Process failure with its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoFit(_) => 3,
            Error::Config(_)
            | Error::Parse(_)
            | Error::UnsupportedAnsatz(_)
            | Error::InvalidSize(_)
            | Error::ParamCount { .. }
            | Error::AboveThreshold { .. }
            | Error::InvalidParameter(_)
            | Error::WidthMismatch { .. }
            | Error::QubitOutOfRange { .. }
            | Error::SameControlTarget(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn io_fail(e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        msg: e.to_string(),
    }
}

/// Finished artifact: metadata plus a JSON result and, when available, CSV text.
struct Output {
    meta: Value,
    result: Value,
    csv: Option<String>,
    text: Option<String>,
}

fn assumption(name: &str, value: Value) -> Value {
    json!({ "name": name, "value": value, "assumed": true })
}

fn common_assumptions() -> Vec<Value> {
    vec![
        assumption("logical_prefactor_A", json!(LOGICAL_PREFACTOR)),
        assumption("logical_threshold_p_th", json!(P_THRESHOLD)),
        assumption("logical_calibration", json!(LOGICAL_CALIBRATION)),
    ]
}

fn metadata(experiment: &str, cfg: &impl Serialize, seed: Option<u64>, extra: Vec<Value>) -> Value {
    let mut assumptions = common_assumptions();
    assumptions.extend(extra);
    json!({
        "tool": "pqec",
        "version": env!("CARGO_PKG_VERSION"),
        "model_version": MODEL_VERSION,
        "experiment": experiment,
        "seed": seed,
        "config": cfg,
        "assumptions": assumptions,
    })
}

fn code_of(d: usize, p: f64) -> Result<CodeParams, Failure> {
    Ok(CodeParams::new(d, p)?)
}

fn ansatz_circuit(kind: &str, n: usize, p: usize, params: Option<Vec<f64>>) -> Result<Circuit, Failure> {
    let kind = AnsatzKind::from_str(kind)?;
    let mut spec = AnsatzSpec::new(kind, n, p)?;
    if let Some(params) = params {
        spec = spec.with_params(params)?;
    }
    Ok(build_ansatz(&spec)?)
}

/// Seed from the config, or a fresh one recorded in the output metadata.
fn seed_or_auto(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let t = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        t ^ (std::process::id() as u64).rotate_left(32)
    })
}

fn threads() -> usize {
    std::env::var("PQEC_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Order-preserving parallel map over a bounded pool.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = threads().min(items.len()).max(1);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<R>>> = items.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("no poisoned slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("no poisoned slot").expect("every slot filled"))
        .collect()
}

fn report_csv(r: &FidelityReport) -> String {
    format!(
        "strategy,fidelity,gate,rz,measurement,memory,t_circ,qubits_used,stall_cycles,t_sources,t_count,over_budget\n\
         {},{:.9},{:.9},{:.9},{:.9},{:.9},{:.3},{},{:.3},{},{:.0},{}\n",
        r.strategy,
        r.fidelity,
        r.breakdown.gate,
        r.breakdown.rz,
        r.breakdown.measurement,
        r.breakdown.memory,
        r.t_circ,
        r.qubits_used,
        r.stall_cycles,
        r.t_sources,
        r.t_count,
        r.over_budget
    )
}

fn factory_assumptions(fs: &[FactorySpec]) -> Vec<Value> {
    let mut out = Vec::new();
    for f in fs {
        for (field, t) in [
            ("qubit_footprint", f.qubit_footprint),
            ("cycles_per_t", f.cycles_per_t),
            ("t_error", f.t_error),
        ] {
            if t.assumed {
                out.push(assumption(&format!("{}.{field}", f.name), json!(t.value)));
            }
        }
    }
    out
}

fn synthesis_assumptions(s: &SynthesisSpec) -> Vec<Value> {
    vec![
        assumption("synthesis.c1", json!(s.c1.value)),
        assumption("synthesis.c0", json!(s.c0.value)),
        assumption("synthesis.gate_factor", json!(s.gate_factor.value)),
        assumption("synthesis.depth_factor", json!(s.depth_factor.value)),
    ]
}

fn layout_assumptions() -> Vec<Value> {
    vec![
        assumption("proposed.magic_slots", json!("k+4")),
        assumption("comparison_layouts.cluster_costs", json!("fitted effective cycles")),
    ]
}

fn run_estimate(cfg: EstimateConfig) -> Result<Output, Failure> {
    let circuit = match &cfg.circuit {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure {
                code: 2,
                msg: format!("{path}: {e}"),
            })?;
            Circuit::from_json(&text)?
        }
        None => ansatz_circuit(&cfg.ansatz, cfg.n, cfg.p, cfg.params.clone())?,
    };
    let code = code_of(cfg.d, cfg.p_phys)?;
    let synthesis = SynthesisSpec::calibrated(cfg.epsilon)?;
    let mut extra = Vec::new();
    let strategy = match cfg.strategy.as_str() {
        "nisq" => StrategyConfig::Nisq {
            noise: NisqNoiseModel::from_p(cfg.p_phys)?,
        },
        "pqec" => {
            extra.extend(layout_assumptions());
            StrategyConfig::pqec_for(circuit.width(), code)?
        }
        "conventional" => {
            let f = factory_by_name(&cfg.factory)?;
            extra.extend(factory_assumptions(std::slice::from_ref(&f)));
            extra.extend(synthesis_assumptions(&synthesis));
            StrategyConfig::Conventional {
                factories: vec![f],
                synthesis,
                code,
                budget: cfg.budget,
                allow_over_budget: cfg.allow_over_budget,
            }
        }
        "cultivation" => {
            let (Some(cyc), Some(err)) = (cfg.cultivation_cycles, cfg.cultivation_error) else {
                return Err(Error::Config(
                    "cultivation needs cultivation_cycles and cultivation_error".into(),
                )
                .into());
            };
            let c = CultivationSpec::new(cyc, err)?;
            extra.push(assumption("cultivation.footprint_patches", json!(c.footprint_patches.value)));
            extra.extend(synthesis_assumptions(&synthesis));
            StrategyConfig::Cultivation {
                cultivation: c,
                synthesis,
                code,
                budget: cfg.budget,
                allow_over_budget: cfg.allow_over_budget,
            }
        }
        other => return Err(Error::Config(format!("unknown strategy {other:?}")).into()),
    };
    if circuit.width() > 0 && !matches!(strategy, StrategyConfig::Nisq { .. }) {
        let need = LayoutKind::Proposed { k: k_for(circuit.width()) }.total_patches()
            * pqec_core::noise::patch_physical_qubits(cfg.d);
        if need > cfg.budget && !cfg.allow_over_budget {
            return Err(Error::NoFit(format!(
                "{} logical qubits need {need} physical qubits, budget is {}",
                circuit.width(),
                cfg.budget
            ))
            .into());
        }
    }
    let r = estimate(&circuit, &strategy)?;
    Ok(Output {
        meta: metadata("estimate", &json!({ "resolved": cfg, "strategy": strategy }), None, extra),
        result: serde_json::to_value(&r).map_err(Error::from)?,
        csv: Some(report_csv(&r)),
        text: None,
    })
}

fn run_compare(cfg: CompareConfig) -> Result<Output, Failure> {
    let code = code_of(cfg.d, cfg.p_phys)?;
    let synthesis = SynthesisSpec::calibrated(cfg.epsilon)?;
    let factories: Vec<FactorySpec> = cfg
        .factories
        .iter()
        .map(|n| factory_by_name(n))
        .collect::<Result<_, _>>()?;
    let suite = fche_suite(&cfg.sizes)?;
    let rows = compare_strategies(&suite, &factories, &synthesis, code, cfg.budget)?;
    let mut extra = factory_assumptions(&factories);
    extra.extend(synthesis_assumptions(&synthesis));
    extra.extend(layout_assumptions());
    Ok(Output {
        meta: metadata(
            "compare",
            &json!({ "resolved": cfg, "factories": factories, "synthesis": synthesis }),
            None,
            extra,
        ),
        result: serde_json::to_value(&rows).map_err(Error::from)?,
        csv: Some(compare_csv(&rows)),
        text: None,
    })
}

fn run_schedule(cfg: ScheduleConfig) -> Result<Output, Failure> {
    let kind = AnsatzKind::from_str(&cfg.ansatz)?;
    let circuit = ansatz_circuit(&cfg.ansatz, cfg.n, cfg.p, None)?;
    let code = code_of(cfg.d, cfg.p_phys)?;
    let lk = match (cfg.layout.as_str(), cfg.k) {
        ("proposed", Some(k)) => LayoutKind::Proposed { k },
        (name, _) => LayoutKind::for_program(name, cfg.n)?,
    };
    let mut layout = LayoutSpec::new(lk, code)?;
    layout.magic_slots = cfg.magic_slots;
    let seed = cfg.stochastic.then(|| seed_or_auto(cfg.seed));
    let mode = match seed {
        Some(seed) => ScheduleMode::Stochastic { seed },
        None => ScheduleMode::Deterministic,
    };
    let s = schedule(&circuit, &layout, mode)?;
    let csv = format!("{METRICS_CSV_HEADER}\n{}\n", metrics_csv_row(cfg.n, kind, &s));
    let metrics = json!({
        "t_circ": s.t_circ,
        "t_rounds": s.t_rounds(),
        "n_circ": s.n_circ,
        "v_circ": s.v_circ,
        "packing_efficiency": s.packing_efficiency(),
        "layout_metrics": pqec_core::layout::layout_metrics(&layout),
    });
    let mut result = serde_json::to_value(&s).map_err(Error::from)?;
    result["metrics"] = metrics;
    Ok(Output {
        meta: metadata("schedule", &cfg, seed, layout_assumptions()),
        result,
        csv: Some(csv),
        text: Some(s.gantt()),
    })
}

fn run_shuffle(cfg: ShuffleConfig) -> Result<Output, Failure> {
    let seed = seed_or_auto(cfg.seed);
    let code = code_of(cfg.d, cfg.p)?;
    let rows = match &cfg.policy {
        Some(p) => vec![simulate_rus(cfg.theta, ShufflePolicy::from_str(p)?, &code, cfg.trials, seed)?],
        None => {
            let mut rows = vec![simulate_rus(cfg.theta, ShufflePolicy::WaitAndInject, &code, cfg.trials, seed)?];
            rows.extend(policy_spacetime(&code, cfg.trials, seed)?);
            rows
        }
    };
    let analytics = pqec_core::injection::analytics(cfg.p, cfg.d)?;
    Ok(Output {
        meta: metadata("shuffle-sim", &cfg, Some(seed), vec![]),
        result: json!({ "analytics": analytics, "policies": rows }),
        csv: Some(stats_csv(&rows)),
        text: None,
    })
}

fn run_vqe(cfg: VqeConfig) -> Result<Output, Failure> {
    let seed = seed_or_auto(cfg.seed);
    let h = match cfg.hamiltonian.as_str() {
        "ising" => Hamiltonian::ising(cfg.n, cfg.j)?,
        "heisenberg" => Hamiltonian::heisenberg(cfg.n, cfg.j)?,
        other => return Err(Error::Config(format!("unknown hamiltonian {other:?}")).into()),
    };
    let template = ansatz_circuit(&cfg.ansatz, cfg.n, cfg.p, None)?;
    let ga = GaConfig {
        population: cfg.population,
        generations: cfg.generations,
        mutation_rate: cfg.mutation_rate,
        elite_fraction: cfg.elite_fraction,
        seed,
        restarts: cfg.restarts,
        shots: cfg.shots,
        final_shots: cfg.final_shots,
        ..GaConfig::default()
    };
    ga.validate()?;
    let code = code_of(cfg.d, cfg.p_phys)?;
    let nisq = Regime::Nisq {
        noise: NisqNoiseModel::from_p(cfg.p_phys)?,
    };
    let pqec = Regime::Pqec { code };
    let regimes: Vec<Regime> = match cfg.regime.as_str() {
        "noiseless" => vec![Regime::Noiseless],
        "nisq" => vec![nisq],
        "pqec" => vec![pqec],
        "gamma" => vec![Regime::Noiseless, pqec, nisq],
        other => return Err(Error::Config(format!("unknown regime {other:?}")).into()),
    };
    let runs: Vec<RunRecord> = par_map(&regimes, |r| optimize(&h, &template, r, &ga))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let mut result = json!({ "runs": runs });
    let mut extra = vec![
        assumption("ga.defaults", json!(GaConfig::default())),
        assumption("pqec.noise", json!(PqecNoiseModel::from_code(&code)?)),
    ];
    extra.extend(layout_assumptions());
    if cfg.regime == "gamma" {
        let e0 = if cfg.n <= pqec_core::vqe::EXACT_LIMIT {
            json!({ "exact": exact_ground_energy(&h)?, "clifford": runs[0].best_energy })
        } else {
            json!({ "clifford": clifford_reference(&h, &template, &ga)? })
        };
        let g = gamma(runs[0].best_energy, runs[1].best_energy, runs[2].best_energy)?;
        result["reference"] = e0;
        result["gamma_pqec_over_nisq"] = serde_json::to_value(g).map_err(Error::from)?;
    }
    let csv = runs
        .iter()
        .map(|r| {
            r.trace_csv()
                .lines()
                .enumerate()
                .map(|(i, l)| if i == 0 { format!("regime,{l}") } else { format!("{},{l}", r.regime) })
                .collect::<Vec<_>>()
        })
        .enumerate()
        .flat_map(|(i, lines)| lines.into_iter().skip(usize::from(i > 0)))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    Ok(Output {
        meta: metadata("vqe", &cfg, Some(seed), extra),
        result,
        csv: Some(csv),
        text: None,
    })
}

fn run_win_matrix(cfg: WinMatrixConfig) -> Result<Output, Failure> {
    let code = code_of(cfg.d, cfg.p_phys)?;
    let synthesis = SynthesisSpec::calibrated(cfg.epsilon)?;
    let factories = builtin_factories();
    let rows: Vec<_> = par_map(&cfg.programs, |&n| win_matrix(&[n], &cfg.devices, &factories, &synthesis, code))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let m = pqec_core::estimator::WinMatrix {
        program_sizes: cfg.programs.clone(),
        device_sizes: cfg.devices.clone(),
        cells: rows.into_iter().flat_map(|r| r.cells).collect(),
    };
    let mut extra = factory_assumptions(&factories);
    extra.extend(synthesis_assumptions(&synthesis));
    Ok(Output {
        meta: metadata("win-matrix", &cfg, None, extra),
        result: serde_json::to_value(&m).map_err(Error::from)?,
        csv: Some(m.to_csv()),
        text: None,
    })
}

fn run_crossover(cfg: CrossoverConfig) -> Result<Output, Failure> {
    let kind = AnsatzKind::from_str(&cfg.ansatz)?;
    let code = code_of(cfg.d, cfg.p_phys)?;
    let scan = crossover_depth_scan(kind, &cfg.sizes, &cfg.depths, &NisqNoiseModel::from_p(cfg.p_phys)?, code)?;
    let mut csv = String::from("n,depth,nisq_fidelity,pqec_fidelity\n");
    for p in &scan.points {
        csv.push_str(&format!("{},{},{:.9},{:.9}\n", p.n, p.depth, p.nisq_fidelity, p.pqec_fidelity));
    }
    Ok(Output {
        meta: metadata("crossover", &cfg, None, layout_assumptions()),
        result: serde_json::to_value(&scan).map_err(Error::from)?,
        csv: Some(csv),
        text: None,
    })
}

fn flags_value(f: &impl Serialize) -> Value {
    serde_json::to_value(f).unwrap_or(Value::Null)
}

fn resolved_config(experiment: &str, files: &[PathBuf], flags: Value) -> Result<Value, Failure> {
    fn r<T: Default + Serialize + serde::de::DeserializeOwned>(
        e: &str,
        files: &[PathBuf],
        flags: Value,
    ) -> Result<Value, Failure> {
        let c: T = resolve(e, files, flags)?;
        Ok(serde_json::to_value(c).map_err(Error::from)?)
    }
    match experiment {
        "estimate" => r::<EstimateConfig>(experiment, files, flags),
        "compare" => r::<CompareConfig>(experiment, files, flags),
        "schedule" => r::<ScheduleConfig>(experiment, files, flags),
        "shuffle-sim" => r::<ShuffleConfig>(experiment, files, flags),
        "vqe" => r::<VqeConfig>(experiment, files, flags),
        "win-matrix" => r::<WinMatrixConfig>(experiment, files, flags),
        "crossover" => r::<CrossoverConfig>(experiment, files, flags),
        other => Err(Error::Config(format!("unknown experiment {other:?}")).into()),
    }
}

fn dispatch(cli: &Cli) -> Result<Option<Output>, Failure> {
    let files = &cli.config;
    let (experiment, flags) = match &cli.cmd {
        Cmd::Estimate(f) => ("estimate", flags_value(f)),
        Cmd::Compare(f) => ("compare", flags_value(f)),
        Cmd::Schedule(f) => ("schedule", flags_value(f)),
        Cmd::ShuffleSim(f) => ("shuffle-sim", flags_value(f)),
        Cmd::Vqe(f) => ("vqe", flags_value(f)),
        Cmd::WinMatrix(f) => ("win-matrix", flags_value(f)),
        Cmd::Crossover(f) => ("crossover", flags_value(f)),
        Cmd::PrintConfig { experiment } => {
            let v = resolved_config(experiment, files, Value::Null)?;
            emit(cli, &(serde_json::to_string_pretty(&v).map_err(Error::from)? + "\n"))?;
            return Ok(None);
        }
    };
    if cli.print_config {
        let v = resolved_config(experiment, files, flags)?;
        emit(cli, &(serde_json::to_string_pretty(&v).map_err(Error::from)? + "\n"))?;
        return Ok(None);
    }
    let out = match experiment {
        "estimate" => run_estimate(resolve(experiment, files, flags)?)?,
        "compare" => run_compare(resolve(experiment, files, flags)?)?,
        "schedule" => run_schedule(resolve(experiment, files, flags)?)?,
        "shuffle-sim" => run_shuffle(resolve(experiment, files, flags)?)?,
        "vqe" => run_vqe(resolve(experiment, files, flags)?)?,
        "win-matrix" => run_win_matrix(resolve(experiment, files, flags)?)?,
        _ => run_crossover(resolve(experiment, files, flags)?)?,
    };
    Ok(Some(out))
}

fn default_format(experiment: &Cmd) -> &'static str {
    match experiment {
        Cmd::Compare(_) | Cmd::ShuffleSim(_) | Cmd::WinMatrix(_) | Cmd::Crossover(_) => "csv",
        _ => "json",
    }
}

fn render(cli: &Cli, out: &Output) -> Result<String, Failure> {
    let format = cli.format.as_deref().unwrap_or(default_format(&cli.cmd));
    match format {
        "json" => {
            let doc = json!({ "metadata": out.meta, "result": out.result });
            Ok(serde_json::to_string_pretty(&doc).map_err(Error::from)? + "\n")
        }
        "csv" => {
            let Some(csv) = &out.csv else {
                return Err(Error::Config("this experiment has no CSV form".into()).into());
            };
            let meta = serde_json::to_string(&out.meta).map_err(Error::from)?;
            Ok(format!("# {meta}\n{csv}"))
        }
        "gantt" => out
            .text
            .clone()
            .ok_or_else(|| Error::Config("gantt output is only available for schedule".into()).into()),
        other => Err(Error::Config(format!("unknown format {other:?}")).into()),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(io_fail)?;
            so.flush().map_err(io_fail)
        }
        Some(path) => {
            let mut tmp = path.clone().into_os_string();
            tmp.push(format!(".tmp{}", std::process::id()));
            let tmp = PathBuf::from(tmp);
            std::fs::write(&tmp, text).map_err(io_fail)?;
            std::fs::rename(&tmp, path).map_err(|e| {
                let _ = std::fs::remove_file(&tmp);
                io_fail(e)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = dispatch(&cli).and_then(|out| match out {
        Some(out) => {
            let text = render(&cli, &out)?;
            emit(&cli, &text)
        }
        None => Ok(()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pqec: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_keeps_order() {
        let xs: Vec<u64> = (0..97).collect();
        assert_eq!(par_map(&xs, |x| x * x), xs.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(par_map(&[] as &[u8], |x| *x).is_empty());
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::NoFit("x".into())).code, 3);
        assert_eq!(Failure::from(Error::Config("x".into())).code, 2);
    }
}
