//! Clifford-restricted VQE: a genetic algorithm over π/2-multiple angles, reference
//! energies and the relative-improvement metric γ.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Hamiltonian, Pauli, PauliString};
use crate::error::{Error, Result};
use crate::layout::{k_for, schedule, LayoutSpec, MacroOp, ScheduleMode};
use crate::noise::{logical_error_rate, CodeParams, NisqNoiseModel};
use crate::rng;
use crate::stab::{ideal_energy, noisy_energy, IdleSlot, NoiseMap, PauliChannel, TrajectoryConfig};

/// Largest width solved by dense diagonalization; wider registers use Lanczos.
pub const DENSE_LIMIT: usize = 8;
pub const EXACT_LIMIT: usize = 12;

fn pauli_masks(p: &PauliString) -> (usize, usize, usize) {
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
    for (q, l) in p.letters().iter().enumerate() {
        let (bx, bz) = l.bits();
        if bx {
            x |= 1 << q;
        }
        if bz {
            z |= 1 << q;
        }
        if *l == Pauli::Y {
            ny += 1;
        }
    }
    (x, z, ny)
}

/// Phase i^k for k mod 4.
fn i_pow(k: usize) -> Complex<f64> {
    match k % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

/// Dense Hamiltonian matrix; basis index bit q is qubit q.
pub fn hamiltonian_matrix(h: &Hamiltonian) -> Result<DMatrix<Complex<f64>>> {
    let n = h.width();
    if n > EXACT_LIMIT {
        return Err(Error::InvalidSize(format!("dense matrix limited to {EXACT_LIMIT} qubits")));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex::new(0.0, 0.0));
    for t in h.terms() {
        let (x, z, ny) = pauli_masks(&t.pauli);
        let base = i_pow(ny) * t.coeff * t.pauli.sign() as f64;
        for b in 0..dim {
            let s = if (b & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ x, b)] += base * s;
        }
    }
    Ok(m)
}

fn lanczos_min(h: &Hamiltonian) -> Result<f64> {
    let n = h.width();
    let dim = 1usize << n;
    let mut terms = Vec::new();
    for t in h.terms() {
        let (x, z, ny) = pauli_masks(&t.pauli);
        if ny % 2 == 1 {
            return Err(Error::InvalidParameter(
                "Lanczos path needs a real Hamiltonian (even number of Y per term)".into(),
            ));
        }
        let phase = if ny % 4 == 2 { -1.0 } else { 1.0 };
        terms.push((x, z, t.coeff * t.pauli.sign() as f64 * phase));
    }
    let apply = |v: &DVector<f64>| {
        let mut out = DVector::zeros(dim);
        for &(x, z, c) in &terms {
            for b in 0..dim {
                let s = if (b & z).count_ones() % 2 == 1 { -c } else { c };
                out[b ^ x] += s * v[b];
            }
        }
        out
    };
    // deterministic start vector with support on every basis state
    let mut v = DVector::from_fn(dim, |i, _| 1.0 + ((i * 7919) % 97) as f64 / 97.0);
    v /= v.norm();
    let steps = dim.min(160);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    basis.push(v);
    for j in 0..steps {
        let mut w = apply(&basis[j]);
        let a = w.dot(&basis[j]);
        alpha.push(a);
        // full reorthogonalization
        for _ in 0..2 {
            for u in &basis {
                let c = w.dot(u);
                w.axpy(-c, u, 1.0);
            }
        }
        let b = w.norm();
        if b < 1e-10 || j + 1 == steps {
            break;
        }
        beta.push(b);
        basis.push(w / b);
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    Ok(t.symmetric_eigen().eigenvalues.min())
}

/// Lowest eigenvalue: dense Hermitian eigensolve up to 8 qubits, Lanczos up to 12.
pub fn exact_ground_energy(h: &Hamiltonian) -> Result<f64> {
    let n = h.width();
    if n > EXACT_LIMIT {
        return Err(Error::InvalidSize(format!(
            "exact ground energy limited to {EXACT_LIMIT} qubits; use clifford_reference for {n}"
        )));
    }
    if n <= DENSE_LIMIT {
        let m = hamiltonian_matrix(h)?;
        return Ok(m.symmetric_eigen().eigenvalues.min());
    }
    lanczos_min(h)
}

/// Angles in units of π/2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordParams(pub Vec<u8>);

impl CliffordParams {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn angles(&self) -> Vec<f64> {
        self.0.iter().map(|&k| (k % 4) as f64 * FRAC_PI_2).collect()
    }

    /// Mixed-radix index over {0,1,2,3}^len.
    pub fn from_index(mut idx: u64, len: usize) -> Self {
        let mut v = vec![0u8; len];
        for g in v.iter_mut() {
            *g = (idx % 4) as u8;
            idx /= 4;
        }
        Self(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub elite_fraction: f64,
    pub seed: u64,
    pub restarts: usize,
    pub tournament: usize,
    /// Shots per fitness evaluation in noisy regimes.
    pub shots: usize,
    /// Shots used to re-score the champion.
    pub final_shots: usize,
    /// Coordinate-descent polish of each restart's champion (noiseless regime only).
    #[serde(default = "yes")]
    pub polish: bool,
}

fn yes() -> bool {
    true
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 200,
            mutation_rate: 0.05,
            elite_fraction: 0.1,
            seed: 0,
            restarts: 3,
            tournament: 3,
            shots: 256,
            final_shots: 4096,
            polish: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("population must be >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) || !(0.0..=1.0).contains(&self.elite_fraction) {
            return Err(Error::Config("mutation and elite rates must lie in [0,1]".into()));
        }
        if self.restarts == 0 || self.tournament == 0 || self.shots == 0 || self.final_shots == 0 {
            return Err(Error::Config("restarts, tournament and shot counts must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Noiseless,
    Nisq { noise: NisqNoiseModel },
    Pqec { code: CodeParams },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Noiseless => "noiseless",
            Regime::Nisq { .. } => "nisq",
            Regime::Pqec { .. } => "pqec",
        }
    }

    pub fn nisq_default() -> Self {
        Regime::Nisq {
            noise: NisqNoiseModel::from_p(1e-3).expect("valid rate"),
        }
    }

    pub fn pqec_default() -> Self {
        Regime::Pqec {
            code: CodeParams::default_eft(),
        }
    }
}

fn combine(p: f64, times: u64) -> f64 {
    1.0 - (1.0 - p).powi(times as i32)
}

/// Channel map for `regime` on `circuit`. The pQEC map charges extra consumption
/// attempts and scheduled idle cycles as slots after the relevant gates.
pub fn noise_map(circuit: &Circuit, regime: &Regime, mode: ScheduleMode) -> Result<NoiseMap> {
    match regime {
        Regime::Noiseless => Ok(NoiseMap::noiseless()),
        Regime::Nisq { noise } => NoiseMap::depolarizing(noise.p_1q, noise.p_cnot, noise.p_rz, noise.p_meas),
        Regime::Pqec { code } => {
            let pl = logical_error_rate(code)?;
            let pinj = crate::noise::injection_error(code.p_phys);
            let mut map = NoiseMap::depolarizing(pl, pl, pinj, pl)?;
            let layout = LayoutSpec::proposed(k_for(circuit.width()), *code)?;
            let s = schedule(circuit, &layout, mode)?;
            let mut first_gate = vec![None; circuit.width()];
            for (i, g) in circuit.gates().iter().enumerate() {
                for q in g.qubits() {
                    first_gate[q].get_or_insert(i);
                }
            }
            for op in &s.timeline {
                if let MacroOp::RzConsume { qubit, attempts, .. } = op.op {
                    // the Rz channel covers one attempt; the rest go here
                    if attempts > 1 {
                        map.idle.push(IdleSlot {
                            after_gate: op.gates[0],
                            qubit,
                            channel: PauliChannel::depolarizing1(combine(pinj, attempts - 1))?,
                        });
                    }
                }
            }
            for gap in &s.idle_gaps {
                let Some(after) = gap.after_gate.or(first_gate[gap.qubit]) else {
                    continue;
                };
                map.idle.push(IdleSlot {
                    after_gate: after,
                    qubit: gap.qubit,
                    channel: PauliChannel::depolarizing1(combine(pl, gap.cycles))?,
                });
            }
            Ok(map)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub regime: String,
    pub restart: usize,
    pub best_params: CliffordParams,
    /// Champion energy: exact when noiseless, re-scored with `final_shots` otherwise.
    pub best_energy: f64,
    pub best_std_err: f64,
    /// Fitness the champion had during selection.
    pub selection_energy: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

impl RunRecord {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("generation,best,mean\n");
        for t in &self.trace {
            s.push_str(&format!("{},{:.9},{:.9}\n", t.generation, t.best, t.mean));
        }
        s
    }
}

struct Evaluator<'a> {
    template: &'a Circuit,
    h: &'a Hamiltonian,
    map: NoiseMap,
    noisy: bool,
    shots: usize,
}

impl Evaluator<'_> {
    fn energy(&self, p: &CliffordParams, seed: u64) -> Result<f64> {
        let c = self.template.with_rz_angles(&p.angles())?;
        if !self.noisy {
            return ideal_energy(&c, self.h);
        }
        Ok(noisy_energy(
            &c,
            self.h,
            &self.map,
            TrajectoryConfig {
                shots: self.shots,
                seed,
            },
        )?
        .mean)
    }
}

fn tournament(fit: &[f64], size: usize, r: &mut rng::Rng) -> usize {
    let mut best = r.gen_range(0..fit.len());
    for _ in 1..size {
        let c = r.gen_range(0..fit.len());
        if fit[c] < fit[best] {
            best = c;
        }
    }
    best
}

fn run_once(ev: &Evaluator, len: usize, ga: &GaConfig, restart: usize) -> Result<(CliffordParams, f64, usize, Vec<TracePoint>)> {
    let base = ga.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut r = rng::stream(base, u64::MAX);
    let pop_n = ga.population;
    let mut pop: Vec<CliffordParams> = Vec::with_capacity(pop_n);
    // seed the population with the all-zero point (identity layers)
    pop.push(CliffordParams::zeros(len));
    while pop.len() < pop_n {
        pop.push(CliffordParams((0..len).map(|_| r.gen_range(0..4u8)).collect()));
    }
    let eval_seed = |g: usize, i: usize| -> u64 {
        use rand::RngCore;
        rng::stream2(base, g as u64, i as u64).next_u64()
    };
    let mut fit: Vec<f64> = pop
        .iter()
        .enumerate()
        .map(|(i, p)| ev.energy(p, eval_seed(0, i)))
        .collect::<Result<_>>()?;
    let mut evals = pop_n;
    let elite = ((ga.elite_fraction * pop_n as f64).round() as usize).clamp(1, pop_n);
    let mut trace = Vec::with_capacity(ga.generations + 1);
    let push_trace = |g: usize, fit: &[f64], trace: &mut Vec<TracePoint>| {
        let best = fit.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = fit.iter().sum::<f64>() / fit.len() as f64;
        trace.push(TracePoint {
            generation: g,
            best,
            mean,
        });
    };
    push_trace(0, &fit, &mut trace);
    for g in 1..=ga.generations {
        let mut order: Vec<usize> = (0..pop_n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let mut next: Vec<CliffordParams> = order[..elite].iter().map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..elite].iter().map(|&i| fit[i]).collect();
        while next.len() < pop_n {
            let a = &pop[tournament(&fit, ga.tournament, &mut r)];
            let b = &pop[tournament(&fit, ga.tournament, &mut r)];
            let cut = if len > 1 { r.gen_range(1..len) } else { 0 };
            let mut child: Vec<u8> = a.0[..cut].iter().chain(&b.0[cut..]).copied().collect();
            for gene in child.iter_mut() {
                if r.gen_bool(ga.mutation_rate) {
                    *gene = (*gene + if r.gen_bool(0.5) { 1 } else { 3 }) % 4;
                }
            }
            let child = CliffordParams(child);
            next_fit.push(ev.energy(&child, eval_seed(g, next.len()))?);
            next.push(child);
            evals += 1;
        }
        pop = next;
        fit = next_fit;
        push_trace(g, &fit, &mut trace);
    }
    let (bi, &bf) = fit
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty population");
    let (mut champ, mut cf) = (pop[bi].clone(), bf);
    if ga.polish && !ev.noisy {
        loop {
            let mut improved = false;
            for i in 0..len {
                for step in 1..4u8 {
                    let mut cand = champ.clone();
                    cand.0[i] = (cand.0[i] + step) % 4;
                    let e = ev.energy(&cand, 0)?;
                    evals += 1;
                    if e < cf - 1e-12 {
                        champ = cand;
                        cf = e;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if let Some(last) = trace.last_mut() {
            last.best = last.best.min(cf);
        }
    }
    Ok((champ, cf, evals, trace))
}

/// Best of `ga.restarts` GA runs for `template` (its Rz angles are the genes).
pub fn optimize(h: &Hamiltonian, template: &Circuit, regime: &Regime, ga: &GaConfig) -> Result<RunRecord> {
    ga.validate()?;
    if template.width() != h.width() {
        return Err(Error::WidthMismatch {
            expected: h.width(),
            got: template.width(),
        });
    }
    let len = template.count(|g| matches!(g, Gate::Rz(..)));
    let noisy = !matches!(regime, Regime::Noiseless);
    let ev = Evaluator {
        template,
        h,
        map: noise_map(template, regime, ScheduleMode::Deterministic)?,
        noisy,
        shots: ga.shots,
    };
    let mut best: Option<(usize, CliffordParams, f64, Vec<TracePoint>)> = None;
    let mut evaluations = 0;
    for restart in 0..ga.restarts {
        let (p, f, e, trace) = run_once(&ev, len, ga, restart)?;
        evaluations += e;
        if best.as_ref().is_none_or(|b| f < b.2) {
            best = Some((restart, p, f, trace));
        }
    }
    let (restart, params, sel, trace) = best.expect("at least one restart");
    let (energy, err) = if noisy {
        let c = template.with_rz_angles(&params.angles())?;
        let map = noise_map(&c, regime, ScheduleMode::Stochastic { seed: ga.seed })?;
        let e = noisy_energy(
            &c,
            h,
            &map,
            TrajectoryConfig {
                shots: ga.final_shots,
                seed: ga.seed ^ 0xC0FF_EE00,
            },
        )?;
        (e.mean, e.std_err)
    } else {
        (sel, 0.0)
    };
    Ok(RunRecord {
        seed: ga.seed,
        regime: regime.name().into(),
        restart,
        best_params: params,
        best_energy: energy,
        best_std_err: err,
        selection_energy: sel,
        evaluations,
        trace,
    })
}

/// Lowest noiseless stabilizer energy the GA finds over the template's Rz angles.
pub fn clifford_reference(h: &Hamiltonian, template: &Circuit, ga: &GaConfig) -> Result<f64> {
    Ok(optimize(h, template, &Regime::Noiseless, ga)?.best_energy)
}

/// Exhaustive minimum over all 4^k angle assignments (k ≤ 10).
pub fn brute_force_clifford(h: &Hamiltonian, template: &Circuit) -> Result<(CliffordParams, f64)> {
    let len = template.count(|g| matches!(g, Gate::Rz(..)));
    if len > 10 {
        return Err(Error::InvalidSize(format!("{len} parameters is too many to enumerate")));
    }
    let mut best = (CliffordParams::zeros(len), f64::INFINITY);
    for idx in 0..4u64.pow(len as u32) {
        let p = CliffordParams::from_index(idx, len);
        let e = ideal_energy(&template.with_rz_angles(&p.angles())?, h)?;
        if e < best.1 - 1e-12 {
            best = (p, e);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub e0: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub gamma: f64,
}

/// γ = (E0 − E_B)/(E0 − E_A).
pub fn gamma(e0: f64, e_a: f64, e_b: f64) -> Result<GammaReport> {
    let den = e0 - e_a;
    if den.abs() < 1e-12 {
        return Err(Error::DivisionByZero(format!(
            "E_A = {e_a} equals the reference energy E0 = {e0}; gamma is undefined"
        )));
    }
    Ok(GammaReport {
        e0,
        e_a,
        e_b,
        gamma: (e0 - e_b) / den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_ansatz, AnsatzKind, AnsatzSpec};
    use crate::oracle::StateVector;

    fn template(kind: AnsatzKind, n: usize, p: usize) -> Circuit {
        build_ansatz(&AnsatzSpec::new(kind, n, p).unwrap()).unwrap()
    }

    #[test]
    fn exact_two_site() {
        let e = exact_ground_energy(&Hamiltonian::ising(2, 1.0).unwrap()).unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-10);
        let e = exact_ground_energy(&Hamiltonian::heisenberg(2, 1.0).unwrap()).unwrap();
        assert!((e + 3.0).abs() < 1e-10);
        let e = exact_ground_energy(&Hamiltonian::ising(2, 0.0).unwrap()).unwrap();
        assert!((e + 2.0).abs() < 1e-10);
    }

    #[test]
    fn lanczos_matches_dense() {
        for n in [4, 6, 8] {
            for h in [Hamiltonian::ising(n, 0.7).unwrap(), Hamiltonian::heisenberg(n, 1.3).unwrap()] {
                let d = hamiltonian_matrix(&h).unwrap().symmetric_eigen().eigenvalues.min();
                let l = lanczos_min(&h).unwrap();
                assert!((d - l).abs() < 1e-8, "n={n} {d} {l}");
            }
        }
    }

    #[test]
    fn matrix_matches_statevector() {
        let h = Hamiltonian::heisenberg(3, 0.6).unwrap();
        let m = hamiltonian_matrix(&h).unwrap();
        let spec = AnsatzSpec::new(AnsatzKind::Fche, 3, 1)
            .unwrap()
            .with_params(vec![0.3, 1.1, -0.4, 0.9, 2.0, 0.1])
            .unwrap();
        let sv = StateVector::run(&build_ansatz(&spec).unwrap()).unwrap();
        let v = DVector::from_vec(sv.amplitudes().to_vec());
        let e = (v.adjoint() * &m * &v)[(0, 0)].re;
        let direct: f64 = h.terms().iter().map(|t| t.coeff * sv.expectation(&t.pauli)).sum();
        assert!((e - direct).abs() < 1e-10);
    }

    #[test]
    fn brute_force_two_site() {
        let (_, e) = brute_force_clifford(&Hamiltonian::ising(2, 1.0).unwrap(), &template(AnsatzKind::Linear, 2, 1)).unwrap();
        assert!((e + 2.0).abs() < 1e-12);
        let (_, e) =
            brute_force_clifford(&Hamiltonian::heisenberg(2, 1.0).unwrap(), &template(AnsatzKind::Linear, 2, 1)).unwrap();
        assert!((e + 3.0).abs() < 1e-12);
    }

    #[test]
    fn identity_ansatz_energy() {
        let h = Hamiltonian::ising(3, 0.5).unwrap();
        let c = template(AnsatzKind::Linear, 3, 1);
        assert!((ideal_energy(&c, &h).unwrap() - 3.0).abs() < 1e-12);
    }

    fn small_ga(seed: u64) -> GaConfig {
        GaConfig {
            population: 24,
            generations: 40,
            seed,
            ..GaConfig::default()
        }
    }

    #[test]
    fn ga_finds_small_optima() {
        let h = Hamiltonian::heisenberg(2, 1.0).unwrap();
        let r = optimize(&h, &template(AnsatzKind::Fche, 2, 1), &Regime::Noiseless, &small_ga(1)).unwrap();
        assert!((r.best_energy + 3.0).abs() < 1e-12);
        for w in r.trace.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
        let h = Hamiltonian::ising(2, 1.0).unwrap();
        let r = optimize(&h, &template(AnsatzKind::Fche, 2, 1), &Regime::Noiseless, &small_ga(2)).unwrap();
        assert!((r.best_energy + 2.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_not_below_optimum() {
        let h = Hamiltonian::ising(4, 1.0).unwrap();
        let t = template(AnsatzKind::Fche, 4, 1);
        let ga = small_ga(3);
        let opt = clifford_reference(&h, &t, &ga).unwrap();
        for regime in [Regime::pqec_default(), Regime::nisq_default()] {
            let r = optimize(&h, &t, &regime, &ga).unwrap();
            assert!(r.best_energy >= opt - 4.0 * r.best_std_err - 1e-9, "{regime:?}");
        }
    }

    #[test]
    fn deterministic_runs() {
        let h = Hamiltonian::ising(3, 1.0).unwrap();
        let t = template(AnsatzKind::Linear, 3, 1);
        let a = optimize(&h, &t, &Regime::nisq_default(), &small_ga(5)).unwrap();
        let b = optimize(&h, &t, &Regime::nisq_default(), &small_ga(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.trace_csv().starts_with("generation,best,mean\n"));
    }

    #[test]
    fn gamma_formula() {
        assert!((gamma(-2.0, -1.5, -1.0).unwrap().gamma - 2.0).abs() < 1e-12);
        assert!((gamma(-2.0, -1.3, -1.3).unwrap().gamma - 1.0).abs() < 1e-12);
        assert!((gamma(-2.2361, -2.0, -1.0).unwrap().gamma - 1.2361 / 0.2361).abs() < 1e-9);
        assert!(matches!(gamma(-2.0, -2.0, -1.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn width_mismatch() {
        let h = Hamiltonian::ising(3, 1.0).unwrap();
        assert!(optimize(&h, &template(AnsatzKind::Linear, 4, 1), &Regime::Noiseless, &small_ga(0)).is_err());
    }
}
