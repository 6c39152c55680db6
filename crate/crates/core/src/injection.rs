//! Rz magic-state injection: post-selection analytics, repeat-until-success
//! consumption and the three ways of provisioning states to a data patch.
//!
//! Time inside this module is counted in injection trials (one trial is a physical
//! rotation followed by two stabilizer rounds). One consumption window lasts `2d`
//! trial slots, the bound used when comparing injection latency against consumption.
//! `trials_to_cycles` converts to clock cycles (d rounds per cycle).

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::CodeParams;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectionAnalytics {
    pub p_phys: f64,
    pub d: usize,
    pub p_pass: f64,
    pub expected_trials: f64,
    pub stddev: f64,
    pub n_trials: f64,
    /// P[X ≤ E[X] + σ[X]].
    pub p_within: f64,
    /// P[X ≤ 2d].
    pub p_within_window: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// n_trials ≤ 2d, i.e. a replacement is ready before the running consumption ends.
    pub shuffling_feasible: bool,
}

pub fn p_pass(p: f64, d: usize) -> f64 {
    let stabilizers = (d * d - 1) as f64;
    1.0 - 2.0 * p * (1.0 - p) * stabilizers
}

pub fn analytics(p_phys: f64, d: usize) -> Result<InjectionAnalytics> {
    if !(0.0..1.0).contains(&p_phys) {
        return Err(Error::InvalidParameter(format!("p_phys {p_phys} outside [0,1)")));
    }
    if d < 3 {
        return Err(Error::InvalidParameter(format!("distance {d} < 3")));
    }
    let pp = p_pass(p_phys, d);
    if pp <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "post-selection never passes at p={p_phys}, d={d}"
        )));
    }
    let q = 1.0 - pp;
    let expected = 1.0 / pp;
    let stddev = q.sqrt() / pp;
    let n_trials = expected + stddev;
    let df = d as f64;
    let c = (4.0 * df * df - 4.0 * df + 1.0) / (8.0 * df * df * (df * df - 1.0));
    let disc = (1.0 - 4.0 * c).sqrt();
    Ok(InjectionAnalytics {
        p_phys,
        d,
        p_pass: pp,
        expected_trials: expected,
        stddev,
        n_trials,
        p_within: 1.0 - q.powf(n_trials),
        p_within_window: 1.0 - q.powf(2.0 * df),
        c,
        alpha: (1.0 - disc) / 2.0,
        beta: (1.0 + disc) / 2.0,
        shuffling_feasible: n_trials <= 2.0 * df,
    })
}

pub fn consumption_window(d: usize) -> u64 {
    2 * d as u64
}

pub fn trials_to_cycles(trials: f64, d: usize) -> f64 {
    2.0 * trials / d as f64
}

/// `2^k·θ` reduced to [0, 2π).
pub fn doubled_angle(theta: f64, k: u32) -> f64 {
    let mut a = theta.rem_euclid(TAU);
    for _ in 0..k {
        a = (2.0 * a).rem_euclid(TAU);
    }
    a
}

/// Net rotation after a repeat-until-success chain, as an integer multiple of θ.
///
/// Attempt `k` (1-based) consumes `2^(k-1)·θ`; a failed attempt leaves the opposite
/// rotation behind, a successful one the intended rotation.
pub fn net_multiple(attempts: u32) -> Result<i128> {
    if attempts == 0 || attempts > 120 {
        return Err(Error::InvalidParameter(format!("attempt count {attempts}")));
    }
    let mut net: i128 = 0;
    for k in 1..attempts {
        net -= 1i128 << (k - 1);
    }
    net += 1i128 << (attempts - 1);
    Ok(net)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ShufflePolicy {
    WaitAndInject,
    Naive { b: usize },
    PatchShuffling,
}

impl ShufflePolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ShufflePolicy::Naive { b: 0 } => {
                Err(Error::InvalidParameter("naive policy needs b >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn magic_patches(&self) -> usize {
        match self {
            ShufflePolicy::WaitAndInject => 1,
            ShufflePolicy::Naive { b } => *b,
            ShufflePolicy::PatchShuffling => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShufflePolicy::WaitAndInject => "wait_and_inject",
            ShufflePolicy::Naive { .. } => "naive",
            ShufflePolicy::PatchShuffling => "patch_shuffling",
        }
    }

    fn backups(&self) -> usize {
        match self {
            ShufflePolicy::Naive { b } => *b,
            _ => 0,
        }
    }
}

impl fmt::Display for ShufflePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShufflePolicy::Naive { b } => write!(f, "naive({b})"),
            p => f.write_str(p.name()),
        }
    }
}

impl FromStr for ShufflePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "wait_and_inject" | "wait" => return Ok(ShufflePolicy::WaitAndInject),
            "patch_shuffling" | "shuffle" => return Ok(ShufflePolicy::PatchShuffling),
            _ => {}
        }
        let inner = s
            .strip_prefix("naive(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("naive:"));
        if let Some(b) = inner {
            let b: usize = b
                .parse()
                .map_err(|_| Error::Parse(format!("bad backup count in {s:?}")))?;
            let p = ShufflePolicy::Naive { b };
            p.validate()?;
            return Ok(p);
        }
        Err(Error::Parse(format!("unknown policy {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RusOutcome {
    pub attempts: u32,
    /// Angles of the consumed states, `2^(k-1)·θ mod 2π`.
    pub angles: Vec<f64>,
    pub net_multiple: i128,
    pub total_cycles: u64,
    pub stall_cycles: u64,
    /// Re-injections that had to finish inside a running consumption window, and how
    /// many of them did.
    pub windows: u32,
    pub windows_on_time: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub policy: ShufflePolicy,
    pub p_phys: f64,
    pub d: usize,
    pub trials: usize,
    pub mean_attempts: f64,
    pub mean_stall_cycles: f64,
    /// Mean magic patch-slots held per rotation.
    pub mean_volume: f64,
    pub stall_free_fraction: f64,
    /// Fraction of shuffling windows where the replacement state was ready in time
    /// (1 when no window occurred).
    pub on_time_fraction: f64,
    /// `hist[g-1]` = trials needing `g` attempts; the last bucket collects the tail.
    pub attempt_histogram: Vec<u64>,
}

const HIST_BUCKETS: usize = 16;

/// Trials until the first passing post-selection, at least 1.
fn injection_latency<R: rand::Rng>(pp: f64, rng: &mut R) -> u64 {
    if pp >= 1.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let x = (u.ln() / (1.0 - pp).ln()).ceil();
    (x as u64).max(1)
}

fn rus_trial<R: rand::Rng>(
    theta: f64,
    policy: ShufflePolicy,
    pp: f64,
    window: u64,
    rng: &mut R,
) -> Result<RusOutcome> {
    let mut attempts = 0u32;
    let mut stall = 0u64;
    let mut windows = 0u32;
    let mut on_time = 0u32;
    let backups = policy.backups();
    loop {
        attempts += 1;
        let k = attempts as usize;
        stall += match policy {
            ShufflePolicy::WaitAndInject => injection_latency(pp, rng),
            ShufflePolicy::Naive { .. } if k <= backups => 0,
            ShufflePolicy::Naive { .. } => injection_latency(pp, rng),
            ShufflePolicy::PatchShuffling if k <= 2 => 0,
            ShufflePolicy::PatchShuffling => {
                // Re-injected while the previous attempt was being consumed.
                let x = injection_latency(pp, rng);
                windows += 1;
                if x <= window {
                    on_time += 1;
                }
                x.saturating_sub(window)
            }
        };
        if rng.gen_bool(0.5) || attempts >= 120 {
            break;
        }
    }
    let angles = (0..attempts).map(|k| doubled_angle(theta, k)).collect();
    Ok(RusOutcome {
        attempts,
        angles,
        net_multiple: net_multiple(attempts)?,
        total_cycles: attempts as u64 * window + stall,
        stall_cycles: stall,
        windows,
        windows_on_time: on_time,
    })
}

/// One repeat-until-success chain; trial `index` uses its own random stream.
pub fn rus_outcome(
    theta: f64,
    policy: ShufflePolicy,
    code: &CodeParams,
    seed: u64,
    index: u64,
) -> Result<RusOutcome> {
    policy.validate()?;
    let a = analytics(code.p_phys, code.d)?;
    let mut r = rng::stream(seed, index);
    rus_trial(theta, policy, a.p_pass, consumption_window(code.d), &mut r)
}

pub fn simulate_rus(
    theta: f64,
    policy: ShufflePolicy,
    code: &CodeParams,
    trials: usize,
    seed: u64,
) -> Result<PipelineStats> {
    policy.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let a = analytics(code.p_phys, code.d)?;
    let window = consumption_window(code.d);
    let patches = policy.magic_patches() as f64;
    let mut hist = vec![0u64; HIST_BUCKETS];
    let (mut att, mut st, mut vol, mut free) = (0.0, 0.0, 0.0, 0usize);
    let (mut win, mut ok) = (0u64, 0u64);
    for t in 0..trials {
        let mut r = rng::stream(seed, t as u64);
        let o = rus_trial(theta, policy, a.p_pass, window, &mut r)?;
        att += o.attempts as f64;
        st += o.stall_cycles as f64;
        vol += patches * o.total_cycles as f64;
        if o.stall_cycles == 0 {
            free += 1;
        }
        win += o.windows as u64;
        ok += o.windows_on_time as u64;
        hist[(o.attempts as usize - 1).min(HIST_BUCKETS - 1)] += 1;
    }
    let n = trials as f64;
    Ok(PipelineStats {
        policy,
        p_phys: code.p_phys,
        d: code.d,
        trials,
        mean_attempts: att / n,
        mean_stall_cycles: st / n,
        mean_volume: vol / n,
        stall_free_fraction: free as f64 / n,
        on_time_fraction: if win == 0 { 1.0 } else { ok as f64 / win as f64 },
        attempt_histogram: hist,
    })
}

/// naive(1..=4) followed by patch shuffling, all with the same seed.
pub fn policy_spacetime(code: &CodeParams, trials: usize, seed: u64) -> Result<Vec<PipelineStats>> {
    let mut policies: Vec<ShufflePolicy> = (1..=4).map(|b| ShufflePolicy::Naive { b }).collect();
    policies.push(ShufflePolicy::PatchShuffling);
    policies
        .into_iter()
        .map(|p| simulate_rus(1.0, p, code, trials, seed))
        .collect()
}

pub fn stats_csv(rows: &[PipelineStats]) -> String {
    let mut s = String::from("policy,b,p_phys,d,mean_attempts,stall_free_fraction,mean_volume\n");
    for r in rows {
        let b = match r.policy {
            ShufflePolicy::Naive { b } => b.to_string(),
            _ => String::new(),
        };
        s.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6}\n",
            r.policy.name(),
            b,
            r.p_phys,
            r.d,
            r.mean_attempts,
            r.stall_free_fraction,
            r.mean_volume
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn post_selection_numbers() {
        let a = analytics(1e-3, 11).unwrap();
        assert!((a.n_trials - 1.959).abs() < 1e-3, "{}", a.n_trials);
        assert!((a.p_within - 0.9391).abs() < 5e-4, "{}", a.p_within);
        assert!((a.alpha - 0.00381).abs() < 2e-4);
        assert!((a.beta - 0.99619).abs() < 2e-4);
        assert!(a.alpha < a.beta && (a.alpha + a.beta - 1.0).abs() < 1e-12);
        assert!(a.shuffling_feasible);
        assert!(a.p_within_window >= a.p_within);
    }

    #[test]
    fn noiseless() {
        let a = analytics(0.0, 7).unwrap();
        assert_eq!(a.p_pass, 1.0);
        assert_eq!(a.n_trials, 1.0);
    }

    #[test]
    fn identity_chain() {
        for &(p, d) in &[(1e-4, 3usize), (1e-3, 11), (2e-3, 7), (5e-4, 21)] {
            let a = analytics(p, d).unwrap();
            let pp = 1.0 - 2.0 * p * (1.0 - p) * ((d * d - 1) as f64);
            assert!((a.p_pass - pp).abs() < 1e-12);
            assert!((a.expected_trials - 1.0 / pp).abs() < 1e-9);
            assert!((a.stddev - (1.0 - pp).sqrt() / pp).abs() < 1e-9);
            assert!((a.n_trials - (1.0 + (1.0 - pp).sqrt()) / pp).abs() < 1e-9);
            let pw = 1.0 - (1.0 - pp).powf((1.0 + (1.0 - pp).sqrt()) / pp);
            assert!((a.p_within - pw).abs() < 1e-9);
        }
    }

    #[test]
    fn feasibility_matches_quadratic() {
        for d in (3..=21).step_by(2) {
            let alpha = analytics(0.0, d).unwrap().alpha;
            for i in 1..400 {
                let p = i as f64 * 2.5e-5;
                let Ok(a) = analytics(p, d) else { continue };
                // Skip points where floating rounding decides the boundary.
                if (p - alpha).abs() < 1e-9 {
                    continue;
                }
                assert_eq!(a.shuffling_feasible, p <= alpha, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn angle_chain_telescopes() {
        for g in 1..=100 {
            assert_eq!(net_multiple(g).unwrap(), 1);
        }
        assert!((doubled_angle(0.3, 3) - 2.4).abs() < 1e-12);
        assert!((doubled_angle(1.0, 3) - (8.0f64).rem_euclid(TAU)).abs() < 1e-12);
    }

    #[test]
    fn attempts_are_fair_geometric() {
        let code = CodeParams::new(11, 1e-3).unwrap();
        let s = simulate_rus(0.7, ShufflePolicy::PatchShuffling, &code, 100_000, 1).unwrap();
        assert!((s.mean_attempts - 2.0).abs() < 0.02, "{}", s.mean_attempts);
        // chi-square against geometric(1/2) over buckets 1..=8 plus tail
        let n = s.trials as f64;
        let mut chi = 0.0;
        let mut tail_obs = 0.0;
        for (i, &o) in s.attempt_histogram.iter().enumerate() {
            if i < 8 {
                let e = n * 0.5f64.powi(i as i32 + 1);
                chi += (o as f64 - e).powi(2) / e;
            } else {
                tail_obs += o as f64;
            }
        }
        let e = n * 0.5f64.powi(8);
        chi += (tail_obs - e).powi(2) / e;
        // 8 degrees of freedom, p = 0.01 critical value 20.09
        assert!(chi < 20.09, "chi2 {chi}");
    }

    #[test]
    fn naive_four_stall_free() {
        let code = CodeParams::new(11, 1e-3).unwrap();
        let s = simulate_rus(0.7, ShufflePolicy::Naive { b: 4 }, &code, 100_000, 3).unwrap();
        assert!((s.stall_free_fraction - 0.9375).abs() < 0.005);
    }

    #[test]
    fn shuffling_on_time() {
        let code = CodeParams::new(11, 1e-3).unwrap();
        let s = simulate_rus(0.7, ShufflePolicy::PatchShuffling, &code, 50_000, 4).unwrap();
        assert!(s.on_time_fraction >= 0.9391);
        let z = CodeParams::new(11, 0.0).unwrap();
        let s = simulate_rus(0.7, ShufflePolicy::PatchShuffling, &z, 10_000, 4).unwrap();
        assert_eq!(s.mean_stall_cycles, 0.0);
    }

    #[test]
    fn volumes() {
        let code = CodeParams::new(11, 1e-3).unwrap();
        let rows = policy_spacetime(&code, 20_000, 5).unwrap();
        for w in rows[..4].windows(2) {
            assert!(w[1].mean_volume > w[0].mean_volume);
        }
        assert!(rows[4].mean_volume < rows[3].mean_volume);
        let csv = stats_csv(&rows);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("policy,b,p_phys,d,"));
    }

    #[test]
    fn policy_parse() {
        assert_eq!("naive(3)".parse::<ShufflePolicy>().unwrap(), ShufflePolicy::Naive { b: 3 });
        assert!("naive(0)".parse::<ShufflePolicy>().is_err());
        assert_eq!(
            "patch_shuffling".parse::<ShufflePolicy>().unwrap(),
            ShufflePolicy::PatchShuffling
        );
    }

    #[test]
    fn deterministic() {
        let code = CodeParams::new(11, 1e-3).unwrap();
        let a = simulate_rus(0.1, ShufflePolicy::WaitAndInject, &code, 1000, 9).unwrap();
        let b = simulate_rus(0.1, ShufflePolicy::WaitAndInject, &code, 1000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stall_free_fraction, 0.0);
    }
}
