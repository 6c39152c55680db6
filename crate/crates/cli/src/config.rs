//! Resolved experiment configurations: defaults, then config files, then flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use pqec_core::Error;

/// Recursively overlays `top` onto `base`.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn load_file(path: &Path, experiment: &str) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(mut m) = v else {
        return Err(Error::Config(format!("{}: top level must be an object", path.display())));
    };
    if let Some(kind) = m.remove("experiment") {
        if kind.as_str() != Some(experiment) {
            return Err(Error::Config(format!(
                "{}: field `experiment` is {kind}, expected \"{experiment}\"",
                path.display()
            )));
        }
    }
    Ok(Value::Object(m))
}

/// Defaults of `T`, overlaid with each file and finally the flag overrides.
pub fn resolve<T>(experiment: &str, files: &[std::path::PathBuf], flags: Value) -> Result<T, Error>
where
    T: Default + Serialize + DeserializeOwned,
{
    let mut v = serde_json::to_value(T::default())?;
    for f in files {
        merge(&mut v, load_file(f, experiment)?);
    }
    if flags.is_object() {
        merge(&mut v, strip_nulls(flags));
    }
    serde_json::from_value(v).map_err(|e| Error::Config(format!("{experiment} config: {e}")))
}

fn strip_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| (k, strip_nulls(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub strategy: String,
    pub ansatz: String,
    pub n: usize,
    pub p: usize,
    /// Rotation angles in radians; zeros when absent.
    pub params: Option<Vec<f64>>,
    /// Circuit JSON file used instead of the ansatz.
    pub circuit: Option<String>,
    pub budget: usize,
    pub d: usize,
    pub p_phys: f64,
    pub factory: String,
    pub epsilon: f64,
    pub cultivation_cycles: Option<f64>,
    pub cultivation_error: Option<f64>,
    pub allow_over_budget: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            strategy: "pqec".into(),
            ansatz: "fche".into(),
            n: 16,
            p: 1,
            params: None,
            circuit: None,
            budget: 10_000,
            d: 11,
            p_phys: 1e-3,
            factory: "11,5,5".into(),
            epsilon: 1e-6,
            cultivation_cycles: None,
            cultivation_error: None,
            allow_over_budget: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub sizes: Vec<usize>,
    pub budget: usize,
    pub d: usize,
    pub p_phys: f64,
    pub epsilon: f64,
    pub factories: Vec<String>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            sizes: vec![12, 16, 20, 24],
            budget: 10_000,
            d: 11,
            p_phys: 1e-3,
            epsilon: 1e-6,
            factories: vec!["7,3,3".into(), "11,5,5".into(), "17,7,7".into()],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub ansatz: String,
    pub n: usize,
    pub p: usize,
    pub layout: String,
    /// Proposed-layout size; the smallest fitting k when absent.
    pub k: Option<usize>,
    pub magic_slots: Option<usize>,
    pub d: usize,
    pub p_phys: f64,
    pub stochastic: bool,
    pub seed: Option<u64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            ansatz: "blocked_all_to_all".into(),
            n: 20,
            p: 1,
            layout: "proposed".into(),
            k: None,
            magic_slots: None,
            d: 11,
            p_phys: 1e-3,
            stochastic: false,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShuffleConfig {
    /// One policy, or every policy when absent.
    pub policy: Option<String>,
    pub p: f64,
    pub d: usize,
    pub trials: usize,
    pub theta: f64,
    pub seed: Option<u64>,
}

impl Default for ShuffleConfig {
    fn default() -> Self {
        Self {
            policy: None,
            p: 1e-3,
            d: 11,
            trials: 100_000,
            theta: 0.1,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub hamiltonian: String,
    pub j: f64,
    pub ansatz: String,
    pub n: usize,
    pub p: usize,
    /// noiseless, nisq, pqec, or gamma (runs all three and reports γ).
    pub regime: String,
    pub p_phys: f64,
    pub d: usize,
    pub seed: Option<u64>,
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub elite_fraction: f64,
    pub restarts: usize,
    pub shots: usize,
    pub final_shots: usize,
}

impl Default for VqeConfig {
    fn default() -> Self {
        let ga = pqec_core::vqe::GaConfig::default();
        Self {
            hamiltonian: "ising".into(),
            j: 1.0,
            ansatz: "fche".into(),
            n: 4,
            p: 1,
            regime: "gamma".into(),
            p_phys: 1e-3,
            d: 11,
            seed: None,
            population: ga.population,
            generations: ga.generations,
            mutation_rate: ga.mutation_rate,
            elite_fraction: ga.elite_fraction,
            restarts: ga.restarts,
            shots: ga.shots,
            final_shots: ga.final_shots,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WinMatrixConfig {
    pub programs: Vec<usize>,
    pub devices: Vec<usize>,
    pub d: usize,
    pub p_phys: f64,
    pub epsilon: f64,
}

impl Default for WinMatrixConfig {
    fn default() -> Self {
        Self {
            programs: vec![8, 12, 16, 20, 24, 32, 40, 48, 64],
            devices: vec![5_000, 10_000, 20_000, 50_000, 100_000],
            d: 11,
            p_phys: 1e-3,
            epsilon: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossoverConfig {
    pub ansatz: String,
    pub sizes: Vec<usize>,
    pub depths: Vec<usize>,
    pub p_phys: f64,
    pub d: usize,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self {
            ansatz: "blocked_all_to_all".into(),
            sizes: (6..=24).step_by(2).collect(),
            depths: vec![1, 2, 4, 8, 16],
            p_phys: 1e-3,
            d: 11,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_files_override_defaults() {
        let dir = std::env::temp_dir().join(format!("pqec-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("a.json");
        std::fs::write(&f, r#"{"experiment":"compare","budget":20000,"sizes":[8]}"#).unwrap();
        let c: CompareConfig = resolve("compare", &[f.clone()], serde_json::json!({"sizes": [12], "d": null})).unwrap();
        assert_eq!(c.budget, 20_000);
        assert_eq!(c.sizes, vec![12]);
        assert_eq!(c.d, 11);
        std::fs::write(&f, r#"{"budgett":1}"#).unwrap();
        let e = resolve::<CompareConfig>("compare", &[f.clone()], Value::Null);
        assert!(matches!(e, Err(Error::Config(m)) if m.contains("budgett")));
        std::fs::write(&f, r#"{"experiment":"vqe"}"#).unwrap();
        assert!(resolve::<CompareConfig>("compare", &[f], Value::Null).is_err());
        std::fs::remove_dir_all(dir).ok();
    }
}
