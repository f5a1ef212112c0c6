//! Flat `key = value` experiment configs.
//!
//! A config names one experiment and overrides any of that experiment's
//! parameters; every other key is rejected. Arrays of numbers are the only
//! compound values, and tables are refused.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use carlemanlab_core::field::io::sha256_hex;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    VerifyMatrixLemma,
    VerifyCommutator,
    VerifyWeighted,
    VerifyCz,
    ApProbe,
    NseShear,
    NseAxisym,
    NseSeparation,
    Example13,
    CutoffStudy,
}

#[derive(Clone, Copy, Debug)]
pub enum Preset {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(&'static str),
    Floats(&'static [f64]),
    Ints(&'static [i64]),
}

#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: Preset,
    pub doc: &'static str,
}

const fn key(name: &'static str, default: Preset, doc: &'static str) -> KeySpec {
    KeySpec { name, default, doc }
}

use Preset::{Bool, Float, Floats, Int, Ints, Text};

const MATRIX_LEMMA: &[KeySpec] = &[
    key("matrices", Int(1000), "random matrices per shape class"),
    key("vectors", Int(100), "random vectors per matrix"),
    key("min_dim", Int(2), "smallest matrix dimension"),
    key("max_dim", Int(16), "largest matrix dimension"),
];

const COMMUTATOR: &[KeySpec] = &[
    key("dims", Ints(&[2, 3]), "spatial dimensions"),
    key("k_values", Floats(&[0.0, 1.0, 2.0]), "decay exponents"),
    key("bumps", Int(20), "seeded bump superpositions per (dim, k)"),
    key("n", Int(48), "grid points per axis"),
    key("steps", Int(64), "time steps on [T-, T+]"),
    key("length", Float(4.0), "box side"),
    key("a", Float(10.0), "Carleman parameter"),
    key("refine", Bool(true), "also evaluate at (2n, 2 steps) and report the order"),
    key("refined_bumps_3d", Int(1), "bumps refined in 3D; 2D refines all of them"),
];

const WEIGHTED: &[KeySpec] = &[
    key("dim", Int(3), "spatial dimension"),
    key("n", Int(48), "grid points per axis"),
    key("steps", Int(64), "time steps on [T-, T+]"),
    key("length", Float(8.0), "box side"),
    key("a_values", Floats(&[10.0, 100.0, 1000.0, 10000.0]), "Carleman parameters"),
    key("k_values", Floats(&[2.0]), "decay exponents"),
    key("convention", Text("single_k"), "spatial exponent: single_k or double_k"),
    key("refine", Bool(false), "rerun on (2n, 2 steps) and check resolved rows"),
];

const CZ: &[KeySpec] = &[
    key("dim", Int(3), "spatial dimension"),
    key("n", Int(48), "grid points per axis"),
    key("fine_n", Int(96), "grid points per axis for the refinement check"),
    key("length", Float(8.0), "box side"),
    key("k_values", Floats(&[0.0, 1.0, 2.0, 2.4]), "decay exponents"),
    key("members", Int(4), "seeded bump tensors"),
    key("noise_fields", Int(3), "seeded mean-free smooth tensors checked at k = 0"),
    key("refine", Bool(true), "check refinement stability at fine_n"),
];

const AP_PROBE: &[KeySpec] = &[
    key("dim", Int(3), "spatial dimension"),
    key("n", Int(32), "grid points per axis"),
    key("box_factor", Float(4.0), "box side over plateau radius"),
    key("radii", Floats(&[2.0, 4.0, 8.0]), "plateau radii"),
    key("k_values", Floats(&[0.0, 1.0, 2.0, 2.4]), "decay exponents"),
];

const SHEAR: &[KeySpec] = &[
    key("n", Int(32), "grid points per axis for the shear run"),
    key("dt", Float(1e-3), "shear time step"),
    key("total_time", Float(1.0), "shear final time"),
    key("order_n", Int(16), "grid for the step-halving study"),
    key("order_amplitude", Float(4.0), "Taylor-Green amplitude for the step-halving study"),
    key("order_time", Float(0.2), "final time of the step-halving study"),
    key("order_steps", Ints(&[8, 16, 32]), "step counts compared against the reference"),
    key("reference_steps", Int(512), "step count of the reference run"),
    key("picard_n", Int(16), "grid for the Picard iteration"),
    key("picard_amplitude", Float(0.5), "Taylor-Green amplitude for the Picard iteration"),
    key("picard_horizon", Float(0.1), "Picard time horizon"),
    key("picard_dt", Float(0.01), "Picard quadrature step"),
    key("picard_iterations", Int(6), "Picard iterations"),
];

const AXISYM: &[KeySpec] = &[
    key("n", Int(48), "grid points per axis"),
    key("length", Float(8.0), "box side"),
    key("amplitude", Float(2.0), "amplitude of the Gaussian stream function"),
    key("width", Float(1.0), "width of the Gaussian stream function"),
    key("dt", Float(0.005), "time step"),
    key("total_time", Float(0.5), "final time"),
    key("scheme", Text("rk2"), "rk2 or rk4"),
    key("store_every", Int(50), "checkpoint stride in steps; 0 stores the end points only"),
];

const SEPARATION: &[KeySpec] = &[
    key("n", Int(24), "grid points per axis"),
    key("length", Float(8.0), "box side"),
    key("amplitude", Float(1.0), "amplitude of the axisymmetric base flow"),
    key("width", Float(1.0), "width of the axisymmetric base flow"),
    key("perturbation", Float(0.05), "L2 size of the swirl perturbation"),
    key("perturbation_center", Floats(&[0.8, 0.4, 0.0]), "center of the perturbation"),
    key("perturbation_radius", Float(0.6), "radius of the perturbation"),
    key("dt", Float(0.01), "time step"),
    key("total_time", Float(0.2), "final time"),
    key("k", Float(2.0), "decay exponent of the distance weight"),
    key("scheme", Text("rk2"), "rk2 or rk4"),
];

const EXAMPLE: &[KeySpec] = &[
    key("samples", Int(10_000), "sampled (x, t) points"),
    key("t_final", Float(1.0), "time at which the flow vanishes"),
    key("extent", Float(1.0), "spatial samples come from [-extent, extent]^3"),
    key("pressure_scale", Float(1.0), "pressure multiplier; 1 is the exact solution"),
];

const CUTOFF: &[KeySpec] = &[
    key("dim", Int(3), "spatial dimension"),
    key("n", Int(48), "grid points per axis"),
    key("length", Float(40.0), "box side"),
    key("steps", Int(16), "time steps on [T-, T+]"),
    key("a", Float(10.0), "Carleman parameter"),
    key("k", Float(2.0), "decay exponent"),
    key("m_values", Floats(&[1.0, 2.0, 4.0, 8.0]), "cutoff radii, increasing"),
];

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Self::VerifyMatrixLemma,
        Self::VerifyCommutator,
        Self::VerifyWeighted,
        Self::VerifyCz,
        Self::ApProbe,
        Self::NseShear,
        Self::NseAxisym,
        Self::NseSeparation,
        Self::Example13,
        Self::CutoffStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyMatrixLemma => "verify-matrix-lemma",
            Self::VerifyCommutator => "verify-commutator",
            Self::VerifyWeighted => "verify-weighted",
            Self::VerifyCz => "verify-cz",
            Self::ApProbe => "ap-probe",
            Self::NseShear => "nse-shear",
            Self::NseAxisym => "nse-axisym",
            Self::NseSeparation => "nse-separation",
            Self::Example13 => "example-1-3",
            Self::CutoffStudy => "cutoff-study",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::VerifyMatrixLemma => "commutator lemma on random dense, symmetric, skew and nilpotent matrices",
            Self::VerifyCommutator => "direct against explicit [J,K] on seeded bumps, with refinement order",
            Self::VerifyWeighted => "weighted estimate ratios over the standard family, swept over the Carleman parameter a",
            Self::VerifyCz => "weighted divergence-structure estimate on seeded bump tensors",
            Self::ApProbe => "plateau probe of the plain Riesz transform under the power weight",
            Self::NseShear => "shear decay, step-halving orders and Picard contraction",
            Self::NseAxisym => "swirl-free axisymmetric data keeps its symmetry",
            Self::NseSeparation => "weighted distance between two nearby solutions",
            Self::Example13 => "spatially constant flow that stops at a finite time",
            Self::CutoffStudy => "cutoff radius study for bounded test functions",
        }
    }

    /// Randomized experiments refuse to run without a seed.
    pub fn randomized(self) -> bool {
        matches!(
            self,
            Self::VerifyMatrixLemma | Self::VerifyCommutator | Self::VerifyWeighted | Self::VerifyCz | Self::Example13
        )
    }

    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            Self::VerifyMatrixLemma => MATRIX_LEMMA,
            Self::VerifyCommutator => COMMUTATOR,
            Self::VerifyWeighted => WEIGHTED,
            Self::VerifyCz => CZ,
            Self::ApProbe => AP_PROBE,
            Self::NseShear => SHEAR,
            Self::NseAxisym => AXISYM,
            Self::NseSeparation => SEPARATION,
            Self::Example13 => EXAMPLE,
            Self::CutoffStudy => CUTOFF,
        }
    }
}

/// TOML spelling of a default, as printed by `list-experiments`.
impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int(v) => write!(f, "{v}"),
            Float(v) => write!(f, "{v:?}"),
            Bool(v) => write!(f, "{v}"),
            Text(v) => write!(f, "{v:?}"),
            Floats(v) => write!(f, "{v:?}"),
            Ints(v) => write!(f, "{v:?}"),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Floats(Vec<f64>),
    Ints(Vec<i64>),
}

impl Value {
    fn from_default(d: Preset) -> Self {
        match d {
            Int(v) => Value::Int(v),
            Float(v) => Value::Float(v),
            Bool(v) => Value::Bool(v),
            Text(v) => Value::Text(v.to_string()),
            Floats(v) => Value::Floats(v.to_vec()),
            Ints(v) => Value::Ints(v.to_vec()),
        }
    }

    /// Shortest round-trip text, used for fingerprints and descriptions.
    fn canonical(&self) -> String {
        let list = |v: Vec<String>| format!("[{}]", v.join(","));
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format!("{v:e}"),
            Value::Bool(v) => v.to_string(),
            Value::Text(v) => v.clone(),
            Value::Floats(v) => list(v.iter().map(|x| format!("{x:e}")).collect()),
            Value::Ints(v) => list(v.iter().map(|x| x.to_string()).collect()),
        }
    }
}

/// Converts a TOML value to the type of `default`; integers are accepted where floats are expected.
fn coerce(name: &str, default: Preset, v: &toml::Value) -> Result<Value> {
    let num = |x: &toml::Value| match x {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        _ => None,
    };
    let wrong = |what: &str| CliError::config(name, format!("expected {what}, got {v}"));
    Ok(match (default, v) {
        (Int(_), toml::Value::Integer(i)) => Value::Int(*i),
        (Int(_), _) => return Err(wrong("an integer")),
        (Float(_), x) => Value::Float(num(x).ok_or_else(|| wrong("a number"))?),
        (Bool(_), toml::Value::Boolean(b)) => Value::Bool(*b),
        (Bool(_), _) => return Err(wrong("true or false")),
        (Text(_), toml::Value::String(s)) => Value::Text(s.clone()),
        (Text(_), _) => return Err(wrong("a string")),
        (Floats(_), toml::Value::Array(a)) => {
            Value::Floats(a.iter().map(|x| num(x).ok_or_else(|| wrong("an array of numbers"))).collect::<Result<_>>()?)
        }
        (Ints(_), toml::Value::Array(a)) => Value::Ints(
            a.iter()
                .map(|x| x.as_integer().ok_or_else(|| wrong("an array of integers")))
                .collect::<Result<_>>()?,
        ),
        (Floats(_) | Ints(_), _) => return Err(wrong("an array")),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    params: BTreeMap<String, Value>,
}

const RESERVED: [&str; 3] = ["experiment", "seed", "out_dir"];

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let params = experiment.keys().iter().map(|k| (k.name.to_string(), Value::from_default(k.default))).collect();
        Self { experiment, seed: None, out_dir: None, params }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigSyntax { path: path.to_path_buf(), message: e.to_string() })?;
        Self::parse(&text, path)
    }

    /// `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| CliError::ConfigSyntax { path: origin.to_path_buf(), message: e.to_string() })?;
        for (k, v) in &table {
            if v.is_table() || v.as_array().is_some_and(|a| a.iter().any(|x| x.is_table() || x.is_array())) {
                return Err(CliError::config(k, "nested values are not supported; configs are flat"));
            }
        }
        let name = match table.get("experiment") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(other) => return Err(CliError::config("experiment", format!("expected a string, got {other}"))),
            None => return Err(CliError::config("experiment", "missing")),
        };
        let experiment = Experiment::from_name(&name)
            .ok_or_else(|| CliError::config("experiment", format!("unknown experiment `{name}`; see list-experiments")))?;
        let mut config = Self::defaults(experiment);
        for (k, v) in &table {
            match k.as_str() {
                "experiment" => {}
                "seed" => {
                    let s = v
                        .as_integer()
                        .filter(|s| *s >= 0)
                        .ok_or_else(|| CliError::config("seed", format!("expected a non-negative integer, got {v}")))?;
                    config.seed = Some(s as u64);
                }
                "out_dir" => {
                    let s = v.as_str().ok_or_else(|| CliError::config("out_dir", format!("expected a path string, got {v}")))?;
                    config.out_dir = Some(PathBuf::from(s));
                }
                _ => {
                    let spec = experiment.keys().iter().find(|s| s.name == k).ok_or_else(|| {
                        CliError::config(k, format!("unknown key for experiment `{name}`"))
                    })?;
                    config.params.insert(k.clone(), coerce(k, spec.default, v)?);
                }
            }
        }
        Ok(config)
    }

    /// Overrides one parameter, with the same type rules as the file format.
    pub fn set(&mut self, name: &str, value: toml::Value) -> Result<()> {
        if RESERVED.contains(&name) {
            return Err(CliError::config(name, "reserved key; set the field directly"));
        }
        let spec = self
            .experiment
            .keys()
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| CliError::config(name, format!("unknown key for experiment `{}`", self.experiment)))?;
        self.params.insert(name.to_string(), coerce(name, spec.default, &value)?);
        Ok(())
    }

    fn value(&self, name: &str) -> &Value {
        self.params.get(name).unwrap_or_else(|| panic!("`{name}` is not a key of {}", self.experiment))
    }

    pub fn f64(&self, name: &str) -> f64 {
        match self.value(name) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            other => panic!("`{name}` holds {other:?}, not a number"),
        }
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        match self.value(name) {
            Value::Int(v) => usize::try_from(*v).map_err(|_| CliError::config(name, format!("must be non-negative, got {v}"))),
            other => panic!("`{name}` holds {other:?}, not an integer"),
        }
    }

    pub fn bool(&self, name: &str) -> bool {
        match self.value(name) {
            Value::Bool(v) => *v,
            other => panic!("`{name}` holds {other:?}, not a boolean"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.value(name) {
            Value::Text(v) => v,
            other => panic!("`{name}` holds {other:?}, not a string"),
        }
    }

    /// Non-empty list of finite numbers.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let v = match self.value(name) {
            Value::Floats(v) => v.clone(),
            other => panic!("`{name}` holds {other:?}, not a list of numbers"),
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config(name, "needs at least one finite value"));
        }
        Ok(v)
    }

    /// Non-empty list of non-negative integers.
    pub fn usizes(&self, name: &str) -> Result<Vec<usize>> {
        let v = match self.value(name) {
            Value::Ints(v) => v,
            other => panic!("`{name}` holds {other:?}, not a list of integers"),
        };
        if v.is_empty() {
            return Err(CliError::config(name, "needs at least one value"));
        }
        v.iter()
            .map(|x| usize::try_from(*x).map_err(|_| CliError::config(name, format!("entries must be non-negative, got {x}"))))
            .collect()
    }

    /// The seed of a randomized experiment; others run without one.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            CliError::config("seed", format!("experiment `{}` is randomized; pass --seed or set seed in the config", self.experiment))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.randomized() {
            self.require_seed()?;
        }
        Ok(())
    }

    /// `key=value` pairs in key order, seed first.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(s) = self.seed {
            parts.push(format!("seed={s}"));
        }
        parts.extend(self.params.iter().map(|(k, v)| format!("{k}={}", v.canonical())));
        parts.join(" ")
    }

    /// Short hash of everything that can change a result. Output locations are excluded.
    pub fn fingerprint(&self) -> String {
        let full = sha256_hex(format!("{} {}", self.experiment, self.describe()).as_bytes());
        full[..12].to_string()
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment.name(),
            "seed": self.seed,
            "params": self.params,
        })
    }

    pub fn default_out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| Path::new("out").join(self.experiment.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("test.toml"))
    }

    #[test]
    fn defaults_and_overrides() {
        let c = parse("experiment = \"verify-weighted\"\nseed = 3\nn = 32\na_values = [10, 1e2]\n").unwrap();
        assert_eq!(c.experiment, Experiment::VerifyWeighted);
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.usize("n").unwrap(), 32);
        assert_eq!(c.floats("a_values").unwrap(), vec![10.0, 100.0]);
        assert_eq!(c.f64("length"), 8.0);
        assert_eq!(c.text("convention"), "single_k");
    }

    #[test]
    fn unknown_and_nested_keys_are_rejected() {
        let bad = parse("experiment = \"nse-shear\"\nnn = 3\n").unwrap_err();
        assert!(matches!(&bad, CliError::Config { key, .. } if key == "nn"), "{bad}");
        let nested = parse("experiment = \"nse-shear\"\n[grid]\nn = 3\n").unwrap_err();
        assert!(matches!(&nested, CliError::Config { key, .. } if key == "grid"));
        assert!(matches!(parse("n = 3\n").unwrap_err(), CliError::Config { key, .. } if key == "experiment"));
        assert!(matches!(parse("experiment = \"nope\"\n").unwrap_err(), CliError::Config { .. }));
    }

    #[test]
    fn types_are_checked() {
        assert!(parse("experiment = \"nse-shear\"\nn = 3.5\n").is_err());
        assert!(parse("experiment = \"nse-shear\"\ndt = \"small\"\n").is_err());
        assert!(parse("experiment = \"nse-shear\"\ndt = 1\n").is_ok());
        assert!(parse("experiment = \"nse-shear\"\nseed = -1\n").is_err());
        let c = parse("experiment = \"nse-shear\"\nn = -4\n").unwrap();
        assert!(c.usize("n").is_err());
    }

    #[test]
    fn randomized_experiments_need_a_seed() {
        assert!(parse("experiment = \"verify-matrix-lemma\"\n").unwrap().validate().is_err());
        assert!(parse("experiment = \"verify-matrix-lemma\"\nseed = 7\n").unwrap().validate().is_ok());
        assert!(parse("experiment = \"nse-shear\"\n").unwrap().validate().is_ok());
    }

    #[test]
    fn fingerprint_tracks_parameters_but_not_output() {
        let a = parse("experiment = \"nse-shear\"\n").unwrap();
        let mut b = a.clone();
        b.out_dir = Some(PathBuf::from("elsewhere"));
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.set("n", toml::Value::Integer(64)).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert!(b.set("bogus", toml::Value::Integer(1)).is_err());
    }

    #[test]
    fn every_experiment_has_a_unique_name() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
            assert!(!e.keys().is_empty());
        }
    }
}
