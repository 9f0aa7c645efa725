//! Experiment configuration: a TOML file, parsed, then resolved against the core types.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use alchemy_core::{
    BigRational, FiberConvention, LocallyConstantPotential, Normalization, PastWord, ShiftSpace,
    Symbol, TwoSidedCylinder, Window,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    space: SpaceSpec,
    #[serde(default)]
    potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default)]
    job: JobSpec,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    expect: ExpectSpec,
    #[serde(default)]
    output: OutputSpec,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSpec {
    preset: Option<String>,
    k: Option<usize>,
    matrix: Option<Vec<Vec<u8>>>,
    #[serde(default = "default_metric_base")]
    metric_base: f64,
}

fn default_metric_base() -> f64 {
    0.5
}

/// A number written either as a TOML float or as an exact string (`"3/10"`, `"0.3"`, `"2"`).
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Num {
    fn exact(&self) -> Result<Option<BigRational>, CliError> {
        match self {
            Num::Float(_) => Ok(None),
            Num::Int(i) => Ok(Some(BigRational::from_integer(BigInt::from(*i)))),
            Num::Text(s) => parse_rational(s).map(Some),
        }
    }

    fn float(&self) -> Result<f64, CliError> {
        match self {
            Num::Float(x) => Ok(*x),
            Num::Int(i) => Ok(*i as f64),
            Num::Text(s) => Ok(alchemy_core::Scalar::to_f64(&parse_rational(s)?)),
        }
    }
}

/// Parses `p/q`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let t = s.trim();
    let bad = || CliError::Config(format!("`{s}` is not a rational number"));
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(bad());
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(num, den);
        return Ok(if negative { -q } else { q });
    }
    BigRational::from_str(t).map_err(|_| bad())
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialSpec {
    Zero,
    /// `value` is `G` itself; `weight` is `e^G`, exactly.
    Constant {
        value: Option<f64>,
        weight: Option<Num>,
    },
    Bernoulli {
        probs: Vec<Num>,
    },
    Table {
        window: [usize; 2],
        entries: Vec<EntrySpec>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntrySpec {
    word: Vec<Symbol>,
    value: Option<f64>,
    weight: Option<Num>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobSpec {
    g1: Option<String>,
    g2: Option<String>,
    past: Option<Vec<Symbol>>,
    pinned: Option<Vec<Symbol>>,
    normalization: Option<String>,
    arith: Option<String>,
    n: Option<Vec<usize>>,
    n_range: Option<RangeSpec>,
    #[serde(default)]
    cylinders: Vec<CylinderSpec>,
    #[serde(default)]
    pushforwards: bool,
    gibbs_depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeSpec {
    from: usize,
    to: usize,
    #[serde(default = "one")]
    step: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CylinderSpec {
    start: i64,
    symbols: Vec<Symbol>,
}

/// Tolerances for the self-checks recorded in each report.
#[derive(Clone, Debug, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub pressure: f64,
    pub probability: f64,
    pub growth: f64,
    pub gibbs_spread: f64,
    pub oracle: f64,
    pub variational: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pressure: 1e-10,
            probability: 1e-12,
            growth: 1e-8,
            gibbs_spread: 1e-10,
            oracle: 1e-10,
            variational: 1e-12,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpectSpec {
    #[serde(default)]
    pressure: BTreeMap<String, Num>,
    #[serde(default)]
    values: Vec<ExpectValue>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectValue {
    /// `mu_n`, `endpoint`, `pushforward`, `lambda_mass`.
    pub quantity: String,
    pub n: usize,
    #[serde(default)]
    pub i: Option<usize>,
    #[serde(default)]
    pub cylinder: usize,
    pub value: Num,
}

impl ExpectValue {
    pub fn exact(&self) -> Option<BigRational> {
        self.value.exact().ok().flatten()
    }

    pub fn float(&self) -> f64 {
        self.value.float().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSpec {
    dir: Option<String>,
    prefix: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arith {
    Exact,
    Float,
}

impl FromStr for Arith {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(Arith::Exact),
            "float" => Ok(Arith::Float),
            other => Err(CliError::Config(format!(
                "arith must be `exact` or `float`, got `{other}`"
            ))),
        }
    }
}

/// The job section after validation. Fields a subcommand needs but the config omits are
/// reported when that subcommand runs.
#[derive(Clone, Debug)]
pub struct Job {
    pub g1: Option<String>,
    pub g2: Option<String>,
    pub past: Option<PastWord>,
    pub convention: FiberConvention,
    pub normalization: Normalization,
    pub arith: Arith,
    pub n: Vec<usize>,
    pub cylinders: Vec<TwoSidedCylinder>,
    pub pushforwards: bool,
    pub gibbs_depth: usize,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub space: ShiftSpace,
    pub potentials: BTreeMap<String, LocallyConstantPotential>,
    pub job: Job,
    pub tolerances: Tolerances,
    pub expected_pressure: BTreeMap<String, f64>,
    pub expected_values: Vec<ExpectValue>,
    pub out_dir: Option<String>,
    pub prefix: String,
    pub seed: u64,
    /// SHA-256 of the config file bytes.
    pub hash: String,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Config("config is not UTF-8".into()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into());
        let hash = hex::encode(Sha256::digest(&bytes));
        Self::parse(&text, &name, hash)
    }

    pub fn parse(text: &str, name: &str, hash: String) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("parse error: {e}")))?;
        let space = resolve_space(&raw.space)?;
        let mut potentials = BTreeMap::new();
        for (key, spec) in &raw.potentials {
            let g = resolve_potential(&space, spec)
                .map_err(|e| CliError::Config(format!("potential `{key}`: {e}")))?;
            potentials.insert(key.clone(), g);
        }
        let job = resolve_job(&space, &raw.job, &potentials)?;
        let mut expected_pressure = BTreeMap::new();
        for (key, v) in &raw.expect.pressure {
            if !potentials.contains_key(key) {
                return Err(CliError::Config(format!(
                    "expected pressure refers to unknown potential `{key}`"
                )));
            }
            expected_pressure.insert(key.clone(), v.float()?);
        }
        for v in &raw.expect.values {
            v.value.float()?;
            match v.quantity.as_str() {
                "mu_n" | "endpoint" => {}
                "pushforward" if v.i.is_some() => {}
                "pushforward" => {
                    return Err(CliError::Config("expected pushforward needs `i`".into()))
                }
                other => {
                    return Err(CliError::Config(format!(
                        "expected quantity must be mu_n, endpoint or pushforward, got `{other}`"
                    )))
                }
            }
            if v.cylinder >= job.cylinders.len() {
                return Err(CliError::Config(format!(
                    "expected {} refers to cylinder {} but only {} are configured",
                    v.quantity,
                    v.cylinder,
                    job.cylinders.len()
                )));
            }
        }
        Ok(Experiment {
            name: name.to_string(),
            space,
            potentials,
            job,
            tolerances: raw.tolerances,
            expected_pressure,
            expected_values: raw.expect.values,
            out_dir: raw.output.dir,
            prefix: raw.output.prefix.unwrap_or_else(|| name.to_string()),
            seed: raw.seed.unwrap_or(0),
            hash,
        })
    }

    pub fn potential(&self, key: &Option<String>, role: &str) -> Result<&LocallyConstantPotential, CliError> {
        let key = key
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("job.{role} is required for this subcommand")))?;
        self.potentials
            .get(key)
            .ok_or_else(|| CliError::Config(format!("job.{role} refers to unknown potential `{key}`")))
    }

    pub fn past(&self) -> Result<&PastWord, CliError> {
        self.job
            .past
            .as_ref()
            .ok_or_else(|| CliError::Config("job.past is required for this subcommand".into()))
    }

    pub fn n_values(&self) -> Result<&[usize], CliError> {
        if self.job.n.is_empty() {
            return Err(CliError::Config("job.n or job.n_range is required for this subcommand".into()));
        }
        Ok(&self.job.n)
    }
}

fn config_err(e: alchemy_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn resolve_space(spec: &SpaceSpec) -> Result<ShiftSpace, CliError> {
    let space = match (&spec.preset, spec.k, &spec.matrix) {
        (Some(p), _, None) if p == "golden_mean" => ShiftSpace::golden_mean(),
        (Some(p), Some(k), None) if p == "full" => ShiftSpace::full(k),
        (Some(p), None, None) if p == "full" => {
            return Err(CliError::Config("space.preset = \"full\" needs space.k".into()))
        }
        (None, k, Some(m)) => {
            if k.is_some_and(|k| k != m.len()) {
                return Err(CliError::Config("space.k does not match the matrix size".into()));
            }
            ShiftSpace::new(m.len(), m, 0.5).map_err(config_err)?
        }
        (Some(p), _, _) => {
            return Err(CliError::Config(format!(
                "unknown space preset `{p}` (expected `full` or `golden_mean`, or give a matrix)"
            )))
        }
        (None, _, None) => {
            return Err(CliError::Config("space needs a preset or a matrix".into()))
        }
    };
    space.with_metric_base(spec.metric_base).map_err(config_err)
}

fn resolve_potential(space: &ShiftSpace, spec: &PotentialSpec) -> Result<LocallyConstantPotential, CliError> {
    let g = match spec {
        PotentialSpec::Zero => Ok(LocallyConstantPotential::zero(space)),
        PotentialSpec::Constant { value, weight } => match (value, weight) {
            (Some(v), None) => LocallyConstantPotential::constant(space, *v),
            (None, Some(w)) => match w.exact()? {
                Some(q) => LocallyConstantPotential::constant_weight(space, q),
                None => LocallyConstantPotential::constant(space, w.float()?.ln()),
            },
            _ => {
                return Err(CliError::Config(
                    "a constant potential needs exactly one of `value` or `weight`".into(),
                ))
            }
        },
        PotentialSpec::Bernoulli { probs } => {
            let exact: Option<Vec<BigRational>> =
                probs.iter().map(|p| p.exact()).collect::<Result<Option<Vec<_>>, _>>()?;
            match exact {
                Some(q) => {
                    let total = q.iter().fold(BigRational::zero(), |a, x| a + x.clone());
                    if !total.is_one() {
                        return Err(CliError::Config(format!(
                            "bernoulli probabilities sum to {total}, not 1"
                        )));
                    }
                    LocallyConstantPotential::bernoulli_exact(space, &q)
                }
                None => {
                    let p: Vec<f64> = probs.iter().map(|p| p.float()).collect::<Result<_, _>>()?;
                    LocallyConstantPotential::bernoulli(space, &p)
                }
            }
        }
        PotentialSpec::Table { window, entries } => {
            let window = Window::new(window[0], window[1]).map_err(config_err)?;
            let weights: Option<Vec<(Vec<Symbol>, BigRational)>> = entries
                .iter()
                .map(|e| match (&e.value, &e.weight) {
                    (None, Some(w)) => w.exact().map(|q| q.map(|q| (e.word.clone(), q))),
                    _ => Ok(None),
                })
                .collect::<Result<Option<Vec<_>>, _>>()?;
            match weights {
                Some(w) => LocallyConstantPotential::from_exact_weights(space, window, w),
                None => {
                    let values = entries
                        .iter()
                        .map(|e| match (&e.value, &e.weight) {
                            (Some(v), None) => Ok((e.word.clone(), *v)),
                            (None, Some(w)) => Ok((e.word.clone(), w.float()?.ln())),
                            _ => Err(CliError::Config(format!(
                                "table entry {:?} needs exactly one of `value` or `weight`",
                                e.word
                            ))),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    LocallyConstantPotential::from_table(space, window, values)
                }
            }
        }
    };
    g.map_err(config_err)
}

fn resolve_job(
    space: &ShiftSpace,
    spec: &JobSpec,
    potentials: &BTreeMap<String, LocallyConstantPotential>,
) -> Result<Job, CliError> {
    for (role, key) in [("g1", &spec.g1), ("g2", &spec.g2)] {
        if let Some(k) = key {
            if !potentials.contains_key(k) {
                return Err(CliError::Config(format!("job.{role} refers to unknown potential `{k}`")));
            }
        }
    }
    let past = spec
        .past
        .as_ref()
        .map(|p| PastWord::new(space, p.clone()))
        .transpose()
        .map_err(|e| CliError::Config(format!("job.past: {e}")))?;
    let convention = match &spec.pinned {
        Some(w) if !w.is_empty() => {
            space
                .check_word(w)
                .map_err(|e| CliError::Config(format!("job.pinned: {e}")))?;
            FiberConvention::Pinned(w.clone())
        }
        _ => FiberConvention::PastOnly,
    };
    let normalization = match spec.normalization.as_deref() {
        None | Some("raw") => Normalization::Raw,
        Some("pressure_normalized") => Normalization::PressureNormalized,
        Some(other) => {
            return Err(CliError::Config(format!(
                "job.normalization must be `raw` or `pressure_normalized`, got `{other}`"
            )))
        }
    };
    let arith = spec.arith.as_deref().unwrap_or("float").parse()?;
    let n = match (&spec.n, &spec.n_range) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give job.n or job.n_range, not both".into()))
        }
        (Some(n), None) => n.clone(),
        (None, Some(r)) => {
            if r.step == 0 || r.from > r.to {
                return Err(CliError::Config("job.n_range must have from <= to and step >= 1".into()));
            }
            (r.from..=r.to).step_by(r.step).collect()
        }
        (None, None) => Vec::new(),
    };
    if n.first() == Some(&0) || n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(
            "job n values must be positive and strictly increasing".into(),
        ));
    }
    let mut cylinders = Vec::new();
    for (ix, c) in spec.cylinders.iter().enumerate() {
        let cyl = TwoSidedCylinder::new(space, c.start, c.symbols.clone()).map_err(|e| {
            CliError::Config(format!("job.cylinders[{ix}] is not admissible: {e}"))
        })?;
        cylinders.push(cyl);
    }
    Ok(Job {
        g1: spec.g1.clone(),
        g2: spec.g2.clone(),
        past,
        convention,
        normalization,
        arith,
        n,
        cylinders,
        pushforwards: spec.pushforwards,
        gibbs_depth: spec.gibbs_depth.unwrap_or(2),
    })
}
