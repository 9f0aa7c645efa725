//! CSV tables, JSON summaries and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use alchemy_core::{render_rational, BigRational, Normalization, Scalar};
use serde_json::{json, Map, Value};

use crate::config::{Arith, Experiment};
use crate::error::CliError;

/// Text form of a computed value: shortest round-trip decimal for floats, exact decimal or
/// `p/q` for rationals.
pub trait Render {
    fn render(&self) -> String;
}

impl Render for f64 {
    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Render for BigRational {
    fn render(&self) -> String {
        render_rational(self)
    }
}

pub const HEADER: &str = "n,i,quantity,value,reference,abs_error,n_times_error";

#[derive(Clone, Debug, Default)]
pub struct Row {
    pub n: Option<usize>,
    pub i: Option<usize>,
    pub quantity: String,
    pub value: String,
    pub reference: String,
    pub abs_error: String,
    pub n_times_error: String,
}

impl Row {
    pub fn value(n: Option<usize>, quantity: impl Into<String>, value: String) -> Self {
        Row {
            n,
            quantity: quantity.into(),
            value,
            ..Row::default()
        }
    }

    /// A value with its reference; errors are filled in from the difference.
    pub fn compared<S: Scalar + Render>(
        n: Option<usize>,
        i: Option<usize>,
        quantity: impl Into<String>,
        value: &S,
        reference: &S,
    ) -> Self {
        let err = if value >= reference {
            value.clone() - reference.clone()
        } else {
            reference.clone() - value.clone()
        };
        let n_err = n.map(|n| (err.clone() * S::from_usize(n)).render()).unwrap_or_default();
        Row {
            n,
            i,
            quantity: quantity.into(),
            value: value.render(),
            reference: reference.render(),
            abs_error: err.render(),
            n_times_error: n_err,
        }
    }

    fn csv(&self) -> String {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            opt(self.n),
            opt(self.i),
            self.quantity.clone(),
            self.value.clone(),
            self.reference.clone(),
            self.abs_error.clone(),
            self.n_times_error.clone(),
        ]
        .join(",")
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, pass, detail));
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, exp: &Experiment, subcommand: &str, arith: Arith) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
            .collect();
        let cylinders: Vec<Value> = exp
            .job
            .cylinders
            .iter()
            .enumerate()
            .map(|(ix, c)| json!({ "label": format!("A{ix}"), "start": c.start(), "symbols": c.symbols() }))
            .collect();
        json!({
            "subcommand": subcommand,
            "experiment": exp.name,
            "config_sha256": exp.hash,
            "arith": arith,
            "normalization": match exp.job.normalization {
                Normalization::Raw => "raw",
                Normalization::PressureNormalized => "pressure_normalized",
            },
            "job": {
                "space": { "k": exp.space.k(), "matrix": exp.space.matrix(), "metric_base": exp.space.metric_base() },
                "g1": exp.job.g1,
                "g2": exp.job.g2,
                "past": exp.job.past.as_ref().map(|p| p.repr().to_vec()),
                "pinned": exp.job.convention.pinned(),
                "n": exp.job.n,
                "cylinders": cylinders,
            },
            "seed": exp.seed,
            "tolerances": exp.tolerances,
            "results": Value::Object(self.results.clone()),
            "checks": checks,
            "pass": self.checks.iter().all(|c| c.pass),
        })
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes the CSV and JSON summary; returns their paths.
pub fn emit(
    report: &Report,
    exp: &Experiment,
    out_dir: &Path,
    subcommand: &str,
    arith: Arith,
) -> Result<(PathBuf, PathBuf), CliError> {
    let csv_path = out_dir.join(format!("{}_{subcommand}.csv", exp.prefix));
    let json_path = out_dir.join(format!("{}_{subcommand}.json", exp.prefix));
    write_atomic(&csv_path, report.csv().as_bytes())?;
    let mut summary = serde_json::to_string_pretty(&report.summary(exp, subcommand, arith))
        .expect("summary serializes");
    summary.push('\n');
    write_atomic(&json_path, summary.as_bytes())?;
    Ok((csv_path, json_path))
}
