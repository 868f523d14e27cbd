use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce a run. Input descriptors are stored inline,
/// so a report can be replayed without the original files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub command: String,
    /// Normalized arguments with file contents inlined.
    pub args: Vec<String>,
    pub seed: u64,
    pub format: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    pub inputs_digest: String,
    pub inputs: Value,
    pub values: Value,
    pub assertion: String,
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_secs: f64,
    pub error: Option<String>,
}

impl Record {
    pub fn new(name: &str, inputs: Value, values: Value) -> Self {
        Record {
            name: name.into(),
            criterion: None,
            inputs_digest: digest(&inputs),
            inputs,
            values,
            assertion: String::new(),
            tolerance: 0.0,
            passed: true,
            runtime_secs: 0.0,
            error: None,
        }
    }

    pub fn asserting(mut self, assertion: &str, tolerance: f64, passed: bool) -> Self {
        self.assertion = assertion.into();
        self.tolerance = tolerance;
        self.passed = passed;
        self
    }
}

impl From<decaykit::verify::CheckRecord> for Record {
    fn from(c: decaykit::verify::CheckRecord) -> Self {
        Record {
            inputs_digest: digest(&c.inputs),
            name: c.name,
            criterion: Some(c.criterion),
            inputs: c.inputs,
            values: c.values,
            assertion: c.assertion,
            tolerance: c.tolerance,
            passed: c.passed,
            runtime_secs: c.runtime_secs,
            error: c.error,
        }
    }
}

/// SHA-256 of the compact JSON form. `serde_json` maps keep sorted keys, so
/// equal inputs give equal digests.
pub fn digest(v: &Value) -> String {
    let bytes = serde_json::to_vec(v).expect("JSON values always serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Plottable rows, emitted as the CSV body.
#[derive(Debug, Clone, Serialize, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub passed: bool,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(config: RunConfig, mut records: Vec<Record>, table: Option<Table>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "decaykit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            passed: records.iter().all(|r| r.passed),
            config,
            records,
            table,
        }
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// The table, preceded by one `#` line carrying the run config. Without a
    /// table, one row per record.
    pub fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        writeln!(out, "# {}", serde_json::to_string(&self.config)?)?;
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(cell))?;
                }
            }
            None => {
                w.write_record(["name", "passed", "assertion", "tolerance", "runtime_secs", "inputs_digest", "error"])?;
                for r in &self.records {
                    w.write_record([
                        r.name.clone(),
                        r.passed.to_string(),
                        r.assertion.clone(),
                        format!("{:e}", r.tolerance),
                        format!("{:.3}", r.runtime_secs),
                        r.inputs_digest.clone(),
                        r.error.clone().unwrap_or_default(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}
