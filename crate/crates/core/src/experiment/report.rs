//! Machine-readable check reports and their JSON / CSV serializations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::anchors::Check;
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "hbmo-report/1";

/// Serializes non-finite values as the strings `"inf"`, `"-inf"`, `"nan"`,
/// which plain JSON numbers cannot carry.
mod float_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Named(String),
    }

    fn encode(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Finite(v)
        } else if v.is_nan() {
            Repr::Named("nan".into())
        } else if v > 0.0 {
            Repr::Named("inf".into())
        } else {
            Repr::Named("-inf".into())
        }
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let out: BTreeMap<&str, Repr> = m.iter().map(|(k, &v)| (k.as_str(), encode(v))).collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Repr>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, r)| {
                let v = match r {
                    Repr::Finite(v) => v,
                    Repr::Named(s) => match s.as_str() {
                        "inf" => f64::INFINITY,
                        "-inf" => f64::NEG_INFINITY,
                        "nan" => f64::NAN,
                        _ => return Err(serde::de::Error::custom(format!("bad number {s:?}"))),
                    },
                };
                Ok((k, v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub check: Check,
    pub anchor: String,
    /// SHA-256 of the space bytes and the canonical parameter JSON.
    pub inputs_hash: String,
    #[serde(with = "float_map")]
    pub constants: BTreeMap<String, f64>,
    /// Signed slacks: nonnegative where the corresponding bound holds.
    #[serde(with = "float_map")]
    pub margins: BTreeMap<String, f64>,
    pub pass: bool,
    /// Why the check could not run, when it could not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Wall time; kept out of the report bytes, written to `timings.json`.
    #[serde(skip)]
    pub runtime: Duration,
}

impl Report {
    pub fn new(check: Check, inputs_hash: &str) -> Self {
        Report {
            check,
            anchor: check.anchor().id.to_string(),
            inputs_hash: inputs_hash.to_string(),
            constants: BTreeMap::new(),
            margins: BTreeMap::new(),
            pass: false,
            error: None,
            runtime: Duration::ZERO,
        }
    }

    pub fn constant(&mut self, name: &str, v: f64) -> &mut Self {
        self.constants.insert(name.to_string(), v);
        self
    }

    pub fn margin(&mut self, name: &str, v: f64) -> &mut Self {
        self.margins.insert(name.to_string(), v);
        self
    }

    pub fn failed(check: Check, inputs_hash: &str, error: &Error) -> Self {
        let mut r = Report::new(check, inputs_hash);
        r.error = Some(error.to_string());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub check: Check,
    pub anchor: String,
    pub pass: bool,
    pub constants: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub inputs_hash: String,
    pub points: usize,
    pub checks: Vec<SummaryEntry>,
    /// Total number of measured constants, the CSV row count.
    pub constants: usize,
    pub failing: Vec<Check>,
    pub all_pass: bool,
}

impl Summary {
    /// `inputs_hash` is used when `reports` is empty; reports computed from
    /// different inputs give the hash `"mixed"`.
    pub fn of(reports: &[Report], inputs_hash: &str, points: usize) -> Self {
        let inputs_hash = match reports.first() {
            None => inputs_hash,
            Some(r) if reports.iter().all(|x| x.inputs_hash == r.inputs_hash) => &r.inputs_hash,
            Some(_) => "mixed",
        };
        let checks: Vec<SummaryEntry> = reports
            .iter()
            .map(|r| SummaryEntry {
                check: r.check,
                anchor: r.anchor.clone(),
                pass: r.pass,
                constants: r.constants.len(),
            })
            .collect();
        let failing: Vec<Check> = reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.check)
            .collect();
        Summary {
            schema: REPORT_SCHEMA.to_string(),
            inputs_hash: inputs_hash.to_string(),
            points,
            constants: checks.iter().map(|c| c.constants).sum(),
            all_pass: failing.is_empty(),
            failing,
            checks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Configuration(format!("unknown report format {s:?}"))),
        }
    }
}

/// Pretty JSON with a trailing newline; byte-identical for equal values.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // Display is the shortest string that parses back to `v`
        format!("{v}")
    }
}

/// One row per (check, constant), in report then name order.
pub fn to_csv_bytes(reports: &[Report]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["check", "anchor", "constant", "value", "pass"])
        .map_err(io)?;
    for r in reports {
        for (name, &v) in &r.constants {
            w.write_record([
                r.check.name(),
                r.anchor.as_str(),
                name.as_str(),
                format_value(v).as_str(),
                if r.pass { "true" } else { "false" },
            ])
            .map_err(io)?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Writes `reports/<check>.json` per report plus `summary.json` (JSON), or
/// `reports.csv` (CSV), under `dir`. Returns the files written.
pub fn emit_report(
    reports: &[Report],
    summary: &Summary,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", dir.display()),
        ))
    })?;
    let mut written = vec![];
    match format {
        ReportFormat::Json => {
            let sub = dir.join("reports");
            std::fs::create_dir_all(&sub)?;
            for r in reports {
                let p = sub.join(format!("{}.json", r.check.name()));
                write(&p, &to_json_bytes(r)?)?;
                written.push(p);
            }
            let p = dir.join("summary.json");
            write(&p, &to_json_bytes(summary)?)?;
            written.push(p);
        }
        ReportFormat::Csv => {
            let p = dir.join("reports.csv");
            write(&p, &to_csv_bytes(reports)?)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Per-check wall times in seconds, the one nondeterministic output.
pub fn emit_timings(reports: &[Report], dir: &Path) -> Result<PathBuf> {
    let t: BTreeMap<&str, f64> = reports
        .iter()
        .map(|r| (r.check.name(), r.runtime.as_secs_f64()))
        .collect();
    let p = dir.join("timings.json");
    write(&p, &to_json_bytes(&t)?)?;
    Ok(p)
}

/// Reads back every `reports/<check>.json` under `dir`, in check order.
pub fn read_reports(dir: &Path) -> Result<Vec<Report>> {
    let sub = dir.join("reports");
    let mut out = vec![];
    for c in Check::ALL {
        let p = sub.join(format!("{}.json", c.name()));
        if p.exists() {
            let text = std::fs::read_to_string(&p)?;
            out.push(serde_json::from_str(&text)?);
        }
    }
    Ok(out)
}
