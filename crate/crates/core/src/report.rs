//! Run configuration and the report stream.
//!
//! Every line carries a check id, an anchor naming the statement it exercises,
//! the inputs, the seed and a verdict. Lines are written through one
//! [`ReportWriter`], so output order never depends on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::index_sets::DEFAULT_ENUMERATION_CAP;
use crate::multipliers::{Constants, VerdictReport};
use crate::sequences::DEFAULT_DELTA;
use crate::trig_poly::DEFAULT_GRID_CAP;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    JsonLines,
    Csv,
    #[default]
    Human,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::JsonLines => "json-lines",
            OutputFormat::Csv => "csv",
            OutputFormat::Human => "human",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" | "json" => Ok(OutputFormat::JsonLines),
            "csv" => Ok(OutputFormat::Csv),
            "human" | "text" => Ok(OutputFormat::Human),
            other => Err(invalid(format!("unknown format `{other}` (expected json-lines, csv or human)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub grid_cap: u64,
    pub enumeration_cap: u64,
    /// Half-width of the indifference band around the membership threshold.
    pub delta: f64,
    pub constants: Constants,
    pub format: OutputFormat,
    /// Smaller problem sizes for smoke runs.
    pub quick: bool,
    /// Worker threads; `None` uses the pool default.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tol_abs: 1e-12,
            tol_rel: 1e-9,
            grid_cap: DEFAULT_GRID_CAP,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            delta: DEFAULT_DELTA,
            constants: Constants::default(),
            format: OutputFormat::default(),
            quick: false,
            workers: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| invalid(format!("bad value `{value}` for `{key}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(invalid(format!("bad value `{other}` for `{key}`: expected true or false"))),
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 11] = [
        "seed",
        "tol-abs",
        "tol-rel",
        "grid-cap",
        "enumeration-cap",
        "delta",
        "constant-C",
        "constant-gamma",
        "format",
        "quick",
        "workers",
    ];

    /// Sets one field by its config-file key (`_` and `-` are interchangeable).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let norm = key.trim().replace('_', "-");
        match norm.as_str() {
            "seed" => self.seed = parse_num(key, value)?,
            "tol-abs" => self.tol_abs = parse_num(key, value)?,
            "tol-rel" => self.tol_rel = parse_num(key, value)?,
            "grid-cap" => self.grid_cap = parse_num(key, value)?,
            "enumeration-cap" => self.enumeration_cap = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "constant-C" | "constant-c" => self.constants.c = parse_num(key, value)?,
            "constant-gamma" => self.constants.gamma = parse_num(key, value)?,
            "format" => self.format = value.trim().parse()?,
            "quick" => self.quick = parse_bool(key, value)?,
            "workers" => self.workers = Some(parse_num(key, value)?),
            _ => return Err(invalid(format!("unknown config key `{key}` (known: {})", Self::KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") })?;
            self.set(key, value).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_cap == 0 || self.enumeration_cap == 0 {
            return Err(invalid("caps must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(invalid(format!("delta must lie in (0, 0.5), got {}", self.delta)));
        }
        if !(self.tol_abs >= 0.0 && self.tol_rel >= 0.0) {
            return Err(invalid("tolerances must be nonnegative"));
        }
        if !(self.constants.c > 0.0 && self.constants.gamma > 0.0) {
            return Err(invalid("constants must be positive"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

/// One record of the report stream.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportLine {
    pub check_id: String,
    pub anchor: String,
    pub inputs: BTreeMap<String, Value>,
    pub seed: u64,
    pub verdict: String,
    pub summary: String,
    pub details: Value,
}

impl ReportLine {
    pub fn new(check_id: &str, anchor: &str, seed: u64) -> Self {
        ReportLine {
            check_id: check_id.into(),
            anchor: anchor.into(),
            inputs: BTreeMap::new(),
            seed,
            verdict: "inconclusive".into(),
            summary: String::new(),
            details: Value::Null,
        }
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Self {
        self.inputs.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn verdict(mut self, verdict: impl fmt::Display) -> Self {
        self.verdict = verdict.to_string();
        self
    }

    /// `verified` when `ok`, `counterexample` otherwise.
    pub fn holds(self, ok: bool) -> Self {
        self.verdict(if ok { "verified" } else { "counterexample" })
    }

    pub fn summary(mut self, text: impl Into<String>) -> Self {
        self.summary = text.into();
        self
    }

    pub fn details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).unwrap_or(Value::Null);
        self
    }

    pub fn from_verdict(report: &VerdictReport) -> Self {
        let mut line = ReportLine::new(&report.check_id, &report.anchor, report.seed)
            .input("space", &report.space)
            .input("m", report.m)
            .input("n", report.n)
            .verdict(report.verdict)
            .summary(format!(
                "lhs {} vs constant {} x [{}, {}] ({})",
                report.lhs, report.constant, report.bracket_lower, report.bracket_upper, report.basis
            ))
            .details(report);
        if let Some(p) = report.p {
            line = line.input("p", p);
        }
        line
    }

    pub fn error(check_id: &str, anchor: &str, seed: u64, err: &Error) -> Self {
        ReportLine::new(check_id, anchor, seed).verdict("error").summary(err.to_string())
    }

    /// Lines that make the run fail: counterexamples and internal errors.
    pub fn is_failure(&self) -> bool {
        self.verdict == "counterexample" || self.verdict == "error"
    }

    fn inputs_compact(&self) -> String {
        self.inputs
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

const CSV_HEADER: [&str; 6] = ["check_id", "anchor", "seed", "verdict", "inputs", "summary"];

/// Serialising writer; the only place report lines reach the output.
pub struct ReportWriter<W: Write> {
    out: W,
    format: OutputFormat,
    header_done: bool,
    tally: BTreeMap<String, usize>,
    failures: usize,
}

impl<W: Write> ReportWriter<W> {
    pub fn new(out: W, format: OutputFormat) -> Self {
        ReportWriter { out, format, header_done: false, tally: BTreeMap::new(), failures: 0 }
    }

    pub fn emit(&mut self, line: &ReportLine) -> Result<()> {
        *self.tally.entry(line.verdict.clone()).or_default() += 1;
        if line.is_failure() {
            self.failures += 1;
        }
        match self.format {
            OutputFormat::JsonLines => {
                let text = serde_json::to_string(line).map_err(|e| invalid(e.to_string()))?;
                writeln!(self.out, "{text}")?;
            }
            OutputFormat::Csv => {
                let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
                if !self.header_done {
                    w.write_record(CSV_HEADER).map_err(csv_error)?;
                    self.header_done = true;
                }
                let inputs = serde_json::to_string(&line.inputs).map_err(|e| invalid(e.to_string()))?;
                w.write_record([line.check_id.as_str(), &line.anchor, &line.seed.to_string(), &line.verdict, &inputs, &line.summary])
                    .map_err(csv_error)?;
                let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
                self.out.write_all(&bytes)?;
            }
            OutputFormat::Human => {
                writeln!(
                    self.out,
                    "{:<14} {} [{}] seed={} {}{}{}",
                    line.verdict,
                    line.check_id,
                    line.anchor,
                    line.seed,
                    line.inputs_compact(),
                    if line.summary.is_empty() { "" } else { " | " },
                    line.summary
                )?;
            }
        }
        Ok(())
    }

    /// Writes pre-rendered text verbatim (tables, bare values).
    pub fn raw(&mut self, text: &str) -> Result<()> {
        self.out.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn tally(&self) -> &BTreeMap<String, usize> {
        &self.tally
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn finish(mut self) -> Result<i32> {
        self.out.flush()?;
        Ok(if self.failures == 0 { 0 } else { 1 })
    }
}

fn csv_error(e: csv::Error) -> Error {
    invalid(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let cfg = RunConfig::from_kv("# comment\nseed = 7\ntol_abs=1e-6\nconstant-C = 2.5\nformat = csv\nquick = yes\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.tol_abs, 1e-6);
        assert_eq!(cfg.constants.c, 2.5);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert!(cfg.quick);
        assert_eq!(cfg.tol_rel, RunConfig::default().tol_rel);
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(matches!(RunConfig::from_kv("seed 7"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::from_kv("\nfoo = 1"), Err(Error::Parse { line: 2, .. })));
        assert!(RunConfig::from_kv("delta = 0.5").is_err());
        assert!(RunConfig::from_kv("delta = 0").is_err());
        assert!(RunConfig::from_kv("grid-cap = 0").is_err());
        assert!(RunConfig::from_kv("format = xml").is_err());
        assert!(RunConfig::from_kv("workers = 0").is_err());
    }

    fn sample() -> ReportLine {
        ReportLine::new("demo", "demo-anchor", 3).input("m", 2).input("kind", "lambda-le").holds(true).summary("a, \"quoted\" note")
    }

    #[test]
    fn formats_render_every_required_field() {
        for format in [OutputFormat::JsonLines, OutputFormat::Csv, OutputFormat::Human] {
            let mut w = ReportWriter::new(Vec::new(), format);
            w.emit(&sample()).unwrap();
            w.emit(&sample().holds(false)).unwrap();
            assert_eq!(w.failures(), 1);
            let text = String::from_utf8(w.out).unwrap();
            for needle in ["demo", "demo-anchor", "3", "verified", "counterexample", "lambda-le"] {
                assert!(text.contains(needle), "{format}: {text}");
            }
        }
    }

    #[test]
    fn csv_quotes_and_header_once() {
        let mut w = ReportWriter::new(Vec::new(), OutputFormat::Csv);
        w.emit(&sample()).unwrap();
        w.emit(&sample()).unwrap();
        let text = String::from_utf8(w.out).unwrap();
        assert_eq!(text.matches("check_id,anchor").count(), 1);
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][5], "a, \"quoted\" note");
    }

    #[test]
    fn json_roundtrip() {
        let mut w = ReportWriter::new(Vec::new(), OutputFormat::JsonLines);
        w.emit(&sample()).unwrap();
        let v: Value = serde_json::from_slice(&w.out).unwrap();
        assert_eq!(v["check_id"], "demo");
        assert_eq!(v["inputs"]["m"], 2);
        assert_eq!(v["verdict"], "verified");
    }

    #[test]
    fn exit_code_tracks_failures() {
        let mut w = ReportWriter::new(Vec::new(), OutputFormat::Human);
        w.emit(&sample().verdict("inconclusive")).unwrap();
        w.emit(&sample().verdict("envelope")).unwrap();
        assert_eq!(w.finish().unwrap(), 0);
        let mut w = ReportWriter::new(Vec::new(), OutputFormat::Human);
        w.emit(&ReportLine::error("x", "y", 0, &invalid("boom"))).unwrap();
        assert_eq!(w.finish().unwrap(), 1);
    }
}
