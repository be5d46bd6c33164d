//! Report lines, the ordered JSON-lines sink and the CSV summary.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use symcost::tradeoff::{TradeoffReport, SLACK_TOL};

use crate::config::Kind;

/// One evaluated (scenario, seed) pair. Fields that do not apply to a kind are `null`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportLine {
    pub kind: Kind,
    pub application: String,
    pub seed: u64,
    pub effective_seed: u64,
    #[serde(flatten)]
    pub report: TradeoffReport,
    pub pass: bool,
    pub extras: BTreeMap<String, Value>,
}

impl ReportLine {
    pub fn new(kind: Kind, application: &str, report: TradeoffReport) -> Self {
        Self {
            kind,
            application: application.to_string(),
            seed: 0,
            effective_seed: 0,
            report,
            pass: false,
            extras: BTreeMap::new(),
        }
    }

    pub fn extra(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.extras.insert(key.to_string(), v);
        self
    }

    /// Recomputes `pass`; a NaN slack fails.
    pub fn finish(&mut self) {
        self.report.wall_time_ms = 0.0;
        self.pass = self.report.slack >= -SLACK_TOL;
    }
}

/// Report with every scalar unset, for kinds that only fill `lhs`, `rhs` and `slack`.
pub fn blank_report(scenario_id: &str) -> TradeoffReport {
    TradeoffReport {
        scenario_id: scenario_id.to_string(),
        c_value: f64::NAN,
        delta_def: f64::NAN,
        delta_1: f64::NAN,
        delta_2: f64::NAN,
        delta_3: f64::NAN,
        fisher_b: f64::NAN,
        delta_irrev: f64::NAN,
        delta_irrev_t: f64::NAN,
        delta_z: f64::NAN,
        lhs: f64::NAN,
        rhs: f64::NAN,
        slack: f64::NAN,
        tight_variant_used: false,
        wall_time_ms: 0.0,
    }
}

/// Writes lines in task order even when tasks finish out of order. Each line is
/// flushed as soon as everything before it has been written.
pub struct OrderedSink<W: Write> {
    out: W,
    next: usize,
    pending: BTreeMap<usize, String>,
}

impl<W: Write> OrderedSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            next: 0,
            pending: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, index: usize, line: String) -> std::io::Result<()> {
        self.pending.insert(index, line);
        while let Some(line) = self.pending.remove(&self.next) {
            self.out.write_all(line.as_bytes())?;
            self.out.write_all(b"\n")?;
            self.out.flush()?;
            self.next += 1;
        }
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.next
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_summary(path: &Path, lines: &[ReportLine]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "scenario_id,lhs,rhs,slack,pass")?;
    for l in lines {
        writeln!(
            w,
            "{},{},{},{},{}",
            csv_field(&l.report.scenario_id),
            l.report.lhs,
            l.report.rhs,
            l.report.slack,
            l.pass
        )?;
    }
    w.flush()
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sink_reorders() {
        let mut sink = OrderedSink::new(Vec::new());
        sink.push(2, "c".into()).unwrap();
        sink.push(0, "a".into()).unwrap();
        assert_eq!(sink.written(), 1);
        sink.push(1, "b".into()).unwrap();
        assert_eq!(sink.written(), 3);
        assert_eq!(String::from_utf8(sink.into_inner()).unwrap(), "a\nb\nc\n");
    }

    #[test]
    fn nan_slack_fails() {
        let mut l = ReportLine::new(Kind::Kr, "kr", blank_report("x"));
        l.finish();
        assert!(!l.pass);
        let json = serde_json::to_string(&l).unwrap();
        assert!(json.contains("\"lhs\":null"));
        assert!(json.contains("\"fisher_B\":null"));
    }

    #[test]
    fn quotes_awkward_ids() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
