//! Machine-readable run reports: `{command, inputs, seed, results[], max_deviation, pass}`.
//! The CLI's text output is a rendering of the same structure.

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Entry {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Entry {
    pub fn new(name: impl Into<String>, pass: bool, deviation: Option<f64>) -> Self {
        Entry { name: name.into(), pass, deviation, detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).unwrap_or(Value::Null);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    pub results: Vec<Entry>,
    pub max_deviation: f64,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, inputs: Vec<String>, seed: Option<u64>) -> Self {
        Report { command: command.into(), inputs, seed, results: vec![], max_deviation: 0.0, pass: true }
    }

    pub fn push(&mut self, e: Entry) {
        if let Some(d) = e.deviation {
            self.max_deviation = self.max_deviation.max(d);
        }
        self.pass &= e.pass;
        self.results.push(e);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.results {
            out.push_str(if e.pass { "PASS " } else { "FAIL " });
            out.push_str(&e.name);
            if let Some(d) = e.deviation {
                out.push_str(&format!("  deviation={d:.3e}"));
            }
            match &e.detail {
                Value::Null => {}
                // multi-line payloads (matrices, circuits) are printed separately
                Value::String(s) if s.contains('\n') => {}
                Value::String(s) => out.push_str(&format!("  {s}")),
                other => out.push_str(&format!("  {other}")),
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} ({} result{}, max deviation {:.3e})\n",
            self.command,
            if self.pass { "pass" } else { "FAIL" },
            self.results.len(),
            if self.results.len() == 1 { "" } else { "s" },
            self.max_deviation
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_and_round_trips() {
        let mut r = Report::new("equiv", vec!["a.qc".into(), "b.qc".into()], Some(7));
        r.push(Entry::new("semantic", true, Some(1e-12)).with_detail("unitary"));
        r.push(Entry::new("other", false, Some(0.5)));
        assert!(!r.pass);
        assert_eq!(r.max_deviation, 0.5);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["command", "inputs", "seed", "results", "max_deviation", "pass"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(r.render_text().contains("FAIL other"));
    }
}
