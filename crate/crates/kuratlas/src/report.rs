//! Structured run reports: per-step check lines with margins and
//! witnesses, deterministic emission, and exact JSON round-tripping.

use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Pass,
    Fail,
    Error,
}

/// One named check with optional margin and witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

impl CheckLine {
    pub fn new(name: &str, pass: bool) -> Self {
        CheckLine {
            name: name.to_string(),
            pass,
            margin: None,
            witness: None,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub name: String,
    pub status: StepStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub checks: Vec<CheckLine>,
}

impl StepReport {
    pub fn from_checks(name: &str, checks: Vec<CheckLine>) -> Self {
        let status = if checks.iter().all(|c| c.pass) {
            StepStatus::Pass
        } else {
            StepStatus::Fail
        };
        StepReport {
            name: name.to_string(),
            status,
            error: None,
            checks,
        }
    }

    pub fn error(name: &str, message: impl Into<String>) -> Self {
        StepReport {
            name: name.to_string(),
            status: StepStatus::Error,
            error: Some(message.into()),
            checks: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub steps: Vec<StepReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Json,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            version: REPORT_VERSION,
            steps: Vec::new(),
        }
    }
}

impl Report {
    pub fn push(&mut self, step: StepReport) {
        self.steps.push(step);
    }

    pub fn all_pass(&self) -> bool {
        self.steps.iter().all(|s| s.status == StepStatus::Pass)
    }

    pub fn any_error(&self) -> bool {
        self.steps.iter().any(|s| s.status == StepStatus::Error)
    }

    /// 0 when every step passed, 1 otherwise (parse/reference failures
    /// never reach a report and exit 2 at the CLI layer).
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }
}

/// Deterministic serialization: identical reports yield identical bytes.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        ReportFormat::Text => {
            let mut out = String::new();
            for step in &report.steps {
                let tag = match step.status {
                    StepStatus::Pass => "PASS",
                    StepStatus::Fail => "FAIL",
                    StepStatus::Error => "ERROR",
                };
                out.push_str(&format!("[{}] {}\n", tag, step.name));
                if let Some(e) = &step.error {
                    out.push_str(&format!("  error: {}\n", e));
                }
                for check in &step.checks {
                    let mark = if check.pass { "PASS" } else { "FAIL" };
                    out.push_str(&format!("  {} {}", mark, check.name));
                    if let Some(m) = check.margin {
                        out.push_str(&format!(" (margin={:.6e})", m));
                    }
                    if let Some(w) = &check.witness {
                        out.push_str(&format!(" [witness: {}]", w));
                    }
                    out.push('\n');
                }
            }
            let total = report.steps.len();
            let passed = report
                .steps
                .iter()
                .filter(|s| s.status == StepStatus::Pass)
                .count();
            out.push_str(&format!("{}/{} steps passed\n", passed, total));
            out
        }
    }
}

/// Parse a JSON report back; `parse(emit(r)) = r`.
pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.push(StepReport::from_checks(
            "demo",
            vec![
                CheckLine::new("identity", true).with_margin(1.0),
                CheckLine::new("negdef", false).with_witness("(0.5, 0.5)"),
            ],
        ));
        r.push(StepReport::error("broken", "file not found"));
        r
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let emitted = emit_report(&r, ReportFormat::Json);
        let parsed = parse_report(&emitted).unwrap();
        assert_eq!(parsed, r);
        // Byte-determinism.
        assert_eq!(emitted, emit_report(&r, ReportFormat::Json));
    }

    #[test]
    fn empty_report_shape() {
        let emitted = emit_report(&Report::default(), ReportFormat::Json);
        assert!(emitted.contains("\"version\": 1"));
        assert!(emitted.contains("\"steps\": []"));
    }

    #[test]
    fn text_mode_lists_checks() {
        let text = emit_report(&sample(), ReportFormat::Text);
        assert!(text.contains("PASS identity (margin=1.000000e0)"));
        assert!(text.contains("FAIL negdef [witness: (0.5, 0.5)]"));
        assert!(text.contains("[ERROR] broken"));
        assert!(text.contains("error: file not found"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Report::default().exit_code(), 0);
        assert_eq!(sample().exit_code(), 1);
    }
}
