//! Run reports and trajectory tables.

use std::io::Write;

use serde::Serialize;

use scstat_core::dynamics::{CheckStatus, TheoremCheck};
use scstat_core::stationary::StationaryPair;
use scstat_core::structure::AssumptionReport;

use crate::config::{CheckKind, ExperimentConfig};

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParameterPoint {
    pub param_id: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub param_id: usize,
    pub policy: Vec<f64>,
    pub policy_indices: Vec<usize>,
    pub value: Vec<f64>,
    /// Smallest gap to the best non-optimal action.
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionEntry {
    pub param_id: usize,
    pub report: AssumptionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub kind: CheckKind,
    /// Parameter points involved, low to high.
    pub params: Vec<usize>,
    #[serde(flatten)]
    pub check: TheoremCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryEntry {
    pub param_id: usize,
    #[serde(flatten)]
    pub pair: StationaryPair,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub confirmed: usize,
    pub preconditions_failed: usize,
    pub refuted: usize,
    pub exit_code: i32,
}

impl Summary {
    pub fn from_checks(checks: &[CheckEntry]) -> Self {
        let count = |s| checks.iter().filter(|c| c.check.status == s).count();
        let refuted = count(CheckStatus::Refuted);
        Self {
            confirmed: count(CheckStatus::Confirmed),
            preconditions_failed: count(CheckStatus::PreconditionsFailed),
            refuted,
            exit_code: if refuted > 0 { 1 } else { 0 },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

/// One row of the trajectory table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub param_id: usize,
    pub expected_decision: f64,
    pub mean_state: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub config: ExperimentConfig,
    pub parameters: Vec<ParameterPoint>,
    pub solutions: Vec<SolutionSummary>,
    pub assumptions: Vec<AssumptionEntry>,
    pub checks: Vec<CheckEntry>,
    pub stationary: Vec<StationaryEntry>,
    pub summary: Summary,
    /// The only field that varies between identical runs.
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// `x` with 17 significant digits, in plain decimal notation unless the
/// exponent is far from zero.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..=16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

pub const CSV_HEADER: [&str; 4] = ["t", "param_id", "expected_decision", "mean_state"];

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.param_id.to_string(),
            format_sig17(r.expected_decision),
            format_sig17(r.mean_state),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[TrajectoryRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}
