use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use stmtevo::metrics::{budget_audit, dataset_metrics, first_hit, prefix_metrics, BudgetAudit, DatasetMetrics};
use stmtevo::search::RunEvent;

use crate::run::load_run;
use crate::{io_err, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRow {
    pub problem_id: String,
    pub events: usize,
    pub ch: f64,
    pub sh: f64,
    pub fy: f64,
    pub sd: f64,
    pub sy: f64,
    pub div: usize,
    /// `None` when no hit occurs within the budget.
    pub first_hit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: usize,
    pub ch: f64,
    pub sh: f64,
    pub fy: f64,
    pub sd: f64,
    pub sy: f64,
    pub mean_div: f64,
    pub gini: f64,
    pub top10_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub run_id: String,
    pub t: usize,
    pub summary: DatasetMetrics,
    pub budget_audit: BudgetAudit,
    pub problems: Vec<ProblemRow>,
    pub curves: Vec<CurvePoint>,
}

/// Metrics over the first `t` events of every problem's log.
pub fn build_report(run_id: &str, ids: &[String], traces: &[Vec<RunEvent>], t: usize) -> MetricsReport {
    let prefixes: Vec<&[RunEvent]> = traces.iter().map(|tr| prefix(tr, t)).collect();
    let problems = ids
        .iter()
        .zip(&prefixes)
        .map(|(id, e)| {
            let m = prefix_metrics(e, t);
            ProblemRow {
                problem_id: id.clone(),
                events: e.len(),
                ch: m.ch,
                sh: m.sh,
                fy: m.fy,
                sd: m.sd,
                sy: m.sy,
                div: m.div,
                first_hit: first_hit(e),
            }
        })
        .collect();
    let curves = (1..=t)
        .map(|k| {
            let d = dataset_metrics(&prefixes, k);
            CurvePoint { t: k, ch: d.ch, sh: d.sh, fy: d.fy, sd: d.sd, sy: d.sy, mean_div: d.mean_div, gini: d.gini, top10_share: d.top10_share }
        })
        .collect();
    MetricsReport {
        run_id: run_id.to_string(),
        t,
        summary: dataset_metrics(&prefixes, t),
        budget_audit: budget_audit(prefixes.iter().copied()),
        problems,
        curves,
    }
}

fn prefix(events: &[RunEvent], t: usize) -> &[RunEvent] {
    let n = events.iter().take_while(|e| e.call_index <= t).count();
    &events[..n]
}

/// Sibling path `<stem>.<suffix>` next to the report.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    method: &'a str,
    t: usize,
    ch: f64,
    sh: f64,
    fy: f64,
    sd: f64,
    sy: f64,
    gini: f64,
    top10_share: f64,
}

/// Reads a run directory and writes the JSON report plus CSV tables beside it:
/// `<stem>.summary.csv`, `<stem>.problems.csv`, `<stem>.curves.csv`.
pub fn cmd_metrics(run_dir: &Path, t: Option<usize>, out: &Path) -> Result<MetricsReport, CliError> {
    let (manifest, _, traces) = load_run(run_dir)?;
    let t = t.unwrap_or(manifest.config.budget);
    let ids: Vec<String> = manifest.problems.iter().map(|p| p.problem_id.clone()).collect();
    let report = build_report(&manifest.run_id, &ids, &traces, t);
    std::fs::write(out, serde_json::to_string_pretty(&report).expect("report serializes")).map_err(io_err(out))?;
    let s = &report.summary;
    let summary = SummaryRow { method: &manifest.run_id, t, ch: s.ch, sh: s.sh, fy: s.fy, sd: s.sd, sy: s.sy, gini: s.gini, top10_share: s.top10_share };
    write_csv(&sibling(out, "summary.csv"), &[summary])?;
    write_csv(&sibling(out, "problems.csv"), &report.problems)?;
    write_csv(&sibling(out, "curves.csv"), &report.curves)?;
    Ok(report)
}
