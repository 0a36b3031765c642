//! Published reference statistics and side-by-side comparison reports.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{row_values, RowKey, TaskSummary, ROW_ORDER};
use crate::stats::{bonferroni, brunner_munzel, BmResult};
use crate::tasks::Task;

const BUILTIN_REFERENCE: &str = include_str!("../data/reference_tables.json");

/// Significance level used for markers.
pub const ALPHA: f64 = 0.05;

/// Default Bonferroni family size: the task rows reported jointly per table.
pub const DEFAULT_FAMILY_SIZE: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRow {
    pub task: RowKey,
    pub hh_mean: f64,
    pub hh_sd: f64,
    pub hsr_mean: f64,
    pub hsr_sd: f64,
    pub p_value: f64,
    /// The published value is an upper bound (`< p_value`).
    pub p_below: bool,
}

impl ReferenceRow {
    pub fn significant(&self) -> bool {
        self.p_value < ALPHA
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityReference {
    #[serde(rename = "_provenance")]
    pub provenance: String,
    pub hh_mean: f64,
    pub hh_sd: f64,
    pub hsr_mean: f64,
    pub hsr_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTable {
    #[serde(rename = "_provenance")]
    pub provenance: String,
    pub completion_time: Vec<ReferenceRow>,
    pub scaled_path_length: Vec<ReferenceRow>,
    pub x_velocity: VelocityReference,
}

impl ReferenceTable {
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN_REFERENCE).expect("embedded reference table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn rows(&self, metric: Metric) -> &[ReferenceRow] {
        match metric {
            Metric::CompletionTime => &self.completion_time,
            Metric::ScaledPathLength => &self.scaled_path_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CompletionTime,
    ScaledPathLength,
}

impl Metric {
    pub fn title(self) -> &'static str {
        match self {
            Metric::CompletionTime => "completion time (s)",
            Metric::ScaledPathLength => "scaled path length",
        }
    }
}

/// Brunner-Munzel comparison of two conditions on one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowComparison {
    pub row: RowKey,
    pub n_a: usize,
    pub n_b: usize,
    pub test: BmResult,
    pub p_adjusted: f64,
}

impl RowComparison {
    pub fn significant(&self) -> bool {
        self.p_adjusted < ALPHA
    }
}

/// Per-row Brunner-Munzel tests of `a` against `b` with Bonferroni family size `m`.
/// Rows with fewer than two values in either condition are skipped.
pub fn compare_conditions(a: &[(Task, f64)], b: &[(Task, f64)], m: usize) -> Vec<RowComparison> {
    let mut out: Vec<RowComparison> = ROW_ORDER
        .iter()
        .filter_map(|row| {
            let xa = row_values(a, *row);
            let xb = row_values(b, *row);
            let test = brunner_munzel(&xa, &xb).ok()?;
            Some(RowComparison {
                row: *row,
                n_a: xa.len(),
                n_b: xb.len(),
                test,
                p_adjusted: f64::NAN,
            })
        })
        .collect();
    let raw: Vec<f64> = out.iter().map(|c| c.test.p_value).collect();
    for (c, p) in out.iter_mut().zip(bonferroni(&raw, m)) {
        c.p_adjusted = p;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub row: RowKey,
    pub sim: Option<TaskSummary>,
    pub reference: Option<ReferenceRow>,
    pub comparison: Option<RowComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metric: Metric,
    pub rows: Vec<ReportRow>,
    /// Reference rows without simulated data.
    pub absent: Vec<RowKey>,
}

/// Simulated summaries next to the published HH and HSR rows.
pub fn compare_report(
    metric: Metric,
    sim: &[TaskSummary],
    comparison: &[RowComparison],
    reference: &ReferenceTable,
) -> Report {
    let refs = reference.rows(metric);
    let rows: Vec<ReportRow> = ROW_ORDER
        .iter()
        .filter_map(|row| {
            let s = sim.iter().find(|s| s.row == *row).cloned();
            let r = refs.iter().find(|r| r.task == *row).cloned();
            let c = comparison.iter().find(|c| c.row == *row).cloned();
            (s.is_some() || r.is_some()).then_some(ReportRow {
                row: *row,
                sim: s,
                reference: r,
                comparison: c,
            })
        })
        .collect();
    let absent = rows
        .iter()
        .filter(|r| r.reference.is_some() && r.sim.is_none())
        .map(|r| r.row)
        .collect();
    Report {
        metric,
        rows,
        absent,
    }
}

fn fmt_p(p: f64, below: bool) -> String {
    if below {
        format!("<{p}")
    } else if p < 0.001 {
        format!("{p:.4}")
    } else {
        format!("{p:.3}")
    }
}

impl Report {
    /// Aligned text table. `*` marks p < 0.05 (published p-values, and adjusted
    /// simulation comparisons when present).
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{}\n{:<8} {:>18} {:>14} {:>14} {:>10} {:>8} {:>12}\n",
            self.metric.title(),
            "task",
            "sim mean ± sd (n)",
            "HH",
            "HSR",
            "ref p",
            "p_hat",
            "sim p (adj)"
        );
        for row in &self.rows {
            let sim = row
                .sim
                .as_ref()
                .map(|x| format!("{:.2} ± {:.2} ({})", x.mean, x.sd, x.n))
                .unwrap_or_else(|| "-".into());
            let (hh, hsr, p) = row
                .reference
                .as_ref()
                .map(|r| {
                    let mark = if r.significant() { "*" } else { "" };
                    (
                        format!("{:.2} ± {:.2}", r.hh_mean, r.hh_sd),
                        format!("{:.2} ± {:.2}", r.hsr_mean, r.hsr_sd),
                        format!("{}{mark}", fmt_p(r.p_value, r.p_below)),
                    )
                })
                .unwrap_or_else(|| ("-".into(), "-".into(), "-".into()));
            let (p_hat, sim_p) = row
                .comparison
                .as_ref()
                .map(|c| {
                    let mark = if c.significant() { "*" } else { "" };
                    (
                        format!("{:.3}", c.test.p_hat),
                        format!("{:.4}{mark}", c.p_adjusted),
                    )
                })
                .unwrap_or_else(|| ("-".into(), "-".into()));
            s.push_str(&format!(
                "{:<8} {:>18} {:>14} {:>14} {:>10} {:>8} {:>12}\n",
                row.row.label(),
                sim,
                hh,
                hsr,
                p,
                p_hat,
                sim_p
            ));
        }
        if !self.absent.is_empty() {
            let names: Vec<_> = self.absent.iter().map(|r| r.label()).collect();
            s.push_str(&format!("absent: {}\n", names.join(", ")));
        }
        s
    }
}
