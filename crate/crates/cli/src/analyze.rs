use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use comanip_core::analysis::{analyze_run, RunAnalysis};
use comanip_core::metrics::{summarize_by_task, Histogram};
use comanip_core::report::{
    compare_conditions, compare_report, Metric, ReferenceTable, Report, RowComparison,
};
use serde::Serialize;

use crate::commands::{config_error, EXIT_PARTIAL};

#[derive(Debug, Serialize)]
struct RunReport {
    dir: PathBuf,
    trials: usize,
    unfinished: usize,
    missing: Vec<String>,
    completion_time: Report,
    scaled_path_length: Report,
    x_velocity: Option<Histogram>,
}

#[derive(Debug, Serialize)]
struct Comparison {
    a: PathBuf,
    b: PathBuf,
    family_size: usize,
    completion_time: Vec<RowComparison>,
    scaled_path_length: Vec<RowComparison>,
}

#[derive(Debug, Serialize)]
struct AnalysisOutput {
    runs: Vec<RunReport>,
    comparison: Option<Comparison>,
}

fn load_reference(spec: &str) -> Result<ReferenceTable> {
    if spec == "builtin" {
        return Ok(ReferenceTable::builtin());
    }
    let text = fs::read_to_string(spec).map_err(|e| config_error(format!("{spec}: {e}")))?;
    ReferenceTable::from_json(&text).map_err(|e| config_error(format!("{spec}: {e}")))
}

pub fn run(
    runs: &[PathBuf],
    reference: &str,
    out: Option<&Path>,
    family_size: usize,
) -> Result<ExitCode> {
    if runs.is_empty() || runs.len() > 2 {
        return Err(config_error("--runs takes one or two run directories"));
    }
    if family_size == 0 {
        return Err(config_error("--family-size must be at least 1"));
    }
    let table = load_reference(reference)?;
    let analyses: Vec<RunAnalysis> = runs
        .iter()
        .map(|d| analyze_run(d).with_context(|| format!("reading run {}", d.display())))
        .collect::<Result<_>>()?;

    let comparison = (analyses.len() == 2).then(|| Comparison {
        a: analyses[0].dir.clone(),
        b: analyses[1].dir.clone(),
        family_size,
        completion_time: compare_conditions(
            &analyses[0].completion_times(),
            &analyses[1].completion_times(),
            family_size,
        ),
        scaled_path_length: compare_conditions(
            &analyses[0].scaled_path_lengths(),
            &analyses[1].scaled_path_lengths(),
            family_size,
        ),
    });

    let reports: Vec<RunReport> = analyses
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let (ct_cmp, spl_cmp) = match (&comparison, i) {
                (Some(c), 0) => (
                    c.completion_time.as_slice(),
                    c.scaled_path_length.as_slice(),
                ),
                _ => (&[][..], &[][..]),
            };
            RunReport {
                dir: a.dir.clone(),
                trials: a.trials.len(),
                unfinished: a.unfinished(),
                missing: a.missing.clone(),
                completion_time: compare_report(
                    Metric::CompletionTime,
                    &summarize_by_task(&a.completion_times()),
                    ct_cmp,
                    &table,
                ),
                scaled_path_length: compare_report(
                    Metric::ScaledPathLength,
                    &summarize_by_task(&a.scaled_path_lengths()),
                    spl_cmp,
                    &table,
                ),
                x_velocity: a.x_velocity.clone(),
            }
        })
        .collect();

    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!(
            "run {}: {} trials, {} unfinished\n",
            r.dir.display(),
            r.trials,
            r.unfinished
        ));
        if !r.missing.is_empty() {
            text.push_str(&format!("missing traces: {}\n", r.missing.join(", ")));
        }
        text.push_str(&r.completion_time.to_text());
        text.push('\n');
        text.push_str(&r.scaled_path_length.to_text());
        if let Some(h) = &r.x_velocity {
            text.push_str(&format!(
                "x velocity over x tasks: {:.3} ± {:.3} m/s (HH {} ± {}, HSR {} ± {})\n",
                h.mean,
                h.sd,
                table.x_velocity.hh_mean,
                table.x_velocity.hh_sd,
                table.x_velocity.hsr_mean,
                table.x_velocity.hsr_sd
            ));
        }
        text.push('\n');
    }
    if let Some(c) = &comparison {
        text.push_str(&format!(
            "comparison {} vs {} (Bonferroni m = {})\n",
            c.a.display(),
            c.b.display(),
            c.family_size
        ));
        for (name, rows) in [
            ("completion time", &c.completion_time),
            ("scaled path length", &c.scaled_path_length),
        ] {
            text.push_str(&format!("{name}\n"));
            for r in rows {
                text.push_str(&format!(
                    "  {:<8} p_hat {:.3}  p {:.4}  adjusted {:.4}{}\n",
                    r.row.label(),
                    r.test.p_hat,
                    r.test.p_value,
                    r.p_adjusted,
                    if r.significant() { " *" } else { "" }
                ));
            }
        }
    }
    print!("{text}");

    let output = AnalysisOutput {
        runs: reports,
        comparison,
    };
    if let Some(out) = out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        fs::write(out.join("report.txt"), &text)?;
        fs::write(
            out.join("report.json"),
            serde_json::to_string_pretty(&output)?,
        )?;
        for (i, r) in output.runs.iter().enumerate() {
            if let Some(h) = &r.x_velocity {
                fs::write(out.join(format!("x_velocity_run{i}.csv")), h.to_csv())?;
            }
        }
    }
    let partial = output.runs.iter().any(|r| !r.missing.is_empty());
    Ok(if partial {
        ExitCode::from(EXIT_PARTIAL)
    } else {
        ExitCode::SUCCESS
    })
}
