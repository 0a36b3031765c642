//! Trace CSV and session JSON files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Pose2, Vec2};
use crate::sim::{SessionLog, SessionRun, StepRecord};

pub const TRACE_HEADER: &str =
    "t,cmo_x,cmo_y,cmo_yaw,base_x,base_y,disp_x,disp_y,cmd_x,cmd_y,flead_x,flead_y,farm_x,farm_y";

pub const SESSION_FILE: &str = "session.json";
pub const TRACE_DIR: &str = "traces";

/// Renders records as CSV. Floats use the shortest round-trip representation.
///
/// The base heading is not a column; read-back records carry heading 0.
pub fn trace_to_csv(records: &[StepRecord]) -> String {
    let mut s = String::with_capacity(64 + records.len() * 160);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.cmo_pose.position.x,
            r.cmo_pose.position.y,
            r.cmo_pose.heading,
            r.base_pose.position.x,
            r.base_pose.position.y,
            r.displacement.x,
            r.displacement.y,
            r.command.x,
            r.command.y,
            r.leader_force.x,
            r.leader_force.y,
            r.arm_force.x,
            r.arm_force.y
        );
    }
    s
}

pub fn trace_from_csv(text: &str) -> Result<Vec<StepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == TRACE_HEADER => {}
        Some(h) => return Err(Error::Malformed(format!("unexpected trace header: {h}"))),
        None => return Err(Error::Malformed("empty trace file".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Malformed(format!("trace line {}: {e}", i + 2)))?;
        if v.len() != 14 {
            return Err(Error::Malformed(format!(
                "trace line {}: expected 14 fields, got {}",
                i + 2,
                v.len()
            )));
        }
        out.push(StepRecord {
            t: v[0],
            cmo_pose: Pose2 {
                position: Vec2::new(v[1], v[2]),
                heading: v[3],
            },
            base_pose: Pose2 {
                position: Vec2::new(v[4], v[5]),
                heading: 0.0,
            },
            displacement: Vec2::new(v[6], v[7]),
            command: Vec2::new(v[8], v[9]),
            leader_force: Vec2::new(v[10], v[11]),
            arm_force: Vec2::new(v[12], v[13]),
        });
    }
    Ok(out)
}

pub fn write_trace(path: &Path, records: &[StepRecord]) -> Result<()> {
    fs::write(path, trace_to_csv(records))?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<StepRecord>> {
    trace_from_csv(&fs::read_to_string(path)?)
}

/// Writes `session.json` and one trace per trial under `traces/`.
pub fn write_session(dir: &Path, run: &SessionRun) -> Result<()> {
    let traces = dir.join(TRACE_DIR);
    fs::create_dir_all(&traces)?;
    for (set, trials) in run.log.sets.iter().zip(&run.results) {
        for (log, trial) in set.trials.iter().zip(trials) {
            write_trace(&traces.join(&log.trace_file), &trial.trace)?;
        }
    }
    fs::write(
        dir.join(SESSION_FILE),
        serde_json::to_string_pretty(&run.log)?,
    )?;
    Ok(())
}

/// Reads a session log from a run directory or directly from a JSON file.
pub fn read_session(path: &Path) -> Result<SessionLog> {
    let file = if path.is_dir() {
        path.join(SESSION_FILE)
    } else {
        path.to_path_buf()
    };
    let log: SessionLog = serde_json::from_str(&fs::read_to_string(file)?)?;
    if log.schema_version != crate::config::SCHEMA_VERSION {
        return Err(Error::Configuration(format!(
            "unsupported session schema version {}",
            log.schema_version
        )));
    }
    Ok(log)
}
