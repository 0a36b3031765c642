//! Trial metrics and table-style aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::tasks::{Task, ALL_TASKS};

/// Completion time of a finished trial.
pub fn completion_time(completed: bool, time: f64) -> Result<f64> {
    if completed {
        Ok(time)
    } else {
        Err(Error::UndefinedMetric(
            "completion time of an unfinished trial".into(),
        ))
    }
}

/// Replays goal-alignment detection over logged reference positions
/// (one per step, starting after the first step).
pub fn completion_time_from_path(
    positions: &[Vec2],
    goal: Vec2,
    tolerance: f64,
    hold_steps: usize,
    dt: f64,
) -> Option<f64> {
    let mut consecutive = 0;
    for (k, p) in positions.iter().enumerate() {
        if (*p - goal).norm() <= tolerance {
            consecutive += 1;
        } else {
            consecutive = 0;
        }
        if consecutive >= hold_steps {
            return Some((k + 1) as f64 * dt);
        }
    }
    None
}

pub fn path_length(path: &[Vec2]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Length of `start -> path... ` divided by the direct distance `|goal - start|`.
/// `path` may or may not repeat `start` as its first point.
pub fn scaled_path_length(path: &[Vec2], start: Vec2, goal: Vec2) -> Result<f64> {
    let direct = (goal - start).norm();
    if !(direct > 0.0) {
        return Err(Error::UndefinedMetric("start and goal coincide".into()));
    }
    let lead = path.first().map_or(0.0, |p| (*p - start).norm());
    Ok((lead + path_length(path)) / direct)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Central-difference velocity along `axis` at interior samples.
pub fn central_velocities(path: &[Vec2], dt: f64, axis: Axis) -> Vec<f64> {
    path.windows(3)
        .map(|w| {
            let d = (w[2] - w[0]) / (2.0 * dt);
            match axis {
                Axis::X => d.x,
                Axis::Y => d.y,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub range: (f64, f64),
    pub counts: Vec<usize>,
    pub mean: f64,
    pub sd: f64,
    pub samples: usize,
}

impl Histogram {
    pub fn bin_left(&self, i: usize) -> f64 {
        self.range.0 + i as f64 * self.bin_width
    }

    /// `bin_left,count` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.bin_left(i), c));
        }
        s
    }
}

/// Bins `samples` into contiguous bins over `range`; out-of-range samples land
/// in the edge bins so counts always sum to the sample size.
pub fn velocity_histogram(samples: &[f64], bin_width: f64, range: (f64, f64)) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptySample("velocity histogram".into()));
    }
    if !(bin_width > 0.0 && range.1 > range.0) {
        return Err(Error::param(
            "bin_width",
            "must be positive with a non-empty range",
        ));
    }
    let n_bins = ((range.1 - range.0) / bin_width).round().max(1.0) as usize;
    let mut counts = vec![0usize; n_bins];
    for v in samples {
        let i = ((v - range.0) / bin_width).floor();
        let i = if i.is_nan() {
            0
        } else {
            i.clamp(0.0, (n_bins - 1) as f64) as usize
        };
        counts[i] += 1;
    }
    let (mean, sd) = mean_sd(samples);
    Ok(Histogram {
        bin_width,
        range,
        counts,
        mean,
        sd,
        samples: samples.len(),
    })
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for n = 1).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Row labels of the summary tables, individual and pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKey {
    #[serde(rename = "x+")]
    XPos,
    #[serde(rename = "x-")]
    XNeg,
    #[serde(rename = "x±")]
    XPooled,
    #[serde(rename = "y+")]
    YPos,
    #[serde(rename = "y-")]
    YNeg,
    #[serde(rename = "y±")]
    YPooled,
    #[serde(rename = "xy++")]
    XyPosPos,
    #[serde(rename = "xy--")]
    XyNegNeg,
    #[serde(rename = "xy+-")]
    XyPosNeg,
    #[serde(rename = "xy-+")]
    XyNegPos,
    #[serde(rename = "xy±±")]
    XyPooled,
    #[serde(rename = "overall")]
    Overall,
}

/// Table order.
pub const ROW_ORDER: [RowKey; 12] = [
    RowKey::XPos,
    RowKey::XNeg,
    RowKey::XPooled,
    RowKey::YPos,
    RowKey::YNeg,
    RowKey::YPooled,
    RowKey::XyPosPos,
    RowKey::XyNegNeg,
    RowKey::XyPosNeg,
    RowKey::XyNegPos,
    RowKey::XyPooled,
    RowKey::Overall,
];

impl RowKey {
    pub fn label(self) -> &'static str {
        match self {
            RowKey::XPos => "x+",
            RowKey::XNeg => "x-",
            RowKey::XPooled => "x±",
            RowKey::YPos => "y+",
            RowKey::YNeg => "y-",
            RowKey::YPooled => "y±",
            RowKey::XyPosPos => "xy++",
            RowKey::XyNegNeg => "xy--",
            RowKey::XyPosNeg => "xy+-",
            RowKey::XyNegPos => "xy-+",
            RowKey::XyPooled => "xy±±",
            RowKey::Overall => "overall",
        }
    }

    /// Whether trials of `task` belong to this row. The pooled diagonal row
    /// includes all four diagonals.
    pub fn contains(self, task: Task) -> bool {
        use Task::*;
        match self {
            RowKey::XPos => task == XPos,
            RowKey::XNeg => task == XNeg,
            RowKey::XPooled => matches!(task, XPos | XNeg),
            RowKey::YPos => task == YPos,
            RowKey::YNeg => task == YNeg,
            RowKey::YPooled => matches!(task, YPos | YNeg),
            RowKey::XyPosPos => task == XyPosPos,
            RowKey::XyNegNeg => task == XyNegNeg,
            RowKey::XyPosNeg => task == XyPosNeg,
            RowKey::XyNegPos => task == XyNegPos,
            RowKey::XyPooled => task.is_diagonal(),
            RowKey::Overall => true,
        }
    }

    pub fn tasks(self) -> Vec<Task> {
        ALL_TASKS
            .into_iter()
            .filter(|t| self.contains(*t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub row: RowKey,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Values belonging to `row`, in input order.
pub fn row_values(values: &[(Task, f64)], row: RowKey) -> Vec<f64> {
    values
        .iter()
        .filter(|(t, _)| row.contains(*t))
        .map(|(_, v)| *v)
        .collect()
}

/// Per-row mean and SD in table order; rows without data are omitted.
pub fn summarize_by_task(values: &[(Task, f64)]) -> Vec<TaskSummary> {
    ROW_ORDER
        .iter()
        .filter_map(|row| {
            let mut xs = row_values(values, *row);
            if xs.is_empty() {
                log::warn!("no samples for row {}", row.label());
                return None;
            }
            // Fixed summation order keeps pooled rows independent of input order.
            xs.sort_by(f64::total_cmp);
            let (mean, sd) = mean_sd(&xs);
            Some(TaskSummary {
                row: *row,
                n: xs.len(),
                mean,
                sd,
            })
        })
        .collect()
}

/// Aligned-text rendering of summaries.
pub fn summary_table(title: &str, rows: &[TaskSummary]) -> String {
    let mut s = format!("{title}\n{:<8} {:>4} {:>16}\n", "task", "n", "mean ± sd");
    for r in rows {
        s.push_str(&format!(
            "{:<8} {:>4} {:>8.3} ± {:<6.3}\n",
            r.row.label(),
            r.n,
            r.mean,
            r.sd
        ));
    }
    s
}
