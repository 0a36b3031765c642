//! The eight translational tasks, set enumeration and sampling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::geometry::Vec2;
use crate::rng::{seeded, uniform_index, SimRng};

/// One unit translation of the object's reference point.
/// Declaration order is the canonical indexing used for lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "x+")]
    XPos,
    #[serde(rename = "x-")]
    XNeg,
    #[serde(rename = "y+")]
    YPos,
    #[serde(rename = "y-")]
    YNeg,
    #[serde(rename = "xy++")]
    XyPosPos,
    #[serde(rename = "xy--")]
    XyNegNeg,
    #[serde(rename = "xy+-")]
    XyPosNeg,
    #[serde(rename = "xy-+")]
    XyNegPos,
}

pub const ALL_TASKS: [Task; 8] = [
    Task::XPos,
    Task::XNeg,
    Task::YPos,
    Task::YNeg,
    Task::XyPosPos,
    Task::XyNegNeg,
    Task::XyPosNeg,
    Task::XyNegPos,
];

/// 8!
pub const TOTAL_ORDERINGS: usize = 40_320;

impl Task {
    pub fn displacement(self) -> Vec2 {
        let (x, y) = self.unit_steps();
        Vec2::new(x as f64, y as f64)
    }

    pub fn unit_steps(self) -> (i8, i8) {
        match self {
            Task::XPos => (1, 0),
            Task::XNeg => (-1, 0),
            Task::YPos => (0, 1),
            Task::YNeg => (0, -1),
            Task::XyPosPos => (1, 1),
            Task::XyNegNeg => (-1, -1),
            Task::XyPosNeg => (1, -1),
            Task::XyNegPos => (-1, 1),
        }
    }

    pub fn from_steps(x: i8, y: i8) -> Option<Task> {
        ALL_TASKS.into_iter().find(|t| t.unit_steps() == (x, y))
    }

    pub fn code(self) -> &'static str {
        match self {
            Task::XPos => "x+",
            Task::XNeg => "x-",
            Task::YPos => "y+",
            Task::YNeg => "y-",
            Task::XyPosPos => "xy++",
            Task::XyNegNeg => "xy--",
            Task::XyPosNeg => "xy+-",
            Task::XyNegPos => "xy-+",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_diagonal(self) -> bool {
        let (x, y) = self.unit_steps();
        x != 0 && y != 0
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Task> {
        ALL_TASKS
            .into_iter()
            .find(|t| t.code() == s)
            .ok_or_else(|| Error::Malformed(format!("unknown task code `{s}`")))
    }
}

/// An ordering of all eight tasks. Serialized as an array of task codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskSet {
    pub ordering: Vec<Task>,
}

impl TaskSet {
    pub fn new(ordering: Vec<Task>) -> Self {
        Self { ordering }
    }

    /// Each task exactly once and every prefix sum inside `[-hw, hw]^2`.
    pub fn is_valid(&self, workspace_half_width: f64) -> bool {
        let mut seen = [false; 8];
        for t in &self.ordering {
            if std::mem::replace(&mut seen[t.index()], true) {
                return false;
            }
        }
        self.ordering.len() == 8 && prefixes_fit(&self.ordering, workspace_half_width)
    }
}

fn prefixes_fit(tasks: &[Task], half_width: f64) -> bool {
    let mut p = Vec2::ZERO;
    tasks.iter().all(|t| {
        p += t.displacement();
        fits(p, half_width)
    })
}

fn fits(p: Vec2, half_width: f64) -> bool {
    let tol = 1e-12;
    p.x.abs() <= half_width + tol && p.y.abs() <= half_width + tol
}

/// All orderings of `tasks` whose cumulative positions, starting at the
/// origin, stay inside the closed square of half-width `half_width` after
/// every task. Output follows lexicographic order of the input positions.
///
/// Infeasible prefixes are pruned, which drops exactly the orderings a full
/// permutation scan would reject.
pub fn enumerate_valid_orderings(
    tasks: &[Task],
    half_width: f64,
    exec: Execution,
) -> Vec<Vec<Task>> {
    let n = tasks.len();
    let branches = exec::map_range(n, exec, |first| {
        let mut out = Vec::new();
        let start = tasks[first].displacement();
        if !fits(start, half_width) {
            return out;
        }
        let mut used = vec![false; n];
        used[first] = true;
        let mut prefix = vec![tasks[first]];
        extend(tasks, half_width, start, &mut used, &mut prefix, &mut out);
        out
    });
    branches.into_iter().flatten().collect()
}

fn extend(
    tasks: &[Task],
    half_width: f64,
    pos: Vec2,
    used: &mut [bool],
    prefix: &mut Vec<Task>,
    out: &mut Vec<Vec<Task>>,
) {
    if prefix.len() == tasks.len() {
        out.push(prefix.clone());
        return;
    }
    for i in 0..tasks.len() {
        if used[i] {
            continue;
        }
        let next = pos + tasks[i].displacement();
        if !fits(next, half_width) {
            continue;
        }
        used[i] = true;
        prefix.push(tasks[i]);
        extend(tasks, half_width, next, used, prefix, out);
        prefix.pop();
        used[i] = false;
    }
}

/// Every valid set for the given workspace, in canonical lexicographic order.
pub fn enumerate_valid_sets(workspace_half_width: f64) -> Result<Vec<TaskSet>> {
    enumerate_valid_sets_with(workspace_half_width, Execution::default())
}

pub fn enumerate_valid_sets_with(
    workspace_half_width: f64,
    exec: Execution,
) -> Result<Vec<TaskSet>> {
    if !(workspace_half_width > 0.0 && workspace_half_width.is_finite()) {
        return Err(Error::param("workspace_half_width", "must be positive"));
    }
    Ok(
        enumerate_valid_orderings(&ALL_TASKS, workspace_half_width, exec)
            .into_iter()
            .map(TaskSet::new)
            .collect(),
    )
}

pub fn sample_set_with(library: &[TaskSet], rng: &mut SimRng) -> Result<TaskSet> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    Ok(library[uniform_index(rng, library.len() as u64) as usize].clone())
}

/// Uniform draw from `library`; the same seed always returns the same set.
pub fn sample_set(library: &[TaskSet], seed: u64) -> Result<TaskSet> {
    sample_set_with(library, &mut seeded(seed))
}

/// `n` distinct sets drawn uniformly without replacement.
pub fn sample_distinct_sets(library: &[TaskSet], n: usize, seed: u64) -> Result<Vec<TaskSet>> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if n > library.len() {
        return Err(Error::param(
            "n_sets",
            format!("only {} distinct sets exist", library.len()),
        ));
    }
    let mut rng = seeded(seed);
    let mut taken = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let i = uniform_index(&mut rng, library.len() as u64) as usize;
        if taken.insert(i) {
            out.push(library[i].clone());
        }
    }
    Ok(out)
}

/// Goal positions after each task, starting at `start`.
pub fn goal_sequence(set: &TaskSet, start: Vec2, workspace_half_width: f64) -> Result<Vec<Vec2>> {
    if !set.is_valid(workspace_half_width) {
        return Err(Error::InvalidSet(format!(
            "ordering {:?} is not a valid set for half-width {workspace_half_width}",
            set.ordering.iter().map(|t| t.code()).collect::<Vec<_>>()
        )));
    }
    let mut p = start;
    Ok(set
        .ordering
        .iter()
        .map(|t| {
            p += t.displacement();
            p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for t in ALL_TASKS {
            assert_eq!(t.code().parse::<Task>().unwrap(), t);
            assert_eq!(
                serde_json::to_string(&t).unwrap(),
                format!("\"{}\"", t.code())
            );
        }
        assert!("z+".parse::<Task>().is_err());
    }

    #[test]
    fn reduced_task_list() {
        // Independent count over the 24 orderings of four axis moves.
        let four = [Task::XPos, Task::XNeg, Task::YPos, Task::YNeg];
        let mut brute = 0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        let mut uniq = idx.to_vec();
                        uniq.sort();
                        uniq.dedup();
                        if uniq.len() == 4 && prefixes_fit(&idx.map(|i| four[i]), 1.0) {
                            brute += 1;
                        }
                    }
                }
            }
        }
        // With unit steps in a [-1, 1] square every ordering of these four fits.
        assert_eq!(brute, 24);
        assert_eq!(
            enumerate_valid_orderings(&four, 1.0, Execution::Sequential).len(),
            brute
        );
        // A tighter square rejects every ordering.
        assert_eq!(
            enumerate_valid_orderings(&four, 0.5, Execution::Sequential).len(),
            0
        );
    }

    #[test]
    fn goal_sequence_example() {
        use Task::*;
        let set = TaskSet::new(vec![
            XPos, XNeg, YPos, YNeg, XyPosPos, XyNegNeg, XyPosNeg, XyNegPos,
        ]);
        let goals = goal_sequence(&set, Vec2::ZERO, 1.0).unwrap();
        let expected = [
            (1, 0),
            (0, 0),
            (0, 1),
            (0, 0),
            (1, 1),
            (0, 0),
            (1, -1),
            (0, 0),
        ];
        for (g, (x, y)) in goals.iter().zip(expected) {
            assert_eq!(*g, Vec2::new(x as f64, y as f64));
        }
    }

    #[test]
    fn invalid_set_is_rejected() {
        use Task::*;
        let set = TaskSet::new(vec![
            XPos, XyPosPos, XNeg, YNeg, XyNegNeg, XyPosNeg, XyNegPos, YPos,
        ]);
        assert!(goal_sequence(&set, Vec2::ZERO, 1.0).is_err());
        let dup = TaskSet::new(vec![XPos; 8]);
        assert!(!dup.is_valid(10.0));
    }

    #[test]
    fn empty_library_errors() {
        assert!(matches!(sample_set(&[], 1), Err(Error::EmptyLibrary)));
    }

    #[test]
    fn sampling_is_deterministic_and_in_library() {
        let lib = enumerate_valid_sets(1.0).unwrap();
        let a = sample_set(&lib, 42).unwrap();
        assert_eq!(a, sample_set(&lib, 42).unwrap());
        assert!(lib.contains(&a));
        let distinct = sample_distinct_sets(&lib, 16, 3).unwrap();
        let uniq: std::collections::HashSet<_> = distinct.iter().collect();
        assert_eq!(uniq.len(), 16);
    }

    #[test]
    fn set_json_is_code_array() {
        let s = TaskSet::new(ALL_TASKS.to_vec());
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"["x+","x-","y+","y-","xy++","xy--","xy+-","xy-+"]"#
        );
    }
}
