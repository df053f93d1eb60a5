//! Federated scheduling of sporadic DAG task sets.
//!
//! Heavy tasks (`C >= D`) get dedicated cores, sized either from Graham's
//! bound (FED) or from the multi-path bound (OUR). Light tasks run as
//! sequential sporadic tasks on the remaining cores, partitioned by
//! first-fit decreasing density with a per-core density cap of 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{cores_graham, cores_multipath};
use crate::dag::Work;
use crate::decompose::MultiPathModel;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub model: MultiPathModel,
    #[serde(rename = "D")]
    pub deadline: Work,
    #[serde(rename = "T")]
    pub period: Work,
}

impl Task {
    /// Requires `1 <= D`, `L <= D <= T`.
    pub fn new(model: MultiPathModel, deadline: Work, period: Work) -> Result<Self> {
        let task = Task { model, deadline, period };
        task.validate()?;
        Ok(task)
    }

    pub fn validate(&self) -> Result<()> {
        if self.deadline == 0 {
            return Err(Error::InvalidParameters("deadline must be positive".into()));
        }
        if self.model.longest() > self.deadline || self.deadline > self.period {
            return Err(Error::InvalidParameters(format!(
                "need L <= D <= T, got L = {}, D = {}, T = {}",
                self.model.longest(),
                self.deadline,
                self.period
            )));
        }
        Ok(())
    }

    pub fn total_work(&self) -> Work {
        self.model.total_work()
    }

    pub fn longest(&self) -> Work {
        self.model.longest()
    }

    /// `C / T`.
    pub fn utilization(&self) -> f64 {
        self.total_work() as f64 / self.period as f64
    }

    /// `C / D`.
    pub fn density(&self) -> f64 {
        self.total_work() as f64 / self.deadline as f64
    }

    pub fn class(&self) -> TaskClass {
        classify(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskClass {
    Heavy,
    Light,
}

pub fn classify(task: &Task) -> TaskClass {
    if task.total_work() >= task.deadline {
        TaskClass::Heavy
    } else {
        TaskClass::Light
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
}

impl TaskSet {
    pub fn utilization(&self) -> f64 {
        self.tasks.iter().map(Task::utilization).sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.tasks.iter().try_for_each(Task::validate)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let ts: TaskSet = serde_json::from_str(s)?;
        ts.validate()?;
        Ok(ts)
    }
}

/// How heavy tasks are sized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Graham's bound.
    Fed,
    /// Multi-path bound.
    Our,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Fed, Method::Our];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fed => "fed",
            Method::Our => "our",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fed" => Ok(Method::Fed),
            "our" => Ok(Method::Our),
            other => Err(Error::InvalidParameters(format!("unknown method {other:?}"))),
        }
    }
}

/// Dedicated cores a heavy task needs under `method`; `None` when no finite
/// number suffices (FED with `D = L`).
pub fn heavy_cores(task: &Task, method: Method) -> Option<u64> {
    let (c, l, d) = (task.total_work(), task.longest(), task.deadline);
    match method {
        Method::Fed if d == l => None,
        Method::Fed => cores_graham(c, l, d).ok(),
        Method::Our => cores_multipath(&task.model, d).ok(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchedResult {
    pub accepted: bool,
    pub heavy_cores: u64,
    /// Cores each heavy task received, in task-set order (heavy tasks only).
    pub heavy_allocation: Vec<(usize, u64)>,
    /// Light-task indices per shared core.
    pub light_partition: Vec<Vec<usize>>,
    pub reason: Option<String>,
}

impl SchedResult {
    pub fn cores_used(&self) -> u64 {
        self.heavy_cores + self.light_partition.len() as u64
    }

    fn reject(heavy_cores: u64, heavy_allocation: Vec<(usize, u64)>, reason: String) -> Self {
        SchedResult { accepted: false, heavy_cores, heavy_allocation, light_partition: Vec::new(), reason: Some(reason) }
    }
}

pub fn schedulable(ts: &TaskSet, cores: usize, method: Method) -> SchedResult {
    let cores = cores as u64;
    let mut heavy_total = 0u64;
    let mut allocation = Vec::new();
    let mut lights = Vec::new();
    for (i, task) in ts.tasks.iter().enumerate() {
        if classify(task) == TaskClass::Light {
            lights.push(i);
            continue;
        }
        let Some(n) = heavy_cores(task, method) else {
            return SchedResult::reject(heavy_total, allocation, format!("task {i} has D = L; {method} cannot size it"));
        };
        allocation.push((i, n));
        heavy_total += n;
        if heavy_total > cores {
            return SchedResult::reject(
                heavy_total,
                allocation,
                format!("heavy tasks need {heavy_total} cores, {cores} available"),
            );
        }
    }

    let free = (cores - heavy_total) as usize;
    lights.sort_by(|&a, &b| ts.tasks[b].density().total_cmp(&ts.tasks[a].density()).then(a.cmp(&b)));
    let mut bins: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in lights {
        let d = ts.tasks[i].density();
        if let Some((load, members)) = bins.iter_mut().find(|(load, _)| *load + d <= 1.0) {
            *load += d;
            members.push(i);
        } else if bins.len() < free {
            bins.push((d, vec![i]));
        } else {
            return SchedResult::reject(
                heavy_total,
                allocation,
                format!("light task {i} does not fit on the {free} remaining cores"),
            );
        }
    }
    SchedResult {
        accepted: true,
        heavy_cores: heavy_total,
        heavy_allocation: allocation,
        light_partition: bins.into_iter().map(|(_, m)| m).collect(),
        reason: None,
    }
}
