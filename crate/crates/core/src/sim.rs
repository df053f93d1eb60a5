//! Discrete-time, work-conserving simulation of one DAG on `m` identical
//! cores, together with trace checkers and critical-path extraction.
//!
//! Time advances in units. At the start of each unit every eligible vertex
//! with work left competes for the cores; the policy decides which ones run.
//! Preemption is possible at unit boundaries.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dag::{Dag, VertexId, Work};
use crate::error::{Error, Result};

/// Which eligible vertices get the cores when there are more than `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Earliest-eligible first, then lowest id.
    Fifo,
    /// Lowest id first.
    Lexicographic,
    /// A uniform shuffle of the id-sorted ready list in every time unit,
    /// drawn from a ChaCha8 stream seeded with `seed`.
    Random { seed: u64 },
    /// Fixed priority order; unlisted vertices follow in id order.
    Priority(Vec<VertexId>),
}

/// Actual execution time `e(v)` of every vertex, `0 <= e(v) <= c(v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExecutionTimes(Vec<Work>);

impl ExecutionTimes {
    pub fn full(dag: &Dag) -> Self {
        ExecutionTimes(dag.wcets().to_vec())
    }

    pub fn new(dag: &Dag, exec: Vec<Work>) -> Result<Self> {
        if exec.len() != dag.len() {
            return Err(Error::LengthMismatch { expected: dag.len(), got: exec.len() });
        }
        for v in dag.vertices() {
            let (e, c) = (exec[v.index()], dag.wcet(v));
            if e > c {
                return Err(Error::ExecExceedsWcet { vertex: v.0, exec: e, wcet: c });
            }
        }
        Ok(ExecutionTimes(exec))
    }

    pub fn as_slice(&self) -> &[Work] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionSequence {
    pub cores: usize,
    /// `grid[t][p]`: vertex executing on core `p` during `[t, t + 1)`.
    pub grid: Vec<Vec<Option<VertexId>>>,
    pub start: Vec<Work>,
    pub finish: Vec<Work>,
    pub makespan: Work,
}

impl ExecutionSequence {
    /// Executed units per vertex, read off the grid.
    pub fn exec_times(&self, n: usize) -> Vec<Work> {
        let mut e = vec![0; n];
        for v in self.grid.iter().flatten().flatten() {
            if v.index() < n {
                e[v.index()] += 1;
            }
        }
        e
    }

    pub fn to_json(&self, dag: &Dag) -> TraceJson {
        TraceJson {
            cores: self.cores,
            makespan: self.makespan,
            grid: self
                .grid
                .iter()
                .map(|row| row.iter().map(|c| c.map(|v| dag.name(v).to_owned())).collect())
                .collect(),
            start: dag.vertices().map(|v| (dag.name(v).to_owned(), self.start[v.index()])).collect(),
            finish: dag.vertices().map(|v| (dag.name(v).to_owned(), self.finish[v.index()])).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceJson {
    pub cores: usize,
    pub makespan: Work,
    pub grid: Vec<Vec<Option<String>>>,
    pub start: Vec<(String, Work)>,
    pub finish: Vec<(String, Work)>,
}

pub fn simulate(dag: &Dag, cores: usize, policy: &Policy, times: &ExecutionTimes) -> Result<ExecutionSequence> {
    if cores == 0 {
        return Err(Error::ZeroCores);
    }
    let times = ExecutionTimes::new(dag, times.0.clone())?;
    let n = dag.len();
    let mut remaining = times.0;
    let mut waiting_on: Vec<usize> = dag.vertices().map(|v| dag.preds(v).len()).collect();
    let mut eligible_at: Vec<Option<Work>> = vec![None; n];
    let mut start: Vec<Option<Work>> = vec![None; n];
    let mut finish: Vec<Option<Work>> = vec![None; n];
    let mut last_core: Vec<Option<usize>> = vec![None; n];
    let mut unfinished = n;

    let rank: Vec<usize> = match policy {
        Policy::Priority(order) => {
            let mut rank = vec![usize::MAX; n];
            for (i, v) in order.iter().enumerate() {
                if v.index() < n && rank[v.index()] == usize::MAX {
                    rank[v.index()] = i;
                }
            }
            rank
        }
        _ => Vec::new(),
    };
    let mut rng = match policy {
        Policy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };

    let mut grid = Vec::new();
    let mut newly_eligible: Vec<VertexId> = dag.sources();
    let mut ready: Vec<VertexId> = Vec::new();
    let mut t: Work = 0;
    loop {
        // Admit newly eligible vertices; zero-work ones finish on the spot and
        // may release their successors within the same instant.
        while let Some(v) = newly_eligible.pop() {
            eligible_at[v.index()] = Some(t);
            if remaining[v.index()] == 0 {
                start[v.index()] = Some(t);
                finish[v.index()] = Some(t);
                unfinished -= 1;
                release(dag, v, &mut waiting_on, &mut newly_eligible);
            } else {
                ready.push(v);
            }
        }
        if unfinished == 0 {
            break;
        }
        assert!(!ready.is_empty(), "an unfinished DAG always has an eligible vertex");

        ready.sort_unstable();
        match policy {
            Policy::Lexicographic => {}
            Policy::Fifo => ready.sort_by_key(|v| (eligible_at[v.index()], *v)),
            Policy::Priority(_) => ready.sort_by_key(|v| (rank[v.index()], *v)),
            Policy::Random { .. } => ready.shuffle(rng.as_mut().expect("seeded")),
        }
        let chosen: Vec<VertexId> = ready.iter().take(cores).copied().collect();

        // Keep a vertex on the core it used in the previous unit when possible.
        let mut row: Vec<Option<VertexId>> = vec![None; cores];
        let mut unplaced = Vec::new();
        for &v in &chosen {
            match last_core[v.index()] {
                Some(p) if row[p].is_none() => row[p] = Some(v),
                _ => unplaced.push(v),
            }
        }
        for v in unplaced {
            let p = row.iter().position(Option::is_none).expect("at most `cores` vertices chosen");
            row[p] = Some(v);
        }

        let mut done = Vec::new();
        for (p, slot) in row.iter().enumerate() {
            let Some(v) = *slot else { continue };
            start[v.index()].get_or_insert(t);
            last_core[v.index()] = Some(p);
            remaining[v.index()] -= 1;
            if remaining[v.index()] == 0 {
                done.push(v);
            }
        }
        grid.push(row);
        t += 1;
        ready.retain(|v| remaining[v.index()] > 0);
        for v in done {
            finish[v.index()] = Some(t);
            unfinished -= 1;
            release(dag, v, &mut waiting_on, &mut newly_eligible);
        }
    }

    let start: Vec<Work> = start.into_iter().map(|s| s.expect("every vertex started")).collect();
    let finish: Vec<Work> = finish.into_iter().map(|f| f.expect("every vertex finished")).collect();
    let makespan = finish.iter().copied().max().unwrap_or(0);
    debug_assert_eq!(makespan, grid.len() as Work);
    Ok(ExecutionSequence { cores, grid, start, finish, makespan })
}

fn release(dag: &Dag, v: VertexId, waiting_on: &mut [usize], out: &mut Vec<VertexId>) {
    for &w in dag.successors(v) {
        waiting_on[w.index()] -= 1;
        if waiting_on[w.index()] == 0 {
            out.push(w);
        }
    }
}

/// Full structural check of a trace; the error names the first violation.
pub fn verify_sequence(seq: &ExecutionSequence, dag: &Dag, cores: usize) -> Result<(), String> {
    let n = dag.len();
    if seq.cores != cores {
        return Err(format!("trace is for {} cores, expected {cores}", seq.cores));
    }
    if seq.start.len() != n || seq.finish.len() != n {
        return Err("start/finish vectors do not match the vertex count".into());
    }
    if seq.grid.len() as Work != seq.makespan {
        return Err(format!("grid has {} rows but makespan is {}", seq.grid.len(), seq.makespan));
    }
    let mut first = vec![None; n];
    let mut last = vec![None; n];
    let mut exec = vec![0 as Work; n];
    for (t, row) in seq.grid.iter().enumerate() {
        if row.len() != cores {
            return Err(format!("row {t} has {} cores", row.len()));
        }
        let mut in_row: Vec<VertexId> = row.iter().flatten().copied().collect();
        if let Some(v) = in_row.iter().find(|v| v.index() >= n) {
            return Err(format!("unknown vertex {v} at t={t}"));
        }
        in_row.sort_unstable();
        if in_row.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("a vertex occupies two cores at t={t}"));
        }
        for v in in_row {
            let t = t as Work;
            first[v.index()].get_or_insert(t);
            last[v.index()] = Some(t);
            exec[v.index()] += 1;
        }
    }

    for v in dag.vertices() {
        let i = v.index();
        if exec[i] > dag.wcet(v) {
            return Err(format!("{v} runs {} units, WCET is {}", exec[i], dag.wcet(v)));
        }
        let released = dag.preds(v).iter().map(|u| seq.finish[u.index()]).max().unwrap_or(0);
        match (first[i], last[i]) {
            (Some(s), Some(l)) => {
                if seq.start[i] != s || seq.finish[i] != l + 1 {
                    return Err(format!("{v}: recorded [{}, {}) disagrees with the grid", seq.start[i], seq.finish[i]));
                }
                if s < released {
                    return Err(format!("{v} starts at {s} before its predecessors finish at {released}"));
                }
            }
            _ => {
                if seq.start[i] != released || seq.finish[i] != released {
                    return Err(format!("zero-work vertex {v} must finish at its release time {released}"));
                }
            }
        }
    }
    let latest = seq.finish.iter().copied().max().unwrap_or(0);
    if latest != seq.makespan {
        return Err(format!("makespan {} differs from the latest finish {latest}", seq.makespan));
    }

    for (t, row) in seq.grid.iter().enumerate() {
        let t = t as Work;
        let busy = row.iter().flatten().count();
        let active = dag
            .vertices()
            .filter(|&v| {
                exec[v.index()] > 0
                    && seq.finish[v.index()] > t
                    && dag.preds(v).iter().all(|u| seq.finish[u.index()] <= t)
            })
            .count();
        if busy != active.min(cores) {
            return Err(format!("t={t}: {busy} cores busy while {active} vertices are eligible"));
        }
    }
    Ok(())
}

/// True iff the trace respects precedence, WCETs and the work-conserving rule.
pub fn check_work_conserving(seq: &ExecutionSequence, dag: &Dag, cores: usize) -> bool {
    verify_sequence(seq, dag, cores).is_ok()
}

/// The predecessor of `v` that finishes last; ties go to the lowest id.
pub fn critical_predecessor(seq: &ExecutionSequence, dag: &Dag, v: VertexId) -> Option<VertexId> {
    // preds are id-sorted, so keep the first maximum
    dag.preds(v).iter().copied().fold(None, |best: Option<VertexId>, u| match best {
        Some(b) if seq.finish[b.index()] >= seq.finish[u.index()] => Some(b),
        _ => Some(u),
    })
}

/// Walks critical predecessors back from the sink to the source.
pub fn critical_path(seq: &ExecutionSequence, dag: &Dag) -> Result<Vec<VertexId>> {
    let sink = dag.sink().ok_or(Error::NotNormalized)?;
    let mut path = vec![sink];
    let mut cur = sink;
    while let Some(u) = critical_predecessor(seq, dag, cur) {
        path.push(u);
        cur = u;
    }
    path.reverse();
    Ok(path)
}

/// For every vertex `v` with critical predecessor `u`, all cores are busy
/// throughout `[f(u), s(v))`.
pub fn check_busy_between(seq: &ExecutionSequence, dag: &Dag, cores: usize) -> bool {
    dag.vertices().all(|v| {
        let Some(u) = critical_predecessor(seq, dag, v) else { return true };
        (seq.finish[u.index()]..seq.start[v.index()]).all(|t| {
            seq.grid
                .get(t as usize)
                .is_some_and(|row| row.len() == cores && row.iter().all(Option::is_some))
        })
    })
}
