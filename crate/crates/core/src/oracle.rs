//! Exhaustive worst-case makespan over every work-conserving schedule of a
//! small DAG, optionally also over every vector of actual execution times.
//!
//! The search works at unit granularity and ignores core identity: a branch
//! is the *set* of vertices that run in a time unit. Execution times are not
//! fixed up front; instead each vertex decides, when it becomes eligible,
//! whether it runs at all, and after each executed unit whether it stops.
//! Every pair (execution-time vector, schedule) corresponds to exactly one
//! such decision sequence, so the maximum over the search equals the maximum
//! over both. Memoisation on the per-vertex progress vector keeps it small.

use std::collections::HashMap;

use crate::dag::{Dag, Work};
use crate::error::{Error, Result};

pub const MAX_TOTAL_WORK: Work = 10;
pub const MAX_WORK_VERTICES: usize = 7;
pub const MAX_VERTICES: usize = 9;
pub const MAX_CORES: usize = 3;

const UNDECIDED: u8 = u8::MAX;
const DONE: u8 = u8::MAX - 1;

/// Largest makespan any work-conserving scheduler can produce on `cores`.
///
/// Budget: total work at most 10, at most 7 vertices with non-zero WCET
/// (and 9 overall, leaving room for dummy source and sink), at most 3 cores.
pub fn exhaustive_max_makespan(dag: &Dag, cores: usize, vary_exec: bool) -> Result<Work> {
    if cores == 0 {
        return Err(Error::ZeroCores);
    }
    let work_vertices = dag.wcets().iter().filter(|&&c| c > 0).count();
    if dag.volume() > MAX_TOTAL_WORK
        || work_vertices > MAX_WORK_VERTICES
        || dag.len() > MAX_VERTICES
        || cores > MAX_CORES
    {
        return Err(Error::BudgetExceeded(format!(
            "{} vertices ({work_vertices} with work), total work {}, {cores} cores",
            dag.len(),
            dag.volume()
        )));
    }
    let mut search = Search { dag, cores, vary_exec, memo: HashMap::new() };
    Ok(search.longest(vec![UNDECIDED; dag.len()]))
}

struct Search<'a> {
    dag: &'a Dag,
    cores: usize,
    vary_exec: bool,
    memo: HashMap<Vec<u8>, Work>,
}

impl Search<'_> {
    // state[v]: UNDECIDED before v is released, DONE once finished, otherwise
    // the number of units v has executed so far.
    fn longest(&mut self, state: Vec<u8>) -> Work {
        if let Some(&r) = self.memo.get(&state) {
            return r;
        }
        let r = self.expand(&state);
        self.memo.insert(state, r);
        r
    }

    fn expand(&mut self, state: &[u8]) -> Work {
        let dag = self.dag;
        // Settle the lowest released-but-undecided vertex: it either carries
        // no work (finishes now) or commits to at least one unit.
        let released = dag.vertices().find(|&v| {
            state[v.index()] == UNDECIDED && dag.preds(v).iter().all(|u| state[u.index()] == DONE)
        });
        if let Some(v) = released {
            let mut best = 0;
            if dag.wcet(v) == 0 || self.vary_exec {
                let mut next = state.to_vec();
                next[v.index()] = DONE;
                best = best.max(self.longest(next));
            }
            if dag.wcet(v) > 0 {
                let mut next = state.to_vec();
                next[v.index()] = 0;
                best = best.max(self.longest(next));
            }
            return best;
        }

        let ready: Vec<usize> = (0..state.len()).filter(|&i| state[i] != UNDECIDED && state[i] != DONE).collect();
        if ready.is_empty() {
            debug_assert!(state.iter().all(|&s| s == DONE));
            return 0;
        }
        let take = ready.len().min(self.cores);
        let mut best = 0;
        for chosen in combinations(&ready, take) {
            let mut advanced = state.to_vec();
            for &i in &chosen {
                advanced[i] += 1;
            }
            // For each running vertex that could still continue, optionally stop it.
            let optional: Vec<usize> = chosen
                .iter()
                .copied()
                .filter(|&i| (advanced[i] as Work) < self.dag.wcets()[i])
                .collect();
            for &i in &chosen {
                if advanced[i] as Work == self.dag.wcets()[i] {
                    advanced[i] = DONE;
                }
            }
            let stop_sets = if self.vary_exec { 1usize << optional.len() } else { 1 };
            for mask in 0..stop_sets {
                let mut next = advanced.clone();
                for (b, &i) in optional.iter().enumerate() {
                    if mask & (1 << b) != 0 {
                        next[i] = DONE;
                    }
                }
                best = best.max(1 + self.longest(next));
            }
        }
        best
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in from..items.len() {
            if items.len() - i < k - current.len() {
                break;
            }
            current.push(items[i]);
            rec(items, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, k, 0, &mut current, &mut out);
    out
}
