//! Random DAG tasks and task sets.
//!
//! DAGs follow the Erdős–Rényi construction: for every ordered pair of
//! vertex indices `i < j` an edge `i -> j` is added with probability `pf`.
//! Larger `pf` gives more sequential graphs.
//!
//! Randomness comes from ChaCha8. Sample `i` of an experiment uses stream
//! `i` of the generator seeded with the configuration seed, so results do
//! not depend on evaluation order or worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dag::{Dag, Work};
use crate::decompose::model_of;
use crate::error::{Error, Result};
use crate::federated::{Task, TaskSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub wcet_range: (Work, Work),
    pub pf_range: (f64, f64),
    pub nvertex_range: (usize, usize),
    pub alpha_range: (f64, f64),
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            wcet_range: (50, 100),
            pf_range: (0.1, 0.9),
            nvertex_range: (50, 250),
            alpha_range: (0.0, 0.5),
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameters(msg.to_owned()));
        let (wl, wh) = self.wcet_range;
        if wl == 0 || wl > wh {
            return bad("wcet_range must be a non-empty interval of positive values");
        }
        let (pl, ph) = self.pf_range;
        if !(0.0..=1.0).contains(&pl) || !(0.0..=1.0).contains(&ph) || pl > ph {
            return bad("pf_range must be a non-empty sub-interval of [0, 1]");
        }
        let (nl, nh) = self.nvertex_range;
        if nl == 0 || nl > nh {
            return bad("nvertex_range must be a non-empty interval of positive counts");
        }
        let (al, ah) = self.alpha_range;
        if !(al >= 0.0 && al <= ah && ah.is_finite()) {
            return bad("alpha_range must be a non-empty interval of non-negative values");
        }
        Ok(())
    }

    /// Generator for sample `index` of this configuration.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn uniform_f64(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Random DAG, normalized to a single source and sink with zero-WCET dummies.
pub fn gen_dag(params: &GenParams, rng: &mut impl Rng) -> Dag {
    let n = rng.random_range(params.nvertex_range.0..=params.nvertex_range.1);
    let pf = uniform_f64(rng, params.pf_range);
    gen_dag_with(n, pf, params.wcet_range, rng)
}

/// [`gen_dag`] with the vertex count and edge probability fixed.
pub fn gen_dag_with(n: usize, pf: f64, wcet_range: (Work, Work), rng: &mut impl Rng) -> Dag {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < pf {
                edges.push((i, j));
            }
        }
    }
    let wcets = (0..n).map(|_| rng.random_range(wcet_range.0..=wcet_range.1)).collect();
    Dag::new(wcets, &edges).expect("forward edges cannot form a cycle").normalize()
}

/// `D = T = floor(L + alpha * (C - L))`, never below `L` and at least 1.
pub fn deadline_for(total: Work, longest: Work, alpha: f64) -> Work {
    let slack = (alpha * (total - longest) as f64).floor();
    let slack = if slack.is_finite() && slack > 0.0 { slack as Work } else { 0 };
    (longest + slack).max(1)
}

pub fn make_task(dag: &Dag, alpha: f64) -> Task {
    let model = model_of(dag);
    let d = deadline_for(model.total_work(), model.longest(), alpha);
    Task::new(model, d, d).expect("L <= D = T by construction")
}

/// Draws a DAG and an `alpha` from `params` and builds the task.
pub fn gen_task(params: &GenParams, rng: &mut impl Rng) -> Task {
    let dag = gen_dag(params, rng);
    let alpha = uniform_f64(rng, params.alpha_range);
    make_task(&dag, alpha)
}

/// Appends random tasks while the total utilization stays within
/// `target_nu * cores`. The first task that would overshoot is discarded and
/// generation stops.
pub fn gen_taskset(target_nu: f64, cores: usize, params: &GenParams, rng: &mut impl Rng) -> TaskSet {
    gen_taskset_traced(target_nu, cores, params, rng).0
}

/// Like [`gen_taskset`], also returning the utilization of the discarded task.
pub fn gen_taskset_traced(target_nu: f64, cores: usize, params: &GenParams, rng: &mut impl Rng) -> (TaskSet, f64) {
    let cap = target_nu * cores as f64;
    let mut tasks = Vec::new();
    let mut total = 0.0;
    loop {
        let task = gen_task(params, rng);
        let u = task.utilization();
        if total + u > cap {
            return (TaskSet { tasks }, u);
        }
        total += u;
        tasks.push(task);
    }
}
