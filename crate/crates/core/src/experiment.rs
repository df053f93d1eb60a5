//! Parameter sweeps over randomly generated tasks.
//!
//! Three metrics are supported:
//! - `bound`: multi-path bound divided by Graham's bound for single DAGs;
//! - `cores`: fractional multi-path core count divided by the fractional
//!   Graham core count;
//! - `accept`: acceptance ratio of FED and OUR on random task sets.
//!
//! Sample `i` of every grid point draws from the same random stream, so
//! neighbouring points see correlated inputs. Samples are evaluated in
//! parallel and reduced in index order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{fractional_cores_graham, fractional_cores_multipath, graham_bound, multipath_bound, to_f64, Rational};
use crate::decompose::model_of;
use crate::error::{Error, Result};
use crate::federated::{schedulable, Method};
use crate::taskgen::{gen_dag, gen_taskset, make_task, GenParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    M,
    Pf,
    Nvertex,
    Alpha,
    Nu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Bound,
    Cores,
    Accept,
}

impl FromStr for Sweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "m" => Sweep::M,
            "pf" => Sweep::Pf,
            "v" | "nvertex" => Sweep::Nvertex,
            "alpha" => Sweep::Alpha,
            "nu" => Sweep::Nu,
            _ => return Err(Error::InvalidParameters(format!("unknown sweep {s:?}"))),
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bound" => Metric::Bound,
            "cores" => Metric::Cores,
            "accept" => Metric::Accept,
            _ => return Err(Error::InvalidParameters(format!("unknown metric {s:?}"))),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Bound => "bound",
            Metric::Cores => "cores",
            Metric::Accept => "accept",
        })
    }
}

impl Sweep {
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Sweep::M => vec![2.0, 4.0, 8.0, 16.0, 32.0],
            Sweep::Pf => (1..=9).map(|i| i as f64 / 10.0).collect(),
            Sweep::Nvertex => vec![50.0, 100.0, 150.0, 200.0, 250.0],
            Sweep::Alpha => (1..=10).map(|i| i as f64 / 20.0).collect(),
            Sweep::Nu => (1..=8).map(|i| i as f64 / 10.0).collect(),
        }
    }

    /// The metric a sweep reports when none is requested.
    pub fn default_metric(self) -> Metric {
        match self {
            Sweep::M | Sweep::Pf | Sweep::Nvertex => Metric::Bound,
            Sweep::Alpha => Metric::Cores,
            Sweep::Nu => Metric::Accept,
        }
    }

    fn supports(self, metric: Metric) -> bool {
        match metric {
            Metric::Bound => matches!(self, Sweep::M | Sweep::Pf | Sweep::Nvertex),
            Metric::Cores => matches!(self, Sweep::Alpha | Sweep::Pf | Sweep::Nvertex),
            Metric::Accept => matches!(self, Sweep::Nu | Sweep::M | Sweep::Pf | Sweep::Nvertex),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub sweep: Sweep,
    pub metric: Metric,
    pub grid: Vec<f64>,
    pub samples: usize,
    /// Core count for points where `m` is not the swept variable.
    pub cores: usize,
    /// Range `nu` is drawn from when it is not swept.
    pub nu_range: (f64, f64),
    pub params: GenParams,
}

impl ExperimentConfig {
    pub fn new(sweep: Sweep, metric: Metric) -> Self {
        ExperimentConfig {
            sweep,
            metric,
            grid: sweep.default_grid(),
            samples: 500,
            cores: if metric == Metric::Accept { 32 } else { 4 },
            nu_range: (0.0, 0.8),
            params: GenParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sweep.supports(self.metric) {
            return Err(Error::InvalidParameters(format!(
                "metric {} is not available for sweep {:?}",
                self.metric, self.sweep
            )));
        }
        if self.grid.is_empty() || self.samples == 0 || self.cores == 0 {
            return Err(Error::InvalidParameters("grid, samples and cores must be non-empty".into()));
        }
        self.params.validate()?;
        for &x in &self.grid {
            self.point(x)?.1.validate()?;
        }
        Ok(())
    }

    /// Core count and generator parameters at grid value `x`.
    fn point(&self, x: f64) -> Result<(usize, GenParams)> {
        let mut params = self.params.clone();
        let mut cores = self.cores;
        match self.sweep {
            Sweep::M => {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(Error::InvalidParameters(format!("core count {x} is not a positive integer")));
                }
                cores = x as usize;
            }
            Sweep::Pf => params.pf_range = (x, x),
            Sweep::Nvertex => {
                if x < 1.0 || x.fract() != 0.0 {
                    return Err(Error::InvalidParameters(format!("vertex count {x} is not a positive integer")));
                }
                params.nvertex_range = (x as usize, x as usize);
            }
            Sweep::Alpha => params.alpha_range = (x, x),
            Sweep::Nu => {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidParameters(format!("nu {x} outside [0, 1]")));
                }
            }
        }
        Ok((cores, params))
    }
}

/// One CSV row. Quartiles are empty for acceptance ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub metric: Metric,
    pub method: String,
    pub mean: f64,
    pub p25: Option<f64>,
    pub p50: Option<f64>,
    pub p75: Option<f64>,
    pub n: usize,
}

pub const CSV_HEADER: &str = "sweep_value,metric,method,mean,p25,p50,p75,n";

fn fmt_num(x: f64) -> String {
    format!("{x:.6}")
}

impl Row {
    pub fn to_csv(&self) -> String {
        let q = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_num(self.sweep_value),
            self.metric,
            self.method,
            fmt_num(self.mean),
            q(self.p25),
            q(self.p50),
            q(self.p75),
            self.n
        )
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summary(x: f64, metric: Metric, method: &str, values: &[f64]) -> Row {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nonempty = !sorted.is_empty();
    let quart = |q| nonempty.then(|| quantile(&sorted, q));
    Row {
        sweep_value: x,
        metric,
        method: method.to_owned(),
        mean: if nonempty { values.iter().sum::<f64>() / values.len() as f64 } else { f64::NAN },
        p25: quart(0.25),
        p50: quart(0.5),
        p75: quart(0.75),
        n: values.len(),
    }
}

/// Exact ratio of the multi-path bound to Graham's bound for one random DAG.
pub fn normalized_bound_sample(params: &GenParams, cores: usize, index: u64) -> Result<Rational> {
    let dag = gen_dag(params, &mut params.rng(index));
    let model = model_of(&dag);
    let g = graham_bound(model.total_work(), model.longest(), cores)?;
    let o = multipath_bound(&model, cores)?;
    if o > g || o == Rational::from_integer(0) {
        return Err(Error::InvariantViolation(format!(
            "sample {index}: multi-path bound {o} vs Graham bound {g} on {cores} cores"
        )));
    }
    Ok(o / g)
}

/// Exact fractional core ratio for one random task; `None` when `D = L`.
pub fn core_ratio_sample(params: &GenParams, index: u64) -> Result<Option<Rational>> {
    let mut rng = params.rng(index);
    let dag = gen_dag(params, &mut rng);
    let alpha = if params.alpha_range.0 == params.alpha_range.1 {
        params.alpha_range.0
    } else {
        rng.random_range(params.alpha_range.0..=params.alpha_range.1)
    };
    let task = make_task(&dag, alpha);
    let (c, l, d) = (task.total_work(), task.longest(), task.deadline);
    if d == l || d > c {
        return Ok(None);
    }
    let g = fractional_cores_graham(c, l, d)?;
    let o = fractional_cores_multipath(&task.model, d)?;
    if o > g || o == Rational::from_integer(0) {
        return Err(Error::InvariantViolation(format!("sample {index}: fractional cores {o} vs {g}")));
    }
    Ok(Some(o / g))
}

/// FED and OUR decisions for one random task set.
pub fn acceptance_sample(params: &GenParams, nu: Option<f64>, nu_range: (f64, f64), cores: usize, index: u64) -> Result<[bool; 2]> {
    let mut rng = params.rng(index);
    let nu = nu.unwrap_or_else(|| if nu_range.0 == nu_range.1 { nu_range.0 } else { rng.random_range(nu_range.0..=nu_range.1) });
    let ts = gen_taskset(nu, cores, params, &mut rng);
    let fed = schedulable(&ts, cores, Method::Fed);
    let our = schedulable(&ts, cores, Method::Our);
    for r in [&fed, &our] {
        if r.accepted && r.cores_used() > cores as u64 {
            return Err(Error::InvariantViolation(format!("sample {index}: accepted set uses {} > {cores} cores", r.cores_used())));
        }
    }
    if fed.accepted && !our.accepted {
        return Err(Error::InvariantViolation(format!("sample {index}: FED accepts a set OUR rejects")));
    }
    Ok([fed.accepted, our.accepted])
}

/// Acceptance ratio of `method` at fixed `nu` and core count.
pub fn acceptance_ratio(nu: f64, cores: usize, samples: usize, params: &GenParams, method: Method) -> Result<f64> {
    let slot = match method {
        Method::Fed => 0,
        Method::Our => 1,
    };
    let hits = (0..samples as u64)
        .into_par_iter()
        .map(|i| acceptance_sample(params, Some(nu), (nu, nu), cores, i).map(|r| r[slot] as usize))
        .collect::<Result<Vec<_>>>()?;
    Ok(hits.iter().sum::<usize>() as f64 / samples as f64)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let n = cfg.samples as u64;
    for &x in &cfg.grid {
        let (cores, params) = cfg.point(x)?;
        match cfg.metric {
            Metric::Bound => {
                let values = (0..n)
                    .into_par_iter()
                    .map(|i| normalized_bound_sample(&params, cores, i).map(to_f64))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(summary(x, cfg.metric, "our/graham", &values));
            }
            Metric::Cores => {
                let values = (0..n)
                    .into_par_iter()
                    .map(|i| core_ratio_sample(&params, i).map(|r| r.map(to_f64)))
                    .collect::<Result<Vec<_>>>()?;
                let values: Vec<f64> = values.into_iter().flatten().collect();
                rows.push(summary(x, cfg.metric, "our/fed", &values));
            }
            Metric::Accept => {
                let nu = (cfg.sweep == Sweep::Nu).then_some(x);
                let decisions = (0..n)
                    .into_par_iter()
                    .map(|i| acceptance_sample(&params, nu, cfg.nu_range, cores, i))
                    .collect::<Result<Vec<_>>>()?;
                for (slot, method) in Method::ALL.iter().enumerate() {
                    let accepted = decisions.iter().filter(|d| d[slot]).count();
                    rows.push(Row {
                        sweep_value: x,
                        metric: cfg.metric,
                        method: method.to_string(),
                        mean: accepted as f64 / cfg.samples as f64,
                        p25: None,
                        p50: None,
                        p75: None,
                        n: cfg.samples,
                    });
                }
            }
        }
    }
    Ok(rows)
}
