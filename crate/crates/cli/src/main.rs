use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dagbound::bounds::{graham_bound, multipath_bound, to_f64};
use dagbound::experiment::{self, ExperimentConfig, Metric, Sweep};
use dagbound::sim::{self, check_busy_between, simulate, verify_sequence, ExecutionTimes, Policy};
use dagbound::taskgen::{gen_dag, gen_taskset, GenParams};
use dagbound::{decompose, model_of, Dag, Error, Method, TaskSet, VertexId, Work};

#[derive(Parser)]
#[command(name = "dagbound", version, about = "Response-time bounds and federated scheduling for DAG tasks")]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Samples per configuration point.
    #[arg(long, global = true, default_value_t = 500)]
    samples: usize,
    /// Output file (or directory for `gen`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sample evaluation (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Fifo,
    Lexicographic,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Bounds for one DAG on `m` cores.
    Analyze {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long)]
        cores: usize,
    },
    /// Print the generalized path list of a DAG.
    Decompose {
        #[arg(long)]
        dag: PathBuf,
    },
    /// Run the work-conserving simulator and print the trace.
    Simulate {
        #[arg(long)]
        dag: PathBuf,
        #[arg(long)]
        cores: usize,
        #[arg(long, value_enum, default_value = "fifo")]
        policy: PolicyArg,
        /// JSON object mapping vertex names to execution times (missing names run their full WCET).
        #[arg(long)]
        exec_times: Option<PathBuf>,
        /// Verify the trace and compare its makespan with the bounds.
        #[arg(long)]
        check: bool,
    },
    /// Write random DAGs as JSON files.
    Gen {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Write a random task set as JSON.
    GenTaskset {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        cores: usize,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Federated schedulability of a task set.
    Sched {
        #[arg(long)]
        taskset: PathBuf,
        #[arg(long)]
        cores: usize,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// Parameter sweep; emits one CSV row per grid point (and method).
    Experiment {
        /// bound | cores | accept (defaults by sweep: m/pf/v -> bound, alpha -> cores, nu -> accept)
        metric: Option<String>,
        #[arg(long)]
        sweep: String,
        #[arg(long = "metric", conflicts_with = "metric")]
        metric_flag: Option<String>,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        /// Core count when `m` is not swept (default 4, or 32 for `accept`).
        #[arg(long)]
        cores: Option<usize>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fed,
    Our,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(m) => Failure::Invariant(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure::Input(e.to_string())),
        },
        None => run(&cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_dag(path: &Path) -> CliResult<Dag> {
    Ok(Dag::from_json_str(&read(path)?)?.normalize())
}

fn load_params(path: Option<&PathBuf>, seed: u64) -> CliResult<GenParams> {
    let mut params = match path {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => GenParams::default(),
    };
    params.seed = seed;
    params.validate()?;
    Ok(params)
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string()))
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze { dag, cores } => analyze(cli, &load_dag(dag)?, *cores),
        Command::Decompose { dag } => {
            let dag = load_dag(dag)?;
            emit(cli, &json(&decompose(&dag).to_json(&dag)))
        }
        Command::Simulate { dag, cores, policy, exec_times, check } => {
            let dag = load_dag(dag)?;
            let times = match exec_times {
                Some(p) => parse_exec_times(&dag, &read(p)?)?,
                None => ExecutionTimes::full(&dag),
            };
            let policy = match policy {
                PolicyArg::Fifo => Policy::Fifo,
                PolicyArg::Lexicographic => Policy::Lexicographic,
                PolicyArg::Random => Policy::Random { seed: cli.seed },
            };
            simulate_cmd(cli, &dag, *cores, &policy, &times, *check)
        }
        Command::Gen { params, count } => {
            let params = load_params(params.as_ref(), cli.seed)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            let width = count.to_string().len().max(4);
            for i in 0..*count {
                let dag = gen_dag(&params, &mut params.rng(i as u64));
                let path = dir.join(format!("dag_{i:0width$}.json"));
                let mut text = dag.to_json_string();
                text.push('\n');
                fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::GenTaskset { nu, cores, params } => {
            if !(0.0..=1.0).contains(nu) || *cores == 0 {
                return Err(Failure::Input("need nu in [0, 1] and at least one core".into()));
            }
            let params = load_params(params.as_ref(), cli.seed)?;
            let ts = gen_taskset(*nu, *cores, &params, &mut params.rng(0));
            emit(cli, &json(&ts))
        }
        Command::Sched { taskset, cores, method } => {
            if *cores == 0 {
                return Err(Failure::Input("core count must be at least 1".into()));
            }
            let ts = TaskSet::from_json_str(&read(taskset)?)?;
            let method = match method {
                MethodArg::Fed => Method::Fed,
                MethodArg::Our => Method::Our,
            };
            emit(cli, &json(&dagbound::federated::schedulable(&ts, *cores, method)))
        }
        Command::Experiment { metric, sweep, metric_flag, grid, cores, params } => {
            let sweep: Sweep = sweep.parse()?;
            let metric: Metric = match metric.as_ref().or(metric_flag.as_ref()) {
                Some(m) => m.parse()?,
                None => sweep.default_metric(),
            };
            let mut cfg = ExperimentConfig::new(sweep, metric);
            cfg.samples = cli.samples;
            cfg.params = load_params(params.as_ref(), cli.seed)?;
            if let Some(g) = grid {
                cfg.grid = g.clone();
            }
            if let Some(m) = cores {
                cfg.cores = *m;
            }
            let rows = experiment::run(&cfg)?;
            match cli.format {
                Some(Format::Json) => emit(cli, &json(&rows)),
                _ => emit(cli, &experiment::to_csv(&rows)),
            }
        }
    }
}

#[derive(Serialize)]
struct Analysis {
    #[serde(rename = "C")]
    total_work: Work,
    #[serde(rename = "L")]
    longest: Work,
    path_lengths: Vec<Work>,
    k_bar: Option<usize>,
    k_used: Option<usize>,
    graham: f64,
    graham_exact: String,
    multipath: f64,
    multipath_exact: String,
    normalized: Option<f64>,
}

fn analyze(cli: &Cli, dag: &Dag, cores: usize) -> CliResult<()> {
    let model = model_of(dag);
    let g = graham_bound(model.total_work(), model.longest(), cores)?;
    let o = multipath_bound(&model, cores)?;
    if o > g {
        return Err(Failure::Invariant(format!("multi-path bound {o} exceeds Graham bound {g}")));
    }
    let a = Analysis {
        total_work: model.total_work(),
        longest: model.longest(),
        path_lengths: model.lengths().to_vec(),
        k_bar: model.k_bar(),
        k_used: model.k_for(cores),
        graham: to_f64(g),
        graham_exact: g.to_string(),
        multipath: to_f64(o),
        multipath_exact: o.to_string(),
        normalized: (g != 0.into()).then(|| to_f64(o / g)),
    };
    match cli.format {
        Some(Format::Csv) => {
            let lengths: Vec<String> = a.path_lengths.iter().map(ToString::to_string).collect();
            let opt = |x: Option<usize>| x.map(|k| k.to_string()).unwrap_or_default();
            emit(
                cli,
                &format!(
                    "C,L,path_lengths,k_bar,k_used,graham,multipath,normalized\n{},{},{},{},{},{:.6},{:.6},{}\n",
                    a.total_work,
                    a.longest,
                    lengths.join(" "),
                    opt(a.k_bar),
                    opt(a.k_used),
                    a.graham,
                    a.multipath,
                    a.normalized.map(|x| format!("{x:.6}")).unwrap_or_default()
                ),
            )
        }
        _ => emit(cli, &json(&a)),
    }
}

fn parse_exec_times(dag: &Dag, text: &str) -> CliResult<ExecutionTimes> {
    let raw: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("execution times: {e}")))?;
    let mut exec = dag.wcets().to_vec();
    for (name, value) in raw {
        let v = dag.vertex_by_name(&name).ok_or(Error::UnknownName(name.clone()))?;
        exec[v.index()] = value
            .as_u64()
            .ok_or_else(|| Failure::Input(format!("execution time of {name:?} is not a non-negative integer")))?;
    }
    Ok(ExecutionTimes::new(dag, exec)?)
}

#[derive(Serialize)]
struct SimulationReport {
    trace: sim::TraceJson,
    makespan: Work,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<CheckReport>,
}

#[derive(Serialize)]
struct CheckReport {
    work_conserving: bool,
    busy_between: bool,
    critical_path: Vec<String>,
    graham: f64,
    multipath: f64,
    within_bound: bool,
}

fn simulate_cmd(cli: &Cli, dag: &Dag, cores: usize, policy: &Policy, times: &ExecutionTimes, check: bool) -> CliResult<()> {
    let seq = simulate(dag, cores, policy, times)?;
    let report = if check {
        let model = model_of(dag);
        let g = graham_bound(model.total_work(), model.longest(), cores)?;
        let o = multipath_bound(&model, cores)?;
        let critical: Vec<VertexId> = sim::critical_path(&seq, dag)?;
        Some(CheckReport {
            work_conserving: verify_sequence(&seq, dag, cores).is_ok(),
            busy_between: check_busy_between(&seq, dag, cores),
            critical_path: critical.iter().map(|&v| dag.name(v).to_owned()).collect(),
            graham: to_f64(g),
            multipath: to_f64(o),
            within_bound: dagbound::Rational::from_integer(seq.makespan) <= o && o <= g,
        })
    } else {
        None
    };
    let failed = report.as_ref().is_some_and(|c| !(c.work_conserving && c.busy_between && c.within_bound));
    let out = SimulationReport { trace: seq.to_json(dag), makespan: seq.makespan, check: report };
    emit(cli, &json(&out))?;
    if failed {
        if let Err(e) = verify_sequence(&seq, dag, cores) {
            return Err(Failure::Invariant(e));
        }
        return Err(Failure::Invariant("simulated trace violates a checked property".into()));
    }
    Ok(())
}
