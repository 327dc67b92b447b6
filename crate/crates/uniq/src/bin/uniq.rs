use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uniq::cli::{
    self, BenchSpec, BenchWorkload, Planner, SolveOptions,
};
use uniq::error::Error;
use uniq::model::ObjectiveWeights;
use uniq::network::TopologyKind;
use uniq::scheduler::GenMode;

#[derive(Parser)]
#[command(
    name = "uniq",
    about = "Distributed-quantum-computing planner: mapping, EPR-aware slot scheduling, validation, benchmarks"
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a planner end-to-end and write plan, validation report, and metrics.
    Solve(SolveArgs),
    /// Run planner batches over presets or sweeps and emit a CSV of records.
    Bench(BenchArgs),
    /// Export the per-slot timeline of a validated plan.
    Timeline(TimelineArgs),
    /// Generate circuit or topology documents.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Validate a plan against the constraint model.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Circuit file (gate-list JSON or the QASM subset).
    #[arg(long)]
    circuit: PathBuf,
    /// Topology JSON file.
    #[arg(long)]
    topology: PathBuf,
    #[arg(long, default_value = "uniq")]
    planner: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// EPR generation mode: inslot | latest-earlier.
    #[arg(long, default_value = "inslot")]
    mode: String,
    /// Slot horizon; defaults to the gate count.
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    sa_iterations: u64,
    /// SA wall-clock budget in seconds.
    #[arg(long, default_value_t = 600.0)]
    sa_time_budget: f64,
    /// Output directory for plan.json, validation.json, metrics.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated presets: tiny,small,medium,large.
    #[arg(long)]
    preset: Option<String>,
    /// Sweep the communication budget over these values (needs --preset
    /// with a single entry).
    #[arg(long)]
    sweep_comm: Option<String>,
    /// Compare topology kinds (comma-separated) on fixed workloads.
    #[arg(long)]
    topologies: Option<String>,
    /// Node count for --topologies.
    #[arg(long, default_value_t = 25)]
    nodes: usize,
    /// Per-QPU computing qubits for --topologies.
    #[arg(long, default_value_t = 5)]
    cap: u32,
    /// Per-QPU communication qubits for --topologies.
    #[arg(long, default_value_t = 10)]
    comm: u32,
    /// Circuit qubits for --topologies.
    #[arg(long, default_value_t = 100)]
    qubits: usize,
    /// Circuit gates for --topologies.
    #[arg(long, default_value_t = 150)]
    gates: usize,
    /// Comma-separated planners.
    #[arg(long, default_value = "uniq")]
    planners: String,
    /// Instances per group.
    #[arg(long, default_value_t = 3)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value = "inslot")]
    mode: String,
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    sa_iterations: u64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimelineArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Generate a random circuit document.
    Circuit {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        gates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a topology document.
    Topology {
        /// square | triangle | hexagonal | random.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        cap: u32,
        #[arg(long, default_value_t = 10)]
        comm: u32,
        /// Required for the random kind.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    /// Output path for the report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match run(args) {
        Ok(code) => code,
        Err(err) => {
            let class = err.class();
            let message = err.to_string();
            eprintln!(
                "{}",
                serde_json::json!({ "error": class, "message": message })
            );
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn parse_list<T: std::str::FromStr<Err = Error>>(text: &str) -> Result<Vec<T>, Error> {
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse())
        .collect()
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => println!("{content}"),
    }
    Ok(())
}

fn run(args: CliArgs) -> Result<ExitCode, Error> {
    match args.command {
        Command::Solve(a) => {
            let opts = SolveOptions {
                planner: a.planner.parse()?,
                weights: ObjectiveWeights::new(a.alpha, a.beta)?,
                mode: a.mode.parse()?,
                horizon: a.horizon,
                seed: a.seed,
                sa_iterations: a.sa_iterations,
                sa_time_budget: a.sa_time_budget,
                ..SolveOptions::default()
            };
            let outcome = cli::cmd_solve(&a.circuit, &a.topology, &opts, &a.out)?;
            println!(
                "planner={} objective={} makespan={} remote={} feasible={} wall={:.6}s",
                opts.planner.name(),
                outcome.metrics.objective,
                outcome.metrics.makespan_slots,
                outcome.metrics.remote_gates,
                outcome.report.feasible,
                outcome.metrics.algo_wall_time
            );
            Ok(if outcome.report.feasible {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Bench(a) => {
            let workload = build_workload(&a)?;
            let spec = BenchSpec {
                workload,
                planners: parse_list::<Planner>(&a.planners)?,
                reps: a.reps,
                seed: a.seed,
                weights: ObjectiveWeights::new(a.alpha, a.beta)?,
                mode: a.mode.parse::<GenMode>()?,
                horizon: a.horizon,
                sa_iterations: a.sa_iterations,
            };
            let output = cli::run_bench(&spec)?;
            match &a.out {
                Some(path) => {
                    let mut file = fs::File::create(path)?;
                    cli::write_bench_csv(&mut file, &output)?;
                    file.flush()?;
                }
                None => {
                    let mut bytes = Vec::new();
                    cli::write_bench_csv(&mut bytes, &output)?;
                    print!("{}", String::from_utf8_lossy(&bytes));
                }
            }
            for stat in &output.summary {
                eprintln!(
                    "summary group={} planner={} n={} mean_objective={:.3} mean_wall={:.6}s",
                    stat.group,
                    stat.planner,
                    stat.feasible_records,
                    stat.mean_objective,
                    stat.mean_wall_time
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Timeline(a) => {
            let doc = cli::cmd_timeline(&a.plan, &a.circuit, &a.topology)?;
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            emit(a.out.as_ref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen(kind) => {
            match kind {
                GenCommand::Circuit {
                    qubits,
                    gates,
                    seed,
                    out,
                } => {
                    let doc = cli::gen_circuit_doc(qubits, gates, seed)?;
                    emit(out.as_ref(), &doc)?;
                }
                GenCommand::Topology {
                    kind,
                    n,
                    cap,
                    comm,
                    seed,
                    out,
                } => {
                    let kind: TopologyKind = kind.parse()?;
                    let doc = cli::gen_topology_doc(kind, n, cap, comm, seed)?;
                    emit(out.as_ref(), &doc)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(a) => {
            let report = cli::cmd_validate(&a.plan, &a.circuit, &a.topology)?;
            emit(a.out.as_ref(), &report.to_json())?;
            Ok(if report.feasible {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn build_workload(a: &BenchArgs) -> Result<BenchWorkload, Error> {
    if let Some(kinds) = &a.topologies {
        return Ok(BenchWorkload::TopologyCompare {
            kinds: parse_list::<TopologyKind>(kinds)?,
            nodes: a.nodes,
            cap: a.cap,
            comm: a.comm,
            qubits: a.qubits,
            gates: a.gates,
        });
    }
    let presets = match &a.preset {
        Some(names) => names
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| cli::preset(s.trim()))
            .collect::<Result<Vec<_>, _>>()?,
        None => cli::PRESETS.to_vec(),
    };
    if let Some(values) = &a.sweep_comm {
        if presets.len() != 1 {
            return Err(Error::InvalidInput(
                "--sweep-comm needs exactly one --preset".into(),
            ));
        }
        let values: Result<Vec<u32>, _> = values
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidInput(format!("bad comm value `{s}`")))
            })
            .collect();
        return Ok(BenchWorkload::CommSweep {
            preset: presets[0],
            values: values?,
        });
    }
    Ok(BenchWorkload::Presets(presets))
}
