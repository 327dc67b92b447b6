//! End-to-end pipeline used by the command-line front end: input loading
//! and generation, planner dispatch, validation, batch benchmarking, and
//! timeline export.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{
    average_plan, exact_solve, random_plan, sa_improve, ExactLimits, SaParams,
};
use crate::circuit::{
    build_interaction_graph, build_precedence, parse_gate_list, parse_qasm_subset, to_gate_list,
    Circuit, PrecedenceDag,
};
use crate::error::{Error, Result};
use crate::mapper::map_qubits;
use crate::model::{
    compute_metrics, constraint_name, validate, LatencyTable, Metrics, ObjectiveWeights, Plan,
    ValidationReport,
};
use crate::network::{
    all_pairs_costs, gen_topology, CostMatrix, QpuProfile, Topology, TopologyKind,
};
use crate::scheduler::{schedule, EprSeries, GenMode};
use crate::seed;

/// Planner selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planner {
    Uniq,
    Random,
    Average,
    Sa,
    Exact,
}

impl Planner {
    pub fn name(self) -> &'static str {
        match self {
            Planner::Uniq => "uniq",
            Planner::Random => "random",
            Planner::Average => "average",
            Planner::Sa => "sa",
            Planner::Exact => "exact",
        }
    }

    pub const ALL: [Planner; 5] = [
        Planner::Uniq,
        Planner::Random,
        Planner::Average,
        Planner::Sa,
        Planner::Exact,
    ];
}

impl std::str::FromStr for Planner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniq" => Ok(Planner::Uniq),
            "random" => Ok(Planner::Random),
            "average" => Ok(Planner::Average),
            "sa" => Ok(Planner::Sa),
            "exact" => Ok(Planner::Exact),
            other => Err(Error::InvalidInput(format!(
                "unknown planner `{other}` (expected uniq|random|average|sa|exact)"
            ))),
        }
    }
}

/// Workload scale presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchPreset {
    pub name: &'static str,
    pub gates: usize,
    pub qubits: usize,
    pub qpus: usize,
    pub cap: u32,
    pub comm: u32,
}

pub const PRESETS: [BenchPreset; 4] = [
    BenchPreset {
        name: "tiny",
        gates: 10,
        qubits: 10,
        qpus: 2,
        cap: 5,
        comm: 10,
    },
    BenchPreset {
        name: "small",
        gates: 20,
        qubits: 15,
        qpus: 3,
        cap: 5,
        comm: 10,
    },
    BenchPreset {
        name: "medium",
        gates: 50,
        qubits: 32,
        qpus: 4,
        cap: 8,
        comm: 10,
    },
    BenchPreset {
        name: "large",
        gates: 100,
        qubits: 60,
        qpus: 5,
        cap: 12,
        comm: 10,
    },
];

pub fn preset(name: &str) -> Result<BenchPreset> {
    PRESETS
        .iter()
        .copied()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown preset `{name}` (expected tiny|small|medium|large)"
            ))
        })
}

/// A generated problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub circuit: Circuit,
    pub topology: Topology,
}

/// Materialize a preset: a seeded random circuit over a seeded random
/// connected cloud whose nodes all carry the preset capacity and budget.
pub fn preset_instance(p: &BenchPreset, circuit_seed: u64, topo_seed: u64) -> Result<Instance> {
    Ok(Instance {
        circuit: Circuit::random(p.qubits, p.gates, circuit_seed)?,
        topology: gen_topology(
            TopologyKind::Random,
            p.qpus,
            QpuProfile {
                cap: p.cap,
                comm: p.comm,
            },
            Some(topo_seed),
        )?,
    })
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub planner: Planner,
    pub weights: ObjectiveWeights,
    pub mode: GenMode,
    pub horizon: Option<u32>,
    pub seed: u64,
    pub sa_iterations: u64,
    pub sa_time_budget: f64,
    pub exact_limits: ExactLimits,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            planner: Planner::Uniq,
            weights: ObjectiveWeights::default(),
            mode: GenMode::InSlot,
            horizon: None,
            seed: 0,
            sa_iterations: 1000,
            sa_time_budget: 600.0,
            exact_limits: ExactLimits::default(),
        }
    }
}

fn effective_horizon(c: &Circuit, requested: Option<u32>) -> u32 {
    requested.unwrap_or_else(|| (c.num_gates() as u32).max(1))
}

/// Dispatch one planner over a prepared instance, returning the plan and
/// the planner wall time in seconds.
pub fn run_planner(
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
    costs: &CostMatrix,
    opts: &SolveOptions,
) -> Result<(Plan, f64)> {
    let horizon = effective_horizon(c, opts.horizon);
    let started = Instant::now();
    let plan = match opts.planner {
        Planner::Uniq => {
            let w = build_interaction_graph(c);
            let mapping = map_qubits(&w, t, costs)?;
            let ind = crate::mapper::derive_indicators(&mapping, c)?;
            let (sched, _) = schedule(c, dag, &mapping, &ind, t, horizon, opts.mode)?;
            Plan::new(mapping, sched, ind)?
        }
        Planner::Random => random_plan(c, dag, t, horizon, opts.seed)?,
        Planner::Average => average_plan(c, dag, t, horizon)?,
        Planner::Sa => {
            let w = build_interaction_graph(c);
            let mapping = map_qubits(&w, t, costs)?;
            let ind = crate::mapper::derive_indicators(&mapping, c)?;
            let (sched, _) = schedule(c, dag, &mapping, &ind, t, horizon, opts.mode)?;
            let initial = Plan::new(mapping, sched, ind)?;
            let params = SaParams {
                iterations: opts.sa_iterations,
                time_budget: opts.sa_time_budget,
                seed: opts.seed,
                ..SaParams::default()
            };
            sa_improve(&initial, c, dag, t, costs, &opts.weights, &params)?
        }
        Planner::Exact => exact_solve(
            c,
            dag,
            t,
            costs,
            &opts.weights,
            horizon,
            &opts.exact_limits,
        )?,
    };
    Ok((plan, started.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: Plan,
    pub report: ValidationReport,
    pub metrics: Metrics,
}

/// Parse inputs, run the selected planner, validate, and compute metrics.
pub fn solve_from_texts(
    circuit_text: &str,
    topology_text: &str,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let circuit = read_circuit_text(circuit_text)?;
    let topology = Topology::from_json(topology_text)?;
    let costs = all_pairs_costs(&topology)?;
    let dag = build_precedence(&circuit);
    let (plan, wall) = run_planner(&circuit, &dag, &topology, &costs, opts)?;
    let report = validate(&plan, &circuit, &dag, &topology)?;
    let metrics = compute_metrics(
        &plan,
        &costs,
        &opts.weights,
        &LatencyTable::default(),
        wall,
    )?;
    Ok(SolveOutcome {
        plan,
        report,
        metrics,
    })
}

/// Gate-list documents start with `{`; anything else is treated as the
/// QASM subset.
pub fn read_circuit_text(text: &str) -> Result<Circuit> {
    if text.trim_start().starts_with('{') {
        parse_gate_list(text)
    } else {
        parse_qasm_subset(text)
    }
}

/// Solve end-to-end over files, writing `plan.json`, `validation.json`,
/// and `metrics.json` into `out_dir`.
pub fn cmd_solve(
    circuit_path: &Path,
    topology_path: &Path,
    opts: &SolveOptions,
    out_dir: &Path,
) -> Result<SolveOutcome> {
    let circuit_text = fs::read_to_string(circuit_path)?;
    let topology_text = fs::read_to_string(topology_path)?;
    let outcome = solve_from_texts(&circuit_text, &topology_text, opts)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("plan.json"), outcome.plan.to_doc())?;
    fs::write(out_dir.join("validation.json"), outcome.report.to_json())?;
    fs::write(out_dir.join("metrics.json"), outcome.metrics.to_json())?;
    Ok(outcome)
}

/// One bench result row. Metric fields are empty when the run failed.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub planner: &'static str,
    pub seed: u64,
    pub objective: Option<f64>,
    pub makespan_slots: Option<u32>,
    pub runtime_cx: Option<f64>,
    pub remote_gates: Option<u32>,
    pub algo_wall_time: f64,
    pub feasible: bool,
}

pub const BENCH_CSV_HEADER: &str =
    "instance,planner,seed,objective,makespan_slots,runtime_cx,remote_gates,algo_wall_time,feasible";

/// What a bench run iterates over.
#[derive(Debug, Clone)]
pub enum BenchWorkload {
    /// Independent instances per preset.
    Presets(Vec<BenchPreset>),
    /// One preset with the communication budget swept over `values`;
    /// circuits and link structure are shared across values so the sweep
    /// isolates the budget.
    CommSweep {
        preset: BenchPreset,
        values: Vec<u32>,
    },
    /// Fixed workloads run over each topology kind (shared circuits).
    TopologyCompare {
        kinds: Vec<TopologyKind>,
        nodes: usize,
        cap: u32,
        comm: u32,
        qubits: usize,
        gates: usize,
    },
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub workload: BenchWorkload,
    pub planners: Vec<Planner>,
    pub reps: u32,
    pub seed: u64,
    pub weights: ObjectiveWeights,
    pub mode: GenMode,
    pub horizon: Option<u32>,
    pub sa_iterations: u64,
}

/// Per-(group, planner) aggregate over feasible records.
#[derive(Debug, Clone, Serialize)]
pub struct GroupStat {
    pub group: String,
    pub planner: &'static str,
    pub feasible_records: usize,
    pub mean_objective: f64,
    pub mean_wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub summary: Vec<GroupStat>,
}

struct BenchGroup {
    name: String,
    instances: Vec<Instance>,
}

fn build_groups(spec: &BenchSpec) -> Result<Vec<BenchGroup>> {
    let reps = spec.reps as usize;
    let mut groups = Vec::new();
    match &spec.workload {
        BenchWorkload::Presets(presets) => {
            for (g, p) in presets.iter().enumerate() {
                let mut instances = Vec::with_capacity(reps);
                for i in 0..reps {
                    let cseed = seed::derive(spec.seed, &[g as u64, i as u64, 0]);
                    let tseed = seed::derive(spec.seed, &[g as u64, i as u64, 1]);
                    instances.push(preset_instance(p, cseed, tseed)?);
                }
                groups.push(BenchGroup {
                    name: p.name.to_string(),
                    instances,
                });
            }
        }
        BenchWorkload::CommSweep { preset, values } => {
            for &comm in values {
                let mut instances = Vec::with_capacity(reps);
                for i in 0..reps {
                    let cseed = seed::derive(spec.seed, &[i as u64, 0]);
                    let tseed = seed::derive(spec.seed, &[i as u64, 1]);
                    let p = BenchPreset { comm, ..*preset };
                    instances.push(preset_instance(&p, cseed, tseed)?);
                }
                groups.push(BenchGroup {
                    name: format!("{}-comm{comm}", preset.name),
                    instances,
                });
            }
        }
        BenchWorkload::TopologyCompare {
            kinds,
            nodes,
            cap,
            comm,
            qubits,
            gates,
        } => {
            for &kind in kinds {
                let mut instances = Vec::with_capacity(reps);
                for i in 0..reps {
                    let cseed = seed::derive(spec.seed, &[i as u64, 0]);
                    let tseed = seed::derive(spec.seed, &[i as u64, 1]);
                    let topology = gen_topology(
                        kind,
                        *nodes,
                        QpuProfile {
                            cap: *cap,
                            comm: *comm,
                        },
                        Some(tseed),
                    )?;
                    instances.push(Instance {
                        circuit: Circuit::random(*qubits, *gates, cseed)?,
                        topology,
                    });
                }
                groups.push(BenchGroup {
                    name: kind.name().to_string(),
                    instances,
                });
            }
        }
    }
    Ok(groups)
}

/// Run the whole batch. Individual planner failures become infeasible
/// records; the run continues.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchOutput> {
    if spec.planners.is_empty() {
        return Err(Error::InvalidInput(
            "bench needs at least one planner".into(),
        ));
    }
    if spec.reps == 0 {
        return Err(Error::InvalidInput("bench needs at least one repetition".into()));
    }
    let groups = build_groups(spec)?;
    let mut records = Vec::new();
    let mut summary = Vec::new();

    for (g, group) in groups.iter().enumerate() {
        let mut per_planner: Vec<(usize, f64, f64)> = vec![(0, 0.0, 0.0); spec.planners.len()];
        for (i, instance) in group.instances.iter().enumerate() {
            let dag = build_precedence(&instance.circuit);
            let costs = all_pairs_costs(&instance.topology)?;
            for (pi, &planner) in spec.planners.iter().enumerate() {
                let run_seed = seed::derive(spec.seed, &[g as u64, i as u64, 2 + pi as u64]);
                let opts = SolveOptions {
                    planner,
                    weights: spec.weights,
                    mode: spec.mode,
                    horizon: spec.horizon,
                    seed: run_seed,
                    sa_iterations: spec.sa_iterations,
                    ..SolveOptions::default()
                };
                let started = Instant::now();
                let result = run_planner(&instance.circuit, &dag, &instance.topology, &costs, &opts)
                    .and_then(|(plan, wall)| {
                        let report = validate(&plan, &instance.circuit, &dag, &instance.topology)?;
                        let metrics = compute_metrics(
                            &plan,
                            &costs,
                            &spec.weights,
                            &LatencyTable::default(),
                            wall,
                        )?;
                        Ok((report, metrics))
                    });
                match result {
                    Ok((report, metrics)) => {
                        let feasible = report.feasible;
                        if feasible {
                            let slot = &mut per_planner[pi];
                            slot.0 += 1;
                            slot.1 += metrics.objective;
                            slot.2 += metrics.algo_wall_time;
                        }
                        records.push(BenchRecord {
                            instance: format!("{}-{i}", group.name),
                            planner: planner.name(),
                            seed: run_seed,
                            objective: Some(metrics.objective),
                            makespan_slots: Some(metrics.makespan_slots),
                            runtime_cx: Some(metrics.runtime_cx),
                            remote_gates: Some(metrics.remote_gates),
                            algo_wall_time: metrics.algo_wall_time,
                            feasible,
                        });
                    }
                    Err(_) => {
                        records.push(BenchRecord {
                            instance: format!("{}-{i}", group.name),
                            planner: planner.name(),
                            seed: run_seed,
                            objective: None,
                            makespan_slots: None,
                            runtime_cx: None,
                            remote_gates: None,
                            algo_wall_time: started.elapsed().as_secs_f64(),
                            feasible: false,
                        });
                    }
                }
            }
        }
        for (pi, &planner) in spec.planners.iter().enumerate() {
            let (count, obj_sum, wall_sum) = per_planner[pi];
            if count > 0 {
                summary.push(GroupStat {
                    group: group.name.clone(),
                    planner: planner.name(),
                    feasible_records: count,
                    mean_objective: obj_sum / count as f64,
                    mean_wall_time: wall_sum / count as f64,
                });
            }
        }
    }

    Ok(BenchOutput { records, summary })
}

/// Write records as CSV with the stable header order.
pub fn write_bench_csv(out: &mut dyn Write, output: &BenchOutput) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in &output.records {
        writer
            .serialize(record)
            .map_err(|e| Error::InvalidInput(format!("csv write failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| Error::InvalidInput(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Per-slot gate groups plus the EPR series, the plot-ready timeline shape.
#[derive(Debug, Clone, Serialize)]
pub struct TimelineDoc {
    pub makespan: u32,
    pub slots: Vec<TimelineSlot>,
    pub epr: EprSeries,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimelineSlot {
    pub slot: u32,
    pub local: Vec<usize>,
    pub remote: Vec<usize>,
}

/// Export the timeline of a validated plan; an invalid plan is rejected
/// with the first failing constraint named.
pub fn timeline(
    plan: &Plan,
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
) -> Result<TimelineDoc> {
    let report = validate(plan, c, dag, t)?;
    if let Some(letter) = report.first_failure() {
        return Err(Error::Infeasible(format!(
            "plan fails constraint {letter} ({})",
            constraint_name(letter)
        )));
    }
    let makespan = plan.schedule.makespan();
    let mut slots: Vec<TimelineSlot> = (1..=makespan)
        .map(|slot| TimelineSlot {
            slot,
            local: Vec::new(),
            remote: Vec::new(),
        })
        .collect();
    for g in 0..plan.schedule.num_gates() {
        let slot = plan.schedule.slot_of(g) as usize - 1;
        if plan.indicators.is_remote(g) {
            slots[slot].remote.push(g + 1);
        } else {
            slots[slot].local.push(g + 1);
        }
    }
    let mut generated = vec![0u32; makespan as usize];
    let mut consumed = vec![0u32; makespan as usize];
    for g in 0..plan.schedule.num_gates() {
        if let Some(gen) = plan.schedule.gen_slot_of(g) {
            generated[gen as usize - 1] += 1;
            consumed[plan.schedule.slot_of(g) as usize - 1] += 1;
        }
    }
    Ok(TimelineDoc {
        makespan,
        slots,
        epr: EprSeries {
            generated,
            consumed,
        },
    })
}

pub fn cmd_timeline(
    plan_path: &Path,
    circuit_path: &Path,
    topology_path: &Path,
) -> Result<TimelineDoc> {
    let circuit = read_circuit_text(&fs::read_to_string(circuit_path)?)?;
    let topology = Topology::from_json(&fs::read_to_string(topology_path)?)?;
    let plan = Plan::from_doc(&fs::read_to_string(plan_path)?, &circuit)?;
    let dag = build_precedence(&circuit);
    timeline(&plan, &circuit, &dag, &topology)
}

pub fn cmd_validate(
    plan_path: &Path,
    circuit_path: &Path,
    topology_path: &Path,
) -> Result<ValidationReport> {
    let circuit = read_circuit_text(&fs::read_to_string(circuit_path)?)?;
    let topology = Topology::from_json(&fs::read_to_string(topology_path)?)?;
    let plan = Plan::from_doc(&fs::read_to_string(plan_path)?, &circuit)?;
    let dag = build_precedence(&circuit);
    validate(&plan, &circuit, &dag, &topology)
}

pub fn gen_circuit_doc(qubits: usize, gates: usize, seed: u64) -> Result<String> {
    Ok(to_gate_list(&Circuit::random(qubits, gates, seed)?))
}

pub fn gen_topology_doc(
    kind: TopologyKind,
    n: usize,
    cap: u32,
    comm: u32,
    seed: Option<u64>,
) -> Result<String> {
    Ok(gen_topology(kind, n, QpuProfile { cap, comm }, seed)?.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_the_workload_table() {
        let tiny = preset("tiny").unwrap();
        assert_eq!(
            (tiny.gates, tiny.qubits, tiny.qpus, tiny.cap, tiny.comm),
            (10, 10, 2, 5, 10)
        );
        let small = preset("small").unwrap();
        assert_eq!(
            (small.gates, small.qubits, small.qpus, small.cap, small.comm),
            (20, 15, 3, 5, 10)
        );
        let medium = preset("medium").unwrap();
        assert_eq!(
            (medium.gates, medium.qubits, medium.qpus, medium.cap, medium.comm),
            (50, 32, 4, 8, 10)
        );
        let large = preset("large").unwrap();
        assert_eq!(
            (large.gates, large.qubits, large.qpus, large.cap, large.comm),
            (100, 60, 5, 12, 10)
        );
        assert!(preset("huge").is_err());
    }

    #[test]
    fn planner_names_round_trip() {
        for p in Planner::ALL {
            assert_eq!(p.name().parse::<Planner>().unwrap(), p);
        }
        assert!("greedy".parse::<Planner>().is_err());
    }

    #[test]
    fn bench_rejects_empty_planner_list() {
        let spec = BenchSpec {
            workload: BenchWorkload::Presets(vec![preset("tiny").unwrap()]),
            planners: Vec::new(),
            reps: 1,
            seed: 0,
            weights: ObjectiveWeights::default(),
            mode: GenMode::InSlot,
            horizon: None,
            sa_iterations: 10,
        };
        assert!(matches!(
            run_bench(&spec).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn bench_produces_one_record_per_instance_and_planner() {
        let spec = BenchSpec {
            workload: BenchWorkload::Presets(vec![preset("tiny").unwrap()]),
            planners: vec![Planner::Uniq, Planner::Random],
            reps: 3,
            seed: 5,
            weights: ObjectiveWeights::default(),
            mode: GenMode::InSlot,
            horizon: None,
            sa_iterations: 10,
        };
        let out = run_bench(&spec).unwrap();
        assert_eq!(out.records.len(), 6);
        assert!(out.records.iter().all(|r| r.feasible));
        let mut csv_bytes = Vec::new();
        write_bench_csv(&mut csv_bytes, &out).unwrap();
        let text = String::from_utf8(csv_bytes).unwrap();
        assert!(text.starts_with(BENCH_CSV_HEADER));
    }

    #[test]
    fn solve_from_texts_runs_the_pipeline() {
        let circuit = gen_circuit_doc(6, 8, 3).unwrap();
        let topo = gen_topology_doc(TopologyKind::Random, 2, 3, 4, Some(7)).unwrap();
        let outcome = solve_from_texts(&circuit, &topo, &SolveOptions::default()).unwrap();
        assert!(outcome.report.feasible);
        assert!(outcome.metrics.objective > 0.0);
    }
}
