//! Independent plan validation against the nine model constraints,
//! objective evaluation, and metric computation.
//!
//! The validator never trusts derived data carried by a plan: the locality
//! indicators are recomputed from the mapping and compared against the
//! plan's copies, and the EPR inventory is rebuilt from the raw decision
//! variables by the stored-pairs recursion before its bounds are checked.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, PrecedenceDag};
use crate::error::{Error, Result};
use crate::mapper::{derive_indicators, GateIndicators, Mapping};
use crate::network::{CostMatrix, Topology};
use crate::scheduler::{EprSeries, Schedule, ScheduleDoc};

/// A complete execution plan: the decision triple (mapping, gate slots,
/// EPR-generation slots) plus the locality indicators derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub mapping: Mapping,
    pub schedule: Schedule,
    pub indicators: GateIndicators,
}

impl Plan {
    pub fn new(mapping: Mapping, schedule: Schedule, indicators: GateIndicators) -> Result<Self> {
        if schedule.num_gates() != indicators.num_gates() {
            return Err(Error::MappingMismatch(format!(
                "schedule covers {} gates, indicators {}",
                schedule.num_gates(),
                indicators.num_gates()
            )));
        }
        Ok(Plan {
            mapping,
            schedule,
            indicators,
        })
    }

    pub fn to_doc(&self) -> String {
        let doc = PlanDoc {
            mapping: self.mapping.clone(),
            schedule: self.schedule.to_doc(),
        };
        serde_json::to_string_pretty(&doc).expect("plan document serializes")
    }

    /// Parse a plan document against the circuit it schedules; indicators
    /// are rederived from the mapping.
    pub fn from_doc(doc: &str, c: &Circuit) -> Result<Self> {
        let doc: PlanDoc =
            serde_json::from_str(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        if doc.mapping.num_qubits() != c.num_qubits() {
            return Err(Error::MappingMismatch(format!(
                "plan maps {} qubits, circuit has {}",
                doc.mapping.num_qubits(),
                c.num_qubits()
            )));
        }
        let schedule = Schedule::from_doc(doc.schedule)?;
        if schedule.num_gates() != c.num_gates() {
            return Err(Error::MappingMismatch(format!(
                "plan schedules {} gates, circuit has {}",
                schedule.num_gates(),
                c.num_gates()
            )));
        }
        let indicators = derive_indicators(&doc.mapping, c)?;
        Plan::new(doc.mapping, schedule, indicators)
    }
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    mapping: Mapping,
    schedule: ScheduleDoc,
}

/// Weights of the two objective terms. Both non-negative, not both zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl ObjectiveWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidInput(
                "objective weights must be non-negative".into(),
            ));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(Error::InvalidInput(
                "objective weights must not both be zero".into(),
            ));
        }
        Ok(ObjectiveWeights { alpha, beta })
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Operation latencies in CX units; only the EPR preparation time enters
/// metric conversion (one slot = one EPR preparation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyTable {
    pub t_1q: f64,
    pub t_2q: f64,
    pub t_ms: f64,
    pub t_ep: f64,
}

impl LatencyTable {
    pub fn new(t_1q: f64, t_2q: f64, t_ms: f64, t_ep: f64) -> Result<Self> {
        if !(t_1q > 0.0 && t_2q > t_1q && t_ms > t_2q && t_ep > t_ms) {
            return Err(Error::InvalidInput(
                "latencies must satisfy 0 < t_1q < t_2q < t_ms < t_ep".into(),
            ));
        }
        Ok(LatencyTable {
            t_1q,
            t_2q,
            t_ms,
            t_ep,
        })
    }
}

impl Default for LatencyTable {
    fn default() -> Self {
        LatencyTable {
            t_1q: 0.1,
            t_2q: 1.0,
            t_ms: 5.0,
            t_ep: 12.0,
        }
    }
}

/// First violation found for a constraint. Gate ids are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Qubit { qubit: usize },
    Qpu { qpu: usize },
    Gate { gate: usize },
    Edge { pred: usize, succ: usize },
    QpuSlot { qpu: usize, slot: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict {
            ok: true,
            witness: None,
        }
    }

    fn fail(witness: Witness) -> Self {
        Verdict {
            ok: false,
            witness: Some(witness),
        }
    }
}

/// Per-constraint verdicts. `feasible` is true iff all nine pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub feasible: bool,
    pub a: Verdict,
    pub b: Verdict,
    pub c: Verdict,
    pub d: Verdict,
    pub e: Verdict,
    pub f: Verdict,
    pub g: Verdict,
    pub h: Verdict,
    pub i: Verdict,
}

impl ValidationReport {
    pub fn verdicts(&self) -> [(&'static str, &Verdict); 9] {
        [
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
            ("e", &self.e),
            ("f", &self.f),
            ("g", &self.g),
            ("h", &self.h),
            ("i", &self.i),
        ]
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.verdicts().into_iter().find(|(_, v)| !v.ok).map(|(n, _)| n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Human name for each constraint letter, for error messages.
pub fn constraint_name(letter: &str) -> &'static str {
    match letter {
        "a" => "mapping uniqueness",
        "b" => "QPU capacity",
        "c" => "single execution slot",
        "d" => "locality indicator",
        "e" => "EPR generation requirement",
        "f" => "EPR before execution",
        "g" => "precedence",
        "h" => "endpoint-pair indicator",
        "i" => "EPR inventory bounds",
        _ => "unknown",
    }
}

/// Raw decision variables of a plan, as slot supports. The canonical
/// [`validate`] wraps a [`Plan`] into this form; tests can also construct
/// degenerate supports (missing or duplicated slots) directly.
pub struct PlanVariables<'a> {
    pub assign: &'a [usize],
    /// Execution-slot support per gate (constraint c wants exactly one).
    pub exec_slots: &'a [Vec<u32>],
    /// EPR-generation-slot support per gate.
    pub gen_slots: &'a [Vec<u32>],
    /// The plan's claimed locality flags, checked against recomputation.
    pub claimed_delta: &'a [bool],
    /// The plan's claimed endpoint pairs (normalized min, max).
    pub claimed_theta: &'a [Option<(usize, usize)>],
    pub horizon: u32,
}

/// Validate a plan against all nine constraints. Violations are verdicts,
/// not errors; only a structural mismatch with the circuit is an error.
pub fn validate(
    p: &Plan,
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
) -> Result<ValidationReport> {
    if p.mapping.num_qubits() != c.num_qubits()
        || p.schedule.num_gates() != c.num_gates()
        || p.indicators.num_gates() != c.num_gates()
        || dag.num_gates() != c.num_gates()
    {
        return Err(Error::MappingMismatch(
            "plan does not structurally match the circuit".into(),
        ));
    }
    let exec_slots: Vec<Vec<u32>> = (0..c.num_gates())
        .map(|g| {
            let s = p.schedule.slot_of(g);
            if s >= 1 {
                vec![s]
            } else {
                Vec::new()
            }
        })
        .collect();
    let gen_slots: Vec<Vec<u32>> = (0..c.num_gates())
        .map(|g| p.schedule.gen_slot_of(g).into_iter().collect())
        .collect();
    let claimed_delta: Vec<bool> = (0..c.num_gates()).map(|g| p.indicators.is_remote(g)).collect();
    let claimed_theta: Vec<Option<(usize, usize)>> =
        (0..c.num_gates()).map(|g| p.indicators.endpoints(g)).collect();
    let vars = PlanVariables {
        assign: p.mapping.assign(),
        exec_slots: &exec_slots,
        gen_slots: &gen_slots,
        claimed_delta: &claimed_delta,
        claimed_theta: &claimed_theta,
        horizon: p.schedule.horizon(),
    };
    Ok(validate_variables(&vars, c, dag, t))
}

/// Constraint checks over raw slot supports.
pub fn validate_variables(
    v: &PlanVariables,
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
) -> ValidationReport {
    let p = t.num_qpus();
    let n = c.num_qubits();
    let m = c.num_gates();
    let h = v.horizon;

    // (a) every qubit on exactly one valid QPU.
    let mut a = Verdict::pass();
    for q in 0..n {
        if v.assign[q] >= p {
            a = Verdict::fail(Witness::Qubit { qubit: q });
            break;
        }
    }

    // (b) per-QPU load within capacity.
    let mut b = Verdict::pass();
    let mut loads = vec![0u64; p];
    for &u in v.assign.iter().filter(|&&u| u < p) {
        loads[u] += 1;
    }
    for u in 0..p {
        if loads[u] > u64::from(t.cap(u)) {
            b = Verdict::fail(Witness::Qpu { qpu: u });
            break;
        }
    }

    // (c) exactly one execution slot per gate, within 1..=H.
    let mut cc = Verdict::pass();
    for g in 0..m {
        let slots = &v.exec_slots[g];
        if slots.len() != 1 || slots.iter().any(|&s| s < 1 || s > h) {
            cc = Verdict::fail(Witness::Gate { gate: g + 1 });
            break;
        }
    }

    // Locality recomputed from the mapping; out-of-range hosts count as
    // remote with no endpoint pair.
    let recomputed: Vec<Option<(usize, usize)>> = c
        .gates()
        .iter()
        .map(|gate| {
            let (i, j) = gate.operands();
            let (ui, uj) = (v.assign[i], v.assign[j]);
            if ui < p && uj < p && ui != uj {
                Some((ui.min(uj), ui.max(uj)))
            } else {
                None
            }
        })
        .collect();
    let remote: Vec<bool> = c
        .gates()
        .iter()
        .map(|gate| {
            let (i, j) = gate.operands();
            v.assign[i] != v.assign[j]
        })
        .collect();

    // (d) claimed delta matches the mapping.
    let mut d = Verdict::pass();
    for g in 0..m {
        if v.claimed_delta[g] != remote[g] {
            d = Verdict::fail(Witness::Gate { gate: g + 1 });
            break;
        }
    }

    // (e) one EPR generation iff remote.
    let mut e = Verdict::pass();
    for g in 0..m {
        let count = v.gen_slots[g].iter().filter(|&&s| s >= 1 && s <= h).count();
        let expected = usize::from(remote[g]);
        if count != expected || v.gen_slots[g].len() != expected {
            e = Verdict::fail(Witness::Gate { gate: g + 1 });
            break;
        }
    }

    // (f) the pair exists no later than execution.
    let mut f = Verdict::pass();
    'f_check: for g in 0..m {
        if !remote[g] {
            continue;
        }
        for &exec in &v.exec_slots[g] {
            let covered = v.gen_slots[g].iter().any(|&gen| gen <= exec);
            if !covered {
                f = Verdict::fail(Witness::Gate { gate: g + 1 });
                break 'f_check;
            }
        }
    }

    // (g) qubit-overlap order: cumulative execution of the successor never
    // exceeds the predecessor's at any slot.
    let mut gg = Verdict::pass();
    for &(pred, succ) in dag.edges() {
        if !cumulative_dominates(&v.exec_slots[pred], &v.exec_slots[succ]) {
            gg = Verdict::fail(Witness::Edge {
                pred: pred + 1,
                succ: succ + 1,
            });
            break;
        }
    }

    // (h) claimed endpoint pairs match the mapping.
    let mut hh = Verdict::pass();
    for g in 0..m {
        if v.claimed_theta[g] != recomputed[g] {
            hh = Verdict::fail(Witness::Gate { gate: g + 1 });
            break;
        }
    }

    // (i) inventory recursion from s(.,.,0) = 0: non-negative everywhere,
    // per-QPU stored totals within the communication budget after every
    // slot.
    let mut i = Verdict::pass();
    let mut s = vec![0i64; p * p];
    'i_check: for slot in 1..=h {
        for g in 0..m {
            let Some((u, w)) = recomputed[g] else { continue };
            let gen = v.gen_slots[g].iter().filter(|&&x| x == slot).count() as i64;
            let cons = v.exec_slots[g].iter().filter(|&&x| x == slot).count() as i64;
            s[u * p + w] += gen - cons;
            s[w * p + u] += gen - cons;
        }
        for u in 0..p {
            let mut total = 0i64;
            for w in 0..p {
                let entry = s[u * p + w];
                if entry < 0 {
                    i = Verdict::fail(Witness::QpuSlot { qpu: u, slot });
                    break 'i_check;
                }
                total += entry;
            }
            if total > i64::from(t.comm(u)) {
                i = Verdict::fail(Witness::QpuSlot { qpu: u, slot });
                break 'i_check;
            }
        }
    }

    let feasible =
        a.ok && b.ok && cc.ok && d.ok && e.ok && f.ok && gg.ok && hh.ok && i.ok;
    ValidationReport {
        feasible,
        a,
        b,
        c: cc,
        d,
        e,
        f,
        g: gg,
        h: hh,
        i,
    }
}

/// True iff at every slot the cumulative count of `pred` slots is at least
/// the cumulative count of `succ` slots (the precedence inequality).
fn cumulative_dominates(pred: &[u32], succ: &[u32]) -> bool {
    if succ.len() > pred.len() {
        return false;
    }
    let mut ps: Vec<u32> = pred.to_vec();
    let mut ss: Vec<u32> = succ.to_vec();
    ps.sort_unstable();
    ss.sort_unstable();
    ss.iter().zip(&ps).all(|(s, p)| p <= s)
}

/// Evaluate the weighted objective: alpha times the sum of execution slots
/// plus beta times the endpoint-pair cost of each remote gate. The ordered
/// double sum over QPU pairs selects exactly one (u, v) per remote gate, so
/// each contributes its pair cost once.
pub fn objective(p: &Plan, costs: &CostMatrix, w: &ObjectiveWeights) -> Result<f64> {
    let mut slot_sum = 0.0;
    let mut comm_sum = 0.0;
    for g in 0..p.schedule.num_gates() {
        slot_sum += f64::from(p.schedule.slot_of(g));
        if let Some((u, v)) = p.indicators.endpoints(g) {
            if !costs.contains(u, v) {
                return Err(Error::MissingCost { u, v });
            }
            comm_sum += f64::from(costs.cost(u, v));
        }
    }
    Ok(w.alpha * slot_sum + w.beta * comm_sum)
}

/// Summary metrics for a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub objective: f64,
    pub makespan_slots: u32,
    pub runtime_cx: f64,
    pub remote_gates: u32,
    pub epr_series: EprSeries,
    pub algo_wall_time: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str =
        "objective,makespan_slots,runtime_cx,remote_gates,algo_wall_time";

    /// Flat CSV row matching [`Metrics::CSV_HEADER`] (the EPR series is
    /// omitted from the flat form).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.objective, self.makespan_slots, self.runtime_cx, self.remote_gates, self.algo_wall_time
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Assemble metrics from a plan: objective, makespan, runtime in CX units,
/// remote-gate count, the per-slot EPR series, and the measured planner
/// wall time.
pub fn compute_metrics(
    p: &Plan,
    costs: &CostMatrix,
    w: &ObjectiveWeights,
    lat: &LatencyTable,
    algo_wall_time: f64,
) -> Result<Metrics> {
    let makespan = p.schedule.makespan();
    let mut generated = vec![0u32; makespan as usize];
    let mut consumed = vec![0u32; makespan as usize];
    for g in 0..p.schedule.num_gates() {
        if let Some(gen) = p.schedule.gen_slot_of(g) {
            generated[gen as usize - 1] += 1;
            consumed[p.schedule.slot_of(g) as usize - 1] += 1;
        }
    }
    Ok(Metrics {
        objective: objective(p, costs, w)?,
        makespan_slots: makespan,
        runtime_cx: f64::from(makespan) * lat.t_ep,
        remote_gates: p.indicators.remote_count() as u32,
        epr_series: EprSeries {
            generated,
            consumed,
        },
        algo_wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_precedence;
    use crate::mapper::derive_indicators;
    use crate::network::{all_pairs_costs, QpuSpec};
    use crate::scheduler::{schedule, GenMode};

    fn two_qpus(cap: u32, comm: u32) -> Topology {
        let nodes = (0..2).map(|id| QpuSpec { id, cap, comm }).collect();
        Topology::new(nodes, vec![(0, 1)]).unwrap()
    }

    fn plan_for(c: &Circuit, assign: Vec<usize>, t: &Topology, horizon: u32) -> Plan {
        let dag = build_precedence(c);
        let m = Mapping::from_raw(assign);
        let ind = derive_indicators(&m, c).unwrap();
        let (sch, _) = schedule(c, &dag, &m, &ind, t, horizon, GenMode::InSlot).unwrap();
        Plan::new(m, sch, ind).unwrap()
    }

    /// Brute-force expansion of the objective's double sum over ordered QPU
    /// pairs and slots, straight from the 0/1 variables.
    fn objective_brute_force(
        plan: &Plan,
        c: &Circuit,
        t: &Topology,
        costs: &CostMatrix,
        w: &ObjectiveWeights,
    ) -> f64 {
        let p = t.num_qpus();
        let h = plan.schedule.horizon();
        let pi = |q: usize, u: usize| -> f64 {
            if plan.mapping.qpu_of(q) == u {
                1.0
            } else {
                0.0
            }
        };
        let z = |g: usize, slot: u32| -> f64 {
            if plan.schedule.slot_of(g) == slot {
                1.0
            } else {
                0.0
            }
        };
        let mut time_term = 0.0;
        let mut comm_term = 0.0;
        for slot in 1..=h {
            for (g, gate) in c.gates().iter().enumerate() {
                time_term += f64::from(slot) * z(g, slot);
                for u in 0..p {
                    for v in 0..p {
                        if u == v {
                            continue;
                        }
                        comm_term += f64::from(costs.cost(u, v))
                            * pi(gate.control, u)
                            * pi(gate.target, v)
                            * z(g, slot);
                    }
                }
            }
        }
        w.alpha * time_term + w.beta * comm_term
    }

    #[test]
    fn all_local_objective_sums_slots() {
        let c = Circuit::new(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let t = two_qpus(2, 4);
        let plan = plan_for(&c, vec![0, 0], &t, 3);
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::default();
        assert_eq!(objective(&plan, &costs, &w).unwrap(), 6.0);
    }

    #[test]
    fn remote_gate_adds_pair_cost_once() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let plan = plan_for(&c, vec![0, 1], &t, 1);
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::default();
        let value = objective(&plan, &costs, &w).unwrap();
        assert_eq!(value, 2.0);
        assert_eq!(value, objective_brute_force(&plan, &c, &t, &costs, &w));
    }

    #[test]
    fn brute_force_expansion_matches_on_random_instances() {
        for seed in 0..10 {
            let c = Circuit::random(8, 12, seed).unwrap();
            let t = crate::network::default_cloud(seed);
            let costs = all_pairs_costs(&t).unwrap();
            let w_graph = crate::circuit::build_interaction_graph(&c);
            let m = crate::mapper::map_qubits(&w_graph, &t, &costs).unwrap();
            let dag = build_precedence(&c);
            let ind = derive_indicators(&m, &c).unwrap();
            let (sch, _) =
                schedule(&c, &dag, &m, &ind, &t, c.num_gates() as u32, GenMode::InSlot).unwrap();
            let plan = Plan::new(m, sch, ind).unwrap();
            let w = ObjectiveWeights { alpha: 1.0, beta: 2.0 };
            let direct = objective(&plan, &costs, &w).unwrap();
            let brute = objective_brute_force(&plan, &c, &t, &costs, &w);
            assert!((direct - brute).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn alpha_zero_isolates_communication_term() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let plan = plan_for(&c, vec![0, 1], &t, 1);
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::new(0.0, 1.0).unwrap();
        assert_eq!(objective(&plan, &costs, &w).unwrap(), 1.0);
    }

    #[test]
    fn delaying_a_gate_costs_exactly_alpha() {
        let c = Circuit::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let t = two_qpus(4, 2);
        let plan = plan_for(&c, vec![0, 0, 0, 0], &t, 4);
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights { alpha: 2.5, beta: 1.0 };
        let base = objective(&plan, &costs, &w).unwrap();
        let mut delayed = plan.clone();
        let mut tau: Vec<u32> = (0..2).map(|g| plan.schedule.slot_of(g)).collect();
        tau[1] += 1;
        delayed.schedule = Schedule::new(
            tau,
            plan.schedule.gen_slots().to_vec(),
            plan.schedule.horizon(),
        );
        let bumped = objective(&delayed, &costs, &w).unwrap();
        assert!((bumped - base - w.alpha).abs() < 1e-12);
    }

    #[test]
    fn relabeling_qpus_preserves_the_objective() {
        let c = Circuit::random(6, 10, 3).unwrap();
        let t = crate::network::default_cloud(17);
        let costs = all_pairs_costs(&t).unwrap();
        let w_graph = crate::circuit::build_interaction_graph(&c);
        let m = crate::mapper::map_qubits(&w_graph, &t, &costs).unwrap();
        let dag = build_precedence(&c);
        let ind = derive_indicators(&m, &c).unwrap();
        let (sch, _) =
            schedule(&c, &dag, &m, &ind, &t, c.num_gates() as u32, GenMode::InSlot).unwrap();
        let plan = Plan::new(m.clone(), sch.clone(), ind).unwrap();
        let w = ObjectiveWeights::default();
        let base = objective(&plan, &costs, &w).unwrap();

        let perm = [4, 2, 0, 1, 3];
        let permuted_assign: Vec<usize> = m.assign().iter().map(|&u| perm[u]).collect();
        let pm = Mapping::from_raw(permuted_assign);
        let pind = derive_indicators(&pm, &c).unwrap();
        let pplan = Plan::new(pm, sch, pind).unwrap();
        let pcosts = costs.permuted(&perm);
        let relabeled = objective(&pplan, &pcosts, &w).unwrap();
        assert!((base - relabeled).abs() < 1e-12);
    }

    #[test]
    fn missing_cost_is_reported() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let plan = plan_for(&c, vec![0, 1], &t, 1);
        let small = Topology::new(
            vec![QpuSpec { id: 0, cap: 2, comm: 1 }],
            Vec::new(),
        )
        .unwrap();
        let costs = all_pairs_costs(&small).unwrap();
        let err = objective(&plan, &costs, &ObjectiveWeights::default()).unwrap_err();
        assert!(matches!(err, Error::MissingCost { u: 0, v: 1 }));
    }

    #[test]
    fn scheduler_output_passes_all_nine() {
        let c = Circuit::new(4, vec![(0, 2), (1, 3), (0, 1), (2, 3)]).unwrap();
        let t = two_qpus(2, 2);
        let plan = plan_for(&c, vec![0, 0, 1, 1], &t, 4);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(report.feasible, "{report:?}");
    }

    #[test]
    fn duplicate_execution_slot_fails_c() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(2, 1);
        let dag = build_precedence(&c);
        let vars = PlanVariables {
            assign: &[0, 0],
            exec_slots: &[vec![1, 1]],
            gen_slots: &[vec![]],
            claimed_delta: &[false],
            claimed_theta: &[None],
            horizon: 2,
        };
        let report = validate_variables(&vars, &c, &dag, &t);
        assert!(!report.c.ok);
        assert_eq!(report.c.witness, Some(Witness::Gate { gate: 1 }));
        assert!(report.a.ok && report.b.ok && report.d.ok && report.e.ok);
    }

    #[test]
    fn missing_epr_slot_fails_e() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let mut plan = plan_for(&c, vec![0, 1], &t, 1);
        plan.schedule = Schedule::new(vec![1], vec![None], 1);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(!report.e.ok);
        assert_eq!(report.e.witness, Some(Witness::Gate { gate: 1 }));
        assert!(report.a.ok && report.b.ok && report.c.ok && report.d.ok && report.h.ok);
    }

    #[test]
    fn capacity_overload_fails_b_only() {
        let c = Circuit::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let roomy = two_qpus(3, 2);
        let plan = plan_for(&c, vec![0, 0, 0], &roomy, 2);
        let tight = two_qpus(2, 2);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &tight).unwrap();
        assert!(!report.b.ok);
        assert_eq!(report.b.witness, Some(Witness::Qpu { qpu: 0 }));
        for (name, verdict) in report.verdicts() {
            if name != "b" {
                assert!(verdict.ok, "constraint {name} should still pass");
            }
        }
    }

    #[test]
    fn swapped_slots_fail_precedence() {
        let c = Circuit::new(2, vec![(0, 1), (0, 1)]).unwrap();
        let t = two_qpus(2, 1);
        let mut plan = plan_for(&c, vec![0, 0], &t, 2);
        plan.schedule = Schedule::new(vec![2, 1], vec![None, None], 2);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(!report.g.ok);
        assert_eq!(report.g.witness, Some(Witness::Edge { pred: 1, succ: 2 }));
    }

    #[test]
    fn same_slot_overlap_satisfies_the_model_precedence() {
        // The inequality is cumulative, so equal slots pass g even though
        // the constructor itself always schedules strictly later.
        let c = Circuit::new(2, vec![(0, 1), (0, 1)]).unwrap();
        let t = two_qpus(2, 1);
        let mut plan = plan_for(&c, vec![0, 0], &t, 2);
        plan.schedule = Schedule::new(vec![1, 1], vec![None, None], 2);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(report.g.ok);
    }

    #[test]
    fn stale_delta_fails_d_and_theta_fails_h() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let plan = plan_for(&c, vec![0, 1], &t, 1);
        let dag = build_precedence(&c);

        let vars = PlanVariables {
            assign: plan.mapping.assign(),
            exec_slots: &[vec![1]],
            gen_slots: &[vec![1]],
            claimed_delta: &[false],
            claimed_theta: &[Some((0, 1))],
            horizon: 1,
        };
        let report = validate_variables(&vars, &c, &dag, &t);
        assert!(!report.d.ok);
        assert!(report.h.ok);

        let vars = PlanVariables {
            assign: plan.mapping.assign(),
            exec_slots: &[vec![1]],
            gen_slots: &[vec![1]],
            claimed_delta: &[true],
            claimed_theta: &[None],
            horizon: 1,
        };
        let report = validate_variables(&vars, &c, &dag, &t);
        assert!(report.d.ok);
        assert!(!report.h.ok);
    }

    #[test]
    fn generation_after_execution_fails_f() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let t = two_qpus(1, 1);
        let mut plan = plan_for(&c, vec![0, 1], &t, 2);
        plan.schedule = Schedule::new(vec![1], vec![Some(2)], 2);
        let dag = build_precedence(&c);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(!report.f.ok);
    }

    #[test]
    fn stored_pairs_beyond_budget_fail_i() {
        // Two pairs generated at slot 1 for execution at slot 3, with a
        // one-pair budget: the inventory after slots 1 and 2 exceeds E.
        let c = Circuit::new(4, vec![(0, 2), (1, 3)]).unwrap();
        let t = two_qpus(2, 1);
        let dag = build_precedence(&c);
        let vars = PlanVariables {
            assign: &[0, 0, 1, 1],
            exec_slots: &[vec![3], vec![3]],
            gen_slots: &[vec![1], vec![1]],
            claimed_delta: &[true, true],
            claimed_theta: &[Some((0, 1)), Some((0, 1))],
            horizon: 3,
        };
        let report = validate_variables(&vars, &c, &dag, &t);
        assert!(!report.i.ok);
        assert_eq!(report.i.witness, Some(Witness::QpuSlot { qpu: 0, slot: 1 }));
        for (name, verdict) in report.verdicts() {
            if name != "i" {
                assert!(verdict.ok, "constraint {name} should still pass");
            }
        }
    }

    #[test]
    fn metrics_use_the_latency_table() {
        let c = Circuit::new(2, vec![(0, 1), (0, 1), (0, 1), (0, 1)]).unwrap();
        let t = two_qpus(2, 1);
        let plan = plan_for(&c, vec![0, 0], &t, 4);
        let costs = all_pairs_costs(&t).unwrap();
        let metrics = compute_metrics(
            &plan,
            &costs,
            &ObjectiveWeights::default(),
            &LatencyTable::default(),
            0.001,
        )
        .unwrap();
        assert_eq!(metrics.makespan_slots, 4);
        assert_eq!(metrics.runtime_cx, 48.0);
        assert_eq!(metrics.remote_gates, 0);
        assert!(metrics.epr_series.generated.iter().all(|&x| x == 0));
    }

    #[test]
    fn plan_document_round_trips() {
        let c = Circuit::new(4, vec![(0, 2), (1, 3)]).unwrap();
        let t = two_qpus(2, 2);
        let plan = plan_for(&c, vec![0, 0, 1, 1], &t, 2);
        let doc = plan.to_doc();
        let parsed = Plan::from_doc(&doc, &c).unwrap();
        assert_eq!(parsed, plan);
    }

    #[test]
    fn weights_and_latencies_validate() {
        assert!(ObjectiveWeights::new(0.0, 0.0).is_err());
        assert!(ObjectiveWeights::new(-1.0, 1.0).is_err());
        assert!(ObjectiveWeights::new(0.0, 2.0).is_ok());
        assert!(LatencyTable::new(0.1, 1.0, 5.0, 12.0).is_ok());
        assert!(LatencyTable::new(1.0, 0.5, 5.0, 12.0).is_err());
    }
}
