//! Exhaustive ground-truth solver for desk-scale instances.
//!
//! Enumerates every capacity-feasible mapping, and for each one every slot
//! assignment reachable under strict precedence and the per-slot endpoint
//! budgets (the same schedule semantics the greedy constructor commits to,
//! with in-slot EPR generation). A running-best bound prunes both searches.
//! Branches are explored in lexicographic order and only strict
//! improvements are kept, so the reported optimum is the lexicographically
//! smallest (mapping, slot-vector) among optima.

use crate::circuit::{Circuit, PrecedenceDag};
use crate::error::{Error, Result};
use crate::mapper::{derive_indicators, Mapping};
use crate::model::{ObjectiveWeights, Plan};
use crate::network::{CostMatrix, Topology};
use crate::scheduler::Schedule;

/// Enumeration caps checked before any search starts.
#[derive(Debug, Clone, Copy)]
pub struct ExactLimits {
    pub max_qubits: usize,
    pub max_gates: usize,
    pub max_qpus: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            max_qubits: 6,
            max_gates: 6,
            max_qpus: 3,
        }
    }
}

pub fn exact_solve(
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
    costs: &CostMatrix,
    w: &ObjectiveWeights,
    horizon: u32,
    limits: &ExactLimits,
) -> Result<Plan> {
    if c.num_qubits() > limits.max_qubits
        || c.num_gates() > limits.max_gates
        || t.num_qpus() > limits.max_qpus
    {
        return Err(Error::TooLarge(format!(
            "{} qubits / {} gates / {} QPUs exceed ({}, {}, {})",
            c.num_qubits(),
            c.num_gates(),
            t.num_qpus(),
            limits.max_qubits,
            limits.max_gates,
            limits.max_qpus
        )));
    }
    if t.total_capacity() < c.num_qubits() as u64 {
        return Err(Error::Infeasible(format!(
            "{} qubits exceed the total capacity {}",
            c.num_qubits(),
            t.total_capacity()
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }

    // Resource-free earliest slots; their weighted sum lower-bounds the
    // time term of any schedule under strict precedence.
    let m = c.num_gates();
    let mut depth = vec![0u32; m];
    for g in 0..m {
        depth[g] = 1 + dag.preds_of(g).iter().map(|&p| depth[p]).max().unwrap_or(0);
    }
    let depth_sum: f64 = depth.iter().map(|&d| f64::from(d)).sum();

    let mut search = Search {
        c,
        dag,
        t,
        costs,
        w,
        horizon,
        time_lb: w.alpha * depth_sum,
        assign: vec![usize::MAX; c.num_qubits()],
        remaining: (0..t.num_qpus()).map(|u| t.cap(u)).collect(),
        best: None,
    };
    search.enumerate_mappings(0, 0.0);

    let best = search.best.ok_or_else(|| {
        Error::Infeasible("no schedule satisfies the budgets within the horizon".into())
    })?;
    let mapping = Mapping::from_raw(best.assign);
    let ind = derive_indicators(&mapping, c)?;
    let tgen: Vec<Option<u32>> = (0..m)
        .map(|g| ind.endpoints(g).map(|_| best.tau[g]))
        .collect();
    let schedule = Schedule::new(best.tau, tgen, horizon);
    Plan::new(mapping, schedule, ind)
}

struct Incumbent {
    objective: f64,
    assign: Vec<usize>,
    tau: Vec<u32>,
}

struct Search<'a> {
    c: &'a Circuit,
    dag: &'a PrecedenceDag,
    t: &'a Topology,
    costs: &'a CostMatrix,
    w: &'a ObjectiveWeights,
    horizon: u32,
    time_lb: f64,
    assign: Vec<usize>,
    remaining: Vec<u32>,
    best: Option<Incumbent>,
}

impl Search<'_> {
    fn bound(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.objective)
    }

    /// Assign qubits in index order, QPUs in ascending order, pruning on
    /// the communication cost already locked in by placed gate pairs.
    fn enumerate_mappings(&mut self, q: usize, comm_so_far: f64) {
        if self.time_lb + self.w.beta * comm_so_far >= self.bound() {
            return;
        }
        if q == self.c.num_qubits() {
            self.enumerate_schedules(comm_so_far);
            return;
        }
        for u in 0..self.t.num_qpus() {
            if self.remaining[u] == 0 {
                continue;
            }
            // Communication cost newly fixed by placing q on u: every gate
            // whose other operand is already placed.
            let mut added = 0.0;
            for gate in self.c.gates() {
                let (i, j) = gate.operands();
                let other = if i == q {
                    j
                } else if j == q {
                    i
                } else {
                    continue;
                };
                if self.assign[other] != usize::MAX {
                    added += f64::from(self.costs.cost(u, self.assign[other]));
                }
            }
            self.assign[q] = u;
            self.remaining[u] -= 1;
            self.enumerate_mappings(q + 1, comm_so_far + added);
            self.remaining[u] += 1;
            self.assign[q] = usize::MAX;
        }
    }

    /// Depth-first slot assignment in program order under strict precedence
    /// and the per-slot endpoint budgets; in-slot generation means each
    /// remote gate charges both endpoints exactly at its execution slot.
    fn enumerate_schedules(&mut self, comm_total: f64) {
        let m = self.c.num_gates();
        let p = self.t.num_qpus();
        let comm_term = self.w.beta * comm_total;
        if m == 0 {
            if comm_term < self.bound() {
                self.best = Some(Incumbent {
                    objective: comm_term,
                    assign: self.assign.clone(),
                    tau: Vec::new(),
                });
            }
            return;
        }

        let endpoints: Vec<Option<(usize, usize)>> = self
            .c
            .gates()
            .iter()
            .map(|gate| {
                let (i, j) = gate.operands();
                let (ui, uj) = (self.assign[i], self.assign[j]);
                (ui != uj).then(|| (ui.min(uj), ui.max(uj)))
            })
            .collect();

        let h = self.horizon as usize;
        let mut usage = vec![0u32; (h + 1) * p];
        let mut tau = vec![0u32; m];

        self.place_gate(0, &endpoints, &mut tau, &mut usage, 0.0, comm_term);
    }

    #[allow(clippy::too_many_arguments)]
    fn place_gate(
        &mut self,
        g: usize,
        endpoints: &[Option<(usize, usize)>],
        tau: &mut Vec<u32>,
        usage: &mut Vec<u32>,
        time_so_far: f64,
        comm_term: f64,
    ) {
        let m = self.c.num_gates();
        let p = self.t.num_qpus();
        if g == m {
            let objective = self.w.alpha * time_so_far + comm_term;
            if objective < self.bound() {
                self.best = Some(Incumbent {
                    objective,
                    assign: self.assign.clone(),
                    tau: tau.clone(),
                });
            }
            return;
        }

        // Earliest-slot lower bound for the remaining gates, given the
        // slots already committed to gates < g.
        let mut earliest = vec![0u32; m];
        let mut remaining_lb = 0.0;
        for idx in g..m {
            let e = 1 + self
                .dag
                .preds_of(idx)
                .iter()
                .map(|&pr| if pr < g { tau[pr] } else { earliest[pr] })
                .max()
                .unwrap_or(0);
            earliest[idx] = e;
            remaining_lb += f64::from(e);
        }
        if self.w.alpha * (time_so_far + remaining_lb) + comm_term >= self.bound() {
            return;
        }

        let t_min = earliest[g];
        for slot in t_min..=self.horizon {
            if let Some((u1, u2)) = endpoints[g] {
                let s = slot as usize;
                if usage[s * p + u1] >= self.t.comm(u1) || usage[s * p + u2] >= self.t.comm(u2) {
                    continue;
                }
                usage[s * p + u1] += 1;
                usage[s * p + u2] += 1;
                tau[g] = slot;
                self.place_gate(
                    g + 1,
                    endpoints,
                    tau,
                    usage,
                    time_so_far + f64::from(slot),
                    comm_term,
                );
                usage[s * p + u1] -= 1;
                usage[s * p + u2] -= 1;
            } else {
                tau[g] = slot;
                self.place_gate(
                    g + 1,
                    endpoints,
                    tau,
                    usage,
                    time_so_far + f64::from(slot),
                    comm_term,
                );
            }
            tau[g] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_precedence;
    use crate::model::{objective, validate};
    use crate::network::{all_pairs_costs, QpuSpec};
    use crate::network::Topology;

    #[test]
    fn forced_local_gate_costs_one_slot() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let dag = build_precedence(&c);
        let nodes = vec![QpuSpec { id: 0, cap: 2, comm: 1 }];
        let t = Topology::new(nodes, Vec::new()).unwrap();
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::default();
        let plan = exact_solve(&c, &dag, &t, &costs, &w, 1, &ExactLimits::default()).unwrap();
        assert_eq!(objective(&plan, &costs, &w).unwrap(), 1.0);
    }

    #[test]
    fn forced_remote_gate_pays_the_link() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let dag = build_precedence(&c);
        let nodes = (0..2).map(|id| QpuSpec { id, cap: 1, comm: 1 }).collect();
        let t = Topology::new(nodes, vec![(0, 1)]).unwrap();
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::default();
        let plan = exact_solve(&c, &dag, &t, &costs, &w, 1, &ExactLimits::default()).unwrap();
        assert_eq!(objective(&plan, &costs, &w).unwrap(), 2.0);
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(report.feasible);
    }

    #[test]
    fn too_large_instances_are_rejected() {
        let c = Circuit::random(8, 4, 0).unwrap();
        let dag = build_precedence(&c);
        let t = crate::network::default_cloud(1);
        let costs = all_pairs_costs(&t).unwrap();
        let err = exact_solve(
            &c,
            &dag,
            &t,
            &costs,
            &ObjectiveWeights::default(),
            4,
            &ExactLimits::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooLarge(_)));
    }

    #[test]
    fn infeasible_capacity_is_reported() {
        let c = Circuit::random(4, 2, 0).unwrap();
        let dag = build_precedence(&c);
        let nodes = (0..2).map(|id| QpuSpec { id, cap: 1, comm: 1 }).collect();
        let t = Topology::new(nodes, vec![(0, 1)]).unwrap();
        let costs = all_pairs_costs(&t).unwrap();
        let err = exact_solve(
            &c,
            &dag,
            &t,
            &costs,
            &ObjectiveWeights::default(),
            2,
            &ExactLimits::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn exact_is_deterministic() {
        let c = Circuit::random(5, 5, 9).unwrap();
        let dag = build_precedence(&c);
        let nodes = (0..3).map(|id| QpuSpec { id, cap: 2, comm: 2 }).collect::<Vec<_>>();
        let t = Topology::new(nodes, vec![(0, 1), (1, 2)]).unwrap();
        let costs = all_pairs_costs(&t).unwrap();
        let w = ObjectiveWeights::default();
        let a = exact_solve(&c, &dag, &t, &costs, &w, 5, &ExactLimits::default()).unwrap();
        let b = exact_solve(&c, &dag, &t, &costs, &w, 5, &ExactLimits::default()).unwrap();
        assert_eq!(a.to_doc(), b.to_doc());
    }
}
