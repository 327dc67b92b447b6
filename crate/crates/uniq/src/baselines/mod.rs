//! Reference planners: random mapping with a random topological order,
//! balanced round-robin with equal communication shares, and a simulated
//! annealing improver. The exhaustive oracle lives in [`exact`].
//!
//! Every planner funnels its slot decisions through the same
//! feasibility-checked sweep as the main constructor, so anything returned
//! here either passes the full validator or surfaces an explicit error.

mod exact;

pub use exact::{exact_solve, ExactLimits};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, PrecedenceDag};
use crate::error::{Error, Result};
use crate::mapper::{derive_indicators, Mapping};
use crate::model::{objective, ObjectiveWeights, Plan};
use crate::network::{CostMatrix, Topology};
use crate::scheduler::{
    schedule_detailed, schedule_partitioned, BudgetSemantics, GenMode,
};

fn check_capacity(c: &Circuit, t: &Topology) -> Result<()> {
    if t.total_capacity() < c.num_qubits() as u64 {
        return Err(Error::Infeasible(format!(
            "{} qubits exceed the total capacity {}",
            c.num_qubits(),
            t.total_capacity()
        )));
    }
    Ok(())
}

/// Uniform capacity-respecting mapping, a random precedence-respecting gate
/// order, and the usual earliest-feasible budget-checked scan.
pub fn random_plan(
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
    horizon: u32,
    seed: u64,
) -> Result<Plan> {
    check_capacity(c, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = t.num_qpus();

    let mut remaining: Vec<u32> = (0..p).map(|u| t.cap(u)).collect();
    let mut assign = Vec::with_capacity(c.num_qubits());
    for _ in 0..c.num_qubits() {
        let candidates: Vec<usize> = (0..p).filter(|&u| remaining[u] > 0).collect();
        let u = candidates[rng.gen_range(0..candidates.len())];
        assign.push(u);
        remaining[u] -= 1;
    }
    let mapping = Mapping::from_raw(assign);
    let order = random_topological_order(dag, &mut rng);
    let ind = derive_indicators(&mapping, c)?;
    let (schedule, _, _) = schedule_detailed(
        c,
        dag,
        &mapping,
        &ind,
        t,
        horizon,
        GenMode::InSlot,
        BudgetSemantics::StoredPairs,
        Some(&order),
    )?;
    Plan::new(mapping, schedule, ind)
}

/// Kahn's construction with a uniformly random choice among ready gates.
fn random_topological_order(dag: &PrecedenceDag, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let m = dag.num_gates();
    let mut indegree = vec![0usize; m];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(pred, succ) in dag.edges() {
        indegree[succ] += 1;
        succs[pred].push(succ);
    }
    let mut ready: Vec<usize> = (0..m).filter(|&g| indegree[g] == 0).collect();
    let mut order = Vec::with_capacity(m);
    while !ready.is_empty() {
        let pick = rng.gen_range(0..ready.len());
        let g = ready.swap_remove(pick);
        order.push(g);
        for &s in &succs[g] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(s);
            }
        }
        ready.sort_unstable();
    }
    order
}

/// Round-robin qubit placement and a JIT scan whose per-slot budget is
/// pre-partitioned equally across each QPU's active pairs (floor division,
/// remainder to the lowest pair id) so every cross pair gets an equal share.
pub fn average_plan(
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
    horizon: u32,
) -> Result<Plan> {
    check_capacity(c, t)?;
    let p = t.num_qpus();
    let mut remaining: Vec<u32> = (0..p).map(|u| t.cap(u)).collect();
    let mut assign = Vec::with_capacity(c.num_qubits());
    let mut cursor = 0usize;
    for _ in 0..c.num_qubits() {
        let mut u = cursor % p;
        while remaining[u] == 0 {
            u = (u + 1) % p;
        }
        assign.push(u);
        remaining[u] -= 1;
        cursor = u + 1;
    }
    let mapping = Mapping::from_raw(assign);
    let ind = derive_indicators(&mapping, c)?;

    // Pairs that actually carry remote gates under this mapping.
    let mut pairs_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p];
    let mut active: Vec<(usize, usize)> = (0..c.num_gates())
        .filter_map(|g| ind.endpoints(g))
        .collect();
    active.sort_unstable();
    active.dedup();
    for &(u, v) in &active {
        pairs_at[u].push((u, v));
        pairs_at[v].push((u, v));
    }

    // Equal share of E_u across u's active pairs; a pair's allowance is the
    // smaller of its two endpoints' shares.
    let mut endpoint_share: BTreeMap<(usize, (usize, usize)), u32> = BTreeMap::new();
    for u in 0..p {
        let pairs = &mut pairs_at[u];
        pairs.sort_unstable();
        let k = pairs.len() as u32;
        if k == 0 {
            continue;
        }
        let base = t.comm(u) / k;
        let extra = t.comm(u) % k;
        for (rank, &pair) in pairs.iter().enumerate() {
            let bonus = u32::from((rank as u32) < extra);
            endpoint_share.insert((u, pair), base + bonus);
        }
    }
    let mut shares: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for &(u, v) in &active {
        let su = endpoint_share[&(u, (u, v))];
        let sv = endpoint_share[&(v, (u, v))];
        shares.insert((u, v), su.min(sv));
    }

    let (schedule, _, _) = schedule_partitioned(c, dag, &mapping, &ind, t, horizon, &shares)?;
    Plan::new(mapping, schedule, ind)
}

/// Simulated-annealing parameters. `initial_temp` of `None` means ten times
/// the magnitude of the starting objective.
#[derive(Debug, Clone, Copy)]
pub struct SaParams {
    pub initial_temp: Option<f64>,
    pub cooling_rate: f64,
    pub iterations: u64,
    /// Wall-clock cutoff in seconds; whichever of iterations or budget is
    /// hit first stops the search.
    pub time_budget: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            initial_temp: None,
            cooling_rate: 0.995,
            iterations: 1000,
            time_budget: 600.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::InvalidInput(
                "cooling rate must lie in (0, 1)".into(),
            ));
        }
        if !(self.time_budget > 0.0) {
            return Err(Error::InvalidInput("time budget must be positive".into()));
        }
        Ok(())
    }
}

/// Metropolis improvement over qubit placements. Neighbors swap two qubits'
/// hosts or relocate one qubit to a QPU with spare room; every candidate is
/// rescheduled from scratch by the JIT sweep. Returns the best plan seen,
/// the initial plan in the worst case.
pub fn sa_improve(
    initial: &Plan,
    c: &Circuit,
    dag: &PrecedenceDag,
    t: &Topology,
    costs: &CostMatrix,
    w: &ObjectiveWeights,
    params: &SaParams,
) -> Result<Plan> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let horizon = initial.schedule.horizon();
    let p = t.num_qpus();
    let n = c.num_qubits();

    let mut current = initial.clone();
    let mut current_obj = objective(&current, costs, w)?;
    let mut best = current.clone();
    let mut best_obj = current_obj;
    let mut temp = params
        .initial_temp
        .unwrap_or_else(|| 10.0 * current_obj.abs());
    if temp <= 0.0 {
        temp = 1.0;
    }

    let started = Instant::now();
    for _ in 0..params.iterations {
        if started.elapsed().as_secs_f64() > params.time_budget {
            break;
        }
        let mut assign = current.mapping.assign().to_vec();
        let swapped = if n >= 2 && rng.gen_bool(0.5) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            assign.swap(a, b);
            true
        } else {
            false
        };
        if !swapped {
            let q = rng.gen_range(0..n);
            let mut loads = vec![0u32; p];
            for &u in assign.iter() {
                loads[u] += 1;
            }
            let candidates: Vec<usize> = (0..p)
                .filter(|&u| u != assign[q] && loads[u] < t.cap(u))
                .collect();
            if candidates.is_empty() {
                if n >= 2 {
                    let a = rng.gen_range(0..n);
                    let mut b = rng.gen_range(0..n - 1);
                    if b >= a {
                        b += 1;
                    }
                    assign.swap(a, b);
                } else {
                    temp *= params.cooling_rate;
                    continue;
                }
            } else {
                assign[q] = candidates[rng.gen_range(0..candidates.len())];
            }
        }

        let mapping = Mapping::from_raw(assign);
        let ind = derive_indicators(&mapping, c)?;
        let rescheduled = schedule_detailed(
            c,
            dag,
            &mapping,
            &ind,
            t,
            horizon,
            GenMode::InSlot,
            BudgetSemantics::StoredPairs,
            None,
        );
        let Ok((schedule, _, _)) = rescheduled else {
            temp *= params.cooling_rate;
            continue;
        };
        let candidate = Plan::new(mapping, schedule, ind)?;
        let candidate_obj = objective(&candidate, costs, w)?;
        let delta = candidate_obj - current_obj;
        let accept = delta < 0.0 || rng.gen::<f64>() < (-delta / temp).exp();
        if accept {
            current = candidate;
            current_obj = candidate_obj;
            if current_obj < best_obj {
                best = current.clone();
                best_obj = current_obj;
            }
        }
        temp *= params.cooling_rate;
    }

    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_precedence;
    use crate::model::validate;
    use crate::network::{all_pairs_costs, default_cloud, QpuSpec};

    fn two_qpus(cap: u32, comm: u32) -> Topology {
        let nodes = (0..2).map(|id| QpuSpec { id, cap, comm }).collect();
        Topology::new(nodes, vec![(0, 1)]).unwrap()
    }

    #[test]
    fn random_plan_is_deterministic_per_seed() {
        let c = Circuit::random(8, 16, 2).unwrap();
        let dag = build_precedence(&c);
        let t = default_cloud(5);
        let a = random_plan(&c, &dag, &t, 16, 77).unwrap();
        let b = random_plan(&c, &dag, &t, 16, 77).unwrap();
        assert_eq!(a.to_doc(), b.to_doc());
        let other = random_plan(&c, &dag, &t, 16, 78).unwrap();
        assert!(a.to_doc() != other.to_doc() || a == other);
    }

    #[test]
    fn random_plan_validates() {
        for seed in 0..25 {
            let c = Circuit::random(8, 16, seed).unwrap();
            let dag = build_precedence(&c);
            let t = default_cloud(seed + 100);
            let plan = random_plan(&c, &dag, &t, 16, seed).unwrap();
            let report = validate(&plan, &c, &dag, &t).unwrap();
            assert!(report.feasible, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn random_plan_rejects_overfull_instances() {
        let c = Circuit::random(5, 4, 0).unwrap();
        let dag = build_precedence(&c);
        let t = two_qpus(2, 2);
        assert!(matches!(
            random_plan(&c, &dag, &t, 4, 0).unwrap_err(),
            Error::Infeasible(_)
        ));
    }

    #[test]
    fn average_plan_round_robins_qubits() {
        let c = Circuit::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let dag = build_precedence(&c);
        let t = two_qpus(2, 10);
        let plan = average_plan(&c, &dag, &t, 2).unwrap();
        assert_eq!(plan.mapping.assign(), &[0, 1, 0, 1]);
    }

    #[test]
    fn average_shares_split_the_budget() {
        // One active pair, E = 10 on both sides: the pair inherits the full
        // budget and the partitioned scan behaves like the plain one.
        let c = Circuit::new(4, vec![(0, 1), (2, 3), (0, 3)]).unwrap();
        let dag = build_precedence(&c);
        let t = two_qpus(2, 10);
        let plan = average_plan(&c, &dag, &t, 3).unwrap();
        let report = validate(&plan, &c, &dag, &t).unwrap();
        assert!(report.feasible);
    }

    #[test]
    fn average_plan_validates_across_seeds() {
        for seed in 0..25 {
            let c = Circuit::random(10, 20, seed).unwrap();
            let dag = build_precedence(&c);
            let t = default_cloud(seed + 500);
            let plan = average_plan(&c, &dag, &t, 20).unwrap();
            let report = validate(&plan, &c, &dag, &t).unwrap();
            assert!(report.feasible, "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn sa_zero_iterations_returns_initial() {
        let c = Circuit::random(6, 10, 1).unwrap();
        let dag = build_precedence(&c);
        let t = default_cloud(9);
        let costs = all_pairs_costs(&t).unwrap();
        let initial = random_plan(&c, &dag, &t, 10, 4).unwrap();
        let params = SaParams {
            iterations: 0,
            ..SaParams::default()
        };
        let out = sa_improve(
            &initial,
            &c,
            &dag,
            &t,
            &costs,
            &ObjectiveWeights::default(),
            &params,
        )
        .unwrap();
        assert_eq!(out, initial);
    }

    #[test]
    fn sa_never_returns_worse_than_initial() {
        let w = ObjectiveWeights::default();
        for seed in 0..10 {
            let c = Circuit::random(8, 14, seed).unwrap();
            let dag = build_precedence(&c);
            let t = default_cloud(seed);
            let costs = all_pairs_costs(&t).unwrap();
            let initial = random_plan(&c, &dag, &t, 14, seed).unwrap();
            let params = SaParams {
                iterations: 200,
                seed,
                ..SaParams::default()
            };
            let improved = sa_improve(&initial, &c, &dag, &t, &costs, &w, &params).unwrap();
            let before = objective(&initial, &costs, &w).unwrap();
            let after = objective(&improved, &costs, &w).unwrap();
            assert!(after <= before, "seed {seed}: {after} > {before}");
            let report = validate(&improved, &c, &dag, &t).unwrap();
            assert!(report.feasible);
        }
    }

    #[test]
    fn sa_is_deterministic_per_seed() {
        let c = Circuit::random(7, 12, 3).unwrap();
        let dag = build_precedence(&c);
        let t = default_cloud(2);
        let costs = all_pairs_costs(&t).unwrap();
        let initial = random_plan(&c, &dag, &t, 12, 1).unwrap();
        let params = SaParams {
            iterations: 150,
            seed: 42,
            ..SaParams::default()
        };
        let w = ObjectiveWeights::default();
        let a = sa_improve(&initial, &c, &dag, &t, &costs, &w, &params).unwrap();
        let b = sa_improve(&initial, &c, &dag, &t, &costs, &w, &params).unwrap();
        assert_eq!(a.to_doc(), b.to_doc());
    }
}
