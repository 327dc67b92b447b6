//! Greedy qubit-to-QPU placement and the per-gate locality indicators
//! derived from it.
//!
//! The sweep processes qubits in non-increasing total interaction weight
//! W(q), placing each on the QPU that minimizes the communication cost
//! against already-placed interaction partners. All ties break toward the
//! smallest index, so the mapping is a pure function of its inputs. The
//! placement is computed once and never revised by later stages.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, InteractionGraph};
use crate::error::{Error, Result};
use crate::network::{CostMatrix, Topology};

/// Fixed qubit-to-QPU assignment; `assign[q]` is the QPU id hosting q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    assign: Vec<usize>,
}

impl Mapping {
    /// Wrap an explicit assignment vector (used by baselines and tests);
    /// the capacity and range invariants are checked.
    pub fn new(assign: Vec<usize>, t: &Topology) -> Result<Self> {
        let mut loads = vec![0u64; t.num_qpus()];
        for (q, &u) in assign.iter().enumerate() {
            if u >= t.num_qpus() {
                return Err(Error::MappingMismatch(format!(
                    "qubit {q} assigned to QPU {u}, but only {} QPUs exist",
                    t.num_qpus()
                )));
            }
            loads[u] += 1;
        }
        for (u, &load) in loads.iter().enumerate() {
            if load > u64::from(t.cap(u)) {
                return Err(Error::Infeasible(format!(
                    "QPU {u} holds {load} qubits, capacity {}",
                    t.cap(u)
                )));
            }
        }
        Ok(Mapping { assign })
    }

    /// Wrap an assignment vector without checking capacities or QPU ids.
    /// Deserialized and deliberately-broken plans go through here; the
    /// validator passes judgment on them.
    pub fn from_raw(assign: Vec<usize>) -> Self {
        Mapping { assign }
    }

    pub fn qpu_of(&self, q: usize) -> usize {
        self.assign[q]
    }

    pub fn num_qubits(&self) -> usize {
        self.assign.len()
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }
}

/// How the placement cost Delta(q, u) treats already-placed qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaRule {
    /// Sum w(q, j) * C(u, host(j)) over every already-placed qubit j.
    /// Co-located partners contribute zero since C(u, u) = 0.
    #[default]
    CrossQpu,
    /// Restrict the sum to qubits already hosted on the candidate QPU
    /// itself. Every term is then w * C(u, u) = 0, so placement degenerates
    /// to first-fit; kept selectable for comparison runs.
    SameQpuOnly,
}

/// Greedy sweep with the default cross-QPU placement cost.
pub fn map_qubits(w: &InteractionGraph, t: &Topology, costs: &CostMatrix) -> Result<Mapping> {
    map_qubits_with(w, t, costs, DeltaRule::CrossQpu)
}

pub fn map_qubits_with(
    w: &InteractionGraph,
    t: &Topology,
    costs: &CostMatrix,
    rule: DeltaRule,
) -> Result<Mapping> {
    let n = w.num_qubits();
    let p = t.num_qpus();
    if costs.num_qpus() != p {
        return Err(Error::MappingMismatch(format!(
            "cost matrix covers {} QPUs, topology has {p}",
            costs.num_qpus()
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let weight: Vec<u64> = (0..n).map(|q| w.total_weight(q)).collect();
    order.sort_by(|&a, &b| weight[b].cmp(&weight[a]).then(a.cmp(&b)));

    let mut remaining: Vec<u32> = (0..p).map(|u| t.cap(u)).collect();
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut placed: Vec<usize> = Vec::with_capacity(n);

    for &q in &order {
        let mut best: Option<(u64, usize)> = None;
        for u in 0..p {
            if remaining[u] == 0 {
                continue;
            }
            let delta = placement_cost(w, costs, &assign, &placed, q, u, rule);
            if best.map_or(true, |(bd, _)| delta < bd) {
                best = Some((delta, u));
            }
        }
        let Some((_, u_star)) = best else {
            return Err(Error::Infeasible(format!(
                "no QPU has remaining capacity for qubit {q} (total capacity {} < {} qubits)",
                t.total_capacity(),
                n
            )));
        };
        assign[q] = Some(u_star);
        remaining[u_star] -= 1;
        placed.push(q);
    }

    Ok(Mapping {
        assign: assign.into_iter().map(|a| a.expect("all placed")).collect(),
    })
}

fn placement_cost(
    w: &InteractionGraph,
    costs: &CostMatrix,
    assign: &[Option<usize>],
    placed: &[usize],
    q: usize,
    u: usize,
    rule: DeltaRule,
) -> u64 {
    let mut delta = 0u64;
    for &j in placed {
        let wqj = w.weight(q, j);
        if wqj == 0 {
            continue;
        }
        let host = assign[j].expect("placed qubit has a host");
        match rule {
            DeltaRule::CrossQpu => delta += wqj * u64::from(costs.cost(u, host)),
            DeltaRule::SameQpuOnly => {
                if host == u {
                    delta += wqj * u64::from(costs.cost(u, u));
                }
            }
        }
    }
    delta
}

/// Per-gate locality flags: `delta[g]` is true for remote gates, and
/// `theta[g]` holds the unordered endpoint QPU pair of a remote gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateIndicators {
    delta: Vec<bool>,
    theta: Vec<Option<(usize, usize)>>,
}

impl GateIndicators {
    pub fn is_remote(&self, g: usize) -> bool {
        self.delta[g]
    }

    /// Endpoint QPU pair (min, max) of remote gate `g`; None for local.
    pub fn endpoints(&self, g: usize) -> Option<(usize, usize)> {
        self.theta[g]
    }

    pub fn remote_count(&self) -> usize {
        self.delta.iter().filter(|&&d| d).count()
    }

    pub fn num_gates(&self) -> usize {
        self.delta.len()
    }
}

/// Derive delta/theta from a mapping: a gate is remote exactly when its
/// operands land on different QPUs, and theta names that QPU pair.
pub fn derive_indicators(m: &Mapping, c: &Circuit) -> Result<GateIndicators> {
    if m.num_qubits() != c.num_qubits() {
        return Err(Error::MappingMismatch(format!(
            "mapping covers {} qubits, circuit has {}",
            m.num_qubits(),
            c.num_qubits()
        )));
    }
    let mut delta = Vec::with_capacity(c.num_gates());
    let mut theta = Vec::with_capacity(c.num_gates());
    for gate in c.gates() {
        let (a, b) = gate.operands();
        let (ua, ub) = (m.qpu_of(a), m.qpu_of(b));
        if ua == ub {
            delta.push(false);
            theta.push(None);
        } else {
            delta.push(true);
            theta.push(Some((ua.min(ub), ua.max(ub))));
        }
    }
    Ok(GateIndicators { delta, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_interaction_graph;
    use crate::network::{all_pairs_costs, QpuSpec};

    fn linked_pair(cap: u32) -> Topology {
        let nodes = (0..2).map(|id| QpuSpec { id, cap, comm: 4 }).collect();
        Topology::new(nodes, vec![(0, 1)]).unwrap()
    }

    #[test]
    fn single_qpu_takes_everything() {
        let c = Circuit::new(2, vec![(0, 1)]).unwrap();
        let nodes = vec![QpuSpec { id: 0, cap: 2, comm: 4 }];
        let t = Topology::new(nodes, Vec::new()).unwrap();
        let costs = all_pairs_costs(&t).unwrap();
        let m = map_qubits(&build_interaction_graph(&c), &t, &costs).unwrap();
        assert_eq!(m.assign(), &[0, 0]);
    }

    #[test]
    fn hand_traced_four_qubit_split() {
        // Gates (0,1) x3, (2,3) x3, (1,2) x1 on two adjacent QPUs of
        // capacity 2. Sweep order q1, q2, q0, q3 (W = 3,4,4,3); q1 and q2
        // pack onto QPU 0, forcing q0 and q3 onto QPU 1.
        let pairs = vec![(0, 1), (0, 1), (0, 1), (2, 3), (2, 3), (2, 3), (1, 2)];
        let c = Circuit::new(4, pairs).unwrap();
        let t = linked_pair(2);
        let costs = all_pairs_costs(&t).unwrap();
        let m = map_qubits(&build_interaction_graph(&c), &t, &costs).unwrap();
        assert_eq!(m.assign(), &[1, 0, 0, 1]);
    }

    #[test]
    fn isolated_qubit_goes_to_first_free_qpu() {
        // q2 never interacts; every candidate cost is zero, so it lands on
        // the lowest-id QPU with spare room.
        let c = Circuit::new(3, vec![(0, 1)]).unwrap();
        let t = linked_pair(3);
        let costs = all_pairs_costs(&t).unwrap();
        let m = map_qubits(&build_interaction_graph(&c), &t, &costs).unwrap();
        assert_eq!(m.qpu_of(2), 0);
    }

    #[test]
    fn infeasible_when_capacity_short() {
        let c = Circuit::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let t = linked_pair(1);
        let costs = all_pairs_costs(&t).unwrap();
        let err = map_qubits(&build_interaction_graph(&c), &t, &costs).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn mapping_is_deterministic() {
        let c = Circuit::random(12, 30, 5).unwrap();
        let t = crate::network::default_cloud(9);
        let costs = all_pairs_costs(&t).unwrap();
        let w = build_interaction_graph(&c);
        assert_eq!(
            map_qubits(&w, &t, &costs).unwrap(),
            map_qubits(&w, &t, &costs).unwrap()
        );
    }

    #[test]
    fn literal_rule_degenerates_to_first_fit() {
        let pairs = vec![(0, 1), (0, 1), (0, 1), (2, 3), (2, 3), (2, 3), (1, 2)];
        let c = Circuit::new(4, pairs).unwrap();
        let t = linked_pair(2);
        let costs = all_pairs_costs(&t).unwrap();
        let w = build_interaction_graph(&c);
        let m = map_qubits_with(&w, &t, &costs, DeltaRule::SameQpuOnly).unwrap();
        // Sweep order q1, q2, q0, q3; all costs zero, so first-fit packs
        // q1, q2 on QPU 0 and spills q0, q3 to QPU 1.
        assert_eq!(m.assign(), &[1, 0, 0, 1]);
        // On a path 0-2-1 the two rules genuinely differ: once QPU 0 fills,
        // the spill qubit q2 prefers the QPU closer to its partner.
        let c2 = Circuit::new(3, vec![(0, 1), (0, 1), (0, 1), (0, 2)]).unwrap();
        let nodes = (0..3).map(|id| QpuSpec { id, cap: 2, comm: 4 }).collect();
        let t3 = Topology::new(nodes, vec![(0, 2), (1, 2)]).unwrap();
        let costs3 = all_pairs_costs(&t3).unwrap();
        let w2 = build_interaction_graph(&c2);
        let greedy = map_qubits_with(&w2, &t3, &costs3, DeltaRule::CrossQpu).unwrap();
        let literal = map_qubits_with(&w2, &t3, &costs3, DeltaRule::SameQpuOnly).unwrap();
        assert_eq!(greedy.assign(), &[0, 0, 2]);
        assert_eq!(literal.assign(), &[0, 0, 1]);
    }

    #[test]
    fn indicators_classify_local_and_remote() {
        let c = Circuit::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = linked_pair(2);
        let m = Mapping::new(vec![0, 0, 1, 1], &t).unwrap();
        let ind = derive_indicators(&m, &c).unwrap();
        assert!(!ind.is_remote(0));
        assert_eq!(ind.endpoints(0), None);
        assert!(ind.is_remote(1));
        assert_eq!(ind.endpoints(1), Some((0, 1)));
        assert!(!ind.is_remote(2));
        assert_eq!(ind.remote_count(), 1);
    }

    #[test]
    fn single_qpu_mapping_has_no_remote_gates() {
        let c = Circuit::random(5, 15, 2).unwrap();
        let nodes = vec![QpuSpec { id: 0, cap: 5, comm: 4 }];
        let t = Topology::new(nodes, Vec::new()).unwrap();
        let m = Mapping::new(vec![0; 5], &t).unwrap();
        let ind = derive_indicators(&m, &c).unwrap();
        assert_eq!(ind.remote_count(), 0);
    }

    #[test]
    fn theta_present_exactly_for_remote_gates() {
        let c = Circuit::random(8, 25, 13).unwrap();
        let t = crate::network::default_cloud(4);
        let costs = all_pairs_costs(&t).unwrap();
        let m = map_qubits(&build_interaction_graph(&c), &t, &costs).unwrap();
        let ind = derive_indicators(&m, &c).unwrap();
        for g in 0..c.num_gates() {
            assert_eq!(ind.is_remote(g), ind.endpoints(g).is_some());
            if let Some((u, v)) = ind.endpoints(g) {
                assert!(u < v);
            }
        }
    }
}
