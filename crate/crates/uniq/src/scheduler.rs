//! Single-pass slot scheduling with just-in-time EPR generation.
//!
//! Gates are visited in a fixed topological order. Each gate's scan starts
//! one slot after its latest-finishing predecessor and walks forward until a
//! slot satisfies the communication budget on both endpoint QPUs; nothing is
//! ever revisited. Local gates accept immediately. For a remote gate the
//! scheduler also picks the slot its EPR pair is generated in: the execution
//! slot itself, or (in latest-earlier mode) the latest admissible slot at or
//! before it.
//!
//! Budget bookkeeping is deliberately split in two. The sweep tests and
//! updates a per-QPU per-slot reservation counter (`usage`): a pair whose
//! generation and execution slots are `g..=e` holds one endpoint on each QPU
//! across that whole window. The inventory `s` returned alongside is instead
//! reconstructed from the final (y, z, theta) decision variables by the
//! stored-pairs recursion, which is what the validator replays. Under
//! in-slot generation the two disagree on purpose: generation and
//! consumption cancel inside the recursion, while the reservation counter
//! still charges the slot.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::circuit::{Circuit, PrecedenceDag};
use crate::error::{Error, Result};
use crate::mapper::{GateIndicators, Mapping};
use crate::network::Topology;

/// When a remote gate's EPR pair is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenMode {
    /// Generate in the execution slot; the pair never sits in storage.
    #[default]
    InSlot,
    /// Generate in the latest slot at or before execution whose budgets
    /// admit one more pair; the pair is stored until consumed.
    LatestEarlier,
}

impl std::str::FromStr for GenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inslot" => Ok(GenMode::InSlot),
            "latest-earlier" => Ok(GenMode::LatestEarlier),
            other => Err(Error::InvalidInput(format!(
                "unknown generation mode `{other}` (expected inslot|latest-earlier)"
            ))),
        }
    }
}

/// What the per-slot communication budget E_u counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetSemantics {
    /// An EPR pair occupies one endpoint on each QPU in every slot from
    /// generation through execution.
    #[default]
    StoredPairs,
    /// Only generation events are charged against E_u; stored pairs are
    /// bounded separately by the inventory recursion. This is the literal
    /// reading of the budget test and is kept selectable for comparison.
    GenerationOnly,
}

/// Per-gate slot decisions. Slots are 1-based; `tau[g]` is gate g's
/// execution slot and `tgen[g]` its EPR-generation slot (remote gates only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    tau: Vec<u32>,
    tgen: Vec<Option<u32>>,
    horizon: u32,
}

impl Schedule {
    pub fn new(tau: Vec<u32>, tgen: Vec<Option<u32>>, horizon: u32) -> Self {
        assert_eq!(tau.len(), tgen.len());
        Schedule { tau, tgen, horizon }
    }

    pub fn num_gates(&self) -> usize {
        self.tau.len()
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Execution slot of gate `g` (0-based index).
    pub fn slot_of(&self, g: usize) -> u32 {
        self.tau[g]
    }

    pub fn gen_slot_of(&self, g: usize) -> Option<u32> {
        self.tgen[g]
    }

    pub fn slots(&self) -> &[u32] {
        &self.tau
    }

    pub fn gen_slots(&self) -> &[Option<u32>] {
        &self.tgen
    }

    /// Highest occupied slot; 0 for an empty circuit.
    pub fn makespan(&self) -> u32 {
        self.tau.iter().copied().max().unwrap_or(0)
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        ScheduleDoc {
            horizon: self.horizon,
            gates: self
                .tau
                .iter()
                .zip(&self.tgen)
                .enumerate()
                .map(|(idx, (&slot, &epr_slot))| ScheduleGateDoc {
                    id: idx + 1,
                    slot,
                    epr_slot,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: ScheduleDoc) -> Result<Self> {
        let m = doc.gates.len();
        let mut tau = vec![0u32; m];
        let mut tgen = vec![None; m];
        let mut seen = vec![false; m];
        for gate in &doc.gates {
            if gate.id == 0 || gate.id > m || seen[gate.id - 1] {
                return Err(Error::InvalidInput(format!(
                    "schedule document must list gate ids 1..{m} exactly once (got {})",
                    gate.id
                )));
            }
            seen[gate.id - 1] = true;
            tau[gate.id - 1] = gate.slot;
            tgen[gate.id - 1] = gate.epr_slot;
        }
        Ok(Schedule {
            tau,
            tgen,
            horizon: doc.horizon,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub horizon: u32,
    pub gates: Vec<ScheduleGateDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleGateDoc {
    pub id: usize,
    pub slot: u32,
    pub epr_slot: Option<u32>,
}

/// EPR bookkeeping produced by a sweep: the stored-pair inventory `s`
/// (indexed after-slot, `s[.., 0] = 0`) and the per-QPU per-slot endpoint
/// reservation counter the budget test ran against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EprInventory {
    p: usize,
    horizon: u32,
    s: Vec<u32>,
    usage: Vec<u32>,
}

impl EprInventory {
    pub fn num_qpus(&self) -> usize {
        self.p
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Pairs stored between QPUs (u, v) after slot t (t in 0..=horizon).
    pub fn stored(&self, u: usize, v: usize, t: u32) -> u32 {
        self.s[t as usize * self.p * self.p + u * self.p + v]
    }

    /// Endpoints reserved on QPU u during slot t (t in 1..=horizon).
    pub fn used(&self, u: usize, t: u32) -> u32 {
        self.usage[t as usize * self.p + u]
    }

    /// Total pairs stored on QPU u after slot t.
    pub fn stored_total(&self, u: usize, t: u32) -> u32 {
        (0..self.p).map(|v| self.stored(u, v, t)).sum()
    }
}

/// Per-slot EPR generation/consumption counts, slots 1..=makespan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EprSeries {
    pub generated: Vec<u32>,
    pub consumed: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SchedulerStats {
    /// Number of (gate, slot) feasibility probes; bounded by m * horizon.
    pub feasibility_tests: u64,
}

pub(crate) enum BudgetCheck<'a> {
    /// Endpoint budgets E_u per QPU.
    PerQpu(BudgetSemantics),
    /// Pre-partitioned per-pair shares (the "equal share" baseline).
    PerPair(&'a BTreeMap<(usize, usize), u32>),
}

/// Schedule with defaults: program order, stored-pairs semantics.
pub fn schedule(
    c: &Circuit,
    dag: &PrecedenceDag,
    m: &Mapping,
    ind: &GateIndicators,
    t: &Topology,
    horizon: u32,
    mode: GenMode,
) -> Result<(Schedule, EprInventory)> {
    let (schedule, inventory, _) =
        schedule_detailed(c, dag, m, ind, t, horizon, mode, BudgetSemantics::StoredPairs, None)?;
    Ok((schedule, inventory))
}

/// Full-control entry point: custom gate order (must be topological) and
/// budget semantics, returning sweep statistics.
#[allow(clippy::too_many_arguments)]
pub fn schedule_detailed(
    c: &Circuit,
    dag: &PrecedenceDag,
    m: &Mapping,
    ind: &GateIndicators,
    t: &Topology,
    horizon: u32,
    mode: GenMode,
    semantics: BudgetSemantics,
    order: Option<&[usize]>,
) -> Result<(Schedule, EprInventory, SchedulerStats)> {
    check_consistency(c, dag, m, ind, t, horizon)?;
    let budgets: Vec<u32> = (0..t.num_qpus()).map(|u| t.comm(u)).collect();
    sweep(
        c,
        dag,
        ind,
        t.num_qpus(),
        &budgets,
        horizon,
        mode,
        BudgetCheck::PerQpu(semantics),
        order,
    )
}

/// Sweep with the per-pair partitioned budget used by the equal-share
/// baseline. `shares[(u, v)]` is the per-slot pair allowance (already the
/// minimum of both endpoints' shares).
pub(crate) fn schedule_partitioned(
    c: &Circuit,
    dag: &PrecedenceDag,
    m: &Mapping,
    ind: &GateIndicators,
    t: &Topology,
    horizon: u32,
    shares: &BTreeMap<(usize, usize), u32>,
) -> Result<(Schedule, EprInventory, SchedulerStats)> {
    check_consistency(c, dag, m, ind, t, horizon)?;
    let budgets: Vec<u32> = (0..t.num_qpus()).map(|u| t.comm(u)).collect();
    sweep(
        c,
        dag,
        ind,
        t.num_qpus(),
        &budgets,
        horizon,
        GenMode::InSlot,
        BudgetCheck::PerPair(shares),
        order_none(),
    )
}

fn order_none() -> Option<&'static [usize]> {
    None
}

fn check_consistency(
    c: &Circuit,
    dag: &PrecedenceDag,
    m: &Mapping,
    ind: &GateIndicators,
    t: &Topology,
    horizon: u32,
) -> Result<()> {
    if m.num_qubits() != c.num_qubits() {
        return Err(Error::MappingMismatch(format!(
            "mapping covers {} qubits, circuit has {}",
            m.num_qubits(),
            c.num_qubits()
        )));
    }
    if ind.num_gates() != c.num_gates() || dag.num_gates() != c.num_gates() {
        return Err(Error::MappingMismatch(format!(
            "indicator/DAG size does not match the circuit's {} gates",
            c.num_gates()
        )));
    }
    if let Some(&bad) = m.assign().iter().find(|&&u| u >= t.num_qpus()) {
        return Err(Error::MappingMismatch(format!(
            "mapping references QPU {bad}, topology has {}",
            t.num_qpus()
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    c: &Circuit,
    dag: &PrecedenceDag,
    ind: &GateIndicators,
    p: usize,
    budgets: &[u32],
    horizon: u32,
    mode: GenMode,
    check: BudgetCheck<'_>,
    order: Option<&[usize]>,
) -> Result<(Schedule, EprInventory, SchedulerStats)> {
    let m = c.num_gates();
    let h = horizon as usize;
    let program_order: Vec<usize>;
    let order: &[usize] = match order {
        Some(o) => {
            debug_assert!(is_topological(dag, o));
            o
        }
        None => {
            program_order = (0..m).collect();
            &program_order
        }
    };

    let mut tau = vec![0u32; m];
    let mut tgen: Vec<Option<u32>> = vec![None; m];
    // Reservation counters, all indexed slot * width + key, slot 0 unused.
    let mut busy = vec![0u32; (h + 1) * p];
    let mut gen_events = vec![0u32; (h + 1) * p];
    let mut stored_after = vec![0u32; (h + 1) * p];
    let mut pair_used: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
    let mut stats = SchedulerStats::default();

    for &g in order {
        let t_min = 1 + dag
            .preds_of(g)
            .iter()
            .map(|&pr| tau[pr])
            .max()
            .unwrap_or(0);

        if !ind.is_remote(g) {
            if t_min > horizon {
                return Err(Error::HorizonExhausted {
                    gate: g + 1,
                    horizon,
                });
            }
            stats.feasibility_tests += 1;
            tau[g] = t_min;
            continue;
        }

        let (u1, u2) = ind.endpoints(g).expect("remote gate has endpoints");
        let mut committed = false;
        let mut t = t_min;
        while t <= horizon {
            stats.feasibility_tests += 1;
            let found = match &check {
                BudgetCheck::PerQpu(semantics) => find_gen_slot(
                    *semantics, mode, t, u1, u2, p, budgets, &busy, &gen_events, &stored_after,
                ),
                BudgetCheck::PerPair(shares) => {
                    let share = shares.get(&(u1, u2)).copied().unwrap_or(0);
                    let used = pair_used
                        .get(&(u1, u2))
                        .map_or(0, |v| v[t as usize]);
                    (used < share).then_some(t)
                }
            };
            if let Some(k) = found {
                tau[g] = t;
                tgen[g] = Some(k);
                // Reserve endpoints across the pair's whole lifetime.
                for slot in k..=t {
                    busy[slot as usize * p + u1] += 1;
                    busy[slot as usize * p + u2] += 1;
                }
                gen_events[k as usize * p + u1] += 1;
                gen_events[k as usize * p + u2] += 1;
                for slot in k..t {
                    stored_after[slot as usize * p + u1] += 1;
                    stored_after[slot as usize * p + u2] += 1;
                }
                if let BudgetCheck::PerPair(_) = &check {
                    let usage = pair_used
                        .entry((u1, u2))
                        .or_insert_with(|| vec![0u32; h + 1]);
                    usage[t as usize] += 1;
                }
                committed = true;
                break;
            }
            t += 1;
        }
        if !committed {
            return Err(Error::HorizonExhausted {
                gate: g + 1,
                horizon,
            });
        }
    }

    let schedule = Schedule {
        tau,
        tgen,
        horizon,
    };
    let inventory = build_inventory(&schedule, ind, p, busy);
    Ok((schedule, inventory, stats))
}

/// Pick the EPR-generation slot for execution slot `t`, or None if `t`
/// cannot host the gate. In-slot mode only considers `k = t`;
/// latest-earlier scans downward, maintaining the feasibility of storing
/// the pair across every slot between generation and execution.
#[allow(clippy::too_many_arguments)]
fn find_gen_slot(
    semantics: BudgetSemantics,
    mode: GenMode,
    t: u32,
    u1: usize,
    u2: usize,
    p: usize,
    budgets: &[u32],
    busy: &[u32],
    gen_events: &[u32],
    stored_after: &[u32],
) -> Option<u32> {
    let fits = |counts: &[u32], slot: u32| {
        counts[slot as usize * p + u1] < budgets[u1] && counts[slot as usize * p + u2] < budgets[u2]
    };
    match semantics {
        BudgetSemantics::StoredPairs => {
            // The pair occupies both endpoints at the execution slot no
            // matter when it is generated, so slot t itself must fit; the
            // downward scan then stops at t immediately.
            if !fits(busy, t) {
                return None;
            }
            Some(t)
        }
        BudgetSemantics::GenerationOnly => {
            let lowest = match mode {
                GenMode::InSlot => t,
                GenMode::LatestEarlier => 1,
            };
            let mut k = t;
            loop {
                if fits(gen_events, k) {
                    return Some(k);
                }
                if k == lowest {
                    return None;
                }
                // Generating below k stores the pair across slot k - 1; if
                // that slot cannot hold one more stored pair, neither can
                // any earlier generation slot.
                if !fits(stored_after, k - 1) {
                    return None;
                }
                k -= 1;
            }
        }
    }
}

fn is_topological(dag: &PrecedenceDag, order: &[usize]) -> bool {
    let mut position = vec![usize::MAX; dag.num_gates()];
    for (pos, &g) in order.iter().enumerate() {
        if g >= dag.num_gates() || position[g] != usize::MAX {
            return false;
        }
        position[g] = pos;
    }
    dag.edges()
        .iter()
        .all(|&(a, b)| position[a] < position[b])
}

/// Reconstruct the stored-pair inventory from the final decision variables.
/// Unrolling the recursion s(t) = s(t-1) + generated(t) - consumed(t) from
/// s(0) = 0, a pair generated at slot g and consumed at slot e contributes
/// one unit to s at every t in g..e.
fn build_inventory(schedule: &Schedule, ind: &GateIndicators, p: usize, busy: Vec<u32>) -> EprInventory {
    let h = schedule.horizon as usize;
    let mut s = vec![0u32; (h + 1) * p * p];
    for g in 0..schedule.num_gates() {
        let Some((u, v)) = ind.endpoints(g) else {
            continue;
        };
        let gen = schedule.tgen[g].expect("remote gate has a generation slot") as usize;
        let exec = schedule.tau[g] as usize;
        for t in gen..exec {
            s[t * p * p + u * p + v] += 1;
            s[t * p * p + v * p + u] += 1;
        }
    }
    EprInventory {
        p,
        horizon: schedule.horizon,
        s,
        usage: busy,
    }
}

/// Per-slot generation and consumption counts up to the makespan.
pub fn epr_utilization(inv: &EprInventory, sch: &Schedule) -> EprSeries {
    debug_assert_eq!(inv.horizon, sch.horizon);
    let makespan = sch.makespan() as usize;
    let mut generated = vec![0u32; makespan];
    let mut consumed = vec![0u32; makespan];
    for g in 0..sch.num_gates() {
        if let Some(gen) = sch.tgen[g] {
            generated[gen as usize - 1] += 1;
            consumed[sch.tau[g] as usize - 1] += 1;
        }
    }
    EprSeries {
        generated,
        consumed,
    }
}
