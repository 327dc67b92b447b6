//! QPU cloud model: nodes, capacities, communication budgets, link topology,
//! and all-pairs hop costs.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One QPU: `cap` computing qubits, `comm` communication qubits (EPR
/// endpoints available per slot).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpuSpec {
    pub id: usize,
    pub cap: u32,
    pub comm: u32,
}

/// Capacity/budget template applied to every node a generator emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QpuProfile {
    pub cap: u32,
    pub comm: u32,
}

/// Undirected QPU interconnect. Node ids are dense `0..p`, links are
/// self-loop-free unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<QpuSpec>,
    links: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct TopologyDoc {
    nodes: Vec<QpuSpec>,
    links: Vec<[usize; 2]>,
}

impl Topology {
    pub fn new(nodes: Vec<QpuSpec>, links: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let p = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidInput(format!(
                    "node ids must be dense 0..{p}; found id {} at position {i}",
                    node.id
                )));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in links {
            if a == b {
                return Err(Error::InvalidInput(format!("self-link on node {a}")));
            }
            if a >= p || b >= p {
                return Err(Error::InvalidInput(format!(
                    "link ({a}, {b}) references a node outside 0..{p}"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Topology { nodes, links: set })
    }

    pub fn num_qpus(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[QpuSpec] {
        &self.nodes
    }

    pub fn cap(&self, u: usize) -> u32 {
        self.nodes[u].cap
    }

    /// Communication-qubit budget E_u.
    pub fn comm(&self, u: usize) -> u32 {
        self.nodes[u].comm
    }

    pub fn total_capacity(&self) -> u64 {
        self.nodes.iter().map(|n| u64::from(n.cap)).sum()
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .links
            .iter()
            .filter_map(|&(a, b)| {
                if a == u {
                    Some(b)
                } else if b == u {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Links-per-node connectivity ratio E/N.
    pub fn e_over_n(&self) -> f64 {
        self.links.len() as f64 / self.nodes.len() as f64
    }

    pub fn from_json(doc: &str) -> Result<Self> {
        let doc: TopologyDoc =
            serde_json::from_str(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        Topology::new(doc.nodes, doc.links.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        let doc = TopologyDoc {
            nodes: self.nodes.clone(),
            links: self.links.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("topology document serializes")
    }
}

/// All-pairs hop counts. Entries are finite, symmetric, zero on the
/// diagonal, and satisfy the triangle inequality by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    p: usize,
    costs: Vec<u32>,
}

impl CostMatrix {
    pub fn num_qpus(&self) -> usize {
        self.p
    }

    pub fn cost(&self, u: usize, v: usize) -> u32 {
        self.costs[u * self.p + v]
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        u < self.p && v < self.p
    }

    /// Re-index the matrix under a node permutation `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> CostMatrix {
        let p = self.p;
        let mut costs = vec![0u32; p * p];
        for u in 0..p {
            for v in 0..p {
                costs[perm[u] * p + perm[v]] = self.cost(u, v);
            }
        }
        CostMatrix { p, costs }
    }
}

/// Shortest-path hop counts between every QPU pair (unit link weights).
/// Errors with the unreachable node set if the topology is disconnected.
pub fn all_pairs_costs(t: &Topology) -> Result<CostMatrix> {
    let p = t.num_qpus();
    let adj: Vec<Vec<usize>> = (0..p).map(|u| t.neighbors(u)).collect();

    let reached = bfs_distances(&adj, 0);
    let unreachable: Vec<usize> = (0..p).filter(|&u| reached[u].is_none()).collect();
    if !unreachable.is_empty() {
        return Err(Error::DisconnectedTopology { unreachable });
    }

    let mut costs = vec![0u32; p * p];
    for src in 0..p {
        let dist = bfs_distances(&adj, src);
        for (v, d) in dist.into_iter().enumerate() {
            costs[src * p + v] = d.expect("connected graph");
        }
    }
    Ok(CostMatrix { p, costs })
}

fn bfs_distances(adj: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// s x s grid, 4-neighbor.
    Square,
    /// Square grid plus one diagonal per cell.
    Triangle,
    /// Wrap-around 6-neighbor lattice (degree 6, E/N = 3).
    Hexagonal,
    /// Each link sampled independently with probability 1/2, resampled
    /// until connected (bounded retries, then spanning repair).
    Random,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::Square => "square",
            TopologyKind::Triangle => "triangle",
            TopologyKind::Hexagonal => "hexagonal",
            TopologyKind::Random => "random",
        }
    }
}

impl std::str::FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(TopologyKind::Square),
            "triangle" => Ok(TopologyKind::Triangle),
            "hexagonal" => Ok(TopologyKind::Hexagonal),
            "random" => Ok(TopologyKind::Random),
            other => Err(Error::InvalidInput(format!(
                "unknown topology kind `{other}` (expected square|triangle|hexagonal|random)"
            ))),
        }
    }
}

const RANDOM_TOPOLOGY_RETRIES: usize = 64;

/// Generate a topology of `n` nodes, all carrying the template capacity and
/// budget. Lattice kinds require `n` to be a perfect square; `random`
/// requires a seed.
pub fn gen_topology(
    kind: TopologyKind,
    n: usize,
    profile: QpuProfile,
    seed: Option<u64>,
) -> Result<Topology> {
    if n < 2 {
        return Err(Error::BadNodeCount {
            kind: kind.name(),
            n,
            why: "need at least 2 nodes",
        });
    }
    let nodes: Vec<QpuSpec> = (0..n)
        .map(|id| QpuSpec {
            id,
            cap: profile.cap,
            comm: profile.comm,
        })
        .collect();

    let links: Vec<(usize, usize)> = match kind {
        TopologyKind::Square => lattice_links(kind, n, &[(0, 1), (1, 0)])?,
        TopologyKind::Triangle => lattice_links(kind, n, &[(0, 1), (1, 0), (1, 1)])?,
        TopologyKind::Hexagonal => wrapped_lattice_links(kind, n)?,
        TopologyKind::Random => {
            let seed = seed.ok_or(Error::SeedRequired)?;
            random_links(n, seed)
        }
    };

    Topology::new(nodes, links)
}

fn grid_side(kind: TopologyKind, n: usize) -> Result<usize> {
    let s = (n as f64).sqrt().round() as usize;
    if s * s != n {
        return Err(Error::BadNodeCount {
            kind: kind.name(),
            n,
            why: "lattice kinds need a perfect-square node count",
        });
    }
    Ok(s)
}

/// Open lattice: for each node, add the given (dr, dc) offsets that stay in
/// the grid. Offsets (0,1)/(1,0) give the square grid; adding (1,1) puts one
/// diagonal in every cell.
fn lattice_links(kind: TopologyKind, n: usize, offsets: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let s = grid_side(kind, n)?;
    let mut links = Vec::new();
    for r in 0..s {
        for c in 0..s {
            for &(dr, dc) in offsets {
                let (nr, nc) = (r + dr, c + dc);
                if nr < s && nc < s {
                    links.push((r * s + c, nr * s + nc));
                }
            }
        }
    }
    Ok(links)
}

/// Toroidal 6-neighbor lattice: square wrap-around grid plus one wrapped
/// diagonal per node, giving every node degree 6 and exactly 3n links for
/// side >= 3.
fn wrapped_lattice_links(kind: TopologyKind, n: usize) -> Result<Vec<(usize, usize)>> {
    let s = grid_side(kind, n)?;
    let mut links = Vec::new();
    for r in 0..s {
        for c in 0..s {
            for (dr, dc) in [(0, 1), (1, 0), (1, 1)] {
                let (nr, nc) = ((r + dr) % s, (c + dc) % s);
                let (a, b) = (r * s + c, nr * s + nc);
                if a != b {
                    links.push((a, b));
                }
            }
        }
    }
    Ok(links)
}

fn random_links(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links = Vec::new();
    for _ in 0..RANDOM_TOPOLOGY_RETRIES {
        links = sample_links(n, &mut rng);
        if is_connected(n, &links) {
            return links;
        }
    }
    // Spanning repair: bridge components through their smallest members.
    let comps = components(n, &links);
    for pair in comps.windows(2) {
        links.push((pair[0][0], pair[1][0]));
    }
    links
}

fn sample_links(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut links = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(0.5) {
                links.push((a, b));
            }
        }
    }
    links
}

fn components(n: usize, links: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in links {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort();
    comps
}

fn is_connected(n: usize, links: &[(usize, usize)]) -> bool {
    components(n, links).len() == 1
}

/// The default cloud: 5 QPUs, 20 computing and 10 communication qubits
/// each, randomly interconnected from the seed.
pub fn default_cloud(seed: u64) -> Topology {
    gen_topology(
        TopologyKind::Random,
        5,
        QpuProfile { cap: 20, comm: 10 },
        Some(seed),
    )
    .expect("default cloud parameters are valid")
}
