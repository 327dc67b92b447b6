//! Circuit ingestion and derived structures.
//!
//! Circuits are reduced to their two-qubit CNOT gates at parse time; the
//! runtime of single-qubit gates is negligible at the slot granularity this
//! crate schedules at, so they are dropped on ingestion. From the reduced
//! gate sequence we derive the precedence DAG (qubit-overlap order) and the
//! qubit-interaction graph used by the mapper.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A CNOT gate over logical qubits. `id` is the 1-based position in program
/// order; internal APIs index gates by `id - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub control: usize,
    pub target: usize,
}

impl Gate {
    pub fn operands(&self) -> (usize, usize) {
        (self.control, self.target)
    }

    pub fn touches(&self, qubit: usize) -> bool {
        self.control == qubit || self.target == qubit
    }

    /// Unordered operand pair, normalized to (min, max).
    pub fn pair(&self) -> (usize, usize) {
        if self.control <= self.target {
            (self.control, self.target)
        } else {
            (self.target, self.control)
        }
    }
}

/// An ordered CNOT sequence over `num_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Build a circuit from (control, target) pairs, assigning ids 1..m in
    /// order. Rejects out-of-range operands and control == target.
    pub fn new<I>(num_qubits: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut gates = Vec::new();
        for (i, (control, target)) in pairs.into_iter().enumerate() {
            let id = i + 1;
            for q in [control, target] {
                if q >= num_qubits {
                    return Err(Error::OperandOutOfRange {
                        gate: id,
                        qubit: q,
                        num_qubits,
                    });
                }
            }
            if control == target {
                return Err(Error::DuplicateOperand {
                    gate: id,
                    qubit: control,
                });
            }
            gates.push(Gate {
                id,
                control,
                target,
            });
        }
        Ok(Circuit { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_gates(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Uniform random circuit: each gate draws an ordered qubit pair without
    /// replacement (control != target), independently per gate.
    pub fn random(num_qubits: usize, num_gates: usize, seed: u64) -> Result<Self> {
        if num_qubits < 2 && num_gates > 0 {
            return Err(Error::InvalidInput(
                "random circuit needs at least 2 qubits".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::with_capacity(num_gates);
        for _ in 0..num_gates {
            let control = rng.gen_range(0..num_qubits);
            let mut target = rng.gen_range(0..num_qubits - 1);
            if target >= control {
                target += 1;
            }
            pairs.push((control, target));
        }
        Circuit::new(num_qubits, pairs)
    }
}

#[derive(Serialize, Deserialize)]
struct GateListDoc {
    qubits: usize,
    gates: Vec<[usize; 2]>,
}

/// Parse the canonical gate-list document: UTF-8 JSON with keys `qubits`
/// and `gates` (array of `[control, target]` pairs, order significant).
pub fn parse_gate_list(doc: &str) -> Result<Circuit> {
    let doc: GateListDoc =
        serde_json::from_str(doc).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    Circuit::new(doc.qubits, doc.gates.into_iter().map(|[c, t]| (c, t)))
}

/// Serialize a circuit back to the gate-list document format.
pub fn to_gate_list(c: &Circuit) -> String {
    let doc = GateListDoc {
        qubits: c.num_qubits(),
        gates: c.gates().iter().map(|g| [g.control, g.target]).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("gate-list document serializes")
}

/// Parse the supported QASM-like subset: one `qreg name[n];` declaration,
/// `cx name[a],name[b];` statements, and single-qubit statements which are
/// ignored. `//` comments run to end of line. `OPENQASM` / `include`
/// headers are skipped. Multi-register programs, gates on three or more
/// qubits, and classical statements (`creg`, `measure`, `if`) are rejected.
pub fn parse_qasm_subset(text: &str) -> Result<Circuit> {
    let mut register: Option<(String, usize)> = None;
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    for stmt in split_statements(text) {
        let Statement { body, line, col } = stmt;
        let head_end = body
            .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
            .unwrap_or(body.len());
        let head = &body[..head_end];
        let rest = body[head_end..].trim();

        match head {
            "" => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("expected a statement, found `{body}`"),
                })
            }
            "OPENQASM" | "include" => continue,
            "qreg" => {
                if register.is_some() {
                    return Err(Error::UnsupportedStatement {
                        line,
                        col,
                        what: "multiple quantum registers".into(),
                    });
                }
                let (name, size) = parse_decl(rest, line, col)?;
                register = Some((name, size));
            }
            "creg" | "measure" | "if" | "barrier" => {
                return Err(Error::UnsupportedStatement {
                    line,
                    col,
                    what: format!("`{head}` (classical control is outside the subset)"),
                })
            }
            "cx" => {
                let refs = parse_refs(rest, line, col)?;
                if refs.len() != 2 {
                    return Err(Error::UnsupportedStatement {
                        line,
                        col,
                        what: format!("`cx` with {} operands", refs.len()),
                    });
                }
                let (reg_name, size) = register.as_ref().ok_or(Error::Parse {
                    line,
                    col,
                    msg: "gate before qreg declaration".into(),
                })?;
                let mut ops = [0usize; 2];
                for (slot, (name, idx)) in ops.iter_mut().zip(&refs) {
                    if name != reg_name {
                        return Err(Error::Parse {
                            line,
                            col,
                            msg: format!("unknown register `{name}`"),
                        });
                    }
                    if *idx >= *size {
                        return Err(Error::OperandOutOfRange {
                            gate: pairs.len() + 1,
                            qubit: *idx,
                            num_qubits: *size,
                        });
                    }
                    *slot = *idx;
                }
                if ops[0] == ops[1] {
                    return Err(Error::DuplicateOperand {
                        gate: pairs.len() + 1,
                        qubit: ops[0],
                    });
                }
                pairs.push((ops[0], ops[1]));
            }
            _ => {
                // Anything else must be a single-qubit statement; it is
                // dropped from the reduced representation.
                let refs = parse_refs(rest, line, col)?;
                match refs.len() {
                    1 => continue,
                    n => {
                        return Err(Error::UnsupportedStatement {
                            line,
                            col,
                            what: format!("`{head}` on {n} qubits"),
                        })
                    }
                }
            }
        }
    }

    let (_, size) = register.ok_or(Error::Parse {
        line: 1,
        col: 1,
        msg: "no qreg declaration found".into(),
    })?;
    Circuit::new(size, pairs)
}

struct Statement {
    body: String,
    line: usize,
    col: usize,
}

/// Split source text into `;`-terminated statements, stripping `//` comments
/// and recording each statement's starting position.
fn split_statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start: Option<(usize, usize)> = None;

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find("//") {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        for (colno, ch) in line.chars().enumerate() {
            if ch == ';' {
                let (l, c) = start.take().unwrap_or((lineno + 1, colno + 1));
                let body = buf.trim().to_string();
                buf.clear();
                if !body.is_empty() {
                    out.push(Statement { body, line: l, col: c });
                }
            } else {
                if start.is_none() && !ch.is_whitespace() {
                    start = Some((lineno + 1, colno + 1));
                }
                buf.push(ch);
            }
        }
        buf.push(' ');
    }
    if let Some((l, c)) = start {
        let body = buf.trim().to_string();
        if !body.is_empty() {
            out.push(Statement { body, line: l, col: c });
        }
    }
    out
}

/// Parse `name[size]` from a qreg declaration.
fn parse_decl(rest: &str, line: usize, col: usize) -> Result<(String, usize)> {
    let (name, idx) = parse_one_ref(rest.trim(), line, col)?;
    Ok((name, idx))
}

/// Parse a comma-separated list of `name[index]` references.
fn parse_refs(rest: &str, line: usize, col: usize) -> Result<Vec<(String, usize)>> {
    // Strip a parenthesized parameter list, e.g. `rz(0.5) q[0]`.
    let rest = match rest.strip_prefix('(') {
        Some(tail) => match tail.find(')') {
            Some(pos) => tail[pos + 1..].trim(),
            None => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: "unclosed parameter list".into(),
                })
            }
        },
        None => rest,
    };
    rest.split(',')
        .map(|part| parse_one_ref(part.trim(), line, col))
        .collect()
}

fn parse_one_ref(part: &str, line: usize, col: usize) -> Result<(String, usize)> {
    let open = part.find('[').ok_or_else(|| Error::Parse {
        line,
        col,
        msg: format!("expected `name[index]`, found `{part}`"),
    })?;
    let close = part.rfind(']').ok_or_else(|| Error::Parse {
        line,
        col,
        msg: format!("missing `]` in `{part}`"),
    })?;
    if close != part.len() - 1 || open == 0 {
        return Err(Error::Parse {
            line,
            col,
            msg: format!("expected `name[index]`, found `{part}`"),
        });
    }
    let name = part[..open].trim().to_string();
    let idx: usize = part[open + 1..close]
        .trim()
        .parse()
        .map_err(|_| Error::Parse {
            line,
            col,
            msg: format!("bad index in `{part}`"),
        })?;
    Ok((name, idx))
}

/// Immediate-predecessor precedence DAG: for each gate and each of its two
/// operands, one edge from the most recent earlier gate touching that
/// operand. The transitive closure of these edges is the full qubit-overlap
/// order, and the max-over-predecessors recurrence the scheduler needs is
/// unaffected by dropping transitive edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceDag {
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
}

impl PrecedenceDag {
    /// Edges as (predecessor, successor) 0-based gate indices, with
    /// predecessor < successor.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Immediate predecessors of gate `idx` (0-based).
    pub fn preds_of(&self, idx: usize) -> &[usize] {
        &self.preds[idx]
    }

    pub fn num_gates(&self) -> usize {
        self.preds.len()
    }
}

/// Build the immediate-predecessor DAG via per-qubit last-writer tracking.
pub fn build_precedence(c: &Circuit) -> PrecedenceDag {
    let mut last_touch: Vec<Option<usize>> = vec![None; c.num_qubits()];
    let mut edges = Vec::new();
    let mut preds = vec![Vec::new(); c.num_gates()];

    for (idx, gate) in c.gates().iter().enumerate() {
        let (a, b) = gate.operands();
        let mut sources = [last_touch[a], last_touch[b]];
        if sources[0] == sources[1] {
            sources[1] = None;
        }
        let mut gate_preds: Vec<usize> = sources.iter().flatten().copied().collect();
        gate_preds.sort_unstable();
        for &p in &gate_preds {
            edges.push((p, idx));
        }
        preds[idx] = gate_preds;
        last_touch[a] = Some(idx);
        last_touch[b] = Some(idx);
    }

    PrecedenceDag { edges, preds }
}

/// Symmetric qubit-interaction weights: `weight(i, j)` counts the CNOT gates
/// whose operand set is `{i, j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    n: usize,
    weights: Vec<u64>,
}

impl InteractionGraph {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> u64 {
        self.weights[i * self.n + j]
    }

    /// Total interaction weight W(q) = sum_j w(q, j).
    pub fn total_weight(&self, q: usize) -> u64 {
        self.weights[q * self.n..(q + 1) * self.n].iter().sum()
    }
}

pub fn build_interaction_graph(c: &Circuit) -> InteractionGraph {
    let n = c.num_qubits();
    let mut weights = vec![0u64; n * n];
    for gate in c.gates() {
        let (i, j) = gate.pair();
        weights[i * n + j] += 1;
        weights[j * n + i] += 1;
    }
    InteractionGraph { n, weights }
}
