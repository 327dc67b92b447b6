//! Planner for distributed quantum circuits: map logical qubits onto a
//! cloud of QPUs, schedule every CNOT into EPR-budgeted time slots, validate
//! plans against the full constraint model, and compare against baseline
//! planners including an exhaustive oracle.

pub mod baselines;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod mapper;
pub mod model;
pub mod network;
pub mod scheduler;
pub mod seed;

pub use circuit::{Circuit, Gate, InteractionGraph, PrecedenceDag};
pub use error::{Error, Result};
pub use mapper::{GateIndicators, Mapping};
pub use model::{Metrics, ObjectiveWeights, Plan, ValidationReport};
pub use network::{CostMatrix, QpuSpec, Topology};
pub use scheduler::{EprInventory, GenMode, Schedule};
