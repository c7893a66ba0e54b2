//! Domain model for a synthesis problem: the element catalog (devices, tasks,
//! modules) and the mission that selects from it.
//!
//! All cross references are resolved to indices at load time. Identifiers are
//! kept for display, export naming and round-tripping the document.

mod document;
mod validate;

use std::collections::BTreeMap;

use crate::num::Rational;

pub use document::{digest, load_instance, to_document, LoadError};
pub use validate::{validate_instance, Violation, ViolationCode};

/// A resource class (cpu, memory, a logical peripheral, ...). Units are
/// free-form labels and never converted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceDef {
    pub id: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bandwidth {
    Bounded(Rational),
    Unbounded,
}

impl Bandwidth {
    pub fn limit(&self) -> Option<&Rational> {
        match self {
            Bandwidth::Bounded(b) => Some(b),
            Bandwidth::Unbounded => None,
        }
    }
}

/// A physical communication medium class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportDef {
    pub id: String,
    pub bandwidth: Bandwidth,
    /// Multiplier on a link's nominal rate when routed over this transport.
    pub overhead_factor: Rational,
    /// Wired media are subject to `Mission::cnx_forbidden`.
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dimensions {
    pub resources: Vec<ResourceDef>,
    pub transports: Vec<TransportDef>,
    pub context_dims: Vec<String>,
    pub function_dims: Vec<String>,
    pub message_types: Vec<String>,
}

impl Dimensions {
    pub fn w(&self) -> usize {
        self.resources.len()
    }

    pub fn x(&self) -> usize {
        self.transports.len()
    }

    pub fn j(&self) -> usize {
        self.context_dims.len()
    }

    pub fn q(&self) -> usize {
        self.function_dims.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Device {
    pub id: String,
    /// Base resource budget, one entry per resource.
    pub resources: Vec<Rational>,
    /// Number of connections allowed per transport.
    pub cnx_capacity: Vec<u64>,
    /// Resources granted to a peer connected over the keyed transport.
    pub exposes: BTreeMap<usize, Vec<Rational>>,
    pub cost: Rational,
}

/// Semantic content vectors are sparse and keyed by free-form labels.
pub type Semantics = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPort {
    pub id: String,
    pub msg_type: usize,
    pub provides: Semantics,
    pub nominal_rate: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPort {
    pub id: String,
    pub msg_type: usize,
    pub requires: Semantics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    /// Per-device resource consumption. A missing device means the task
    /// cannot run there.
    pub consumption: BTreeMap<usize, Vec<Rational>>,
    pub context_req: Vec<Rational>,
    pub inputs: Vec<InputPort>,
    pub outputs: Vec<OutputPort>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub id: String,
    pub devices: Vec<usize>,
    pub tasks: Vec<usize>,
    pub capability: Vec<Rational>,
    pub overhead_cost: Rational,
}

impl Module {
    /// Number of member elements, `D_mu + P_mu`.
    pub fn size(&self) -> usize {
        self.devices.len() + self.tasks.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mission {
    pub context: Vec<Rational>,
    pub requirements: Vec<Rational>,
    /// Unordered device pairs that may not share a physical connection.
    pub cnx_forbidden: Vec<(usize, usize)>,
}

impl Mission {
    pub fn forbids(&self, a: usize, b: usize) -> bool {
        self.cnx_forbidden
            .iter()
            .any(|&(u, v)| (u == a && v == b) || (u == b && v == a))
    }
}

/// Relative weights of the module/device, execution and routing cost terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights {
    pub module: Rational,
    pub exec: Rational,
    pub routing: Rational,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            module: Rational::one(),
            exec: Rational::one(),
            routing: Rational::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProblemInstance {
    pub dims: Dimensions,
    pub devices: Vec<Device>,
    pub tasks: Vec<Task>,
    pub modules: Vec<Module>,
    pub mission: Mission,
    pub weights: Weights,
}

impl ProblemInstance {
    pub fn device_index(&self, id: &str) -> Option<usize> {
        self.devices.iter().position(|d| d.id == id)
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn module_index(&self, id: &str) -> Option<usize> {
        self.modules.iter().position(|m| m.id == id)
    }

    /// Module owning each device, `None` for unpartitioned devices.
    pub fn device_owner(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.devices.len()];
        for (m, module) in self.modules.iter().enumerate() {
            for &d in &module.devices {
                if d < owner.len() && owner[d].is_none() {
                    owner[d] = Some(m);
                }
            }
        }
        owner
    }

    /// Module owning each task, `None` for unpartitioned tasks.
    pub fn task_owner(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.tasks.len()];
        for (m, module) in self.modules.iter().enumerate() {
            for &p in &module.tasks {
                if p < owner.len() && owner[p].is_none() {
                    owner[p] = Some(m);
                }
            }
        }
        owner
    }
}
