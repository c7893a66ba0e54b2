use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateId,
    ShapeMismatch,
    DanglingReference,
    NegativeValue,
    OverheadBelowOne,
    ModuleOverlap,
    UnpartitionedElement,
    EmptyModule,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::DuplicateId => "DUPLICATE_ID",
            ViolationCode::ShapeMismatch => "SHAPE_MISMATCH",
            ViolationCode::DanglingReference => "DANGLING_REFERENCE",
            ViolationCode::NegativeValue => "NEGATIVE_VALUE",
            ViolationCode::OverheadBelowOne => "OVERHEAD_BELOW_ONE",
            ViolationCode::ModuleOverlap => "MODULE_OVERLAP",
            ViolationCode::UnpartitionedElement => "UNPARTITIONED_ELEMENT",
            ViolationCode::EmptyModule => "EMPTY_MODULE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Identifier of the offending element.
    pub element: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}): {}", self.code, self.element, self.detail)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, code: ViolationCode, element: &str, detail: impl Into<String>) {
        self.0.push(Violation {
            code,
            element: element.to_string(),
            detail: detail.into(),
        });
    }

    fn shape(&mut self, element: &str, what: &str, found: usize, expected: usize) {
        if found != expected {
            self.push(
                ViolationCode::ShapeMismatch,
                element,
                format!("{what} has {found} entries, expected {expected}"),
            );
        }
    }

    fn non_negative<'a>(&mut self, element: &str, what: &str, values: impl IntoIterator<Item = &'a Rational>) {
        if values.into_iter().any(Rational::is_negative) {
            self.push(ViolationCode::NegativeValue, element, format!("{what} has a negative entry"));
        }
    }

    fn duplicates<'a>(&mut self, kind: &str, ids: impl IntoIterator<Item = &'a str>) {
        let mut seen = HashSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.push(ViolationCode::DuplicateId, id, format!("{kind} identifier declared twice"));
            }
        }
    }
}

/// Check every structural invariant of an instance. The result is empty iff
/// the instance is well formed; its order depends only on the instance.
pub fn validate_instance(inst: &ProblemInstance) -> Vec<Violation> {
    let mut v = Collector(Vec::new());
    let dims = &inst.dims;
    let (w, x, j, q) = (dims.w(), dims.x(), dims.j(), dims.q());
    let (nd, np) = (inst.devices.len(), inst.tasks.len());

    v.duplicates("resource", dims.resources.iter().map(|r| r.id.as_str()));
    v.duplicates("transport", dims.transports.iter().map(|t| t.id.as_str()));
    v.duplicates("context dimension", dims.context_dims.iter().map(String::as_str));
    v.duplicates("function dimension", dims.function_dims.iter().map(String::as_str));
    v.duplicates("message type", dims.message_types.iter().map(String::as_str));
    v.duplicates("device", inst.devices.iter().map(|d| d.id.as_str()));
    v.duplicates("task", inst.tasks.iter().map(|t| t.id.as_str()));
    v.duplicates("module", inst.modules.iter().map(|m| m.id.as_str()));

    for t in &dims.transports {
        if let Bandwidth::Bounded(b) = &t.bandwidth {
            v.non_negative(&t.id, "bandwidth", [b]);
        }
        if t.overhead_factor < 1 {
            v.push(ViolationCode::OverheadBelowOne, &t.id, format!("overhead factor {}", t.overhead_factor));
        }
    }

    for d in &inst.devices {
        v.shape(&d.id, "resources", d.resources.len(), w);
        v.shape(&d.id, "cnx_capacity", d.cnx_capacity.len(), x);
        v.non_negative(&d.id, "resources", &d.resources);
        v.non_negative(&d.id, "cost", [&d.cost]);
        for (&t, vec) in &d.exposes {
            if t >= x {
                v.push(ViolationCode::DanglingReference, &d.id, format!("exposes over transport #{t}"));
            }
            v.shape(&d.id, "exposes", vec.len(), w);
            v.non_negative(&d.id, "exposes", vec);
        }
    }

    for t in &inst.tasks {
        for (&d, vec) in &t.consumption {
            if d >= nd {
                v.push(ViolationCode::DanglingReference, &t.id, format!("consumption on device #{d}"));
            }
            v.shape(&t.id, "consumption", vec.len(), w);
            v.non_negative(&t.id, "consumption", vec);
        }
        v.shape(&t.id, "context_req", t.context_req.len(), j);
        v.non_negative(&t.id, "context_req", &t.context_req);
        for i in &t.inputs {
            if i.msg_type >= dims.message_types.len() {
                v.push(ViolationCode::DanglingReference, &t.id, format!("input {} message type", i.id));
            }
            v.non_negative(&t.id, "input requirement", i.requires.values());
        }
        for o in &t.outputs {
            if o.msg_type >= dims.message_types.len() {
                v.push(ViolationCode::DanglingReference, &t.id, format!("output {} message type", o.id));
            }
            v.non_negative(&t.id, "output semantics", o.provides.values());
            v.non_negative(&t.id, "output rate", [&o.nominal_rate]);
        }
        v.duplicates("input port", t.inputs.iter().map(|i| i.id.as_str()));
        v.duplicates("output port", t.outputs.iter().map(|o| o.id.as_str()));
    }

    let mut device_seen = vec![false; nd];
    let mut task_seen = vec![false; np];
    for m in &inst.modules {
        v.shape(&m.id, "capability", m.capability.len(), q);
        v.non_negative(&m.id, "capability", &m.capability);
        v.non_negative(&m.id, "overhead_cost", [&m.overhead_cost]);
        if m.size() == 0 {
            v.push(ViolationCode::EmptyModule, &m.id, "module has no members");
        }
        for &d in &m.devices {
            match device_seen.get_mut(d) {
                None => v.push(ViolationCode::DanglingReference, &m.id, format!("device #{d}")),
                Some(seen) if *seen => v.push(
                    ViolationCode::ModuleOverlap,
                    &inst.devices[d].id,
                    format!("device also listed by module {}", m.id),
                ),
                Some(seen) => *seen = true,
            }
        }
        for &p in &m.tasks {
            match task_seen.get_mut(p) {
                None => v.push(ViolationCode::DanglingReference, &m.id, format!("task #{p}")),
                Some(seen) if *seen => v.push(
                    ViolationCode::ModuleOverlap,
                    &inst.tasks[p].id,
                    format!("task also listed by module {}", m.id),
                ),
                Some(seen) => *seen = true,
            }
        }
    }
    for (d, seen) in device_seen.iter().enumerate() {
        if !seen {
            v.push(ViolationCode::UnpartitionedElement, &inst.devices[d].id, "device belongs to no module");
        }
    }
    for (p, seen) in task_seen.iter().enumerate() {
        if !seen {
            v.push(ViolationCode::UnpartitionedElement, &inst.tasks[p].id, "task belongs to no module");
        }
    }

    v.shape("mission", "context", inst.mission.context.len(), j);
    v.shape("mission", "requirements", inst.mission.requirements.len(), q);
    v.non_negative("mission", "context", &inst.mission.context);
    v.non_negative("mission", "requirements", &inst.mission.requirements);
    for &(a, b) in &inst.mission.cnx_forbidden {
        if a >= nd || b >= nd {
            v.push(ViolationCode::DanglingReference, "mission", format!("forbidden pair ({a}, {b})"));
        }
    }
    for (name, w) in [
        ("module", &inst.weights.module),
        ("exec", &inst.weights.exec),
        ("routing", &inst.weights.routing),
    ] {
        v.non_negative("weights", name, [w]);
    }

    v.0
}
