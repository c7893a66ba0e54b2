//! JSON instance documents.
//!
//! Vectors indexed by a declared dimension (resources, transports, context or
//! function dimensions) may be written either as a map keyed by identifier,
//! with absent keys meaning zero, or as a dense array of the declared length.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::*;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("malformed instance document: {0}")]
    Parse(String),
    #[error("unknown {kind} {id:?} referenced by {context}")]
    UnknownReference {
        kind: &'static str,
        id: String,
        context: String,
    },
    #[error("{context}: expected {expected} entries, found {found}")]
    Shape {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("{context}: {detail}")]
    InvalidValue { context: String, detail: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    dims: RawDims,
    #[serde(default)]
    devices: Vec<RawDevice>,
    #[serde(default)]
    tasks: Vec<RawTask>,
    #[serde(default)]
    modules: Vec<RawModule>,
    #[serde(default)]
    mission: RawMission,
    #[serde(default)]
    weights: Option<[Rational; 3]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDims {
    #[serde(default)]
    resources: Vec<RawResource>,
    #[serde(default)]
    transports: Vec<RawTransport>,
    #[serde(default)]
    context_dims: Vec<String>,
    #[serde(default)]
    function_dims: Vec<String>,
    #[serde(default)]
    message_types: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawResource {
    Bare(String),
    Labeled {
        id: String,
        #[serde(default)]
        unit: String,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransport {
    id: String,
    bandwidth: Value,
    #[serde(default = "one")]
    overhead_factor: Rational,
    #[serde(default = "yes")]
    physical: bool,
}

fn one() -> Rational {
    Rational::one()
}

fn yes() -> bool {
    true
}

#[derive(Deserialize, Clone)]
#[serde(untagged)]
enum RawVector {
    Dense(Vec<Rational>),
    Sparse(BTreeMap<String, Rational>),
}

impl Default for RawVector {
    fn default() -> Self {
        RawVector::Sparse(BTreeMap::new())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    id: String,
    #[serde(default)]
    resources: RawVector,
    #[serde(default)]
    cnx_capacity: RawVector,
    #[serde(default)]
    exposes: BTreeMap<String, RawVector>,
    #[serde(default)]
    cost: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    id: String,
    msg_type: String,
    #[serde(default)]
    requires: Semantics,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    id: String,
    msg_type: String,
    #[serde(default)]
    provides: Semantics,
    #[serde(default)]
    nominal_rate: Rational,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    #[serde(default)]
    consumption: Map<String, Value>,
    #[serde(default)]
    context_req: RawVector,
    #[serde(default)]
    inputs: Vec<RawInput>,
    #[serde(default)]
    outputs: Vec<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModule {
    id: String,
    #[serde(default)]
    devices: Vec<String>,
    #[serde(default)]
    tasks: Vec<String>,
    #[serde(default)]
    capability: RawVector,
    #[serde(default)]
    overhead_cost: Rational,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMission {
    #[serde(default)]
    context: RawVector,
    #[serde(default)]
    requirements: RawVector,
    #[serde(default)]
    cnx_forbidden: Vec<(String, String)>,
}

/// First-occurrence index of each identifier.
fn index_of<'a>(ids: impl Iterator<Item = &'a str>) -> HashMap<&'a str, usize> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        map.entry(id).or_insert(i);
    }
    map
}

struct Resolver<'a> {
    resources: HashMap<&'a str, usize>,
    transports: HashMap<&'a str, usize>,
    context: HashMap<&'a str, usize>,
    functions: HashMap<&'a str, usize>,
    messages: HashMap<&'a str, usize>,
    devices: HashMap<&'a str, usize>,
    tasks: HashMap<&'a str, usize>,
}

fn dense(
    raw: &RawVector,
    keys: &HashMap<&str, usize>,
    len: usize,
    kind: &'static str,
    context: impl Fn() -> String,
) -> Result<Vec<Rational>, LoadError> {
    match raw {
        RawVector::Dense(values) => {
            if values.len() != len {
                return Err(LoadError::Shape {
                    context: context(),
                    expected: len,
                    found: values.len(),
                });
            }
            Ok(values.clone())
        }
        RawVector::Sparse(entries) => {
            let mut out = vec![Rational::zero(); len];
            for (key, value) in entries {
                let i = *keys.get(key.as_str()).ok_or_else(|| LoadError::UnknownReference {
                    kind,
                    id: key.clone(),
                    context: context(),
                })?;
                out[i] = value.clone();
            }
            Ok(out)
        }
    }
}

fn integer_vector(values: Vec<Rational>, context: impl Fn() -> String) -> Result<Vec<u64>, LoadError> {
    values
        .into_iter()
        .map(|v| {
            if !v.denom().is_one() || v.is_negative() {
                return Err(LoadError::InvalidValue {
                    context: context(),
                    detail: format!("connection capacity must be a non-negative integer, got {v}"),
                });
            }
            v.numer().to_string().parse::<u64>().map_err(|_| LoadError::InvalidValue {
                context: context(),
                detail: format!("connection capacity out of range: {v}"),
            })
        })
        .collect()
}

/// Parse and resolve an instance document.
pub fn load_instance(document: &[u8]) -> Result<ProblemInstance, LoadError> {
    let raw: RawInstance =
        serde_json::from_slice(document).map_err(|e| LoadError::Parse(e.to_string()))?;

    let dims = Dimensions {
        resources: raw
            .dims
            .resources
            .iter()
            .map(|r| match r {
                RawResource::Bare(id) => ResourceDef {
                    id: id.clone(),
                    unit: String::new(),
                },
                RawResource::Labeled { id, unit } => ResourceDef {
                    id: id.clone(),
                    unit: unit.clone(),
                },
            })
            .collect(),
        transports: raw
            .dims
            .transports
            .iter()
            .map(|t| {
                let bandwidth = match &t.bandwidth {
                    Value::String(s) if s == "unbounded" => Bandwidth::Unbounded,
                    Value::Number(n) => Bandwidth::Bounded(n.to_string().parse().map_err(
                        |e: crate::num::ParseRationalError| LoadError::InvalidValue {
                            context: format!("transport {}", t.id),
                            detail: e.to_string(),
                        },
                    )?),
                    other => {
                        return Err(LoadError::InvalidValue {
                            context: format!("transport {}", t.id),
                            detail: format!("bandwidth must be a number or \"unbounded\", got {other}"),
                        })
                    }
                };
                Ok(TransportDef {
                    id: t.id.clone(),
                    bandwidth,
                    overhead_factor: t.overhead_factor.clone(),
                    physical: t.physical,
                })
            })
            .collect::<Result<_, _>>()?,
        context_dims: raw.dims.context_dims.clone(),
        function_dims: raw.dims.function_dims.clone(),
        message_types: raw.dims.message_types.clone(),
    };

    let rs = Resolver {
        resources: index_of(dims.resources.iter().map(|r| r.id.as_str())),
        transports: index_of(dims.transports.iter().map(|t| t.id.as_str())),
        context: index_of(dims.context_dims.iter().map(String::as_str)),
        functions: index_of(dims.function_dims.iter().map(String::as_str)),
        messages: index_of(dims.message_types.iter().map(String::as_str)),
        devices: index_of(raw.devices.iter().map(|d| d.id.as_str())),
        tasks: index_of(raw.tasks.iter().map(|t| t.id.as_str())),
    };
    let (w, x, j, q) = (dims.w(), dims.x(), dims.j(), dims.q());

    let mut devices = Vec::with_capacity(raw.devices.len());
    for rd in &raw.devices {
        let ctx = |what: &str| format!("device {} {what}", rd.id);
        let resources = dense(&rd.resources, &rs.resources, w, "resource", || ctx("resources"))?;
        let cap = dense(&rd.cnx_capacity, &rs.transports, x, "transport", || ctx("cnx_capacity"))?;
        let cnx_capacity = integer_vector(cap, || ctx("cnx_capacity"))?;
        let mut exposes = BTreeMap::new();
        for (tid, vec) in &rd.exposes {
            let t = *rs.transports.get(tid.as_str()).ok_or_else(|| LoadError::UnknownReference {
                kind: "transport",
                id: tid.clone(),
                context: ctx("exposes"),
            })?;
            exposes.insert(t, dense(vec, &rs.resources, w, "resource", || ctx("exposes"))?);
        }
        devices.push(Device {
            id: rd.id.clone(),
            resources,
            cnx_capacity,
            exposes,
            cost: rd.cost.clone(),
        });
    }

    let message = |id: &str, context: String| {
        rs.messages
            .get(id)
            .copied()
            .ok_or_else(|| LoadError::UnknownReference {
                kind: "message type",
                id: id.to_string(),
                context,
            })
    };

    let mut tasks = Vec::with_capacity(raw.tasks.len());
    for rt in &raw.tasks {
        let ctx = |what: &str| format!("task {} {what}", rt.id);
        let mut consumption = BTreeMap::new();
        for (did, value) in &rt.consumption {
            let d = *rs.devices.get(did.as_str()).ok_or_else(|| LoadError::UnknownReference {
                kind: "device",
                id: did.clone(),
                context: ctx("consumption"),
            })?;
            let vec: RawVector = serde_json::from_value(value.clone())
                .map_err(|e| LoadError::Parse(format!("{}: {e}", ctx("consumption"))))?;
            consumption.insert(d, dense(&vec, &rs.resources, w, "resource", || ctx("consumption"))?);
        }
        let context_req = dense(&rt.context_req, &rs.context, j, "context dimension", || {
            ctx("context_req")
        })?;
        let inputs = rt
            .inputs
            .iter()
            .map(|i| {
                Ok(InputPort {
                    id: i.id.clone(),
                    msg_type: message(&i.msg_type, ctx(&format!("input {}", i.id)))?,
                    requires: i.requires.clone(),
                })
            })
            .collect::<Result<_, LoadError>>()?;
        let outputs = rt
            .outputs
            .iter()
            .map(|o| {
                Ok(OutputPort {
                    id: o.id.clone(),
                    msg_type: message(&o.msg_type, ctx(&format!("output {}", o.id)))?,
                    provides: o.provides.clone(),
                    nominal_rate: o.nominal_rate.clone(),
                })
            })
            .collect::<Result<_, LoadError>>()?;
        tasks.push(Task {
            id: rt.id.clone(),
            consumption,
            context_req,
            inputs,
            outputs,
        });
    }

    let mut modules = Vec::with_capacity(raw.modules.len());
    for rm in &raw.modules {
        let ctx = |what: &str| format!("module {} {what}", rm.id);
        let devices = rm
            .devices
            .iter()
            .map(|id| {
                rs.devices.get(id.as_str()).copied().ok_or_else(|| LoadError::UnknownReference {
                    kind: "device",
                    id: id.clone(),
                    context: ctx("devices"),
                })
            })
            .collect::<Result<_, _>>()?;
        let module_tasks = rm
            .tasks
            .iter()
            .map(|id| {
                rs.tasks.get(id.as_str()).copied().ok_or_else(|| LoadError::UnknownReference {
                    kind: "task",
                    id: id.clone(),
                    context: ctx("tasks"),
                })
            })
            .collect::<Result<_, _>>()?;
        modules.push(Module {
            id: rm.id.clone(),
            devices,
            tasks: module_tasks,
            capability: dense(&rm.capability, &rs.functions, q, "function dimension", || {
                ctx("capability")
            })?,
            overhead_cost: rm.overhead_cost.clone(),
        });
    }

    let mission = Mission {
        context: dense(&raw.mission.context, &rs.context, j, "context dimension", || {
            "mission context".into()
        })?,
        requirements: dense(&raw.mission.requirements, &rs.functions, q, "function dimension", || {
            "mission requirements".into()
        })?,
        cnx_forbidden: raw
            .mission
            .cnx_forbidden
            .iter()
            .map(|(a, b)| {
                let find = |id: &String| {
                    rs.devices.get(id.as_str()).copied().ok_or_else(|| LoadError::UnknownReference {
                        kind: "device",
                        id: id.clone(),
                        context: "mission cnx_forbidden".into(),
                    })
                };
                Ok((find(a)?, find(b)?))
            })
            .collect::<Result<_, LoadError>>()?,
    };

    let weights = match raw.weights {
        Some([module, exec, routing]) => Weights {
            module,
            exec,
            routing,
        },
        None => Weights::default(),
    };

    Ok(ProblemInstance {
        dims,
        devices,
        tasks,
        modules,
        mission,
        weights,
    })
}

fn sparse(values: &[Rational], keys: &[&str]) -> Value {
    let mut m = Map::new();
    for (v, k) in values.iter().zip(keys) {
        if !v.is_zero() {
            m.insert((*k).to_string(), serde_json::to_value(v).expect("rational serializes"));
        }
    }
    Value::Object(m)
}

fn num(v: &Rational) -> Value {
    serde_json::to_value(v).expect("rational serializes")
}

/// Canonical JSON document for an instance. Loading the result yields an
/// equal instance.
pub fn to_document(inst: &ProblemInstance) -> Value {
    let res: Vec<&str> = inst.dims.resources.iter().map(|r| r.id.as_str()).collect();
    let trn: Vec<&str> = inst.dims.transports.iter().map(|t| t.id.as_str()).collect();
    let ctx: Vec<&str> = inst.dims.context_dims.iter().map(String::as_str).collect();
    let fun: Vec<&str> = inst.dims.function_dims.iter().map(String::as_str).collect();
    let msg = |i: usize| inst.dims.message_types.get(i).cloned().unwrap_or_default();
    let dev = |i: usize| inst.devices.get(i).map(|d| d.id.clone()).unwrap_or_default();
    let tsk = |i: usize| inst.tasks.get(i).map(|t| t.id.clone()).unwrap_or_default();

    let transports: Vec<Value> = inst
        .dims
        .transports
        .iter()
        .map(|t| {
            json!({
                "id": t.id,
                "bandwidth": match &t.bandwidth {
                    Bandwidth::Bounded(b) => num(b),
                    Bandwidth::Unbounded => Value::String("unbounded".into()),
                },
                "overhead_factor": num(&t.overhead_factor),
                "physical": t.physical,
            })
        })
        .collect();

    let devices: Vec<Value> = inst
        .devices
        .iter()
        .map(|d| {
            let cap: Vec<Rational> = d.cnx_capacity.iter().map(|&c| Rational::from(c as i64)).collect();
            let mut exposes = Map::new();
            for (t, v) in &d.exposes {
                exposes.insert(trn.get(*t).copied().unwrap_or_default().to_string(), sparse(v, &res));
            }
            json!({
                "id": d.id,
                "resources": sparse(&d.resources, &res),
                "cnx_capacity": sparse(&cap, &trn),
                "exposes": exposes,
                "cost": num(&d.cost),
            })
        })
        .collect();

    let tasks: Vec<Value> = inst
        .tasks
        .iter()
        .map(|t| {
            let mut consumption = Map::new();
            for (d, v) in &t.consumption {
                consumption.insert(dev(*d), sparse(v, &res));
            }
            json!({
                "id": t.id,
                "consumption": consumption,
                "context_req": sparse(&t.context_req, &ctx),
                "inputs": t.inputs.iter().map(|i| json!({
                    "id": i.id,
                    "msg_type": msg(i.msg_type),
                    "requires": i.requires,
                })).collect::<Vec<_>>(),
                "outputs": t.outputs.iter().map(|o| json!({
                    "id": o.id,
                    "msg_type": msg(o.msg_type),
                    "provides": o.provides,
                    "nominal_rate": num(&o.nominal_rate),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();

    let modules: Vec<Value> = inst
        .modules
        .iter()
        .map(|m| {
            json!({
                "id": m.id,
                "devices": m.devices.iter().map(|&d| dev(d)).collect::<Vec<_>>(),
                "tasks": m.tasks.iter().map(|&p| tsk(p)).collect::<Vec<_>>(),
                "capability": sparse(&m.capability, &fun),
                "overhead_cost": num(&m.overhead_cost),
            })
        })
        .collect();

    json!({
        "dims": {
            "resources": inst.dims.resources.iter().map(|r| json!({"id": r.id, "unit": r.unit})).collect::<Vec<_>>(),
            "transports": transports,
            "context_dims": inst.dims.context_dims,
            "function_dims": inst.dims.function_dims,
            "message_types": inst.dims.message_types,
        },
        "devices": devices,
        "tasks": tasks,
        "modules": modules,
        "mission": {
            "context": sparse(&inst.mission.context, &ctx),
            "requirements": sparse(&inst.mission.requirements, &fun),
            "cnx_forbidden": inst.mission.cnx_forbidden.iter().map(|&(a, b)| json!([dev(a), dev(b)])).collect::<Vec<_>>(),
        },
        "weights": [num(&inst.weights.module), num(&inst.weights.exec), num(&inst.weights.routing)],
    })
}

/// SHA-256 of the canonical compact document, hex encoded.
pub fn digest(inst: &ProblemInstance) -> String {
    let text = serde_json::to_string(&to_document(inst)).expect("document serializes");
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}
