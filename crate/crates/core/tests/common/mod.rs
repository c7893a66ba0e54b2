#![allow(dead_code)]

use std::path::PathBuf;

use robosynth::catalog::{load_instance, ProblemInstance};

pub fn instances_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

pub fn fixture(name: &str) -> ProblemInstance {
    let path = instances_dir().join("fixtures").join(name);
    let text = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    load_instance(&text).unwrap()
}

pub fn parse(doc: &str) -> ProblemInstance {
    load_instance(doc.as_bytes()).unwrap()
}

/// Two devices, one task that runs on either, one module holding all three.
pub const TWO_DEVICES: &str = r#"{
    "dims": {"resources": ["cpu"], "function_dims": ["f"]},
    "devices": [
        {"id": "a", "resources": {"cpu": 4}, "cost": 1},
        {"id": "b", "resources": {"cpu": 2}, "cost": 1}
    ],
    "tasks": [{"id": "t", "consumption": {"a": {"cpu": 1}, "b": {"cpu": 1}}}],
    "modules": [{"id": "m", "devices": ["a", "b"], "tasks": ["t"], "capability": {"f": 1}}]
}"#;

/// Source pinned to d1, sink pinned to d3, bus only between neighbours.
pub const CHAIN: &str = r#"{
    "dims": {
        "resources": ["cpu"],
        "transports": [{"id": "bus", "bandwidth": 10}],
        "function_dims": ["f"],
        "message_types": ["data"]
    },
    "devices": [
        {"id": "d1", "resources": {"cpu": 1}, "cnx_capacity": {"bus": 1}},
        {"id": "d2", "resources": {"cpu": 1}, "cnx_capacity": {"bus": 2}},
        {"id": "d3", "resources": {"cpu": 1}, "cnx_capacity": {"bus": 1}}
    ],
    "tasks": [
        {"id": "src", "consumption": {"d1": {"cpu": 1}},
         "outputs": [{"id": "out", "msg_type": "data", "nominal_rate": 2}]},
        {"id": "dst", "consumption": {"d3": {"cpu": 1}},
         "inputs": [{"id": "in", "msg_type": "data"}]}
    ],
    "modules": [
        {"id": "m", "devices": ["d1", "d2", "d3"], "tasks": ["src", "dst"], "capability": {"f": 1}}
    ],
    "mission": {"requirements": {"f": 1}, "cnx_forbidden": [["d1", "d3"]]}
}"#;
