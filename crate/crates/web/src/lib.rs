//! Browser bindings: generate an instance, synthesize a system, export LP.
//!
//! The plain functions return JSON or text and are what the tests exercise;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use std::time::Duration;

use robosynth::catalog::{digest, to_document, validate_instance};
use robosynth::gen::{generate, GenSpec};
use robosynth::model::export_lp;
use robosynth::solver::{solve, SolverConfig};
use robosynth::verify::{extract_system, hardware_dot, software_dot, Selection};
use robosynth::{build_program, load_instance, BuildOptions, Candidates, FlowMode, ProblemInstance};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_instance(text: &str) -> Result<ProblemInstance, String> {
    let inst = load_instance(text.as_bytes()).map_err(|e| e.to_string())?;
    match validate_instance(&inst).first() {
        Some(problem) => Err(format!("invalid instance: {problem}")),
        None => Ok(inst),
    }
}

fn parse_mode(mode: &str) -> Result<FlowMode, String> {
    match mode {
        "directed" => Ok(FlowMode::Directed),
        "dummy" => Ok(FlowMode::Dummy),
        other => Err(format!("unknown flow mode {other:?}")),
    }
}

/// Instance JSON for a generator spec (missing fields take defaults).
pub fn generate_json(spec: &str) -> Result<String, String> {
    let spec: GenSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    let inst = generate(&spec).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&to_document(&inst)).map_err(|e| e.to_string())
}

/// Solves an instance and returns status, objective, the extracted system
/// and both DOT graphs as one JSON object.
pub fn synthesize_json(instance: &str, mode: &str, seconds: f64) -> Result<String, String> {
    let inst = parse_instance(instance)?;
    let cands = Candidates::expand(&inst);
    let options = BuildOptions {
        flow_mode: parse_mode(mode)?,
        ..BuildOptions::default()
    };
    let prog = build_program(&inst, &cands, &options);
    let config = SolverConfig {
        time_limit: (seconds > 0.0).then(|| Duration::from_secs_f64(seconds)),
        ..SolverConfig::default()
    };
    let sol = solve(&prog, &config);
    let system = (!sol.values.is_empty()).then(|| {
        let sel = Selection::from_values(&inst, &cands, &prog, &sol.values);
        extract_system(&inst, &cands, &sel, &options.cnx_epsilon)
    });
    let out = json!({
        "digest": digest(&inst),
        "status": sol.status.as_str(),
        "objective": sol.objective.as_ref().map(|o| o.to_exact_string()),
        "lower_bound": sol.lower_bound.as_ref().map(|o| o.to_exact_string()),
        "nodes": sol.stats.nodes,
        "variables": prog.num_vars(),
        "constraints": prog.constraints.len(),
        "hardware_dot": system.as_ref().map(hardware_dot),
        "software_dot": system.as_ref().map(software_dot),
        "system": system,
    });
    serde_json::to_string_pretty(&out).map_err(|e| e.to_string())
}

/// The program for an instance in LP format.
pub fn lp_text(instance: &str, mode: &str) -> Result<String, String> {
    let inst = parse_instance(instance)?;
    let cands = Candidates::expand(&inst);
    let options = BuildOptions {
        flow_mode: parse_mode(mode)?,
        ..BuildOptions::default()
    };
    Ok(export_lp(&build_program(&inst, &cands, &options)))
}

#[wasm_bindgen]
pub fn generate_instance(spec: &str) -> Result<String, JsError> {
    generate_json(spec).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthesize(instance: &str, flow_mode: &str, time_limit: f64) -> Result<String, JsError> {
    synthesize_json(instance, flow_mode, time_limit).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn export_program(instance: &str, flow_mode: &str) -> Result<String, JsError> {
    lp_text(instance, flow_mode).map_err(|e| JsError::new(&e))
}
