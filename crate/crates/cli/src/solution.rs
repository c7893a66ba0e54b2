//! Solution files: variable values bound to an instance digest.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use robosynth::expansion::Candidates;
use robosynth::model::{structural_vars, Namer, Program};
use robosynth::num::Rational;
use robosynth::solver::{Solution, Status};
use robosynth::verify::Selection;
use robosynth::ProblemInstance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance_digest: String,
    pub status: Status,
    pub flow_mode: robosynth::FlowMode,
    /// Exact objective as `p/q`, absent without a feasible vector.
    pub objective: Option<String>,
    pub objective_value: Option<f64>,
    pub lower_bound: Option<String>,
    pub nodes: u64,
    pub values: BTreeMap<String, u8>,
}

fn exact(r: &Option<Rational>) -> Option<String> {
    r.as_ref().map(Rational::to_exact_string)
}

impl SolutionFile {
    pub fn new(digest: String, flow_mode: robosynth::FlowMode, prog: &Program, sol: &Solution) -> Self {
        SolutionFile {
            instance_digest: digest,
            status: sol.status,
            flow_mode,
            objective: exact(&sol.objective),
            objective_value: sol.objective.as_ref().map(Rational::to_f64),
            lower_bound: exact(&sol.lower_bound),
            nodes: sol.stats.nodes,
            values: prog
                .names
                .iter()
                .zip(&sol.values)
                .map(|(n, &v)| (n.clone(), v as u8))
                .collect(),
        }
    }

    /// The structural selection named by the values. Every structural
    /// variable of the instance must be present; flow auxiliaries are
    /// ignored.
    pub fn selection(&self, inst: &ProblemInstance, cands: &Candidates) -> Result<Selection> {
        let namer = Namer::new(inst, &cands.connections);
        let mut sel = Selection::empty(inst, cands);
        let mut missing = Vec::new();
        for id in structural_vars(inst, cands) {
            let name = namer.name(&id);
            match self.values.get(&name) {
                Some(0) => {}
                Some(1) => sel.set(&id, true),
                Some(v) => bail!("variable {name} has value {v}, expected 0 or 1"),
                None => missing.push(name),
            }
        }
        if !missing.is_empty() {
            bail!("solution lacks {} variable(s), e.g. {}", missing.len(), missing[0]);
        }
        Ok(sel)
    }
}

pub fn read(path: &std::path::Path) -> Result<SolutionFile> {
    let text = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&text).with_context(|| format!("parsing solution {}", path.display()))
}
